//! Critically sampled, perfectly reconstructing spline-like wavelet
//! filterbanks on connected weighted graphs.
//!
//! The analysis filters are polynomials in the normalized adjacency
//! `A^S = D^{-1/2} W D^{-1/2}`:
//!
//! ```text
//! G   = sum_l w_l (A^S)^(l-1)
//! H_L = (I + G) / 2,   H_H = (I - G) / 2
//! ```
//!
//! The weights `w` are designed so that `H_H` annihilates the `r` lowest
//! graph frequencies and `H_L` the `s` highest. A vertex partition `{A, B}`
//! with sampling matrix `K = diag(+1 on A, -1 on B)` makes `I + KG`
//! invertible and the synthesis filter is `H_INV = 2 (I + KG)^{-1}`.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | [`Graph`], [`NormalizedGraph`], validation, coloring |
//! | [`generate`] | ring, path, comet, random sensor and bipartite generators |
//! | [`spectral`] | eigendecomposition, GFT, deduplication, Vandermonde systems |
//! | [`design`] | closed form, minimax and regularized designs, legacy baseline |
//! | [`sampling`] | row-selection partition search, polarity, bipartite split |
//! | [`filterbank`] | assembly, analysis, synthesis, zero-DC banks, error bound |
//! | [`mra`] | Kron reduction, pyramids, hard-threshold denoising |
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod design;
pub mod error;
pub mod filterbank;
pub mod generate;
pub mod graph;
pub mod linalg;
pub mod mra;
pub mod sampling;
pub mod solver;
pub mod spectral;

pub use design::{DesignConfig, DesignModel, FilterDesign, FilterPair};
pub use error::{Error, Result};
pub use filterbank::{ChannelOutputs, Filterbank};
pub use generate::{generate_graph, GraphKind};
pub use graph::{normalize, Graph, NormalizedGraph};
pub use mra::Pyramid;
pub use sampling::{SamplingPattern, Strategy};
pub use spectral::{eigendecompose, DedupedSpectrum, SpectralDecomposition, VandermondeSystem};
