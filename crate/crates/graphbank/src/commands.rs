//! Subcommand implementations. Each writes its files and fills a
//! [`RunReport`]; [`run`] turns the outcome into an exit code.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use graphbank_core::design::{ideal_lowpass_values, median_threshold};
use graphbank_core::filterbank::relative_error;
use graphbank_core::mra::{
    decompose, denoise, kron_reduce, reconstruct_pyramid, ReconstructionMode,
};
use graphbank_core::spectral::{dedup_eigenvalues, DEDUP_TOL};
use graphbank_core::{DesignConfig, Graph, Strategy};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::cli::{
    BenchArgs, Command, Common, DecomposeArgs, DenoiseArgs, DesignArgs, FamilyArgs, GenerateArgs,
    GraphInput, VerifyArgs,
};
use crate::experiments::{
    build_bank, default_signal, design_graph, ensemble_graph, graph_kind, smooth_signal,
    strategy_sigmas, Sampling,
};
use crate::formats::{load_config, BankJson, DesignJson, RunReport};
use crate::io;
use crate::streams::{gaussian_noise, rng, unit_signal, Stream};

/// Largest accepted relative reconstruction residual.
pub const PR_TOL: f64 = 1e-8;
/// Largest accepted `||H_H u_i||` / `||H_L u_i||` on annihilated frequencies.
pub const ANNIHILATION_TOL: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

struct Ctx {
    out: PathBuf,
    report: RunReport,
}

impl Ctx {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.report
            .timings
            .insert(stage.to_string(), t.elapsed().as_secs_f64() * 1e3);
        v
    }

    fn file(&mut self, name: &str) -> PathBuf {
        self.report.files.push(name.to_string());
        self.out.join(name)
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Generate(a) => &a.common,
        Command::Design(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Decompose(a) => &a.common,
        Command::Denoise(a) => &a.common,
        Command::Bench(a) => &a.common,
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Generate(_) => "generate",
        Command::Design(_) => "design",
        Command::Verify(_) => "verify",
        Command::Decompose(_) => "decompose",
        Command::Denoise(_) => "denoise",
        Command::Bench(_) => "bench",
    }
}

/// Runs one subcommand, writes `report.json` and returns the exit code:
/// 0 when every tolerance is met, 1 when a tolerance fails, 2 on errors.
pub fn run(cmd: &Command) -> i32 {
    let c = common(cmd);
    let cfg_result = load_config(c.config.as_deref());
    let cfg = cfg_result.as_ref().copied().unwrap_or_default();
    let mut ctx = Ctx {
        out: c.out.clone(),
        report: RunReport::new(name(cmd), &cfg, c.seed),
    };
    let result = std::fs::create_dir_all(&c.out)
        .with_context(|| format!("creating {}", c.out.display()))
        .and_then(|_| cfg_result.map_err(anyhow::Error::from))
        .and_then(|cfg| match cmd {
            Command::Generate(a) => cmd_generate(&mut ctx, a),
            Command::Design(a) => cmd_design(&mut ctx, a, &cfg),
            Command::Verify(a) => cmd_verify(&mut ctx, a, &cfg),
            Command::Decompose(a) => cmd_decompose(&mut ctx, a, &cfg),
            Command::Denoise(a) => cmd_denoise(&mut ctx, a, &cfg),
            Command::Bench(a) => cmd_bench(&mut ctx, a, &cfg),
        });
    let code = match result {
        Ok(code) => {
            if code != EXIT_OK {
                ctx.report.status = "tolerance".into();
                eprintln!(
                    "graphbank {}: tolerance check failed (see report.json)",
                    ctx.report.command
                );
            }
            code
        }
        Err(e) => {
            let msg = format!("{e:#}");
            eprintln!("graphbank {}: error: {msg}", ctx.report.command);
            ctx.report.status = "error".into();
            ctx.report.error = Some(msg);
            EXIT_ERROR
        }
    };
    if let Err(e) = ctx.report.write(&ctx.out.join("report.json")) {
        eprintln!("graphbank: {e}");
        return EXIT_ERROR;
    }
    code
}

fn load_graph(input: &GraphInput) -> anyhow::Result<Graph> {
    Ok(io::read_graph(&input.graph, input.coords.as_deref())?)
}

fn load_or_default_signal(path: Option<&Path>, g: &Graph) -> anyhow::Result<DVector<f64>> {
    let x = match path {
        Some(p) => io::read_signal(p)?,
        None => {
            let sd = graphbank_core::eigendecompose(&graphbank_core::normalize(g))?;
            default_signal(g, &sd)
        }
    };
    if x.len() != g.n() {
        bail!(
            "signal has {} values but the graph has {} vertices",
            x.len(),
            g.n()
        );
    }
    Ok(x)
}

fn family_kind(f: &FamilyArgs) -> anyhow::Result<graphbank_core::GraphKind> {
    graph_kind(&f.family, f.n, f.left, f.right, f.p).ok_or_else(|| {
        anyhow!(
            "unknown family `{}` (ring, path, comet, sensor, bipartite)",
            f.family
        )
    })
}

fn cmd_generate(ctx: &mut Ctx, a: &GenerateArgs) -> anyhow::Result<i32> {
    let kind = family_kind(&a.family)?;
    let g = ctx.time("generate", || ensemble_graph(kind, a.common.seed, 0))?;
    let edges = ctx.file("graph.edges");
    let coords = g.coords().is_some().then(|| ctx.file("graph.coords"));
    io::write_graph(&g, &edges, coords.as_deref())?;
    ctx.report.metric("n", g.n() as f64);
    ctx.report.metric("edges", g.edges().len() as f64);
    Ok(EXIT_OK)
}

fn cmd_design(ctx: &mut Ctx, a: &DesignArgs, cfg: &DesignConfig) -> anyhow::Result<i32> {
    let g = ctx.time("load", || load_graph(&a.input))?;
    let d = ctx.time("design", || design_graph(&g, cfg))?;
    let ds = dedup_eigenvalues(d.sd.xi.as_slice(), DEDUP_TOL)?;
    let xi0 = cfg.xi0.unwrap_or_else(|| median_threshold(&ds));
    let h = ideal_lowpass_values(&ds.xi_unique, xi0)?;
    let rows: Vec<Vec<f64>> = ds
        .xi_unique
        .iter()
        .zip(d.design.gamma_unique.iter())
        .zip(h.iter())
        .map(|((&xi, &g), &hi)| vec![1.0 - xi, xi, hi, 0.5 * (1.0 + g), 0.5 * (1.0 - g)])
        .collect();
    let csv = ctx.file("response.csv");
    io::write_csv(&csv, &["lambda", "xi", "h_ideal", "h_low", "h_high"], &rows)?;
    let dj = DesignJson::new(&d.design, d.response_check.as_ref());
    let json = ctx.file("design.json");
    io::write_text(&json, &(serde_json::to_string_pretty(&dj)? + "\n"))?;

    let r = &mut ctx.report;
    r.metric("objective", d.design.objective);
    r.metric("xi0", xi0);
    r.metric("distinct_eigenvalues", ds.m() as f64);
    r.metric("r_effective", d.orders.0 as f64);
    r.metric("s_effective", d.orders.1 as f64);
    if d.response_check.is_some() {
        let (top, bottom, middle) = d.design.constraint_residuals(cfg.r, cfg.s, cfg.epsilon);
        r.metric("residual_top", top);
        r.metric("residual_bottom", bottom);
        r.metric("middle_excess", middle);
    }
    let violations = dj.gamma_violations.len();
    r.metric("gamma_violations", violations as f64);
    Ok(if violations == 0 {
        EXIT_OK
    } else {
        EXIT_TOLERANCE
    })
}

fn cmd_verify(ctx: &mut Ctx, a: &VerifyArgs, cfg: &DesignConfig) -> anyhow::Result<i32> {
    let strategy = Strategy::from_name(&a.strategy)
        .ok_or_else(|| anyhow!("unknown strategy `{}`", a.strategy))?;
    let sampling = Sampling::parse(&a.sampling, strategy).ok_or_else(|| {
        anyhow!(
            "unknown sampling `{}` (alg1, natural, all-lowpass)",
            a.sampling
        )
    })?;
    let g = ctx.time("load", || load_graph(&a.input))?;
    let seed = a.common.seed;
    let built = ctx.time("assemble", || {
        build_bank(
            &g,
            cfg,
            sampling,
            a.zero_dc,
            &mut rng(seed, Stream::Strategy, 0),
        )
    })?;
    let fb = &built.bank;
    let n = g.n();
    let max_res = ctx.time("trials", || -> anyhow::Result<f64> {
        let mut r = rng(seed, Stream::Signal, 0);
        let mut worst = 0.0f64;
        for _ in 0..a.trials {
            worst = worst.max(fb.pr_residual(&unit_signal(n, &mut r))?);
        }
        Ok(worst)
    })?;
    let bank_json = ctx.file("bank.json");
    io::write_text(
        &bank_json,
        &(serde_json::to_string_pretty(&BankJson::new(&built.designed.design, fb))? + "\n"),
    )?;

    let r = &mut ctx.report;
    r.metric("pr_residual", max_res);
    r.metric("pr_identity_residual", fb.pr_identity_residual());
    r.metric("sigma_min", fb.sigma_min());
    r.metric("bound", fb.bound_const());
    r.metric("condition", fb.condition());
    r.metric("lowpass_samples", fb.pattern().set_a().len() as f64);
    r.metric("highpass_samples", fb.pattern().set_b().len() as f64);
    let mut ok = max_res <= PR_TOL;
    if let Some(rep) = &built.designed.response_check {
        let (rr, ss) = built.designed.orders;
        let (high, low) = fb.pair().annihilation_residuals(&built.designed.sd, rr, ss);
        r.metric("annihilation_highpass", high);
        r.metric("annihilation_lowpass", low);
        r.metric("gamma_violations", rep.violations.len() as f64);
        ok &= high <= ANNIHILATION_TOL && low <= ANNIHILATION_TOL;
    }
    Ok(if ok { EXIT_OK } else { EXIT_TOLERANCE })
}

fn cmd_decompose(ctx: &mut Ctx, a: &DecomposeArgs, cfg: &DesignConfig) -> anyhow::Result<i32> {
    let g = ctx.time("load", || load_graph(&a.input))?;
    let x = load_or_default_signal(a.signal.as_deref(), &g)?;
    let p = ctx.time("decompose", || decompose(&g, &x, a.depth as usize, cfg))?;
    let full = ctx.time("reconstruct", || {
        reconstruct_pyramid(&p, ReconstructionMode::Full)
    })?;
    let lp = reconstruct_pyramid(&p, ReconstructionMode::LpOnly)?;
    let errors = p.level_errors(&x)?;
    for (k, lv) in p.levels().iter().enumerate() {
        let l = k + 1;
        let retained = lv.retained();
        let high_idx: Vec<usize> = lv
            .bank
            .pattern()
            .set_b()
            .iter()
            .map(|&i| lv.orig_index[i])
            .collect();
        let low_path = ctx.file(&format!("level{l}_low.csv"));
        io::write_indexed(&low_path, &retained, &lv.outputs.y_low)?;
        let high_path = ctx.file(&format!("level{l}_high.csv"));
        io::write_indexed(&high_path, &high_idx, &lv.outputs.y_high)?;
        let reduced = kron_reduce(&lv.graph, lv.bank.pattern().set_a())
            .with_context(|| format!("level {l}"))?;
        let edges = ctx.file(&format!("level{l}_reduced.edges"));
        io::write_graph(&reduced, &edges, None)?;
        ctx.report
            .metric(format!("level{l}_vertices"), lv.graph.n() as f64);
        ctx.report
            .metric(format!("level{l}_lowpass"), retained.len() as f64);
        ctx.report.metric(format!("e{l}"), errors[k]);
    }
    let lp_path = ctx.file("lp_only.csv");
    io::write_signal(&lp_path, &lp)?;
    let residual = (&full - &x).amax() / x.amax().max(f64::MIN_POSITIVE);
    let r = &mut ctx.report;
    r.metric("levels", p.depth() as f64);
    r.metric("truncated", if p.truncated() { 1.0 } else { 0.0 });
    r.metric("pr_residual", residual);
    if x.norm() > 0.0 {
        r.metric("e", relative_error(&lp, &x)?);
    }
    Ok(if residual <= PR_TOL {
        EXIT_OK
    } else {
        EXIT_TOLERANCE
    })
}

fn cmd_denoise(ctx: &mut Ctx, a: &DenoiseArgs, cfg: &DesignConfig) -> anyhow::Result<i32> {
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        bail!("--sigma must be finite and >= 0, got {}", a.sigma);
    }
    let g = ctx.time("load", || load_graph(&a.input))?;
    let (clean, noisy) = match &a.noisy {
        Some(p) => {
            let noisy = io::read_signal(p)?;
            if noisy.len() != g.n() {
                bail!(
                    "noisy signal has {} values but the graph has {} vertices",
                    noisy.len(),
                    g.n()
                );
            }
            let clean = a
                .signal
                .as_deref()
                .map(|s| load_or_default_signal(Some(s), &g))
                .transpose()?;
            (clean, noisy)
        }
        None => {
            let clean = match a.signal.as_deref() {
                Some(p) => load_or_default_signal(Some(p), &g)?,
                None => smooth_signal(&g)?,
            };
            let noise = gaussian_noise(g.n(), a.sigma, &mut rng(a.common.seed, Stream::Noise, 0));
            let noisy = &clean + noise;
            (Some(clean), noisy)
        }
    };
    let out = ctx.time("denoise", || {
        denoise(&g, &noisy, a.sigma, a.depth as usize, cfg)
    })?;
    let noisy_path = ctx.file("noisy.csv");
    io::write_signal(&noisy_path, &noisy)?;
    let out_path = ctx.file("denoised.csv");
    io::write_signal(&out_path, &out)?;
    let r = &mut ctx.report;
    r.metric("threshold", 3.0 * a.sigma);
    if let Some(clean) = clean.filter(|c| c.norm() > 0.0) {
        r.metric("noisy_relative_error", relative_error(&noisy, &clean)?);
        r.metric("denoised_relative_error", relative_error(&out, &clean)?);
    }
    Ok(EXIT_OK)
}

fn cmd_bench(ctx: &mut Ctx, a: &BenchArgs, cfg: &DesignConfig) -> anyhow::Result<i32> {
    let kind = family_kind(&a.family)?;
    let strategies: Vec<Strategy> = a
        .strategies
        .iter()
        .map(|s| Strategy::from_name(s.trim()).ok_or_else(|| anyhow!("unknown strategy `{s}`")))
        .collect::<anyhow::Result<_>>()?;
    if strategies.is_empty() {
        bail!("no strategies given");
    }
    let seed = a.common.seed;
    let rows: Vec<Vec<f64>> = ctx.time("bench", || {
        (0..a.graphs)
            .into_par_iter()
            .map(|i| -> anyhow::Result<Vec<f64>> {
                let g = ensemble_graph(kind, seed, i).with_context(|| format!("graph {i}"))?;
                let s = strategy_sigmas(&g, cfg, &strategies, seed, i)
                    .with_context(|| format!("graph {i}"))?;
                Ok(std::iter::once(i as f64).chain(s).collect())
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let mut header = vec!["graph"];
    header.extend(strategies.iter().map(|s| s.name()));
    let table = ctx.file("sigma_min.csv");
    io::write_csv(&table, &header, &rows)?;
    for (k, st) in strategies.iter().enumerate() {
        let mean = rows.iter().map(|r| r[k + 1]).sum::<f64>() / rows.len() as f64;
        ctx.report
            .metric(format!("mean_sigma_min_{}", st.name()), mean);
    }
    ctx.report.metric("graphs", rows.len() as f64);
    Ok(EXIT_OK)
}
