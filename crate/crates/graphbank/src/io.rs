//! Plain-text graph and signal files.
//!
//! Edge lists hold one `u v [w]` triple per line (0-based vertex ids,
//! whitespace or tab separated, weight defaults to 1). Coordinate files hold
//! `x y` per line in vertex order. Signal files hold one value per line.
//! Blank lines and `#` comments are ignored everywhere.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use graphbank_core::{Error as CoreError, Graph};
use nalgebra::DVector;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("reading {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}")]
    Graph {
        path: PathBuf,
        #[source]
        source: CoreError,
    },
}

pub type Result<T> = std::result::Result<T, IoError>;

/// `(u, v, weight)` triples.
pub type EdgeList = Vec<(usize, usize, f64)>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Edge triples and the vertex count (`max id + 1`).
pub fn parse_edge_list(text: &str, path: &Path) -> Result<(usize, EdgeList)> {
    let err = |line, msg: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut edges = Vec::new();
    let mut n = 0;
    for (ln, line) in content_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(
                ln,
                format!("expected `u v [w]`, found {} fields", fields.len()),
            ));
        }
        let vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(ln, format!("invalid vertex id `{s}`")))
        };
        let u = vertex(fields[0])?;
        let v = vertex(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| err(ln, format!("invalid weight `{s}`")))?,
            None => 1.0,
        };
        if !w.is_finite() || w <= 0.0 {
            return Err(err(
                ln,
                format!("weight must be positive and finite, got {w}"),
            ));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    if edges.is_empty() {
        return Err(err(0, "no edges found".into()));
    }
    Ok((n, edges))
}

pub fn parse_coords(text: &str, path: &Path) -> Result<Vec<[f64; 2]>> {
    content_lines(text)
        .map(|(ln, line)| {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| IoError::Parse {
                    path: path.to_path_buf(),
                    line: ln,
                    msg: e.to_string(),
                })?;
            match vals.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: ln,
                    msg: format!("expected `x y`, found {} values", vals.len()),
                }),
            }
        })
        .collect()
}

pub fn parse_signal(text: &str, path: &Path) -> Result<DVector<f64>> {
    let vals = content_lines(text)
        .map(|(ln, line)| {
            line.parse::<f64>().map_err(|_| IoError::Parse {
                path: path.to_path_buf(),
                line: ln,
                msg: format!("invalid value `{line}`"),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(vals))
}

/// Loads an edge list and, when given, a coordinate file.
pub fn read_graph(path: &Path, coords: Option<&Path>) -> Result<Graph> {
    let (n, edges) = parse_edge_list(&read(path)?, path)?;
    let graph_err = |source| IoError::Graph {
        path: path.to_path_buf(),
        source,
    };
    let mut g = Graph::from_edges(n, &edges).map_err(graph_err)?;
    if let Some(cp) = coords {
        let c = parse_coords(&read(cp)?, cp)?;
        g = g.with_coords(c).map_err(|source| IoError::Graph {
            path: cp.to_path_buf(),
            source,
        })?;
    }
    Ok(g)
}

pub fn read_signal(path: &Path) -> Result<DVector<f64>> {
    parse_signal(&read(path)?, path)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("# {} vertices\n", g.n());
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "{u}\t{v}\t{w:?}");
    }
    out
}

pub fn write_graph(g: &Graph, edges: &Path, coords: Option<&Path>) -> Result<()> {
    write_text(edges, &format_edge_list(g))?;
    if let (Some(cp), Some(c)) = (coords, g.coords()) {
        let text: String = c
            .iter()
            .map(|p| format!("{:?}\t{:?}\n", p[0], p[1]))
            .collect();
        write_text(cp, &text)?;
    }
    Ok(())
}

pub fn write_signal(path: &Path, x: &DVector<f64>) -> Result<()> {
    let text: String = x.iter().map(|v| format!("{v:?}\n")).collect();
    write_text(path, &text)
}

/// Numeric CSV with a header row; integral values print without a fraction.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    format!("{v}")
                } else {
                    format!("{v:?}")
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

/// `(index, value)` rows.
pub fn write_indexed(path: &Path, index: &[usize], values: &DVector<f64>) -> Result<()> {
    let rows: Vec<Vec<f64>> = index
        .iter()
        .zip(values.iter())
        .map(|(&i, &v)| vec![i as f64, v])
        .collect();
    write_csv(path, &["index", "value"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn edge_list_with_comments_and_default_weight() {
        let text = "# header\n0 1\n1\t2\t0.5 # trailing\n\n";
        let (n, e) = parse_edge_list(text, p()).unwrap();
        assert_eq!(n, 3);
        assert_eq!(e, vec![(0, 1, 1.0), (1, 2, 0.5)]);
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let err = parse_edge_list("0 1\n1 x\n", p()).unwrap_err();
        assert!(err.to_string().contains("mem:2"), "{err}");
        assert!(parse_edge_list("0 1 -1\n", p()).is_err());
        assert!(parse_edge_list("0 1 2 3\n", p()).is_err());
        assert!(parse_edge_list("# nothing\n", p()).is_err());
    }

    #[test]
    fn signals_and_coords() {
        let x = parse_signal("1\n# c\n-2.5e0\n", p()).unwrap();
        assert_eq!(x.as_slice(), &[1.0, -2.5]);
        assert!(parse_signal("1\nfoo\n", p()).is_err());
        assert_eq!(
            parse_coords("0 1\n2 3\n", p()).unwrap(),
            vec![[0.0, 1.0], [2.0, 3.0]]
        );
        assert!(parse_coords("0 1 2\n", p()).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(3, &[(0, 1, 0.25), (1, 2, 3.0)]).unwrap();
        let (n, e) = parse_edge_list(&format_edge_list(&g), p()).unwrap();
        assert_eq!(Graph::from_edges(n, &e).unwrap().weights(), g.weights());
    }
}
