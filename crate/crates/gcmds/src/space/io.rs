//! Reading and writing spaces as text.
//!
//! CSV matrices are `n` rows of `n` comma-separated decimals with an
//! optional header row of labels. Edge lists are lines `i j length`.
//! Weight files hold one decimal per line. Point files are rows of
//! coordinates. Blank lines and lines starting with `#` are skipped
//! everywhere.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::{normalize_weights, shortest_path_metric, FiniteMmSpace, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    CsvMatrix,
    EdgeList,
}

pub fn load_space(path: &Path, format: InputFormat, weights: Option<&Path>) -> Result<FiniteMmSpace> {
    let text = fs::read_to_string(path)?;
    let space = match format {
        InputFormat::CsvMatrix => {
            let (labels, d) = parse_csv_matrix(&text)?;
            let s = FiniteMmSpace::uniform(d)?;
            match labels {
                Some(l) => s.with_labels(l)?,
                None => s,
            }
        }
        InputFormat::EdgeList => shortest_path_metric(&parse_edge_list(&text)?)?,
    };
    match weights {
        None => Ok(space),
        Some(p) => {
            let w = parse_weights(&fs::read_to_string(p)?)?;
            if w.len() != space.n() {
                return Err(Error::Weight(format!("{} weights for {} points", w.len(), space.n())));
            }
            space.reweighted(normalize_weights(&w)?)
        }
    }
}

/// Returns the optional label header and the matrix.
pub fn parse_csv_matrix(text: &str) -> Result<(Option<Vec<String>>, DMatrix<f64>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !is_skipped(l))
        .peekable();
    let mut labels = None;
    if let Some(&(_, first)) = lines.peek() {
        let cells: Vec<&str> = first.split(',').map(str::trim).collect();
        if cells.iter().any(|c| c.parse::<f64>().is_err()) {
            labels = Some(cells.iter().map(|c| c.to_string()).collect::<Vec<_>>());
            lines.next();
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let row = line
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("{:?}: {e}", c.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse { line: 1, message: "no matrix rows".into() });
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse {
            line: i + 1 + labels.is_some() as usize,
            message: format!("row has {} entries, matrix has {} rows", rows[i].len(), n),
        });
    }
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(Error::Parse { line: 1, message: format!("{} labels for {} rows", l.len(), n) });
        }
    }
    Ok((labels, DMatrix::from_fn(n, n, |i, j| rows[i][j])))
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Rows of comma-separated coordinates, all of one length.
pub fn parse_csv_points(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate().filter(|(_, l)| !is_skipped(l)) {
        let err = |message: String| Error::Parse { line: idx + 1, message };
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| err(format!("{:?}: {e}", c.trim()))))
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => return Err(err(format!("row has {} coordinates, expected {w}", row.len()))),
            _ => {}
        }
        rows.push(row);
    }
    let k = width.ok_or(Error::Parse { line: 1, message: "no points".into() })?;
    Ok(DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
}

/// Vertex count is one more than the largest index mentioned.
pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| Error::Parse { line: idx + 1, message };
        if parts.len() != 3 {
            return Err(err(format!("expected `i j length`, got {line:?}")));
        }
        let i: usize = parts[0].parse().map_err(|e| err(format!("{:?}: {e}", parts[0])))?;
        let j: usize = parts[1].parse().map_err(|e| err(format!("{:?}: {e}", parts[1])))?;
        let len: f64 = parts[2].parse().map_err(|e| err(format!("{:?}: {e}", parts[2])))?;
        if !len.is_finite() || len <= 0.0 {
            return Err(err(format!("edge length {len} must be positive")));
        }
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, len));
    }
    if n == 0 {
        return Err(Error::Parse { line: 1, message: "no edges".into() });
    }
    WeightedGraph::new(n, edges)
}

pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.parse::<f64>().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("{line:?}: {e}"),
        })?);
    }
    Ok(out)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub fn write_csv_matrix(mut w: impl Write, m: &DMatrix<f64>, header: Option<&[String]>) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_weights(mut w: impl Write, weights: &[f64]) -> std::io::Result<()> {
    for x in weights {
        writeln!(w, "{}", fmt_f64(*x))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_row_becomes_labels() {
        let (labels, d) = parse_csv_matrix("a,b\n0,1\n1,0\n").unwrap();
        assert_eq!(labels.unwrap(), vec!["a", "b"]);
        assert_eq!(d[(0, 1)], 1.0);
    }

    #[test]
    fn ragged_rows_are_parse_errors() {
        assert!(matches!(parse_csv_matrix("0,1\n1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_csv_matrix("0,1\n1,x\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_are_skipped() {
        let (labels, d) = parse_csv_matrix("# seed=3\n0,2\n2,0\n").unwrap();
        assert!(labels.is_none());
        assert_eq!(d[(1, 0)], 2.0);
        let p = parse_csv_points("# cloud\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!((p.nrows(), p.ncols()), (2, 3));
        assert!(parse_csv_points("1,2\n3\n").is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = parse_edge_list("# triangle\n0 1 1.0\n1 2 2.5\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert!(parse_edge_list("0 1\n").is_err());
        assert!(parse_edge_list("0 1 -2\n").is_err());
    }

    #[test]
    fn formatting_is_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
        let back: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }
}
