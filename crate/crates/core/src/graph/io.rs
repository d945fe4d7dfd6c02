//! CSV readers and writers for operators and signals.
//!
//! - Edge lists carry a `src,dst,weight` header with 0-based node ids; every
//!   nonzero ordered entry is listed, so undirected graphs list both directions.
//! - Dense matrices (operators and signal matrices) have no header: one CSV row
//!   per matrix row. For signals that means one row per node and one column per
//!   signal.
//!
//! Floats are written in Rust's shortest round-trip form, so write-then-read is
//! exact.

use std::io::{Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::gso::Gso;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    src: usize,
    dst: usize,
    weight: f64,
}

pub fn write_edge_list<W: Write>(gso: &Gso, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let s = gso.matrix();
    for i in 0..gso.n() {
        for j in 0..gso.n() {
            if s[(i, j)] != 0.0 {
                w.serialize(EdgeRow {
                    src: i,
                    dst: j,
                    weight: s[(i, j)],
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an adjacency operator from an edge list. `n` defaults to the largest
/// node id plus one. Symmetry is detected from the entries.
pub fn read_edge_list<R: Read>(input: R, n: Option<usize>) -> Result<Gso> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<EdgeRow>() {
        rows.push(rec?);
    }
    let max_id = rows.iter().map(|r| r.src.max(r.dst) + 1).max().unwrap_or(0);
    let n = n.unwrap_or(max_id);
    if max_id > n {
        return Err(Error::Data(format!(
            "edge list references node {} but n = {n}",
            max_id - 1
        )));
    }
    let mut m = Mat::<f64>::zeros(n, n);
    for r in rows {
        m[(r.src, r.dst)] += r.weight;
    }
    Gso::adjacency(m)
}

pub fn write_dense<W: Write>(m: MatRef<'_, f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| m[(i, j)].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dense<R: Read>(input: R) -> Result<Mat<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Data(format!("row {}: {f:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Data(format!(
                    "row {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let nc = rows.first().map_or(0, |r| r.len());
    Ok(Mat::from_fn(rows.len(), nc, |i, j| rows[i][j]))
}

/// Reads a dense adjacency operator.
pub fn read_dense_gso<R: Read>(input: R) -> Result<Gso> {
    Gso::adjacency(read_dense(input)?)
}

pub fn read_matrix_file(path: &Path) -> Result<Mat<f64>> {
    read_dense(std::fs::File::open(path)?)
}

pub fn write_matrix_file(m: MatRef<'_, f64>, path: &Path) -> Result<()> {
    write_dense(m, std::fs::File::create(path)?)
}

/// Reads a graph file, choosing the format from the first line: a
/// `src,dst,weight` header means edge list, anything else dense.
pub fn read_graph_file(path: &Path) -> Result<Gso> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("").replace(' ', "");
    if first.starts_with("src,dst") {
        read_edge_list(text.as_bytes(), None)
    } else {
        read_dense_gso(text.as_bytes())
    }
}
