//! Node-embedding algorithms: spectral distance-maximizing embedding,
//! biased-random-walk skip-gram, proximity matrix factorization, and
//! heat-wavelet characteristic functions.

pub mod glee;
pub mod graphwave;
pub mod netmf;
pub mod node2vec;

use std::fmt;
use std::io::{BufRead, Write};

use ndarray::Array2;
use thiserror::Error;

use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding dimension {d} out of range for {n} nodes")]
    DimOutOfRange { d: usize, n: usize },
    #[error("graph has no edges")]
    NoEdges,
    #[error("walk corpus is empty")]
    EmptyCorpus,
    #[error("corpus references node {0} beyond the graph")]
    CorpusGraphMismatch(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("embedding io: {0}")]
    Io(#[from] std::io::Error),
    #[error("embedding csv line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingMethod {
    Glee,
    Node2Vec,
    NetMf,
    GraphWave,
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EmbeddingMethod::Glee => "glee",
            EmbeddingMethod::Node2Vec => "node2vec",
            EmbeddingMethod::NetMf => "netmf",
            EmbeddingMethod::GraphWave => "graphwave",
        };
        f.write_str(name)
    }
}

/// Per-node embedding rows in node-index order, tagged with the producing
/// method and a canonical parameter fingerprint.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub method: EmbeddingMethod,
    pub dim: usize,
    pub rows: Array2<f64>,
    pub params_fingerprint: String,
}

impl EmbeddingMatrix {
    pub fn n_nodes(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().all(|x| x.is_finite())
    }

    /// Write `node_id,e0,e1,...` rows in node-index order, 12 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, ids: &[String], out: &mut W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|k| format!("e{k}")).collect();
        writeln!(out, "node_id,{}", header.join(","))?;
        for (i, id) in ids.iter().enumerate() {
            write!(out, "{id}")?;
            for k in 0..self.dim {
                write!(out, ",{:.11e}", self.rows[[i, k]])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Read an embedding CSV back into `(ids, rows)`.
pub fn read_csv<R: BufRead>(reader: R) -> Result<(Vec<String>, Array2<f64>), EmbedError> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or(EmbedError::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let header = header?;
    let dim = header.split(',').count().saturating_sub(1);
    if !header.starts_with("node_id") || dim == 0 {
        return Err(EmbedError::Parse {
            line: 1,
            message: format!("unexpected header `{header}`"),
        });
    }
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default().to_string();
        let mut row = Vec::with_capacity(dim);
        for field in fields {
            let v: f64 = field.parse().map_err(|_| EmbedError::Parse {
                line: idx + 1,
                message: format!("bad float `{field}`"),
            })?;
            row.push(v);
        }
        if row.len() != dim {
            return Err(EmbedError::Parse {
                line: idx + 1,
                message: format!("expected {dim} values, got {}", row.len()),
            });
        }
        ids.push(id);
        values.extend(row);
    }
    let n = ids.len();
    let rows = Array2::from_shape_vec((n, dim), values).expect("shape consistent by parse");
    Ok((ids, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csv_round_trip() {
        let emb = EmbeddingMatrix {
            method: EmbeddingMethod::Glee,
            dim: 2,
            rows: array![[1.0, -0.25], [0.5, 1e-9]],
            params_fingerprint: "glee(d=2,variant=largest)".into(),
        };
        let ids = vec!["a".to_string(), "b".to_string()];
        let mut buf = Vec::new();
        emb.write_csv(&ids, &mut buf).unwrap();
        let (got_ids, rows) = read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(got_ids, ids);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rows[[i, j]] - emb.rows[[i, j]]).abs() <= emb.rows[[i, j]].abs() * 1e-11);
            }
        }
    }
}
