//! Flat-text model serialization. Floats print by shortest round-trip
//! representation, so an exported model predicts identically after import.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::forest::{EnsembleKind, EnsembleParams, Tree, TreeEnsembleModel, TreeNode};

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("model io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
}

const MAGIC: &str = "trafficlab-model v1";

pub fn write_model<W: Write>(model: &TreeEnsembleModel, out: &mut W) -> Result<(), ModelIoError> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", model.params.kind.as_str())?;
    writeln!(out, "n_trees {}", model.params.n_trees)?;
    match model.params.max_features {
        Some(m) => writeln!(out, "max_features {m}")?,
        None => writeln!(out, "max_features auto")?,
    }
    writeln!(out, "min_samples_split {}", model.params.min_samples_split)?;
    match model.params.max_depth {
        Some(d) => writeln!(out, "max_depth {d}")?,
        None => writeln!(out, "max_depth none")?,
    }
    writeln!(out, "seed {}", model.params.seed)?;
    writeln!(out, "columns {}", model.column_manifest.join(","))?;
    for (t, tree) in model.trees.iter().enumerate() {
        writeln!(out, "tree {t} nodes {}", tree.nodes.len())?;
        for node in &tree.nodes {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(out, "split {feature} {threshold} {left} {right}")?,
                TreeNode::Leaf { fraction, count } => writeln!(out, "leaf {fraction} {count}")?,
            }
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

struct LineReader<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> LineReader<R> {
    fn next_line(&mut self) -> Result<String, ModelIoError> {
        self.line_no += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(ModelIoError::Parse {
                line: self.line_no,
                message: "unexpected end of file".into(),
            }),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ModelIoError> {
        Err(ModelIoError::Parse {
            line: self.line_no,
            message: message.into(),
        })
    }

    fn expect_field<'a>(&self, line: &'a str, key: &str) -> Result<&'a str, ModelIoError> {
        match line.strip_prefix(key).and_then(|r| r.strip_prefix(' ')) {
            Some(rest) if !rest.is_empty() => Ok(rest),
            _ => Err(ModelIoError::Parse {
                line: self.line_no,
                message: format!("expected `{key} <value>`, got `{line}`"),
            }),
        }
    }
}

pub fn read_model<R: BufRead>(reader: R) -> Result<TreeEnsembleModel, ModelIoError> {
    let mut lines = LineReader {
        inner: reader.lines(),
        line_no: 0,
    };
    if lines.next_line()? != MAGIC {
        return lines.fail("missing model header");
    }
    let kind_line = lines.next_line()?;
    let kind_str = lines.expect_field(&kind_line, "kind")?;
    let kind = EnsembleKind::parse(kind_str)
        .ok_or_else(|| ModelIoError::Parse {
            line: lines.line_no,
            message: format!("unknown ensemble kind `{kind_str}`"),
        })?;
    let n_trees_line = lines.next_line()?;
    let n_trees: usize = parse_num(&lines, lines.expect_field(&n_trees_line, "n_trees")?)?;
    let mf_line = lines.next_line()?;
    let mf_str = lines.expect_field(&mf_line, "max_features")?;
    let max_features = if mf_str == "auto" {
        None
    } else {
        Some(parse_num(&lines, mf_str)?)
    };
    let mss_line = lines.next_line()?;
    let min_samples_split = parse_num(&lines, lines.expect_field(&mss_line, "min_samples_split")?)?;
    let depth_line = lines.next_line()?;
    let depth_str = lines.expect_field(&depth_line, "max_depth")?;
    let max_depth = if depth_str == "none" {
        None
    } else {
        Some(parse_num(&lines, depth_str)?)
    };
    let seed_line = lines.next_line()?;
    let seed: u64 = parse_num(&lines, lines.expect_field(&seed_line, "seed")?)?;
    let columns_line = lines.next_line()?;
    let column_manifest: Vec<String> = lines
        .expect_field(&columns_line, "columns")?
        .split(',')
        .map(|s| s.to_string())
        .collect();

    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let header = lines.next_line()?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "tree" || parts[2] != "nodes" {
            return lines.fail(format!("expected `tree {t} nodes <n>`, got `{header}`"));
        }
        let n_nodes: usize = parse_num(&lines, parts[3])?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let line = lines.next_line()?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["split", feature, threshold, left, right] => nodes.push(TreeNode::Split {
                    feature: parse_num(&lines, feature)?,
                    threshold: parse_num(&lines, threshold)?,
                    left: parse_num(&lines, left)?,
                    right: parse_num(&lines, right)?,
                }),
                ["leaf", fraction, count] => nodes.push(TreeNode::Leaf {
                    fraction: parse_num(&lines, fraction)?,
                    count: parse_num(&lines, count)?,
                }),
                _ => return lines.fail(format!("bad node record `{line}`")),
            }
        }
        trees.push(Tree { nodes });
    }
    if lines.next_line()? != "end" {
        return lines.fail("missing `end` marker");
    }
    Ok(TreeEnsembleModel {
        params: EnsembleParams {
            kind,
            n_trees,
            max_features,
            min_samples_split,
            max_depth,
            seed,
        },
        column_manifest,
        trees,
    })
}

fn parse_num<R, T: std::str::FromStr>(lines: &LineReader<R>, s: &str) -> Result<T, ModelIoError> {
    s.parse().map_err(|_| ModelIoError::Parse {
        line: lines.line_no,
        message: format!("bad number `{s}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::forest::{predict_proba, train_ensemble};
    use crate::classify::Dataset;
    use rand::Rng;

    #[test]
    fn round_trip_is_prediction_identical() {
        let mut rng = crate::rng::derive_rng(31, "model-io", &[]);
        let n = 150;
        let width = 4;
        let values: Vec<f64> = (0..n * width).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let labels: Vec<u8> = (0..n)
            .map(|i| u8::from(values[i * width] + values[i * width + 2] > 0.0))
            .collect();
        let data = Dataset {
            width,
            values: &values,
            labels: &labels,
        };
        let manifest: Vec<String> = (0..width).map(|i| format!("f{i}")).collect();
        for kind in [EnsembleKind::ExtraTrees, EnsembleKind::RandomForest] {
            let mut params = EnsembleParams::new(kind, 77);
            params.n_trees = 8;
            let model = train_ensemble(data, &manifest, &params).unwrap();
            let mut buf = Vec::new();
            write_model(&model, &mut buf).unwrap();
            let back = read_model(std::io::Cursor::new(&buf)).unwrap();
            assert_eq!(
                predict_proba(&model, data).unwrap(),
                predict_proba(&back, data).unwrap()
            );
            assert_eq!(model.column_manifest, back.column_manifest);
        }
    }

    #[test]
    fn truncated_file_is_an_error() {
        let err = read_model(std::io::Cursor::new(b"trafficlab-model v1\nkind extra_trees\n"))
            .unwrap_err();
        assert!(matches!(err, ModelIoError::Parse { .. }));
    }

    #[test]
    fn garbage_header_is_an_error() {
        let err = read_model(std::io::Cursor::new(b"not a model\n")).unwrap_err();
        assert!(matches!(err, ModelIoError::Parse { line: 1, .. }));
    }
}
