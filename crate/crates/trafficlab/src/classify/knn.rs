//! k-nearest-neighbor scoring on standardized columns. Euclidean distance;
//! distance ties break toward the lower training-row index.

use std::collections::BinaryHeap;

use crate::par;

use super::{ClassifyError, Dataset};

/// `(distance^2, train index)` ordered so the heap keeps the worst neighbor
/// on top: farther first, then higher index.
#[derive(PartialEq)]
struct Neighbor(f64, u32);

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Class-1 fraction among the k nearest training rows, per query row.
pub fn knn_scores(
    train: Dataset<'_>,
    queries: Dataset<'_>,
    k: usize,
) -> Result<Vec<f64>, ClassifyError> {
    if k == 0 || k > train.n_rows() {
        return Err(ClassifyError::KTooLarge {
            k,
            n: train.n_rows(),
        });
    }
    if train.width != queries.width {
        return Err(ClassifyError::ColumnMismatch {
            expected: train.width,
            got: queries.width,
        });
    }
    Ok(par::map_indexed(queries.n_rows(), |qi| {
        let q = queries.row(qi);
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        for ti in 0..train.n_rows() {
            let row = train.row(ti);
            let dist: f64 = q
                .iter()
                .zip(row)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            let cand = Neighbor(dist, ti as u32);
            if heap.len() < k {
                heap.push(cand);
            } else if cand < *heap.peek().expect("nonempty at capacity") {
                heap.pop();
                heap.push(cand);
            }
        }
        let ones = heap
            .iter()
            .filter(|n| train.labels[n.1 as usize] == 1)
            .count();
        ones as f64 / k as f64
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(values: &[f64], labels: &[u8], width: usize) -> (Vec<f64>, Vec<u8>, usize) {
        (values.to_vec(), labels.to_vec(), width)
    }

    #[test]
    fn exact_match_with_k1() {
        let (values, labels, width) = data(&[0.0, 1.0, 2.0, 3.0], &[0, 1, 0, 1], 1);
        let train = Dataset {
            width,
            values: &values,
            labels: &labels,
        };
        let qv = vec![1.0];
        let ql = vec![0];
        let queries = Dataset {
            width,
            values: &qv,
            labels: &ql,
        };
        assert_eq!(knn_scores(train, queries, 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn k_equals_n_gives_prevalence() {
        let (values, labels, width) = data(&[0.0, 1.0, 2.0, 3.0], &[0, 1, 0, 1], 1);
        let train = Dataset {
            width,
            values: &values,
            labels: &labels,
        };
        let qv = vec![10.0];
        let ql = vec![0];
        let queries = Dataset {
            width,
            values: &qv,
            labels: &ql,
        };
        assert_eq!(knn_scores(train, queries, 4).unwrap(), vec![0.5]);
    }

    #[test]
    fn equidistant_tie_prefers_lower_index() {
        // Query at 1.0 is equidistant from rows 0 (label 1) and 1 (label 0);
        // the lower index wins with k=1.
        let (values, labels, width) = data(&[0.0, 2.0], &[1, 0], 1);
        let train = Dataset {
            width,
            values: &values,
            labels: &labels,
        };
        let qv = vec![1.0];
        let ql = vec![0];
        let queries = Dataset {
            width,
            values: &qv,
            labels: &ql,
        };
        assert_eq!(knn_scores(train, queries, 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn k_too_large() {
        let (values, labels, width) = data(&[0.0], &[1], 1);
        let train = Dataset {
            width,
            values: &values,
            labels: &labels,
        };
        assert_eq!(
            knn_scores(train, train, 2).unwrap_err(),
            ClassifyError::KTooLarge { k: 2, n: 1 }
        );
    }
}
