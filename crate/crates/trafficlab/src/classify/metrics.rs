//! Binary classification metrics: confusion counts, accuracy, precision,
//! recall, F1, and AUROC via the midrank statistic.

use super::ClassifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when either class is missing from the labels.
    pub auroc: Option<f64>,
    pub confusion: Confusion,
}

/// AUROC from the rank statistic with midranks for ties:
/// `(sum of positive ranks - P(P+1)/2) / (P*N)`. `None` if a class is absent.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    let n = scores.len();
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = n - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks: every member of a tie group gets the group's average rank.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 average to (i + j)/2 + 1.
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// Confusion at the threshold (predicted positive when `score >= threshold`)
/// plus the derived metric set.
pub fn evaluate(scores: &[f64], labels: &[u8], threshold: f64) -> Result<EvalReport, ClassifyError> {
    if scores.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(ClassifyError::EmptyTable);
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &l) in scores.iter().zip(labels) {
        let predicted = s >= threshold;
        match (predicted, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let total = scores.len() as f64;
    let accuracy = (c.tp + c.tn) as f64 / total;
    let precision = if c.tp + c.fp > 0 {
        c.tp as f64 / (c.tp + c.fp) as f64
    } else {
        0.0
    };
    let recall = if c.tp + c.fn_ > 0 {
        c.tp as f64 / (c.tp + c.fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        accuracy,
        precision,
        recall,
        f1,
        auroc: auroc(scores, labels),
        confusion: c,
    })
}
