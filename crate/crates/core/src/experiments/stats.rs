//! Correlation statistics for the experiment reports: Spearman for the
//! parameter sweeps, Pearson for the per-coalition heatmap quantities.

use crate::error::{Error, Result};

/// Pearson correlation coefficient; `None` when either sample has
/// (numerically) zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 1e-24 || syy <= 1e-24 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Ranks with average-rank tie handling (ranks start at 1).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share the average of ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &index in &order[i..j] {
            ranks[index] = rank;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling: Pearson on
/// the rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: x.len(),
        });
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson(&rx, &ry).ok_or_else(|| Error::TooFewSamples {
        min: 2,
        got: x.len(),
    })
}
