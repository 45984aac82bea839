//! Point and density forecast scores.

use crate::{Error, Result};

/// CRPS of an ensemble against a realisation, with the unbiased pairwise
/// estimator `mean|X − y| − Σ_{i≠j}|X_i − X_j| / (2 m (m − 1))`.
pub fn crps(draws: &[f64], y: f64) -> f64 {
    let m = draws.len();
    if m == 0 {
        return f64::NAN;
    }
    let abs = draws.iter().map(|x| (x - y).abs()).sum::<f64>() / m as f64;
    if m == 1 {
        return abs;
    }
    let mut v = draws.to_vec();
    v.sort_by(f64::total_cmp);
    // Σ_{i<j} (x_(j) − x_(i)) = Σ_j x_(j) (2j − m + 1)
    let pair: f64 = v
        .iter()
        .enumerate()
        .map(|(j, x)| x * (2.0 * j as f64 - m as f64 + 1.0))
        .sum();
    abs - pair / (m * (m - 1)) as f64
}

pub fn rmse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::EmptyRun);
    }
    Ok((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
