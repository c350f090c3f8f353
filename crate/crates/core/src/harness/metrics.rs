//! Per-estimator Monte Carlo summary statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Relative-error and MSE summaries for one estimator in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub estimator_id: String,
    /// `100 · mean((Ĉ_j − C_j)/C_j)`.
    pub mean_rel_err_pct: f64,
    /// `100 · √((1/m) Σ (e_j − ē)²)` — population convention, divisor `m`.
    pub sd_rel_err_pct: f64,
    /// `√((1/m) Σ (Ĉ_j − C_j)²)`, reported ×10⁴ in table output.
    pub sqrt_mse: f64,
    /// Stabilization-count distribution (1-based iteration counts), empty
    /// for non-iterative estimators. Fractions sum to one.
    pub iter_histogram: BTreeMap<usize, f64>,
    /// Empirical coverage of the 95% feasible CI, when requested.
    pub ci_coverage: Option<f64>,
    /// True when `m = 1` made the standard deviation undefined (reported 0).
    pub degenerate_sd: bool,
}

/// Mean relative error (%), population sd of the relative error (%), and
/// root mean squared error, from paired estimates and ground truths.
pub fn metrics(estimates: &[f64], truths: &[f64]) -> Result<(f64, f64, f64)> {
    if estimates.len() != truths.len() {
        return Err(Error::invalid("estimates and truths must have equal length"));
    }
    if estimates.is_empty() {
        return Err(Error::invalid("need at least one observation"));
    }
    if truths.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::invalid("ground-truth values must be positive"));
    }
    let m = estimates.len() as f64;
    let rel: Vec<f64> =
        estimates.iter().zip(truths).map(|(e, c)| (e - c) / c).collect();
    let mean = rel.iter().sum::<f64>() / m;
    let var = rel.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / m;
    let mse =
        estimates.iter().zip(truths).map(|(e, c)| (e - c) * (e - c)).sum::<f64>() / m;
    Ok((100.0 * mean, 100.0 * var.sqrt(), mse.sqrt()))
}

/// Normalized histogram of stabilization counts.
pub fn iteration_histogram(counts: &[usize]) -> BTreeMap<usize, f64> {
    let mut hist = BTreeMap::new();
    if counts.is_empty() {
        return hist;
    }
    for &c in counts {
        *hist.entry(c).or_insert(0.0) += 1.0;
    }
    let total = counts.len() as f64;
    for v in hist.values_mut() {
        *v /= total;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_examples() {
        let (m, s, r) = metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((m, s, r), (0.0, 0.0, 0.0));

        let (m, s, r) = metrics(&[1.1], &[1.0]).unwrap();
        assert!((m - 10.0).abs() < 1e-12);
        assert_eq!(s, 0.0);
        assert!((r - 0.1).abs() < 1e-12);

        let (m, s, r) = metrics(&[0.9, 1.1], &[1.0, 1.0]).unwrap();
        assert!(m.abs() < 1e-12);
        assert!((s - 10.0).abs() < 1e-12);
        assert!((r - 0.1).abs() < 1e-12);
    }

    #[test]
    fn metrics_validation() {
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[1.0], &[0.0]).is_err());
        assert!(metrics(&[1.0], &[-2.0]).is_err());
    }

    #[test]
    fn histogram_fractions_sum_to_one() {
        let h = iteration_histogram(&[2, 3, 3, 2, 4, 3]);
        let total: f64 = h.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((h[&3] - 0.5).abs() < 1e-12);
        assert!(iteration_histogram(&[]).is_empty());
    }
}
