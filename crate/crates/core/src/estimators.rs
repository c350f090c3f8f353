//! Non-iterative estimators of integrated variance: realized variance,
//! bipower variation, multipower variations, truncated realized variation
//! (uniform and per-increment thresholds), kernel spot-variance estimators,
//! truncated quarticity, and the feasible confidence interval.
//!
//! Conventions shared by everything here:
//!   * truncation indicators are inclusive (`|Δ| ≤ ε`), so boundary ties are
//!     deterministic;
//!   * window sums are zero-padded outside `1..=n` and never renormalized by
//!     the in-range count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::IncrementSeries;
use crate::numeric::{gaussian_abs_moment, normal_quantile};
use crate::real::Real;

/// Truncation threshold: one level for every increment, or one per increment.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSpec<T: Real> {
    /// Single level `ε ≥ 0`; `+∞` disables truncation.
    Uniform(T),
    /// Per-increment levels `ε_i ≥ 0`, length `n`.
    Local(Vec<T>),
}

impl<T: Real> ThresholdSpec<T> {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            ThresholdSpec::Uniform(eps) => {
                if *eps < T::zero() || eps.is_nan() {
                    return Err(Error::invalid("uniform threshold must be >= 0"));
                }
            }
            ThresholdSpec::Local(eps) => {
                if eps.len() != n {
                    return Err(Error::invalid(format!(
                        "local threshold length {} does not match n = {}",
                        eps.len(),
                        n
                    )));
                }
                if eps.iter().any(|e| *e < T::zero() || e.is_nan()) {
                    return Err(Error::invalid("local thresholds must be >= 0"));
                }
            }
        }
        Ok(())
    }

    fn level(&self, idx0: usize) -> T {
        match self {
            ThresholdSpec::Uniform(eps) => *eps,
            ThresholdSpec::Local(eps) => eps[idx0],
        }
    }
}

/// Window for the kernel spot-variance estimators: `k` even, `2 ≤ k ≤ n`,
/// uniform kernel, zero-padded at the boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpotConfig {
    k: usize,
}

impl SpotConfig {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::invalid(format!("window k must be even and >= 2, got {k}")));
        }
        Ok(SpotConfig { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn check_against(&self, n: usize) -> Result<()> {
        if self.k > n {
            return Err(Error::invalid(format!("window k = {} exceeds n = {}", self.k, n)));
        }
        Ok(())
    }
}

/// Initial estimate fed into a fixed-point scheme.
///
/// All shipped kinds are consistent for the integrated variance on continuous
/// paths; the regularity conditions they must satisfy hold analytically and
/// are not re-checked at runtime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitializerSpec<T: Real> {
    Rv,
    Bv,
    /// Multipower with exponents summing to 2.
    Multipower(Vec<T>),
    SpotRv,
    SpotBv,
}

impl<T: Real> InitializerSpec<T> {
    pub fn is_local(&self) -> bool {
        matches!(self, InitializerSpec::SpotRv | InitializerSpec::SpotBv)
    }

    /// Evaluate a scalar (whole-horizon) initializer.
    pub fn eval_uniform(&self, incs: &IncrementSeries<T>) -> Result<T> {
        match self {
            InitializerSpec::Rv => Ok(rv(incs)),
            InitializerSpec::Bv => bv(incs),
            InitializerSpec::Multipower(powers) => multipower(incs, powers),
            _ => Err(Error::invalid("spot initializer used where a scalar one is required")),
        }
    }

    /// Evaluate a spot (per-increment) initializer.
    pub fn eval_local(&self, incs: &IncrementSeries<T>, cfg: SpotConfig) -> Result<Vec<T>> {
        match self {
            InitializerSpec::SpotRv => (1..=incs.n())
                .map(|i| spot_kernel(incs, i, cfg, T::infinity()))
                .collect(),
            InitializerSpec::SpotBv => (1..=incs.n()).map(|i| spot_bv(incs, i, cfg)).collect(),
            _ => Err(Error::invalid("scalar initializer used where a spot one is required")),
        }
    }
}

/// Realized variance `Σ_i (Δ_i X)²`.
pub fn rv<T: Real>(incs: &IncrementSeries<T>) -> T {
    incs.values().iter().map(|&d| d * d).sum()
}

/// Bipower variation `(π/2) Σ_{i=2}^n |Δ_{i-1} X| |Δ_i X|`.
pub fn bv<T: Real>(incs: &IncrementSeries<T>) -> Result<T> {
    if incs.n() < 2 {
        return Err(Error::invalid("bipower variation needs n >= 2"));
    }
    let sum: T = incs.values().windows(2).map(|w| w[0].abs() * w[1].abs()).sum();
    Ok(T::of(std::f64::consts::FRAC_PI_2) * sum)
}

/// Normalized multipower variation with exponents `r_1..r_d`, `Σ r_i = 2`:
/// `(Π μ_{r_i}^{-1}) Σ_{i=1}^{n-d+1} Π_m |Δ_{i+m} X|^{r_{m+1}}`,
/// where `μ_r = E|Z|^r` for standard normal `Z`.
pub fn multipower<T: Real>(incs: &IncrementSeries<T>, powers: &[T]) -> Result<T> {
    if powers.is_empty() {
        return Err(Error::invalid("multipower needs at least one exponent"));
    }
    if powers.iter().any(|r| *r < T::zero()) {
        return Err(Error::invalid("multipower exponents must be >= 0"));
    }
    let total: T = powers.iter().copied().sum();
    if (total.as_f64() - 2.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "multipower exponents must sum to 2, got {}",
            total.as_f64()
        )));
    }
    let d = powers.len();
    let n = incs.n();
    let norm: f64 = powers.iter().map(|r| gaussian_abs_moment(r.as_f64()).ln()).sum();
    let norm = T::of((-norm).exp());
    if n < d {
        return Ok(T::zero());
    }
    let vals = incs.values();
    let mut sum = T::zero();
    for i in 0..=(n - d) {
        let mut prod = T::one();
        for (m, r) in powers.iter().enumerate() {
            prod *= vals[i + m].abs().powf(*r);
        }
        sum += prod;
    }
    Ok(norm * sum)
}

/// Truncated realized variation `Σ_i (Δ_i X)² 1{|Δ_i X| ≤ ε_i}`.
pub fn trv<T: Real>(incs: &IncrementSeries<T>, thr: &ThresholdSpec<T>) -> Result<T> {
    thr.validate(incs.n())?;
    let mut sum = T::zero();
    for (idx, &d) in incs.values().iter().enumerate() {
        if d.abs() <= thr.level(idx) {
            sum += d * d;
        }
    }
    Ok(sum)
}

/// Number of window positions `i-k/2+1 ..= i+k/2` that fall inside
/// `lo ..= n`; the spot estimators normalize by this effective count so
/// boundary windows stay unbiased instead of shrinking toward zero.
pub(crate) fn window_count(i: usize, k: usize, lo: usize, n: usize) -> usize {
    let half = (k / 2) as isize;
    let i = i as isize;
    let a = (i - half + 1).max(lo as isize);
    let b = (i + half).min(n as isize);
    (b - a + 1).max(0) as usize
}

/// Kernel spot-variance estimate at observation `i` (1-based) with threshold
/// `B`:
/// `(1/(h k_i)) Σ_{ℓ=i-k/2+1}^{i+k/2} (Δ_ℓ X)² 1{|Δ_ℓ X| ≤ B}`,
/// where `k_i` counts the window positions inside `1..=n` (equal to `k` for
/// interior windows). Out-of-range terms contribute nothing to the sum;
/// truncated terms reduce the sum but never the normalization.
pub fn spot_kernel<T: Real>(
    incs: &IncrementSeries<T>,
    i: usize,
    cfg: SpotConfig,
    b: T,
) -> Result<T> {
    cfg.check_against(incs.n())?;
    check_index(i, incs.n())?;
    let count = window_count(i, cfg.k, 1, incs.n());
    let half = (cfg.k / 2) as isize;
    let i = i as isize;
    let mut sum = T::zero();
    for l in (i - half + 1)..=(i + half) {
        let d = incs.delta(l);
        if d.abs() <= b {
            sum += d * d;
        }
    }
    Ok(sum / (incs.grid().step() * T::of(count as f64)))
}

/// Localized bipower variation at observation `i` (1-based):
/// `(1/(h k_i)) (π/2) Σ_{m=i-k/2+1}^{i+k/2} |Δ_{m-1} X| |Δ_m X|`,
/// zero-padded outside `1..=n`, with `k_i` the count of window positions
/// whose product has both factors observable (`2 ≤ m ≤ n`).
pub fn spot_bv<T: Real>(incs: &IncrementSeries<T>, i: usize, cfg: SpotConfig) -> Result<T> {
    cfg.check_against(incs.n())?;
    check_index(i, incs.n())?;
    let count = window_count(i, cfg.k, 2, incs.n()).max(1);
    let half = (cfg.k / 2) as isize;
    let i = i as isize;
    let mut sum = T::zero();
    for m in (i - half + 1)..=(i + half) {
        sum += incs.delta(m - 1).abs() * incs.delta(m).abs();
    }
    Ok(T::of(std::f64::consts::FRAC_PI_2) * sum
        / (incs.grid().step() * T::of(count as f64)))
}

/// Truncated quarticity `Σ_i (Δ_i X)⁴ 1{|Δ_i X| ≤ ε_i}`, the variance proxy
/// for the feasible CLT.
pub fn truncated_quarticity<T: Real>(
    incs: &IncrementSeries<T>,
    thr: &ThresholdSpec<T>,
) -> Result<T> {
    thr.validate(incs.n())?;
    let mut sum = T::zero();
    for (idx, &d) in incs.values().iter().enumerate() {
        if d.abs() <= thr.level(idx) {
            sum += d * d * d * d;
        }
    }
    Ok(sum)
}

/// Two-sided confidence interval from the studentized CLT
/// `(Ĉ − C_T) / √((2/3) Σ (Δ_i X)⁴ 1{·}) → N(0,1)`:
/// `estimate ± z_{(1+level)/2} √((2/3) · quarticity)`.
///
/// The un-normalized quartic sum satisfies `Σ Δ⁴ ≈ 3 h ∫ σ⁴`, so the `2/3`
/// factor is what makes the half-width match the asymptotic standard error
/// `√(2 h ∫ σ⁴)` of the estimator.
pub fn feasible_ci<T: Real>(estimate: T, quarticity: T, level: T) -> Result<(T, T)> {
    if quarticity < T::zero() {
        return Err(Error::invalid("quarticity must be >= 0"));
    }
    let lv = level.as_f64();
    if !(lv > 0.0 && lv < 1.0) {
        return Err(Error::invalid("confidence level must be in (0,1)"));
    }
    let z = T::of(normal_quantile(0.5 * (1.0 + lv)));
    let half = z * (T::of(2.0 / 3.0) * quarticity).sqrt();
    Ok((estimate - half, estimate + half))
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i < 1 || i > n {
        return Err(Error::invalid(format!("index {i} outside 1..={n}")));
    }
    Ok(())
}
