//! Two-regime continuous martingale `Y_t = ∫ σ dW` with
//! `σ_t = a·1{t < θT} + b·1{t ≥ θT}`, `0 < a < b`.
//!
//! This is the process whose TRV, tuned at the rate `√(c₀ C_T h log(1/h))`,
//! stays consistent but diverges at the `√n` scale — the divergence-demo
//! subcommand reproduces exactly that.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{IncrementSeries, PathBundle, SamplingGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoRegimeParams {
    /// Low-regime volatility.
    pub a: f64,
    /// High-regime volatility, `b > a`.
    pub b: f64,
    /// Regime break as a fraction of the horizon, in (0, 1).
    pub theta_break: f64,
    /// Threshold constant `c₀`.
    pub c0: f64,
}

impl TwoRegimeParams {
    pub fn new(a: f64, b: f64, theta_break: f64, c0: f64) -> Result<Self> {
        if !(a > 0.0 && b > a) {
            return Err(Error::invalid("need volatilities 0 < a < b"));
        }
        if !(theta_break > 0.0 && theta_break < 1.0) {
            return Err(Error::invalid("regime break must lie in (0, 1)"));
        }
        if !(c0 > 0.0) {
            return Err(Error::invalid("threshold constant c0 must be positive"));
        }
        let p = TwoRegimeParams { a, b, theta_break, c0 };
        let delta = p.delta();
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::invalid(format!(
                "derived exponent delta = {delta:.4} must lie in (0, 1/2)"
            )));
        }
        Ok(p)
    }

    /// Defaults used by the divergence demo: a = 0.25, b = 1, θ = 0.8,
    /// c₀ = 2 (δ = 0.25).
    pub fn demo_defaults() -> Self {
        TwoRegimeParams { a: 0.25, b: 1.0, theta_break: 0.8, c0: 2.0 }
    }

    /// `δ = (c₀/2)(a²θ/b² + (1−θ))`, the divergence exponent.
    pub fn delta(&self) -> f64 {
        0.5 * self.c0
            * (self.a * self.a / (self.b * self.b) * self.theta_break
                + (1.0 - self.theta_break))
    }

    /// `C_T` per unit horizon: `a²θ + b²(1−θ)`.
    pub fn quadratic_variation_rate(&self) -> f64 {
        self.a * self.a * self.theta_break + self.b * self.b * (1.0 - self.theta_break)
    }

    /// The tuned threshold `ϑ_n = √(c₀ C_T h log(1/h))` on a given grid.
    pub fn divergence_threshold(&self, grid: &SamplingGrid<f64>) -> f64 {
        let h = grid.step();
        let c_t = self.quadratic_variation_rate() * grid.horizon();
        (self.c0 * c_t * h * (1.0 / h).ln()).sqrt()
    }
}

/// Exact simulation: each increment is Gaussian with variance `∫ σ² dt` over
/// its interval, the straddling interval mixing both regimes. The bundle
/// carries the exact `C_T` and no fine variance path (the spot path has a
/// discontinuity that a trapezoid on a fine grid cannot represent to
/// round-off accuracy).
pub fn simulate_two_regime<R: Rng>(
    params: &TwoRegimeParams,
    grid: SamplingGrid<f64>,
    rng: &mut R,
) -> Result<PathBundle<f64>> {
    let n = grid.n();
    let h = grid.step();
    let brk = params.theta_break * grid.horizon();
    let a2 = params.a * params.a;
    let b2 = params.b * params.b;

    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        let t0 = (i - 1) as f64 * h;
        let t1 = t0 + h;
        let low = (brk.min(t1) - t0).clamp(0.0, h);
        let var = a2 * low + b2 * (h - low);
        let z: f64 = rng.sample(StandardNormal);
        values.push(var.sqrt() * z);
    }
    let increments = IncrementSeries::new(grid, values)?;
    let c_true = params.quadratic_variation_rate() * grid.horizon();
    PathBundle::new(increments, 0.0, None, Some(c_true), Vec::new(), 0)
}
