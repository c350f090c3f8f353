//! Heston-type stochastic variance with leverage, full-truncation Euler on a
//! substep grid finer than the observation grid.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::SamplingGrid;
use crate::numeric::trapezoid;

/// Parameters of `dσ²_t = κ(θ − σ²_t) dt + ξ σ_t dB_t` with
/// `d⟨W, B⟩_t = ρ dt` for the price Brownian motion `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub v0: f64,
}

impl HestonParams {
    pub fn new(kappa: f64, theta: f64, xi: f64, rho: f64, v0: f64) -> Result<Self> {
        if !(kappa > 0.0 && theta > 0.0 && xi > 0.0) {
            return Err(Error::invalid("kappa, theta, xi must be positive"));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::invalid("correlation rho must lie in [-1, 1]"));
        }
        if v0 < 0.0 {
            return Err(Error::invalid("initial variance must be >= 0"));
        }
        Ok(HestonParams { kappa, theta, xi, rho, v0 })
    }

    /// Benchmark volatility parameters: κ=5, θ=0.2², ξ=0.3, ρ=−0.5, v₀=θ.
    pub fn benchmark_defaults() -> Self {
        HestonParams { kappa: 5.0, theta: 0.04, xi: 0.3, rho: -0.5, v0: 0.04 }
    }

    /// Same dynamics with a different long-run variance (v₀ follows θ).
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self.v0 = theta;
        self
    }
}

/// Output of one volatility-path simulation.
#[derive(Debug, Clone)]
pub struct HestonPath {
    /// Spot variance `σ²_t` (truncated at zero) on the fine grid,
    /// `n · substeps + 1` nodes.
    pub sigma2_fine: Vec<f64>,
    /// `∫ σ dW` aggregated to observation increments, length `n`.
    pub brownian_increments: Vec<f64>,
    /// Trapezoid integral of the fine variance path.
    pub c_true: f64,
}

/// Full-truncation Euler: `v⁺ = max(v, 0)` enters both the drift and the
/// diffusion, and the recorded variance path is `v⁺` itself.
pub fn simulate_heston<R: Rng>(
    params: &HestonParams,
    grid: SamplingGrid<f64>,
    substeps: usize,
    rng: &mut R,
) -> Result<HestonPath> {
    if substeps == 0 {
        return Err(Error::invalid("substeps must be >= 1"));
    }
    let n = grid.n();
    let hf = grid.step() / substeps as f64;
    let sqrt_hf = hf.sqrt();
    let rho_perp = (1.0 - params.rho * params.rho).sqrt();

    let mut sigma2_fine = Vec::with_capacity(n * substeps + 1);
    let mut increments = Vec::with_capacity(n);
    let mut v = params.v0;
    sigma2_fine.push(v.max(0.0));

    for _ in 0..n {
        let mut acc = 0.0;
        for _ in 0..substeps {
            let vp = v.max(0.0);
            let sv = vp.sqrt();
            let zb: f64 = rng.sample(StandardNormal);
            let zp: f64 = rng.sample(StandardNormal);
            let db = sqrt_hf * zb;
            let dw = params.rho * db + rho_perp * sqrt_hf * zp;
            acc += sv * dw;
            v += params.kappa * (params.theta - vp) * hf + params.xi * sv * db;
            sigma2_fine.push(v.max(0.0));
        }
        increments.push(acc);
    }
    let c_true = trapezoid(&sigma2_fine, hf);
    Ok(HestonPath { sigma2_fine, brownian_increments: increments, c_true })
}
