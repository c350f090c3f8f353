//! CGMY (tempered-stable) Lévy component.
//!
//! Lévy density
//! `ν(dx) = C₋ e^{-G|x|} |x|^{-1-Y} 1{x<0} + C₊ e^{-M x} x^{-1-Y} 1{x>0}`,
//! characteristic triplet `(0, 0, ν)` with respect to the truncation
//! function `1{|x| ≤ 1}`.
//!
//! Simulation follows the compound-Poisson + Gaussian-proxy decomposition:
//! jumps above the cutoff `ε` are sampled exactly from the normalized tail
//! density through a tabulated inverse CDF; jumps below `ε` are replaced by a
//! Brownian motion with the matching variance `σ²(ε) = ∫_{|x|≤ε} x² ν(dx)`;
//! and the drift `-∫_{ε<|x|≤1} x ν(dx)` per unit time restores the triplet's
//! zero drift.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{interval_of, JumpComponent, JumpRecord, SamplingGrid};
use crate::numeric::{adaptive_simpson, ln_gamma};

use super::sample_poisson;

/// Tempered-stable parameters; `y` is the activity index (the process's
/// Blumenthal–Getoor index).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgmyParams {
    pub c_minus: f64,
    pub c_plus: f64,
    pub g: f64,
    pub m: f64,
    pub y: f64,
}

impl CgmyParams {
    pub fn new(c_minus: f64, c_plus: f64, g: f64, m: f64, y: f64) -> Result<Self> {
        if !(y > 0.0 && y < 2.0) {
            return Err(Error::invalid("activity index Y must lie in (0, 2)"));
        }
        if !(g > 0.0 && m > 0.0) {
            return Err(Error::invalid("tempering rates G, M must be positive"));
        }
        if c_minus < 0.0 || c_plus < 0.0 {
            return Err(Error::invalid("amplitudes must be >= 0"));
        }
        Ok(CgmyParams { c_minus, c_plus, g, m, y })
    }

    /// Index-option calibration used by the benchmark models:
    /// C₋ = 0.148, C₊ = 0.033, G = 3.295, M = 4.685, Y = 0.917.
    pub fn index_calibration() -> Self {
        CgmyParams { c_minus: 0.148, c_plus: 0.033, g: 3.295, m: 4.685, y: 0.917 }
    }

    /// Quadratic variation per unit time, `∫ x² ν(dx)`, in closed form:
    /// `Γ(2−Y) (C₋ G^{Y−2} + C₊ M^{Y−2})`.
    pub fn quadratic_variation(&self) -> f64 {
        let gamma = ln_gamma(2.0 - self.y).exp();
        gamma * (self.c_minus * self.g.powf(self.y - 2.0) + self.c_plus * self.m.powf(self.y - 2.0))
    }

    /// Rescale both amplitudes so the per-year quadratic variation hits
    /// `target`, preserving the jump-size distribution shape.
    pub fn scaled_to_quadratic_variation(mut self, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::invalid("target quadratic variation must be positive"));
        }
        let current = self.quadratic_variation();
        if current <= 0.0 {
            return Err(Error::invalid("cannot rescale a zero-amplitude process"));
        }
        let s = target / current;
        self.c_minus *= s;
        self.c_plus *= s;
        Ok(self)
    }

    /// `∫_{lo<|x|≤hi} ν(dx)` by adaptive quadrature.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.c_minus * side_integral(self.g, -1.0 - self.y, lo, hi)
            + self.c_plus * side_integral(self.m, -1.0 - self.y, lo, hi)
    }

    /// Big-jump intensity `λ(ε) = ∫_{|x|>ε} ν(dx)`.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        self.mass_between(eps, f64::INFINITY)
    }

    /// `∫_{lo<|x|≤hi} x² ν(dx)`.
    pub fn variance_between(&self, lo: f64, hi: f64) -> f64 {
        self.c_minus * side_integral(self.g, 1.0 - self.y, lo, hi)
            + self.c_plus * side_integral(self.m, 1.0 - self.y, lo, hi)
    }

    /// Small-jump variance `σ²(ε) = ∫_{|x|≤ε} x² ν(dx)`.
    pub fn truncated_variance(&self, eps: f64) -> f64 {
        self.variance_between(0.0, eps)
    }

    /// Signed mean `∫_{lo<|x|≤hi} x ν(dx)`.
    pub fn signed_mean_between(&self, lo: f64, hi: f64) -> f64 {
        self.c_plus * side_integral(self.m, -self.y, lo, hi)
            - self.c_minus * side_integral(self.g, -self.y, lo, hi)
    }

    /// `∫_{ε<|x|≤1} x ν(dx)`; subtracting this rate restores the zero drift
    /// of the `(0,0,ν)` triplet once jumps above `ε` are added raw.
    pub fn compensator_drift(&self, eps: f64) -> f64 {
        if eps >= 1.0 {
            return 0.0;
        }
        self.signed_mean_between(eps, 1.0)
    }

    /// `E[L_1] = ∫_{|x|>1} x ν(dx)` (the triplet drift is zero).
    pub fn mean_rate(&self) -> f64 {
        self.signed_mean_between(1.0, f64::INFINITY)
    }

    /// `∫ |x|^p ν(dx)` over `lo < |x| ≤ hi`; used by tests as a moment
    /// oracle.
    pub fn abs_moment_between(&self, p: f64, lo: f64, hi: f64) -> f64 {
        self.c_minus * side_integral(self.g, p - 1.0 - self.y, lo, hi)
            + self.c_plus * side_integral(self.m, p - 1.0 - self.y, lo, hi)
    }

    /// `∫ |x|^p ν(dx)` restricted to `|x| > eps`.
    pub fn tail_abs_moment(&self, p: f64, eps: f64) -> f64 {
        self.abs_moment_between(p, eps, f64::INFINITY)
    }

    /// Size cap `u` solving `∫_{|x|≤u} x² ν(dx) = target`, by bisection.
    /// Capping the jump sizes at `u` pins the component's quadratic
    /// variation without touching the density below the cap.
    pub fn cap_for_variance(&self, target: f64) -> Result<f64> {
        if !(target > 0.0) {
            return Err(Error::invalid("target quadratic variation must be positive"));
        }
        if target >= self.quadratic_variation() {
            return Err(Error::invalid(
                "target exceeds the process's total quadratic variation; no cap needed",
            ));
        }
        let (mut lo, mut hi) = (1e-8, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.variance_between(0.0, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) / hi < 1e-13 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn is_zero(&self) -> bool {
        self.c_minus == 0.0 && self.c_plus == 0.0
    }
}

/// `∫_a^b x^p e^{-θx} dx` for `0 ≤ a < b`, via adaptive Simpson in log space
/// (the substitution `x = e^t` removes the endpoint singularity for p near -2
/// and compresses the exponential tail).
fn side_integral(theta: f64, p: f64, a: f64, b: f64) -> f64 {
    debug_assert!(theta > 0.0);
    let cap = a.max(1.0) + 250.0 / theta;
    let hi = b.min(cap);
    // lower floor for a = 0: the omitted mass a'^{p+1}/(p+1) is ~1e-18 of
    // the scale (only reachable when p > -1)
    let lo = if a > 0.0 { a } else { hi * 1e-18f64.powf(1.0 / (p + 1.0)) }.max(1e-290);
    if lo >= hi {
        return 0.0;
    }
    let f = |t: f64| ((p + 1.0) * t - theta * t.exp()).exp();
    let (ta, tb) = (lo.ln(), hi.ln());
    // Dense pre-scan to set the tolerance scale: the integrand can be a
    // narrow peak inside a log-domain tens of units wide, which a 3-point
    // estimate misses entirely.
    let panels = 256usize;
    let step = (tb - ta) / panels as f64;
    let mut scan = f(ta) + f(tb);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        scan += w * f(ta + step * i as f64);
    }
    scan *= step / 3.0;
    let tol = (scan.abs() + 1e-30) * 1e-12;
    adaptive_simpson(&f, ta, tb, tol)
}

/// Log-spaced inverse-CDF table for one tail of the normalized jump-size
/// density `x^{-1-Y} e^{-θx}` on `(ε, ∞)`.
#[derive(Debug, Clone)]
struct TailTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

const TABLE_POINTS: usize = 4096;

impl TailTable {
    fn build(theta: f64, y: f64, eps: f64, cap: f64) -> TailTable {
        let cap = cap.min(eps.max(1.0) + 250.0 / theta);
        let (la, lb) = (eps.ln(), cap.ln());
        let step = (lb - la) / (TABLE_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..TABLE_POINTS).map(|i| (la + step * i as f64).exp()).collect();
        let dens: Vec<f64> = xs.iter().map(|&x| x.powf(-1.0 - y) * (-theta * x).exp()).collect();
        let mut cdf = Vec::with_capacity(TABLE_POINTS);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..TABLE_POINTS {
            acc += 0.5 * (dens[i] + dens[i - 1]) * (xs[i] - xs[i - 1]);
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        TailTable { xs, cdf }
    }

    /// Inverse CDF with linear interpolation inside the bracketing cell.
    fn sample(&self, u: f64) -> f64 {
        let j = match self.cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(j) => return self.xs[j],
            Err(j) => j.clamp(1, self.cdf.len() - 1),
        };
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.xs[j - 1] + w * (self.xs[j] - self.xs[j - 1])
    }
}

/// Prebuilt sampler for one parameter set and cutoff; building it runs the
/// quadratures and tabulations once so per-path simulation stays cheap.
#[derive(Debug, Clone)]
pub struct CgmySampler {
    params: CgmyParams,
    trunc: f64,
    cap: f64,
    gaussian_correction: bool,
    lambda_minus: f64,
    lambda_plus: f64,
    drift_rate: f64,
    small_sd_rate: f64,
    table_minus: Option<TailTable>,
    table_plus: Option<TailTable>,
}

/// Increment-level output of one CGMY path.
#[derive(Debug, Clone)]
pub struct CgmyPath {
    /// Full component increments: jumps + Gaussian proxy + compensator drift.
    pub increments: Vec<f64>,
    /// Jump sums alone, binned per observation interval.
    pub jump_increments: Vec<f64>,
    /// Jumps above the cutoff, individually recorded.
    pub record: JumpRecord<f64>,
}

impl CgmySampler {
    pub fn new(params: CgmyParams, trunc: f64, gaussian_correction: bool) -> Result<CgmySampler> {
        Self::new_capped(params, trunc, f64::INFINITY, gaussian_correction)
    }

    /// Sampler for the density restricted to `|x| ≤ cap`.
    pub fn new_capped(
        params: CgmyParams,
        trunc: f64,
        cap: f64,
        gaussian_correction: bool,
    ) -> Result<CgmySampler> {
        if !(trunc > 0.0 && trunc < 1.0) {
            return Err(Error::invalid("jump cutoff must lie in (0, 1)"));
        }
        if !(cap > trunc) {
            return Err(Error::invalid("size cap must exceed the small-jump cutoff"));
        }
        let lambda_minus = if params.c_minus > 0.0 {
            params.c_minus * side_integral(params.g, -1.0 - params.y, trunc, cap)
        } else {
            0.0
        };
        let lambda_plus = if params.c_plus > 0.0 {
            params.c_plus * side_integral(params.m, -1.0 - params.y, trunc, cap)
        } else {
            0.0
        };
        let table_minus =
            (params.c_minus > 0.0).then(|| TailTable::build(params.g, params.y, trunc, cap));
        let table_plus =
            (params.c_plus > 0.0).then(|| TailTable::build(params.m, params.y, trunc, cap));
        Ok(CgmySampler {
            trunc,
            cap,
            gaussian_correction,
            lambda_minus,
            lambda_plus,
            drift_rate: params.signed_mean_between(trunc, cap.min(1.0)),
            small_sd_rate: params.truncated_variance(trunc).sqrt(),
            table_minus,
            table_plus,
            params,
        })
    }

    pub fn params(&self) -> &CgmyParams {
        &self.params
    }

    pub fn trunc(&self) -> f64 {
        self.trunc
    }

    /// Upper size cap (infinite when uncapped).
    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn big_jump_intensity(&self) -> f64 {
        self.lambda_minus + self.lambda_plus
    }

    /// Simulate one path on `grid`.
    pub fn simulate<R: Rng>(&self, grid: SamplingGrid<f64>, rng: &mut R) -> Result<CgmyPath> {
        let n = grid.n();
        let horizon = grid.horizon();
        let h = grid.step();
        let mut jump_increments = vec![0.0; n];

        let lambda = self.big_jump_intensity();
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        if lambda > 0.0 {
            let count = sample_poisson(lambda * horizon, rng)?;
            let p_minus = self.lambda_minus / lambda;
            jumps.reserve(count);
            for _ in 0..count {
                let t = horizon * (1.0 - rng.random::<f64>());
                let negative = rng.random::<f64>() < p_minus;
                let table = if negative { &self.table_minus } else { &self.table_plus };
                let mag = table.as_ref().expect("side with positive intensity").sample(
                    rng.random::<f64>(),
                );
                jumps.push((t, if negative { -mag } else { mag }));
            }
            jumps.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite jump times"));
        }

        for &(t, size) in &jumps {
            jump_increments[interval_of(t, &grid) - 1] += size;
        }

        let mut increments = jump_increments.clone();
        let small_sd = self.small_sd_rate * h.sqrt();
        for inc in &mut increments {
            if self.gaussian_correction && small_sd > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                *inc += small_sd * z;
            }
            *inc -= self.drift_rate * h;
        }

        let (times, sizes): (Vec<f64>, Vec<f64>) = jumps.into_iter().unzip();
        let record = JumpRecord::new(JumpComponent::InfiniteActivity, times, sizes)?;
        Ok(CgmyPath { increments, jump_increments, record })
    }
}

/// One-shot convenience wrapper over [`CgmySampler`]; builds the tables on
/// every call.
pub fn simulate_cgmy<R: Rng>(
    params: &CgmyParams,
    grid: SamplingGrid<f64>,
    trunc: f64,
    gaussian_correction: bool,
    rng: &mut R,
) -> Result<CgmyPath> {
    CgmySampler::new(*params, trunc, gaussian_correction)?.simulate(grid, rng)
}
