//! Oracle estimators computable only with simulation ground truth.
//!
//! With the jump locations known, `𝓘_n(y)` collects the observation
//! intervals free of finite-activity jumps and of infinite-activity jumps
//! larger than `y`. The oracle TRV sums squared increments over that set,
//! and oracle counterparts of the fixed-point iterations run the same maps
//! with their sums restricted to it. The path-wise sandwich
//!
//! ```text
//! C̃_{n,n+1}(y) ≤ Ĉ_n ≤ ℭ_n(y) + R_n
//! ```
//!
//! holds deterministically (not asymptotically), which makes it a sharp
//! validation device for the feasible estimators; `validate` runs it over
//! simulated paths and also checks the equality event `C̃ = ℭ` that holds
//! with probability tending to one.

use crate::error::{Error, Result};
use crate::estimators::SpotConfig;
use crate::fixedpoint::{iterate_uniform_masked, FixedPointTrace, IndexSet};
use crate::grid::{interval_of, JumpComponent, PathBundle};
use crate::real::Real;

/// Cutoff and block length for the clean-interval set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig<T: Real> {
    /// Size cutoff `y`: infinite-activity jumps with `|size| > y` mark an
    /// interval dirty (finite-activity jumps always do).
    pub y: T,
    /// Block length `d ≥ 1`: index `i` needs `d` consecutive clean intervals.
    pub d: usize,
}

impl<T: Real> OracleConfig<T> {
    pub fn new(y: T, d: usize) -> Result<Self> {
        if !(y > T::zero()) || !y.is_finite() {
            return Err(Error::invalid("cutoff y must be positive"));
        }
        if d < 1 {
            return Err(Error::invalid("block length d must be >= 1"));
        }
        Ok(OracleConfig { y, d })
    }

    /// Default validation cutoff `y = 0.2 √(h log(1/h))`: a fixed interior
    /// point of the admissible band between the simulation truncation level
    /// and the diffusive modulus of continuity. The constant sits low enough
    /// that jumps retained inside clean intervals almost never cross the
    /// stabilized thresholds, keeping the iterate-equals-oracle event
    /// overwhelmingly likely at benchmark sample sizes.
    pub fn default_for_step(h: T) -> Result<Self> {
        let hf = h.as_f64();
        if !(hf > 0.0 && hf < 1.0) {
            return Err(Error::invalid("step must lie in (0, 1)"));
        }
        OracleConfig::new(T::of(0.2 * (hf * (1.0 / hf).ln()).sqrt()), 1)
    }

    /// The clean-interval logic only sees recorded jumps, so the cutoff must
    /// sit above the simulator's small-jump truncation level.
    pub fn ensure_above_trunc(&self, cgmy_trunc: f64) -> Result<()> {
        if self.y.as_f64() <= cgmy_trunc {
            return Err(Error::invalid(format!(
                "oracle cutoff y = {} must exceed the simulation truncation {}",
                self.y.as_f64(),
                cgmy_trunc
            )));
        }
        Ok(())
    }
}

/// Result of one path-wise sandwich evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SandwichReport<T: Real> {
    /// `ℭ_n(y)`.
    pub oracle_value: T,
    /// Stabilized oracle iterate `C̃_{n,n+1}(y)`.
    pub iterate_value: T,
    /// The feasible estimator `Ĉ_n`.
    pub estimator_value: T,
    /// Remainder `R_n`.
    pub remainder: T,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// The event `{C̃_{n,n+1}(y) = ℭ_n(y)}`.
    pub equality_ok: bool,
}

fn dirty_intervals<T: Real>(
    bundle: &PathBundle<T>,
    y: T,
) -> Result<(Vec<bool>, Vec<bool>)> {
    if bundle.jumps.is_empty() {
        return Err(Error::invalid("path bundle carries no jump records"));
    }
    let grid = bundle.grid();
    let n = grid.n();
    let mut dirty_ia = vec![false; n];
    let mut dirty_fa = vec![false; n];
    for record in &bundle.jumps {
        for (t, size) in record.iter() {
            let idx = interval_of(t, &grid) - 1;
            match record.component {
                JumpComponent::InfiniteActivity => {
                    if size.abs() > y {
                        dirty_ia[idx] = true;
                    }
                }
                JumpComponent::FiniteActivity => dirty_fa[idx] = true,
            }
        }
    }
    Ok((dirty_ia, dirty_fa))
}

/// The set `𝓘_n^{(d)}(y)` of indices whose `d` consecutive intervals are all
/// clean, as 0-based increment indices.
pub fn large_jump_index_set<T: Real>(
    bundle: &PathBundle<T>,
    cfg: &OracleConfig<T>,
) -> Result<IndexSet> {
    let (dirty_ia, dirty_fa) = dirty_intervals(bundle, cfg.y)?;
    let n = bundle.grid().n();
    let clean: Vec<bool> =
        (0..n).map(|i| !dirty_ia[i] && !dirty_fa[i]).collect();
    let mut set = IndexSet::new(n);
    if cfg.d > n {
        return Ok(set);
    }
    for i in 0..=(n - cfg.d) {
        if clean[i..i + cfg.d].iter().all(|c| *c) {
            set.insert(i);
        }
    }
    Ok(set)
}

/// Oracle TRV `ℭ_n(y) = Σ_{i ∈ 𝓘_n(y)} (Δ_i X)²` (block length 1 regardless
/// of `cfg.d`).
pub fn oracle_trv<T: Real>(bundle: &PathBundle<T>, cfg: &OracleConfig<T>) -> Result<T> {
    let clean = large_jump_index_set(bundle, &OracleConfig { d: 1, ..*cfg })?;
    let vals = bundle.increments.values();
    Ok(clean.iter().map(|i| vals[i] * vals[i]).sum())
}

/// Oracle counterpart of the uniform iteration: same initial value, sums
/// restricted to `𝓘_n(y)`. The returned trace's `value` is the stabilized
/// `C̃_{n,n+1}(y)`.
pub fn oracle_iterates_uniform<T: Real>(
    bundle: &PathBundle<T>,
    cfg: &OracleConfig<T>,
    r: T,
    init: T,
) -> Result<FixedPointTrace<T>> {
    let clean = large_jump_index_set(bundle, &OracleConfig { d: 1, ..*cfg })?;
    iterate_uniform_masked(&bundle.increments, r, init, Some(&clean))
}

/// Windowed oracle `𝔠_n(i; y)`: the spot-kernel sum over clean intervals
/// only, zero-padded, scaled by `1/(h k_i)` with `k_i` the in-range window
/// count (dirty intervals reduce the sum, never the normalization). `B`
/// truncates on top of cleanness when finite.
pub fn oracle_spot<T: Real>(
    bundle: &PathBundle<T>,
    i: usize,
    cfg: &OracleConfig<T>,
    spot: SpotConfig,
    b: T,
) -> Result<T> {
    let incs = &bundle.increments;
    let n = incs.n();
    if i < 1 || i > n {
        return Err(Error::invalid(format!("index {i} outside 1..={n}")));
    }
    if spot.k() > n {
        return Err(Error::invalid(format!("window k = {} exceeds n = {}", spot.k(), n)));
    }
    let clean = large_jump_index_set(bundle, &OracleConfig { d: 1, ..*cfg })?;
    let count = crate::estimators::window_count(i, spot.k(), 1, n);
    let half = (spot.k() / 2) as isize;
    let i = i as isize;
    let mut sum = T::zero();
    for l in (i - half + 1)..=(i + half) {
        if l < 1 || l as usize > n || !clean.contains(l as usize - 1) {
            continue;
        }
        let d = incs.delta(l);
        if d.abs() <= b {
            sum += d * d;
        }
    }
    Ok(sum / (incs.grid().step() * T::of(count as f64)))
}

/// Stabilized value of the local-threshold oracle sequence `C̃*_{n,j}(y)`:
/// the per-increment fixed-point maps driven by the clean-restricted spot
/// kernel, started from the same spot initializer as the feasible run.
pub fn oracle_local_final<T: Real>(
    bundle: &PathBundle<T>,
    cfg: &OracleConfig<T>,
    r_star: T,
    spot: SpotConfig,
    init: &[T],
) -> Result<T> {
    let incs = &bundle.increments;
    let n = incs.n();
    if init.len() != n {
        return Err(Error::invalid("spot initializer length must match n"));
    }
    if !(r_star > T::zero()) {
        return Err(Error::invalid("threshold rate must be positive"));
    }
    let clean = large_jump_index_set(bundle, &OracleConfig { d: 1, ..*cfg })?;
    let vals = incs.values();
    let half = (spot.k() / 2) as isize;
    let h = incs.grid().step();
    let scales: Vec<T> = (1..=n)
        .map(|i| T::one() / (h * T::of(crate::estimators::window_count(i, spot.k(), 1, n) as f64)))
        .collect();

    let mut current: Vec<T> = init.to_vec();
    let mut prev_sets: Option<Vec<IndexSet>> = None;
    for _ in 0..(n + 2) {
        let mut next = Vec::with_capacity(n);
        let mut sets = Vec::with_capacity(n);
        for i in 1..=n as isize {
            let b = (r_star * current[i as usize - 1]).sqrt();
            let mut set = IndexSet::new(spot.k());
            let mut sum = T::zero();
            for (off, l) in ((i - half + 1)..=(i + half)).enumerate() {
                if l < 1 || l as usize > n || !clean.contains(l as usize - 1) {
                    continue;
                }
                let d = vals[l as usize - 1];
                if d.abs() <= b {
                    set.insert(off);
                    sum += d * d;
                }
            }
            next.push(sum * scales[i as usize - 1]);
            sets.push(set);
        }
        let stabilized = prev_sets.as_ref() == Some(&sets);
        if stabilized {
            let mut value = T::zero();
            for i in clean.iter() {
                let b = (r_star * current[i]).sqrt();
                if vals[i].abs() <= b {
                    value += vals[i] * vals[i];
                }
            }
            return Ok(value);
        }
        current = next;
        prev_sets = Some(sets);
    }
    Err(Error::Internal("local oracle iteration failed to stabilize".into()))
}

/// Evaluate the path-wise sandwich for a completed uniform run.
pub fn sandwich_check<T: Real>(
    bundle: &PathBundle<T>,
    cfg: &OracleConfig<T>,
    r: T,
    init: T,
    main_trace: &FixedPointTrace<T>,
) -> Result<SandwichReport<T>> {
    if main_trace.iterates.first().copied() != Some(init) {
        return Err(Error::invalid("main trace was produced with a different initial value"));
    }
    if main_trace.active_set.capacity() != bundle.grid().n() {
        return Err(Error::invalid("main trace does not match the bundle's grid"));
    }
    let oracle_value = oracle_trv(bundle, cfg)?;
    let iterate_value = oracle_iterates_uniform(bundle, cfg, r, init)?.value;
    let estimator_value = main_trace.value;

    // R_n sums dirty-interval increments that survive the final threshold,
    // split per the squeeze decomposition into IA-dirty and FA-dirty-only.
    let (dirty_ia, dirty_fa) = dirty_intervals(bundle, cfg.y)?;
    let b_final = main_trace.final_threshold();
    let vals = bundle.increments.values();
    let mut remainder = T::zero();
    for (idx, &d) in vals.iter().enumerate() {
        let counted = dirty_ia[idx] || (!dirty_ia[idx] && dirty_fa[idx]);
        if counted && d.abs() <= b_final {
            remainder += d * d;
        }
    }

    let scale = oracle_value
        .abs()
        .max(iterate_value.abs())
        .max(estimator_value.abs())
        .max(remainder.abs());
    let tol = T::of(1e-12) * scale;
    Ok(SandwichReport {
        oracle_value,
        iterate_value,
        estimator_value,
        remainder,
        lower_ok: iterate_value <= estimator_value + tol,
        upper_ok: estimator_value <= oracle_value + remainder + tol,
        equality_ok: iterate_value == oracle_value,
    })
}
