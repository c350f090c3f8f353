//! Data-driven threshold tuning by fixed-point iteration.
//!
//! Uniform scheme: starting from a scalar guess `Ĉ_0`, alternate
//!
//! ```text
//! B_{j-1} = sqrt(r · T⁻¹ · Ĉ_{j-1}),
//! Ĉ_j     = Σ_i (Δ_i X)² 1{|Δ_i X| ≤ B_{j-1}},
//! ```
//!
//! until the active index set repeats. The iterate sequence is monotone and
//! the indicator sum takes at most `n + 1` distinct values, so stabilization
//! within `n + 1` steps is guaranteed, not merely expected.
//!
//! Local scheme: the same map per increment, driven by kernel spot-variance
//! estimates, `B*_{j-1}(i) = sqrt(r* · ĉ_{j-1}(i))` — note there is no `T⁻¹`
//! here because `ĉ` already estimates a spot (per-unit-time) quantity.
//!
//! Stabilization is detected on the included index sets, never on
//! floating-point equality of the iterates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SpotConfig;
use crate::grid::IncrementSeries;
use crate::real::Real;

/// Threshold rate sequence `r(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateRule {
    /// `r(h) = c² h^{2β}`, i.e. `√r = c h^β`. The common literature choice
    /// is `c = 4`, `β = 0.49`.
    Power { c: f64, beta: f64 },
    /// `r(h) = 2 (1 + η) h log(1/h)`, the feasible version of the optimal
    /// threshold under constant volatility.
    LogOptimal { eta: f64 },
    /// `r(h) = 2 h (log(1/h) − log log(1/h))`.
    LogCorrected,
}

/// Upper limit of the step domain for the logarithmic rates: below `e^{-e}`
/// both `log(1/h)` and `log(1/h) − log log(1/h)` are strictly positive.
pub const LOG_RATE_H_MAX: f64 = 0.065_988_035_845_312_54;

impl RateRule {
    /// Evaluate `r(h)`.
    pub fn rate(&self, h: f64) -> Result<f64> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid("step h must be positive and finite"));
        }
        match *self {
            RateRule::Power { c, beta } => {
                if !(c > 0.0) {
                    return Err(Error::invalid("power rate needs c > 0"));
                }
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::invalid("power rate needs beta in (0,1)"));
                }
                Ok(c * c * h.powf(2.0 * beta))
            }
            RateRule::LogOptimal { eta } => {
                if eta < 0.0 {
                    return Err(Error::invalid("log_optimal rate needs eta >= 0"));
                }
                check_log_domain(h)?;
                Ok(2.0 * (1.0 + eta) * h * (1.0 / h).ln())
            }
            RateRule::LogCorrected => {
                check_log_domain(h)?;
                let l = (1.0 / h).ln();
                Ok(2.0 * h * (l - l.ln()))
            }
        }
    }
}

fn check_log_domain(h: f64) -> Result<()> {
    if h >= LOG_RATE_H_MAX {
        return Err(Error::invalid(format!(
            "log rate rules require h < e^-e ~ {LOG_RATE_H_MAX:.4}, got {h}"
        )));
    }
    Ok(())
}

/// Default spot window size: `h^{-exponent}` rounded to the nearest even
/// integer, at least 2, clamped to the largest even integer `≤ n` when a grid
/// size is supplied. Returns the window and whether clamping occurred.
pub fn kn_default(h: f64, exponent: f64, n: Option<usize>) -> Result<(usize, bool)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid("step h must be positive and finite"));
    }
    if !(exponent > 0.0 && exponent < 1.0) {
        return Err(Error::invalid("window exponent must be in (0,1)"));
    }
    let x = h.powf(-exponent);
    let mut k = (2.0 * (x / 2.0).round()) as usize;
    k = k.max(2);
    let mut clamped = false;
    if let Some(n) = n {
        let cap = n - n % 2;
        if cap < 2 {
            return Err(Error::invalid(format!("grid n = {n} cannot hold an even window >= 2")));
        }
        if k > cap {
            k = cap;
            clamped = true;
        }
    }
    Ok((k, clamped))
}

/// Compact bit set over increment indices (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    nbits: usize,
    words: Vec<u64>,
}

impl IndexSet {
    pub fn new(nbits: usize) -> Self {
        IndexSet { nbits, words: vec![0; nbits.div_ceil(64)] }
    }

    pub fn insert(&mut self, idx: usize) {
        debug_assert!(idx < self.nbits);
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx < self.nbits && self.words[idx / 64] & (1 << (idx % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn capacity(&self) -> usize {
        self.nbits
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(move |&i| self.contains(i))
    }
}

/// Trace of one uniform fixed-point run.
#[derive(Debug, Clone)]
pub struct FixedPointTrace<T: Real> {
    /// `Ĉ_{n,0}, Ĉ_{n,1}, …` up to the first stabilized value.
    pub iterates: Vec<T>,
    /// `B_{n,j} = sqrt(r T⁻¹ Ĉ_{n,j})`, aligned with `iterates`; the last
    /// entry is the stationary threshold `B_n`.
    pub thresholds: Vec<T>,
    /// First index after which the iterate sequence is constant.
    pub j_n: usize,
    /// Increment indices included in the final estimate (0-based).
    pub active_set: IndexSet,
    /// The estimator value `Ĉ_n`.
    pub value: T,
}

impl<T: Real> FixedPointTrace<T> {
    /// Stationary threshold `B_n`.
    pub fn final_threshold(&self) -> T {
        *self.thresholds.last().expect("trace has at least one threshold")
    }

    /// 1-based iteration count as reported in stabilization histograms;
    /// equals `max(j_n, 1)` so that runs whose very first pass is already
    /// stationary count as one iteration.
    pub fn iterations_until_stabilization(&self) -> usize {
        self.j_n.max(1)
    }
}

/// Trace of one localized fixed-point run.
#[derive(Debug, Clone)]
pub struct LocalTrace<T: Real> {
    /// `ĉ_{n,j}(·)` vectors for `j = 0..` up to the first stabilized vector.
    pub c_iterates: Vec<Vec<T>>,
    /// Stationary local thresholds `B*_n(i)`.
    pub thresholds_final: Vec<T>,
    /// First index after which every component is constant.
    pub j_n_star: usize,
    /// Increment indices included in the final estimate (0-based).
    pub active_set: IndexSet,
    /// The estimator value `Ĉ*_n`.
    pub value: T,
}

impl<T: Real> LocalTrace<T> {
    pub fn iterations_until_stabilization(&self) -> usize {
        self.j_n_star.max(1)
    }
}

/// Uniform fixed-point iteration (estimator `Ĉ_n`).
///
/// `r` is the already-evaluated rate `r(h)`; `init` is `Ĉ_{n,0}` (typically
/// RV or BV of the same increments).
pub fn iterate_uniform<T: Real>(
    incs: &IncrementSeries<T>,
    r: T,
    init: T,
) -> Result<FixedPointTrace<T>> {
    iterate_uniform_masked(incs, r, init, None)
}

/// Same iteration with the sums restricted to an eligible index subset; the
/// oracle sequences run the map over the jump-free intervals only.
pub(crate) fn iterate_uniform_masked<T: Real>(
    incs: &IncrementSeries<T>,
    r: T,
    init: T,
    eligible: Option<&IndexSet>,
) -> Result<FixedPointTrace<T>> {
    if init < T::zero() || !init.is_finite() {
        return Err(Error::invalid("fixed-point initializer must be >= 0 and finite"));
    }
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::invalid("threshold rate must be positive"));
    }
    let n = incs.n();
    let factor = r / incs.grid().horizon();
    let vals = incs.values();

    let mut iterates = vec![init];
    let mut thresholds = vec![(factor * init).sqrt()];
    let mut prev_set: Option<IndexSet> = None;

    // n + 2 passes suffice: the nested active sets take at most n + 1 values.
    for _ in 0..(n + 2) {
        let b = *thresholds.last().expect("non-empty");
        let mut set = IndexSet::new(n);
        let mut sum = T::zero();
        for (idx, &d) in vals.iter().enumerate() {
            if eligible.is_none_or(|e| e.contains(idx)) && d.abs() <= b {
                set.insert(idx);
                sum += d * d;
            }
        }
        if prev_set.as_ref() == Some(&set) {
            let value = *iterates.last().expect("non-empty");
            let j_n = stabilization_index(&iterates);
            return Ok(FixedPointTrace { iterates, thresholds, j_n, active_set: set, value });
        }
        iterates.push(sum);
        thresholds.push((factor * sum).sqrt());
        prev_set = Some(set);
    }
    Err(Error::Internal(format!("uniform fixed point failed to stabilize within {} steps", n + 1)))
}

/// Localized fixed-point iteration (estimator `Ĉ*_n`).
///
/// `r_star` is the evaluated rate `r*(h)`; `init` holds the spot initial
/// estimates `ĉ_{n,0}(i)`, one per increment.
pub fn iterate_local<T: Real>(
    incs: &IncrementSeries<T>,
    r_star: T,
    cfg: SpotConfig,
    init: Vec<T>,
) -> Result<LocalTrace<T>> {
    let n = incs.n();
    if init.len() != n {
        return Err(Error::invalid(format!(
            "spot initializer length {} does not match n = {}",
            init.len(),
            n
        )));
    }
    if init.iter().any(|c| *c < T::zero() || !c.is_finite()) {
        return Err(Error::invalid("spot initializer must be >= 0 and finite"));
    }
    if !(r_star > T::zero()) || !r_star.is_finite() {
        return Err(Error::invalid("threshold rate must be positive"));
    }
    if cfg.k() > n {
        return Err(Error::invalid(format!("window k = {} exceeds n = {}", cfg.k(), n)));
    }

    let vals = incs.values();
    let half = (cfg.k() / 2) as isize;
    let h = incs.grid().step();
    // per-position normalization by the in-range window count
    let scales: Vec<T> = (1..=n)
        .map(|i| {
            T::one()
                / (h * T::of(crate::estimators::window_count(i, cfg.k(), 1, n) as f64))
        })
        .collect();

    let mut c_iterates = vec![init];
    // double-buffered per-increment window sets; compared, then swapped
    let mut sets: Vec<IndexSet> = (0..n).map(|_| IndexSet::new(cfg.k())).collect();
    let mut prev_sets: Vec<IndexSet> = sets.clone();
    let mut have_prev = false;

    for _ in 0..(n + 2) {
        let current = c_iterates.last().expect("non-empty");
        let mut next = Vec::with_capacity(n);
        for i in 1..=n as isize {
            let b = (r_star * current[i as usize - 1]).sqrt();
            let set = &mut sets[i as usize - 1];
            set.clear();
            let mut sum = T::zero();
            for (off, l) in ((i - half + 1)..=(i + half)).enumerate() {
                if l < 1 || l as usize > n {
                    continue;
                }
                let d = vals[l as usize - 1];
                if d.abs() <= b {
                    set.insert(off);
                    sum += d * d;
                }
            }
            next.push(sum * scales[i as usize - 1]);
        }
        if have_prev && prev_sets == sets {
            let c_final = c_iterates.last().expect("non-empty");
            let thresholds_final: Vec<T> =
                c_final.iter().map(|&c| (r_star * c).sqrt()).collect();
            let mut active_set = IndexSet::new(n);
            let mut value = T::zero();
            for (idx, (&d, &b)) in vals.iter().zip(&thresholds_final).enumerate() {
                if d.abs() <= b {
                    active_set.insert(idx);
                    value += d * d;
                }
            }
            let j_n_star = stabilization_index_vec(&c_iterates);
            return Ok(LocalTrace { c_iterates, thresholds_final, j_n_star, active_set, value });
        }
        c_iterates.push(next);
        std::mem::swap(&mut sets, &mut prev_sets);
        have_prev = true;
    }
    Err(Error::Internal(format!("local fixed point failed to stabilize within {} steps", n + 1)))
}

/// First index after which a monotone iterate sequence equals its final
/// value; monotonicity makes the backward scan valid.
fn stabilization_index<T: Real>(iterates: &[T]) -> usize {
    let last = *iterates.last().expect("non-empty");
    let mut j = iterates.len() - 1;
    while j > 0 && iterates[j - 1] == last {
        j -= 1;
    }
    j
}

fn stabilization_index_vec<T: Real>(iterates: &[Vec<T>]) -> usize {
    let last = iterates.last().expect("non-empty");
    let mut j = iterates.len() - 1;
    while j > 0 && iterates[j - 1] == *last {
        j -= 1;
    }
    j
}
