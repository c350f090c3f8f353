//! Regularly sampled paths: the observation grid, increment series, and the
//! simulation ground truth bundled with them.
//!
//! Increments are the canonical representation throughout the crate; price
//! levels are derived. The boundary convention `Δ_i = 0` for
//! `i ≤ 0` or `i > n` is enforced by [`IncrementSeries::delta`].

use crate::error::{Error, Result};
use crate::numeric::trapezoid;
use crate::real::Real;

/// Evenly spaced observation grid on `[0, T]` with `n` increments.
///
/// The step is always derived as `h = T / n`; it is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid<T: Real> {
    n: usize,
    horizon: T,
}

impl<T: Real> SamplingGrid<T> {
    /// Grid with at least one increment. Most callers want [`build_grid`],
    /// which additionally requires `n ≥ 2`; ingestion of two-row files is the
    /// one place a single-increment grid arises.
    pub fn with_min_one(n: usize, horizon: T) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("observation count n must be at least 1"));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::invalid("horizon T must be positive and finite"));
        }
        Ok(SamplingGrid { n, horizon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Horizon `T` in years.
    pub fn horizon(&self) -> T {
        self.horizon
    }

    /// Step `h = T / n`.
    pub fn step(&self) -> T {
        self.horizon / T::of(self.n as f64)
    }

    /// Observation time `t_i = i · h` for `i = 0..=n`.
    pub fn time(&self, i: usize) -> T {
        T::of(i as f64) * self.step()
    }
}

/// Build an observation grid: `n ≥ 2` observations over horizon `T > 0`.
pub fn build_grid<T: Real>(n: usize, horizon: T) -> Result<SamplingGrid<T>> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2 observations, got {n}")));
    }
    SamplingGrid::with_min_one(n, horizon)
}

/// The `n` log-price increments `Δ_i X = X_{t_i} − X_{t_{i-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSeries<T: Real> {
    grid: SamplingGrid<T>,
    values: Vec<T>,
}

impl<T: Real> IncrementSeries<T> {
    pub fn new(grid: SamplingGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::invalid(format!(
                "increment count {} does not match grid n = {}",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("increments must all be finite"));
        }
        Ok(IncrementSeries { grid, values })
    }

    pub fn grid(&self) -> SamplingGrid<T> {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `Δ_i X` for 1-based `i`, with the zero-padding convention outside
    /// `1..=n`.
    pub fn delta(&self, i: isize) -> T {
        if i < 1 || i as usize > self.values.len() {
            T::zero()
        } else {
            self.values[i as usize - 1]
        }
    }

    /// Reconstruct levels `x0, x0 + Δ_1, …` by partial summation.
    pub fn levels(&self, x0: T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.values.len() + 1);
        let mut acc = x0;
        out.push(acc);
        for &v in &self.values {
            acc += v;
            out.push(acc);
        }
        out
    }
}

/// Difference `n + 1` price levels into an [`IncrementSeries`].
pub fn increments_from_levels<T: Real>(
    levels: &[T],
    grid: SamplingGrid<T>,
) -> Result<IncrementSeries<T>> {
    if levels.len() != grid.n() + 1 {
        return Err(Error::invalid(format!(
            "need {} levels for n = {}, got {}",
            grid.n() + 1,
            grid.n(),
            levels.len()
        )));
    }
    if levels.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("levels must all be finite"));
    }
    let values = levels.windows(2).map(|w| w[1] - w[0]).collect();
    IncrementSeries::new(grid, values)
}

/// 1-based index of the observation interval `((i−1)h, ih]` containing time
/// `t ∈ (0, T]`, clamped into `1..=n`. Simulation binning and the oracle's
/// dirty-interval marking both go through this function, so a jump can never
/// be attributed to different intervals by the two sides.
pub fn interval_of<T: Real>(t: T, grid: &SamplingGrid<T>) -> usize {
    let ratio = (t / grid.step()).as_f64();
    (ratio.ceil() as usize).clamp(1, grid.n())
}

/// Which jump component of the model a record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpComponent {
    /// The infinite-activity Lévy component (recorded above the simulation
    /// truncation level only).
    InfiniteActivity,
    /// The finite-activity compound-Poisson component.
    FiniteActivity,
}

/// Jump times and sizes of one component over `(0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord<T: Real> {
    pub component: JumpComponent,
    times: Vec<T>,
    sizes: Vec<T>,
}

impl<T: Real> JumpRecord<T> {
    pub fn new(component: JumpComponent, times: Vec<T>, sizes: Vec<T>) -> Result<Self> {
        if times.len() != sizes.len() {
            return Err(Error::invalid("jump times and sizes must have equal length"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("jump times must be strictly increasing"));
        }
        if sizes.iter().any(|s| *s == T::zero() || !s.is_finite()) {
            return Err(Error::invalid("jump sizes must be nonzero and finite"));
        }
        Ok(JumpRecord { component, times, sizes })
    }

    pub fn empty(component: JumpComponent) -> Self {
        JumpRecord { component, times: Vec::new(), sizes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn sizes(&self) -> &[T] {
        &self.sizes
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.times.iter().copied().zip(self.sizes.iter().copied())
    }
}

/// A simulated (or ingested) path together with whatever ground truth the
/// generator could provide.
#[derive(Debug, Clone)]
pub struct PathBundle<T: Real> {
    pub increments: IncrementSeries<T>,
    pub x0: T,
    /// Spot variance on the fine simulation grid (`n · substeps + 1` nodes).
    pub sigma2_fine: Option<Vec<T>>,
    /// `C_T = ∫_0^T σ_s² ds`, trapezoid on the fine grid when available.
    pub c_true: Option<T>,
    pub jumps: Vec<JumpRecord<T>>,
    pub seed: u64,
}

impl<T: Real> PathBundle<T> {
    pub fn new(
        increments: IncrementSeries<T>,
        x0: T,
        sigma2_fine: Option<Vec<T>>,
        c_true: Option<T>,
        jumps: Vec<JumpRecord<T>>,
        seed: u64,
    ) -> Result<Self> {
        if let Some(ref fine) = sigma2_fine {
            if fine.iter().any(|v| *v < T::zero() || !v.is_finite()) {
                return Err(Error::invalid("spot variance path must be nonnegative"));
            }
            let c = c_true
                .ok_or_else(|| Error::invalid("c_true required when sigma2_fine is present"))?;
            let n_steps = fine.len().saturating_sub(1).max(1);
            let dx = increments.grid().horizon().as_f64() / n_steps as f64;
            let vals: Vec<f64> = fine.iter().map(|v| v.as_f64()).collect();
            let integral = trapezoid(&vals, dx);
            let scale = integral.abs().max(1e-300);
            if ((c.as_f64() - integral) / scale).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "c_true {} inconsistent with trapezoid integral {}",
                    c.as_f64(),
                    integral
                )));
            }
        }
        Ok(PathBundle { increments, x0, sigma2_fine, c_true, jumps, seed })
    }

    pub fn grid(&self) -> SamplingGrid<T> {
        self.increments.grid()
    }

    pub fn jump_record(&self, component: JumpComponent) -> Option<&JumpRecord<T>> {
        self.jumps.iter().find(|r| r.component == component)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_grid_examples() {
        let g = build_grid::<f64>(78, 1.0 / 252.0).unwrap();
        assert_eq!(g.n(), 78);
        assert_eq!(g.step(), (1.0 / 252.0) / 78.0);
        assert!((g.step() - 5.0875050875e-5).abs() < 1e-12);

        let g = build_grid::<f64>(2, 1.0).unwrap();
        assert_eq!(g.step(), 0.5);

        // n = 5 days × 78 obs/day; oracle: direct arithmetic
        let g = build_grid::<f64>(390, 5.0 / 252.0).unwrap();
        assert!((g.step() - 1.0 / 19656.0).abs() < 1e-18);
    }

    #[test]
    fn build_grid_rejects_bad_input() {
        assert!(build_grid::<f64>(1, 1.0).is_err());
        assert!(build_grid::<f64>(0, 1.0).is_err());
        assert!(build_grid::<f64>(10, 0.0).is_err());
        assert!(build_grid::<f64>(10, -1.0).is_err());
    }

    #[test]
    fn increments_from_levels_examples() {
        let g = build_grid::<f64>(3, 1.0).unwrap();
        let inc = increments_from_levels(&[0.0, 1.0, 3.0, 6.0], g).unwrap();
        assert_eq!(inc.values(), &[1.0, 2.0, 3.0]);

        let inc = increments_from_levels(&[2.0, 2.0, 2.0, 2.0], g).unwrap();
        assert!(inc.values().iter().all(|v| *v == 0.0));

        let g2 = build_grid::<f64>(2, 1.0).unwrap();
        let inc = increments_from_levels(&[1.0, 1.01, 0.99], g2).unwrap();
        assert!((inc.values()[0] - 0.01).abs() < 1e-12);
        assert!((inc.values()[1] - (-0.02)).abs() < 1e-12);

        assert!(increments_from_levels(&[0.0, 1.0], g).is_err());
    }

    #[test]
    fn levels_round_trip() {
        let g = build_grid::<f64>(4, 2.0).unwrap();
        let levels = [1.0, 1.1, 0.95, 1.3, 1.25];
        let inc = increments_from_levels(&levels, g).unwrap();
        for (orig, rebuilt) in levels.iter().zip(inc.levels(1.0)) {
            assert!((orig - rebuilt).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_zero_pads_outside_range() {
        let g = build_grid::<f64>(2, 1.0).unwrap();
        let inc = IncrementSeries::new(g, vec![0.3, -0.6]).unwrap();
        assert_eq!(inc.delta(0), 0.0);
        assert_eq!(inc.delta(-5), 0.0);
        assert_eq!(inc.delta(1), 0.3);
        assert_eq!(inc.delta(2), -0.6);
        assert_eq!(inc.delta(3), 0.0);
    }

    #[test]
    fn interval_attribution() {
        let g = build_grid::<f64>(4, 1.0).unwrap();
        assert_eq!(interval_of(1e-9, &g), 1);
        assert_eq!(interval_of(0.25, &g), 1); // boundary belongs to the left interval
        assert_eq!(interval_of(0.2500001, &g), 2);
        assert_eq!(interval_of(1.0, &g), 4);
        assert_eq!(interval_of(1.0 + 1e-12, &g), 4); // clamped
    }

    #[test]
    fn jump_record_invariants() {
        assert!(JumpRecord::new(JumpComponent::FiniteActivity, vec![0.1, 0.2], vec![1.0, -1.0])
            .is_ok());
        assert!(JumpRecord::new(JumpComponent::FiniteActivity, vec![0.2, 0.1], vec![1.0, -1.0])
            .is_err());
        assert!(
            JumpRecord::new(JumpComponent::FiniteActivity, vec![0.1, 0.2], vec![1.0, 0.0]).is_err()
        );
    }

    #[test]
    fn path_bundle_checks_c_true() {
        let g = build_grid::<f64>(2, 1.0).unwrap();
        let inc = IncrementSeries::new(g, vec![0.1, 0.2]).unwrap();
        // constant variance 0.04: trapezoid over [0,1] = 0.04
        let fine = vec![0.04; 21];
        assert!(PathBundle::new(inc.clone(), 1.0, Some(fine.clone()), Some(0.04), vec![], 7)
            .is_ok());
        assert!(PathBundle::new(inc.clone(), 1.0, Some(fine.clone()), Some(0.05), vec![], 7)
            .is_err());
        assert!(PathBundle::new(inc, 1.0, Some(fine), None, vec![], 7).is_err());
    }
}
