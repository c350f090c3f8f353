//! Compound-Poisson jump component with constant or volatility-switching
//! intensity, simulated by thinning.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{JumpComponent, JumpRecord, SamplingGrid};

use super::sample_poisson;

/// Jump arrival intensity, in jumps per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CppIntensity {
    Constant { lambda: f64 },
    /// `λ(t) = lambda_high` while the spot variance is at or above
    /// `threshold`, zero below it.
    VolSwitching { lambda_high: f64, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CppParams {
    pub intensity: CppIntensity,
    pub jump_mean: f64,
    pub jump_sd: f64,
}

impl CppParams {
    pub fn new(intensity: CppIntensity, jump_mean: f64, jump_sd: f64) -> Result<Self> {
        let rate = match intensity {
            CppIntensity::Constant { lambda } => lambda,
            CppIntensity::VolSwitching { lambda_high, .. } => lambda_high,
        };
        if rate < 0.0 {
            return Err(Error::invalid("jump intensity must be >= 0"));
        }
        if !(jump_sd > 0.0) {
            return Err(Error::invalid("jump size sd must be positive"));
        }
        Ok(CppParams { intensity, jump_mean, jump_sd })
    }

    /// Benchmark jump-size law `N(-0.005, 0.01²)` at `lambda` jumps/year.
    pub fn benchmark_constant(lambda: f64) -> Self {
        CppParams {
            intensity: CppIntensity::Constant { lambda },
            jump_mean: -0.005,
            jump_sd: 0.01,
        }
    }

    /// `E[ξ²]` of one jump.
    pub fn mean_square_jump(&self) -> f64 {
        self.jump_mean * self.jump_mean + self.jump_sd * self.jump_sd
    }
}

/// Simulate by thinning: candidates arrive at the maximal rate and are kept
/// when the intensity at the candidate time is positive. For the switching
/// intensity the variance is read off the nearest fine-grid node, the finest
/// information the simulator has.
pub fn simulate_cpp<R: Rng>(
    params: &CppParams,
    sigma2_fine: Option<&[f64]>,
    grid: SamplingGrid<f64>,
    rng: &mut R,
) -> Result<JumpRecord<f64>> {
    let horizon = grid.horizon();
    let (lambda_max, threshold) = match params.intensity {
        CppIntensity::Constant { lambda } => (lambda, None),
        CppIntensity::VolSwitching { lambda_high, threshold } => (lambda_high, Some(threshold)),
    };
    if threshold.is_some() && sigma2_fine.is_none() {
        return Err(Error::invalid("vol-switching intensity requires a variance path"));
    }
    if lambda_max == 0.0 {
        return Ok(JumpRecord::empty(JumpComponent::FiniteActivity));
    }

    let count = sample_poisson(lambda_max * horizon, rng)?;
    let mut jumps: Vec<(f64, f64)> = Vec::with_capacity(count);
    for _ in 0..count {
        let t = horizon * (1.0 - rng.random::<f64>());
        let accept = match threshold {
            None => true,
            Some(thr) => {
                let fine = sigma2_fine.expect("checked above");
                let steps = fine.len() - 1;
                let idx =
                    ((t / horizon * steps as f64).round() as usize).min(steps);
                fine[idx] >= thr
            }
        };
        if accept {
            let z: f64 = rng.sample(StandardNormal);
            let mut size = params.jump_mean + params.jump_sd * z;
            if size == 0.0 {
                size = params.jump_sd * f64::EPSILON;
            }
            jumps.push((t, size));
        }
    }
    jumps.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite jump times"));
    let (times, sizes): (Vec<f64>, Vec<f64>) = jumps.into_iter().unzip();
    JumpRecord::new(JumpComponent::FiniteActivity, times, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::simulate::rng::stream_rng;

    #[test]
    fn validation() {
        assert!(CppParams::new(CppIntensity::Constant { lambda: -1.0 }, 0.0, 0.01).is_err());
        assert!(CppParams::new(CppIntensity::Constant { lambda: 1.0 }, 0.0, 0.0).is_err());
        let p = CppParams::new(
            CppIntensity::VolSwitching { lambda_high: 10.0, threshold: 0.04 },
            0.0,
            0.01,
        )
        .unwrap();
        let grid = build_grid(4, 1.0 / 252.0).unwrap();
        assert!(simulate_cpp(&p, None, grid, &mut stream_rng(0, 2)).is_err());
    }

    #[test]
    fn daily_rate_gives_one_jump_per_day() {
        // λ = 252/yr over T = 1/252: Poisson(1); mean within 1.0 ± 0.05
        let p = CppParams::benchmark_constant(252.0);
        let grid = build_grid(78, 1.0 / 252.0).unwrap();
        let mut rng = stream_rng(5, 2);
        let m = 10_000usize;
        let total: usize =
            (0..m).map(|_| simulate_cpp(&p, None, grid, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / m as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean count {mean}");
    }

    #[test]
    fn switching_below_threshold_never_jumps() {
        let p = CppParams::new(
            CppIntensity::VolSwitching { lambda_high: 504.0, threshold: 0.04 },
            -0.005,
            0.01,
        )
        .unwrap();
        let grid = build_grid(78, 1.0 / 252.0).unwrap();
        let fine = vec![0.02; 781];
        let mut rng = stream_rng(6, 2);
        for _ in 0..200 {
            let rec = simulate_cpp(&p, Some(&fine), grid, &mut rng).unwrap();
            assert!(rec.is_empty());
        }
    }

    #[test]
    fn switching_above_threshold_runs_at_high_rate() {
        // variance pinned above the threshold: mean count 2.0 ± 0.07
        let p = CppParams::new(
            CppIntensity::VolSwitching { lambda_high: 504.0, threshold: 0.04 },
            -0.005,
            0.01,
        )
        .unwrap();
        let grid = build_grid(78, 1.0 / 252.0).unwrap();
        let fine = vec![0.05; 781];
        let mut rng = stream_rng(7, 2);
        let m = 10_000usize;
        let total: usize =
            (0..m).map(|_| simulate_cpp(&p, Some(&fine), grid, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / m as f64;
        assert!((mean - 2.0).abs() < 0.07, "mean count {mean}");
    }

    #[test]
    fn jump_times_sorted_and_in_range() {
        let p = CppParams::benchmark_constant(2520.0);
        let grid = build_grid(78, 1.0 / 252.0).unwrap();
        let mut rng = stream_rng(8, 2);
        let rec = simulate_cpp(&p, None, grid, &mut rng).unwrap();
        assert!(!rec.is_empty());
        let times = rec.times();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!(times.iter().all(|t| *t > 0.0 && *t <= grid.horizon()));
    }
}
