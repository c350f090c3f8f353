//! Oracle-based validation runs over simulated paths: the path-wise
//! sandwich, the stabilized-iterate equality event, and the local-oracle
//! equality on final values.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{rv, InitializerSpec, SpotConfig};
use crate::fixedpoint::{iterate_uniform, kn_default, RateRule};
use crate::grid::build_grid;
use crate::harness::config::horizon_to_n;
use crate::oracle::{oracle_local_final, oracle_trv, sandwich_check, OracleConfig};
use crate::simulate::rng::derive_seed;
use crate::simulate::{ModelSim, SimConfig};

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationSummary {
    pub paths: usize,
    pub lower_ok: usize,
    pub upper_ok: usize,
    pub equality_ok: usize,
    pub local_equality_ok: usize,
}

impl ValidationSummary {
    pub fn sandwich_holds_everywhere(&self) -> bool {
        self.lower_ok == self.paths && self.upper_ok == self.paths
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationConfig {
    pub model: u32,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    /// Oracle cutoff; defaults to `0.5 √(h log(1/h))`.
    pub y: Option<f64>,
    pub workers: usize,
}

/// Run the sandwich and oracle-equality checks on freshly simulated paths,
/// using the uniform scheme with RV initialization and the `√r = 4 h^0.49`
/// rate, plus the (6b)-style local oracle for the final-value equality.
pub fn run_validation(cfg: &ValidationConfig) -> Result<ValidationSummary> {
    if cfg.paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    let n = horizon_to_n(cfg.horizon);
    let grid = build_grid(n, cfg.horizon)?;
    let h = grid.step();
    let sim_cfg = SimConfig::default();
    let sim = ModelSim::new(cfg.model, grid, &sim_cfg)?;

    let oracle_cfg = match cfg.y {
        Some(y) => OracleConfig::new(y, 1)?,
        None => OracleConfig::default_for_step(h)?,
    };
    oracle_cfg.ensure_above_trunc(sim_cfg.cgmy_trunc)?;
    let r = RateRule::Power { c: 4.0, beta: 0.49 }.rate(h)?;
    let r_star = RateRule::LogCorrected.rate(h)?;
    let (k, _) = kn_default(h, 0.6, Some(n))?;
    let spot = SpotConfig::new(k)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let flags: Vec<(bool, bool, bool, bool)> = pool.install(|| {
        (0..cfg.paths)
            .into_par_iter()
            .map(|j| {
                let seed = derive_seed(cfg.seed, &[cfg.model as u64, n as u64, j as u64]);
                let bundle = sim.simulate_path(seed)?;
                let incs = &bundle.increments;
                let init = rv(incs);
                let trace = iterate_uniform(incs, r, init)?;
                let rep = sandwich_check(&bundle, &oracle_cfg, r, init, &trace)?;

                let spot_init = InitializerSpec::SpotBv.eval_local(incs, spot)?;
                let local_final =
                    oracle_local_final(&bundle, &oracle_cfg, r_star, spot, &spot_init)?;
                let oracle = oracle_trv(&bundle, &oracle_cfg)?;
                Ok((rep.lower_ok, rep.upper_ok, rep.equality_ok, local_final == oracle))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut summary = ValidationSummary { paths: cfg.paths, ..Default::default() };
    for (lo, up, eq, leq) in flags {
        summary.lower_ok += lo as usize;
        summary.upper_ok += up as usize;
        summary.equality_ok += eq as usize;
        summary.local_equality_ok += leq as usize;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sandwich_holds_on_small_run() {
        let cfg = ValidationConfig {
            model: 1,
            horizon: 1.0 / 252.0,
            paths: 40,
            seed: 5,
            y: None,
            workers: 2,
        };
        let s = run_validation(&cfg).unwrap();
        assert_eq!(s.paths, 40);
        assert!(s.sandwich_holds_everywhere(), "{s:?}");
        // equality events dominate at this frequency
        assert!(s.equality_ok >= 36, "{s:?}");
    }

    #[test]
    fn cutoff_below_trunc_rejected() {
        let cfg = ValidationConfig {
            model: 1,
            horizon: 1.0 / 252.0,
            paths: 4,
            seed: 5,
            y: Some(1e-6),
            workers: 1,
        };
        assert!(run_validation(&cfg).is_err());
    }
}
