//! Benchmark configuration: the experiment matrix, estimator bindings, and
//! the `bench.json` schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::InitializerSpec;
use crate::fixedpoint::RateRule;
use crate::simulate::{CppIntensity, ModelSpec, SimConfig};

/// Observations per year under the 6.5-hour, 252-day, 5-minute convention.
pub const OBS_PER_YEAR: f64 = 252.0 * 78.0;

/// Map a horizon in years to the observation count at the 5-minute
/// frequency (78 per day), minimum 2.
pub fn horizon_to_n(horizon: f64) -> usize {
    ((horizon * OBS_PER_YEAR).round() as usize).max(2)
}

/// How an estimator turns increments into a point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// TRV with the deterministic threshold `ε = √r(h)`.
    TrvDeterministic,
    /// TRV with threshold `ε = √(r(h) · Î/T)` for a scalar jump-robust
    /// initial estimate `Î` (bipower variation by default).
    TrvBvTuned,
    /// Uniform fixed-point iteration.
    FpUniform,
    /// Localized fixed-point iteration on kernel spot estimates.
    FpLocal,
}

/// One estimator binding: kind, rate rule, initializer, and (for the local
/// kind) the window exponent in `k = h^{-exponent}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub id: String,
    pub kind: EstimatorKind,
    pub rate: RateRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitializerSpec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spot_exponent: Option<f64>,
}

impl EstimatorSpec {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            EstimatorKind::TrvDeterministic => Ok(()),
            EstimatorKind::TrvBvTuned => match &self.init {
                None => Ok(()),
                Some(init) if !init.is_local() => Ok(()),
                Some(_) => Err(Error::Config(format!(
                    "estimator {}: tuned TRV needs a scalar initializer",
                    self.id
                ))),
            },
            EstimatorKind::FpUniform => match &self.init {
                Some(init) if !init.is_local() => Ok(()),
                _ => Err(Error::Config(format!(
                    "estimator {}: uniform fixed point needs a scalar initializer",
                    self.id
                ))),
            },
            EstimatorKind::FpLocal => {
                match &self.init {
                    Some(init) if init.is_local() => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "estimator {}: local fixed point needs a spot initializer",
                            self.id
                        )))
                    }
                }
                match self.spot_exponent {
                    Some(e) if e > 0.0 && e < 1.0 => Ok(()),
                    _ => Err(Error::Config(format!(
                        "estimator {}: local fixed point needs spot_exponent in (0,1)",
                        self.id
                    ))),
                }
            }
        }
    }

    /// Whether the estimator produces a stabilization index.
    pub fn is_iterative(&self) -> bool {
        matches!(self.kind, EstimatorKind::FpUniform | EstimatorKind::FpLocal)
    }
}

/// The benchmark's eight standard estimators (1)–(6b).
pub fn default_estimators() -> Vec<EstimatorSpec> {
    let common_rate = RateRule::Power { c: 4.0, beta: 0.49 };
    vec![
        EstimatorSpec {
            id: "1".into(),
            kind: EstimatorKind::TrvDeterministic,
            rate: RateRule::Power { c: 1.0, beta: 0.49 },
            init: None,
            spot_exponent: None,
        },
        EstimatorSpec {
            id: "2".into(),
            kind: EstimatorKind::TrvBvTuned,
            rate: common_rate,
            init: Some(InitializerSpec::Bv),
            spot_exponent: None,
        },
        EstimatorSpec {
            id: "3".into(),
            kind: EstimatorKind::FpUniform,
            rate: common_rate,
            init: Some(InitializerSpec::Rv),
            spot_exponent: None,
        },
        EstimatorSpec {
            id: "4".into(),
            kind: EstimatorKind::FpUniform,
            rate: common_rate,
            init: Some(InitializerSpec::Bv),
            spot_exponent: None,
        },
        EstimatorSpec {
            id: "5a".into(),
            kind: EstimatorKind::FpLocal,
            rate: RateRule::LogCorrected,
            init: Some(InitializerSpec::SpotRv),
            spot_exponent: Some(0.5),
        },
        EstimatorSpec {
            id: "5b".into(),
            kind: EstimatorKind::FpLocal,
            rate: RateRule::LogCorrected,
            init: Some(InitializerSpec::SpotRv),
            spot_exponent: Some(0.6),
        },
        EstimatorSpec {
            id: "6a".into(),
            kind: EstimatorKind::FpLocal,
            rate: RateRule::LogCorrected,
            init: Some(InitializerSpec::SpotBv),
            spot_exponent: Some(0.5),
        },
        EstimatorSpec {
            id: "6b".into(),
            kind: EstimatorKind::FpLocal,
            rate: RateRule::LogCorrected,
            init: Some(InitializerSpec::SpotBv),
            spot_exponent: Some(0.6),
        },
    ]
}

fn default_models() -> Vec<u32> {
    vec![1, 2, 3, 4, 5]
}

fn default_horizons() -> Vec<f64> {
    vec![1.0 / 252.0, 5.0 / 252.0, 1.0 / 12.0]
}

fn default_workers() -> usize {
    1
}

fn default_output_dir() -> String {
    "voltune_out".into()
}

/// Optional overrides applied on top of every model preset in a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOverrides {
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub xi: Option<f64>,
    pub rho: Option<f64>,
    pub v0: Option<f64>,
    /// Replaces the constant intensity (or the switching high rate).
    pub cpp_lambda: Option<f64>,
    pub jump_mean: Option<f64>,
    pub jump_sd: Option<f64>,
    /// Re-solves the jump-size cap for this quadratic-variation target.
    pub cgmy_qv: Option<f64>,
}

impl ModelOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ModelOverrides::default()
    }

    pub fn apply(&self, mut spec: ModelSpec) -> Result<ModelSpec> {
        if let Some(kappa) = self.kappa {
            spec.heston.kappa = kappa;
        }
        if let Some(theta) = self.theta {
            spec.heston.theta = theta;
            spec.heston.v0 = theta; // v0 follows theta unless set explicitly
        }
        if let Some(xi) = self.xi {
            spec.heston.xi = xi;
        }
        if let Some(rho) = self.rho {
            spec.heston.rho = rho;
        }
        if let Some(v0) = self.v0 {
            spec.heston.v0 = v0;
        }
        // re-validate the volatility parameters after the overrides
        spec.heston = crate::simulate::HestonParams::new(
            spec.heston.kappa,
            spec.heston.theta,
            spec.heston.xi,
            spec.heston.rho,
            spec.heston.v0,
        )?;
        if let Some(cpp) = &mut spec.cpp {
            if let Some(lambda) = self.cpp_lambda {
                cpp.intensity = match cpp.intensity {
                    CppIntensity::Constant { .. } => CppIntensity::Constant { lambda },
                    CppIntensity::VolSwitching { threshold, .. } => {
                        CppIntensity::VolSwitching { lambda_high: lambda, threshold }
                    }
                };
            }
            if let Some(mean) = self.jump_mean {
                cpp.jump_mean = mean;
            }
            if let Some(sd) = self.jump_sd {
                cpp.jump_sd = sd;
            }
            *cpp = crate::simulate::CppParams::new(cpp.intensity, cpp.jump_mean, cpp.jump_sd)?;
        }
        if let Some(qv) = self.cgmy_qv {
            match spec.cgmy {
                Some(params) => spec.cgmy_cap = Some(params.cap_for_variance(qv)?),
                None => {
                    return Err(Error::Config(
                        "cgmy_qv override on a model without an infinite-activity component"
                            .into(),
                    ))
                }
            }
        }
        Ok(spec)
    }
}

/// Simulation overrides exposed through the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOverrides {
    pub substeps: usize,
    pub cgmy_trunc: f64,
    pub gaussian_correction: bool,
}

impl Default for SimOverrides {
    fn default() -> Self {
        let d = SimConfig::default();
        SimOverrides {
            substeps: d.substeps,
            cgmy_trunc: d.cgmy_trunc,
            gaussian_correction: d.gaussian_correction,
        }
    }
}

impl SimOverrides {
    pub fn to_sim_config(self, seed: u64) -> SimConfig {
        SimConfig {
            substeps: self.substeps,
            cgmy_trunc: self.cgmy_trunc,
            gaussian_correction: self.gaussian_correction,
            seed,
        }
    }
}

/// Full benchmark description (`bench.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    #[serde(default = "default_models")]
    pub models: Vec<u32>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Report empirical 95% CI coverage as an extra column.
    #[serde(default)]
    pub ci_coverage: bool,
    #[serde(default)]
    pub sim: SimOverrides,
    #[serde(default)]
    pub model_overrides: ModelOverrides,
}

impl BenchmarkConfig {
    pub fn quick(models: Vec<u32>, horizons: Vec<f64>, paths: usize, seed: u64) -> Self {
        BenchmarkConfig {
            models,
            horizons,
            paths,
            seed,
            estimators: default_estimators(),
            workers: default_workers(),
            output_dir: default_output_dir(),
            ci_coverage: false,
            sim: SimOverrides::default(),
            model_overrides: ModelOverrides::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Config("paths must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.models.is_empty() || self.horizons.is_empty() || self.estimators.is_empty() {
            return Err(Error::Config("models, horizons, estimators must be non-empty".into()));
        }
        if self.horizons.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("horizons must be positive".into()));
        }
        let mut ids: Vec<&str> = self.estimators.iter().map(|e| e.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.estimators.len() {
            return Err(Error::Config("estimator ids must be unique".into()));
        }
        for est in &self.estimators {
            est.validate()?;
        }
        self.sim.to_sim_config(0).validate()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchmarkConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
