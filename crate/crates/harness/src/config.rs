//! JSON experiment configuration.
//!
//! Every struct rejects unknown keys. Optional keys fall back to the
//! defaults listed on each field, and [`ExperimentConfig::resolved`] writes
//! those defaults back out so an echoed config reproduces the same run.

use std::path::{Path, PathBuf};

use multiproj_core::problems::{Problem, Scenario, SphereParams, SvmParams, TwoSphereParams};
use multiproj_core::solver::{AlgorithmKind, Scheme, StepSchedule};
use multiproj_core::Vector;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DEFAULT_ETA_PROBES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphereConfig {
    pub m: usize,
    pub radius: f64,
    pub noise_variance: f64,
    pub target_distance: f64,
}

impl Default for SphereConfig {
    fn default() -> Self {
        let p = SphereParams::default();
        SphereConfig {
            m: p.m,
            radius: p.radius,
            noise_variance: p.noise_variance,
            target_distance: p.target_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoSphereConfig {
    pub m: usize,
    pub radius: f64,
    pub center_offset: f64,
    pub noise_variance: f64,
}

impl Default for TwoSphereConfig {
    fn default() -> Self {
        let p = TwoSphereParams::default();
        TwoSphereConfig {
            m: p.m,
            radius: p.radius,
            center_offset: p.center_offset,
            noise_variance: p.noise_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub d: usize,
    pub m: usize,
    pub margin: f64,
    pub separation: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        let p = SvmParams::default();
        SvmConfig {
            d: p.d,
            m: p.m,
            margin: p.margin,
            separation: p.separation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Sphere(SphereConfig),
    TwoSphere(TwoSphereConfig),
    Svm(SvmConfig),
}

impl ScenarioConfig {
    pub fn to_scenario(&self) -> Scenario {
        match self {
            ScenarioConfig::Sphere(c) => Scenario::Sphere(SphereParams {
                m: c.m,
                radius: c.radius,
                noise_variance: c.noise_variance,
                target_distance: c.target_distance,
            }),
            ScenarioConfig::TwoSphere(c) => Scenario::TwoSphere(TwoSphereParams {
                m: c.m,
                radius: c.radius,
                center_offset: c.center_offset,
                noise_variance: c.noise_variance,
            }),
            ScenarioConfig::Svm(c) => Scenario::Svm(SvmParams {
                d: c.d,
                m: c.m,
                margin: c.margin,
                separation: c.separation,
            }),
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.to_scenario().num_constraints()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Baseline,
    Averaging,
    MaxSet,
    PolyhedralSet,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Baseline,
        Algorithm::Averaging,
        Algorithm::MaxSet,
        Algorithm::PolyhedralSet,
    ];

    pub fn scheme(self) -> Scheme {
        match self {
            Algorithm::Baseline => Scheme::Baseline,
            Algorithm::Averaging => Scheme::Averaging,
            Algorithm::MaxSet => Scheme::MaxSet,
            Algorithm::PolyhedralSet => Scheme::PolyhedralSet,
        }
    }

    pub fn name(self) -> &'static str {
        self.scheme().name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Polynomial {
        alpha0: f64,
        exponent: f64,
    },
    OffsetInverse {
        offset: f64,
    },
    /// Without `sigma`, the scenario's own strong-convexity constant is used.
    StronglyConvex {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Constant {
        alpha: f64,
    },
}

impl ScheduleConfig {
    pub fn resolve(&self, problem: &Problem) -> Result<StepSchedule> {
        let schedule = match *self {
            ScheduleConfig::Polynomial { alpha0, exponent } => {
                StepSchedule::Polynomial { alpha0, exponent }
            }
            ScheduleConfig::OffsetInverse { offset } => StepSchedule::OffsetInverse { offset },
            ScheduleConfig::StronglyConvex { sigma } => {
                let sigma = sigma.or(problem.strong_convexity).ok_or_else(|| {
                    HarnessError::config(
                        "schedule.sigma",
                        "scenario is not strongly convex; give sigma explicitly",
                    )
                })?;
                StepSchedule::StronglyConvex { sigma }
            }
            ScheduleConfig::Constant { alpha } => StepSchedule::Constant { alpha },
        };
        schedule
            .validate()
            .map_err(|e| HarnessError::config("schedule", e.to_string()))?;
        Ok(schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPoint {
    #[default]
    Zero,
    /// The scenario's planted point.
    Planted,
    Explicit(Vec<f64>),
}

impl InitialPoint {
    pub fn resolve(&self, problem: &Problem) -> Result<Vector> {
        match self {
            InitialPoint::Zero => Ok(Vector::zeros(problem.dim())),
            InitialPoint::Planted => problem
                .planted
                .clone()
                .ok_or_else(|| HarnessError::config("x0", "scenario has no planted point")),
            InitialPoint::Explicit(v) => {
                if v.len() != problem.dim() {
                    return Err(HarnessError::config(
                        "x0.explicit",
                        format!("expected {} entries, got {}", problem.dim(), v.len()),
                    ));
                }
                Vector::from_slice(v)
                    .map_err(|e| HarnessError::config("x0.explicit", e.to_string()))
            }
        }
    }
}

/// Cross product used by the `sweep` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub algorithms: Vec<Algorithm>,
    #[serde(rename = "M")]
    pub batch_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub algorithm: Algorithm,
    #[serde(rename = "M")]
    pub batch_size: usize,
    pub schedule: ScheduleConfig,
    pub iterations: u64,
    pub trials: u64,
    pub base_seed: u64,
    /// Default 1.
    #[serde(default = "default_stride")]
    pub metric_stride: u64,
    /// Default `zero`.
    #[serde(default)]
    pub x0: InitialPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Default: one worker per available core. Never changes results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Default false: one instance is shared by all trials.
    #[serde(default)]
    pub resample_instance_per_trial: bool,
    /// Default false. Costs one full projection per iteration.
    #[serde(default)]
    pub track_ergodic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Default 1000.
    #[serde(default = "default_eta_probes")]
    pub eta_probes: usize,
}

fn default_stride() -> u64 {
    1
}

fn default_eta_probes() -> usize {
    DEFAULT_ETA_PROBES
}

impl ExperimentConfig {
    /// Parses and validates a JSON document. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "<root>".to_string()
            } else {
                path
            };
            HarnessError::config(field, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(HarnessError::config("trials", "must be at least 1"));
        }
        if self.metric_stride < 1 {
            return Err(HarnessError::config("metric_stride", "must be at least 1"));
        }
        let m = self.scenario.num_constraints();
        check_batch("M", self.algorithm, self.batch_size, m)?;
        if self.workers == Some(0) {
            return Err(HarnessError::config("workers", "must be at least 1"));
        }
        if self.eta_probes < 100 {
            return Err(HarnessError::config("eta_probes", "must be at least 100"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.algorithms.is_empty() {
                return Err(HarnessError::config(
                    "sweep.algorithms",
                    "must not be empty",
                ));
            }
            if sweep.batch_sizes.is_empty() {
                return Err(HarnessError::config("sweep.M", "must not be empty"));
            }
            for &alg in &sweep.algorithms {
                for &b in &sweep.batch_sizes {
                    check_batch("sweep.M", alg, b, m)?;
                }
            }
        }
        Ok(())
    }

    pub fn algorithm_kind(&self) -> Result<AlgorithmKind> {
        AlgorithmKind::new(self.algorithm.scheme(), self.batch_size)
            .map_err(|e| HarnessError::config("M", e.to_string()))
    }

    /// Copy with defaults made explicit, suitable for echoing next to the
    /// output. The baseline's batch size is normalized to 1.
    pub fn resolved(&self, problem: &Problem) -> Result<Self> {
        let mut out = self.clone();
        if let ScheduleConfig::StronglyConvex { sigma } = &mut out.schedule {
            if let StepSchedule::StronglyConvex { sigma: s } = self.schedule.resolve(problem)? {
                *sigma = Some(s);
            }
        }
        out.batch_size = self.algorithm_kind()?.batch_size();
        Ok(out)
    }

    /// One config per `(algorithm, M)` pair of the sweep, in listed order.
    /// Without a `sweep` block, all four schemes at the configured `M`.
    pub fn sweep_points(&self) -> Vec<ExperimentConfig> {
        let (algorithms, sizes) = match &self.sweep {
            Some(s) => (s.algorithms.clone(), s.batch_sizes.clone()),
            None => (Algorithm::ALL.to_vec(), vec![self.batch_size]),
        };
        let mut out = Vec::new();
        for &algorithm in &algorithms {
            for &batch_size in &sizes {
                let mut c = self.clone();
                c.algorithm = algorithm;
                c.batch_size = batch_size;
                c.sweep = None;
                c.output_path = self
                    .output_path
                    .as_ref()
                    .map(|p| sweep_output_path(p, algorithm, batch_size));
                out.push(c);
            }
        }
        out
    }
}

fn check_batch(field: &str, algorithm: Algorithm, batch: usize, m: usize) -> Result<()> {
    if batch < 1 {
        return Err(HarnessError::config(field, "must be at least 1"));
    }
    if algorithm != Algorithm::Baseline && batch > m {
        return Err(HarnessError::config(
            field,
            format!("batch size {batch} exceeds the {m} constraints"),
        ));
    }
    Ok(())
}

/// `dir/run.csv` becomes `dir/run_max_set_M5.csv`.
pub fn sweep_output_path(base: &Path, algorithm: Algorithm, batch_size: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    let ext = base
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    base.with_file_name(format!("{stem}_{}_M{batch_size}.{ext}", algorithm.name()))
}
