use multiproj_core::metrics::{evaluate, MetricRecord};
use multiproj_core::problems::Problem;
use multiproj_core::solver::{run, RunSettings};
use multiproj_core::{RngStream, DATA_STREAM};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: u64,
    pub message: String,
}

/// Metric records of one successful trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub trial: u64,
    pub records: Vec<MetricRecord>,
}

/// Per-stride means over the successful trials, plus the raw per-trial
/// records for resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub k: Vec<u64>,
    pub samples_used: Vec<u64>,
    pub mean_optimality_error: Vec<f64>,
    pub mean_feasibility_error: Vec<f64>,
    pub mean_violation_fraction: Vec<f64>,
    pub mean_ergodic_gap: Option<Vec<f64>>,
    pub trial_count: usize,
    pub failed_trials: Vec<TrialFailure>,
    pub trials: Vec<TrialMetrics>,
}

impl AggregateResult {
    /// Mean records in the core's record type, for the rate fits.
    pub fn mean_records(&self) -> Vec<MetricRecord> {
        (0..self.k.len())
            .map(|i| MetricRecord {
                k: self.k[i],
                samples_used: self.samples_used[i],
                optimality_error: self.mean_optimality_error[i],
                feasibility_error: self.mean_feasibility_error[i],
                violation_fraction: self.mean_violation_fraction[i],
                ergodic_objective_gap: self.mean_ergodic_gap.as_ref().map(|g| g[i]),
            })
            .collect()
    }

    /// Final-record feasibility error of every successful trial.
    pub fn final_feasibility(&self) -> Vec<f64> {
        self.trials
            .iter()
            .map(|t| t.records.last().map_or(f64::NAN, |r| r.feasibility_error))
            .collect()
    }
}

/// Builds the shared instance of a config.
pub fn build_problem(config: &ExperimentConfig) -> Result<Problem> {
    build_instance(config, 0)
}

fn build_instance(config: &ExperimentConfig, trial: u64) -> Result<Problem> {
    let stream = if config.resample_instance_per_trial {
        DATA_STREAM + trial
    } else {
        DATA_STREAM
    };
    let mut rng = RngStream::new(config.base_seed, stream);
    Ok(config.scenario.to_scenario().build(&mut rng)?)
}

/// Runs one trial against `problem`.
pub fn run_trial(
    config: &ExperimentConfig,
    problem: &Problem,
    trial: u64,
) -> Result<Vec<MetricRecord>> {
    let kind = config.algorithm_kind()?;
    let schedule = config.schedule.resolve(problem)?;
    let x0 = config.x0.resolve(problem)?;
    let mut settings = RunSettings::new(config.iterations, config.metric_stride);
    settings.track_ergodic = config.track_ergodic;
    let mut rng = RngStream::new(config.base_seed, trial);
    let trace = run(problem, kind, schedule, &x0, settings, &mut rng)?;
    let records = trace
        .records
        .iter()
        .map(|r| evaluate(problem, r))
        .collect::<multiproj_core::Result<Vec<_>>>()?;
    Ok(records)
}

/// Runs all trials on a pool of `config.workers` threads and averages them
/// in trial order. More than 1% failed trials is an error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult> {
    config.validate()?;
    let shared = if config.resample_instance_per_trial {
        None
    } else {
        Some(build_problem(config)?)
    };
    if let Some(p) = &shared {
        config.schedule.resolve(p)?;
        config.x0.resolve(p)?;
    }

    let one = |t: u64| -> std::result::Result<Vec<MetricRecord>, String> {
        let owned;
        let problem = match &shared {
            Some(p) => p,
            None => {
                owned = build_instance(config, t).map_err(|e| e.to_string())?;
                &owned
            }
        };
        run_trial(config, problem, t).map_err(|e| e.to_string())
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| (0..config.trials).into_par_iter().map(one).collect());

    aggregate(config.trials, outcomes)
}

fn aggregate(
    trials: u64,
    outcomes: Vec<std::result::Result<Vec<MetricRecord>, String>>,
) -> Result<AggregateResult> {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (t, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(records) => ok.push(TrialMetrics {
                trial: t as u64,
                records,
            }),
            Err(message) => failed.push(TrialFailure {
                trial: t as u64,
                message,
            }),
        }
    }
    if ok.is_empty() || failed.len() as u64 * 100 > trials {
        let first = &failed[0];
        return Err(HarnessError::TooManyFailures {
            failed: failed.len(),
            trials,
            first_trial: first.trial,
            first_message: first.message.clone(),
        });
    }

    let template = &ok[0].records;
    if ok.iter().any(|t| t.records.len() != template.len()) {
        return Err(HarnessError::Pool("trials recorded different grids".into()));
    }
    let n = ok.len() as f64;
    let points = template.len();
    let mut opt = vec![0.0; points];
    let mut feas = vec![0.0; points];
    let mut viol = vec![0.0; points];
    let mut gap = template[0].ergodic_objective_gap.map(|_| vec![0.0; points]);
    for t in &ok {
        for (i, r) in t.records.iter().enumerate() {
            opt[i] += r.optimality_error;
            feas[i] += r.feasibility_error;
            viol[i] += r.violation_fraction;
            if let (Some(g), Some(v)) = (gap.as_mut(), r.ergodic_objective_gap) {
                g[i] += v;
            }
        }
    }
    for v in opt.iter_mut().chain(&mut feas).chain(&mut viol) {
        *v /= n;
    }
    if let Some(g) = gap.as_mut() {
        g.iter_mut().for_each(|v| *v /= n);
    }

    Ok(AggregateResult {
        k: template.iter().map(|r| r.k).collect(),
        samples_used: template.iter().map(|r| r.samples_used).collect(),
        mean_optimality_error: opt,
        mean_feasibility_error: feas,
        mean_violation_fraction: viol,
        mean_ergodic_gap: gap,
        trial_count: ok.len(),
        failed_trials: failed,
        trials: ok,
    })
}
