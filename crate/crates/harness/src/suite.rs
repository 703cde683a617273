//! The acceptance experiments. Each criterion returns a [`CriterionOutcome`]
//! with a one-line summary of what was measured.

use std::cell::OnceCell;
use std::fmt;
use std::time::{Duration, Instant};

use multiproj_core::metrics::{
    estimate_eta, feasibility_error, fit_inverse_linearity, fit_loglog_slope, reference_projection,
    Abscissa, MetricField, ProbeRegion, RateFit, DEFAULT_PROJECTION_TOL,
};
use multiproj_core::polyproj::{
    project_activeset_oracle, project_hildreth_with, Polyhedron, QpSettings,
};
use multiproj_core::problems::{sample_batch, Problem};
use multiproj_core::solver::{feasibility_update, AlgorithmKind, Scheme};
use multiproj_core::{ConstraintFamily, ConvexSet, Halfspace, RngStream, Vector, DATA_STREAM};

use crate::config::{
    Algorithm, ExperimentConfig, InitialPoint, ScenarioConfig, ScheduleConfig, SphereConfig,
    SvmConfig, TwoSphereConfig,
};
use crate::error::{HarnessError, Result};
use crate::output::render_csv;
use crate::runner::{run_experiment, AggregateResult};

pub const CRITERIA: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const BOOTSTRAP_RESAMPLES: usize = 2000;
const BOOTSTRAP_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} [{:.1} s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn title(id: u8) -> Option<&'static str> {
    Some(match id {
        1 => "QP oracle equivalence",
        2 => "projection properties",
        3 => "expected progress lower bound",
        4 => "progress ordering",
        5 => "strongly convex feasibility rate",
        6 => "strongly convex optimality rate",
        7 => "ergodic objective gap rate",
        8 => "sphere ordering",
        9 => "two-sphere separation",
        10 => "SVM inverse-error linearity",
        11 => "determinism across worker counts",
        _ => return None,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Worker threads for the multi-trial experiments. Results do not
    /// depend on it.
    pub workers: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 2024,
            workers: None,
        }
    }
}

/// Runs criteria on demand, sharing experiment runs between criteria that
/// read the same traces.
pub struct Suite {
    options: SuiteOptions,
    rate_runs: OnceCell<Vec<(Algorithm, AggregateResult)>>,
}

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

impl Suite {
    pub fn new(options: SuiteOptions) -> Self {
        Suite {
            options,
            rate_runs: OnceCell::new(),
        }
    }

    pub fn run(&self, id: u8) -> Result<CriterionOutcome> {
        let title = title(id).ok_or(HarnessError::UnknownCriterion(id))?;
        let start = Instant::now();
        let verdict = match id {
            1 => self.qp_oracle_equivalence(),
            2 => self.projection_properties(),
            3 => self.progress_lower_bound(),
            4 => self.progress_ordering(),
            5 => self.feasibility_rate(),
            6 => self.optimality_rate(),
            7 => self.ergodic_rate(),
            8 => self.sphere_ordering(),
            9 => self.two_sphere_separation(),
            10 => self.svm_linearity(),
            _ => self.determinism(),
        };
        let verdict = verdict.unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        Ok(CriterionOutcome {
            id,
            title,
            passed: verdict.passed,
            detail: verdict.detail,
            elapsed: start.elapsed(),
        })
    }

    fn rng(&self, stream: u64) -> RngStream {
        RngStream::new(self.options.seed, stream)
    }

    #[allow(clippy::too_many_arguments)]
    fn experiment(
        &self,
        scenario: ScenarioConfig,
        algorithm: Algorithm,
        batch_size: usize,
        schedule: ScheduleConfig,
        iterations: u64,
        trials: u64,
        stride: u64,
        x0: InitialPoint,
    ) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            algorithm,
            batch_size,
            schedule,
            iterations,
            trials,
            base_seed: self.options.seed,
            metric_stride: stride,
            x0,
            output_path: None,
            workers: self.options.workers,
            resample_instance_per_trial: false,
            track_ergodic: false,
            sweep: None,
            eta_probes: crate::config::DEFAULT_ETA_PROBES,
        }
    }

    fn qp_oracle_equivalence(&self) -> Result<Verdict> {
        let mut rng = self.rng(1);
        let cases = 1000;
        let mut worst: f64 = 0.0;
        let mut failures = 0;
        for case in 0..cases {
            let dim = 1 + rng.below(5);
            let rows = 1 + rng.below(8);
            let (poly, y) = random_polyhedron(&mut rng, dim, rows, case % 5 == 0)?;
            let hildreth = project_hildreth_with(&y, &poly, QpSettings::default())?;
            let oracle = project_activeset_oracle(&y, &poly)?;
            let rel = hildreth.point.dist_sq(&oracle.point).sqrt() / (1.0 + y.norm());
            worst = worst.max(rel);
            if rel.is_nan() || rel > 1e-6 {
                failures += 1;
            }
        }
        Ok(Verdict::new(
            failures == 0,
            format!(
                "{cases} cases, {failures} mismatches, worst relative gap {worst:.2e} (limit 1e-6)"
            ),
        ))
    }

    fn projection_properties(&self) -> Result<Verdict> {
        let mut rng = self.rng(2);
        let cases = 10_000;
        let tol = 1e-9;
        let mut worst = [0.0f64; 4];
        for _ in 0..cases {
            let dim = 1 + rng.below(5);
            let anchor = normal_vec(&mut rng, dim);
            let set = random_set(&mut rng, dim, &anchor)?;
            let x = Vector::new(scaled_normal(&mut rng, dim, 3.0))?;
            let z = Vector::new(scaled_normal(&mut rng, dim, 3.0))?;
            let px = set.project(&x)?;
            let pz = set.project(&z)?;

            let ppx = set.project(&px)?;
            worst[0] = worst[0].max(ppx.dist_sq(&px).sqrt());

            let expansion = pz.dist_sq(&px).sqrt() - z.dist_sq(&x).sqrt();
            worst[1] = worst[1].max(expansion);

            let angle = (&x - &px).dot(&(&pz - &px));
            worst[2] = worst[2].max(angle);
        }
        for _ in 0..cases {
            let dim = 2 + rng.below(2);
            let anchor = normal_vec(&mut rng, dim);
            let count = 2 + rng.below(5);
            let sets = (0..count)
                .map(|_| random_set(&mut rng, dim, &anchor))
                .collect::<Result<Vec<_>>>()?;
            let family = ConstraintFamily::new(sets)?;
            let x = Vector::new(
                anchor
                    .iter()
                    .zip(scaled_normal(&mut rng, dim, 4.0))
                    .map(|(a, b)| a + b)
                    .collect(),
            )?;
            let px = reference_projection(&family, &x, DEFAULT_PROJECTION_TOL)?;
            let total = px.dist_sq(&x).sqrt();
            let single = family.max_set_distance(&x)?;
            worst[3] = worst[3].max(single - total);
        }
        let names = [
            "idempotence",
            "nonexpansiveness",
            "obtuse angle",
            "intersection dominance",
        ];
        let passed = worst.iter().all(|&w| w <= tol);
        let detail = names
            .iter()
            .zip(worst)
            .map(|(n, w)| format!("{n} {w:.1e}"))
            .collect::<Vec<_>>()
            .join(", ");
        Ok(Verdict::new(
            passed,
            format!("{cases} cases each, worst excess: {detail} (limit 1e-9)"),
        ))
    }

    fn two_sphere_problem(&self) -> Result<Problem> {
        let mut rng = self.rng(DATA_STREAM);
        let c = ScenarioConfig::TwoSphere(TwoSphereConfig::default());
        Ok(c.to_scenario().build(&mut rng)?)
    }

    fn progress_lower_bound(&self) -> Result<Verdict> {
        let problem = self.two_sphere_problem()?;
        let family = &problem.family;
        let m = family.len() as f64;
        let points: Vec<Vector> = [
            [0.0, 22.0],
            [3.0, 5.0],
            [-5.0, 0.0],
            [2.0, -15.0],
            [10.0, 10.0],
        ]
        .iter()
        .map(|p| Vector::from_slice(p))
        .collect::<multiproj_core::Result<_>>()?;

        let region = ProbeRegion::around(&problem);
        let mut eta = estimate_eta(
            family,
            &region,
            10 * crate::config::DEFAULT_ETA_PROBES,
            &mut self.rng(3),
        )?;
        let mut dist = Vec::new();
        for y in &points {
            let d2 = feasibility_error(family, y)?;
            if d2.is_nan() || d2 <= 0.0 {
                return Err(HarnessError::Pool(
                    "progress probe point is feasible".into(),
                ));
            }
            eta = eta.min(family.max_set_distance(y)?.powi(2) / d2);
            dist.push(d2);
        }

        let batches = 100_000;
        let mut rng = self.rng(4);
        let mut worst_margin = f64::INFINITY;
        let mut checks = 0;
        let mut failures = 0;
        for (y, &d2) in points.iter().zip(&dist) {
            for batch_size in [1usize, 5] {
                for scheme in Scheme::ALL {
                    if scheme == Scheme::Baseline && batch_size != 1 {
                        continue;
                    }
                    let kind = AlgorithmKind::new(scheme, batch_size)?;
                    let constant = match scheme {
                        Scheme::Baseline | Scheme::Averaging => eta / m,
                        Scheme::MaxSet | Scheme::PolyhedralSet => batch_size as f64 * eta / m,
                    };
                    let (mut s1, mut s2) = (0.0, 0.0);
                    for _ in 0..batches {
                        let batch = sample_batch(&problem, y, batch_size, &mut rng)?;
                        let (_, e) = feasibility_update(kind, y, &batch)?;
                        s1 += e;
                        s2 += e * e;
                    }
                    let n = batches as f64;
                    let mean = s1 / n;
                    let se = ((s2 / n - mean * mean).max(0.0) / n).sqrt();
                    let bound = constant * d2 - 3.0 * se;
                    worst_margin = worst_margin.min((mean - bound) / (constant * d2));
                    checks += 1;
                    if mean < bound {
                        failures += 1;
                    }
                }
            }
        }
        Ok(Verdict::new(
            failures == 0,
            format!(
                "eta estimate {eta:.3e}, {checks} checks of {batches} batches, {failures} below bound, \
                 smallest relative margin {worst_margin:.3}"
            ),
        ))
    }

    fn progress_ordering(&self) -> Result<Verdict> {
        let two = self.two_sphere_problem()?;
        let sphere = ScenarioConfig::Sphere(SphereConfig::default())
            .to_scenario()
            .build(&mut self.rng(DATA_STREAM))?;
        let mut rng = self.rng(5);
        let cases = 10_000;
        let tol = 1e-9;
        let mut worst = [0.0f64; 2];
        let mut failures = 0;
        for case in 0..cases {
            let problem = if case % 2 == 0 { &two } else { &sphere };
            let region = ProbeRegion::around(problem);
            let y = Vector::new(
                region
                    .center
                    .as_slice()
                    .iter()
                    .map(|c| c + rng.uniform_in(-region.half_width, region.half_width))
                    .collect(),
            )?;
            let batch_size = 2 + rng.below(9);
            let batch = sample_batch(problem, &y, batch_size, &mut rng)?;
            let e = |scheme| -> Result<f64> {
                Ok(feasibility_update(AlgorithmKind::new(scheme, batch_size)?, &y, &batch)?.1)
            };
            let (avg, max, poly) = (
                e(Scheme::Averaging)?,
                e(Scheme::MaxSet)?,
                e(Scheme::PolyhedralSet)?,
            );
            worst[0] = worst[0].max(max - poly);
            worst[1] = worst[1].max(avg - max);
            if max - poly > tol || avg - max > tol {
                failures += 1;
            }
        }
        Ok(Verdict::new(
            failures == 0,
            format!(
                "{cases} pairs, {failures} violations; worst max-set excess over polyhedral {:.1e}, \
                 worst averaging excess over max-set {:.1e} (limit 1e-9)",
                worst[0], worst[1]
            ),
        ))
    }

    fn rate_runs(&self) -> Result<&Vec<(Algorithm, AggregateResult)>> {
        if let Some(runs) = self.rate_runs.get() {
            return Ok(runs);
        }
        let scenario = ScenarioConfig::Sphere(SphereConfig {
            m: 20,
            radius: 10.0,
            ..SphereConfig::default()
        });
        let mut runs = Vec::new();
        for algorithm in [
            Algorithm::Averaging,
            Algorithm::MaxSet,
            Algorithm::PolyhedralSet,
        ] {
            let config = self.experiment(
                scenario.clone(),
                algorithm,
                5,
                ScheduleConfig::StronglyConvex { sigma: None },
                100_000,
                50,
                1000,
                InitialPoint::Planted,
            );
            runs.push((algorithm, run_experiment(&config)?));
        }
        Ok(self.rate_runs.get_or_init(|| runs))
    }

    fn slope_check(
        &self,
        field: MetricField,
        range: (f64, f64),
        min_r2: Option<f64>,
        runs: &[(Algorithm, AggregateResult)],
        fit_range: (u64, u64),
    ) -> Result<Verdict> {
        let mut passed = true;
        let mut parts = Vec::new();
        for (algorithm, result) in runs {
            let fit = fit_loglog_slope(&result.mean_records(), field, fit_range)?;
            let ok = fit.slope >= range.0
                && fit.slope <= range.1
                && min_r2.is_none_or(|r| fit.r_squared >= r);
            passed &= ok;
            parts.push(format!(
                "{} slope {:.3} r2 {:.3}",
                algorithm.name(),
                fit.slope,
                fit.r_squared
            ));
        }
        let r2 = min_r2.map_or(String::new(), |r| format!(", r2 >= {r}"));
        Ok(Verdict::new(
            passed,
            format!("{} (need [{}, {}]{r2})", parts.join("; "), range.0, range.1),
        ))
    }

    fn feasibility_rate(&self) -> Result<Verdict> {
        let runs = self.rate_runs()?;
        self.slope_check(
            MetricField::Feasibility,
            (-2.3, -1.7),
            Some(0.9),
            runs,
            (1000, 100_000),
        )
    }

    fn optimality_rate(&self) -> Result<Verdict> {
        let runs = self.rate_runs()?;
        self.slope_check(
            MetricField::Optimality,
            (-1.25, -0.8),
            Some(0.9),
            runs,
            (1000, 100_000),
        )
    }

    fn ergodic_rate(&self) -> Result<Verdict> {
        let mut runs = Vec::new();
        for algorithm in [
            Algorithm::Averaging,
            Algorithm::MaxSet,
            Algorithm::PolyhedralSet,
        ] {
            let mut config = self.experiment(
                ScenarioConfig::Sphere(SphereConfig::default()),
                algorithm,
                5,
                ScheduleConfig::Polynomial {
                    alpha0: 0.3,
                    exponent: 0.5,
                },
                10_000,
                50,
                100,
                InitialPoint::Planted,
            );
            config.track_ergodic = true;
            runs.push((algorithm, run_experiment(&config)?));
        }
        self.slope_check(
            MetricField::ErgodicGap,
            (-0.7, -0.35),
            None,
            &runs,
            (100, 10_000),
        )
    }

    fn ordering_runs(
        &self,
        scenario: ScenarioConfig,
        algorithms: &[Algorithm],
    ) -> Result<Vec<AggregateResult>> {
        algorithms
            .iter()
            .map(|&algorithm| {
                let config = self.experiment(
                    scenario.clone(),
                    algorithm,
                    5,
                    ScheduleConfig::OffsetInverse { offset: 10.0 },
                    2000,
                    100,
                    100,
                    InitialPoint::Planted,
                );
                run_experiment(&config)
            })
            .collect()
    }

    fn sphere_ordering(&self) -> Result<Verdict> {
        let runs = self.ordering_runs(
            ScenarioConfig::Sphere(SphereConfig::default()),
            &Algorithm::ALL,
        )?;
        let finals: Vec<Vec<f64>> = runs.iter().map(|r| r.final_feasibility()).collect();
        let means: Vec<f64> = finals.iter().map(|f| mean(f)).collect();
        let [base, avg, max, poly] = [means[0], means[1], means[2], means[3]];
        let groups: Vec<&[f64]> = finals.iter().map(|f| f.as_slice()).collect();
        let confidence = bootstrap_fraction(&groups, &mut self.rng(8), |m| {
            m[2] < m[1] && m[3] < m[1] && m[2] < m[0] && m[3] < m[0]
        });
        let ratio = max.max(poly) / max.min(poly);
        Ok(Verdict::new(
            confidence >= BOOTSTRAP_CONFIDENCE && ratio <= 2.0,
            format!(
                "final feasibility error baseline {base:.3e}, averaging {avg:.3e}, max-set {max:.3e}, \
                 polyhedral {poly:.3e}; ordering holds in {:.1}% of resamples (need 95%); \
                 max-set/polyhedral ratio {ratio:.3} (need <= 2)",
                100.0 * confidence
            ),
        ))
    }

    fn two_sphere_separation(&self) -> Result<Verdict> {
        let runs = self.ordering_runs(
            ScenarioConfig::TwoSphere(TwoSphereConfig::default()),
            &[Algorithm::MaxSet, Algorithm::PolyhedralSet],
        )?;
        let finals: Vec<Vec<f64>> = runs.iter().map(|r| r.final_feasibility()).collect();
        let groups: Vec<&[f64]> = finals.iter().map(|f| f.as_slice()).collect();
        let confidence = bootstrap_fraction(&groups, &mut self.rng(9), |m| m[1] < m[0]);
        let (max, poly) = (mean(&finals[0]), mean(&finals[1]));
        Ok(Verdict::new(
            poly < max && confidence >= BOOTSTRAP_CONFIDENCE,
            format!(
                "final feasibility error max-set {max:.3e}, polyhedral {poly:.3e}; \
                 polyhedral lower in {:.1}% of resamples (need 95%)",
                100.0 * confidence
            ),
        ))
    }

    fn svm_linearity(&self) -> Result<Verdict> {
        let algorithms = [
            Algorithm::Averaging,
            Algorithm::MaxSet,
            Algorithm::PolyhedralSet,
        ];
        let mut passed = true;
        let mut parts = Vec::new();
        for batch_size in [10usize, 30] {
            let mut slopes = Vec::new();
            for algorithm in algorithms {
                let config = self.experiment(
                    ScenarioConfig::Svm(SvmConfig::default()),
                    algorithm,
                    batch_size,
                    ScheduleConfig::OffsetInverse { offset: 10.0 },
                    2000,
                    100,
                    100,
                    InitialPoint::Zero,
                );
                let records = run_experiment(&config)?.mean_records();
                let by_k =
                    fit_inverse_linearity(&records, MetricField::Feasibility, Abscissa::Iteration)?;
                let by_samples = fit_inverse_linearity(
                    &records,
                    MetricField::Feasibility,
                    Abscissa::SamplesUsed,
                )?;
                let decay = fit_loglog_slope(&records, MetricField::Feasibility, (200, 2000))?;
                passed &= by_k.r_squared >= 0.95 && by_samples.r_squared >= 0.95;
                parts.push(format!(
                    "M={batch_size} {} r2 {:.3}/{:.3} slope {:.3e} (log-log decay {:.2})",
                    algorithm.name(),
                    by_k.r_squared,
                    by_samples.r_squared,
                    by_samples.slope,
                    decay.slope
                ));
                slopes.push(by_samples);
            }
            passed &= ordered_slopes(&slopes);
        }
        Ok(Verdict::new(
            passed,
            format!(
                "{} (need r2 >= 0.95 by iteration and by samples; polyhedral >= max-set >= averaging slope)",
                parts.join("; ")
            ),
        ))
    }

    fn determinism(&self) -> Result<Verdict> {
        let mut config = self.experiment(
            ScenarioConfig::TwoSphere(TwoSphereConfig::default()),
            Algorithm::PolyhedralSet,
            5,
            ScheduleConfig::OffsetInverse { offset: 10.0 },
            2000,
            100,
            100,
            InitialPoint::Planted,
        );
        let mut outputs = Vec::new();
        for workers in [1usize, 4, 16] {
            config.workers = Some(workers);
            outputs.push(render_csv(&run_experiment(&config)?));
        }
        let identical = outputs.windows(2).all(|w| w[0] == w[1]);
        Ok(Verdict::new(
            identical,
            format!(
                "two-sphere polyhedral run, 1/4/16 workers: CSVs {} ({} bytes)",
                if identical { "identical" } else { "differ" },
                outputs[0].len()
            ),
        ))
    }
}

/// Slopes at one batch size, in averaging, max-set, polyhedral order.
fn ordered_slopes(fits: &[RateFit]) -> bool {
    fits.len() == 3 && fits[2].slope >= fits[1].slope && fits[1].slope >= fits[0].slope
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Fraction of bootstrap resamples on which `holds` accepts the vector of
/// group means. Groups are resampled independently.
pub fn bootstrap_fraction(
    groups: &[&[f64]],
    rng: &mut RngStream,
    holds: impl Fn(&[f64]) -> bool,
) -> f64 {
    let mut hits = 0;
    let mut means = vec![0.0; groups.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for (g, m) in groups.iter().zip(means.iter_mut()) {
            let n = g.len();
            *m = (0..n).map(|_| g[rng.below(n)]).sum::<f64>() / n as f64;
        }
        if holds(&means) {
            hits += 1;
        }
    }
    hits as f64 / BOOTSTRAP_RESAMPLES as f64
}

fn normal_vec(rng: &mut RngStream, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.standard_normal()).collect()
}

fn scaled_normal(rng: &mut RngStream, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.standard_normal()).collect()
}

/// A halfspace or ball containing `anchor`.
fn random_set(rng: &mut RngStream, dim: usize, anchor: &[f64]) -> Result<ConvexSet> {
    if rng.uniform() < 0.5 {
        let normal = normal_vec(rng, dim);
        let offset = normal.iter().zip(anchor).map(|(a, z)| a * z).sum::<f64>() + rng.uniform();
        Ok(ConvexSet::halfspace(&normal, offset)?)
    } else {
        let center: Vec<f64> = anchor.iter().map(|z| z + rng.standard_normal()).collect();
        let reach = center
            .iter()
            .zip(anchor)
            .map(|(c, z)| (c - z) * (c - z))
            .sum::<f64>()
            .sqrt();
        Ok(ConvexSet::ball(&center, reach + rng.uniform_in(0.1, 1.0))?)
    }
}

/// Nonempty polyhedron through a random interior point, and a query point.
/// Degenerate instances put every row through the same point and repeat one
/// row.
fn random_polyhedron(
    rng: &mut RngStream,
    dim: usize,
    rows: usize,
    degenerate: bool,
) -> Result<(Polyhedron, Vector)> {
    let anchor = normal_vec(rng, dim);
    let mut halfspaces = Vec::with_capacity(rows);
    for i in 0..rows {
        let normal = if degenerate && i > 0 && i == rows - 1 {
            halfspaces
                .first()
                .map(|h: &Halfspace| h.normal().as_slice().to_vec())
                .unwrap_or_else(|| normal_vec(rng, dim))
        } else {
            normal_vec(rng, dim)
        };
        let slack = if degenerate { 0.0 } else { rng.uniform() };
        let offset = normal.iter().zip(&anchor).map(|(a, z)| a * z).sum::<f64>() + slack;
        halfspaces.push(Halfspace::new(Vector::new(normal)?, offset)?);
    }
    let y = Vector::new(
        anchor
            .iter()
            .zip(scaled_normal(rng, dim, 3.0))
            .map(|(a, b)| a + b)
            .collect(),
    )?;
    Ok((Polyhedron::new(dim, halfspaces)?, y))
}
