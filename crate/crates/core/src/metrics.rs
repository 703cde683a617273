//! Ground-truth geometry and error metrics.
//!
//! [`reference_projection`] computes the projection onto the whole
//! intersection with Dykstra's method; everything else here is built on it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{ConstraintFamily, ConvexSet, Vector};
use crate::linalg;
use crate::polyproj::{polish_active_set, Polyhedron};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::solver::{SolverState, TraceRecord};

/// Default tolerance for [`reference_projection`].
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;
/// Set-visit budget for [`reference_projection`].
pub const PROJECTION_VISIT_BUDGET: usize = 1_000_000;
/// Default distance threshold for [`violation_fraction`].
pub const DEFAULT_VIOLATION_TOL: f64 = 1e-9;

fn is_polish_cycle(cycle: usize) -> bool {
    cycle.is_power_of_two() || cycle.is_multiple_of(64)
}

/// Euclidean projection of `x` onto the intersection of `family`.
///
/// Dykstra's method cycles over the sets, keeping one correction per set
/// (a scalar multiple of the normal for halfspaces, a full vector for balls).
/// It stops once a cycle moves the iterate by at most `tol · (1 + ‖x‖)` and
/// no set is violated by more than that. On all-halfspace families the
/// current support also seeds an active-set solve every few cycles, which is
/// accepted when it satisfies the KKT conditions.
pub fn reference_projection(family: &ConstraintFamily, x: &Vector, tol: f64) -> Result<Vector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    x.check_dim(family.dim())?;
    if !x.is_finite() {
        return Err(Error::NonFinite("point"));
    }
    let sets = family.sets();
    let xs = x.as_slice();
    if sets.iter().all(|s| s.distance_sq_raw(xs) == 0.0) {
        return Ok(x.clone());
    }
    let n = family.dim();
    let thr = tol * (1.0 + x.norm());
    let stacked = Polyhedron::from_family(family).ok();
    let norms: Vec<f64> = match &stacked {
        Some(p) => p.rows().iter().map(|h| libm::sqrt(h.normal_sq())).collect(),
        None => Vec::new(),
    };

    let mut cur = xs.to_vec();
    let mut scalar = vec![0.0; sets.len()];
    let mut vector: Vec<Option<Vec<f64>>> = sets
        .iter()
        .map(|s| matches!(s, ConvexSet::Ball(_)).then(|| vec![0.0; n]))
        .collect();
    let mut z = vec![0.0; n];
    let mut start = vec![0.0; n];
    let mut visits = 0usize;
    let mut cycle = 0usize;
    while visits + sets.len() <= PROJECTION_VISIT_BUDGET {
        cycle += 1;
        start.copy_from_slice(&cur);
        for (i, set) in sets.iter().enumerate() {
            match set {
                ConvexSet::Halfspace(h) => {
                    let r = h.residual(&cur);
                    let delta = (r / h.normal_sq()).max(-scalar[i]);
                    if delta != 0.0 {
                        scalar[i] += delta;
                        linalg::axpy(-delta, h.normal().as_slice(), &mut cur);
                    }
                }
                ConvexSet::Ball(_) => {
                    let p = vector[i].as_mut().expect("ball correction");
                    for ((zi, ci), pi) in z.iter_mut().zip(&cur).zip(p.iter()) {
                        *zi = ci + pi;
                    }
                    set.project_into(&z, &mut cur);
                    for ((pi, zi), ci) in p.iter_mut().zip(&z).zip(&cur) {
                        *pi = zi - ci;
                    }
                }
            }
        }
        visits += sets.len();
        let moved = libm::sqrt(linalg::dist_sq(&start, &cur));
        if moved <= thr && dykstra_kkt_residual(sets, &cur, &scalar, &vector) <= thr {
            return Ok(Vector::from_raw(cur));
        }
        if let Some(poly) = &stacked {
            if is_polish_cycle(cycle) {
                if let Some((px, _)) = polish_active_set(xs, poly.rows(), &norms, &scalar, thr) {
                    return Ok(Vector::from_raw(px));
                }
            }
        }
    }
    Err(Error::ProjectionBudgetExhausted(visits))
}

/// Largest violation or complementarity defect of a Dykstra iterate:
/// per set, the distance outside it, or `min(‖correction‖, distance to the
/// boundary)` when inside.
fn dykstra_kkt_residual(
    sets: &[ConvexSet],
    x: &[f64],
    scalar: &[f64],
    vector: &[Option<Vec<f64>>],
) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, set) in sets.iter().enumerate() {
        let outside = libm::sqrt(set.distance_sq_raw(x));
        if outside > 0.0 {
            worst = worst.max(outside);
            continue;
        }
        let (correction, depth) = match set {
            ConvexSet::Halfspace(h) => {
                let n = libm::sqrt(h.normal_sq());
                (scalar[i] * n, -h.residual(x) / n)
            }
            ConvexSet::Ball(b) => {
                let p = vector[i].as_deref().unwrap_or(&[]);
                let depth = b.radius() - libm::sqrt(linalg::dist_sq(x, b.center().as_slice()));
                (linalg::norm(p), depth)
            }
        };
        worst = worst.max(correction.min(depth));
    }
    worst
}

/// `d²(x, X)`.
pub fn feasibility_error(family: &ConstraintFamily, x: &Vector) -> Result<f64> {
    Ok(reference_projection(family, x, DEFAULT_PROJECTION_TOL)?.dist_sq(x))
}

/// `‖x - x*‖²`.
pub fn optimality_error(x: &Vector, optimum: &Vector) -> Result<f64> {
    optimum.check_dim(x.len())?;
    Ok(x.dist_sq(optimum))
}

/// Fraction of sets at distance greater than `tol` from `x`.
pub fn violation_fraction(family: &ConstraintFamily, x: &Vector, tol: f64) -> Result<f64> {
    x.check_dim(family.dim())?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter("tolerance must be nonnegative"));
    }
    let tol_sq = tol * tol;
    let violated = family
        .sets()
        .iter()
        .filter(|s| s.distance_sq_raw(x.as_slice()) > tol_sq)
        .count();
    Ok(violated as f64 / family.len() as f64)
}

fn require_optimum(problem: &Problem) -> Result<&Vector> {
    problem
        .reference_optimum
        .as_ref()
        .ok_or(Error::InvalidParameter("problem has no reference optimum"))
}

/// `F(x) - F(x*)` from the closed-form objective.
pub fn objective_gap(problem: &Problem, x: &Vector) -> Result<f64> {
    x.check_dim(problem.dim())?;
    let optimum = require_optimum(problem)?;
    Ok(problem.objective.value(x) - problem.objective.value(optimum))
}

/// `F(x̃_k) - F(x*)` for the ergodic mean of projected iterates.
pub fn ergodic_gap(problem: &Problem, state: &SolverState) -> Result<f64> {
    let mean = state
        .ergodic_mean()
        .ok_or(Error::InvalidParameter("ergodic mean is not tracked"))?;
    objective_gap(problem, &mean)
}

/// Axis-aligned box from which [`estimate_eta`] draws probes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRegion {
    pub center: Vector,
    pub half_width: f64,
}

impl ProbeRegion {
    /// Box of half-width `3 · region_scale` around the problem's witness.
    pub fn around(problem: &Problem) -> Self {
        ProbeRegion {
            center: problem.witness.clone(),
            half_width: 3.0 * problem.region_scale,
        }
    }
}

/// Attempts per requested probe before giving up on finding infeasible points.
const PROBE_ATTEMPTS: usize = 100;

/// Empirical linear-regularity constant:
/// `min_z max_i d²(z, X_i) / d²(z, X)` over infeasible probes `z`,
/// clamped to `(0, 1]`.
pub fn estimate_eta(
    family: &ConstraintFamily,
    region: &ProbeRegion,
    probe_count: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if probe_count < 100 {
        return Err(Error::InvalidParameter("probe_count must be at least 100"));
    }
    if !(region.half_width > 0.0) {
        return Err(Error::InvalidParameter("probe half-width must be positive"));
    }
    region.center.check_dim(family.dim())?;
    let mut eta: f64 = 1.0;
    let mut accepted = 0;
    for _ in 0..probe_count * PROBE_ATTEMPTS {
        let z: Vec<f64> = region
            .center
            .as_slice()
            .iter()
            .map(|c| c + rng.uniform_in(-region.half_width, region.half_width))
            .collect();
        let worst = family
            .sets()
            .iter()
            .map(|s| s.distance_sq_raw(&z))
            .fold(0.0, f64::max);
        if worst <= 0.0 {
            continue;
        }
        let z = Vector::from_raw(z);
        let total = feasibility_error(family, &z)?;
        if total > 0.0 {
            eta = eta.min(worst / total);
        }
        accepted += 1;
        if accepted == probe_count {
            break;
        }
    }
    if accepted == 0 {
        return Err(Error::NoInfeasibleProbe(probe_count));
    }
    Ok(eta.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Metric summary of one trace record.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub k: u64,
    pub samples_used: u64,
    /// `‖x_k - x*‖²`.
    pub optimality_error: f64,
    /// `d²(x_k, X)`.
    pub feasibility_error: f64,
    pub violation_fraction: f64,
    pub ergodic_objective_gap: Option<f64>,
}

/// Evaluates every metric at a trace record.
pub fn evaluate(problem: &Problem, record: &TraceRecord) -> Result<MetricRecord> {
    let optimum = require_optimum(problem)?;
    Ok(MetricRecord {
        k: record.k,
        samples_used: record.samples_used,
        optimality_error: optimality_error(&record.x, optimum)?,
        feasibility_error: feasibility_error(&problem.family, &record.x)?,
        violation_fraction: violation_fraction(&problem.family, &record.x, DEFAULT_VIOLATION_TOL)?,
        ergodic_objective_gap: match &record.ergodic_mean {
            Some(mean) => Some(objective_gap(problem, mean)?),
            None => None,
        },
    })
}

/// Which column of a [`MetricRecord`] to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricField {
    Optimality,
    Feasibility,
    Violation,
    ErgodicGap,
}

impl MetricField {
    pub fn get(self, record: &MetricRecord) -> Option<f64> {
        match self {
            MetricField::Optimality => Some(record.optimality_error),
            MetricField::Feasibility => Some(record.feasibility_error),
            MetricField::Violation => Some(record.violation_fraction),
            MetricField::ErgodicGap => record.ergodic_objective_gap,
        }
    }
}

/// Abscissa for [`fit_inverse_linearity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    Iteration,
    SamplesUsed,
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Smallest and largest `k` among the fitted points.
    pub k_range: (u64, u64),
    pub points: usize,
}

/// Minimum number of points in a fit.
pub const MIN_FIT_POINTS: usize = 10;

fn ols(points: &[(f64, f64)], k_range: (u64, u64)) -> Result<RateFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        k_range,
        points: points.len(),
    })
}

fn fitted_k_range(ks: impl Iterator<Item = u64> + Clone) -> (u64, u64) {
    (ks.clone().min().unwrap_or(0), ks.max().unwrap_or(0))
}

/// OLS of `log(value)` on `log(k)` over records with `k` in `k_range`
/// (inclusive). Nonpositive values and `k = 0` are dropped.
pub fn fit_loglog_slope(
    records: &[MetricRecord],
    field: MetricField,
    k_range: (u64, u64),
) -> Result<RateFit> {
    let kept: Vec<(u64, f64)> = records
        .iter()
        .filter(|r| r.k >= k_range.0 && r.k <= k_range.1 && r.k > 0)
        .filter_map(|r| {
            field
                .get(r)
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(|v| (r.k, v))
        })
        .collect();
    let points: Vec<(f64, f64)> = kept
        .iter()
        .map(|&(k, v)| (libm::log(k as f64), libm::log(v)))
        .collect();
    ols(&points, fitted_k_range(kept.iter().map(|p| p.0)))
}

/// OLS of `1/value` on the iteration count or the number of samples used.
/// Nonpositive values are dropped.
pub fn fit_inverse_linearity(
    records: &[MetricRecord],
    field: MetricField,
    against: Abscissa,
) -> Result<RateFit> {
    let kept: Vec<(&MetricRecord, f64)> = records
        .iter()
        .filter_map(|r| {
            field
                .get(r)
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(|v| (r, v))
        })
        .collect();
    let points: Vec<(f64, f64)> = kept
        .iter()
        .map(|&(r, v)| {
            let x = match against {
                Abscissa::Iteration => r.k as f64,
                Abscissa::SamplesUsed => r.samples_used as f64,
            };
            (x, 1.0 / v)
        })
        .collect();
    ols(&points, fitted_k_range(kept.iter().map(|p| p.0.k)))
}
