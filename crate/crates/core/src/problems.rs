//! The sampling oracle: stochastic subgradients of the objective and
//! uniformly sampled constraint projections, plus the benchmark scenarios.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ConstraintFamily, ConvexSet, Vector};
use crate::linalg;
use crate::metrics::reference_projection;
use crate::polyproj::{
    project_activeset_oracle, project_hildreth, Polyhedron, ORACLE_MAX_DIM, ORACLE_MAX_ROWS,
};
use crate::rng::RngStream;

/// Tolerance used when computing reference optima.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Objective `F` together with its sampled subgradient `g(x, v)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `E[(Y - X'β)²]` with `X ~ N(0, I)`, `Y = X'β* + η`, `η ~ N(0, noise_variance)`.
    /// Sample gradient `-2(Y - X'β)X`.
    LeastSquares { target: Vector, noise_variance: f64 },
    /// `weight · ‖x - center‖²` with exact gradients.
    Quadratic { center: Vector, weight: f64 },
}

impl Objective {
    pub fn dim(&self) -> usize {
        match self {
            Objective::LeastSquares { target, .. } => target.len(),
            Objective::Quadratic { center, .. } => center.len(),
        }
    }

    /// Closed-form `F(x)`.
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Objective::LeastSquares {
                target,
                noise_variance,
            } => x.dist_sq(target) + noise_variance,
            Objective::Quadratic { center, weight } => weight * x.dist_sq(center),
        }
    }

    /// `∇F(x) = E[g(x, v)]`.
    pub fn gradient(&self, x: &Vector) -> Vector {
        match self {
            Objective::LeastSquares { target, .. } => 2.0 * &(x - target),
            Objective::Quadratic { center, weight } => (2.0 * weight) * &(x - center),
        }
    }

    /// `E‖g(x, v)‖²`.
    pub fn second_moment(&self, x: &Vector) -> f64 {
        match self {
            Objective::LeastSquares {
                target,
                noise_variance,
            } => {
                let n = x.len() as f64;
                4.0 * ((n + 2.0) * x.dist_sq(target) + n * noise_variance)
            }
            Objective::Quadratic { .. } => self.gradient(x).norm_sq(),
        }
    }

    /// The unconstrained minimizer.
    pub fn minimizer(&self) -> &Vector {
        match self {
            Objective::LeastSquares { target, .. } => target,
            Objective::Quadratic { center, .. } => center,
        }
    }

    /// Largest σ with `F(x) >= F(y) + ∇F(y)'(x-y) + (σ²/2)‖x-y‖²` and
    /// `(x-y)'(∇F(x) - ∇F(y)) >= σ‖x-y‖²` for all `x, y`.
    pub fn strong_convexity(&self) -> Option<f64> {
        let weight = match self {
            Objective::LeastSquares { .. } => 1.0,
            Objective::Quadratic { weight, .. } => *weight,
        };
        (weight > 0.0).then(|| libm::sqrt(2.0 * weight).min(2.0 * weight))
    }

    pub fn sample_subgradient(&self, x: &Vector, rng: &mut RngStream) -> Result<Vector> {
        x.check_dim(self.dim())?;
        let mut out = vec![0.0; x.len()];
        self.sample_into(x.as_slice(), rng, &mut out);
        Ok(Vector::from_raw(out))
    }

    pub(crate) fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        match self {
            Objective::LeastSquares {
                target,
                noise_variance,
            } => {
                for o in out.iter_mut() {
                    *o = rng.standard_normal();
                }
                let noise = libm::sqrt(*noise_variance) * rng.standard_normal();
                let residual: f64 = out
                    .iter()
                    .zip(target.as_slice().iter().zip(x))
                    .map(|(xi, (t, b))| xi * (t - b))
                    .sum::<f64>()
                    + noise;
                for o in out.iter_mut() {
                    *o *= -2.0 * residual;
                }
            }
            Objective::Quadratic { center, weight } => {
                for ((o, xi), ci) in out.iter_mut().zip(x).zip(center.as_slice()) {
                    *o = 2.0 * weight * (xi - ci);
                }
            }
        }
    }
}

/// A constrained stochastic problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub family: ConstraintFamily,
    pub objective: Objective,
    pub strong_convexity: Option<f64>,
    /// `x* = argmin_{x ∈ X} F(x)`, when computed.
    pub reference_optimum: Option<Vector>,
    /// `B` such that `E‖g(x, v)‖² <= B²` on `‖x‖ <= bound_radius`.
    pub gradient_bound: f64,
    pub bound_radius: f64,
    /// A point satisfying every constraint with positive slack.
    pub witness: Vector,
    /// Characteristic size of the feasible region.
    pub region_scale: f64,
    /// Scenario-specific planted point (least-squares target, SVM separator).
    pub planted: Option<Vector>,
}

impl Problem {
    /// Builds a problem without a reference optimum; `gradient_bound` is
    /// evaluated on the ball of radius `‖witness‖ + 4·region_scale + ‖minimizer‖`.
    pub fn new(
        family: ConstraintFamily,
        objective: Objective,
        witness: Vector,
        region_scale: f64,
    ) -> Result<Self> {
        let n = family.dim();
        objective.minimizer().check_dim(n)?;
        witness.check_dim(n)?;
        if !(region_scale > 0.0) || !region_scale.is_finite() {
            return Err(Error::InvalidParameter("region scale must be positive"));
        }
        let bound_radius = witness.norm() + 4.0 * region_scale + objective.minimizer().norm();
        let gradient_bound = libm::sqrt(gradient_bound_sq(&objective, bound_radius));
        Ok(Problem {
            strong_convexity: objective.strong_convexity(),
            family,
            objective,
            reference_optimum: None,
            gradient_bound,
            bound_radius,
            witness,
            region_scale,
            planted: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Number of constraint sets `m`.
    pub fn num_constraints(&self) -> usize {
        self.family.len()
    }

    /// Computes and stores [`reference_optimum`].
    pub fn with_reference_optimum(mut self) -> Result<Self> {
        self.reference_optimum = Some(reference_optimum(&self)?);
        Ok(self)
    }
}

/// `sup_{‖x‖ <= radius} E‖g(x, v)‖²`.
fn gradient_bound_sq(objective: &Objective, radius: f64) -> f64 {
    let reach = radius + objective.minimizer().norm();
    match objective {
        Objective::LeastSquares {
            noise_variance,
            target,
        } => {
            let n = target.len() as f64;
            4.0 * ((n + 2.0) * reach * reach + n * noise_variance)
        }
        Objective::Quadratic { weight, .. } => {
            let g = 2.0 * weight * reach;
            g * g
        }
    }
}

/// `argmin_{x ∈ X} F(x)` for the objectives above: the Euclidean projection
/// of the unconstrained minimizer onto the feasible region.
///
/// Least-squares problems use [`reference_projection`]; quadratic problems
/// on halfspace families use Hildreth on the stacked polyhedron, checked
/// against the exhaustive oracle when the instance is small enough.
pub fn reference_optimum(problem: &Problem) -> Result<Vector> {
    let target = problem.objective.minimizer();
    match (&problem.objective, problem.family.halfspaces()) {
        (Objective::Quadratic { .. }, Some(_)) => {
            let poly = Polyhedron::from_family(&problem.family)?;
            let sol = project_hildreth(target, &poly, REFERENCE_TOL, 100_000)?;
            if poly.len() <= ORACLE_MAX_ROWS && poly.dim() <= ORACLE_MAX_DIM {
                let oracle = project_activeset_oracle(target, &poly)?;
                let gap = libm::sqrt(oracle.point.dist_sq(&sol.point));
                if gap > 1e-8 * (1.0 + target.norm()) {
                    return Err(Error::OracleMismatch(gap));
                }
            }
            Ok(sol.point)
        }
        _ => reference_projection(&problem.family, target, REFERENCE_TOL),
    }
}

/// Output of one constraint query to the sampling oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    /// Distinct set indices in draw order.
    pub indices: Vec<usize>,
    /// `projections[i]` is the projection of the query point onto set `indices[i]`.
    pub projections: Vec<Vector>,
}

/// `count` distinct indices from `0..m`, uniformly without replacement
/// (partial Fisher–Yates).
pub fn sample_indices(m: usize, count: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let mut sampler = IndexSampler::new(m);
    let mut out = Vec::with_capacity(count);
    sampler.draw(count, rng, &mut out)?;
    Ok(out)
}

/// Reusable scratch for [`sample_indices`]. Produces exactly the same draws
/// as the free function for the same generator state.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    scratch: Vec<usize>,
    swaps: Vec<usize>,
}

impl IndexSampler {
    pub fn new(m: usize) -> Self {
        IndexSampler {
            scratch: (0..m).collect(),
            swaps: Vec::new(),
        }
    }

    pub fn draw(&mut self, count: usize, rng: &mut RngStream, out: &mut Vec<usize>) -> Result<()> {
        let m = self.scratch.len();
        if count == 0 || count > m {
            return Err(Error::SampleSizeExceeded {
                requested: count,
                available: m,
            });
        }
        out.clear();
        self.swaps.clear();
        for i in 0..count {
            let j = i + rng.below(m - i);
            self.scratch.swap(i, j);
            self.swaps.push(j);
            out.push(self.scratch[i]);
        }
        // restore the identity permutation
        for (i, &j) in self.swaps.iter().enumerate().rev() {
            self.scratch.swap(i, j);
        }
        Ok(())
    }
}

/// Samples `count` sets uniformly without replacement and projects `y` onto each.
pub fn sample_batch(
    problem: &Problem,
    y: &Vector,
    count: usize,
    rng: &mut RngStream,
) -> Result<SampleBatch> {
    y.check_dim(problem.dim())?;
    let indices = sample_indices(problem.num_constraints(), count, rng)?;
    let projections = indices
        .iter()
        .map(|&i| problem.family.sets()[i].project(y))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        indices,
        projections,
    })
}

/// Cutting planes `u_i'x <= r` of a circle, with jittered angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereParams {
    pub m: usize,
    pub radius: f64,
    pub noise_variance: f64,
    /// Distance of the least-squares target from the origin, in radii.
    pub target_distance: f64,
}

impl Default for SphereParams {
    fn default() -> Self {
        SphereParams {
            m: 300,
            radius: 1.0,
            noise_variance: 10.0,
            target_distance: 2.0,
        }
    }
}

/// Tangent cutting planes of two overlapping circles.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSphereParams {
    pub m: usize,
    pub radius: f64,
    /// Centers sit at `(±center_offset, 0)`.
    pub center_offset: f64,
    pub noise_variance: f64,
}

impl Default for TwoSphereParams {
    fn default() -> Self {
        TwoSphereParams {
            m: 300,
            radius: 61.0,
            center_offset: 60.0,
            noise_variance: 10.0,
        }
    }
}

/// Separable hard-margin SVM on a two-component Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub d: usize,
    pub m: usize,
    /// Extra margin of the planted separator: `min_i y_i x_i'w = 1 + margin`.
    pub margin: f64,
    /// Component means are `±separation · w*` for a unit direction `w*`.
    pub separation: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            d: 100,
            m: 200,
            margin: 0.1,
            separation: 2.0,
        }
    }
}

/// Fraction of the angular spacing used as jitter amplitude.
const ANGLE_JITTER: f64 = 0.25;

fn jittered_angles(count: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..count)
        .map(|i| 2.0 * PI * (i as f64 + rng.uniform_in(-ANGLE_JITTER, ANGLE_JITTER)) / count as f64)
        .collect()
}

fn unit(theta: f64) -> [f64; 2] {
    [libm::cos(theta), libm::sin(theta)]
}

/// Streaming least squares over a polygon approximating a circle of the
/// given radius. The target sits `target_distance` radii out along the normal
/// of a randomly chosen facet, so the optimum is that facet's tangent point.
pub fn make_sphere_scenario(params: &SphereParams, rng: &mut RngStream) -> Result<Problem> {
    let SphereParams {
        m,
        radius,
        noise_variance,
        target_distance,
    } = *params;
    if m < 3 {
        return Err(Error::InvalidParameter("sphere scenario needs m >= 3"));
    }
    if !(radius > 0.0) || !(noise_variance >= 0.0) || !(target_distance > 1.0) {
        return Err(Error::InvalidParameter(
            "sphere scenario parameters out of range",
        ));
    }
    let angles = jittered_angles(m, rng);
    let sets = angles
        .iter()
        .map(|&t| ConvexSet::halfspace(&unit(t), radius))
        .collect::<Result<Vec<_>>>()?;
    let dir = unit(angles[rng.below(m)]);
    let target = Vector::from_slice(&[
        target_distance * radius * dir[0],
        target_distance * radius * dir[1],
    ])?;
    let family = ConstraintFamily::new(sets)?;
    let objective = Objective::LeastSquares {
        target: target.clone(),
        noise_variance,
    };
    let mut problem = Problem::new(family, objective, Vector::zeros(2), radius)?;
    problem.planted = Some(target);
    problem.with_reference_optimum()
}

/// Least squares over the lens between two circles of radius `radius`
/// centered at `(±center_offset, 0)`, each approximated by `m/2` tangent
/// halfspaces `u'x <= r + u'c`. The target lies above the upper tip of the
/// lens, so the optimum sits where cutting planes from both circles cross
/// at a narrow angle.
pub fn make_two_sphere_scenario(params: &TwoSphereParams, rng: &mut RngStream) -> Result<Problem> {
    let TwoSphereParams {
        m,
        radius,
        center_offset,
        noise_variance,
    } = *params;
    if m < 4 || m % 2 != 0 {
        return Err(Error::InvalidParameter(
            "two-sphere scenario needs an even m >= 4",
        ));
    }
    if !(center_offset > 0.0) || !(radius > center_offset) || !(noise_variance >= 0.0) {
        return Err(Error::InvalidParameter(
            "two-sphere scenario needs radius > center offset > 0",
        ));
    }
    let mut sets = Vec::with_capacity(m);
    for cx in [-center_offset, center_offset] {
        for t in jittered_angles(m / 2, rng) {
            let u = unit(t);
            sets.push(ConvexSet::halfspace(&u, radius + u[0] * cx)?);
        }
    }
    let half_height = libm::sqrt(radius * radius - center_offset * center_offset);
    let target = Vector::from_slice(&[rng.uniform_in(-0.1, 0.1) * half_height, 3.0 * half_height])?;
    let family = ConstraintFamily::new(sets)?;
    let objective = Objective::LeastSquares {
        target: target.clone(),
        noise_variance,
    };
    let mut problem = Problem::new(family, objective, Vector::zeros(2), half_height)?;
    problem.planted = Some(target);
    problem.with_reference_optimum()
}

/// Hard-margin SVM: minimize `½‖β‖²` subject to `y_i x_i'β >= 1`, written as
/// halfspaces `-y_i x_i'β <= -1`. Data come from a Gaussian mixture with
/// means `±separation · w*`, labels are `sign(w*'x_i)`, and `w*` is rescaled
/// so that it satisfies every constraint with slack `margin`.
pub fn make_svm_scenario(params: &SvmParams, rng: &mut RngStream) -> Result<Problem> {
    let SvmParams {
        d,
        m,
        margin,
        separation,
    } = *params;
    if d < 2 || m < d {
        return Err(Error::InvalidParameter(
            "svm scenario needs d >= 2 and m >= d",
        ));
    }
    if !(margin > 0.0) || !(separation >= 0.0) {
        return Err(Error::InvalidParameter("svm margin must be positive"));
    }
    let mut w: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let wn = linalg::norm(&w);
    w.iter_mut().for_each(|v| *v /= wn);

    let mut signed = Vec::with_capacity(m);
    while signed.len() < m {
        let component = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        let x: Vec<f64> = w
            .iter()
            .map(|wi| component * separation * wi + rng.standard_normal())
            .collect();
        let score = linalg::dot(&w, &x);
        if score == 0.0 || linalg::norm_sq(&x) == 0.0 {
            continue;
        }
        let label = if score > 0.0 { 1.0 } else { -1.0 };
        signed.push((label, x, label * score));
    }
    let min_score = signed.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let scale = (1.0 + margin) / min_score;
    let sets = signed
        .iter()
        .map(|(label, x, _)| {
            let a: Vec<f64> = x.iter().map(|xi| -label * xi).collect();
            ConvexSet::halfspace(&a, -1.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let planted = Vector::new(w.iter().map(|v| scale * v).collect())?;
    let family = ConstraintFamily::new(sets)?;
    let objective = Objective::Quadratic {
        center: Vector::zeros(d),
        weight: 0.5,
    };
    let region_scale = planted.norm();
    let mut problem = Problem::new(family, objective, planted.clone(), region_scale)?;
    problem.planted = Some(planted);
    problem.with_reference_optimum()
}

/// Scenario selector used by configuration layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Sphere(SphereParams),
    TwoSphere(TwoSphereParams),
    Svm(SvmParams),
}

impl Scenario {
    pub fn build(&self, rng: &mut RngStream) -> Result<Problem> {
        match self {
            Scenario::Sphere(p) => make_sphere_scenario(p, rng),
            Scenario::TwoSphere(p) => make_two_sphere_scenario(p, rng),
            Scenario::Svm(p) => make_svm_scenario(p, rng),
        }
    }

    pub fn num_constraints(&self) -> usize {
        match self {
            Scenario::Sphere(p) => p.m,
            Scenario::TwoSphere(p) => p.m,
            Scenario::Svm(p) => p.m,
        }
    }
}
