//! Projection onto small polyhedra.
//!
//! [`build_cutting_polyhedron`] turns a batch of sampled projections into the
//! supporting-halfspace polyhedron used by the polyhedral-set scheme.
//! [`project_hildreth`] solves the projection QP by dual coordinate descent
//! (Hildreth's method); [`project_activeset_oracle`] solves the same problem
//! by exhaustive enumeration of active sets and exists to check the former.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{gram_spectral_norm, ConstraintFamily, Halfspace, Vector};
use crate::linalg::{self, GramFactor};

/// Rows whose normal is shorter than this (times `1 + ‖y‖`) are dropped when
/// building a cutting polyhedron.
pub const ZERO_ROW_TOL: f64 = 1e-12;
/// Multiplier / contact threshold for deciding that a row is active.
pub const ACTIVE_TOL: f64 = 1e-8;
/// Largest row count the exhaustive oracle accepts.
pub const ORACLE_MAX_ROWS: usize = 12;
/// Largest dimension the exhaustive oracle accepts.
pub const ORACLE_MAX_DIM: usize = 16;

/// `{x : a_i'x <= b_i, i = 1..r}`. Zero rows denote the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        for r in &rows {
            r.normal().check_dim(dim)?;
        }
        Ok(Polyhedron { dim, rows })
    }

    /// Stacks an all-halfspace family into one polyhedron.
    pub fn from_family(family: &ConstraintFamily) -> Result<Self> {
        let rows = family.halfspaces().ok_or(Error::InvalidParameter(
            "family contains non-halfspace sets",
        ))?;
        Ok(Polyhedron {
            dim: family.dim(),
            rows: rows.into_iter().cloned().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest row violation of `x`, in distance units.
    pub fn max_violation(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim)?;
        Ok(self
            .rows
            .iter()
            .map(|h| h.residual(x.as_slice()) / libm::sqrt(h.normal_sq()))
            .fold(0.0, f64::max))
    }
}

/// Result of projecting a point onto a polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub point: Vector,
    /// One nonnegative multiplier per row; `point = y - Σ λ_i a_i`.
    pub multipliers: Vec<f64>,
    /// Largest row violation at `point`, in distance units.
    pub max_violation: f64,
    /// `max_i min(λ_i ‖a_i‖, slack_i)` with slack in distance units.
    pub complementarity_residual: f64,
    pub iterations: usize,
}

/// Settings for [`project_hildreth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Supporting halfspaces `a_i = y - p_i`, `b_i = a_i'p_i` at each sampled
/// projection `p_i`. Rows from sets already containing `y` are dropped.
pub fn build_cutting_polyhedron(y: &Vector, projections: &[Vector]) -> Result<Polyhedron> {
    let n = y.len();
    let cutoff = ZERO_ROW_TOL * (1.0 + y.norm());
    let mut rows = Vec::with_capacity(projections.len());
    for p in projections {
        p.check_dim(n)?;
        let a = y - p;
        if a.norm() <= cutoff {
            continue;
        }
        let b = a.dot(p);
        rows.push(Halfspace::new(a, b)?);
    }
    Ok(Polyhedron { dim: n, rows })
}

struct Residuals {
    max_violation: f64,
    complementarity: f64,
}

fn residuals(rows: &[Halfspace], norms: &[f64], x: &[f64], lambda: &[f64]) -> Residuals {
    let mut max_violation: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    for ((h, &nrm), &l) in rows.iter().zip(norms).zip(lambda) {
        let r = h.residual(x) / nrm;
        if r > 0.0 {
            max_violation = max_violation.max(r);
        } else {
            complementarity = complementarity.max((l * nrm).min(-r));
        }
    }
    Residuals {
        max_violation,
        complementarity,
    }
}

fn finish(
    rows: &[Halfspace],
    norms: &[f64],
    x: Vec<f64>,
    multipliers: Vec<f64>,
    iterations: usize,
) -> QpSolution {
    let res = residuals(rows, norms, &x, &multipliers);
    QpSolution {
        point: Vector::from_raw(x),
        multipliers,
        max_violation: res.max_violation,
        complementarity_residual: res.complementarity,
        iterations,
    }
}

/// Solves the equality-constrained projection onto the boundaries of the
/// rows in `active`. Linearly dependent rows get a zero multiplier.
/// Returns the point and the full multiplier vector.
fn solve_on_active(
    y: &[f64],
    rows: &[Halfspace],
    active: &[usize],
) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let k = active.len();
    let mut g = vec![0.0; k * k];
    for (i, &ri) in active.iter().enumerate() {
        for (j, &rj) in active.iter().enumerate().skip(i) {
            let v = linalg::dot(rows[ri].normal().as_slice(), rows[rj].normal().as_slice());
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
    }
    let factor = GramFactor::new(&g, k);
    let rhs: Vec<f64> = factor
        .kept
        .iter()
        .map(|&p| rows[active[p]].residual(y))
        .collect();
    let mu = factor.solve(&rhs);
    let mut x = y.to_vec();
    let mut lambda = vec![0.0; rows.len()];
    let kept: Vec<usize> = factor.kept.iter().map(|&p| active[p]).collect();
    for (&row, &m) in kept.iter().zip(&mu) {
        lambda[row] = m;
        linalg::axpy(-m, rows[row].normal().as_slice(), &mut x);
    }
    (x, lambda, kept)
}

fn gram(rows: &[Halfspace], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    let mut g = vec![0.0; k * k];
    for (i, &ri) in idx.iter().enumerate() {
        for (j, &rj) in idx.iter().enumerate().skip(i) {
            let v = linalg::dot(rows[ri].normal().as_slice(), rows[rj].normal().as_slice());
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
    }
    g
}

/// Dual active-set refinement of the multipliers `start`.
///
/// The working set is kept linearly independent. A violated row that depends
/// on the working set replaces the row picked by a ratio test; negative
/// equality multipliers are handled by stepping back to the boundary of the
/// nonnegative orthant and dropping the blocking row. Returns a KKT point
/// (violations at most `thr`, multipliers nonnegative) or `None` if the
/// polyhedron is found infeasible or the step budget runs out.
pub(crate) fn polish_active_set(
    y: &[f64],
    rows: &[Halfspace],
    norms: &[f64],
    start: &[f64],
    thr: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let r = rows.len();
    let slack_at_y: Vec<f64> = rows.iter().map(|h| h.residual(y)).collect();
    let support: Vec<usize> = (0..r).filter(|&i| start[i] > 0.0).collect();
    let mut active: Vec<usize> = {
        let f = GramFactor::new(&gram(rows, &support), support.len());
        f.kept.iter().map(|&p| support[p]).collect()
    };
    let mut lambda = vec![0.0; r];
    for &i in &active {
        lambda[i] = start[i];
    }
    for _ in 0..3 * r + 16 {
        let k = active.len();
        let factor = GramFactor::new(&gram(rows, &active), k);
        if factor.rank() < k {
            // drift made the working set dependent; drop the redundant rows
            let kept: Vec<usize> = factor.kept.iter().map(|&p| active[p]).collect();
            for &i in &active {
                if !kept.contains(&i) {
                    lambda[i] = 0.0;
                }
            }
            active = kept;
            continue;
        }
        let rhs: Vec<f64> = active.iter().map(|&i| slack_at_y[i]).collect();
        let mu = factor.solve(&rhs);
        if mu.iter().any(|&m| m < 0.0) {
            let mut step = 1.0;
            let mut blocking = 0;
            for (p, &i) in active.iter().enumerate() {
                if mu[p] < 0.0 {
                    let t = lambda[i] / (lambda[i] - mu[p]);
                    if t < step {
                        step = t;
                        blocking = p;
                    }
                }
            }
            for (p, &i) in active.iter().enumerate() {
                lambda[i] += step * (mu[p] - lambda[i]);
            }
            lambda[active[blocking]] = 0.0;
            for &i in &active {
                lambda[i] = lambda[i].max(0.0);
            }
            active.retain(|&i| lambda[i] > 0.0);
            continue;
        }
        for (p, &i) in active.iter().enumerate() {
            lambda[i] = mu[p];
        }
        let mut x = y.to_vec();
        for &i in &active {
            linalg::axpy(-lambda[i], rows[i].normal().as_slice(), &mut x);
        }
        let most_violated = (0..r)
            .filter(|i| !active.contains(i))
            .map(|i| (i, rows[i].residual(&x) / norms[i]))
            .filter(|&(_, v)| v > thr)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((j, _)) = most_violated else {
            return Some((x, lambda));
        };
        let mut with_j = active.clone();
        with_j.push(j);
        if GramFactor::new(&gram(rows, &with_j), k + 1).rank() == k + 1 {
            active.push(j);
            continue;
        }
        // a_j = Σ coef_p a_{active[p]}: move along the null direction
        let cross: Vec<f64> = active
            .iter()
            .map(|&i| linalg::dot(rows[i].normal().as_slice(), rows[j].normal().as_slice()))
            .collect();
        let coef = factor.solve(&cross);
        let ratio = active
            .iter()
            .enumerate()
            .filter(|&(p, _)| coef[p] > 0.0)
            .map(|(p, &i)| (p, lambda[i] / coef[p]))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let (leaving, step) = ratio?;
        for (p, &i) in active.iter().enumerate() {
            lambda[i] -= step * coef[p];
        }
        lambda[active[leaving]] = 0.0;
        lambda[j] = step;
        active.remove(leaving);
        active.push(j);
    }
    None
}

fn is_polish_sweep(sweep: usize) -> bool {
    sweep.is_power_of_two() || sweep.is_multiple_of(64)
}

/// Projects `y` onto `poly` by Hildreth's dual coordinate descent (cyclic
/// row order). Every few sweeps the current support `{λ_i > 0}` seeds an
/// active-set solve, which is accepted only if it satisfies the KKT
/// conditions to `tol · (1 + ‖y‖)`.
pub fn project_hildreth(
    y: &Vector,
    poly: &Polyhedron,
    tol: f64,
    max_iter: usize,
) -> Result<QpSolution> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter("tol and max_iter must be positive"));
    }
    y.check_dim(poly.dim)?;
    if !y.is_finite() {
        return Err(Error::NonFinite("point"));
    }
    let rows = &poly.rows;
    let norms: Vec<f64> = rows.iter().map(|h| libm::sqrt(h.normal_sq())).collect();
    let yv = y.as_slice();
    if rows.iter().all(|h| h.residual(yv) <= 0.0) {
        return Ok(finish(rows, &norms, yv.to_vec(), vec![0.0; rows.len()], 0));
    }
    let thr = tol * (1.0 + y.norm());
    let mut x = yv.to_vec();
    let mut lambda = vec![0.0; rows.len()];
    for sweep in 1..=max_iter {
        for (i, h) in rows.iter().enumerate() {
            let r = h.residual(&x);
            let delta = (r / h.normal_sq()).max(-lambda[i]);
            if delta != 0.0 {
                lambda[i] += delta;
                linalg::axpy(-delta, h.normal().as_slice(), &mut x);
            }
        }
        let res = residuals(rows, &norms, &x, &lambda);
        if res.max_violation <= thr && res.complementarity <= thr {
            return Ok(finish(rows, &norms, x, lambda, sweep));
        }
        if is_polish_sweep(sweep) {
            if let Some((px, pl)) = polish_active_set(yv, rows, &norms, &lambda, thr) {
                let sol = finish(rows, &norms, px, pl, sweep);
                if sol.max_violation <= thr && sol.complementarity_residual <= thr {
                    return Ok(sol);
                }
            }
        }
    }
    Err(Error::QpNonconvergence(Box::new(finish(
        rows, &norms, x, lambda, max_iter,
    ))))
}

/// [`project_hildreth`] with [`QpSettings`].
pub fn project_hildreth_with(
    y: &Vector,
    poly: &Polyhedron,
    settings: QpSettings,
) -> Result<QpSolution> {
    project_hildreth(y, poly, settings.tol, settings.max_iter)
}

/// Exhaustive active-set projection. Subsets are tried in order of
/// increasing size; the first one whose equality-constrained projection has
/// nonnegative multipliers and satisfies every row is returned. Subsets with
/// a singular Gram matrix are skipped.
pub fn project_activeset_oracle(y: &Vector, poly: &Polyhedron) -> Result<QpSolution> {
    let r = poly.rows.len();
    if r > ORACLE_MAX_ROWS || poly.dim > ORACLE_MAX_DIM {
        return Err(Error::OracleTooLarge {
            rows: r,
            dim: poly.dim,
        });
    }
    y.check_dim(poly.dim)?;
    if !y.is_finite() {
        return Err(Error::NonFinite("point"));
    }
    let rows = &poly.rows;
    let norms: Vec<f64> = rows.iter().map(|h| libm::sqrt(h.normal_sq())).collect();
    let yv = y.as_slice();
    let feas_tol = 1e-9 * (1.0 + y.norm());
    let mut examined = 0;
    for size in 0..=r {
        for mask in 0u32..(1u32 << r) {
            if mask.count_ones() as usize != size {
                continue;
            }
            examined += 1;
            let active: Vec<usize> = (0..r).filter(|i| mask & (1 << i) != 0).collect();
            let (x, lambda, kept) = solve_on_active(yv, rows, &active);
            if kept.len() < active.len() {
                continue;
            }
            if active.iter().any(|&i| lambda[i] < -1e-10) {
                continue;
            }
            if rows
                .iter()
                .zip(&norms)
                .any(|(h, n)| h.residual(&x) / n > feas_tol)
            {
                continue;
            }
            let lambda = lambda.into_iter().map(|l| l.max(0.0)).collect();
            return Ok(finish(rows, &norms, x, lambda, examined));
        }
    }
    Err(Error::NoKktSubset)
}

fn active_rows(y: &Vector, poly: &Polyhedron, solution: &QpSolution) -> Vec<usize> {
    let x = solution.point.as_slice();
    poly.rows
        .iter()
        .enumerate()
        .filter(|(i, h)| {
            let nrm = libm::sqrt(h.normal_sq());
            let by_multiplier =
                solution.multipliers.get(*i).copied().unwrap_or(0.0) * nrm > ACTIVE_TOL;
            let by_contact =
                h.residual(y.as_slice()) > 0.0 && libm::fabs(h.residual(x)) / nrm <= ACTIVE_TOL;
            by_multiplier || by_contact
        })
        .map(|(i, _)| i)
        .collect()
}

/// `θ = (active row count) / ‖A'A‖` over the unit normals of the rows active
/// at the projection. Always at least 1.
pub fn improvement_factor(y: &Vector, poly: &Polyhedron, solution: &QpSolution) -> Result<f64> {
    y.check_dim(poly.dim)?;
    let active = active_rows(y, poly, solution);
    if active.is_empty() {
        return Err(Error::NoActiveRows);
    }
    let units: Vec<Vector> = active
        .iter()
        .map(|&i| {
            let h = &poly.rows[i];
            (1.0 / libm::sqrt(h.normal_sq())) * h.normal()
        })
        .collect();
    Ok(active.len() as f64 / gram_spectral_norm(&units)?)
}

/// Realized gain of the polyhedral projection over the max-distance row:
/// `d²(y, P) / max_i d²(y, {a_i'x <= b_i})`.
pub fn realized_improvement(y: &Vector, poly: &Polyhedron, solution: &QpSolution) -> Result<f64> {
    y.check_dim(poly.dim)?;
    let worst = poly
        .rows
        .iter()
        .map(|h| {
            let r = h.residual(y.as_slice());
            if r > 0.0 {
                r * r / h.normal_sq()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    if worst <= 0.0 {
        return Err(Error::NoActiveRows);
    }
    Ok(solution.point.dist_sq(y) / worst)
}
