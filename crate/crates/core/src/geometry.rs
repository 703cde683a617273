//! Dense vectors and the projectable convex sets every update scheme consumes.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg;

/// A dense real vector whose entries are all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Vector(entries))
        } else {
            Err(Error::NonFinite("vector"))
        }
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    /// Wraps values produced by arithmetic on already-finite inputs.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// # Panics
    /// If the lengths differ.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        linalg::dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.0)
    }

    pub fn norm_sq(&self) -> f64 {
        linalg::norm_sq(&self.0)
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist_sq(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        linalg::dist_sq(&self.0, &other.0)
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.len(),
            })
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        Vector(rhs.0.iter().map(|v| self * v).collect())
    }
}

/// `{x : a'x <= b}` with `a != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("halfspace offset"));
        }
        let normal_sq = normal.norm_sq();
        if normal_sq <= 0.0 {
            return Err(Error::ZeroNormal);
        }
        Ok(Halfspace {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn normal_sq(&self) -> f64 {
        self.normal_sq
    }

    /// `a'x - b`; positive when violated.
    #[inline]
    pub(crate) fn residual(&self, x: &[f64]) -> f64 {
        linalg::dot(self.normal.as_slice(), x) - self.offset
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidParameter(
                "ball radius must be positive and finite",
            ));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// One constraint superset `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Halfspace(Halfspace),
    Ball(Ball),
}

impl From<Halfspace> for ConvexSet {
    fn from(h: Halfspace) -> Self {
        ConvexSet::Halfspace(h)
    }
}

impl From<Ball> for ConvexSet {
    fn from(b: Ball) -> Self {
        ConvexSet::Ball(b)
    }
}

impl ConvexSet {
    pub fn halfspace(normal: &[f64], offset: f64) -> Result<Self> {
        Ok(Halfspace::new(Vector::from_slice(normal)?, offset)?.into())
    }

    pub fn ball(center: &[f64], radius: f64) -> Result<Self> {
        Ok(Ball::new(Vector::from_slice(center)?, radius)?.into())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace(h) => h.normal.len(),
            ConvexSet::Ball(b) => b.center.len(),
        }
    }

    fn check(&self, x: &Vector) -> Result<()> {
        x.check_dim(self.dim())?;
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("point"))
        }
    }

    /// Euclidean projection of `x` onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        let mut out = vec![0.0; x.len()];
        self.project_into(x.as_slice(), &mut out);
        Ok(Vector(out))
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        Ok(libm::sqrt(self.distance_sq_raw(x.as_slice())))
    }

    /// Whether `distance(x) <= tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerance must be nonnegative"));
        }
        Ok(self.distance(x)? <= tol)
    }

    /// Unchecked projection; `x` and `out` have the set's dimension.
    pub(crate) fn project_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        match self {
            ConvexSet::Halfspace(h) => {
                let r = h.residual(x);
                if r > 0.0 {
                    linalg::axpy(-r / h.normal_sq, h.normal.as_slice(), out);
                }
            }
            ConvexSet::Ball(b) => {
                let c = b.center.as_slice();
                let d = linalg::dist_sq(x, c);
                if d > b.radius * b.radius {
                    let scale = b.radius / libm::sqrt(d);
                    for ((o, xi), ci) in out.iter_mut().zip(x).zip(c) {
                        *o = ci + scale * (xi - ci);
                    }
                }
            }
        }
    }

    /// Unchecked squared distance.
    pub(crate) fn distance_sq_raw(&self, x: &[f64]) -> f64 {
        match self {
            ConvexSet::Halfspace(h) => {
                let r = h.residual(x);
                if r > 0.0 {
                    r * r / h.normal_sq
                } else {
                    0.0
                }
            }
            ConvexSet::Ball(b) => {
                let d = libm::sqrt(linalg::dist_sq(x, b.center.as_slice())) - b.radius;
                if d > 0.0 {
                    d * d
                } else {
                    0.0
                }
            }
        }
    }
}

/// The constraint supersets `X_1, ..., X_m`; their intersection is the
/// feasible region. Nonemptiness is the caller's responsibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFamily {
    sets: Vec<ConvexSet>,
    dim: usize,
}

impl ConstraintFamily {
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self> {
        let dim = sets
            .first()
            .ok_or(Error::InvalidParameter("constraint family is empty"))?
            .dim();
        if let Some(bad) = sets.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(ConstraintFamily { sets, dim })
    }

    /// Number of sets `m`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn get(&self, i: usize) -> Option<&ConvexSet> {
        self.sets.get(i)
    }

    /// The halfspaces of an all-halfspace family, `None` if any ball is present.
    pub fn halfspaces(&self) -> Option<Vec<&Halfspace>> {
        self.sets
            .iter()
            .map(|s| match s {
                ConvexSet::Halfspace(h) => Some(h),
                ConvexSet::Ball(_) => None,
            })
            .collect()
    }

    /// `max_i d(x, X_i)`.
    pub fn max_set_distance(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim)?;
        let worst = self
            .sets
            .iter()
            .map(|s| s.distance_sq_raw(x.as_slice()))
            .fold(0.0, f64::max);
        Ok(libm::sqrt(worst))
    }
}

/// `‖A'A‖` for the matrix whose rows are `rows`: the largest eigenvalue of
/// the small Gram matrix `AA'`.
pub fn gram_spectral_norm(rows: &[Vector]) -> Result<f64> {
    let first = rows.first().ok_or(Error::InvalidParameter("no rows"))?;
    let n = first.len();
    for r in rows {
        r.check_dim(n)?;
    }
    if rows.iter().all(|r| r.norm_sq() == 0.0) {
        return Err(Error::ZeroNormal);
    }
    let k = rows.len();
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v = rows[i].dot(&rows[j]);
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
    }
    let top = linalg::symmetric_eigenvalues(g, k)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    fn close(a: &Vector, b: &[f64], tol: f64) -> bool {
        a.as_slice()
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite("vector"))
        );
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn projection_examples() {
        let h = ConvexSet::halfspace(&[1.0, 0.0], 1.0).unwrap();
        assert!(close(
            &h.project(&v(&[2.0, 0.0])).unwrap(),
            &[1.0, 0.0],
            0.0
        ));

        let ball = ConvexSet::ball(&[0.0, 0.0], 61.0).unwrap();
        assert!(close(
            &ball.project(&v(&[122.0, 0.0])).unwrap(),
            &[61.0, 0.0],
            1e-12
        ));

        let diag = ConvexSet::halfspace(&[1.0, 1.0], 0.0).unwrap();
        assert!(close(
            &diag.project(&v(&[1.0, 1.0])).unwrap(),
            &[0.0, 0.0],
            1e-15
        ));
    }

    #[test]
    fn projection_is_identity_inside() {
        let h = ConvexSet::halfspace(&[1.0, 2.0], 3.0).unwrap();
        let x = v(&[0.3, -0.7]);
        assert_eq!(h.project(&x).unwrap(), x);
        let b = ConvexSet::ball(&[1.0, 1.0], 2.0).unwrap();
        assert_eq!(b.project(&x).unwrap(), x);
    }

    #[test]
    fn distance_examples() {
        let h = ConvexSet::halfspace(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(h.distance(&v(&[2.0, 0.0])).unwrap(), 1.0);
        assert_eq!(h.distance(&v(&[-5.0, 3.0])).unwrap(), 0.0);
        let b = ConvexSet::ball(&[0.0, 0.0], 1.0).unwrap();
        assert!((b.distance(&v(&[3.0, 4.0])).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn contains_examples() {
        let h = ConvexSet::halfspace(&[1.0, 0.0], 1.0).unwrap();
        assert!(h.contains(&v(&[1.0, 0.0]), 0.0).unwrap());
        assert!(!h.contains(&v(&[1.0 + 1e-8, 0.0]), 1e-9).unwrap());
        assert!(h.contains(&v(&[1.0 + 1e-8, 0.0]), 1e-6).unwrap());
        assert!(h.contains(&v(&[1.0, 0.0]), -1.0).is_err());
    }

    #[test]
    fn errors_on_bad_input() {
        let h = ConvexSet::halfspace(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(
            h.project(&v(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            ConvexSet::halfspace(&[0.0, 0.0], 1.0),
            Err(Error::ZeroNormal)
        );
        assert!(ConvexSet::ball(&[0.0], 0.0).is_err());
        assert!(ConstraintFamily::new(vec![]).is_err());
        let mixed = ConstraintFamily::new(vec![h, ConvexSet::ball(&[0.0], 1.0).unwrap()]);
        assert!(matches!(mixed, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gram_norm_examples() {
        assert!((gram_spectral_norm(&[v(&[0.6, 0.8])]).unwrap() - 1.0).abs() < 1e-12);
        let ortho = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        assert!((gram_spectral_norm(&ortho).unwrap() - 1.0).abs() < 1e-12);
        // eigenvalues of AA' are 1 ± cos φ; the norm is the larger one
        let phi = 120f64.to_radians();
        let rows = [v(&[1.0, 0.0]), v(&[phi.cos(), phi.sin()])];
        assert!((gram_spectral_norm(&rows).unwrap() - 1.5).abs() < 1e-12);
        // duplicated row next to an orthogonal one: AA' has top eigenvector (0,1,1)
        let dup = [v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, 1.0])];
        assert!((gram_spectral_norm(&dup).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            gram_spectral_norm(&[v(&[0.0, 0.0])]),
            Err(Error::ZeroNormal)
        );
    }

    fn arb_set() -> impl Strategy<Value = ConvexSet> {
        let halfspace = (prop::collection::vec(-3.0..3.0f64, 3), -2.0..2.0f64)
            .prop_filter("nonzero normal", |(a, _)| a.iter().any(|v| v.abs() > 1e-3))
            .prop_map(|(a, b)| ConvexSet::halfspace(&a, b).unwrap());
        let ball = (prop::collection::vec(-3.0..3.0f64, 3), 0.1..4.0f64)
            .prop_map(|(c, r)| ConvexSet::ball(&c, r).unwrap());
        prop_oneof![halfspace, ball]
    }

    fn arb_point() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-10.0..10.0f64, 3).prop_map(|x| Vector::new(x).unwrap())
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(s in arb_set(), x in arb_point()) {
            let p = s.project(&x).unwrap();
            let pp = s.project(&p).unwrap();
            prop_assert!(p.dist_sq(&pp).sqrt() <= 1e-12 * (1.0 + p.norm()));
        }

        #[test]
        fn projection_is_nonexpansive(s in arb_set(), x in arb_point(), y in arb_point()) {
            let px = s.project(&x).unwrap();
            let py = s.project(&y).unwrap();
            prop_assert!(px.dist_sq(&py).sqrt() <= x.dist_sq(&y).sqrt() + 1e-12);
        }

        #[test]
        fn projection_obtuse_angle(s in arb_set(), x in arb_point(), z in arb_point()) {
            let z = s.project(&z).unwrap();
            let px = s.project(&x).unwrap();
            let lhs = (&z - &px).dot(&(&x - &px));
            prop_assert!(lhs <= 1e-10 * (1.0 + x.norm_sq()));
        }
    }
}
