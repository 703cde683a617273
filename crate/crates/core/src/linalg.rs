//! Small dense kernels on `f64` slices: dot products, a rank-revealing
//! Cholesky for Gram matrices, and cyclic Jacobi eigenvalues.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(norm_sq(a))
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Relative pivot threshold below which a Gram row is treated as linearly
/// dependent on the rows already factored.
const DEPENDENT_PIVOT: f64 = 1e-12;

/// Cholesky factor of a symmetric positive semidefinite matrix restricted to
/// a maximal set of independent rows, chosen greedily in the given order.
pub(crate) struct GramFactor {
    /// Positions (into the original matrix) that were kept.
    pub kept: Vec<usize>,
    /// Dense lower-triangular factor over `kept`, row-major.
    l: Vec<f64>,
}

impl GramFactor {
    /// `g` is a dense row-major `k × k` matrix.
    pub fn new(g: &[f64], k: usize) -> Self {
        let mut kept: Vec<usize> = Vec::with_capacity(k);
        let mut l = vec![0.0; k * k];
        for j in 0..k {
            let r = kept.len();
            // tentative row r of L
            let mut row = vec![0.0; r + 1];
            for p in 0..r {
                let gp = kept[p];
                let mut s = g[j * k + gp];
                for q in 0..p {
                    s -= row[q] * l[p * k + q];
                }
                row[p] = s / l[p * k + p];
            }
            let diag = g[j * k + j];
            let pivot = diag - row[..r].iter().map(|v| v * v).sum::<f64>();
            if diag <= 0.0 || pivot <= DEPENDENT_PIVOT * diag {
                continue;
            }
            row[r] = libm::sqrt(pivot);
            l[r * k..r * k + r + 1].copy_from_slice(&row);
            kept.push(j);
        }
        // compact to kept.len() stride
        let r = kept.len();
        let mut compact = vec![0.0; r * r];
        for i in 0..r {
            compact[i * r..i * r + i + 1].copy_from_slice(&l[i * k..i * k + i + 1]);
        }
        GramFactor { kept, l: compact }
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Solves `L L' z = rhs` where `rhs` is indexed by `kept`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let r = self.rank();
        debug_assert_eq!(rhs.len(), r);
        let mut z = rhs.to_vec();
        for i in 0..r {
            let mut s = z[i];
            for q in 0..i {
                s -= self.l[i * r + q] * z[q];
            }
            z[i] = s / self.l[i * r + i];
        }
        for i in (0..r).rev() {
            let mut s = z[i];
            for q in i + 1..r {
                s -= self.l[q * r + i] * z[q];
            }
            z[i] = s / self.l[i * r + i];
        }
        z
    }
}

/// Eigenvalues of a symmetric `k × k` matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(mut a: Vec<f64>, k: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>();
    for _sweep in 0..100 {
        let off: f64 = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * k + j] * a[i * k + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * k + p];
                let aqq = a[q * k + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for r in 0..k {
                    let arp = a[r * k + p];
                    let arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p * k + r];
                    let aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..k).map(|i| a[i * k + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_solves_spd_system() {
        let g = [4.0, 2.0, 2.0, 3.0];
        let f = GramFactor::new(&g, 2);
        assert_eq!(f.kept, [0, 1]);
        let z = f.solve(&[2.0, 1.0]);
        // 4z0 + 2z1 = 2, 2z0 + 3z1 = 1 -> z = (0.5, 0)
        assert!((z[0] - 0.5).abs() < 1e-14 && z[1].abs() < 1e-14);
    }

    #[test]
    fn factor_skips_duplicate_rows() {
        // rows (1,0), (1,0), (0,1)
        let g = [1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let f = GramFactor::new(&g, 3);
        assert_eq!(f.kept, [0, 2]);
    }

    #[test]
    fn jacobi_two_by_two() {
        let c = -0.5;
        let mut ev = symmetric_eigenvalues(alloc::vec![1.0, c, c, 1.0], 2);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 0.5).abs() < 1e-14);
        assert!((ev[1] - 1.5).abs() < 1e-14);
    }
}
