//! Complex Schur form and its ordered variant.

use nalgebra::Schur;

use super::dense::{norm2, validate, ComplexMatrix, C64};
use crate::error::{Error, Result};

const MAX_SCHUR_ITERATIONS: usize = 10_000;

/// A unitary `u` and upper triangular `r` with `u · r · u* = T`.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub u: ComplexMatrix,
    pub r: ComplexMatrix,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.r.nrows()).map(|i| self.r[(i, i)]).collect()
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        &self.u * &self.r * self.u.adjoint()
    }

    /// Swaps the diagonal entries at `k` and `k + 1` by a unitary rotation,
    /// keeping `u · r · u*` fixed.
    pub fn swap_adjacent(&mut self, k: usize) {
        let n = self.r.nrows();
        let a = self.r[(k, k)];
        let b = self.r[(k + 1, k + 1)];
        let x = self.r[(k, k + 1)];
        // Eigenvector of [[a, x], [0, b]] for b is (x, b - a).
        let (v1, v2) = (x, b - a);
        let len = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
        let (g11, g21, g12, g22) = if len == 0.0 {
            let z = C64::new(0.0, 0.0);
            let o = C64::new(1.0, 0.0);
            (z, o, o, z)
        } else {
            let (v1, v2) = (v1 / len, v2 / len);
            (v1, v2, -v2.conj(), v1.conj())
        };
        // r <- G* r on rows k, k+1
        for j in 0..n {
            let p = self.r[(k, j)];
            let q = self.r[(k + 1, j)];
            self.r[(k, j)] = g11.conj() * p + g21.conj() * q;
            self.r[(k + 1, j)] = g12.conj() * p + g22.conj() * q;
        }
        // r <- r G and u <- u G on columns k, k+1
        for i in 0..n {
            let p = self.r[(i, k)];
            let q = self.r[(i, k + 1)];
            self.r[(i, k)] = p * g11 + q * g21;
            self.r[(i, k + 1)] = p * g12 + q * g22;
            let p = self.u[(i, k)];
            let q = self.u[(i, k + 1)];
            self.u[(i, k)] = p * g11 + q * g21;
            self.u[(i, k + 1)] = p * g12 + q * g22;
        }
        self.r[(k + 1, k)] = C64::new(0.0, 0.0);
    }

    /// Stable reordering so that diagonal positions appear grouped by
    /// non-decreasing `keys` (one key per current diagonal position).
    /// Returns the permutation applied: `perm[new] = old`.
    pub fn reorder_by_key(&mut self, keys: &[usize]) -> Vec<usize> {
        let n = self.r.nrows();
        assert_eq!(keys.len(), n);
        let mut labels: Vec<(usize, usize)> = keys.iter().copied().zip(0..n).collect();
        // insertion sort with adjacent swaps
        for i in 1..n {
            let mut j = i;
            while j > 0 && labels[j - 1].0 > labels[j].0 {
                self.swap_adjacent(j - 1);
                labels.swap(j - 1, j);
                j -= 1;
            }
        }
        labels.into_iter().map(|(_, old)| old).collect()
    }
}

/// Runs the QR iteration, restarting when it stalls. The QR deflation test
/// is relative to the neighbouring diagonal entries, which are tiny near a
/// nilpotent block, so each restart also shifts by `σ` of order `‖T‖` (same Schur
/// vectors, `R − σI` recovered exactly up to rounding at the scale of `‖T‖`)
/// and conjugates by a fixed Householder reflector.
fn unpack_with_restarts(t: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    const RESTARTS: usize = 9;
    const SHIFT_SCALES: [f64; 3] = [1.0, 0.3, 0.1];
    if let Some(d) = Schur::try_new(t.clone(), f64::EPSILON, MAX_SCHUR_ITERATIONS) {
        return Ok(d.unpack());
    }
    let n = t.nrows();
    let scale = norm2(t);
    for attempt in 1..=RESTARTS {
        let v = nalgebra::DVector::from_fn(n, |i, _| {
            C64::from_polar(1.0, (i + 1) as f64 * attempt as f64 * 0.7)
        });
        let q = ComplexMatrix::identity(n, n) - (&v * v.adjoint()) * C64::new(2.0 / n as f64, 0.0);
        let sigma = C64::from_polar(
            scale * SHIFT_SCALES[(attempt - 1) % 3],
            0.9 * attempt as f64,
        );
        let mut shifted = q.adjoint() * t * &q;
        for i in 0..n {
            shifted[(i, i)] += sigma;
        }
        if let Some(d) = Schur::try_new(shifted, f64::EPSILON, MAX_SCHUR_ITERATIONS) {
            let (u, mut r) = d.unpack();
            for i in 0..n {
                r[(i, i)] -= sigma;
            }
            return Ok((q * u, r));
        }
    }
    Err(Error::SchurNoConvergence {
        iterations: MAX_SCHUR_ITERATIONS,
    })
}

/// Complex Schur decomposition `T = U R U*`.
pub fn schur(t: &ComplexMatrix) -> Result<SchurForm> {
    validate(t)?;
    let n = t.nrows();
    if n == 0 {
        return Ok(SchurForm {
            u: ComplexMatrix::zeros(0, 0),
            r: ComplexMatrix::zeros(0, 0),
        });
    }
    let (u, mut r) = unpack_with_restarts(t)?;
    let scale = norm2(t).max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in (j + 1)..n {
            // complex Schur has no 2x2 bumps; anything left is rounding
            debug_assert!(r[(i, j)].norm() <= 1e-8 * scale);
            r[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(SchurForm { u, r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{c64, from_real_rows, identity};

    fn check(t: &ComplexMatrix, f: &SchurForm) {
        let n = t.nrows();
        let scale = norm2(t).max(1.0);
        assert!(norm2(&(f.reassemble() - t)) <= 1e-12 * scale);
        assert!(norm2(&(f.u.adjoint() * &f.u - identity(n))) <= 1e-12);
        for j in 0..n {
            for i in (j + 1)..n {
                assert_eq!(f.r[(i, j)], c64(0.0, 0.0));
            }
        }
    }

    #[test]
    fn identity_is_its_own_schur_form() {
        let t = identity(3);
        let f = schur(&t).unwrap();
        check(&t, &f);
        for i in 0..3 {
            assert!((f.r[(i, i)] - c64(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn triangular_input_kept() {
        let t = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let f = schur(&t).unwrap();
        check(&t, &f);
        assert!(norm2(&(&f.r - &t)) < 1e-14 || (f.r[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exchange_matrix_eigenvalues() {
        let t = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = schur(&t).unwrap();
        check(&t, &f);
        let mut ev: Vec<f64> = f.eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reorder_groups_keys_and_preserves_matrix() {
        let t = from_real_rows(&[
            &[1.0, 2.0, 0.0, 1.0],
            &[0.0, -1.0, 3.0, 0.5],
            &[0.0, 0.0, 2.0, 1.0],
            &[0.0, 0.0, 0.0, -2.0],
        ]);
        let mut f = schur(&t).unwrap();
        let keys: Vec<usize> = f
            .eigenvalues()
            .iter()
            .map(|z| usize::from(z.re > 0.0))
            .collect();
        f.reorder_by_key(&keys);
        check(&t, &f);
        let ev = f.eigenvalues();
        assert!(ev[0].re < 0.0 && ev[1].re < 0.0 && ev[2].re > 0.0 && ev[3].re > 0.0);
    }
}
