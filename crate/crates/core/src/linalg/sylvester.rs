//! Sylvester equation `A X − X B = C` by the Bartels–Stewart method.

use super::dense::{norm2, validate, ComplexMatrix, C64};
use super::schur::schur;
use super::Tolerances;
use crate::error::{Error, Result};

/// Solves `A X − X B = C` for `X`. The spectra of `A` and `B` must be
/// separated by more than `eig_cluster · max(‖A‖, ‖B‖)`.
pub fn sylvester_solve(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    validate(a)?;
    validate(b)?;
    tol.validate()?;
    if c.nrows() != a.nrows() || c.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "C is {}x{}, expected {}x{}",
            c.nrows(),
            c.ncols(),
            a.nrows(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 || b.nrows() == 0 {
        return Ok(ComplexMatrix::zeros(a.nrows(), b.nrows()));
    }
    let fa = schur(a)?;
    let fb = schur(b)?;
    let sep = tol.eig_cluster * norm2(a).max(norm2(b));
    let mut nearest: Option<(C64, C64, f64)> = None;
    for x in fa.eigenvalues() {
        for y in fb.eigenvalues() {
            let d = (x - y).norm();
            if nearest.is_none_or(|(_, _, best)| d < best) {
                nearest = Some((x, y, d));
            }
        }
    }
    if let Some((left, right, distance)) = nearest {
        if distance <= sep {
            return Err(Error::SpectraNotDisjoint {
                left,
                right,
                distance,
            });
        }
    }
    let rhs = fa.u.adjoint() * c * &fb.u;
    let y = triangular_sylvester(&fa.r, &fb.r, &rhs);
    Ok(&fa.u * y * fb.u.adjoint())
}

/// Solves `Ra Y − Y Rb = C` for upper triangular `Ra`, `Rb` with disjoint
/// diagonals, one column at a time.
pub fn triangular_sylvester(
    ra: &ComplexMatrix,
    rb: &ComplexMatrix,
    c: &ComplexMatrix,
) -> ComplexMatrix {
    let (m, n) = (ra.nrows(), rb.nrows());
    let mut y = ComplexMatrix::zeros(m, n);
    for j in 0..n {
        let mut rhs: Vec<C64> = (0..m).map(|i| c[(i, j)]).collect();
        for k in 0..j {
            let coef = rb[(k, j)];
            if coef != C64::new(0.0, 0.0) {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r += y[(i, k)] * coef;
                }
            }
        }
        let shift = rb[(j, j)];
        for i in (0..m).rev() {
            let mut acc = rhs[i];
            for k in (i + 1)..m {
                acc -= ra[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = acc / (ra[(i, i)] - shift);
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{c64, from_real_rows, identity};

    #[test]
    fn scalar_case() {
        let x = sylvester_solve(
            &from_real_rows(&[&[1.0]]),
            &from_real_rows(&[&[-1.0]]),
            &from_real_rows(&[&[2.0]]),
            &Tolerances::default(),
        )
        .unwrap();
        assert!((x[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn scaled_identities() {
        let c = from_real_rows(&[&[1.0, -2.0], &[3.0, 0.5]]);
        let x = sylvester_solve(
            &(identity(2) * c64(2.0, 0.0)),
            &(identity(2) * c64(-2.0, 0.0)),
            &c,
            &Tolerances::default(),
        )
        .unwrap();
        assert!(norm2(&(x - c / c64(4.0, 0.0))) < 1e-14);
    }

    #[test]
    fn jordan_left_side() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let b = from_real_rows(&[&[0.0]]);
        let c = ComplexMatrix::from_element(2, 1, c64(1.0, 0.0));
        let x = sylvester_solve(&a, &b, &c, &Tolerances::default()).unwrap();
        assert!((x[(0, 0)]).norm() < 1e-14);
        assert!((x[(1, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn overlapping_spectra_rejected() {
        let a = from_real_rows(&[&[1.0]]);
        let r = sylvester_solve(&a, &a, &a, &Tolerances::default());
        assert!(matches!(r, Err(Error::SpectraNotDisjoint { .. })));
    }
}
