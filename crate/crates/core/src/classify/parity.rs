//! Parity of the characteristic polynomial.

use nalgebra::linalg::Hessenberg;

use crate::error::{Error, Result};
use crate::linalg::{norm2, validate, ComplexMatrix, Tolerances, C64};

const MAX_DIM: usize = 64;

/// Coefficients `c[0..=n]` of `det(zI − T) = Σ c[j] z^j`, computed on the
/// Hessenberg form by the La Budde recurrence.
pub fn charpoly_coefficients(t: &ComplexMatrix) -> Result<Vec<C64>> {
    validate(t)?;
    let n = t.nrows();
    if n > MAX_DIM {
        return Err(Error::CharpolyTooLarge(n));
    }
    Ok(la_budde(t))
}

fn la_budde(t: &ComplexMatrix) -> Vec<C64> {
    let n = t.nrows();
    let zero = C64::new(0.0, 0.0);
    if n == 0 {
        return vec![C64::new(1.0, 0.0)];
    }
    let h = Hessenberg::new(t.clone()).h();
    // p[k] holds the characteristic polynomial of the leading k×k block.
    let mut p: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
    for k in 1..=n {
        let prev = &p[k - 1];
        let mut next = vec![zero; k + 1];
        for (j, &c) in prev.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= h[(k - 1, k - 1)] * c;
        }
        let mut prod = C64::new(1.0, 0.0);
        for i in 1..k {
            prod *= h[(k - i, k - i - 1)];
            let coef = h[(k - i - 1, k - 1)] * prod;
            for (j, &c) in p[k - i - 1].iter().enumerate() {
                next[j] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// True iff the characteristic polynomial is even or odd, i.e. every
/// coefficient of `z^(n−k)` with `k` odd vanishes. Coefficients are taken
/// for `T / ‖T‖`, and the one of `z^(n−k)` is compared against the change
/// an eigenvalue shift of `2·eig_cluster` can cause, `2·eig_cluster·C(n−1, k−1)`.
pub fn charpoly_parity(t: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    validate(t)?;
    let n = t.nrows();
    if n > MAX_DIM {
        return Err(Error::CharpolyTooLarge(n));
    }
    let s = norm2(t);
    if s == 0.0 {
        return Ok(true);
    }
    let c = la_budde(&(t / C64::new(s, 0.0)));
    Ok((1..=n).step_by(2).all(|k| {
        let bound =
            2.0 * tol.eig_cluster * binomial(n - 1, k - 1) + 1e3 * f64::EPSILON * binomial(n, k);
        c[n - k].norm() <= bound
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag, from_real_rows};

    fn real_diag(v: &[f64]) -> ComplexMatrix {
        diag(&v.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn coefficients_of_small_examples() {
        let c = charpoly_coefficients(&real_diag(&[1.0, 1.0, -1.0])).unwrap();
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - c64(b, 0.0)).norm() < 1e-14);
        }
        let t = from_real_rows(&[&[1.0, 2.0, 0.0], &[3.0, -1.0, 1.0], &[0.5, 4.0, 2.0]]);
        let c = charpoly_coefficients(&t).unwrap();
        // trace 2, determinant computed by cofactor expansion = 1*(-2-4) - 2*(6-0.5) = -17
        assert!((c[2] - c64(-2.0, 0.0)).norm() < 1e-12);
        assert!((c[0] - c64(17.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn parity_examples() {
        let tol = Tolerances::default();
        assert!(charpoly_parity(&real_diag(&[1.0, -1.0]), &tol).unwrap());
        assert!(!charpoly_parity(&real_diag(&[1.0, 1.0, -1.0]), &tol).unwrap());
        assert!(charpoly_parity(&from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]), &tol).unwrap());
    }

    #[test]
    fn large_dimension_rejected() {
        let t = ComplexMatrix::zeros(65, 65);
        assert!(matches!(
            charpoly_parity(&t, &Tolerances::default()),
            Err(Error::CharpolyTooLarge(65))
        ));
    }
}
