//! Orthogonal projection pairs for skew-adjoint commutator targets and
//! hermitian difference targets.

use super::{CertificateKind, CertificatePair};
use crate::classify::{is_cop, is_dop};
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigen, norm2, validate, ComplexMatrix, Tolerances, C64};

/// Embeds the 2×2 model pair `(p0, q0)` through the isometry sending the
/// model basis `w` to the eigenvectors `(y₊, y₋)`, and adds it in place.
fn embed_plane(
    p: &mut ComplexMatrix,
    q: &mut ComplexMatrix,
    y: &ComplexMatrix,
    w: &ComplexMatrix,
    p0: &ComplexMatrix,
    q0: &ComplexMatrix,
) {
    let phi = y * w.adjoint();
    *p += &phi * p0 * phi.adjoint();
    *q += &phi * q0 * phi.adjoint();
}

fn plane(vecs: &ComplexMatrix, plus: usize, minus: usize) -> ComplexMatrix {
    let n = vecs.nrows();
    let mut y = ComplexMatrix::zeros(n, 2);
    y.set_column(0, &vecs.column(plus));
    y.set_column(1, &vecs.column(minus));
    y
}

fn rank_one(v: nalgebra::DVectorView<'_, C64>) -> ComplexMatrix {
    v * v.adjoint()
}

/// Projections `P, Q` with `[P, Q] = T` for skew-adjoint `T` with
/// `‖T‖ ≤ ½` and `iT` spectrally symmetric.
///
/// Each pair `±t` of `iT` is realized on its eigenvector plane by two
/// lines at angle `θ` with `sin 2θ = 2t`.
pub fn cop_pair(t: &ComplexMatrix, tol: &Tolerances) -> Result<CertificatePair> {
    let report = is_cop(t, tol)?;
    if !report.verdict {
        let failed: Vec<_> = report
            .evidence
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        return Err(Error::Precondition(format!(
            "input is not a commutator of projections: {}",
            failed.join(", ")
        )));
    }
    let n = t.nrows();
    let r0 = tol.eig_cluster * norm2(t);
    let (vals, vecs) = hermitian_eigen(&(t * c64(0.0, 1.0)));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let w =
        ComplexMatrix::from_row_slice(2, 2, &[c64(h, 0.0), c64(h, 0.0), c64(0.0, -h), c64(0.0, h)]);
    let mut p = ComplexMatrix::zeros(n, n);
    let mut q = ComplexMatrix::zeros(n, n);
    for k in 0..n / 2 {
        let (lo, hi) = (k, n - 1 - k);
        if vals[hi] <= r0 {
            break;
        }
        let tk = ((vals[hi] - vals[lo]) / 2.0).min(0.5);
        let theta = 0.5 * (2.0 * tk).asin();
        let (s, c) = theta.sin_cos();
        let p0 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        let q0 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(c * c, 0.0),
                c64(c * s, 0.0),
                c64(c * s, 0.0),
                c64(s * s, 0.0),
            ],
        );
        embed_plane(&mut p, &mut q, &plane(&vecs, hi, lo), &w, &p0, &q0);
    }
    Ok(CertificatePair::new(
        p,
        q,
        CertificateKind::ProjectionCommutator,
        t.clone(),
    ))
}

/// Projections `P, Q` with `P − Q = H` for hermitian `H` with spectrum in
/// `[−1, 1]` whose eigenvalues in `(−1, 1) \ {0}` pair under negation.
///
/// Eigenvalues `±1` are carried by `P` or `Q` alone; each pair `±c` is
/// realized on its eigenvector plane by two lines at angle `arccos c`.
pub fn dop_pair(h: &ComplexMatrix, tol: &Tolerances) -> Result<CertificatePair> {
    let report = is_dop(h, tol)?;
    if !report.verdict {
        let failed: Vec<_> = report
            .evidence
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        return Err(Error::Precondition(format!(
            "input is not a difference of projections: {}",
            failed.join(", ")
        )));
    }
    let n = h.nrows();
    let r0 = tol.eig_cluster * norm2(h).max(1.0);
    let (vals, vecs) = hermitian_eigen(h);
    let mut p = ComplexMatrix::zeros(n, n);
    let mut q = ComplexMatrix::zeros(n, n);
    let mut inner = Vec::new();
    for (k, &lambda) in vals.iter().enumerate() {
        if (lambda - 1.0).abs() <= r0 {
            p += rank_one(vecs.column(k));
        } else if (lambda + 1.0).abs() <= r0 {
            q += rank_one(vecs.column(k));
        } else if lambda.abs() > r0 {
            inner.push(k);
        }
    }
    let m = inner.len();
    for k in 0..m / 2 {
        let (lo, hi) = (inner[k], inner[m - 1 - k]);
        let c = ((vals[hi] - vals[lo]) / 2.0).clamp(0.0, 1.0);
        let s = (1.0 - c * c).sqrt();
        let a = (s * s + (c - 1.0) * (c - 1.0)).sqrt();
        let b = (s * s + (c + 1.0) * (c + 1.0)).sqrt();
        let w = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(s / a, 0.0),
                c64(s / b, 0.0),
                c64((c - 1.0) / a, 0.0),
                c64((c + 1.0) / b, 0.0),
            ],
        );
        let p0 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        let q0 = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(s * s, 0.0),
                c64(s * c, 0.0),
                c64(s * c, 0.0),
                c64(c * c, 0.0),
            ],
        );
        embed_plane(&mut p, &mut q, &plane(&vecs, hi, lo), &w, &p0, &q0);
    }
    Ok(CertificatePair::new(
        p,
        q,
        CertificateKind::ProjectionDifference,
        h.clone(),
    ))
}

/// Hermitian `K'` within `eps` of hermitian `K` with exactly symmetric
/// spectrum: eigenvalues in `(−eps, eps)` are set to 0 and each negative
/// eigenvalue is replaced by the negation of its positive partner.
pub fn symmetrize_spectrum(k: &ComplexMatrix, eps: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    validate(k)?;
    tol.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let skew = norm2(&(k - k.adjoint()));
    if skew > tol.residual * norm2(k).max(1.0) {
        return Err(Error::Precondition(format!(
            "input is not hermitian: ||K - K*|| = {skew:.3e}"
        )));
    }
    let (vals, vecs) = hermitian_eigen(k);
    let mut plus: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= eps).collect();
    let minus: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= -eps).collect();
    plus.reverse();
    let mut unmatched: Vec<C64> = Vec::new();
    let mut new_vals = vec![0.0; vals.len()];
    for (&ip, &im) in plus.iter().zip(&minus) {
        if (vals[ip] + vals[im]).abs() >= eps {
            unmatched.extend([c64(vals[ip], 0.0), c64(vals[im], 0.0)]);
        }
        new_vals[ip] = vals[ip];
        new_vals[im] = -vals[ip];
    }
    let paired = plus.len().min(minus.len());
    unmatched.extend(
        plus[paired..]
            .iter()
            .chain(&minus[paired..])
            .map(|&i| c64(vals[i], 0.0)),
    );
    if !unmatched.is_empty() {
        return Err(Error::Pairing { unmatched });
    }
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        new_vals.iter().map(|&x| c64(x, 0.0)),
    ));
    let out = &vecs * d * vecs.adjoint();
    Ok((&out + out.adjoint()) * c64(0.5, 0.0))
}
