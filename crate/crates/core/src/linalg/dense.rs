//! Small dense helpers shared by every module: construction, norms,
//! conditioning, and the triangular solves the certificate builders lean on.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix. All public entry points check squareness and
/// finiteness with [`validate`].
pub type ComplexMatrix = DMatrix<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

pub fn diag(values: &[C64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            values[i]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Builds a matrix from real row slices.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn from_rows(rows: &[&[C64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Checks the carrier invariants: square, every entry finite.
pub fn validate(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Singular value decomposition `m = U·diag(σ)·V*` with `σ` non-increasing
/// and thin factors (`U` is `r×k`, `V` is `c×k`, `k = min(r, c)`).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    fn defect(&self, m: &ComplexMatrix) -> f64 {
        let k = self.singular_values.len();
        let sigma = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                c64(self.singular_values[i], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let recon = (&self.u * sigma * self.v.adjoint() - m).norm() / scale;
        let ortho_u = (self.u.adjoint() * &self.u - identity(k)).norm();
        let ortho_v = (self.v.adjoint() * &self.v - identity(k)).norm();
        recon.max(ortho_u).max(ortho_v)
    }

    fn sorted(svd: nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>) -> Self {
        let u = svd.u.expect("left singular vectors requested");
        let v = svd.v_t.expect("right singular vectors requested").adjoint();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        Svd {
            u: DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]),
            singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
            v: DMatrix::from_fn(v.nrows(), order.len(), |i, j| v[(i, order[j])]),
        }
    }
}

/// Thin SVD from faer, sorted by decreasing singular value.
fn faer_svd(m: &ComplexMatrix) -> Option<Svd> {
    let (r, c) = m.shape();
    let a = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = a.thin_svd().ok()?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let k = r.min(c);
    Some(Svd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        singular_values: (0..k).map(|i| s[i].re).collect(),
        v: DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
    })
}

/// Verified SVD. nalgebra's complex SVD with vectors occasionally returns
/// factors that do not reconstruct the input; the result is checked and,
/// on failure, recomputed with faer.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let (r, c) = m.shape();
    if r < c {
        let t = svd(&m.adjoint());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let tol = 64.0 * f64::EPSILON * (r.max(1) as f64);
    let direct = Svd::sorted(m.clone().svd(true, true));
    let direct_defect = direct.defect(m);
    if direct_defect <= tol || c == 0 {
        return direct;
    }
    match faer_svd(m) {
        Some(alt) if alt.defect(m) < direct_defect => alt,
        _ => direct,
    }
}

/// Spectral norm.
pub fn norm2(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number; infinite for singular input, 1 for the empty matrix.
pub fn cond2(m: &ComplexMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn direct_sum(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("matrix is singular".into()))
}

/// Eigenvector matrix `V` (unit diagonal, upper triangular) of an upper
/// triangular `r` whose diagonal entries are pairwise distinct, so that
/// `V⁻¹ r V = diag(r)`.
pub fn upper_triangular_eigenvectors(r: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = r.nrows();
    let mut v = identity(n);
    for j in 0..n {
        let lambda = r[(j, j)];
        for i in (0..j).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for k in (i + 1)..=j {
                acc += r[(i, k)] * v[(k, j)];
            }
            let gap = r[(i, i)] - lambda;
            if gap.norm() == 0.0 {
                return Err(Error::RepeatedEntry {
                    first: i,
                    second: j,
                    value: lambda,
                });
            }
            v[(i, j)] = -acc / gap;
        }
    }
    Ok(v)
}

/// Inverse of a unit upper triangular matrix by back substitution.
pub fn unit_upper_inverse(v: &ComplexMatrix) -> ComplexMatrix {
    let n = v.nrows();
    let mut inv = identity(n);
    for j in 0..n {
        for i in (0..j).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for k in (i + 1)..=j {
                acc += v[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -acc / v[(i, i)];
        }
    }
    inv
}

/// Eigen-decomposition of the hermitian part of `h`, eigenvalues ascending,
/// eigenvectors as the matching columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0));
    }
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Defect of an idempotent, measured relative to the rounding level of `E²`.
pub fn idempotent_defect(e: &ComplexMatrix) -> f64 {
    let d = norm2(&(e * e - e));
    d / norm2(e).powi(2).max(1.0)
}

/// Defect of an orthogonal projection: worst of idempotent and hermitian defects.
pub fn projection_defect(p: &ComplexMatrix) -> f64 {
    idempotent_defect(p).max(norm2(&(p - p.adjoint())) / norm2(p).max(1.0))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.trace()
}
