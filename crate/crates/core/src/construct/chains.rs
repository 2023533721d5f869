//! Jordan chain bases and chain-wise perturbation of balanced matrices.

use std::f64::consts::PI;

use nalgebra::DVector;

use super::idempotent::assemble_diag_pairs;
use super::CertificateKind;
use crate::linalg::{
    c64, direct_sum, identity, svd, unit_upper_inverse, upper_triangular_eigenvectors,
    ComplexMatrix, C64,
};

/// The `k` left singular vectors of `m` with largest singular values.
fn leading_left_vectors(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = m.nrows();
    if k == 0 || m.ncols() == 0 {
        return ComplexMatrix::zeros(n, 0);
    }
    svd(m).u.columns(0, k).into_owned()
}

/// Orthonormal basis of the `d`-dimensional numerical kernel of square `m`.
fn kernel_basis(m: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let n = m.nrows();
    svd(m).v.columns(n - d, d).into_owned()
}

pub(super) fn hstack(n: usize, blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(n, cols);
    let mut off = 0;
    for b in blocks {
        out.columns_mut(off, b.ncols()).copy_from(b);
        off += b.ncols();
    }
    out
}

/// Jordan chains of `z` at `lambda` for the given Segre sequence (sorted
/// decreasingly). Each chain is returned as the columns
/// `(N^{p−1} v, …, N v, v)` with `N = z − λ I` and `‖v‖ = 1`, so that
/// `z · chain = chain · (λ I + J_p)`.
pub(super) fn jordan_chains(z: &ComplexMatrix, lambda: C64, segre: &[usize]) -> Vec<ComplexMatrix> {
    let n = z.nrows();
    let Some(&lmax) = segre.first() else {
        return Vec::new();
    };
    let mut nm = z.clone();
    for i in 0..n {
        nm[(i, i)] -= lambda;
    }
    let at_least = |p: usize| segre.iter().filter(|&&m| m >= p).count();
    let mut kernels = vec![ComplexMatrix::zeros(n, 0)];
    let mut power = identity(n);
    let mut dim = 0;
    for p in 1..=lmax {
        power = &nm * power;
        dim += at_least(p);
        kernels.push(kernel_basis(&power, dim));
    }
    let mut tops: Vec<(usize, DVector<C64>)> = Vec::new();
    let mut level: Vec<DVector<C64>> = Vec::new();
    for p in (1..=lmax).rev() {
        let fresh = at_least(p) - at_least(p + 1);
        if fresh > 0 {
            let mut known = ComplexMatrix::zeros(n, level.len());
            for (j, v) in level.iter().enumerate() {
                known.set_column(j, v);
            }
            let known = hstack(n, &[&kernels[p - 1], &known]);
            let q = leading_left_vectors(&known, known.ncols());
            let kp = &kernels[p];
            let residual = kp - &q * (q.adjoint() * kp);
            let new = leading_left_vectors(&residual, fresh);
            for j in 0..fresh {
                let v: DVector<C64> = new.column(j).into_owned();
                tops.push((p, v.clone()));
                level.push(v);
            }
        }
        level = level.iter().map(|v| &nm * v).collect();
    }
    tops.into_iter()
        .map(|(p, v)| {
            let mut chain = ComplexMatrix::zeros(n, p);
            let mut w = v;
            for i in (0..p).rev() {
                chain.set_column(i, &w);
                w = &nm * w;
            }
            chain
        })
        .collect()
}

/// Upper bidiagonal block with the given diagonal and unit superdiagonal.
pub(super) fn bidiagonal(values: &[C64]) -> ComplexMatrix {
    let m = values.len();
    let mut b = ComplexMatrix::zeros(m, m);
    for (i, &v) in values.iter().enumerate() {
        b[(i, i)] = v;
        if i + 1 < m {
            b[(i, i + 1)] = c64(1.0, 0.0);
        }
    }
    b
}

/// One block of the chain basis with its own perturbation rule.
enum Piece {
    /// Chains at `λ` followed by chains at `−λ`, realized around `±mid`.
    Pair {
        plus: Vec<usize>,
        minus: Vec<usize>,
        mid: C64,
    },
    /// Cells at 0 of size at least 3, spread over a circle around 0.
    ZeroLarge(Vec<usize>),
    /// Cells at 0 of size at most 2, realized exactly.
    ZeroSmall(Vec<usize>),
}

impl Piece {
    fn sizes(&self) -> Vec<usize> {
        match self {
            Piece::Pair { plus, minus, .. } => plus.iter().chain(minus).copied().collect(),
            Piece::ZeroLarge(s) | Piece::ZeroSmall(s) => s.clone(),
        }
    }

    /// Diagonal values per cell and the `(p, q, β)` position pairs, local
    /// to the piece, for perturbation size `rho`.
    fn values(&self, rho: f64) -> (Vec<Vec<C64>>, Vec<(usize, usize, C64)>) {
        let sizes = self.sizes();
        let total: usize = sizes.iter().sum();
        let mut flat = vec![c64(0.0, 0.0); total];
        let mut pairs = Vec::new();
        match self {
            Piece::Pair { plus, minus, mid } => {
                let s: usize = plus.iter().sum();
                let defective = plus.iter().chain(minus).any(|&m| m > 1);
                for k in 0..s {
                    let shift = if defective {
                        C64::from_polar(rho, 2.0 * PI * (k as f64 + 0.5) / s as f64)
                    } else {
                        c64(0.0, 0.0)
                    };
                    let beta = mid + shift;
                    flat[k] = beta;
                    flat[s + k] = -beta;
                    pairs.push((k, s + k, beta));
                }
                debug_assert_eq!(s, minus.iter().sum::<usize>());
            }
            Piece::ZeroLarge(_) => {
                let half = total / 2;
                for k in 0..half {
                    let beta = C64::from_polar(rho, PI * (k as f64 + 0.25) / half as f64);
                    flat[k] = beta;
                    flat[k + half] = -beta;
                    pairs.push((k, k + half, beta));
                }
            }
            Piece::ZeroSmall(_) => {}
        }
        let mut cells = Vec::with_capacity(sizes.len());
        let mut off = 0;
        for &m in &sizes {
            cells.push(flat[off..off + m].to_vec());
            off += m;
        }
        (cells, pairs)
    }
}

/// Chain basis of a balanced matrix together with its pieces.
pub(super) struct ChainBasis {
    basis: ComplexMatrix,
    inverse: ComplexMatrix,
    pieces: Vec<Piece>,
    min_mid: f64,
}

/// A perturbed Jordan matrix in the chain basis, its eigenvector matrix and
/// the idempotent pair on the eigenvector coordinates.
pub(super) struct ChainModel {
    pub jordan: ComplexMatrix,
    pub vectors: ComplexMatrix,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

impl ChainBasis {
    /// Collects Jordan chains for every cluster pair `(i, partners[i])` and
    /// for the cluster at 0, given Segre sequences per cluster.
    pub(super) fn new(
        t: &ComplexMatrix,
        centers: &[C64],
        segres: &[Vec<usize>],
        partners: &[Option<usize>],
    ) -> Option<Self> {
        let n = t.nrows();
        let mut chains = Vec::new();
        let mut pieces = Vec::new();
        let mut min_mid = f64::INFINITY;
        for i in 0..centers.len() {
            let j = partners[i]?;
            if j < i {
                continue;
            }
            if j == i {
                let large: Vec<usize> = segres[i].iter().copied().filter(|&m| m >= 3).collect();
                let small: Vec<usize> = segres[i].iter().copied().filter(|&m| m < 3).collect();
                chains.extend(jordan_chains(t, centers[i], &segres[i]));
                if !large.is_empty() {
                    pieces.push(Piece::ZeroLarge(large));
                }
                if !small.is_empty() {
                    pieces.push(Piece::ZeroSmall(small));
                }
            } else {
                chains.extend(jordan_chains(t, centers[i], &segres[i]));
                chains.extend(jordan_chains(t, centers[j], &segres[j]));
                let mid = (centers[i] - centers[j]) / 2.0;
                min_mid = min_mid.min(mid.norm());
                pieces.push(Piece::Pair {
                    plus: segres[i].clone(),
                    minus: segres[j].clone(),
                    mid,
                });
            }
        }
        let refs: Vec<&ComplexMatrix> = chains.iter().collect();
        let basis = hstack(n, &refs);
        if basis.ncols() != n {
            return None;
        }
        let inverse = basis.clone().try_inverse()?;
        Some(ChainBasis {
            basis,
            inverse,
            pieces,
            min_mid,
        })
    }

    pub(super) fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub(super) fn inverse(&self) -> &ComplexMatrix {
        &self.inverse
    }

    /// Largest perturbation size that keeps the `±mid` values of distinct
    /// pieces apart from their negatives.
    pub(super) fn rho_cap(&self) -> f64 {
        0.5 * self.min_mid
    }

    /// Perturbed Jordan matrix for perturbation size `rho`.
    pub(super) fn jordan(&self, rho: f64) -> ComplexMatrix {
        let blocks: Vec<ComplexMatrix> = self
            .pieces
            .iter()
            .flat_map(|p| p.values(rho).0.into_iter().map(|v| bidiagonal(&v)))
            .collect();
        direct_sum(&blocks)
    }

    /// Model for perturbation size `rho`, with `[left, right]` or
    /// `left − right` (by `kind`) equal to the perturbed Jordan matrix.
    pub(super) fn model(&self, rho: f64, kind: CertificateKind) -> Option<ChainModel> {
        let n = self.basis.ncols();
        let mut vectors = Vec::new();
        let mut left = ComplexMatrix::zeros(n, n);
        let mut right = ComplexMatrix::zeros(n, n);
        let mut off = 0;
        for piece in &self.pieces {
            let (cells, pairs) = piece.values(rho);
            match piece {
                Piece::ZeroSmall(sizes) => {
                    let mut pos = off;
                    for &m in sizes {
                        vectors.push(identity(m));
                        // [P, F] = J₂ with P = e₁e₁*, F = e₁(e₁ + e₂)*, and
                        // J₂ = e₁(e₁ + e₂)* − e₁e₁*
                        if m == 2 {
                            let (with_edge, plain) = if kind.is_commutator() {
                                (&mut right, &mut left)
                            } else {
                                (&mut left, &mut right)
                            };
                            plain[(pos, pos)] = c64(1.0, 0.0);
                            with_edge[(pos, pos)] = c64(1.0, 0.0);
                            with_edge[(pos, pos + 1)] = c64(1.0, 0.0);
                        }
                        pos += m;
                    }
                }
                _ => {
                    for cell in &cells {
                        vectors.push(upper_triangular_eigenvectors(&bidiagonal(cell)).ok()?);
                    }
                    let global: Vec<(usize, usize, C64)> = pairs
                        .iter()
                        .map(|&(p, q, b)| (off + p, off + q, b))
                        .collect();
                    let (e, f) = assemble_diag_pairs(n, &global, kind);
                    left += e;
                    right += f;
                }
            }
            off += cells.iter().map(|c| c.len()).sum::<usize>();
        }
        let v = direct_sum(&vectors);
        let v_inv = unit_upper_inverse(&v);
        Some(ChainModel {
            jordan: self.jordan(rho),
            left: &v * left * &v_inv,
            right: &v * right * &v_inv,
            vectors: unit_columns(&v),
        })
    }
}

/// `v` with every column scaled to unit length. Conjugating a diagonal
/// certificate by a diagonal scaling leaves its combination unchanged, so
/// this is the eigenvector basis whose conditioning matters.
pub(super) fn unit_columns(v: &ComplexMatrix) -> ComplexMatrix {
    let mut out = v.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= C64::new(norm, 0.0);
        }
    }
    out
}
