//! Idempotent pairs for commutator and difference targets.

use std::f64::consts::PI;

use super::chains::{unit_columns, ChainBasis};
use super::{Approximant, CertificateKind, CertificatePair};
use crate::classify::is_balanced;
use crate::classify::spectral::{is_zero_cluster, negation_partners};
use crate::error::{Error, Result};
use crate::linalg::{
    analyze, c64, cluster_segre, cond2, idempotent_defect, invert, norm2, svd, unit_upper_inverse,
    upper_triangular_eigenvectors, validate, ComplexMatrix, SpectralAnalysis, Tolerances, C64,
};

const MAX_RETRIES: usize = 8;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// The 2×2 idempotents `E = [[1, t], [0, 0]]`, `F = [[1, 0], [1, 0]]`
/// conjugated by the eigenvectors of `[E, F]`, so that their commutator is
/// `diag(β, −β)`. Here `t² + t = β²` with the principal square root.
fn diag_pair_block(beta: C64) -> (ComplexMatrix, ComplexMatrix) {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    let t = (-one + (one + beta * beta * 4.0).sqrt()) / 2.0;
    let e = ComplexMatrix::from_row_slice(2, 2, &[one, t, zero, zero]);
    let f = ComplexMatrix::from_row_slice(2, 2, &[one, zero, one, zero]);
    // eigenvectors (t, t − λ) of [[t, −t], [−1, −t]] for λ = ±β
    let p = ComplexMatrix::from_row_slice(2, 2, &[t, t, t - beta, t + beta]);
    let det = t * (t + beta) - t * (t - beta);
    let p_inv = ComplexMatrix::from_row_slice(2, 2, &[t + beta, -t, -(t - beta), t]) / det;
    (&p_inv * e * &p, &p_inv * f * &p)
}

/// The 2×2 idempotents `G = U[[1, β], [0, 0]]U` and `H = U[[1, 0], [−β, 0]]U`
/// with `U = (1/√2)[[1, 1], [1, −1]]`, so that `G − H = diag(β, −β)`.
fn diff_pair_block(beta: C64) -> (ComplexMatrix, ComplexMatrix) {
    let half = c64(0.5, 0.0);
    let a = beta * half;
    let g = ComplexMatrix::from_row_slice(2, 2, &[half + a, half - a, half + a, half - a]);
    let h = ComplexMatrix::from_row_slice(2, 2, &[half - a, half - a, half + a, half + a]);
    (g, h)
}

/// Places one 2×2 block per position pair `(p, q)` with value `β` at `p` and
/// `−β` at `q`, realized as a commutator or a difference according to `kind`.
pub(super) fn assemble_diag_pairs(
    n: usize,
    pairs: &[(usize, usize, C64)],
    kind: CertificateKind,
) -> (ComplexMatrix, ComplexMatrix) {
    let mut e = ComplexMatrix::zeros(n, n);
    let mut f = ComplexMatrix::zeros(n, n);
    for &(p, q, beta) in pairs {
        let (eb, fb) = if kind.is_commutator() {
            diag_pair_block(beta)
        } else {
            diff_pair_block(beta)
        };
        let idx = [p, q];
        for a in 0..2 {
            for b in 0..2 {
                e[(idx[a], idx[b])] = eb[(a, b)];
                f[(idx[a], idx[b])] = fb[(a, b)];
            }
        }
    }
    (e, f)
}

/// Exact commutator certificate for a diagonal matrix whose entries are
/// pairwise distinct and symmetric under negation (one zero allowed).
pub fn coi_pair_diag_balanced(d: &ComplexMatrix, tol: &Tolerances) -> Result<CertificatePair> {
    validate(d)?;
    tol.validate()?;
    let n = d.nrows();
    let scale = norm2(d);
    let mut off = d.clone();
    off.fill_diagonal(c64(0.0, 0.0));
    if norm2(&off) > tol.residual * scale.max(1.0) {
        return Err(Error::Precondition("input is not diagonal".into()));
    }
    let beta: Vec<C64> = d.diagonal().iter().copied().collect();
    let slack = tol.eig_cluster * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            if (beta[i] - beta[j]).norm() <= slack {
                return Err(Error::RepeatedEntry {
                    first: i,
                    second: j,
                    value: beta[i],
                });
            }
        }
    }
    let mut used = vec![false; n];
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for i in 0..n {
        if used[i] || beta[i].norm() <= slack {
            continue;
        }
        used[i] = true;
        let partner = (0..n)
            .filter(|&j| !used[j] && (beta[j] + beta[i]).norm() <= slack)
            .min_by(|&a, &b| {
                (beta[a] + beta[i])
                    .norm()
                    .total_cmp(&(beta[b] + beta[i]).norm())
            });
        match partner {
            Some(j) => {
                used[j] = true;
                pairs.push((i, j, (beta[i] - beta[j]) / 2.0));
            }
            None => unmatched.push(beta[i]),
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::Pairing { unmatched });
    }
    let (e, f) = assemble_diag_pairs(n, &pairs, CertificateKind::IdempotentCommutator);
    Ok(CertificatePair::new(
        e,
        f,
        CertificateKind::IdempotentCommutator,
        d.clone(),
    ))
}

/// Schur positions paired under negation, with the common midpoint of the
/// two clusters and the size of the group of pairs the pair belongs to.
struct PositionPair {
    p: usize,
    q: usize,
    mid: C64,
    zero: bool,
    index: usize,
    group: usize,
}

/// ε-approximant of a balanced matrix by a commutator of idempotents.
///
/// The Schur diagonal is replaced by distinct values `β` forming exact
/// `±` pairs within `eps` of the eigenvalues; the resulting triangular
/// matrix is diagonalized and the diagonal certificate pulled back.
pub fn coi_approximant(t: &ComplexMatrix, eps: f64, tol: &Tolerances) -> Result<Approximant> {
    balanced_approximant(t, eps, tol, CertificateKind::IdempotentCommutator)
}

/// ε-approximant of a balanced matrix by a commutator or a difference of
/// idempotents, built on the same perturbed diagonalization.
pub(super) fn balanced_approximant(
    t: &ComplexMatrix,
    eps: f64,
    tol: &Tolerances,
    kind: CertificateKind,
) -> Result<Approximant> {
    validate(t)?;
    tol.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let n = t.nrows();
    if norm2(t) == 0.0 {
        let z = ComplexMatrix::zeros(n, n);
        return Ok(Approximant {
            pair: CertificatePair::new(z.clone(), z.clone(), kind, t.clone()),
            x: z,
            cond: 1.0,
            attempts: 1,
        });
    }
    if !is_balanced(t, tol)?.verdict {
        return Err(Error::Precondition("input spectrum is not balanced".into()));
    }
    let a = analyze(t, tol)?;
    let report = &a.report;
    let partners = negation_partners(report);
    let mut pairs: Vec<PositionPair> = Vec::new();
    let mut single: Option<usize> = None;
    for i in 0..report.clusters.len() {
        let j = partners[i].expect("balanced input has a partner for every cluster");
        if j < i {
            continue;
        }
        let pi = a.members(i);
        if j == i {
            debug_assert!(is_zero_cluster(report, i));
            let group = pi.len() / 2;
            for (k, w) in pi.chunks(2).enumerate() {
                if w.len() == 2 {
                    pairs.push(PositionPair {
                        p: w[0],
                        q: w[1],
                        mid: c64(0.0, 0.0),
                        zero: true,
                        index: k,
                        group,
                    });
                } else {
                    single = Some(w[0]);
                }
            }
        } else {
            let pj = a.members(j);
            let mid = (report.clusters[i].center - report.clusters[j].center) / 2.0;
            for (k, (&p, &q)) in pi.iter().zip(&pj).enumerate() {
                pairs.push(PositionPair {
                    p,
                    q,
                    mid,
                    zero: false,
                    index: k,
                    group: pi.len(),
                });
            }
        }
    }

    let spread = report.clusters.iter().map(|c| c.spread).fold(0.0, f64::max);
    let u = &a.schur.u;
    let r = &a.schur.r;
    let mut best_residual = f64::INFINITY;
    for attempt in 0..=MAX_RETRIES {
        let radius = (0.9 * eps * (1.0 - 0.1 * attempt as f64).max(0.5) - spread).max(0.05 * eps);
        let phase = attempt as f64 * GOLDEN;
        let mut xr = r.clone();
        let mut diag_pairs = Vec::with_capacity(pairs.len());
        for pp in &pairs {
            let beta = pair_value(pp, radius, phase);
            xr[(pp.p, pp.p)] = beta;
            xr[(pp.q, pp.q)] = -beta;
            diag_pairs.push((pp.p, pp.q, beta));
        }
        if let Some(s) = single {
            xr[(s, s)] = c64(0.0, 0.0);
        }
        let v = match upper_triangular_eigenvectors(&xr) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let cond = cond2(&unit_columns(&v));
        if !cond.is_finite() || cond > tol.cond_cap {
            continue;
        }
        let v_inv = unit_upper_inverse(&v);
        let (ed, fd) = assemble_diag_pairs(n, &diag_pairs, kind);
        let m = u * &v;
        let m_inv = &v_inv * u.adjoint();
        let e = &m * ed * &m_inv;
        let f = &m * fd * &m_inv;
        let x = u * &xr * u.adjoint();
        let pair = CertificatePair::new(e, f, kind, t.clone());
        if pair.target_residual < eps && pair.structure_residual <= tol.residual {
            return Ok(Approximant {
                pair,
                x,
                cond,
                attempts: attempt + 1,
            });
        }
        best_residual = best_residual.min(pair.target_residual);
    }
    chain_approximant(t, &a, &partners, eps, tol, kind).map_err(|e| match e {
        Error::RetriesExhausted {
            best_residual: chained,
            ..
        } => Error::RetriesExhausted {
            attempts: 2 * (MAX_RETRIES + 1),
            best_residual: best_residual.min(chained),
        },
        other => other,
    })
}

/// Fallback for defective clusters: in a Jordan chain basis each cell is
/// perturbed on its own, and cells of size at most 2 at 0 are realized
/// exactly, so the eigenvector conditioning grows only with the cell sizes.
fn chain_approximant(
    t: &ComplexMatrix,
    a: &SpectralAnalysis,
    partners: &[Option<usize>],
    eps: f64,
    tol: &Tolerances,
    kind: CertificateKind,
) -> Result<Approximant> {
    let clusters = &a.report.clusters;
    let centers: Vec<C64> = clusters.iter().map(|c| c.center).collect();
    let segres = (0..clusters.len())
        .map(|i| cluster_segre(a, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let chains = ChainBasis::new(t, &centers, &segres, partners)
        .ok_or_else(|| Error::Precondition("Jordan chain basis is singular".into()))?;
    let lift = |m: &ComplexMatrix| chains.basis() * m * chains.inverse();
    let exact = chains.jordan(0.0);
    let base = norm2(&(lift(&exact) - t));
    let slope = norm2(&lift(&(chains.jordan(1.0) - &exact)));
    let mut best_residual = f64::INFINITY;
    for attempt in 0..=MAX_RETRIES {
        let budget = 0.9 * eps * (1.0 - 0.1 * attempt as f64).max(0.5) - base;
        if budget <= 0.0 {
            break;
        }
        let rho = if slope > 0.0 {
            (budget / slope).min(chains.rho_cap())
        } else {
            0.0
        };
        let Some(model) = chains.model(rho, kind) else {
            continue;
        };
        let m = chains.basis() * &model.vectors;
        let cond = cond2(&m);
        if !cond.is_finite() || cond > tol.cond_cap {
            continue;
        }
        let e = lift(&model.left);
        let f = lift(&model.right);
        let pair = CertificatePair::new(e, f, kind, t.clone());
        if pair.target_residual < eps && pair.structure_residual <= tol.residual {
            return Ok(Approximant {
                pair,
                x: lift(&model.jordan),
                cond,
                attempts: attempt + 1,
            });
        }
        best_residual = best_residual.min(pair.target_residual);
        if slope == 0.0 {
            break;
        }
    }
    Err(Error::RetriesExhausted {
        attempts: MAX_RETRIES + 1,
        best_residual,
    })
}

/// Perturbed value for a position pair: the midpoint itself when the pair is
/// alone in its group, otherwise a point on a circle of radius `radius`
/// around it, evenly spaced within the group. Pairs at 0 are spread over a
/// sector of the right half plane so that no value meets the negative of
/// another. Even spacing keeps the eigenvector conditioning of the perturbed
/// Jordan blocks as small as the budget allows.
fn pair_value(pp: &PositionPair, radius: f64, phase: f64) -> C64 {
    let k = pp.index as f64;
    let m = pp.group.max(1) as f64;
    let turn = phase.fract();
    if pp.zero {
        let angle = 0.9 * PI * ((k + 0.25 + 0.5 * turn) / m - 0.5);
        C64::from_polar(radius, angle)
    } else if pp.group == 1 {
        pp.mid
    } else {
        let angle = 2.0 * PI * (k + turn) / m;
        pp.mid + C64::from_polar(radius, angle)
    }
}

/// Exact commutator certificate `[P, F] = N` for `N ≠ 0` with `N² = 0`.
pub fn coi_pair_nilpotent_order2(
    n_mat: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<CertificatePair> {
    validate(n_mat)?;
    tol.validate()?;
    let n = n_mat.nrows();
    let s = norm2(n_mat);
    if s == 0.0 {
        return Err(Error::Precondition("N must be nonzero".into()));
    }
    let defect = norm2(&(n_mat * n_mat)) / (s * s);
    if defect > tol.residual {
        return Err(Error::NotNilpotentOrder2 { defect });
    }
    let (_, v, rank) = ordered_svd(n_mat, tol.rank_rel);
    let v_r = v.columns(0, rank).into_owned();
    let v_null = v.columns(rank, n - rank).into_owned();
    let x = v_null.adjoint() * n_mat * &v_r;
    let p = &v_null * v_null.adjoint();
    let f = &p + &v_null * x * v_r.adjoint();
    Ok(CertificatePair::new(
        p,
        f,
        CertificateKind::IdempotentCommutator,
        n_mat.clone(),
    ))
}

/// Left and right singular vectors ordered by decreasing singular value,
/// with the numerical rank at `rank_rel`.
fn ordered_svd(m: &ComplexMatrix, rank_rel: f64) -> (ComplexMatrix, ComplexMatrix, usize) {
    let dec = svd(m);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let rank = dec
        .singular_values
        .iter()
        .filter(|&&x| x > rank_rel * smax)
        .count();
    (dec.u, dec.v, rank)
}

/// Turns a commutator certificate `[E, F]` into a difference certificate
/// `G − H = [E, F]` by the block identity
/// `[[0, F₂], [−F₃, 0]] = [[I, F₂], [0, 0]] − [[I, 0], [F₃, 0]]`
/// in a basis adapted to `ran E ⊕ ker E`.
pub fn coi_to_doi(
    e: &ComplexMatrix,
    f: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<CertificatePair> {
    validate(e)?;
    validate(f)?;
    tol.validate()?;
    if e.nrows() != f.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "E is {0}x{0}, F is {1}x{1}",
            e.nrows(),
            f.nrows()
        )));
    }
    for m in [e, f] {
        let defect = idempotent_defect(m);
        if defect > tol.residual {
            return Err(Error::NotIdempotent { defect });
        }
    }
    let n = e.nrows();
    let target = e * f - f * e;
    let (u, v, k) = ordered_svd(e, tol.rank_rel);
    let mut s = ComplexMatrix::zeros(n, n);
    s.columns_mut(0, k).copy_from(&u.columns(0, k));
    s.columns_mut(k, n - k).copy_from(&v.columns(k, n - k));
    let s_inv = invert(&s)?;
    let fp = &s_inv * f * &s;
    let mut g = ComplexMatrix::zeros(n, n);
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..k {
        g[(i, i)] = c64(1.0, 0.0);
        h[(i, i)] = c64(1.0, 0.0);
    }
    g.view_mut((0, k), (k, n - k))
        .copy_from(&fp.view((0, k), (k, n - k)));
    h.view_mut((k, 0), (n - k, k))
        .copy_from(&fp.view((k, 0), (n - k, k)));
    let g = &s * g * &s_inv;
    let h = &s * h * &s_inv;
    Ok(CertificatePair::new(
        g,
        h,
        CertificateKind::IdempotentDifference,
        target,
    ))
}

/// `E = [[1, α], [0, 0]]`, `F = [[1, 0], [−α, 0]]` with
/// `E − F = [[0, α], [α, 0]]`, together with the unitary
/// `(1/√2)[[1, 1], [1, −1]]` that carries `E − F` to `diag(α, −α)`.
pub fn doi_pair_plusminus(alpha: C64) -> (CertificatePair, ComplexMatrix) {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u =
        ComplexMatrix::from_row_slice(2, 2, &[c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)]);
    let target = ComplexMatrix::from_row_slice(2, 2, &[zero, alpha, alpha, zero]);
    if alpha == zero {
        let z = ComplexMatrix::zeros(2, 2);
        return (
            CertificatePair::new(z.clone(), z, CertificateKind::IdempotentDifference, target),
            u,
        );
    }
    let e = ComplexMatrix::from_row_slice(2, 2, &[one, alpha, zero, zero]);
    let f = ComplexMatrix::from_row_slice(2, 2, &[one, zero, -alpha, zero]);
    (
        CertificatePair::new(e, f, CertificateKind::IdempotentDifference, target),
        u,
    )
}
