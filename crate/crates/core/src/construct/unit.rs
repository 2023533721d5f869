//! Difference-of-idempotents approximants, built from Jordan chains at
//! `±1` and a perturbed diagonalization on the rest of the spectrum.

use std::f64::consts::PI;

use super::chains::{bidiagonal, hstack, jordan_chains, unit_columns};
use super::idempotent::{assemble_diag_pairs, balanced_approximant};
use super::{Approximant, CertificateKind, CertificatePair};
use crate::classify::in_clos_doi;
use crate::classify::spectral::{is_near, is_unit_cluster};
use crate::error::{Error, Result};
use crate::linalg::{
    analyze, c64, cluster_segre, cond2, direct_sum, identity, invert, norm2, split_by_clusters,
    unit_upper_inverse, upper_triangular_eigenvectors, validate, ComplexMatrix, Tolerances, C64,
};

const MAX_RETRIES: usize = 8;

/// Which coordinates of the chain basis carry a `1` and which carry the
/// pair `(d_ℓ, −d_ℓ)`.
struct Layout {
    chains: Vec<Vec<C64>>,
    ones: Vec<usize>,
    pairs: Vec<(usize, usize, C64)>,
}

/// Diagonal values per chain: the first `anchored` plus chains start with a
/// 1 and continue with fresh values `d_ℓ`, the remaining active plus chains
/// take only fresh values, peeled chains hold a single 1, and the minus
/// chains take the negated values in order. The fresh values lie on a
/// circle of radius `delta` around 1.
fn layout(plus: &[usize], minus: &[usize], anchored: usize, peeled: usize, delta: f64) -> Layout {
    let s: usize = minus.iter().sum();
    let d = |l: usize| {
        if delta == 0.0 {
            c64(1.0, 0.0)
        } else {
            c64(1.0, 0.0) + C64::from_polar(delta, 2.0 * PI * (l as f64 + 0.5) / s as f64)
        }
    };
    let active = plus.len() - peeled;
    let mut chains = Vec::new();
    let mut ones = Vec::new();
    let mut plus_pos = Vec::new();
    let mut pos = 0;
    let mut next = 0;
    for (j, &m) in plus.iter().enumerate() {
        let mut vals = Vec::with_capacity(m);
        for i in 0..m {
            if j >= active || (j < anchored && i == 0) {
                vals.push(c64(1.0, 0.0));
                ones.push(pos);
            } else {
                vals.push(d(next));
                plus_pos.push(pos);
                next += 1;
            }
            pos += 1;
        }
        chains.push(vals);
    }
    let mut pairs = Vec::new();
    let mut l = 0;
    for &m in minus {
        let mut vals = Vec::with_capacity(m);
        for _ in 0..m {
            vals.push(-d(l));
            pairs.push((plus_pos[l], pos, d(l)));
            pos += 1;
            l += 1;
        }
        chains.push(vals);
    }
    Layout {
        chains,
        ones,
        pairs,
    }
}

/// Idempotent pair `(G, H)` on the diagonal coordinates: `G − H` is the
/// diagonal of the layout.
fn diagonal_certificate(n: usize, lay: &Layout) -> (ComplexMatrix, ComplexMatrix) {
    let (mut g, h) = assemble_diag_pairs(n, &lay.pairs, CertificateKind::IdempotentDifference);
    for &o in &lay.ones {
        g[(o, o)] = c64(1.0, 0.0);
    }
    (g, h)
}

fn zero_approximant(t: &ComplexMatrix) -> Approximant {
    let n = t.nrows();
    let z = ComplexMatrix::zeros(n, n);
    Approximant {
        pair: CertificatePair::new(
            z.clone(),
            z.clone(),
            CertificateKind::IdempotentDifference,
            t.clone(),
        ),
        x: z,
        cond: 1.0,
        attempts: 1,
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

/// ε-approximant by a difference of idempotents for a matrix with spectrum
/// in `{1, −1}`, integral trace `r ≥ 0` and `nul(Z − I) ≥ r`.
///
/// In a Jordan chain basis the unit blocks are perturbed on the diagonal
/// only, to distinct values that are either 1 or exact pairs `±d`; the
/// perturbed matrix is then diagonalized and each pair realized by a 2×2
/// difference.
pub fn doi_approximant_pm1(z: &ComplexMatrix, eps: f64, tol: &Tolerances) -> Result<Approximant> {
    validate(z)?;
    tol.validate()?;
    check_eps(eps)?;
    let n = z.nrows();
    let a = analyze(z, tol)?;
    let report = &a.report;
    if let Some(i) = (0..report.clusters.len()).find(|&i| !is_unit_cluster(report, i)) {
        return Err(Error::Precondition(format!(
            "eigenvalue {} is not at 1 or -1",
            report.clusters[i].center
        )));
    }
    let trace: C64 = a.schur.eigenvalues().iter().sum();
    let rounded = trace.re.round();
    let guard = 10.0 * tol.residual * n as f64;
    if (trace - c64(rounded, 0.0)).norm() > guard {
        return Err(Error::NonIntegralTrace {
            trace,
            tolerance: guard,
        });
    }
    if rounded < 0.0 {
        return Err(Error::Precondition(format!(
            "trace {rounded} is negative; approximate -Z instead"
        )));
    }
    let r = rounded as usize;
    let segre_at = |target: f64| -> Result<Vec<usize>> {
        match (0..report.clusters.len()).find(|&i| is_near(report, i, c64(target, 0.0))) {
            Some(idx) => cluster_segre(&a, idx, tol),
            None => Ok(Vec::new()),
        }
    };
    let plus = segre_at(1.0)?;
    let minus = segre_at(-1.0)?;
    if plus.len() < r {
        return Err(Error::Precondition(format!(
            "nullity(Z - I) = {} is below r = {r}",
            plus.len()
        )));
    }
    if minus.is_empty() {
        let i = identity(n);
        return Ok(Approximant {
            pair: CertificatePair::new(
                i.clone(),
                ComplexMatrix::zeros(n, n),
                CertificateKind::IdempotentDifference,
                z.clone(),
            ),
            x: i,
            cond: 1.0,
            attempts: 1,
        });
    }
    let s: usize = minus.iter().sum();
    let peeled = r.saturating_sub(s);
    if plus[plus.len() - peeled..].iter().any(|&m| m != 1) {
        return Err(Error::Precondition(
            "too few size-one blocks at 1 to absorb the trace".into(),
        ));
    }
    let anchored = r - peeled;
    let active_total: usize = plus[..plus.len() - peeled].iter().sum();
    if active_total != anchored + s {
        return Err(Error::StaircaseInconsistent {
            center: c64(1.0, 0.0),
            multiplicity: active_total,
            staircase: plus.clone(),
        });
    }

    let mut chains = jordan_chains(z, c64(1.0, 0.0), &plus);
    chains.extend(jordan_chains(z, c64(-1.0, 0.0), &minus));
    let refs: Vec<&ComplexMatrix> = chains.iter().collect();
    let sj = hstack(n, &refs);
    let sj_inv = invert(&sj)?;
    let semisimple = plus.iter().chain(&minus).all(|&m| m == 1);
    let lift = |delta: f64| {
        let lay = layout(&plus, &minus, anchored, peeled, delta);
        let blocks: Vec<ComplexMatrix> = lay.chains.iter().map(|v| bidiagonal(v)).collect();
        let x = &sj * direct_sum(&blocks) * &sj_inv;
        (lay, blocks, x)
    };
    let exact = lift(0.0).2;
    let base = norm2(&(&exact - z));
    let slope = if semisimple {
        0.0
    } else {
        norm2(&(lift(1.0).2 - &exact))
    };

    let mut best_residual = f64::INFINITY;
    for attempt in 0..=MAX_RETRIES {
        let budget = 0.9 * eps * (1.0 - 0.1 * attempt as f64).max(0.5) - base;
        let delta = if slope > 0.0 {
            (budget / slope).clamp(0.0, 0.5)
        } else {
            0.0
        };
        if !semisimple && delta == 0.0 {
            break;
        }
        let (lay, blocks, x) = lift(delta);
        let mut vs = Vec::with_capacity(blocks.len());
        for b in &blocks {
            vs.push(upper_triangular_eigenvectors(b)?);
        }
        let v = direct_sum(&vs);
        let v_inv = unit_upper_inverse(&v);
        let m = &sj * &v;
        let cond = cond2(&(&sj * unit_columns(&v)));
        if !cond.is_finite() || cond > tol.cond_cap {
            return Err(Error::ConditionCap {
                cond,
                cap: tol.cond_cap,
            });
        }
        let m_inv = &v_inv * &sj_inv;
        let (gd, hd) = diagonal_certificate(n, &lay);
        let g = &m * gd * &m_inv;
        let h = &m * hd * &m_inv;
        let pair = CertificatePair::new(g, h, CertificateKind::IdempotentDifference, z.clone());
        if pair.target_residual < eps && pair.structure_residual <= tol.residual {
            return Ok(Approximant {
                pair,
                x,
                cond,
                attempts: attempt + 1,
            });
        }
        best_residual = best_residual.min(pair.target_residual);
        if semisimple {
            break;
        }
    }
    Err(Error::RetriesExhausted {
        attempts: MAX_RETRIES + 1,
        best_residual,
    })
}

/// Difference approximant of the balanced block split off a matrix of norm
/// `parent`, judged at the parent's scale: a block that is numerically zero
/// there gets the zero pair, any other is decided with tolerances relaxed
/// by `parent / ‖b‖`.
fn balanced_part(
    b: &ComplexMatrix,
    parent: f64,
    eps: f64,
    tol: &Tolerances,
) -> Result<Approximant> {
    let nb = norm2(b);
    if nb <= tol.eig_cluster * parent {
        return Ok(zero_approximant(b));
    }
    let ratio = (parent / nb).max(1.0);
    let scaled = Tolerances {
        eig_cluster: (tol.eig_cluster * ratio).min(0.5),
        rank_rel: (tol.rank_rel * ratio).min(0.5),
        ..*tol
    };
    balanced_approximant(b, eps, &scaled, CertificateKind::IdempotentDifference)
}

/// ε-approximant by a difference of idempotents for any matrix in the
/// closure of differences of idempotents.
///
/// The spectrum is split into the part at `±1` and the rest; the first is
/// handled by [`doi_approximant_pm1`], the second (which is balanced) by
/// 2×2 difference blocks on a perturbed diagonalization. A negative unit trace is handled on `−T` with
/// the two idempotents exchanged.
pub fn doi_approximant(t: &ComplexMatrix, eps: f64, tol: &Tolerances) -> Result<Approximant> {
    validate(t)?;
    tol.validate()?;
    check_eps(eps)?;
    if norm2(t) == 0.0 {
        return Ok(zero_approximant(t));
    }
    let report = in_clos_doi(t, tol)?;
    if !report.verdict {
        let failed: Vec<_> = report
            .evidence
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        return Err(Error::Precondition(format!(
            "input is not in the closure of differences of idempotents: {}",
            failed.join(", ")
        )));
    }
    let flip = report.evidence.trace.is_some_and(|tr| tr.re < -0.5);
    let work = if flip { -t } else { t.clone() };
    let a = analyze(&work, tol)?;
    let clusters = &a.report.clusters;
    let groups: Vec<usize> = (0..clusters.len())
        .map(|i| if is_unit_cluster(&a.report, i) { 0 } else { 1 })
        .collect();
    let approx = if groups.iter().all(|&g| g == 1) {
        balanced_approximant(&work, eps, tol, CertificateKind::IdempotentDifference)?
    } else if groups.iter().all(|&g| g == 0) {
        doi_approximant_pm1(&work, eps, tol)?
    } else {
        let split = split_by_clusters(&a, &work, &groups, tol)?;
        let sub = 0.9 * eps / split.cond;
        let zb = split.block_for_group(0).expect("unit group is present");
        let bb = split
            .block_for_group(1)
            .expect("remaining group is present");
        let az = doi_approximant_pm1(zb, sub, tol)?;
        let ab = balanced_part(bb, norm2(&work), sub, tol)?;
        let lift = |x: &ComplexMatrix, y: &ComplexMatrix| {
            &split.similarity * direct_sum(&[x.clone(), y.clone()]) * &split.inverse
        };
        Approximant {
            pair: CertificatePair::new(
                lift(&az.pair.left, &ab.pair.left),
                lift(&az.pair.right, &ab.pair.right),
                CertificateKind::IdempotentDifference,
                work.clone(),
            ),
            x: lift(&az.x, &ab.x),
            cond: split.cond * az.cond.max(ab.cond),
            attempts: az.attempts.max(ab.attempts),
        }
    };
    let (left, right, x) = if flip {
        (approx.pair.right, approx.pair.left, -approx.x)
    } else {
        (approx.pair.left, approx.pair.right, approx.x)
    };
    Ok(Approximant {
        pair: CertificatePair::new(
            left,
            right,
            CertificateKind::IdempotentDifference,
            t.clone(),
        ),
        x,
        cond: approx.cond,
        attempts: approx.attempts,
    })
}
