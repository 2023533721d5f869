//! Deciders for commutators and differences of orthogonal projections.
//! Only unitarily invariant quantities are used.

use super::{ClassTag, Evidence, MembershipReport, PairingRow};
use crate::error::Result;
use crate::linalg::{hermitian_eigen, norm2, validate, ComplexMatrix, Tolerances, C64};

/// Whether a sorted list of reals is symmetric about 0 up to `slack`.
pub(crate) fn reals_symmetric(sorted: &[f64], slack: f64) -> bool {
    let m = sorted.len();
    (0..m).all(|k| (sorted[k] + sorted[m - 1 - k]).abs() <= slack)
}

/// Multiplicity table of sorted reals grouped at `slack`.
pub(crate) fn real_pairing_rows(sorted: &[f64], slack: f64) -> Vec<PairingRow> {
    let mut groups: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > slack {
            let g = &sorted[start..k];
            groups.push((g.iter().sum::<f64>() / g.len() as f64, g.len()));
            start = k;
        }
    }
    let mut used = vec![false; groups.len()];
    let mut rows = Vec::new();
    for i in (0..groups.len()).rev() {
        if used[i] || groups[i].0 < -slack / 2.0 {
            continue;
        }
        used[i] = true;
        let (c, m) = groups[i];
        if c.abs() <= slack / 2.0 {
            rows.push(row(c, c, m, m));
            continue;
        }
        let partner = (0..groups.len()).find(|&j| !used[j] && (groups[j].0 + c).abs() <= slack);
        match partner {
            Some(j) => {
                used[j] = true;
                rows.push(row(c, groups[j].0, m, groups[j].1));
            }
            None => rows.push(row(c, -c, m, 0)),
        }
    }
    for (j, &(c, m)) in groups.iter().enumerate() {
        if !used[j] {
            rows.push(row(c, -c, m, 0));
        }
    }
    rows
}

fn row(a: f64, b: f64, ma: usize, mb: usize) -> PairingRow {
    PairingRow {
        alpha: C64::new(a, 0.0),
        neg_alpha: C64::new(b, 0.0),
        mult_alpha: ma,
        mult_neg_alpha: mb,
    }
}

pub fn is_cop(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    validate(t)?;
    tol.validate()?;
    let s = norm2(t);
    let mut ev = Evidence::default();
    let skew = norm2(&(t + t.adjoint()));
    ev.check(
        "skew_adjoint",
        skew <= tol.residual * s.max(1.0),
        format!("||T + T*|| = {skew:.3e}"),
    );
    ev.check(
        "norm_at_most_half",
        s <= 0.5 + tol.residual,
        format!("||T|| = {s:.12}"),
    );
    let it = t * C64::new(0.0, 1.0);
    let (vals, _) = hermitian_eigen(&it);
    let slack = 2.0 * tol.eig_cluster * s;
    ev.pairing = real_pairing_rows(&vals, slack);
    ev.check(
        "iT_spectrum_symmetric",
        reals_symmetric(&vals, slack),
        "eigenvalues of iT pair under negation with equal multiplicities",
    );
    Ok(MembershipReport::new(ClassTag::Cop, ev, tol))
}

pub fn is_dop(h: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    validate(h)?;
    tol.validate()?;
    let s = norm2(h);
    let mut ev = Evidence::default();
    let asym = norm2(&(h - h.adjoint()));
    ev.check(
        "hermitian",
        asym <= tol.residual * s.max(1.0),
        format!("||H - H*|| = {asym:.3e}"),
    );
    let (vals, _) = hermitian_eigen(h);
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    ev.check(
        "spectrum_in_unit_interval",
        lo >= -1.0 - tol.residual && hi <= 1.0 + tol.residual,
        format!("eigenvalues within [{lo:.12}, {hi:.12}]"),
    );
    let r0 = tol.eig_cluster * s;
    let inner: Vec<f64> = vals
        .iter()
        .copied()
        .filter(|&x| x.abs() > r0 && (x.abs() - 1.0).abs() > r0)
        .collect();
    let slack = 2.0 * r0;
    ev.pairing = real_pairing_rows(&inner, slack);
    ev.check(
        "generic_spectrum_symmetric",
        reals_symmetric(&inner, slack),
        "eigenvalues in (-1, 1) away from 0 pair under negation",
    );
    Ok(MembershipReport::new(ClassTag::Dop, ev, tol))
}

pub fn in_clos_cop(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let mut r = is_cop(t, tol)?;
    r.class_tag = ClassTag::ClosCop;
    r.evidence
        .notes
        .push("commutators of projections form a closed set in finite dimension".into());
    Ok(r)
}

pub fn in_clos_dop(h: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let mut r = is_dop(h, tol)?;
    r.class_tag = ClassTag::ClosDop;
    r.evidence
        .notes
        .push("differences of projections form a closed set in finite dimension".into());
    Ok(r)
}
