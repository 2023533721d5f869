//! Deciders driven by eigenvalue clusters and Jordan data.

use super::{ClassTag, Evidence, MembershipReport, PairingRow, SegrePairingRow};
use crate::error::{Error, Result};
use crate::linalg::{
    analyze, cluster_segre, cluster_threshold, nilpotent_segre, norm2, structure_from_analysis,
    ComplexMatrix, SpectralAnalysis, SpectrumReport, Tolerances, C64,
};

use super::parity::charpoly_parity;

const CHARPOLY_LIMIT: usize = 64;

pub(crate) fn is_near(report: &SpectrumReport, idx: usize, p: C64) -> bool {
    let c = &report.clusters[idx];
    (c.center - p).norm() <= report.tol_used + c.spread
}

pub(crate) fn is_zero_cluster(report: &SpectrumReport, idx: usize) -> bool {
    is_near(report, idx, C64::new(0.0, 0.0))
}

pub(crate) fn is_unit_cluster(report: &SpectrumReport, idx: usize) -> bool {
    is_near(report, idx, C64::new(1.0, 0.0)) || is_near(report, idx, C64::new(-1.0, 0.0))
}

/// For each cluster, the cluster nearest to its negation (itself for the
/// cluster at 0), if one lies within the matching slack.
pub(crate) fn negation_partners(report: &SpectrumReport) -> Vec<Option<usize>> {
    let cl = &report.clusters;
    (0..cl.len())
        .map(|i| {
            if is_zero_cluster(report, i) {
                return Some(i);
            }
            (0..cl.len())
                .filter(|&j| !is_zero_cluster(report, j))
                .map(|j| (j, (cl[j].center + cl[i].center).norm()))
                .filter(|&(j, d)| d <= 2.0 * report.tol_used + cl[i].spread + cl[j].spread)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(j, _)| j)
        })
        .collect()
}

/// Adds the balancedness conditions over the clusters selected by `keep`.
fn balance_into(report: &SpectrumReport, keep: impl Fn(usize) -> bool, ev: &mut Evidence) {
    let partners = negation_partners(report);
    let mut symmetric = true;
    let mut equal = true;
    for i in (0..report.clusters.len()).filter(|&i| keep(i)) {
        let ci = &report.clusters[i];
        match partners[i] {
            Some(j) if keep(j) && partners[j] == Some(i) => {
                if j < i {
                    continue;
                }
                let cj = &report.clusters[j];
                equal &= ci.multiplicity == cj.multiplicity;
                ev.pairing.push(PairingRow {
                    alpha: ci.center,
                    neg_alpha: cj.center,
                    mult_alpha: ci.multiplicity,
                    mult_neg_alpha: cj.multiplicity,
                });
            }
            _ => {
                symmetric = false;
                ev.pairing.push(PairingRow {
                    alpha: ci.center,
                    neg_alpha: -ci.center,
                    mult_alpha: ci.multiplicity,
                    mult_neg_alpha: 0,
                });
            }
        }
    }
    ev.check(
        "spectrum_symmetric",
        symmetric,
        "every eigenvalue cluster has a cluster at its negation",
    );
    ev.check(
        "multiplicities_match",
        symmetric && equal,
        "mu(alpha) = mu(-alpha) for every pair",
    );
}

pub fn is_balanced(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let a = analyze(t, tol)?;
    let mut ev = Evidence::default();
    balance_into(&a.report, |_| true, &mut ev);
    if a.report.ambiguous {
        ev.notes
            .push("cluster merge decision is within 10% of the clustering radius".into());
    }
    Ok(MembershipReport::new(ClassTag::Balanced, ev, tol))
}

/// Segre pairing conditions over the clusters selected by `keep`; returns
/// whether every selected cluster is matched with an equal Segre sequence.
fn segre_pairs_into(
    a: &SpectralAnalysis,
    segre: &[Vec<usize>],
    keep: impl Fn(usize) -> bool,
    ev: &mut Evidence,
) -> bool {
    let report = &a.report;
    let partners = negation_partners(report);
    let mut ok = true;
    for i in (0..report.clusters.len()).filter(|&i| keep(i)) {
        match partners[i] {
            Some(j) if keep(j) && partners[j] == Some(i) => {
                if j < i {
                    continue;
                }
                ok &= segre[i] == segre[j];
                ev.segre_pairing.push(SegrePairingRow {
                    alpha: report.clusters[i].center,
                    neg_alpha: report.clusters[j].center,
                    segre_alpha: segre[i].clone(),
                    segre_neg_alpha: segre[j].clone(),
                });
            }
            _ => {
                ok = false;
                ev.segre_pairing.push(SegrePairingRow {
                    alpha: report.clusters[i].center,
                    neg_alpha: -report.clusters[i].center,
                    segre_alpha: segre[i].clone(),
                    segre_neg_alpha: Vec::new(),
                });
            }
        }
    }
    ok
}

fn neg_similar_into(a: &SpectralAnalysis, tol: &Tolerances, ev: &mut Evidence) -> Result<()> {
    let structure = structure_from_analysis(a, tol)?;
    balance_into(&a.report, |_| true, ev);
    let ok = segre_pairs_into(a, &structure.segre, |_| true, ev);
    ev.check(
        "segre_match",
        ok,
        "Segre(alpha) = Segre(-alpha) for every eigenvalue",
    );
    Ok(())
}

pub fn is_neg_similar(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let a = analyze(t, tol)?;
    let mut ev = Evidence::default();
    neg_similar_into(&a, tol, &mut ev)?;
    Ok(MembershipReport::new(ClassTag::NegSimilar, ev, tol))
}

/// Whether a nilpotent with this Segre sequence has a square root: sorted
/// non-increasingly and padded to even length, consecutive pairs differ by
/// at most one.
pub fn segre_has_square_root(segre: &[usize]) -> bool {
    let mut parts: Vec<usize> = segre.iter().copied().filter(|&m| m > 0).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    if parts.len() % 2 == 1 {
        parts.push(0);
    }
    parts.chunks(2).all(|p| p[0] - p[1] <= 1)
}

pub fn is_coi(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let a = analyze(t, tol)?;
    let mut ev = Evidence::default();
    neg_similar_into(&a, tol, &mut ev)?;
    let half_i = C64::new(0.0, 0.5);
    let idx = (0..a.report.clusters.len()).find(|&i| is_near(&a.report, i, half_i));
    match idx {
        None => ev.check(
            "shifted_square_has_root",
            true,
            "i/2 is not an eigenvalue; the condition is vacuous",
        ),
        Some(idx) => {
            let (b, _) = a.restrict(&[idx]);
            let k = b.nrows();
            let mut n = &b * &b;
            for i in 0..k {
                n[(i, i)] += C64::new(0.25, 0.0);
            }
            // N = M(M + i) with M = B − (i/2)I; the center may sit up to r0 off i/2
            let offset = (a.report.clusters[idx].center - half_i).norm();
            let threshold = (cluster_threshold(&a, idx, tol) + offset) * (1.0 + 2.0 * norm2(&b));
            let segre = nilpotent_segre(&n, threshold, C64::new(0.0, 0.0))?;
            let direct = cluster_segre(&a, idx, tol)?;
            if direct != segre {
                ev.notes.push(format!(
                    "Segre(i/2; T) = {direct:?} differs from Segre(0; T1^2 + I/4) = {segre:?}"
                ));
            }
            let ok = segre_has_square_root(&segre);
            ev.check(
                "shifted_square_has_root",
                ok,
                format!("Segre(0; T1^2 + I/4) = {segre:?} on the i/2 component of dimension {k}"),
            );
            ev.component_segre = Some(segre);
        }
    }
    Ok(MembershipReport::new(ClassTag::Coi, ev, tol))
}

pub fn is_doi(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let a = analyze(t, tol)?;
    let structure = structure_from_analysis(&a, tol)?;
    let report = &a.report;
    let mut ev = Evidence::default();
    ev.check("zero_unconstrained", true, "no condition at 0");
    let generic = |i: usize| !is_zero_cluster(report, i) && !is_unit_cluster(report, i);
    let ok = segre_pairs_into(&a, &structure.segre, generic, &mut ev);
    ev.check(
        "generic_pairs",
        ok,
        "Segre(alpha) = Segre(-alpha) for alpha outside {0, 1, -1}",
    );
    let at = |p: f64| {
        (0..report.clusters.len())
            .find(|&i| is_near(report, i, C64::new(p, 0.0)))
            .map(|i| structure.segre[i].clone())
            .unwrap_or_default()
    };
    let (m, n) = (at(1.0), at(-1.0));
    let len = m.len().max(n.len());
    let ok = (0..len).all(|k| {
        let x = m.get(k).copied().unwrap_or(0) as i64;
        let y = n.get(k).copied().unwrap_or(0) as i64;
        (x - y).abs() <= 1
    });
    ev.segre_pairing.push(SegrePairingRow {
        alpha: C64::new(1.0, 0.0),
        neg_alpha: C64::new(-1.0, 0.0),
        segre_alpha: m.clone(),
        segre_neg_alpha: n.clone(),
    });
    ev.check(
        "unit_segre_close",
        ok,
        format!("Segre(1) = {m:?}, Segre(-1) = {n:?}, entrywise difference at most 1"),
    );
    Ok(MembershipReport::new(ClassTag::Doi, ev, tol))
}

pub fn in_clos_coi(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let mut report = is_balanced(t, tol)?;
    report.class_tag = ClassTag::ClosCoi;
    if t.nrows() <= CHARPOLY_LIMIT {
        let parity = charpoly_parity(t, tol)?;
        report.evidence.parity_agrees = Some(parity == report.verdict);
        if parity != report.verdict {
            report.evidence.notes.push(format!(
                "characteristic polynomial parity check says {parity}"
            ));
        }
    }
    Ok(report)
}

pub fn in_clos_doi(t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    let a = analyze(t, tol)?;
    let report = &a.report;
    let n = t.nrows();
    let mut ev = Evidence::default();
    let unit: Vec<usize> = (0..report.clusters.len())
        .filter(|&i| is_unit_cluster(report, i))
        .collect();
    if unit.is_empty() {
        ev.notes
            .push("no eigenvalues at 1 or -1; the {1, -1} part is absent".into());
        balance_into(report, |_| true, &mut ev);
        return Ok(MembershipReport::new(ClassTag::ClosDoi, ev, tol));
    }
    let ev_diag = a.schur.eigenvalues();
    let trace: C64 = (0..n)
        .filter(|&p| unit.contains(&a.labels[p]))
        .map(|p| ev_diag[p])
        .sum();
    let rounded = trace.re.round();
    let guard = 10.0 * tol.residual * n as f64;
    if (trace - C64::new(rounded, 0.0)).norm() > guard {
        return Err(Error::NonIntegralTrace {
            trace,
            tolerance: guard,
        });
    }
    let mut r = rounded as i64;
    let mut target = 1.0;
    if r < 0 {
        r = -r;
        target = -1.0;
        ev.notes
            .push("trace of the {1, -1} part is negative; deciding for -T".into());
    }
    let nul = match (0..report.clusters.len()).find(|&i| is_near(report, i, C64::new(target, 0.0)))
    {
        Some(idx) => cluster_segre(&a, idx, tol)?.len(),
        None => 0,
    };
    ev.trace = Some(trace);
    ev.r = Some(r);
    ev.nullities.insert("Z-I".into(), nul);
    balance_into(report, |i| !unit.contains(&i), &mut ev);
    ev.check(
        "unit_nullity",
        nul as i64 >= r,
        format!("nullity(Z - I) = {nul} against r = {r}"),
    );
    Ok(MembershipReport::new(ClassTag::ClosDoi, ev, tol))
}
