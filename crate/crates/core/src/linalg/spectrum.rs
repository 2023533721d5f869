//! Eigenvalue clustering with algebraic multiplicities.

use serde::{Deserialize, Serialize};

use super::dense::{norm2, validate, ComplexMatrix, C64};
use super::schur::{schur, SchurForm};
use super::Tolerances;
use crate::error::Result;

/// Normalized backward-error level at which a cluster of computed
/// eigenvalues is still accepted as one defective eigenvalue.
const DEFECT_NOISE: f64 = 1e-13;
/// Largest group considered for a defective merge. Beyond this the scatter
/// of a perturbed cell, `~u^(1/k)`, is no longer separable from genuinely
/// distinct eigenvalues in double precision.
const MAX_DEFECT_GROUP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: C64,
    pub multiplicity: usize,
    /// Largest distance from a member eigenvalue to the center.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub clusters: Vec<Cluster>,
    /// Absolute clustering radius, `eig_cluster · ‖T‖₂`.
    pub tol_used: f64,
    /// Spectral norm of the input.
    pub scale: f64,
    /// Set when some merge decision would flip within 10% of the radius.
    pub ambiguous: bool,
}

impl SpectrumReport {
    /// Index of the cluster whose center is within `tol_used` of `z`.
    pub fn find(&self, z: C64) -> Option<usize> {
        self.clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| (c.center - z).norm() <= self.tol_used.max(c.spread))
            .min_by(|a, b| (a.1.center - z).norm().total_cmp(&(b.1.center - z).norm()))
            .map(|(i, _)| i)
    }

    pub fn multiplicity_at(&self, z: C64) -> usize {
        self.find(z).map_or(0, |i| self.clusters[i].multiplicity)
    }
}

/// Schur form together with the cluster label of every diagonal position.
#[derive(Debug, Clone)]
pub struct SpectralAnalysis {
    pub schur: SchurForm,
    pub report: SpectrumReport,
    pub labels: Vec<usize>,
}

impl SpectralAnalysis {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == cluster)
            .collect()
    }

    /// Upper triangular block of the Schur form restricted to the spectral
    /// subspace of the given clusters, with that subspace's orthonormal basis.
    pub fn restrict(&self, clusters: &[usize]) -> (ComplexMatrix, ComplexMatrix) {
        let keys: Vec<usize> = self
            .labels
            .iter()
            .map(|l| usize::from(!clusters.contains(l)))
            .collect();
        let k = keys.iter().filter(|&&x| x == 0).count();
        let mut f = self.schur.clone();
        f.reorder_by_key(&keys);
        let n = f.r.nrows();
        (
            f.r.view((0, 0), (k, k)).into_owned(),
            f.u.view((0, 0), (n, k)).into_owned(),
        )
    }
}

pub fn spectrum(t: &ComplexMatrix, tol: &Tolerances) -> Result<SpectrumReport> {
    Ok(analyze(t, tol)?.report)
}

/// Clusters the Schur diagonal of `t`.
///
/// Eigenvalues closer than twice the radius are linked (single linkage), and
/// centers closer than twice the radius are merged. Beyond that, a group of
/// nearby clusters is merged when its Schur block minus the group mean is
/// numerically nilpotent: that is how a conjugated Jordan cell of size `k`
/// shows up, with eigenvalues scattered on a circle of radius `~u^(1/k)`.
pub fn analyze(t: &ComplexMatrix, tol: &Tolerances) -> Result<SpectralAnalysis> {
    validate(t)?;
    tol.validate()?;
    let schur = schur(t)?;
    let n = t.nrows();
    let s = norm2(t);
    let r0 = tol.eig_cluster * s;
    let ev = schur.eigenvalues();

    let mut labels: Vec<usize> = if s == 0.0 {
        vec![0; n]
    } else {
        single_linkage(&ev, 2.0 * r0)
    };
    merge_close_centers(&ev, &mut labels, 2.0 * r0);

    if s > 0.0 && n > 1 {
        let noise = DEFECT_NOISE.max(1e-2 * tol.eig_cluster * tol.eig_cluster);
        let radius_for = |k: usize| 2.0 * s * defect_threshold(k, noise).powf(1.0 / k as f64);
        let r_max = (2..=n.min(MAX_DEFECT_GROUP))
            .map(radius_for)
            .fold(0.0, f64::max);
        let mut rejected: Vec<Vec<usize>> = Vec::new();
        let mut r = 4.0 * r0.max(f64::EPSILON * s);
        while r <= 2.0 * r_max {
            let groups = link_clusters(&ev, &labels, r);
            for group in groups {
                let members: Vec<usize> = (0..n).filter(|&i| group.contains(&labels[i])).collect();
                if group.len() < 2
                    || members.len() > MAX_DEFECT_GROUP
                    || rejected.contains(&members)
                {
                    continue;
                }
                let k = members.len();
                let (center, spread) = center_and_spread(&ev, &members);
                if spread <= radius_for(k)
                    && rings_consistent(&ev, &members, center, |m| radius_for(m).max(2.0 * r0))
                    && numerically_single(&schur, &members, s, noise)
                {
                    let target = group[0];
                    for &i in &members {
                        labels[i] = target;
                    }
                } else {
                    rejected.push(members);
                }
            }
            r *= 2.0;
        }
    }

    let (labels, clusters) = finalize(&ev, &labels);
    let ambiguous = s > 0.0 && is_ambiguous(&ev, 2.0 * r0);
    Ok(SpectralAnalysis {
        schur,
        report: SpectrumReport {
            clusters,
            tol_used: r0,
            scale: s,
            ambiguous,
        },
        labels,
    })
}

/// A cell of size `m` scatters into a ring of `m` points, so a point at
/// distance `d` from the center needs enough points at comparable or larger
/// distance to explain it: with `m` points at distance at least `d/4`,
/// `d` must not exceed the scatter radius of a size-`m` cell.
fn rings_consistent(
    ev: &[C64],
    members: &[usize],
    center: C64,
    radius: impl Fn(usize) -> f64,
) -> bool {
    let dist: Vec<f64> = members.iter().map(|&i| (ev[i] - center).norm()).collect();
    dist.iter().all(|&d| {
        let m = dist.iter().filter(|&&e| e >= d / 4.0).count();
        d <= radius(m)
    })
}

fn defect_threshold(k: usize, noise: f64) -> f64 {
    k as f64 * 2f64.powi(k as i32 - 1) * noise
}

/// Whether the group's Schur block `B` is within `noise·s` of a single
/// eigenvalue. With `M = B − cI = N + E`, `N` nilpotent and `‖E‖ ≤ η`,
/// `‖M^k‖ ≤ (‖N‖ + η)^k − ‖N‖^k ≤ k·η·‖M‖^(k−1)` to first order; the test
/// allows the extra factor `2^(k−1)`.
fn numerically_single(schur: &SchurForm, members: &[usize], s: f64, noise: f64) -> bool {
    let n = schur.r.nrows();
    let keys: Vec<usize> = (0..n).map(|i| usize::from(!members.contains(&i))).collect();
    let mut f = schur.clone();
    f.reorder_by_key(&keys);
    let k = members.len();
    let b = f.r.view((0, 0), (k, k)).into_owned();
    let c = b.diagonal().iter().sum::<C64>() / k as f64;
    let mut m = b;
    for i in 0..k {
        m[(i, i)] -= c;
    }
    let m = m / C64::new(s, 0.0);
    let reach = noise * 8.0 * k as f64;
    if (0..k).any(|i| eigenvalue_condition(&m, i) * reach < m[(i, i)].norm()) {
        return false;
    }
    let norm_m = norm2(&m);
    let mut p = m.clone();
    for _ in 1..k {
        p = &p * &m;
    }
    norm2(&p) <= defect_threshold(k, noise) * norm_m.powi(k as i32 - 1)
}

/// Condition number of the `i`-th diagonal eigenvalue of an upper
/// triangular matrix, from its right and left eigenvectors.
fn eigenvalue_condition(r: &ComplexMatrix, i: usize) -> f64 {
    let k = r.nrows();
    let lambda = r[(i, i)];
    let floor = f64::EPSILON * norm2(r).max(f64::MIN_POSITIVE);
    let pivot = |j: usize| {
        let d = r[(j, j)] - lambda;
        if d.norm() < floor {
            C64::new(floor, 0.0)
        } else {
            d
        }
    };
    let mut x = vec![C64::new(0.0, 0.0); k];
    x[i] = C64::new(1.0, 0.0);
    for j in (0..i).rev() {
        let acc: C64 = (j + 1..=i).map(|l| r[(j, l)] * x[l]).sum();
        x[j] = -acc / pivot(j);
    }
    let mut y = vec![C64::new(0.0, 0.0); k];
    y[i] = C64::new(1.0, 0.0);
    for j in i + 1..k {
        let acc: C64 = (i..j).map(|l| y[l] * r[(l, j)]).sum();
        y[j] = -acc / pivot(j);
    }
    let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ny = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    nx * ny
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = i;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

fn single_linkage(ev: &[C64], link: f64) -> Vec<usize> {
    let n = ev.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if (ev[i] - ev[j]).norm() <= link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

fn center_and_spread(ev: &[C64], members: &[usize]) -> (C64, f64) {
    let c = members.iter().map(|&i| ev[i]).sum::<C64>() / members.len() as f64;
    let spread = members
        .iter()
        .map(|&i| (ev[i] - c).norm())
        .fold(0.0, f64::max);
    (c, spread)
}

fn distinct_labels(labels: &[usize]) -> Vec<usize> {
    let mut ls = labels.to_vec();
    ls.sort_unstable();
    ls.dedup();
    ls
}

fn merge_close_centers(ev: &[C64], labels: &mut [usize], link: f64) {
    loop {
        let ls = distinct_labels(labels);
        let centers: Vec<C64> = ls
            .iter()
            .map(|&l| {
                let m: Vec<usize> = (0..ev.len()).filter(|&i| labels[i] == l).collect();
                center_and_spread(ev, &m).0
            })
            .collect();
        let mut merged = false;
        'outer: for a in 0..ls.len() {
            for b in (a + 1)..ls.len() {
                if (centers[a] - centers[b]).norm() <= link {
                    for l in labels.iter_mut() {
                        if *l == ls[b] {
                            *l = ls[a];
                        }
                    }
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return;
        }
    }
}

/// Groups of current clusters connected by point distances at most `r`.
fn link_clusters(ev: &[C64], labels: &[usize], r: f64) -> Vec<Vec<usize>> {
    let ls = distinct_labels(labels);
    let idx = |l: usize| ls.binary_search(&l).unwrap();
    let mut parent: Vec<usize> = (0..ls.len()).collect();
    for i in 0..ev.len() {
        for j in (i + 1)..ev.len() {
            if labels[i] != labels[j] && (ev[i] - ev[j]).norm() <= r {
                let (a, b) = (
                    find(&mut parent, idx(labels[i])),
                    find(&mut parent, idx(labels[j])),
                );
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for a in 0..ls.len() {
        let root = find(&mut parent, a);
        if root == a {
            groups.push(
                (0..ls.len())
                    .filter(|&b| find(&mut parent, b) == a)
                    .map(|b| ls[b])
                    .collect(),
            );
        }
    }
    groups
}

fn is_ambiguous(ev: &[C64], link: f64) -> bool {
    for i in 0..ev.len() {
        for j in (i + 1)..ev.len() {
            let d = (ev[i] - ev[j]).norm();
            if d >= 0.9 * link && d <= 1.1 * link {
                return true;
            }
        }
    }
    false
}

/// Relabels clusters 0.. in a deterministic order (by real, then imaginary
/// part of the center) and builds the cluster list.
fn finalize(ev: &[C64], labels: &[usize]) -> (Vec<usize>, Vec<Cluster>) {
    let ls = distinct_labels(labels);
    let mut clusters: Vec<(usize, Cluster)> = ls
        .iter()
        .map(|&l| {
            let m: Vec<usize> = (0..ev.len()).filter(|&i| labels[i] == l).collect();
            let (center, spread) = center_and_spread(ev, &m);
            (
                l,
                Cluster {
                    center,
                    multiplicity: m.len(),
                    spread,
                },
            )
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.1.center
            .re
            .total_cmp(&b.1.center.re)
            .then(a.1.center.im.total_cmp(&b.1.center.im))
    });
    let new_labels = labels
        .iter()
        .map(|l| clusters.iter().position(|(old, _)| old == l).unwrap())
        .collect();
    (new_labels, clusters.into_iter().map(|(_, c)| c).collect())
}
