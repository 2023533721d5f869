//! Block diagonalization along a partition of the spectrum.

use super::dense::{cond2, direct_sum, norm2, unit_upper_inverse, ComplexMatrix, C64};
use super::spectrum::{analyze, SpectralAnalysis};
use super::sylvester::triangular_sylvester;
use super::Tolerances;
use crate::error::{Error, Result};

/// A planar region, described by a signed distance that is positive inside.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Disc {
        center: C64,
        radius: f64,
    },
    /// Points `z` with `Re(conj(normal) · z) > offset`.
    HalfPlane {
        normal: C64,
        offset: f64,
    },
    Complement(Box<Region>),
    Union(Vec<Region>),
}

impl Region {
    pub fn disc(center: C64, radius: f64) -> Self {
        Region::Disc { center, radius }
    }

    pub fn right_half_plane() -> Self {
        Region::HalfPlane {
            normal: C64::new(1.0, 0.0),
            offset: 0.0,
        }
    }

    pub fn left_half_plane() -> Self {
        Region::HalfPlane {
            normal: C64::new(-1.0, 0.0),
            offset: 0.0,
        }
    }

    pub fn complement(self) -> Self {
        Region::Complement(Box::new(self))
    }

    pub fn signed_distance(&self, z: C64) -> f64 {
        match self {
            Region::Disc { center, radius } => radius - (z - center).norm(),
            Region::HalfPlane { normal, offset } => {
                ((normal.conj() * z).re - offset) / normal.norm()
            }
            Region::Complement(inner) => -inner.signed_distance(z),
            Region::Union(parts) => parts
                .iter()
                .map(|p| p.signed_distance(z))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        self.signed_distance(z) > 0.0
    }
}

/// `inverse · T · similarity = blocks[0] ⊕ blocks[1] ⊕ …`.
#[derive(Debug, Clone)]
pub struct RieszSplit {
    pub similarity: ComplexMatrix,
    pub inverse: ComplexMatrix,
    pub block_dims: Vec<usize>,
    pub blocks: Vec<ComplexMatrix>,
    /// Group (region) index carried by each block.
    pub groups: Vec<usize>,
    pub cond: f64,
    /// `‖inverse · T · similarity − ⊕ blocks‖₂`.
    pub residual: f64,
}

impl RieszSplit {
    pub fn block_for_group(&self, group: usize) -> Option<&ComplexMatrix> {
        self.groups
            .iter()
            .position(|&g| g == group)
            .map(|i| &self.blocks[i])
    }

    /// Columns of `similarity` spanning the invariant subspace of a group.
    pub fn basis_for_group(&self, group: usize) -> Option<ComplexMatrix> {
        let i = self.groups.iter().position(|&g| g == group)?;
        let off: usize = self.block_dims[..i].iter().sum();
        let n = self.similarity.nrows();
        Some(
            self.similarity
                .view((0, off), (n, self.block_dims[i]))
                .into_owned(),
        )
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        &self.similarity * direct_sum(&self.blocks) * &self.inverse
    }
}

/// Splits `t` according to `regions`; every eigenvalue cluster must lie in
/// exactly one region, away from all boundaries.
pub fn riesz_split(t: &ComplexMatrix, regions: &[Region], tol: &Tolerances) -> Result<RieszSplit> {
    let analysis = analyze(t, tol)?;
    let r0 = analysis.report.tol_used;
    let mut group_of_cluster = Vec::with_capacity(analysis.report.clusters.len());
    for cluster in &analysis.report.clusters {
        let margin = r0 + cluster.spread;
        let mut inside = Vec::new();
        for (idx, region) in regions.iter().enumerate() {
            let d = region.signed_distance(cluster.center);
            if d.abs() <= margin {
                return Err(Error::RegionBoundary {
                    eigenvalue: cluster.center,
                    distance: d.abs(),
                });
            }
            if d > 0.0 {
                inside.push(idx);
            }
        }
        if inside.len() != 1 {
            return Err(Error::RegionAssignment {
                eigenvalue: cluster.center,
                count: inside.len(),
            });
        }
        group_of_cluster.push(inside[0]);
    }
    split_by_clusters(&analysis, t, &group_of_cluster, tol)
}

/// Splits along an explicit assignment of clusters to groups. Blocks come
/// out ordered by group index; groups with no eigenvalues are omitted.
pub fn split_by_clusters(
    analysis: &SpectralAnalysis,
    t: &ComplexMatrix,
    group_of_cluster: &[usize],
    tol: &Tolerances,
) -> Result<RieszSplit> {
    let n = analysis.labels.len();
    let keys: Vec<usize> = analysis
        .labels
        .iter()
        .map(|&l| group_of_cluster[l])
        .collect();
    let mut f = analysis.schur.clone();
    let perm = f.reorder_by_key(&keys);
    let sorted_keys: Vec<usize> = perm.iter().map(|&old| keys[old]).collect();

    let mut groups = Vec::new();
    let mut block_dims = Vec::new();
    for (i, &k) in sorted_keys.iter().enumerate() {
        if i == 0 || sorted_keys[i - 1] != k {
            groups.push(k);
            block_dims.push(0);
        }
        *block_dims.last_mut().unwrap() += 1;
    }

    let mut r = f.r.clone();
    let mut s = ComplexMatrix::identity(n, n);
    let mut off = 0;
    for &dim in block_dims.iter().take(block_dims.len().saturating_sub(1)) {
        let rest = n - off - dim;
        let a = r.view((off, off), (dim, dim)).into_owned();
        let b = r.view((off + dim, off + dim), (rest, rest)).into_owned();
        let c = r.view((off, off + dim), (dim, rest)).into_owned();
        let x = triangular_sylvester(&a, &b, &c);
        // s <- s · (I ⊕ [[I, -X], [0, I]])
        let left = s.view((0, off), (n, dim)).into_owned();
        let mut right = s.view_mut((0, off + dim), (n, rest));
        right -= left * &x;
        r.view_mut((off, off + dim), (dim, rest))
            .fill(C64::new(0.0, 0.0));
        off += dim;
    }

    let cond = cond2(&s);
    if cond > tol.cond_cap {
        return Err(Error::ConditionCap {
            cond,
            cap: tol.cond_cap,
        });
    }
    let s_inv = unit_upper_inverse(&s);
    let similarity = &f.u * &s;
    let inverse = &s_inv * f.u.adjoint();

    let mut blocks = Vec::with_capacity(block_dims.len());
    let mut off = 0;
    for &dim in &block_dims {
        blocks.push(r.view((off, off), (dim, dim)).into_owned());
        off += dim;
    }
    let residual = norm2(&(&inverse * t * &similarity - direct_sum(&blocks)));
    Ok(RieszSplit {
        similarity,
        inverse,
        block_dims,
        blocks,
        groups,
        cond,
        residual,
    })
}
