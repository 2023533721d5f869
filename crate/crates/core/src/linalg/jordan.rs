//! Nullity and Jordan block structure.

use serde::{Deserialize, Serialize};

use super::dense::{singular_values, svd, ComplexMatrix, C64};
use super::spectrum::{analyze, SpectralAnalysis, SpectrumReport};
use super::Tolerances;
use crate::error::{Error, Result};

/// Segre sequences aligned with the clusters of `spectrum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanStructure {
    pub spectrum: SpectrumReport,
    pub segre: Vec<Vec<usize>>,
}

impl JordanStructure {
    /// Segre sequence at the cluster matching `z`; empty when `z` is not an
    /// eigenvalue.
    pub fn segre_near(&self, z: C64) -> Vec<usize> {
        segre_at(self, z)
    }
}

pub fn segre_at(structure: &JordanStructure, z: C64) -> Vec<usize> {
    structure
        .spectrum
        .find(z)
        .map(|i| structure.segre[i].clone())
        .unwrap_or_default()
}

/// `n` minus the number of singular values above `rank_rel · σ_max`.
pub fn nullity(t: &ComplexMatrix, tol: &Tolerances) -> usize {
    let sv = singular_values(t);
    let cut = tol.rank_rel * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > cut).count();
    t.nrows() - rank
}

pub fn jordan_structure(t: &ComplexMatrix, tol: &Tolerances) -> Result<JordanStructure> {
    let analysis = analyze(t, tol)?;
    structure_from_analysis(&analysis, tol)
}

pub fn structure_from_analysis(a: &SpectralAnalysis, tol: &Tolerances) -> Result<JordanStructure> {
    let segre = (0..a.report.clusters.len())
        .map(|idx| cluster_segre(a, idx, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(JordanStructure {
        spectrum: a.report.clone(),
        segre,
    })
}

/// Segre sequence of a single cluster of an analysed matrix.
pub fn cluster_segre(a: &SpectralAnalysis, idx: usize, tol: &Tolerances) -> Result<Vec<usize>> {
    let cluster = &a.report.clusters[idx];
    let (mut m, _) = a.restrict(&[idx]);
    for i in 0..m.nrows() {
        m[(i, i)] -= cluster.center;
    }
    nilpotent_segre(&m, cluster_threshold(a, idx, tol), cluster.center)
}

/// Singular-value threshold separating kernel directions of `B − cI` for
/// the Schur block `B` of a cluster centered at `c`.
pub fn cluster_threshold(a: &SpectralAnalysis, idx: usize, tol: &Tolerances) -> f64 {
    (tol.rank_rel * a.report.scale).max(4.0 * a.report.clusters[idx].spread)
}

/// Segre sequence at 0 of a (numerically) nilpotent matrix, read off the
/// nullity staircase by repeated deflation of the kernel: the nullity of
/// `m` is split off through an SVD basis and the process continues on the
/// compression of `m` to the orthogonal complement of that kernel.
pub fn nilpotent_segre(m: &ComplexMatrix, threshold: f64, center: C64) -> Result<Vec<usize>> {
    let k = m.nrows();
    let increments = kernel_increments(m, threshold);
    let staircase: Vec<usize> = increments
        .iter()
        .scan(0, |acc, &b| {
            *acc += b;
            Some(*acc)
        })
        .collect();
    let monotone = increments.windows(2).all(|w| w[0] >= w[1]);
    if !monotone || staircase.last().copied().unwrap_or(0) != k {
        return Err(Error::StaircaseInconsistent {
            center,
            multiplicity: k,
            staircase,
        });
    }
    Ok(segre_from_increments(&increments))
}

fn kernel_increments(m: &ComplexMatrix, threshold: f64) -> Vec<usize> {
    let mut m = m.clone();
    let mut increments = Vec::new();
    while m.nrows() > 0 {
        let size = m.nrows();
        let dec = svd(&m);
        let nu = dec
            .singular_values
            .iter()
            .filter(|&&x| x <= threshold)
            .count();
        if nu == 0 {
            break;
        }
        increments.push(nu);
        if nu == size {
            break;
        }
        let q = ComplexMatrix::from_fn(size, size, |i, j| dec.v[(i, size - 1 - j)]);
        let compressed = q.adjoint() * &m * &q;
        m = compressed
            .view((nu, nu), (size - nu, size - nu))
            .into_owned();
    }
    increments
}

/// `increments[j]` is the number of blocks of size at least `j + 1`.
pub(crate) fn segre_from_increments(increments: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for j in (0..increments.len()).rev() {
        let next = increments.get(j + 1).copied().unwrap_or(0);
        for _ in 0..(increments[j] - next) {
            out.push(j + 1);
        }
    }
    out
}
