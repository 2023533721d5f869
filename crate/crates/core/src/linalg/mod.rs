//! Spectral primitives: Schur form, eigenvalue clustering, nullity
//! staircases, Jordan structure, Sylvester solves and Riesz splitting.

pub mod dense;
mod jordan;
mod riesz;
mod schur;
mod spectrum;
mod sylvester;

pub use dense::*;
pub use jordan::{
    cluster_segre, cluster_threshold, jordan_structure, nilpotent_segre, nullity, segre_at,
    structure_from_analysis, JordanStructure,
};
pub use riesz::{riesz_split, split_by_clusters, Region, RieszSplit};
pub use schur::{schur, SchurForm};
pub use spectrum::{analyze, spectrum, Cluster, SpectralAnalysis, SpectrumReport};
pub use sylvester::{sylvester_solve, triangular_sylvester};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every decider and constructor.
///
/// `eig_cluster` is relative to the spectral norm of the matrix under study;
/// `rank_rel` is relative to the largest singular value of the matrix whose
/// rank is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eig_cluster: f64,
    pub rank_rel: f64,
    pub residual: f64,
    pub cond_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig_cluster: 1e-6,
            rank_rel: 1e-8,
            residual: 1e-8,
            cond_cap: 1e8,
        }
    }
}

impl Tolerances {
    /// Named presets: `default`, `strict`, `loose`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "strict" => Ok(Tolerances {
                eig_cluster: 1e-9,
                rank_rel: 1e-11,
                residual: 1e-11,
                cond_cap: 1e8,
            }),
            "loose" => Ok(Tolerances {
                eig_cluster: 1e-4,
                rank_rel: 1e-6,
                residual: 1e-6,
                cond_cap: 1e8,
            }),
            other => Err(Error::InvalidTolerance(format!(
                "unknown tolerance preset `{other}` (expected default, strict or loose)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eig_cluster", self.eig_cluster),
            ("rank_rel", self.rank_rel),
            ("residual", self.residual),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.cond_cap.is_finite() && self.cond_cap >= 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "cond_cap must be finite and >= 1, got {}",
                self.cond_cap
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in ["default", "strict", "loose"] {
            Tolerances::preset(name).unwrap().validate().unwrap();
        }
        assert!(Tolerances::preset("fast").is_err());
    }

    #[test]
    fn bad_tolerances_rejected() {
        let mut t = Tolerances::default();
        t.cond_cap = 0.5;
        assert!(t.validate().is_err());
        let mut t = Tolerances::default();
        t.rank_rel = -1.0;
        assert!(t.validate().is_err());
    }
}
