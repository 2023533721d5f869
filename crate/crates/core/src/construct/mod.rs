//! Certificate synthesis: idempotent pairs whose commutator or difference
//! realizes or approximates a target, and projection pairs for the
//! projection classes.

mod chains;
mod idempotent;
mod projection;
mod unit;

use serde::{Deserialize, Serialize};

use crate::linalg::{commutator, idempotent_defect, norm2, projection_defect, ComplexMatrix};

pub use idempotent::{
    coi_approximant, coi_pair_diag_balanced, coi_pair_nilpotent_order2, coi_to_doi,
    doi_pair_plusminus,
};
pub use projection::{cop_pair, dop_pair, symmetrize_spectrum};
pub use unit::{doi_approximant, doi_approximant_pm1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    IdempotentCommutator,
    IdempotentDifference,
    ProjectionCommutator,
    ProjectionDifference,
}

impl CertificateKind {
    pub fn is_commutator(self) -> bool {
        matches!(
            self,
            CertificateKind::IdempotentCommutator | CertificateKind::ProjectionCommutator
        )
    }

    pub fn is_projection(self) -> bool {
        matches!(
            self,
            CertificateKind::ProjectionCommutator | CertificateKind::ProjectionDifference
        )
    }

    pub fn combine(self, left: &ComplexMatrix, right: &ComplexMatrix) -> ComplexMatrix {
        if self.is_commutator() {
            commutator(left, right)
        } else {
            left - right
        }
    }
}

/// Two idempotents or projections with their measured residuals.
///
/// `structure_residual` is the worst of `‖E² − E‖ / max(1, ‖E‖²)` over both
/// matrices, and for projections also `‖E − E*‖ / max(1, ‖E‖)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatePair {
    #[serde(with = "crate::io::matrix_serde")]
    pub left: ComplexMatrix,
    #[serde(with = "crate::io::matrix_serde")]
    pub right: ComplexMatrix,
    pub kind: CertificateKind,
    #[serde(with = "crate::io::matrix_serde")]
    pub target: ComplexMatrix,
    pub target_residual: f64,
    pub structure_residual: f64,
}

impl CertificatePair {
    pub fn new(
        left: ComplexMatrix,
        right: ComplexMatrix,
        kind: CertificateKind,
        target: ComplexMatrix,
    ) -> Self {
        let target_residual = norm2(&(kind.combine(&left, &right) - &target));
        let structure_residual = structure_defect(&left, kind).max(structure_defect(&right, kind));
        CertificatePair {
            left,
            right,
            kind,
            target,
            target_residual,
            structure_residual,
        }
    }

    pub fn combine(&self) -> ComplexMatrix {
        self.kind.combine(&self.left, &self.right)
    }

    pub fn swapped(self) -> Self {
        let target = -self.target;
        CertificatePair::new(self.right, self.left, self.kind, target)
    }
}

fn structure_defect(m: &ComplexMatrix, kind: CertificateKind) -> f64 {
    if kind.is_projection() {
        projection_defect(m)
    } else {
        idempotent_defect(m)
    }
}

/// Result of an ε-approximation: the certificate, the exactly realized
/// matrix `x` (`combine(pair) = x` up to rounding), the condition number of
/// the similarity used, and the number of attempts made.
#[derive(Debug, Clone)]
pub struct Approximant {
    pub pair: CertificatePair,
    pub x: ComplexMatrix,
    pub cond: f64,
    pub attempts: usize,
}
