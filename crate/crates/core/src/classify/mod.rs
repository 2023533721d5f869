//! Membership deciders. Every decider returns a [`MembershipReport`] whose
//! verdict is the conjunction of the named conditions in its evidence.

mod hermitian;
mod parity;
pub(crate) mod spectral;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerances, C64};

pub use hermitian::{in_clos_cop, in_clos_dop, is_cop, is_dop};
pub use parity::{charpoly_coefficients, charpoly_parity};
pub use spectral::{
    in_clos_coi, in_clos_doi, is_balanced, is_coi, is_doi, is_neg_similar, segre_has_square_root,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    Balanced,
    NegSimilar,
    Coi,
    Doi,
    ClosCoi,
    ClosDoi,
    Cop,
    Dop,
    ClosCop,
    ClosDop,
}

impl ClassTag {
    pub const ALL: [ClassTag; 10] = [
        ClassTag::Balanced,
        ClassTag::NegSimilar,
        ClassTag::Coi,
        ClassTag::Doi,
        ClassTag::ClosCoi,
        ClassTag::ClosDoi,
        ClassTag::Cop,
        ClassTag::Dop,
        ClassTag::ClosCop,
        ClassTag::ClosDop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassTag::Balanced => "balanced",
            ClassTag::NegSimilar => "neg_similar",
            ClassTag::Coi => "coi",
            ClassTag::Doi => "doi",
            ClassTag::ClosCoi => "clos_coi",
            ClassTag::ClosDoi => "clos_doi",
            ClassTag::Cop => "cop",
            ClassTag::Dop => "dop",
            ClassTag::ClosCop => "clos_cop",
            ClassTag::ClosDop => "clos_dop",
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown class `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One row of a negation pairing table: `μ(α)` against `μ(−α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub alpha: C64,
    pub neg_alpha: C64,
    pub mult_alpha: usize,
    pub mult_neg_alpha: usize,
}

/// Segre sequences at `α` and `−α` side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegrePairingRow {
    pub alpha: C64,
    pub neg_alpha: C64,
    pub segre_alpha: Vec<usize>,
    pub segre_neg_alpha: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub conditions: Vec<Condition>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub pairing: Vec<PairingRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub segre_pairing: Vec<SegrePairingRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<i64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub nullities: BTreeMap<String, usize>,
    /// Segre sequence at 0 of `T1² + I/4` for the i/2 component `T1`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub component_segre: Option<Vec<usize>>,
    /// Agreement of the characteristic-polynomial parity cross-check.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parity_agrees: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Evidence {
    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.conditions.push(Condition {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub class_tag: ClassTag,
    pub verdict: bool,
    pub evidence: Evidence,
    pub tol_used: Tolerances,
}

impl MembershipReport {
    pub(crate) fn new(class_tag: ClassTag, evidence: Evidence, tol: &Tolerances) -> Self {
        MembershipReport {
            class_tag,
            verdict: evidence.all_passed(),
            evidence,
            tol_used: *tol,
        }
    }
}

/// Runs the decider for `tag`.
pub fn decide(tag: ClassTag, t: &ComplexMatrix, tol: &Tolerances) -> Result<MembershipReport> {
    match tag {
        ClassTag::Balanced => is_balanced(t, tol),
        ClassTag::NegSimilar => is_neg_similar(t, tol),
        ClassTag::Coi => is_coi(t, tol),
        ClassTag::Doi => is_doi(t, tol),
        ClassTag::ClosCoi => in_clos_coi(t, tol),
        ClassTag::ClosDoi => in_clos_doi(t, tol),
        ClassTag::Cop => is_cop(t, tol),
        ClassTag::Dop => is_dop(t, tol),
        ClassTag::ClosCop => in_clos_cop(t, tol),
        ClassTag::ClosDop => in_clos_dop(t, tol),
    }
}
