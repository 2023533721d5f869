//! Finite sections of compact operators: triangular truncations with
//! decaying ±-paired spectra, residual sweeps of commutator approximants
//! over growing dimension, and two packaged witnesses.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{in_clos_coi, is_coi, is_neg_similar, MembershipReport};
use crate::construct::coi_approximant;
use crate::error::{Error, Result};
use crate::linalg::{c64, direct_sum, from_rows, ComplexMatrix, Tolerances, C64};
use crate::testkit::random_unitary;

/// How the eigenvalue magnitudes `a_1 ≥ a_2 ≥ …` decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decay {
    /// `a_k = ratio^(k−1)` with `0 < ratio < 1`.
    Geometric(f64),
    /// `a_k = k^(−exponent)` with `exponent > 0`.
    Power(f64),
}

impl Decay {
    fn validate(self) -> Result<()> {
        match self {
            Decay::Geometric(r) if r > 0.0 && r < 1.0 => Ok(()),
            Decay::Power(p) if p > 0.0 && p.is_finite() => Ok(()),
            Decay::Geometric(r) => Err(Error::Precondition(format!(
                "geometric ratio must lie in (0, 1), got {r}"
            ))),
            Decay::Power(p) => Err(Error::Precondition(format!(
                "power exponent must be positive, got {p}"
            ))),
        }
    }

    /// `a_k` for `k ≥ 1`.
    pub fn magnitude(self, k: usize) -> f64 {
        match self {
            Decay::Geometric(r) => r.powi(k as i32 - 1),
            Decay::Power(p) => (k as f64).powf(-p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactProfile {
    pub decay: Decay,
    /// Eigenvalues come as `±a_k`; otherwise each `a_k` gets a random phase.
    pub paired: bool,
    /// Number of trailing diagonal zeros (a nilpotent tail).
    pub nilpotent_tail_dim: usize,
    pub seed: u64,
}

impl CompactProfile {
    pub fn geometric(ratio: f64, seed: u64) -> Self {
        CompactProfile {
            decay: Decay::Geometric(ratio),
            paired: true,
            nilpotent_tail_dim: 0,
            seed,
        }
    }
}

fn truncation_rng(seed: u64, n: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// An `n×n` matrix `Q R Q*` with `Q` a random unitary and `R` upper
/// triangular. The diagonal of `R` follows the profile: `a_1, −a_1, a_2,
/// −a_2, …` when paired (a trailing odd slot gets 0), `a_k e^{iφ_k}` with
/// random phases otherwise, and zeros on the nilpotent tail. The entry
/// `R_ij`, `i < j`, has modulus at most `½ √(w_i w_j)`, where `w_i` is the
/// magnitude scale of slot `i`.
pub fn sample_truncation(profile: &CompactProfile, n: usize) -> Result<ComplexMatrix> {
    profile.decay.validate()?;
    if n < 2 {
        return Err(Error::Precondition(format!(
            "truncation dimension must be at least 2, got {n}"
        )));
    }
    if profile.nilpotent_tail_dim > n {
        return Err(Error::Precondition(format!(
            "nilpotent tail of dimension {} exceeds n = {n}",
            profile.nilpotent_tail_dim
        )));
    }
    let mut rng = truncation_rng(profile.seed, n);
    let m = n - profile.nilpotent_tail_dim;
    let mut weights = Vec::with_capacity(n);
    let mut diagonal = Vec::with_capacity(n);
    for i in 0..n {
        if i >= m {
            weights.push(profile.decay.magnitude(i + 1));
            diagonal.push(c64(0.0, 0.0));
        } else if profile.paired {
            let k = i / 2 + 1;
            let a = profile.decay.magnitude(k);
            weights.push(a);
            if i + 1 == m && m % 2 == 1 {
                diagonal.push(c64(0.0, 0.0));
            } else if i % 2 == 0 {
                diagonal.push(c64(a, 0.0));
            } else {
                diagonal.push(c64(-a, 0.0));
            }
        } else {
            let a = profile.decay.magnitude(i + 1);
            weights.push(a);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            diagonal.push(C64::from_polar(a, phase));
        }
    }
    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = diagonal[i];
        for j in (i + 1)..n {
            let bound = 0.5 * (weights[i] * weights[j]).sqrt();
            let modulus = bound * rng.random::<f64>();
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            r[(i, j)] = C64::from_polar(modulus, phase);
        }
    }
    let q = random_unitary(&mut rng, n);
    Ok(&q * r * q.adjoint())
}

/// One row of a truncation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// `‖[E, F] − T_n‖₂` achieved by the commutator approximant.
    pub residual: f64,
    /// Condition number of the diagonalizing similarity.
    pub cond: f64,
    pub seed: u64,
}

/// Runs [`coi_approximant`] on `sample_truncation(profile, n)` for each
/// `n` in `dims` and records the achieved residual and conditioning.
pub fn truncation_residual_sweep(
    profile: &CompactProfile,
    dims: &[usize],
    eps: f64,
    tol: &Tolerances,
) -> Result<Vec<SweepRow>> {
    profile.decay.validate()?;
    if !profile.paired {
        return Err(Error::Precondition("sweeps need a paired profile".into()));
    }
    dims.iter()
        .map(|&n| {
            let t = sample_truncation(profile, n)?;
            let a = coi_approximant(&t, eps, tol)?;
            Ok(SweepRow {
                n,
                residual: a.pair.target_residual,
                cond: a.cond,
                seed: profile.seed,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with header `n,residual,cond,seed`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Precondition(format!("csv output failed: {e}"));
    if rows.is_empty() {
        w.write_record(["n", "residual", "cond", "seed"])
            .map_err(io)?;
    }
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Precondition(format!("csv output failed: {e}")))?;
    Ok(())
}

pub fn sweep_to_json(rows: &[SweepRow]) -> String {
    serde_json::to_string_pretty(rows).expect("sweep rows serialize")
}

/// A matrix that is negation-similar and in the closure of commutators of
/// idempotents without being one, with the three decider reports.
#[derive(Debug, Clone)]
pub struct ClosureGapWitness {
    pub t: ComplexMatrix,
    pub coi: MembershipReport,
    pub neg_similar: MembershipReport,
    pub clos_coi: MembershipReport,
}

/// `T₀ = A₀ ⊕ −A₀` with `A₀ = [[i/2, 1], [0, i/2]]`.
pub fn closure_gap_matrix() -> ComplexMatrix {
    let h = c64(0.0, 0.5);
    let a0 = from_rows(&[&[h, c64(1.0, 0.0)], &[c64(0.0, 0.0), h]]);
    direct_sum(&[a0.clone(), -a0])
}

pub fn closure_gap_witness(tol: &Tolerances) -> Result<ClosureGapWitness> {
    let t = closure_gap_matrix();
    Ok(ClosureGapWitness {
        coi: is_coi(&t, tol)?,
        neg_similar: is_neg_similar(&t, tol)?,
        clos_coi: in_clos_coi(&t, tol)?,
        t,
    })
}

/// `K_n = ⊕_{k ≤ n} [[0, 1/k], [0, 0]]` together with the idempotents
/// `E_n = ⊕ [[1, 0], [0, 0]]` and `F_n = ⊕ [[1, 1/k], [0, 0]]`, for which
/// `[E_n, F_n] = K_n` exactly.
pub fn rank_one_cells_truncation(n: usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let mut k = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut e = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut f = ComplexMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let a = c64(1.0 / (j + 1) as f64, 0.0);
        let p = 2 * j;
        k[(p, p + 1)] = a;
        e[(p, p)] = c64(1.0, 0.0);
        f[(p, p)] = c64(1.0, 0.0);
        f[(p, p + 1)] = a;
    }
    (k, e, f)
}
