//! Reference samplers that produce class members by definition, a
//! combinatorial square-root oracle for nilpotent Jordan structures, and a
//! Monte-Carlo upper bound on the distance to a class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classify::ClassTag;
use crate::error::{Error, Result};
use crate::linalg::{c64, invert, norm2, validate, ComplexMatrix};

/// How the rank of each sampled idempotent or projection is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankLaw {
    /// Uniform on `0..=n`.
    Uniform,
    /// Uniform on `1..n` (any rank for `n = 1`).
    Interior,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    /// Bound on `cond₂(S)` for the similarity behind a sampled idempotent.
    pub cond_cap: f64,
    pub rank_law: RankLaw,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerConfig {
            n,
            seed,
            cond_cap: 1e3,
            rank_law: RankLaw::Uniform,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cond_cap >= 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "cond_cap must be at least 1, got {}",
                self.cond_cap
            )));
        }
        if let RankLaw::Fixed(k) = self.rank_law {
            if k > self.n {
                return Err(Error::Precondition(format!(
                    "fixed rank {k} exceeds n = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// A sampled class member together with the pair that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(with = "crate::io::matrix_serde")]
    pub target: ComplexMatrix,
    #[serde(with = "crate::io::matrix_serde")]
    pub left: ComplexMatrix,
    #[serde(with = "crate::io::matrix_serde")]
    pub right: ComplexMatrix,
}

/// Complex Gaussian matrix with independent standard entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(
            rng.sample::<f64, _>(StandardNormal) * h,
            rng.sample::<f64, _>(StandardNormal) * h,
        )
    })
}

/// Haar-like random unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    orthonormal_frame(&gaussian_matrix(rng, n, n))
}

fn orthonormal_frame(m: &ComplexMatrix) -> ComplexMatrix {
    if m.ncols() == 0 {
        return ComplexMatrix::zeros(m.nrows(), 0);
    }
    m.clone().qr().q()
}

fn draw_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, law: RankLaw) -> usize {
    match law {
        RankLaw::Uniform => rng.random_range(0..=n),
        RankLaw::Interior if n >= 2 => rng.random_range(1..n),
        RankLaw::Interior => rng.random_range(0..=n),
        RankLaw::Fixed(k) => k,
    }
}

/// Invertible `S` and `S⁻¹` with singular values of a Gaussian matrix
/// clamped into `[σ_max / cap, σ_max]`.
fn conditioned_similarity<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    cap: f64,
) -> (ComplexMatrix, ComplexMatrix) {
    let svd = gaussian_matrix(rng, n, n).svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let floor = smax / cap;
    let sig: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| s.max(floor) / smax)
        .collect();
    let scale = |inv: bool| {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            sig.iter().map(|&s| c64(if inv { 1.0 / s } else { s }, 0.0)),
        ))
    };
    let s = &u * scale(false) * &v_t;
    let s_inv = v_t.adjoint() * scale(true) * u.adjoint();
    (s, s_inv)
}

/// `S · diag(I_k, 0) · S⁻¹`, exactly `I` for `k = n`.
fn idempotent_from(s: &ComplexMatrix, s_inv: &ComplexMatrix, k: usize) -> ComplexMatrix {
    if k == s.nrows() {
        return crate::linalg::identity(k);
    }
    s.columns(0, k) * s_inv.rows(0, k)
}

fn draw_idempotent<R: Rng + ?Sized>(rng: &mut R, cfg: &SamplerConfig) -> ComplexMatrix {
    let k = draw_rank(rng, cfg.n, cfg.rank_law);
    let (s, s_inv) = conditioned_similarity(rng, cfg.n, cfg.cond_cap);
    idempotent_from(&s, &s_inv, k)
}

fn draw_projection<R: Rng + ?Sized>(rng: &mut R, cfg: &SamplerConfig) -> ComplexMatrix {
    let k = draw_rank(rng, cfg.n, cfg.rank_law);
    projection_from_frame(&gaussian_matrix(rng, cfg.n, k))
}

fn projection_from_frame(frame: &ComplexMatrix) -> ComplexMatrix {
    if frame.ncols() == frame.nrows() {
        return crate::linalg::identity(frame.nrows());
    }
    let q = orthonormal_frame(frame);
    let p = &q * q.adjoint();
    (&p + p.adjoint()) * c64(0.5, 0.0)
}

/// Random idempotent `S · diag(I_k, 0) · S⁻¹` with `cond₂(S) ≤ cond_cap`.
pub fn sample_idempotent(cfg: &SamplerConfig) -> Result<ComplexMatrix> {
    cfg.validate()?;
    Ok(draw_idempotent(&mut cfg.rng(), cfg))
}

fn idempotent_pair(cfg: &SamplerConfig) -> Result<(ComplexMatrix, ComplexMatrix)> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let e = draw_idempotent(&mut rng, cfg);
    let f = draw_idempotent(&mut rng, cfg);
    Ok((e, f))
}

fn projection_pair(cfg: &SamplerConfig) -> Result<(ComplexMatrix, ComplexMatrix)> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let p = draw_projection(&mut rng, cfg);
    let q = draw_projection(&mut rng, cfg);
    Ok((p, q))
}

/// `T = [E, F]` for two independent random idempotents.
pub fn sample_coi(cfg: &SamplerConfig) -> Result<Witness> {
    let (e, f) = idempotent_pair(cfg)?;
    Ok(Witness {
        target: &e * &f - &f * &e,
        left: e,
        right: f,
    })
}

/// `T = E − F` for two independent random idempotents.
pub fn sample_doi(cfg: &SamplerConfig) -> Result<Witness> {
    let (e, f) = idempotent_pair(cfg)?;
    Ok(Witness {
        target: &e - &f,
        left: e,
        right: f,
    })
}

/// `T = [P, Q]` for two independent random orthogonal projections.
pub fn sample_cop(cfg: &SamplerConfig) -> Result<Witness> {
    let (p, q) = projection_pair(cfg)?;
    Ok(Witness {
        target: &p * &q - &q * &p,
        left: p,
        right: q,
    })
}

/// `H = P − Q` for two independent random orthogonal projections.
pub fn sample_dop(cfg: &SamplerConfig) -> Result<Witness> {
    let (p, q) = projection_pair(cfg)?;
    Ok(Witness {
        target: &p - &q,
        left: p,
        right: q,
    })
}

/// Sampler for one of the four exact classes.
pub fn sample_class(tag: ClassTag, cfg: &SamplerConfig) -> Result<Witness> {
    match tag {
        ClassTag::Coi => sample_coi(cfg),
        ClassTag::Doi => sample_doi(cfg),
        ClassTag::Cop => sample_cop(cfg),
        ClassTag::Dop => sample_dop(cfg),
        other => Err(Error::Precondition(format!("no sampler for class {other}"))),
    }
}

/// Parts of the Jordan structure of the square of a nilpotent cell of size
/// `m`: sizes `⌈m/2⌉` and `⌊m/2⌋`, dropping a zero.
pub fn squared_cell_parts(m: usize) -> Vec<usize> {
    [m.div_ceil(2), m / 2]
        .into_iter()
        .filter(|&p| p > 0)
        .collect()
}

/// Integer partitions of `total` into parts at most `max`, in decreasing
/// order.
fn partitions(total: usize, max: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(total)).rev() {
        for mut rest in partitions(total - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A multiset of nilpotent cell sizes whose squares have exactly the given
/// Segre sequence, found by enumerating every partition of its sum.
pub fn nilpotent_sqrt_sources(segre: &[usize]) -> Option<Vec<usize>> {
    let mut target: Vec<usize> = segre.iter().copied().filter(|&m| m > 0).collect();
    target.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = target.iter().sum();
    partitions(total, total.max(1)).into_iter().find(|sources| {
        let mut parts: Vec<usize> = sources
            .iter()
            .flat_map(|&m| squared_cell_parts(m))
            .collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts == target
    })
}

/// Whether a nilpotent matrix with this Segre sequence has a square root.
/// Exhaustive over the partitions of the sum, so intended for small sums
/// (at most 12 or so).
pub fn nilpotent_sqrt_oracle(segre: &[usize]) -> bool {
    nilpotent_sqrt_sources(segre).is_some()
}

/// Seed of the `i`-th draw in a brute-force stream; draw 0 reuses the
/// configured seed so a matrix sampled with `cfg` is found at distance 0.
fn stream_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Sampler parameters refined by coordinate descent.
enum Params {
    Idempotents {
        s: [ComplexMatrix; 2],
        k: [usize; 2],
    },
    Projections {
        frames: [ComplexMatrix; 2],
    },
}

impl Params {
    fn draw(tag: ClassTag, cfg: &SamplerConfig) -> Self {
        let mut rng = cfg.rng();
        match tag {
            ClassTag::Coi | ClassTag::Doi => {
                let k1 = draw_rank(&mut rng, cfg.n, cfg.rank_law);
                let (s1, _) = conditioned_similarity(&mut rng, cfg.n, cfg.cond_cap);
                let k2 = draw_rank(&mut rng, cfg.n, cfg.rank_law);
                let (s2, _) = conditioned_similarity(&mut rng, cfg.n, cfg.cond_cap);
                Params::Idempotents {
                    s: [s1, s2],
                    k: [k1, k2],
                }
            }
            _ => {
                let k1 = draw_rank(&mut rng, cfg.n, cfg.rank_law);
                let f1 = gaussian_matrix(&mut rng, cfg.n, k1);
                let k2 = draw_rank(&mut rng, cfg.n, cfg.rank_law);
                let f2 = gaussian_matrix(&mut rng, cfg.n, k2);
                Params::Projections { frames: [f1, f2] }
            }
        }
    }

    fn matrices_mut(&mut self) -> [&mut ComplexMatrix; 2] {
        match self {
            Params::Idempotents { s: [a, b], .. } | Params::Projections { frames: [a, b] } => {
                [a, b]
            }
        }
    }

    fn member(&self, tag: ClassTag) -> Option<ComplexMatrix> {
        let (a, b) = match self {
            Params::Idempotents { s, k } => {
                let a = idempotent_from(&s[0], &invert(&s[0]).ok()?, k[0]);
                let b = idempotent_from(&s[1], &invert(&s[1]).ok()?, k[1]);
                (a, b)
            }
            Params::Projections { frames } => (
                projection_from_frame(&frames[0]),
                projection_from_frame(&frames[1]),
            ),
        };
        Some(match tag {
            ClassTag::Coi | ClassTag::Cop => &a * &b - &b * &a,
            _ => a - b,
        })
    }
}

fn distance(t: &ComplexMatrix, params: &Params, tag: ClassTag) -> f64 {
    match params.member(tag) {
        Some(m) => {
            let d = norm2(&(t - m));
            if d.is_finite() {
                d
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    }
}

/// Coordinate descent on the real and imaginary parts of every sampler
/// parameter, halving the step after each sweep without improvement.
fn refine(t: &ComplexMatrix, params: &mut Params, tag: ClassTag) -> f64 {
    let mut best = distance(t, params, tag);
    let mut step = 0.1;
    for _ in 0..4 {
        let mut improved = false;
        for which in 0..2 {
            let (rows, cols) = params.matrices_mut()[which].shape();
            for i in 0..rows {
                for j in 0..cols {
                    for dir in [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0)] {
                        let delta = dir * step;
                        params.matrices_mut()[which][(i, j)] += delta;
                        let d = distance(t, params, tag);
                        if d < best {
                            best = d;
                            improved = true;
                        } else {
                            params.matrices_mut()[which][(i, j)] -= delta;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Upper bound on the distance from `t` to one of the four exact classes:
/// the minimum over `budget` seeded draws, each refined by coordinate
/// descent. Draw `i` depends only on `(cfg, i)`, so the bound is
/// non-increasing in `budget`.
pub fn brute_distance(
    t: &ComplexMatrix,
    tag: ClassTag,
    budget: usize,
    cfg: &SamplerConfig,
) -> Result<f64> {
    validate(t)?;
    cfg.validate()?;
    if !matches!(
        tag,
        ClassTag::Coi | ClassTag::Doi | ClassTag::Cop | ClassTag::Dop
    ) {
        return Err(Error::Precondition(format!("no sampler for class {tag}")));
    }
    if t.nrows() != cfg.n {
        return Err(Error::DimensionMismatch(format!(
            "T is {0}x{0}, sampler dimension is {1}",
            t.nrows(),
            cfg.n
        )));
    }
    let mut best = f64::INFINITY;
    for i in 0..budget {
        let draw_cfg = SamplerConfig {
            seed: stream_seed(cfg.seed, i),
            ..*cfg
        };
        let mut params = Params::draw(tag, &draw_cfg);
        best = best.min(refine(t, &mut params, tag));
    }
    Ok(best)
}
