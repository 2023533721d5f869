//! Seeded matrix generators shared by the integration suites.
#![allow(dead_code)]

use idemlab::classify::ClassTag;
use idemlab::linalg::{c64, direct_sum, invert, zeros, ComplexMatrix, C64};
use idemlab::testkit::{
    gaussian_matrix, random_unitary, sample_class, sample_doi, RankLaw, SamplerConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let phase = std::f64::consts::TAU * rng.random::<f64>();
    C64::from_polar(r, phase)
}

pub fn jordan_cell(lambda: C64, m: usize) -> ComplexMatrix {
    let mut j = zeros(m);
    for i in 0..m {
        j[(i, i)] = lambda;
        if i + 1 < m {
            j[(i, i + 1)] = c64(1.0, 0.0);
        }
    }
    j
}

/// `U·diag(σ)·V` with singular values spread geometrically over `[1/cond, 1]`.
pub fn similarity<R: Rng>(rng: &mut R, n: usize, cond: f64) -> (ComplexMatrix, ComplexMatrix) {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let mut sigma = zeros(n);
    for i in 0..n {
        let t = if n > 1 {
            i as f64 / (n - 1) as f64
        } else {
            0.0
        };
        sigma[(i, i)] = c64(cond.powf(-t), 0.0);
    }
    let s = u * sigma * v;
    let s_inv = invert(&s).expect("similarity is invertible");
    (s, s_inv)
}

pub fn conjugate(s: &(ComplexMatrix, ComplexMatrix), t: &ComplexMatrix) -> ComplexMatrix {
    &s.0 * t * &s.1
}

/// Random direct sum of Jordan cells `J_m(λ) ⊕ J_m(−λ)` plus nilpotent
/// cells, conjugated by a similarity of condition `cond`.
pub fn balanced_matrix<R: Rng>(rng: &mut R, n: usize, max_cell: usize, cond: f64) -> ComplexMatrix {
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < n {
        let left = n - used;
        let m = rng.random_range(1..=max_cell.min(left));
        if 2 * m <= left && rng.random_bool(0.75) {
            let lambda = random_complex(rng, 1.0) + C64::from_polar(0.2, rng.random::<f64>() * 6.0);
            blocks.push(jordan_cell(lambda, m));
            blocks.push(jordan_cell(-lambda, m));
            used += 2 * m;
        } else {
            blocks.push(jordan_cell(c64(0.0, 0.0), m));
            used += m;
        }
    }
    let j = direct_sum(&blocks);
    let s = similarity(rng, n, cond);
    conjugate(&s, &j)
}

/// A balanced matrix with one eigenvalue pushed off its partner by `gap`.
pub fn unbalanced_matrix<R: Rng>(rng: &mut R, n: usize, gap: f64, cond: f64) -> ComplexMatrix {
    let mut values: Vec<C64> = Vec::with_capacity(n);
    while values.len() + 1 < n {
        let lambda = random_complex(rng, 1.0) + C64::from_polar(0.2, rng.random::<f64>() * 6.0);
        values.push(lambda);
        values.push(-lambda);
    }
    if values.len() < n {
        values.push(c64(0.0, 0.0));
    }
    values[0] += C64::from_polar(gap, rng.random::<f64>() * 6.0);
    let j = idemlab::linalg::diag(&values);
    let s = similarity(rng, n, cond);
    conjugate(&s, &j)
}

/// Gaussian, balanced, unbalanced or trace-shifted input, chosen by the seed.
pub fn mixed_matrix(seed: u64, max_n: usize) -> ComplexMatrix {
    mixed_matrix_with_cond(seed, max_n, 30.0)
}

pub fn mixed_matrix_with_cond(seed: u64, max_n: usize, cond: f64) -> ComplexMatrix {
    pick_matrix(seed, max_n, cond, 4)
}

/// Like `mixed_matrix_with_cond` without the tight shifted clusters, so
/// distinct eigenvalues stay resolvable after a further similarity.
pub fn separated_matrix(seed: u64, max_n: usize, cond: f64) -> ComplexMatrix {
    pick_matrix(seed, max_n, cond, 3)
}

fn pick_matrix(seed: u64, max_n: usize, cond: f64, kinds: u32) -> ComplexMatrix {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_n);
    match r.random_range(0..kinds) {
        0 => gaussian_matrix(&mut r, n, n),
        1 => balanced_matrix(&mut r, n, 3, cond),
        2 => unbalanced_matrix(&mut r, n, 1e-2, cond),
        _ => {
            let g = gaussian_matrix(&mut r, n, n);
            let shift = c64((r.random_range(0..3) as f64) - 1.0, 0.0);
            let mut t = g * c64(1e-1, 0.0);
            for i in 0..n {
                t[(i, i)] += shift;
            }
            t
        }
    }
}

/// Random balanced matrix with simple or two-cell Jordan structure, or a
/// sampled commutator of idempotents.
pub fn coi_input(seed: u64) -> ComplexMatrix {
    let mut r = rng(seed ^ 0xC01);
    let n = r.random_range(2..=16);
    match seed % 3 {
        0 => balanced_matrix(&mut r, n, 1, 10.0),
        1 => balanced_matrix(&mut r, n, 2, 10.0),
        _ => {
            let mut cfg = SamplerConfig::new(n, seed);
            cfg.rank_law = RankLaw::Interior;
            sample_class(ClassTag::Coi, &cfg).unwrap().target
        }
    }
}

/// Jordan cells of size at most 2 at 1 and −1 plus a balanced part whose
/// eigenvalues stay in the annulus `0.2 ≤ |λ| ≤ 0.6`, or a sampled
/// difference of idempotents.
pub fn doi_input(seed: u64) -> ComplexMatrix {
    let mut r = rng(seed ^ 0xD01);
    let n = r.random_range(2..=16);
    if seed % 3 == 0 {
        return sample_doi(&SamplerConfig::new(n, seed)).unwrap().target;
    }
    let unit = r.random_range(1..=n.min(6));
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < unit {
        let m = r.random_range(1..=(unit - used).min(2));
        let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
        blocks.push(jordan_cell(c64(sign, 0.0), m));
        used += m;
    }
    while used < n {
        let left = n - used;
        let m = r.random_range(1..=left.min(2));
        if 2 * m <= left && r.random_bool(0.75) {
            let lambda = C64::from_polar(
                0.2 + 0.4 * r.random::<f64>(),
                std::f64::consts::TAU * r.random::<f64>(),
            );
            blocks.push(jordan_cell(lambda, m));
            blocks.push(jordan_cell(-lambda, m));
            used += 2 * m;
        } else {
            blocks.push(jordan_cell(c64(0.0, 0.0), m));
            used += m;
        }
    }
    let s = similarity(&mut r, n, 10.0);
    conjugate(&s, &direct_sum(&blocks))
}
