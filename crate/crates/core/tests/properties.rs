mod common;

use common::{
    balanced_matrix, conjugate, jordan_cell, mixed_matrix, mixed_matrix_with_cond, rng,
    separated_matrix, similarity,
};
use idemlab::classify::{
    charpoly_parity, decide, in_clos_coi, in_clos_doi, is_balanced, is_coi, is_cop, is_doi, is_dop,
    is_neg_similar, ClassTag,
};
use idemlab::compact::{sample_truncation, CompactProfile};
use idemlab::construct::{coi_to_doi, cop_pair, dop_pair};
use idemlab::io::{matrix_from_json, matrix_to_json};
use idemlab::linalg::{
    c64, diag, direct_sum, jordan_structure, norm2, riesz_split, spectrum, ComplexMatrix, Region,
    Tolerances, C64,
};
use idemlab::testkit::{brute_distance, random_unitary, sample_class, sample_coi, SamplerConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn verdict(tag: ClassTag, t: &ComplexMatrix) -> bool {
    decide(tag, t, &tol()).unwrap().verdict
}

const SPECTRAL: [ClassTag; 6] = [
    ClassTag::Balanced,
    ClassTag::NegSimilar,
    ClassTag::Coi,
    ClassTag::Doi,
    ClassTag::ClosCoi,
    ClassTag::ClosDoi,
];

/// Sampled class member or mixed random input.
fn input(seed: u64, max_n: usize) -> ComplexMatrix {
    input_with_cond(seed, max_n, 30.0)
}

fn input_with_cond(seed: u64, max_n: usize, cond: f64) -> ComplexMatrix {
    let tags = [ClassTag::Coi, ClassTag::Doi, ClassTag::Cop, ClassTag::Dop];
    match seed % 6 {
        k @ 0..=3 => {
            let n = 2 + (seed / 6) as usize % (max_n - 1);
            let mut cfg = SamplerConfig::new(n, seed);
            cfg.cond_cap = cond;
            sample_class(tags[k as usize], &cfg).unwrap().target
        }
        _ => mixed_matrix_with_cond(seed, max_n, cond),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inclusion_chain_and_closures(seed in any::<u64>()) {
        let t = input(seed, 8);
        let tol = tol();
        let coi = is_coi(&t, &tol).unwrap().verdict;
        let neg = is_neg_similar(&t, &tol).unwrap().verdict;
        let bal = is_balanced(&t, &tol).unwrap().verdict;
        let doi = is_doi(&t, &tol).unwrap().verdict;
        prop_assert!(!coi || neg);
        prop_assert!(!neg || bal);
        prop_assert!(!coi || doi);
        prop_assert!(!coi || in_clos_coi(&t, &tol).unwrap().verdict);
        prop_assert!(!doi || in_clos_doi(&t, &tol).unwrap().verdict);
        prop_assert!(!is_cop(&t, &tol).unwrap().verdict || verdict(ClassTag::ClosCop, &t));
        prop_assert!(!is_dop(&t, &tol).unwrap().verdict || verdict(ClassTag::ClosDop, &t));
    }

    #[test]
    fn spectral_verdicts_survive_similarity(seed in any::<u64>()) {
        let t = match seed % 6 {
            0..=3 => input_with_cond(seed, 6, 2.0),
            _ => separated_matrix(seed, 6, 2.0),
        };
        let mut r = rng(seed ^ 0xA5A5);
        let s = similarity(&mut r, t.nrows(), 1e3);
        let u = conjugate(&s, &t);
        for tag in SPECTRAL {
            prop_assert_eq!(verdict(tag, &t), verdict(tag, &u), "{}", tag);
        }
    }

    #[test]
    fn hermitian_verdicts_survive_unitary_conjugation(seed in any::<u64>()) {
        let t = input(seed, 8);
        let mut r = rng(seed ^ 0x5A5A);
        let q = random_unitary(&mut r, t.nrows());
        let u = &q * &t * q.adjoint();
        for tag in [ClassTag::Cop, ClassTag::Dop, ClassTag::ClosCop, ClassTag::ClosDop] {
            prop_assert_eq!(verdict(tag, &t), verdict(tag, &u), "{}", tag);
        }
    }

    #[test]
    fn adjoint_and_negation_symmetry(seed in any::<u64>()) {
        let t = input(seed, 8);
        let coi = verdict(ClassTag::Coi, &t);
        prop_assert_eq!(coi, verdict(ClassTag::Coi, &t.adjoint()));
        prop_assert_eq!(coi, verdict(ClassTag::Coi, &-&t));
        prop_assert_eq!(verdict(ClassTag::Doi, &t), verdict(ClassTag::Doi, &-&t));
    }

    #[test]
    fn balance_matches_charpoly_parity(seed in any::<u64>()) {
        let t = mixed_matrix(seed, 12);
        prop_assert_eq!(is_balanced(&t, &tol()).unwrap().verdict, charpoly_parity(&t, &tol()).unwrap());
    }

    #[test]
    fn trace_zero_closure_of_differences_is_balance(seed in any::<u64>()) {
        let mut t = mixed_matrix(seed, 8);
        let n = t.nrows();
        let shift = t.trace() / c64(n as f64, 0.0);
        for i in 0..n {
            t[(i, i)] -= shift;
        }
        prop_assert_eq!(verdict(ClassTag::ClosDoi, &t), verdict(ClassTag::Balanced, &t));
    }

    #[test]
    fn cop_and_dop_constructors_agree_with_deciders(seed in any::<u64>()) {
        let t = input(seed, 8);
        let tol = tol();
        let cop = is_cop(&t, &tol).unwrap().verdict;
        match cop_pair(&t, &tol) {
            Ok(pair) => {
                prop_assert!(cop);
                prop_assert!(pair.structure_residual <= tol.residual);
                prop_assert!(pair.target_residual <= 1e-10 * norm2(&t).max(1.0));
                prop_assert!(norm2(&pair.combine()) <= 0.5 + tol.residual);
            }
            Err(_) => prop_assert!(!cop),
        }
        let dop = is_dop(&t, &tol).unwrap().verdict;
        match dop_pair(&t, &tol) {
            Ok(pair) => {
                prop_assert!(dop);
                prop_assert!(pair.structure_residual <= tol.residual);
                prop_assert!(pair.target_residual <= 1e-10 * norm2(&t).max(1.0));
            }
            Err(_) => prop_assert!(!dop),
        }
    }

    #[test]
    fn commutator_witness_difference_is_a_difference(seed in any::<u64>(), n in 2usize..=8) {
        let w = sample_coi(&SamplerConfig::new(n, seed)).unwrap();
        let pair = coi_to_doi(&w.left, &w.right, &tol()).unwrap();
        prop_assert!(pair.structure_residual <= tol().residual);
        let d = pair.combine();
        if norm2(&d) <= tol().residual * norm2(&pair.left).max(norm2(&pair.right)) {
            prop_assert!(verdict(ClassTag::Doi, &(&d * c64(0.0, 0.0))));
        } else {
            prop_assert!(verdict(ClassTag::Doi, &d));
        }
    }

    #[test]
    fn spectrum_is_permutation_invariant(seed in any::<u64>()) {
        let t = mixed_matrix(seed, 10);
        let n = t.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng(seed));
        let p = ComplexMatrix::from_fn(n, n, |i, j| c64(f64::from(u8::from(order[i] == j)), 0.0));
        let a = spectrum(&t, &tol()).unwrap();
        let b = spectrum(&(&p * &t * p.transpose()), &tol()).unwrap();
        let mut ma: Vec<usize> = a.clusters.iter().map(|c| c.multiplicity).collect();
        let mut mb: Vec<usize> = b.clusters.iter().map(|c| c.multiplicity).collect();
        ma.sort_unstable();
        mb.sort_unstable();
        prop_assert_eq!(ma, mb);
    }

    #[test]
    fn jordan_structure_of_conjugated_cells(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=12);
        let eigenvalues = [c64(0.0, 0.0), c64(1.0, 0.0), c64(-0.5, 0.5)];
        let mut cells: Vec<Vec<usize>> = vec![Vec::new(); 3];
        let mut used = 0;
        while used < n {
            let m = r.random_range(1..=3.min(n - used));
            let at = r.random_range(0..3);
            let at = (at..at + 3)
                .map(|i| i % 3)
                .find(|&i| cells[i].iter().sum::<usize>() + m <= 8)
                .unwrap();
            cells[at].push(m);
            used += m;
        }
        let blocks: Vec<ComplexMatrix> = cells
            .iter()
            .zip(eigenvalues)
            .flat_map(|(sizes, lambda)| sizes.iter().map(move |&m| jordan_cell(lambda, m)))
            .collect();
        let s = similarity(&mut r, n, 10.0);
        let t = conjugate(&s, &direct_sum(&blocks));
        let structure = jordan_structure(&t, &tol()).unwrap();
        for (sizes, lambda) in cells.iter_mut().zip(eigenvalues) {
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            prop_assert_eq!(&structure.segre_near(lambda), sizes);
        }
    }

    #[test]
    fn riesz_split_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=8);
        let values: Vec<C64> = (0..n)
            .map(|i| {
                let side = if i % 2 == 0 { 1.0 } else { -1.0 };
                c64(side * r.random_range(0.5..2.0), r.random_range(-1.0..1.0))
            })
            .collect();
        let mut j = diag(&values);
        for i in 0..n - 1 {
            j[(i, i + 1)] = c64(r.random_range(-1.0..1.0), 0.0);
        }
        let s = similarity(&mut r, n, 10.0);
        let t = conjugate(&s, &j);
        let split = riesz_split(&t, &[Region::right_half_plane(), Region::left_half_plane()], &tol()).unwrap();
        let err = norm2(&(split.reassemble() - &t));
        prop_assert!(err <= 1e2 * tol().residual * norm2(&t) * split.cond, "err {err:e}, cond {}", split.cond);
    }

    #[test]
    fn matrix_file_round_trip_is_bit_identical(
        n in 0usize..5,
        raw in proptest::collection::vec((any::<f64>(), any::<f64>()), 16),
    ) {
        let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let (re, im) = raw[(i * n + j) % raw.len()];
            c64(finite(re), finite(im))
        });
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn paired_truncations_are_balanced(seed in any::<u64>(), n in 2usize..=24, ratio in 0.2f64..0.9) {
        let t = sample_truncation(&CompactProfile::geometric(ratio, seed), n).unwrap();
        prop_assert!(verdict(ClassTag::Balanced, &t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn brute_distance_is_monotone_in_budget(seed in any::<u64>(), tag_index in 0usize..4) {
        let tag = [ClassTag::Coi, ClassTag::Doi, ClassTag::Cop, ClassTag::Dop][tag_index];
        let t = mixed_matrix(seed, 3);
        let cfg = SamplerConfig::new(t.nrows(), seed);
        let mut last = f64::INFINITY;
        for budget in [1, 2, 4] {
            let d = brute_distance(&t, tag, budget, &cfg).unwrap();
            prop_assert!(d <= last, "budget {budget}: {d} > {last}");
            last = d;
        }
    }
}

#[test]
fn balanced_generator_is_balanced() {
    for seed in 0..50 {
        let mut r = rng(seed);
        let t = balanced_matrix(&mut r, 6, 3, 30.0);
        assert!(verdict(ClassTag::Balanced, &t), "seed {seed}");
    }
}
