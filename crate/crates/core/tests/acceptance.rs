//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use common::{coi_input, doi_input, jordan_cell, mixed_matrix};
use idemlab::classify::{
    charpoly_parity, in_clos_coi, in_clos_doi, is_balanced, is_coi, is_cop, is_doi, is_dop,
    is_neg_similar, segre_has_square_root, ClassTag,
};
use idemlab::compact::{
    closure_gap_witness, rank_one_cells_truncation, truncation_residual_sweep, write_sweep_csv,
    CompactProfile,
};
use idemlab::construct::{coi_approximant, cop_pair, doi_approximant, dop_pair};
use idemlab::linalg::{
    c64, commutator, direct_sum, from_real_rows, identity, jordan_structure, norm2, nullity, trace,
    ComplexMatrix, Tolerances,
};
use idemlab::testkit::{nilpotent_sqrt_oracle, sample_class, sample_doi, SamplerConfig};

const RESIDUAL: f64 = 1e-8;
const EXACT_RESIDUAL: f64 = 1e-10;
const TRUNCATION_RESIDUAL: f64 = 1e-12;
const APPROX_EPS: f64 = 1e-3;
const MAX_ATTEMPTS: usize = 9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            pass: true,
            detail: summary,
        }
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        Outcome {
            pass: false,
            detail: format!(
                "{summary}; {} failure(s): {}",
                failures.len(),
                shown.join(" | ")
            ),
        }
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn rotation_generator(b: f64) -> ComplexMatrix {
    from_real_rows(&[&[0.0, b], &[-b, 0.0]])
}

fn closure_gap_of_differences() -> ComplexMatrix {
    let two = from_real_rows(&[&[2.0, 0.0], &[0.0, 2.0]]);
    let cell = from_real_rows(&[&[-2.0, 1.0], &[0.0, -2.0]]);
    direct_sum(&[two, cell])
}

fn witnesses() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    let start = Instant::now();
    let t = rotation_generator(0.5);
    check(is_cop(&t, &tol).unwrap().verdict, "rotation generator: cop");
    check(
        !is_dop(&t, &tol).unwrap().verdict,
        "rotation generator: not dop",
    );
    let pair = cop_pair(&t, &tol).unwrap();
    check(
        pair.target_residual <= EXACT_RESIDUAL,
        "rotation generator: commutator residual",
    );
    check(
        pair.structure_residual <= RESIDUAL,
        "rotation generator: projection residual",
    );
    let rank_one = |p: &ComplexMatrix| (trace(p).re - 1.0).abs() <= RESIDUAL;
    check(
        rank_one(&pair.left) && rank_one(&pair.right),
        "rotation generator: rank-one projections",
    );
    let overlap = trace(&(&pair.left * &pair.right)).re;
    check(
        (overlap - 0.5).abs() <= RESIDUAL,
        "rotation generator: ranges at angle pi/4",
    );
    check(
        start.elapsed() < Duration::from_secs(1),
        "rotation generator: under 1 s",
    );

    check(
        !is_cop(&rotation_generator(0.5 + 1e-3), &tol)
            .unwrap()
            .verdict,
        "norm above 1/2 rejected",
    );
    check(
        is_cop(&rotation_generator(0.5 - 1e-3), &tol)
            .unwrap()
            .verdict,
        "norm below 1/2 accepted",
    );

    let w = closure_gap_of_differences();
    check(!is_doi(&w, &tol).unwrap().verdict, "W: not doi");
    check(
        in_clos_doi(&w, &tol).unwrap().verdict,
        "W: in closure of doi",
    );
    check(is_balanced(&w, &tol).unwrap().verdict, "W: balanced");
    match doi_approximant(&w, 1e-3, &tol) {
        Ok(a) => check(a.pair.target_residual < 1e-3, "W: approximant residual"),
        Err(e) => check(false, &format!("W: approximant failed: {e}")),
    }

    let gap = closure_gap_witness(&tol).unwrap();
    check(!gap.coi.verdict, "T0: not coi");
    check(gap.neg_similar.verdict, "T0: negation similar");
    check(gap.clos_coi.verdict, "T0: in closure of coi");
    check(
        gap.coi.evidence.component_segre.as_deref() == Some(&[2][..]),
        "T0: component Segre [2]",
    );
    let n = gap.t.nrows() / 2;
    let mut j = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = c64(1.0, 0.0);
        j[(n + i, i)] = c64(1.0, 0.0);
    }
    check(
        norm2(&(&j * &gap.t * j.adjoint() + &gap.t)) <= RESIDUAL,
        "T0: swap conjugates to negative",
    );
    match coi_approximant(&gap.t, 1e-2, &tol) {
        Ok(a) => check(a.pair.target_residual < 1e-2, "T0: approximant residual"),
        Err(e) => check(false, &format!("T0: approximant failed: {e}")),
    }

    let mut worst: f64 = 0.0;
    for n in 1..=32 {
        let (k, e, f) = rank_one_cells_truncation(n);
        let r = norm2(&(commutator(&e, &f) - &k));
        worst = worst.max(r);
        check(r <= TRUNCATION_RESIDUAL, &format!("rank-one cells n = {n}"));
        check(
            norm2(&(&e * &e - &e)) == 0.0 && norm2(&(&f * &f - &f)) == 0.0,
            "rank-one cells: idempotents",
        );
    }
    outcome(
        &failures,
        format!("rank-one cells worst residual {worst:.1e}"),
    )
}

fn soundness() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let start = Instant::now();
    let mut total = 0;
    for tag in [ClassTag::Coi, ClassTag::Doi, ClassTag::Cop, ClassTag::Dop] {
        for seed in 0..500u64 {
            let n = 2 + (seed % 7) as usize;
            let cfg = SamplerConfig::new(n, seed);
            let w = sample_class(tag, &cfg).unwrap();
            let report = idemlab::classify::decide(tag, &w.target, &tol);
            total += 1;
            match report {
                Ok(r) if r.verdict => {}
                Ok(_) => failures.push(format!("{tag} seed {seed} n {n} rejected")),
                Err(e) => failures.push(format!("{tag} seed {seed} n {n}: {e}")),
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("runtime {elapsed:.1?}"));
    }
    outcome(
        &failures,
        format!("{total} samples accepted in {elapsed:.1?}"),
    )
}

fn chain_input(seed: u64) -> ComplexMatrix {
    let tags = [ClassTag::Coi, ClassTag::Doi, ClassTag::Cop, ClassTag::Dop];
    if seed % 2 == 0 {
        let n = 2 + (seed / 2 % 7) as usize;
        sample_class(tags[(seed / 2 % 4) as usize], &SamplerConfig::new(n, seed))
            .unwrap()
            .target
    } else {
        mixed_matrix(seed, 8)
    }
}

fn inclusion_chain() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let start = Instant::now();
    for seed in 0..1000u64 {
        let t = chain_input(seed);
        let coi = is_coi(&t, &tol).unwrap().verdict;
        let neg = is_neg_similar(&t, &tol).unwrap().verdict;
        let bal = is_balanced(&t, &tol).unwrap().verdict;
        let doi = is_doi(&t, &tol).unwrap().verdict;
        let clos_coi = in_clos_coi(&t, &tol).unwrap().verdict;
        let clos_doi = in_clos_doi(&t, &tol).map(|r| r.verdict).unwrap_or(false);
        let cop = is_cop(&t, &tol).unwrap().verdict;
        let dop = is_dop(&t, &tol).unwrap().verdict;
        let clos_cop = idemlab::classify::in_clos_cop(&t, &tol).unwrap().verdict;
        let clos_dop = idemlab::classify::in_clos_dop(&t, &tol).unwrap().verdict;
        let violations = [
            (coi && !neg, "coi without neg_similar"),
            (neg && !bal, "neg_similar without balanced"),
            (coi && !doi, "coi without doi"),
            (coi && !clos_coi, "coi outside its closure"),
            (doi && !clos_doi, "doi outside its closure"),
            (cop && !clos_cop, "cop outside its closure"),
            (dop && !clos_dop, "dop outside its closure"),
        ];
        for (bad, what) in violations {
            if bad {
                failures.push(format!("seed {seed}: {what}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("runtime {elapsed:.1?}"));
    }
    outcome(&failures, format!("1000 inputs in {elapsed:.1?}"))
}

fn parity() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let mut balanced = 0;
    for seed in 0..1000u64 {
        let t = mixed_matrix(seed ^ 0x9E37, 16);
        let b = is_balanced(&t, &tol).unwrap().verdict;
        balanced += usize::from(b);
        if b != charpoly_parity(&t, &tol).unwrap() {
            failures.push(format!("seed {seed} n {}", t.nrows()));
        }
    }
    outcome(
        &failures,
        format!("1000 inputs, {balanced} balanced, zero disagreements"),
    )
}

fn trace_zero() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let mut balanced = 0;
    for seed in 0..200u64 {
        let mut t = mixed_matrix(seed ^ 0x3C3C, 8);
        let n = t.nrows();
        let shift = trace(&t) / c64(n as f64, 0.0);
        for i in 0..n {
            t[(i, i)] -= shift;
        }
        let b = is_balanced(&t, &tol).unwrap().verdict;
        balanced += usize::from(b);
        match in_clos_doi(&t, &tol) {
            Ok(r) if r.verdict == b => {}
            Ok(r) => failures.push(format!(
                "seed {seed}: closure {} vs balanced {b}",
                r.verdict
            )),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    outcome(
        &failures,
        format!("200 inputs, {balanced} balanced, zero disagreements"),
    )
}

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

fn square_roots() -> Outcome {
    let mut failures = Vec::new();
    let mut sequences = 0;
    for total in 0..=8 {
        for segre in partitions(total, total) {
            sequences += 1;
            if segre_has_square_root(&segre) != nilpotent_sqrt_oracle(&segre) {
                failures.push(format!("oracle disagrees on {segre:?}"));
            }
        }
    }
    let tol = tol();
    let mut squared = 0;
    for total in 1..=6 {
        let mut reachable: Vec<Vec<usize>> = Vec::new();
        for source in partitions(total, total) {
            let cells: Vec<ComplexMatrix> = source
                .iter()
                .map(|&m| jordan_cell(c64(0.0, 0.0), m))
                .collect();
            let x = direct_sum(&cells);
            let sq = &x * &x;
            let segre = if norm2(&sq) == 0.0 {
                vec![1; total]
            } else {
                jordan_structure(&sq, &tol)
                    .unwrap()
                    .segre_near(c64(0.0, 0.0))
            };
            squared += 1;
            reachable.push(segre);
        }
        for segre in partitions(total, total) {
            if segre_has_square_root(&segre) != reachable.contains(&segre) {
                failures.push(format!("squaring disagrees on {segre:?}"));
            }
        }
    }
    outcome(
        &failures,
        format!("{sequences} sequences with sum <= 8, {squared} candidate roots squared"),
    )
}

fn approximants() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let (mut worst_coi, mut worst_doi, mut worst_exact): (f64, f64, f64) = (0.0, 0.0, 0.0);

    let mut accepted = 0;
    let mut seed = 0u64;
    while accepted < 100 {
        let t = coi_input(seed);
        seed += 1;
        if !in_clos_coi(&t, &tol).unwrap().verdict {
            continue;
        }
        accepted += 1;
        match coi_approximant(&t, APPROX_EPS, &tol) {
            Ok(a)
                if a.pair.target_residual < APPROX_EPS
                    && a.pair.structure_residual <= tol.residual
                    && a.attempts <= MAX_ATTEMPTS =>
            {
                worst_coi = worst_coi.max(a.pair.target_residual)
            }
            Ok(a) => failures.push(format!(
                "coi seed {seed}: residual {:.1e}, structure {:.1e}, attempts {}",
                a.pair.target_residual, a.pair.structure_residual, a.attempts
            )),
            Err(e) => failures.push(format!("coi seed {seed}: {e}")),
        }
    }

    accepted = 0;
    seed = 0;
    while accepted < 100 {
        let t = doi_input(seed);
        seed += 1;
        if !in_clos_doi(&t, &tol).map(|r| r.verdict).unwrap_or(false) {
            continue;
        }
        accepted += 1;
        match doi_approximant(&t, APPROX_EPS, &tol) {
            Ok(a)
                if a.pair.target_residual < APPROX_EPS
                    && a.pair.structure_residual <= tol.residual
                    && a.attempts <= MAX_ATTEMPTS =>
            {
                worst_doi = worst_doi.max(a.pair.target_residual)
            }
            Ok(a) => failures.push(format!(
                "doi seed {seed}: residual {:.1e}, structure {:.1e}, attempts {}",
                a.pair.target_residual, a.pair.structure_residual, a.attempts
            )),
            Err(e) => failures.push(format!("doi seed {seed}: {e}")),
        }
    }

    for seed in 0..100u64 {
        let n = 2 + (seed % 15) as usize;
        let cfg = SamplerConfig::new(n, seed);
        let cop = sample_class(ClassTag::Cop, &cfg).unwrap().target;
        match cop_pair(&cop, &tol) {
            Ok(p)
                if p.target_residual <= EXACT_RESIDUAL && p.structure_residual <= tol.residual =>
            {
                worst_exact = worst_exact.max(p.target_residual)
            }
            Ok(p) => failures.push(format!(
                "cop seed {seed}: residual {:.1e}",
                p.target_residual
            )),
            Err(e) => failures.push(format!("cop seed {seed}: {e}")),
        }
        let dop = sample_class(ClassTag::Dop, &cfg).unwrap().target;
        match dop_pair(&dop, &tol) {
            Ok(p)
                if p.target_residual <= EXACT_RESIDUAL && p.structure_residual <= tol.residual =>
            {
                worst_exact = worst_exact.max(p.target_residual)
            }
            Ok(p) => failures.push(format!(
                "dop seed {seed}: residual {:.1e}",
                p.target_residual
            )),
            Err(e) => failures.push(format!("dop seed {seed}: {e}")),
        }
    }
    outcome(
        &failures,
        format!(
            "worst residuals at eps {APPROX_EPS:.0e}: coi {worst_coi:.4e}, doi {worst_doi:.4e}, cop/dop {worst_exact:.1e}"
        ),
    )
}

fn sweep() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let start = Instant::now();
    let profile = CompactProfile::geometric(0.5, 0);
    let dims = [4, 8, 16, 32];
    let run = || {
        let rows = truncation_residual_sweep(&profile, &dims, APPROX_EPS, &tol).unwrap();
        let mut csv = Vec::new();
        write_sweep_csv(&rows, &mut csv).unwrap();
        (rows, csv)
    };
    let (rows, first) = run();
    let (_, second) = run();
    if first != second {
        failures.push("CSV differs between runs".into());
    }
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    for row in &rows {
        if !(row.residual < APPROX_EPS) {
            failures.push(format!("n {}: residual {:.1e}", row.n, row.residual));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:.1?}"));
    }
    outcome(
        &failures,
        format!(
            "{} rows, worst residual {worst:.1e}, {elapsed:.1?}",
            rows.len()
        ),
    )
}

fn unit_nullity() -> Outcome {
    let tol = tol();
    let mut failures = Vec::new();
    let mut kept = 0;
    let mut seed = 0u64;
    while kept < 200 {
        let n = 2 + (seed % 7) as usize;
        let w = sample_doi(&SamplerConfig::new(n, seed)).unwrap();
        seed += 1;
        let r = trace(&w.target).re.round();
        if r < 0.0 {
            continue;
        }
        kept += 1;
        let shifted = &w.target - identity(n);
        let k = nullity(&shifted, &tol);
        if (k as f64) < r {
            failures.push(format!("seed {}: nullity {k} < trace {r}", seed - 1));
        }
    }
    outcome(
        &failures,
        format!("200 samples with nonnegative trace, {seed} drawn"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 exact witnesses", witnesses),
        ("2 sampler soundness", soundness),
        ("3 inclusion chain", inclusion_chain),
        ("4 charpoly parity", parity),
        ("5 trace-zero closure", trace_zero),
        ("6 square-root oracle", square_roots),
        ("7 constructor residuals", approximants),
        ("8 truncation sweep", sweep),
        ("9 unit nullity", unit_nullity),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected: Vec<_> = criteria
        .into_iter()
        .filter(|(name, _)| {
            filter.is_empty() || filter.iter().any(|f| name.starts_with(f.as_str()))
        })
        .collect();
    let total = selected.len();
    let mut failed = 0;
    for (name, run) in selected {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {name}: {} [{:.1?}]",
            o.detail,
            start.elapsed()
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {total} criteria passed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
