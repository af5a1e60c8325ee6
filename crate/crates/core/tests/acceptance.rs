//! End-to-end acceptance run over the full dataset. Prints one PASS/FAIL line
//! per criterion and exits non-zero if any fails.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fourops_core::analysis::logistic::{binary_loss_grad, softmax_loss_grad, Design};
use fourops_core::analysis::{
    difficulty_from_subset_size, evaluate, load_samples, split_by_bag, train_binary_logistic,
    train_difficulty_baseline, FeatureSet, Hyperparams,
};
use fourops_core::dataset::{
    dataset_stats, difficulty_label, enumerate_bags, generate_dataset, select_bags, DatasetReader, DEFAULT_TARGETS,
};
use fourops_core::engine::{eval_expression, parse_expression};
use fourops_core::solver::subset_dp;
use fourops_core::verify::{run_verification, sample_bags, Check};

const FULL_ROWS: u64 = 3_474_900;

struct Outcomes {
    failed: usize,
}

impl Outcomes {
    fn report(&mut self, id: u32, name: &str, pass: bool, detail: String, started: Instant) {
        if !pass {
            self.failed += 1;
        }
        let status = if pass { "PASS" } else { "FAIL" };
        println!("[{status}] C{id} {name}: {detail} ({:.1}s)", started.elapsed().as_secs_f64());
    }
}

fn files_identical(a: &Path, b: &Path) -> std::io::Result<bool> {
    let (mut fa, mut fb) = (BufReader::new(File::open(a)?), BufReader::new(File::open(b)?));
    let (mut ba, mut bb) = (vec![0u8; 1 << 16], vec![0u8; 1 << 16]);
    loop {
        let na = read_full(&mut fa, &mut ba)?;
        let nb = read_full(&mut fb, &mut bb)?;
        if na != nb || ba[..na] != bb[..nb] {
            return Ok(false);
        }
        if na == 0 {
            return Ok(true);
        }
    }
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..])? {
            0 => break,
            k => n += k,
        }
    }
    Ok(n)
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Worst relative error between analytic and central-difference gradients
/// over random small problems.
fn worst_gradient_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let (rows, cols) = (rng.random_range(5..40), rng.random_range(1..6));
        let data: Vec<Vec<f64>> =
            (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let x = Design::from_rows(&data);
        let classes = if trial % 2 == 0 { 2 } else { rng.random_range(3..5) };
        let labels: Vec<u8> = (0..rows).map(|_| rng.random_range(0..classes as u8)).collect();
        let width = if classes == 2 { cols + 1 } else { classes * (cols + 1) };
        let params: Vec<f64> = (0..width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |p: &[f64]| {
            if classes == 2 {
                binary_loss_grad(&x, &labels, p, 1e-2)
            } else {
                softmax_loss_grad(&x, &labels, classes, p, 1e-2)
            }
        };
        let (_, grad) = loss(&params);
        for k in 0..width {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[k] += h;
            minus[k] -= h;
            let numeric = (loss(&plus).0 - loss(&minus).0) / (2.0 * h);
            worst = worst.max(relative_error(grad[k], numeric));
        }
    }
    worst
}

fn main() -> ExitCode {
    let mut out = Outcomes { failed: 0 };
    let dir = tempfile::tempdir().expect("temporary directory");
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get()).max(2);

    // C1
    let t = Instant::now();
    let bags = enumerate_bags();
    let fast = t.elapsed().as_secs_f64() < 1.0;
    out.report(1, "bag-space cardinality", bags.len() == 3861 && fast, format!("{} bags, expected 3861", bags.len()), t);

    // C2
    let t = Instant::now();
    let all = select_bags(0..=bags.len() - 1);
    let first = dir.path().join("first.csv");
    let generated = generate_dataset(&all, DEFAULT_TARGETS, &first, jobs);
    let stats = match (&generated, dataset_stats(&first)) {
        (Ok(g), Ok(s)) => {
            out.report(
                2,
                "dataset cardinality",
                g.total == FULL_ROWS && s.total == FULL_ROWS,
                format!("{} rows written, {} rows read back, expected {FULL_ROWS}", g.total, s.total),
                t,
            );
            Some(s)
        }
        (g, s) => {
            out.report(2, "dataset cardinality", false, format!("generation {g:?}, read-back {:?}", s.err()), t);
            None
        }
    };

    // C3
    let t = Instant::now();
    let full_fraction = stats.as_ref().map_or(f64::NAN, |s| s.solvable_fraction);
    let full_ok = (0.855..=0.885).contains(&full_fraction);
    let desk_bags = sample_bags(100, &mut ChaCha8Rng::seed_from_u64(2024));
    let (mut desk_total, mut desk_solvable, mut identity_checked, mut identity_violations) = (0u64, 0u64, 0u64, 0u64);
    for bag in &desk_bags {
        let table = subset_dp(bag);
        for target in DEFAULT_TARGETS {
            let r = table.solve(target);
            desk_total += 1;
            if let Some(ops) = r.min_ops {
                desk_solvable += 1;
                identity_checked += 1;
                if r.subset_size != Some(ops + 1) {
                    identity_violations += 1;
                }
            }
        }
    }
    let desk_fraction = desk_solvable as f64 / desk_total as f64;
    let desk_ok = (0.84..=0.90).contains(&desk_fraction) && t.elapsed().as_secs_f64() < 60.0;
    out.report(
        3,
        "solvability rate",
        full_ok && desk_ok,
        format!(
            "full {full_fraction:.6} in [0.855, 0.885]; desk-scale {desk_fraction:.6} over {desk_total} instances in [0.84, 0.90]"
        ),
        t,
    );

    // C4 and C5
    let t = Instant::now();
    let report = run_verification(200, 20, 4000);
    let oracle = report.outcome(Check::OracleAgreement);
    out.report(
        4,
        "oracle equivalence",
        oracle.checked == 4000 && oracle.passed(),
        format!("{} instances, {} disagreements {:?}", oracle.checked, oracle.violations, oracle.first_violation),
        t,
    );
    let t = Instant::now();
    let formulation = report.outcome(Check::FormulationEquivalence);
    out.report(
        5,
        "formulation equivalence",
        formulation.checked == 200 && formulation.passed(),
        format!("{} bags, {} disagreements {:?}", formulation.checked, formulation.violations, formulation.first_violation),
        t,
    );

    // C6
    let t = Instant::now();
    out.report(
        6,
        "ops/size identity",
        identity_checked > 0 && identity_violations == 0,
        format!("{identity_checked} solvable desk-scale instances, {identity_violations} violations"),
        t,
    );

    // C7 and C8 share one pass over the full file.
    let t = Instant::now();
    let (mut rows, mut label_mismatch, mut witnesses, mut bad_witnesses) = (0u64, 0u64, 0u64, 0u64);
    let mut first_problem = None;
    match DatasetReader::open(&first) {
        Ok(reader) => {
            for record in reader {
                let r = match record {
                    Ok(r) => r,
                    Err(e) => {
                        first_problem.get_or_insert(e.to_string());
                        label_mismatch += 1;
                        break;
                    }
                };
                rows += 1;
                let by_size = difficulty_from_subset_size(r.subset_size());
                let by_ops = difficulty_label(r.min_ops());
                if by_size.ok() != Some(r.difficulty) || by_ops.ok() != Some(r.difficulty) {
                    label_mismatch += 1;
                    first_problem.get_or_insert(format!("label of bag {} target {}", r.bag_id, r.target));
                }
                if let Some(ops) = r.min_ops() {
                    witnesses += 1;
                    let valid = parse_expression(&r.witness).is_ok_and(|e| {
                        eval_expression(&e).ok() == Some(r.target)
                            && e.op_count() == ops as usize
                            && r.bag.contains_multiset(&e.leaves())
                    });
                    if !valid {
                        bad_witnesses += 1;
                        first_problem.get_or_insert(format!("witness {:?} of bag {} target {}", r.witness, r.bag_id, r.target));
                    }
                }
            }
        }
        Err(e) => {
            first_problem = Some(e.to_string());
            label_mismatch += 1;
        }
    }
    out.report(
        7,
        "subset-size sufficiency",
        rows == FULL_ROWS && label_mismatch == 0,
        format!("{rows} rows, {label_mismatch} label mismatches {first_problem:?}"),
        t,
    );
    out.report(
        8,
        "witness validity",
        witnesses >= 100_000 && bad_witnesses == 0,
        format!("{witnesses} witnesses checked, {bad_witnesses} invalid"),
        t,
    );

    // C9
    let t = Instant::now();
    let second = dir.path().join("second.csv");
    let third = dir.path().join("third.csv");
    let other_jobs = if jobs == 2 { 3 } else { 1 };
    let identical = generate_dataset(&all, DEFAULT_TARGETS, &second, jobs).is_ok()
        && generate_dataset(&all, DEFAULT_TARGETS, &third, other_jobs).is_ok()
        && files_identical(&first, &second).unwrap_or(false)
        && files_identical(&first, &third).unwrap_or(false);
    let _ = std::fs::remove_file(&second);
    let _ = std::fs::remove_file(&third);
    out.report(
        9,
        "determinism",
        identical,
        format!("two runs with {jobs} workers and one with {other_jobs} byte-identical: {identical}"),
        t,
    );

    // C10
    let t = Instant::now();
    let gradient_error = worst_gradient_error();
    let detail = match load_samples(&first).and_then(|s| split_by_bag(s, 0.2, 42)) {
        Ok((train, test)) => {
            let _ = std::fs::remove_file(&first);
            let hp = Hyperparams::default();
            let solvability = train_binary_logistic(&train, FeatureSet::Baseline, &hp)
                .and_then(|f| evaluate(&f.model, &test, FeatureSet::Baseline));
            let difficulty = train_difficulty_baseline(&train, &hp)
                .and_then(|f| evaluate(&f.model, &test, FeatureSet::Baseline));
            match (solvability, difficulty) {
                (Ok(s), Ok(d)) => {
                    let easy = d.recall_of("E").unwrap_or(f64::NAN);
                    let pass = s.accuracy >= 0.80 && d.accuracy >= 0.60 && easy < 0.5 && gradient_error < 1e-4;
                    Ok((
                        pass,
                        format!(
                            "solvability accuracy {:.4} (>= 0.80); difficulty accuracy {:.4} (>= 0.60); \
                             Easy recall {easy:.4} (< 0.5); gradient relative error {gradient_error:.2e} (< 1e-4)",
                            s.accuracy, d.accuracy
                        ),
                    ))
                }
                (s, d) => Err(format!("training failed: {:?} {:?}", s.err(), d.err())),
            }
        }
        Err(e) => Err(e.to_string()),
    };
    match detail {
        Ok((pass, text)) => out.report(10, "baseline models", pass, text, t),
        Err(text) => out.report(10, "baseline models", false, text, t),
    }

    if out.failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 10 criteria failed", out.failed);
        ExitCode::FAILURE
    }
}
