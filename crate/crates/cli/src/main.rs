use std::num::NonZeroUsize;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fourops_core::analysis::{
    evaluate, load_samples, split_by_bag, train_binary_logistic, train_multinomial_logistic, AnalysisError,
    FeatureSet, Hyperparams, ModelParams, Task, STRUCTURAL_FEATURES,
};
use fourops_core::dataset::{dataset_stats, enumerate_bags, generate_dataset, select_bags, DatasetError, DEFAULT_TARGETS};
use fourops_core::engine::Bag;
use fourops_core::solver::{subset_dp, SolveResult};
use fourops_core::verify::{run_verification, run_with_fault, Fault};

/// Solve, generate and analyze integer arithmetic puzzles.
#[derive(Debug, Parser)]
#[command(name = "fourops", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one target, or every target in a range, for a bag.
    Solve(SolveArgs),
    /// Write a labeled dataset file.
    Generate(GenerateArgs),
    /// Summarize a dataset file.
    Stats(StatsArgs),
    /// Train a classifier and report held-out metrics.
    Train(TrainArgs),
    /// Check solver invariants on random instances.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("goal").required(true).args(["target", "all_targets"])))]
struct SolveArgs {
    /// Comma-separated bag values, e.g. 2,2,2,2,2,50.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    bag: Vec<u64>,
    #[arg(long)]
    target: Option<u64>,
    /// Print the minimal witness expression.
    #[arg(long)]
    witness: bool,
    /// Solve every target in `lo..hi` (inclusive).
    #[arg(long, value_name = "LO..HI", value_parser = parse_range::<u64>)]
    all_targets: Option<RangeInclusive<u64>>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Bag ids `lo..hi` (inclusive) in canonical order.
    #[arg(long, value_name = "LO..HI", value_parser = parse_range::<usize>)]
    bags: Option<RangeInclusive<usize>>,
    #[arg(long, value_name = "LO..HI", value_parser = parse_range::<u64>)]
    targets: Option<RangeInclusive<u64>>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// solvability | difficulty
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// baseline | baseline+structural | subset-size-rule
    #[arg(long, value_parser = parse_feature_set)]
    features: FeatureSet,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    bags: usize,
    /// Targets per bag.
    #[arg(long)]
    targets: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, hide = true, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

fn parse_range<T: std::str::FromStr + PartialOrd>(text: &str) -> Result<RangeInclusive<T>, String> {
    let (lo, hi) = text.split_once("..").ok_or("expected LO..HI")?;
    let lo: T = lo.trim().parse().map_err(|_| format!("invalid lower bound {lo:?}"))?;
    let hi: T = hi.trim().parse().map_err(|_| format!("invalid upper bound {hi:?}"))?;
    if lo > hi {
        return Err("lower bound exceeds upper bound".into());
    }
    Ok(lo..=hi)
}

fn parse_task(text: &str) -> Result<Task, String> {
    Task::from_name(text).ok_or_else(|| "expected solvability or difficulty".into())
}

fn parse_feature_set(text: &str) -> Result<FeatureSet, String> {
    FeatureSet::from_name(text).ok_or_else(|| "expected baseline, baseline+structural or subset-size-rule".into())
}

fn parse_fault(text: &str) -> Result<Fault, String> {
    Fault::from_name(text).ok_or_else(|| "expected floor-division or no-division".into())
}

enum Failure {
    Usage(String),
    Data(String),
    Invariant(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidCombination(_) | AnalysisError::InvalidFraction(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Generate(args) => generate(args),
        Command::Stats(args) => stats(args),
        Command::Train(args) => train(args),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let bag = Bag::new(args.bag).map_err(|e| Failure::Usage(e.to_string()))?;
    let targets = match (args.target, args.all_targets) {
        (Some(t), _) => t..=t,
        (None, Some(range)) => range,
        (None, None) => unreachable!("clap requires one of --target and --all-targets"),
    };
    if *targets.start() < 1 {
        return Err(Failure::Usage("targets must be positive integers".into()));
    }
    let table = subset_dp(&bag);
    let single = args.target.is_some();
    let results: Vec<SolveResult> = targets.map(|t| table.solve(t)).collect();

    if args.json {
        let bag_values = json!(bag.values());
        let report = if single {
            let mut obj = result_json(&results[0], args.witness, true);
            obj["bag"] = bag_values;
            obj
        } else {
            let rows: Vec<Value> = results.iter().map(|r| result_json(r, args.witness, false)).collect();
            json!({ "bag": bag_values, "results": rows })
        };
        println!("{report}");
        return Ok(());
    }

    for r in &results {
        let mut line = if single { String::new() } else { format!("target={} ", r.target) };
        match (r.min_ops, r.subset_size) {
            (Some(ops), Some(size)) => {
                line.push_str(&format!("solvable min_ops={ops} subset_size={size}"));
                if args.witness {
                    if let Some(w) = &r.witness {
                        line.push_str(&format!(" witness={w}"));
                    }
                }
            }
            _ => line.push_str("unsolvable"),
        }
        println!("{line}");
        if single && r.solvable {
            let features: Vec<String> = STRUCTURAL_FEATURES
                .iter()
                .zip(structural_values(r))
                .map(|(name, v)| format!("{name}={v}"))
                .collect();
            println!("features {}", features.join(" "));
        }
    }
    Ok(())
}

fn structural_values(r: &SolveResult) -> [u64; 7] {
    let [add, sub, mul, div] = r.op_counts;
    [
        u64::from(r.subset_size.unwrap_or(0)),
        r.minimal_value_subsets.len() as u64,
        r.max_intermediate.unwrap_or(0),
        u64::from(add),
        u64::from(sub),
        u64::from(mul),
        u64::from(div),
    ]
}

fn result_json(r: &SolveResult, with_witness: bool, with_features: bool) -> Value {
    let mut obj = json!({
        "target": r.target,
        "solvable": r.solvable,
        "min_ops": r.min_ops,
        "subset_size": r.subset_size,
    });
    if with_witness {
        obj["witness"] = json!(r.witness.as_ref().map(ToString::to_string));
    }
    if with_features && r.solvable {
        let features: serde_json::Map<String, Value> = STRUCTURAL_FEATURES
            .iter()
            .zip(structural_values(r))
            .map(|(name, v)| (name.to_string(), json!(v)))
            .collect();
        obj["features"] = Value::Object(features);
    }
    obj
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let jobs = match args.jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, NonZeroUsize::get),
    };
    let bag_count = enumerate_bags().len();
    let bag_range = args.bags.unwrap_or(0..=bag_count - 1);
    if *bag_range.end() >= bag_count {
        return Err(Failure::Usage(format!("bag ids run from 0 to {}", bag_count - 1)));
    }
    let bags = select_bags(bag_range);
    let targets = args.targets.unwrap_or(DEFAULT_TARGETS);
    if *targets.start() < 1 {
        return Err(Failure::Usage("targets must be positive integers".into()));
    }
    let stats = generate_dataset(&bags, targets, &args.out, jobs)?;
    println!("wrote {}", args.out.display());
    println!("{stats}");
    Ok(())
}

fn stats(args: StatsArgs) -> Result<(), Failure> {
    println!("{}", dataset_stats(&args.input)?);
    Ok(())
}

fn train(args: TrainArgs) -> Result<(), Failure> {
    if args.task == Task::Solvability && args.features == FeatureSet::SubsetSizeRule {
        return Err(Failure::Usage("the subset-size rule only predicts difficulty".into()));
    }
    let samples = load_samples(&args.input)?;
    let (train, test) = split_by_bag(samples, 0.2, args.seed)?;
    let hp = Hyperparams { seed: args.seed, ..Hyperparams::default() };
    let (model, epochs) = match (args.task, args.features) {
        (Task::Difficulty, FeatureSet::SubsetSizeRule) => (ModelParams::subset_size_rule(), None),
        (Task::Solvability, fs) => {
            let fitted = train_binary_logistic(&train, fs, &hp)?;
            (fitted.model, Some(fitted.trace.epochs))
        }
        (Task::Difficulty, fs) => {
            let fitted = train_multinomial_logistic(&train, fs, &hp)?;
            (fitted.model, Some(fitted.trace.epochs))
        }
    };
    let metrics = evaluate(&model, &test, args.features)?;
    model.save_to_path(&args.out)?;
    println!(
        "task={} features={} model={} seed={} train_rows={} test_rows={}{}",
        args.task.name(),
        args.features,
        model.kind.name(),
        args.seed,
        train.len(),
        test.len(),
        epochs.map(|e| format!(" epochs={e}")).unwrap_or_default()
    );
    println!("{metrics}");
    println!("model written to {}", args.out.display());
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    if args.bags == 0 || args.targets == 0 {
        return Err(Failure::Usage("--bags and --targets must be at least 1".into()));
    }
    let report = match args.inject_fault {
        Some(fault) => run_with_fault(fault, args.bags, args.targets, args.seed),
        None => run_verification(args.bags, args.targets, args.seed),
    };
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Invariant("solver invariants violated".into()))
    }
}
