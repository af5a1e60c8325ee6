//! Bag enumeration, instance labeling and the on-disk dataset table.
//!
//! The dataset is a comma-separated text file with one header row and one
//! row per `(bag, target)` pair, ordered by bag id and then target. Output
//! is byte-identical regardless of how many workers produced it.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::engine::{serialize_expression, Bag};
use crate::solver::{subset_dp, SolveResult};

pub const HEADER: &str = "bag_id,n1,n2,n3,n4,n5,big,target,solvable,min_ops,difficulty,subset_size,\
n_min_subsets,max_intermediate,op_add,op_sub,op_mul,op_div,witness";

pub const SMALL_VALUES: RangeInclusive<u64> = 1..=9;
pub const LARGE_VALUES: [u64; 3] = [25, 50, 75];
pub const SMALL_COUNT: usize = 5;
pub const BAG_LEN: usize = SMALL_COUNT + 1;
pub const DEFAULT_TARGETS: RangeInclusive<u64> = 100..=999;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("operation count {0} is outside 0..=5")]
    OutOfRange(u32),
    #[error("dataset rows need bags of {BAG_LEN} values, got {0}")]
    BagShape(usize),
    #[error("worker count must be at least 1")]
    NoWorkers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DifficultyLabel {
    Unsolvable,
    Easy,
    Medium,
    Hard,
}

impl DifficultyLabel {
    pub const ALL: [DifficultyLabel; 4] = [
        DifficultyLabel::Unsolvable,
        DifficultyLabel::Easy,
        DifficultyLabel::Medium,
        DifficultyLabel::Hard,
    ];

    pub fn code(self) -> char {
        match self {
            DifficultyLabel::Unsolvable => 'U',
            DifficultyLabel::Easy => 'E',
            DifficultyLabel::Medium => 'M',
            DifficultyLabel::Hard => 'H',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "U" => Some(DifficultyLabel::Unsolvable),
            "E" => Some(DifficultyLabel::Easy),
            "M" => Some(DifficultyLabel::Medium),
            "H" => Some(DifficultyLabel::Hard),
            _ => None,
        }
    }

    /// Position in `U, E, M, H`.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DifficultyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DifficultyLabel::Unsolvable => "unsolvable",
            DifficultyLabel::Easy => "easy",
            DifficultyLabel::Medium => "medium",
            DifficultyLabel::Hard => "hard",
        })
    }
}

/// Unsolvable when absent; Easy for 0-2 operations, Medium for 3-4, Hard for 5.
pub fn difficulty_label(min_ops: Option<u32>) -> Result<DifficultyLabel, DatasetError> {
    Ok(match min_ops {
        None => DifficultyLabel::Unsolvable,
        Some(0..=2) => DifficultyLabel::Easy,
        Some(3..=4) => DifficultyLabel::Medium,
        Some(5) => DifficultyLabel::Hard,
        Some(k) => return Err(DatasetError::OutOfRange(k)),
    })
}

/// All bags of five values from 1..=9 (with repetition) plus one of
/// 25/50/75, ordered by the small multiset and then the large value.
pub fn enumerate_bags() -> Vec<Bag> {
    let mut smalls = Vec::new();
    let mut current = Vec::with_capacity(SMALL_COUNT);
    small_multisets(*SMALL_VALUES.start(), &mut current, &mut smalls);
    smalls
        .into_iter()
        .flat_map(|small| {
            LARGE_VALUES.iter().map(move |&big| {
                let mut values = small.clone();
                values.push(big);
                Bag::new(values).expect("enumerated bags are valid")
            })
        })
        .collect()
}

fn small_multisets(min: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if current.len() == SMALL_COUNT {
        out.push(current.clone());
        return;
    }
    for v in min..=*SMALL_VALUES.end() {
        current.push(v);
        small_multisets(v, current, out);
        current.pop();
    }
}

/// One labeled `(bag, target)` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceRecord {
    pub bag_id: usize,
    pub bag: Bag,
    pub target: u64,
    pub solvable: bool,
    /// -1 when unsolvable.
    pub min_ops: i32,
    pub difficulty: DifficultyLabel,
    /// -1 when unsolvable.
    pub subset_size: i32,
    pub n_min_subsets: u32,
    /// -1 when unsolvable.
    pub max_intermediate: i64,
    /// `[add, sub, mul, div]` counts in the witness.
    pub op_counts: [u32; 4],
    /// Empty when unsolvable.
    pub witness: String,
}

impl InstanceRecord {
    pub fn from_result(bag_id: usize, bag: &Bag, result: &SolveResult) -> Result<Self, DatasetError> {
        if bag.len() != BAG_LEN {
            return Err(DatasetError::BagShape(bag.len()));
        }
        let sentinel = |v: Option<u32>| v.map_or(-1, |v| v as i32);
        Ok(InstanceRecord {
            bag_id,
            bag: bag.clone(),
            target: result.target,
            solvable: result.solvable,
            min_ops: sentinel(result.min_ops),
            difficulty: difficulty_label(result.min_ops)?,
            subset_size: sentinel(result.subset_size),
            n_min_subsets: result.minimal_value_subsets.len() as u32,
            max_intermediate: result.max_intermediate.map_or(-1, |v| v as i64),
            op_counts: result.op_counts,
            witness: result.witness.as_ref().map(serialize_expression).unwrap_or_default(),
        })
    }

    pub fn min_ops(&self) -> Option<u32> {
        (self.min_ops >= 0).then_some(self.min_ops as u32)
    }

    pub fn subset_size(&self) -> Option<u32> {
        (self.subset_size >= 0).then_some(self.subset_size as u32)
    }

    /// Appends the row (with trailing LF) to `out`.
    pub fn write_row(&self, out: &mut Vec<u8>) {
        let v = self.bag.values();
        let [add, sub, mul, div] = self.op_counts;
        // Writing into a Vec cannot fail.
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.bag_id,
            v[0],
            v[1],
            v[2],
            v[3],
            v[4],
            v[5],
            self.target,
            u8::from(self.solvable),
            self.min_ops,
            self.difficulty.code(),
            self.subset_size,
            self.n_min_subsets,
            self.max_intermediate,
            add,
            sub,
            mul,
            div,
            self.witness
        );
    }

    /// Parses one data row; `line` is only used for error messages.
    pub fn parse_row(text: &str, line: usize) -> Result<Self, DatasetError> {
        let err = |reason: String| DatasetError::Format { line, reason };
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 19 {
            return Err(err(format!("expected 19 fields, found {}", fields.len())));
        }
        let int = |i: usize| -> Result<i64, DatasetError> {
            fields[i]
                .parse::<i64>()
                .map_err(|_| err(format!("field {} is not an integer: {:?}", i + 1, fields[i])))
        };
        let nonneg = |i: usize| -> Result<u64, DatasetError> {
            let v = int(i)?;
            u64::try_from(v).map_err(|_| err(format!("field {} must be non-negative", i + 1)))
        };

        let bag_id = nonneg(0)? as usize;
        let values = (1..=6).map(nonneg).collect::<Result<Vec<_>, _>>()?;
        let bag = Bag::new(values).map_err(|e| err(e.to_string()))?;
        let target = nonneg(7)?;
        let solvable = match fields[8] {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("solvable must be 0 or 1, found {other:?}"))),
        };
        let difficulty = DifficultyLabel::from_code(fields[10])
            .ok_or_else(|| err(format!("unknown difficulty code {:?}", fields[10])))?;
        if solvable != (difficulty != DifficultyLabel::Unsolvable) {
            return Err(err("difficulty disagrees with solvable flag".into()));
        }
        let small = |i: usize| -> Result<i32, DatasetError> {
            i32::try_from(int(i)?).map_err(|_| err(format!("field {} out of range", i + 1)))
        };
        let counts = |i: usize| -> Result<u32, DatasetError> {
            u32::try_from(nonneg(i)?).map_err(|_| err(format!("field {} out of range", i + 1)))
        };
        Ok(InstanceRecord {
            bag_id,
            bag,
            target,
            solvable,
            min_ops: small(9)?,
            difficulty,
            subset_size: small(11)?,
            n_min_subsets: counts(12)?,
            max_intermediate: int(13)?,
            op_counts: [counts(14)?, counts(15)?, counts(16)?, counts(17)?],
            witness: fields[18].to_string(),
        })
    }
}

pub fn label_instance(bag_id: usize, bag: &Bag, target: u64) -> Result<InstanceRecord, DatasetError> {
    InstanceRecord::from_result(bag_id, bag, &crate::solver::solve(bag, target))
}

/// Summary of per-bag solvable-target counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerBagSummary {
    pub bags: usize,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    /// 10th, 20th, ..., 90th percentiles (nearest rank).
    pub deciles: [u64; 9],
}

impl PerBagSummary {
    pub fn from_counts(counts: &[u64]) -> Self {
        if counts.is_empty() {
            return PerBagSummary::default();
        }
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let mut deciles = [0; 9];
        for (k, d) in deciles.iter_mut().enumerate() {
            let rank = ((k + 1) * n).div_ceil(10).max(1);
            *d = sorted[rank - 1];
        }
        PerBagSummary {
            bags: n,
            min: sorted[0],
            max: sorted[n - 1],
            mean: sorted.iter().sum::<u64>() as f64 / n as f64,
            deciles,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerationStats {
    pub total: u64,
    /// Row counts indexed by [`DifficultyLabel::index`].
    pub label_counts: [u64; 4],
    pub solvable: u64,
    pub solvable_fraction: f64,
    pub per_bag: PerBagSummary,
    pub wall_time: Duration,
}

impl GenerationStats {
    fn finish(label_counts: [u64; 4], per_bag: &[u64], started: Instant) -> Self {
        let total: u64 = label_counts.iter().sum();
        let solvable = total - label_counts[DifficultyLabel::Unsolvable.index()];
        GenerationStats {
            total,
            label_counts,
            solvable,
            solvable_fraction: if total == 0 { 0.0 } else { solvable as f64 / total as f64 },
            per_bag: PerBagSummary::from_counts(per_bag),
            wall_time: started.elapsed(),
        }
    }

    pub fn count(&self, label: DifficultyLabel) -> u64 {
        self.label_counts[label.index()]
    }
}

impl fmt::Display for GenerationStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {}", self.total)?;
        for label in DifficultyLabel::ALL {
            let n = self.count(label);
            let share = if self.total == 0 { 0.0 } else { n as f64 / self.total as f64 };
            writeln!(f, "  {:<10} {:>9} ({:.4})", label.to_string(), n, share)?;
        }
        writeln!(f, "solvable fraction: {:.6}", self.solvable_fraction)?;
        let p = &self.per_bag;
        writeln!(
            f,
            "per-bag solvable targets over {} bags: min {} mean {:.2} max {}",
            p.bags, p.min, p.mean, p.max
        )?;
        let deciles: Vec<String> = p.deciles.iter().map(u64::to_string).collect();
        writeln!(f, "  deciles: {}", deciles.join(" "))?;
        write!(f, "wall time: {:.2}s", self.wall_time.as_secs_f64())
    }
}

struct BagRows {
    bytes: Vec<u8>,
    label_counts: [u64; 4],
}

fn label_bag(bag_id: usize, bag: &Bag, targets: &RangeInclusive<u64>) -> Result<BagRows, DatasetError> {
    let table = subset_dp(bag);
    let mut rows = BagRows { bytes: Vec::with_capacity(48 * 900), label_counts: [0; 4] };
    for target in targets.clone() {
        let record = InstanceRecord::from_result(bag_id, bag, &table.solve(target))?;
        rows.label_counts[record.difficulty.index()] += 1;
        record.write_row(&mut rows.bytes);
    }
    Ok(rows)
}

/// Labels every `(bag, target)` pair and streams the table to `out`.
///
/// Workers claim whole bags; the calling thread reorders finished bags by
/// their position in `bags` before writing.
pub fn write_dataset<W: Write>(
    bags: &[(usize, Bag)],
    targets: RangeInclusive<u64>,
    out: W,
    workers: usize,
) -> Result<GenerationStats, DatasetError> {
    if workers == 0 {
        return Err(DatasetError::NoWorkers);
    }
    if let Some((_, bag)) = bags.iter().find(|(_, b)| b.len() != BAG_LEN) {
        return Err(DatasetError::BagShape(bag.len()));
    }
    let started = Instant::now();
    let mut out = BufWriter::with_capacity(1 << 20, out);
    out.write_all(HEADER.as_bytes())?;
    out.write_all(b"\n")?;

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::sync_channel::<(usize, Result<BagRows, DatasetError>)>(workers * 4);
    let mut label_counts = [0u64; 4];
    let mut per_bag = Vec::with_capacity(bags.len());

    let outcome = thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, abort, targets) = (&next, &abort, &targets);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= bags.len() || abort.load(Ordering::Relaxed) {
                    break;
                }
                let (bag_id, bag) = &bags[i];
                if tx.send((i, label_bag(*bag_id, bag, targets))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut expected = 0;
        let result = (|| -> Result<(), DatasetError> {
            for (i, rows) in rx.iter() {
                pending.insert(i, rows?);
                while let Some(rows) = pending.remove(&expected) {
                    out.write_all(&rows.bytes)?;
                    for (total, n) in label_counts.iter_mut().zip(rows.label_counts) {
                        *total += n;
                    }
                    per_bag.push(rows.label_counts[1..].iter().sum());
                    expected += 1;
                }
            }
            Ok(())
        })();
        if result.is_err() {
            abort.store(true, Ordering::Relaxed);
        }
        // Dropping the receiver unblocks any worker waiting to send.
        drop(rx);
        result
    });
    outcome?;
    out.flush()?;
    Ok(GenerationStats::finish(label_counts, &per_bag, started))
}

/// Writes the dataset to `path`. Output goes to `<path>.partial` first and
/// is renamed into place only on success; on failure the partial file is
/// removed.
pub fn generate_dataset(
    bags: &[(usize, Bag)],
    targets: RangeInclusive<u64>,
    path: &Path,
    workers: usize,
) -> Result<GenerationStats, DatasetError> {
    let partial = partial_path(path);
    let result = File::create(&partial)
        .map_err(DatasetError::from)
        .and_then(|file| {
            let stats = write_dataset(bags, targets, &file, workers)?;
            file.sync_all()?;
            Ok(stats)
        })
        .and_then(|stats| {
            fs::rename(&partial, path)?;
            Ok(stats)
        });
    if result.is_err() {
        let _ = fs::remove_file(&partial);
    }
    result
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Canonical ids paired with their bags, for ids in `range`.
pub fn select_bags(range: RangeInclusive<usize>) -> Vec<(usize, Bag)> {
    enumerate_bags()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| range.contains(i))
        .collect()
}

/// Streaming reader over a dataset file. Validates the header up front and
/// every row as it is read.
pub struct DatasetReader<R> {
    lines: io::Lines<R>,
    line: usize,
}

impl DatasetReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, DatasetError> {
        Self::new(BufReader::with_capacity(1 << 20, File::open(path)?))
    }
}

impl<R: BufRead> DatasetReader<R> {
    pub fn new(reader: R) -> Result<Self, DatasetError> {
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(header)) if header == HEADER => Ok(DatasetReader { lines, line: 1 }),
            Some(Ok(_)) => Err(DatasetError::Format { line: 1, reason: "unexpected header".into() }),
            Some(Err(e)) => Err(e.into()),
            None => Err(DatasetError::Format { line: 1, reason: "missing header".into() }),
        }
    }
}

impl<R: BufRead> Iterator for DatasetReader<R> {
    type Item = Result<InstanceRecord, DatasetError>;

    fn next(&mut self) -> Option<Self::Item> {
        let text = match self.lines.next()? {
            Ok(text) => text,
            Err(e) => return Some(Err(e.into())),
        };
        self.line += 1;
        Some(InstanceRecord::parse_row(&text, self.line))
    }
}

/// Recomputes label counts and the per-bag distribution from a dataset file.
pub fn dataset_stats(path: &Path) -> Result<GenerationStats, DatasetError> {
    let started = Instant::now();
    stats_from_reader(DatasetReader::open(path)?, started)
}

pub fn stats_from_reader<R: BufRead>(
    reader: DatasetReader<R>,
    started: Instant,
) -> Result<GenerationStats, DatasetError> {
    let mut label_counts = [0u64; 4];
    let mut per_bag: BTreeMap<usize, u64> = BTreeMap::new();
    for record in reader {
        let record = record?;
        label_counts[record.difficulty.index()] += 1;
        *per_bag.entry(record.bag_id).or_default() += u64::from(record.solvable);
    }
    let counts: Vec<u64> = per_bag.into_values().collect();
    Ok(GenerationStats::finish(label_counts, &counts, started))
}
