//! Baseline and structural difficulty models.
//!
//! Two kinds of predictors are trained on the labeled dataset:
//!
//! - logistic models on solver-independent bag/target statistics
//!   (optionally extended with witness-derived features), and
//! - a fixed rule that maps the size of the smallest input subset reaching
//!   the target straight to a difficulty label.
//!
//! Splits are by bag so that near-identical rows of one bag never straddle
//! train and test.

mod features;
pub mod logistic;

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{DatasetError, DatasetReader, DifficultyLabel, InstanceRecord};

pub use features::{
    baseline_features, structural_features, FeatureSet, FeatureVector, Sample, BASELINE_FEATURES,
    STRUCTURAL_FEATURES,
};
pub use logistic::{Hyperparams, TrainingTrace};
use logistic::{binary_loss_grad, gradient_descent, sigmoid, softmax_loss_grad, Design, Standardizer};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bag {bag_id} target {target} is unsolvable")]
    NotSolvable { bag_id: usize, target: u64 },
    #[error("degenerate training data: {0}")]
    Degenerate(String),
    #[error("model expects {expected} features, feature set provides {found}")]
    ArityMismatch { expected: String, found: String },
    #[error("no rows to evaluate")]
    EmptyData,
    #[error("subset size {0} is outside 1..=6")]
    OutOfRange(u32),
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },
    #[error("{0}")]
    Shape(String),
}

/// Difficulty implied by the size of a minimal input subset: Unsolvable when
/// absent, Easy for 1-3 inputs, Medium for 4-5, Hard for 6.
pub fn difficulty_from_subset_size(subset_size: Option<u32>) -> Result<DifficultyLabel, AnalysisError> {
    Ok(match subset_size {
        None => DifficultyLabel::Unsolvable,
        Some(1..=3) => DifficultyLabel::Easy,
        Some(4..=5) => DifficultyLabel::Medium,
        Some(6) => DifficultyLabel::Hard,
        Some(s) => return Err(AnalysisError::OutOfRange(s)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Solvability,
    Difficulty,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Solvability => "solvability",
            Task::Difficulty => "difficulty",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "solvability" => Some(Task::Solvability),
            "difficulty" => Some(Task::Difficulty),
            _ => None,
        }
    }

    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::Solvability => vec!["unsolvable".into(), "solvable".into()],
            Task::Difficulty => DifficultyLabel::ALL.iter().map(|l| l.code().to_string()).collect(),
        }
    }

    pub fn label(self, sample: &Sample) -> u8 {
        match self {
            Task::Solvability => u8::from(sample.solvable()),
            Task::Difficulty => sample.difficulty.index() as u8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    BinaryLogistic,
    MultinomialLogistic,
    SubsetSizeRule,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BinaryLogistic => "binary-logistic",
            ModelKind::MultinomialLogistic => "multinomial-logistic",
            ModelKind::SubsetSizeRule => "subset-size-rule",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "binary-logistic" => Some(ModelKind::BinaryLogistic),
            "multinomial-logistic" => Some(ModelKind::MultinomialLogistic),
            "subset-size-rule" => Some(ModelKind::SubsetSizeRule),
            _ => None,
        }
    }
}

/// A trained (or rule-based) classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub task: Task,
    pub feature_set: FeatureSet,
    /// Features actually used, in coefficient order. Columns that were
    /// constant on the training split are dropped.
    pub features: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// One row per output (`[bias, w_1, ..., w_d]`); a single row for the
    /// binary model, one per class for the multinomial one, none for the rule.
    pub coefficients: Vec<Vec<f64>>,
    pub seed: u64,
}

impl ModelParams {
    /// The exact subset-size → difficulty map as a model.
    pub fn subset_size_rule() -> Self {
        ModelParams {
            kind: ModelKind::SubsetSizeRule,
            task: Task::Difficulty,
            feature_set: FeatureSet::SubsetSizeRule,
            features: vec!["subset_size".into()],
            means: Vec::new(),
            stds: Vec::new(),
            coefficients: Vec::new(),
            seed: 0,
        }
    }

    fn row_labels(&self) -> Vec<String> {
        match self.kind {
            ModelKind::BinaryLogistic => vec!["solvable".into()],
            ModelKind::MultinomialLogistic => self.task.class_names(),
            ModelKind::SubsetSizeRule => Vec::new(),
        }
    }

    /// Writes the plain-text model format.
    pub fn save<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "kind {}", self.kind.name())?;
        writeln!(out, "task {}", self.task.name())?;
        writeln!(out, "features {}", self.feature_set.name())?;
        writeln!(out, "seed {}", self.seed)?;
        for (i, name) in self.features.iter().enumerate() {
            match (self.means.get(i), self.stds.get(i)) {
                (Some(m), Some(s)) => writeln!(out, "feature {name} mean {m} std {s}")?,
                _ => writeln!(out, "feature {name}")?,
            }
        }
        for (label, row) in self.row_labels().iter().zip(&self.coefficients) {
            writeln!(out, "coef {label} bias {}", row[0])?;
            for (name, w) in self.features.iter().zip(&row[1..]) {
                writeln!(out, "coef {label} {name} {w}")?;
            }
        }
        Ok(())
    }

    pub fn save_to_path(&self, path: &Path) -> Result<(), AnalysisError> {
        let mut file = io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut file)?;
        file.flush()?;
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> Result<Self, AnalysisError> {
        let mut kind = None;
        let mut task = None;
        let mut feature_set = None;
        let mut seed = None;
        let mut features = Vec::new();
        let mut means = Vec::new();
        let mut stds = Vec::new();
        let mut coefs: Vec<(String, String, f64)> = Vec::new();

        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let bad = |reason: &str| AnalysisError::ModelFormat { line: lineno, reason: reason.to_string() };
            let float = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a number"));
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                [] => {}
                ["kind", k] => kind = Some(ModelKind::from_name(k).ok_or_else(|| bad("unknown model kind"))?),
                ["task", t] => task = Some(Task::from_name(t).ok_or_else(|| bad("unknown task"))?),
                ["features", f] => {
                    feature_set = Some(FeatureSet::from_name(f).ok_or_else(|| bad("unknown feature set"))?)
                }
                ["seed", s] => seed = Some(s.parse::<u64>().map_err(|_| bad("bad seed"))?),
                ["feature", name] => features.push(name.to_string()),
                ["feature", name, "mean", m, "std", s] => {
                    features.push(name.to_string());
                    means.push(float(m)?);
                    stds.push(float(s)?);
                }
                ["coef", label, name, w] => coefs.push((label.to_string(), name.to_string(), float(w)?)),
                _ => return Err(bad("unrecognized line")),
            }
        }

        let missing = |what: &str| AnalysisError::ModelFormat { line: 0, reason: format!("missing {what}") };
        let mut model = ModelParams {
            kind: kind.ok_or_else(|| missing("kind"))?,
            task: task.ok_or_else(|| missing("task"))?,
            feature_set: feature_set.ok_or_else(|| missing("features"))?,
            features,
            means,
            stds,
            coefficients: Vec::new(),
            seed: seed.ok_or_else(|| missing("seed"))?,
        };
        let width = model.features.len() + 1;
        for label in model.row_labels() {
            let row: Vec<&(String, String, f64)> = coefs.iter().filter(|c| c.0 == label).collect();
            let names_ok = row.len() == width
                && row[0].1 == "bias"
                && row[1..].iter().zip(&model.features).all(|(c, f)| &c.1 == f);
            if !names_ok {
                return Err(AnalysisError::ModelFormat {
                    line: 0,
                    reason: format!("coefficients for {label} do not match the feature list"),
                });
            }
            model.coefficients.push(row.iter().map(|c| c.2).collect());
        }
        model.validate()?;
        Ok(model)
    }

    pub fn load_from_path(path: &Path) -> Result<Self, AnalysisError> {
        Self::load(io::BufReader::new(std::fs::File::open(path)?))
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |reason: String| AnalysisError::ModelFormat { line: 0, reason };
        let available = self.feature_set.feature_names();
        if let Some(f) = self.features.iter().find(|f| !available.contains(&f.as_str())) {
            return Err(bad(format!("feature {f} is not part of {}", self.feature_set)));
        }
        match self.kind {
            ModelKind::SubsetSizeRule => {
                if self.feature_set != FeatureSet::SubsetSizeRule || self.task != Task::Difficulty {
                    return Err(bad("the subset-size rule only predicts difficulty".into()));
                }
            }
            _ => {
                if self.means.len() != self.features.len() || self.stds.len() != self.features.len() {
                    return Err(bad("standardization parameters missing".into()));
                }
                if self.stds.iter().any(|&s| s.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
                    return Err(bad("standard deviations must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Predicted class index for each sample, in order.
    fn predict(&self, data: &[Sample]) -> Result<Vec<u8>, AnalysisError> {
        if self.kind == ModelKind::SubsetSizeRule {
            return data
                .iter()
                .map(|s| difficulty_from_subset_size(s.subset_size()).map(|l| l.index() as u8))
                .collect();
        }
        let names = self.feature_set.feature_names();
        let columns: Vec<usize> = self
            .features
            .iter()
            .map(|f| names.iter().position(|n| n == f).expect("validated feature name"))
            .collect();
        let mut full = Vec::with_capacity(names.len());
        let mut x = vec![0.0; columns.len()];
        let mut scores = vec![0.0; self.coefficients.len()];
        let mut out = Vec::with_capacity(data.len());
        for s in data {
            full.clear();
            self.feature_set.extract_into(s, &mut full);
            for (k, &c) in columns.iter().enumerate() {
                x[k] = (full[c] - self.means[k]) / self.stds[k];
            }
            for (score, row) in scores.iter_mut().zip(&self.coefficients) {
                *score = row[0] + x.iter().zip(&row[1..]).map(|(a, b)| a * b).sum::<f64>();
            }
            out.push(match self.kind {
                ModelKind::BinaryLogistic => u8::from(sigmoid(scores[0]) >= 0.5),
                _ => argmax(&scores) as u8,
            });
        }
        Ok(out)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// A trained model and its optimization trace.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: ModelParams,
    pub trace: TrainingTrace,
}

/// Standardized design matrix for `data`; constant columns are dropped.
fn design(data: &[Sample], feature_set: FeatureSet) -> (Design, Vec<String>, Standardizer) {
    let names = feature_set.feature_names();
    let mut x = Design::new(names.len());
    x.data.reserve(data.len() * names.len());
    let mut row = Vec::with_capacity(names.len());
    for s in data {
        row.clear();
        feature_set.extract_into(s, &mut row);
        x.push_row(&row);
    }
    let full = Standardizer::fit(&x);
    let keep: Vec<usize> = (0..names.len()).filter(|&j| full.stds[j] > 1e-12).collect();

    // Compact kept columns in place.
    let cols = x.cols;
    let mut w = 0;
    for i in 0..x.rows {
        for &j in &keep {
            x.data[w] = x.data[i * cols + j];
            w += 1;
        }
    }
    x.data.truncate(w);
    x.data.shrink_to_fit();
    x.cols = keep.len();
    let standardizer = Standardizer {
        means: keep.iter().map(|&j| full.means[j]).collect(),
        stds: keep.iter().map(|&j| full.stds[j]).collect(),
    };
    standardizer.apply(&mut x);
    let kept = keep.iter().map(|&j| names[j].to_string()).collect();
    (x, kept, standardizer)
}

fn check_classes(labels: &[u8], classes: usize, task: Task) -> Result<(), AnalysisError> {
    let present: BTreeSet<u8> = labels.iter().copied().collect();
    let names = task.class_names();
    for k in 0..classes as u8 {
        if !present.contains(&k) {
            return Err(AnalysisError::Degenerate(format!(
                "class {} is absent from the training data",
                names[k as usize]
            )));
        }
    }
    Ok(())
}

/// Solvable-vs-unsolvable logistic regression.
pub fn train_binary_logistic(train: &[Sample], feature_set: FeatureSet, hp: &Hyperparams) -> Result<Fitted, AnalysisError> {
    if feature_set == FeatureSet::SubsetSizeRule {
        return Err(AnalysisError::InvalidCombination("the subset-size rule is not a trainable feature set".into()));
    }
    let labels: Vec<u8> = train.iter().map(|s| Task::Solvability.label(s)).collect();
    check_classes(&labels, 2, Task::Solvability)?;
    let (x, features, st) = design(train, feature_set);
    let (params, trace) = gradient_descent(vec![0.0; x.cols + 1], hp, |p| binary_loss_grad(&x, &labels, p, hp.l2));
    Ok(Fitted {
        model: ModelParams {
            kind: ModelKind::BinaryLogistic,
            task: Task::Solvability,
            feature_set,
            features,
            means: st.means,
            stds: st.stds,
            coefficients: vec![params],
            seed: hp.seed,
        },
        trace,
    })
}

/// Four-class (U/E/M/H) softmax regression.
pub fn train_multinomial_logistic(
    train: &[Sample],
    feature_set: FeatureSet,
    hp: &Hyperparams,
) -> Result<Fitted, AnalysisError> {
    if feature_set == FeatureSet::SubsetSizeRule {
        return Err(AnalysisError::InvalidCombination("the subset-size rule is not a trainable feature set".into()));
    }
    let classes = DifficultyLabel::ALL.len();
    let labels: Vec<u8> = train.iter().map(|s| Task::Difficulty.label(s)).collect();
    check_classes(&labels, classes, Task::Difficulty)?;
    let (x, features, st) = design(train, feature_set);
    let width = x.cols + 1;
    let (params, trace) = gradient_descent(vec![0.0; classes * width], hp, |p| {
        softmax_loss_grad(&x, &labels, classes, p, hp.l2)
    });
    Ok(Fitted {
        model: ModelParams {
            kind: ModelKind::MultinomialLogistic,
            task: Task::Difficulty,
            feature_set,
            features,
            means: st.means,
            stds: st.stds,
            coefficients: params.chunks(width).map(<[f64]>::to_vec).collect(),
            seed: hp.seed,
        },
        trace,
    })
}

/// Difficulty from solver-independent features only.
pub fn train_difficulty_baseline(train: &[Sample], hp: &Hyperparams) -> Result<Fitted, AnalysisError> {
    train_multinomial_logistic(train, FeatureSet::Baseline, hp)
}

/// Classification quality on a labeled set.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub support: Vec<u64>,
}

impl Metrics {
    pub fn from_predictions(classes: Vec<String>, truth: &[u8], predicted: &[u8]) -> Self {
        let k = classes.len();
        let mut confusion = vec![vec![0u64; k]; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t as usize][p as usize] += 1;
        }
        let support: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
        let total: u64 = support.iter().sum();
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let diagonal: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let recall = (0..k).map(|i| ratio(confusion[i][i], support[i])).collect();
        let precision = (0..k)
            .map(|j| ratio(confusion[j][j], (0..k).map(|i| confusion[i][j]).sum()))
            .collect();
        Metrics { classes, confusion, accuracy: ratio(diagonal, total), precision, recall, support }
    }

    pub fn recall_of(&self, class: &str) -> Option<f64> {
        self.classes.iter().position(|c| c == class).map(|i| self.recall[i])
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "accuracy {:.6}", self.accuracy)?;
        writeln!(f, "{:<12}{:>10}{:>11}{:>9}", "class", "support", "precision", "recall")?;
        for (i, c) in self.classes.iter().enumerate() {
            writeln!(f, "{:<12}{:>10}{:>11.4}{:>9.4}", c, self.support[i], self.precision[i], self.recall[i])?;
        }
        write!(f, "confusion (rows true, columns predicted):")?;
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>9}")).collect();
            write!(f, "\n{}", cells.join(""))?;
        }
        Ok(())
    }
}

/// Scores `model` on `data` using features from `feature_set`.
pub fn evaluate(model: &ModelParams, data: &[Sample], feature_set: FeatureSet) -> Result<Metrics, AnalysisError> {
    if feature_set != model.feature_set {
        return Err(AnalysisError::ArityMismatch {
            expected: format!("{} ({})", model.feature_set, model.feature_set.arity()),
            found: format!("{} ({})", feature_set, feature_set.arity()),
        });
    }
    if data.is_empty() {
        return Err(AnalysisError::EmptyData);
    }
    let truth: Vec<u8> = data.iter().map(|s| model.task.label(s)).collect();
    let predicted = model.predict(data)?;
    Ok(Metrics::from_predictions(model.task.class_names(), &truth, &predicted))
}

/// Anything that belongs to a bag.
pub trait BagKeyed {
    fn bag_id(&self) -> usize;
}

impl BagKeyed for Sample {
    fn bag_id(&self) -> usize {
        self.bag_id as usize
    }
}

impl BagKeyed for InstanceRecord {
    fn bag_id(&self) -> usize {
        self.bag_id
    }
}

/// Splits rows into `(train, test)` by shuffling distinct bag ids with a
/// seeded generator; `round(test_fraction * bags)` bags go to test.
pub fn split_by_bag<T: BagKeyed>(rows: Vec<T>, test_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>), AnalysisError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(AnalysisError::InvalidFraction(test_fraction));
    }
    let bags: BTreeSet<usize> = rows.iter().map(BagKeyed::bag_id).collect();
    let mut order: Vec<usize> = bags.into_iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = (test_fraction * order.len() as f64).round() as usize;
    let test_bags: BTreeSet<usize> = order[..n_test].iter().copied().collect();
    Ok(rows.into_iter().partition(|r| !test_bags.contains(&r.bag_id())))
}

/// Reads a dataset file into compact samples.
pub fn load_samples(path: &Path) -> Result<Vec<Sample>, AnalysisError> {
    DatasetReader::open(path)?
        .map(|r| Sample::try_from(&r?))
        .collect()
}
