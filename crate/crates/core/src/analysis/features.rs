use std::fmt;

use crate::dataset::{DifficultyLabel, InstanceRecord};
use crate::engine::Bag;

use super::AnalysisError;

pub const BASELINE_FEATURES: [&str; 14] = [
    "small_sum",
    "small_max",
    "small_min",
    "big_value",
    "distinct_count",
    "even_count",
    "contains_5",
    "target",
    "target_parity",
    "target_mod_5",
    "target_mod_10",
    "target_mod_big",
    "gap_big_times_max",
    "gap_big_times_mean",
];

pub const STRUCTURAL_FEATURES: [&str; 7] = [
    "subset_size",
    "n_min_subsets",
    "max_intermediate",
    "op_add",
    "op_sub",
    "op_mul",
    "op_div",
];

/// Named feature values in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: &'static [&'static str],
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|&n| n == name).map(|i| self.values[i])
    }
}

/// Solver-independent statistics of the bag and target. The last value of
/// the bag is taken as the large number.
pub fn baseline_features(bag: &Bag, target: u64) -> FeatureVector {
    let values = bag.values();
    let (small, big) = values.split_at(values.len() - 1);
    FeatureVector { names: &BASELINE_FEATURES, values: baseline_values(small, big[0], target).to_vec() }
}

fn baseline_values<T: Copy + Into<u64>>(small: &[T], big: T, target: T) -> [f64; 14] {
    let small: Vec<u64> = small.iter().map(|&v| v.into()).collect();
    let big = big.into();
    let target = target.into();
    let sum: u64 = small.iter().sum();
    let max = small.iter().copied().max().unwrap_or(0);
    let min = small.iter().copied().min().unwrap_or(0);
    let mut all = small.clone();
    all.push(big);
    all.sort_unstable();
    all.dedup();
    let even = small.iter().chain(std::iter::once(&big)).filter(|&&v| v % 2 == 0).count();
    let has_five = small.contains(&5) || big == 5;
    let mean = if small.is_empty() { 0.0 } else { sum as f64 / small.len() as f64 };
    [
        sum as f64,
        max as f64,
        min as f64,
        big as f64,
        all.len() as f64,
        even as f64,
        f64::from(u8::from(has_five)),
        target as f64,
        (target % 2) as f64,
        (target % 5) as f64,
        (target % 10) as f64,
        (target % big) as f64,
        (target as f64 - (big * max) as f64).abs(),
        (target as f64 - big as f64 * mean).abs(),
    ]
}

/// Features read off the minimal witness of a solvable record.
pub fn structural_features(record: &InstanceRecord) -> Result<FeatureVector, AnalysisError> {
    if !record.solvable {
        return Err(AnalysisError::NotSolvable { bag_id: record.bag_id, target: record.target });
    }
    let [add, sub, mul, div] = record.op_counts;
    Ok(FeatureVector {
        names: &STRUCTURAL_FEATURES,
        values: vec![
            record.subset_size as f64,
            record.n_min_subsets as f64,
            record.max_intermediate as f64,
            add as f64,
            sub as f64,
            mul as f64,
            div as f64,
        ],
    })
}

/// Compact labeled row used for model training (the witness text is not
/// needed and would dominate memory on the full dataset).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub bag_id: u32,
    pub small: [u32; 5],
    pub big: u32,
    pub target: u32,
    pub difficulty: DifficultyLabel,
    /// -1 when unsolvable, as in the dataset file.
    pub subset_size: i32,
    pub n_min_subsets: u32,
    pub max_intermediate: i64,
    pub op_counts: [u32; 4],
}

impl Sample {
    pub fn solvable(&self) -> bool {
        self.difficulty != DifficultyLabel::Unsolvable
    }

    pub fn subset_size(&self) -> Option<u32> {
        (self.subset_size >= 0).then_some(self.subset_size as u32)
    }
}

impl TryFrom<&InstanceRecord> for Sample {
    type Error = AnalysisError;

    fn try_from(r: &InstanceRecord) -> Result<Self, Self::Error> {
        let v = r.bag.values();
        if v.len() != 6 {
            return Err(AnalysisError::Shape(format!("bag {} has {} values", r.bag_id, v.len())));
        }
        let narrow = |x: u64| u32::try_from(x).map_err(|_| AnalysisError::Shape(format!("value {x} too large")));
        Ok(Sample {
            bag_id: narrow(r.bag_id as u64)?,
            small: [narrow(v[0])?, narrow(v[1])?, narrow(v[2])?, narrow(v[3])?, narrow(v[4])?],
            big: narrow(v[5])?,
            target: narrow(r.target)?,
            difficulty: r.difficulty,
            subset_size: r.subset_size,
            n_min_subsets: r.n_min_subsets,
            max_intermediate: r.max_intermediate,
            op_counts: r.op_counts,
        })
    }
}

/// Named feature lists a model can be trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    Baseline,
    /// Baseline plus structural features; unsolvable rows carry the
    /// dataset's sentinel values (-1 sizes, zero operator counts).
    BaselineStructural,
    /// Only the subset size, consumed by the rule model.
    SubsetSizeRule,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Baseline => "baseline",
            FeatureSet::BaselineStructural => "baseline+structural",
            FeatureSet::SubsetSizeRule => "subset-size-rule",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "baseline" => Some(FeatureSet::Baseline),
            "baseline+structural" => Some(FeatureSet::BaselineStructural),
            "subset-size-rule" => Some(FeatureSet::SubsetSizeRule),
            _ => None,
        }
    }

    pub fn feature_names(self) -> Vec<&'static str> {
        match self {
            FeatureSet::Baseline => BASELINE_FEATURES.to_vec(),
            FeatureSet::BaselineStructural => {
                BASELINE_FEATURES.iter().chain(STRUCTURAL_FEATURES.iter()).copied().collect()
            }
            FeatureSet::SubsetSizeRule => vec!["subset_size"],
        }
    }

    pub fn arity(self) -> usize {
        self.feature_names().len()
    }

    /// Appends this set's features for `sample` to `out`.
    pub fn extract_into(self, sample: &Sample, out: &mut Vec<f64>) {
        let structural = |out: &mut Vec<f64>| {
            let [add, sub, mul, div] = sample.op_counts;
            out.extend_from_slice(&[
                sample.subset_size as f64,
                sample.n_min_subsets as f64,
                sample.max_intermediate as f64,
                add as f64,
                sub as f64,
                mul as f64,
                div as f64,
            ]);
        };
        match self {
            FeatureSet::Baseline => {
                out.extend_from_slice(&baseline_values(&sample.small, sample.big, sample.target))
            }
            FeatureSet::BaselineStructural => {
                out.extend_from_slice(&baseline_values(&sample.small, sample.big, sample.target));
                structural(out);
            }
            FeatureSet::SubsetSizeRule => out.push(sample.subset_size as f64),
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{enumerate_bags, label_instance};

    fn bag(v: &[u64]) -> Bag {
        Bag::new(v.to_vec()).unwrap()
    }

    #[test]
    fn baseline_examples() {
        let f = baseline_features(&bag(&[1, 1, 1, 1, 1, 25]), 999);
        assert_eq!(f.get("small_sum"), Some(5.0));
        assert_eq!(f.get("big_value"), Some(25.0));
        assert_eq!(f.get("distinct_count"), Some(2.0));
        assert_eq!(f.get("target"), Some(999.0));
        assert_eq!(f.get("target_mod_big"), Some(24.0));
        assert_eq!(f.get("gap_big_times_max"), Some(974.0));
        assert_eq!(f.get("gap_big_times_mean"), Some(974.0));

        let f = baseline_features(&bag(&[9, 9, 9, 9, 9, 75]), 100);
        assert_eq!(f.get("small_sum"), Some(45.0));
        assert_eq!(f.get("big_value"), Some(75.0));
        assert_eq!(f.get("target_mod_10"), Some(0.0));
        assert_eq!(f.get("contains_5"), Some(0.0));
        assert_eq!(f.get("even_count"), Some(0.0));
        assert_eq!(f.get("gap_big_times_max"), Some(575.0));
    }

    #[test]
    fn baseline_arity_is_fixed() {
        for b in enumerate_bags().iter().step_by(97) {
            for t in [100, 555, 999] {
                let f = baseline_features(b, t);
                assert_eq!(f.values.len(), BASELINE_FEATURES.len());
                assert!(f.values.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn sample_features_match_bag_features() {
        let r = label_instance(3, &bag(&[1, 2, 3, 4, 5, 75]), 431).unwrap();
        let s = Sample::try_from(&r).unwrap();
        let mut out = Vec::new();
        FeatureSet::Baseline.extract_into(&s, &mut out);
        assert_eq!(out, baseline_features(&r.bag, r.target).values);
        out.clear();
        FeatureSet::BaselineStructural.extract_into(&s, &mut out);
        assert_eq!(out.len(), FeatureSet::BaselineStructural.arity());
        assert_eq!(&out[14..], &structural_features(&r).unwrap().values[..]);
    }

    #[test]
    fn structural_examples() {
        let r = label_instance(0, &bag(&[2, 2, 2, 2, 2, 50]), 100).unwrap();
        let f = structural_features(&r).unwrap();
        assert_eq!(f.values, vec![2.0, 1.0, 100.0, 0.0, 0.0, 1.0, 0.0]);

        let r = label_instance(0, &bag(&[1, 2, 3, 4, 5, 75]), 100).unwrap();
        assert_eq!(structural_features(&r).unwrap().get("subset_size"), Some(3.0));

        let r = label_instance(0, &bag(&[1, 1, 1, 1, 1, 25]), 999).unwrap();
        assert!(matches!(structural_features(&r), Err(AnalysisError::NotSolvable { .. })));
    }

    #[test]
    fn feature_set_names_round_trip() {
        for fs in [FeatureSet::Baseline, FeatureSet::BaselineStructural, FeatureSet::SubsetSizeRule] {
            assert_eq!(FeatureSet::from_name(fs.name()), Some(fs));
        }
        assert_eq!(FeatureSet::from_name("structural"), None);
    }
}
