//! Randomized invariant checks for the solver.
//!
//! Draws dataset-shaped bags and targets from a seeded generator, solves them
//! with a chosen rule set, and compares against the brute-force oracle, the
//! closure formulation, and the standard expression evaluator.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{enumerate_bags, DEFAULT_TARGETS};
use crate::engine::{eval_expression, parse_expression, Bag, CombineRules, Operator, StandardRules};
use crate::solver::{brute_force_oracle, closure_reach_with, subset_dp_with};

/// Integer division that rounds down instead of rejecting remainders.
#[derive(Debug, Clone, Copy, Default)]
pub struct FloorDivision;

impl CombineRules for FloorDivision {
    fn combine(a: u64, b: u64, op: Operator) -> Option<u64> {
        match op {
            Operator::Div if b > 0 && a >= b => Some(a / b),
            _ => StandardRules::combine(a, b, op),
        }
    }
}

/// Never divides.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoDivision;

impl CombineRules for NoDivision {
    fn combine(a: u64, b: u64, op: Operator) -> Option<u64> {
        match op {
            Operator::Div => None,
            _ => StandardRules::combine(a, b, op),
        }
    }
}

/// Broken rule sets that can be swapped in to confirm the checks notice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    FloorDivision,
    NoDivision,
}

impl Fault {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "floor-division" => Some(Fault::FloorDivision),
            "no-division" => Some(Fault::NoDivision),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    OracleAgreement,
    WitnessValidity,
    OpsSizeIdentity,
    FormulationEquivalence,
}

impl Check {
    pub const ALL: [Check; 4] =
        [Check::OracleAgreement, Check::WitnessValidity, Check::OpsSizeIdentity, Check::FormulationEquivalence];

    pub fn name(self) -> &'static str {
        match self {
            Check::OracleAgreement => "oracle-agreement",
            Check::WitnessValidity => "witness-validity",
            Check::OpsSizeIdentity => "ops-size-identity",
            Check::FormulationEquivalence => "formulation-equivalence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub check: Check,
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub bags: usize,
    pub targets_per_bag: usize,
    pub seed: u64,
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed)
    }

    pub fn outcome(&self, check: Check) -> &CheckOutcome {
        self.outcomes.iter().find(|o| o.check == check).expect("every check is reported")
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verify bags={} targets={} seed={}", self.bags, self.targets_per_bag, self.seed)?;
        for o in &self.outcomes {
            let status = if o.passed() { "PASS" } else { "FAIL" };
            write!(f, "\n{status} {} checked={} violations={}", o.check.name(), o.checked, o.violations)?;
            if let Some(v) = &o.first_violation {
                write!(f, " first: {v}")?;
            }
        }
        Ok(())
    }
}

/// `count` bags drawn uniformly (with replacement) from the dataset bag space.
pub fn sample_bags(count: usize, rng: &mut impl Rng) -> Vec<Bag> {
    let space = enumerate_bags();
    (0..count).map(|_| space.choose(rng).expect("bag space is non-empty").clone()).collect()
}

pub fn run_verification(bags: usize, targets_per_bag: usize, seed: u64) -> VerifyReport {
    run_verification_with::<StandardRules>(bags, targets_per_bag, seed)
}

pub fn run_with_fault(fault: Fault, bags: usize, targets_per_bag: usize, seed: u64) -> VerifyReport {
    match fault {
        Fault::FloorDivision => run_verification_with::<FloorDivision>(bags, targets_per_bag, seed),
        Fault::NoDivision => run_verification_with::<NoDivision>(bags, targets_per_bag, seed),
    }
}

/// Solves with rules `R` and checks the results against rule-independent
/// references (the oracle and evaluator always use the standard rules).
pub fn run_verification_with<R: CombineRules>(bags: usize, targets_per_bag: usize, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes: Vec<CheckOutcome> = Check::ALL
        .iter()
        .map(|&check| CheckOutcome { check, checked: 0, violations: 0, first_violation: None })
        .collect();
    let [oracle, witness, identity, formulation] = &mut outcomes[..] else { unreachable!() };

    for bag in sample_bags(bags, &mut rng) {
        let table = subset_dp_with::<R>(&bag);
        let closure = closure_reach_with::<R>(&bag);
        formulation.record(closure == table.reach_map(), || format!("bag {bag}: closure and subset tables differ"));

        for _ in 0..targets_per_bag {
            let target = rng.random_range(DEFAULT_TARGETS);
            let result = table.solve(target);
            let expected = brute_force_oracle(&bag, target);
            oracle.record(result.min_ops == expected, || {
                format!("bag {bag} target {target}: solver {:?}, oracle {:?}", result.min_ops, expected)
            });
            let Some(min_ops) = result.min_ops else { continue };
            identity.record(result.subset_size == Some(min_ops + 1), || {
                format!("bag {bag} target {target}: min_ops {min_ops}, subset_size {:?}", result.subset_size)
            });
            let text = result.witness.as_ref().map(ToString::to_string).unwrap_or_default();
            let valid = parse_expression(&text).is_ok_and(|e| {
                eval_expression(&e).ok() == Some(target)
                    && e.op_count() == min_ops as usize
                    && bag.contains_multiset(&e.leaves())
            });
            witness.record(valid, || format!("bag {bag} target {target}: witness {text:?}"));
        }
    }
    VerifyReport { bags, targets_per_bag, seed, outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_rules_pass() {
        let report = run_verification(8, 10, 7);
        assert!(report.passed(), "{report}");
        assert_eq!(report.outcome(Check::OracleAgreement).checked, 80);
        assert_eq!(report.outcome(Check::FormulationEquivalence).checked, 8);
    }

    #[test]
    fn floor_division_is_caught() {
        let report = run_with_fault(Fault::FloorDivision, 10, 10, 7);
        assert!(!report.passed());
        assert!(report.outcome(Check::WitnessValidity).violations > 0, "{report}");
    }

    #[test]
    fn missing_division_is_caught() {
        let report = run_with_fault(Fault::NoDivision, 20, 20, 3);
        assert!(report.outcome(Check::OracleAgreement).violations > 0, "{report}");
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_bags(5, &mut ChaCha8Rng::seed_from_u64(1));
        let b = sample_bags(5, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert!(a.iter().all(|b| b.len() == 6));
    }

    #[test]
    fn report_lists_every_check() {
        let text = run_verification(1, 1, 0).to_string();
        for c in Check::ALL {
            assert!(text.contains(c.name()));
        }
    }
}
