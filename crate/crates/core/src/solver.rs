//! Exact reachability and minimal witnesses.
//!
//! Two independent formulations compute the same thing:
//!
//! - [`closure_reach`] explores canonical [`ValueState`]s level by level,
//!   replacing an unordered pair with each valid combination.
//! - [`subset_dp`] fills one table per subset of bag positions, combining
//!   the tables of every disjoint partition `S = A ∪ B`. Each entry keeps a
//!   witness that uses exactly the elements of `S`.
//!
//! [`brute_force_oracle`] is a third, deliberately naive enumerator that only
//! shares the combination rules with the other two; it exists for testing.
//!
//! Witness choice is deterministic: among candidates for the same subset and
//! value, the lexicographically smallest canonical form wins. Commutative
//! nodes are stored with their canonically smaller operand on the left, so a
//! stored witness serializes to exactly its canonical form and the table
//! contents do not depend on enumeration order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::engine::{combine, Bag, CombineRules, Expression, Operator, StandardRules, ValueState};

/// Reachable value → minimum number of operations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReachMap {
    entries: BTreeMap<u64, u32>,
}

impl ReachMap {
    pub fn min_ops(&self, value: u64) -> Option<u32> {
        self.entries.get(&value).copied()
    }

    pub fn contains(&self, value: u64) -> bool {
        self.entries.contains_key(&value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.entries.iter().map(|(&v, &k)| (v, k))
    }

    pub fn max_value(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    fn record(&mut self, value: u64, ops: u32) {
        self.entries
            .entry(value)
            .and_modify(|k| *k = (*k).min(ops))
            .or_insert(ops);
    }
}

impl FromIterator<(u64, u32)> for ReachMap {
    fn from_iter<I: IntoIterator<Item = (u64, u32)>>(iter: I) -> Self {
        let mut map = ReachMap::default();
        for (v, k) in iter {
            map.record(v, k);
        }
        map
    }
}

/// Every value obtainable from any sub-multiset of `bag`, with its exact
/// minimum operation count.
pub fn closure_reach(bag: &Bag) -> ReachMap {
    closure_reach_with::<StandardRules>(bag)
}

pub fn closure_reach_with<R: CombineRules>(bag: &Bag) -> ReachMap {
    let mut reach = ReachMap::default();
    for &v in bag.values() {
        reach.record(v, 0);
    }

    // All states on one level have consumed the same number of operations,
    // so the first level on which a value is created gives its minimum.
    let mut level: FxHashSet<ValueState> = FxHashSet::default();
    level.insert(ValueState::new(bag.values()));
    let mut ops = 0;
    while !level.is_empty() {
        ops += 1;
        let mut next = FxHashSet::default();
        for state in &level {
            let values = state.as_slice();
            if values.len() < 2 {
                continue;
            }
            for i in 0..values.len() {
                // Equal neighbours give identical successors.
                if i > 0 && values[i] == values[i - 1] {
                    continue;
                }
                for j in i + 1..values.len() {
                    if j > i + 1 && values[j] == values[j - 1] {
                        continue;
                    }
                    for (_, v) in crate::engine::valid_results_with::<R>(values[i], values[j]) {
                        reach.record(v, ops);
                        if values.len() > 2 {
                            next.insert(state.replace_pair(i, j, v));
                        }
                    }
                }
            }
        }
        level = next;
    }
    reach
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EntryRef {
    mask: u16,
    index: u32,
}

#[derive(Debug, Clone)]
enum Source {
    Leaf,
    Node { op: Operator, left: EntryRef, right: EntryRef },
}

#[derive(Debug, Clone)]
struct Entry {
    value: u64,
    canonical: Box<str>,
    source: Source,
    /// Largest internal-node value in the witness; 0 for a leaf.
    max_internal: u64,
    op_counts: [u8; 4],
}

#[derive(Debug, Clone, Default)]
struct ValueTable {
    index: FxHashMap<u64, u32>,
    entries: Vec<Entry>,
}

impl ValueTable {
    fn get(&self, value: u64) -> Option<&Entry> {
        self.index.get(&value).map(|&i| &self.entries[i as usize])
    }

    /// Inserts the candidate `Node(op, left, right)` unless an entry for the
    /// same value already has a canonical form that is not larger.
    fn offer(&mut self, value: u64, op: Operator, left: (&Entry, EntryRef), right: (&Entry, EntryRef)) {
        let (le, lref) = left;
        let (re, rref) = right;
        let sym = [op.symbol() as u8];
        let pieces: [&[u8]; 5] = [b"(", le.canonical.as_bytes(), &sym, re.canonical.as_bytes(), b")"];

        let slot = match self.index.get(&value) {
            Some(&i) => {
                let current = self.entries[i as usize].canonical.as_bytes();
                if pieces.iter().flat_map(|p| p.iter()).cmp(current.iter()) != Ordering::Less {
                    return;
                }
                Some(i as usize)
            }
            None => None,
        };

        let mut canonical = String::with_capacity(pieces.iter().map(|p| p.len()).sum());
        canonical.push('(');
        canonical.push_str(&le.canonical);
        canonical.push(op.symbol());
        canonical.push_str(&re.canonical);
        canonical.push(')');
        let mut op_counts = [0u8; 4];
        for (k, c) in op_counts.iter_mut().enumerate() {
            *c = le.op_counts[k] + re.op_counts[k];
        }
        op_counts[op.index()] += 1;
        let entry = Entry {
            value,
            canonical: canonical.into_boxed_str(),
            source: Source::Node { op, left: lref, right: rref },
            max_internal: value.max(le.max_internal).max(re.max_internal),
            op_counts,
        };
        match slot {
            Some(i) => self.entries[i] = entry,
            None => {
                self.index.insert(value, self.entries.len() as u32);
                self.entries.push(entry);
            }
        }
    }
}

/// Per-subset tables of values obtainable using exactly the elements of the
/// subset, each with a deterministic minimal witness.
///
/// Subsets are bitmasks over bag positions. Subsets holding the same value
/// multiset share one table (their witnesses are indistinguishable since
/// leaves carry values, not positions).
#[derive(Debug, Clone)]
pub struct SubsetTable {
    bag: Bag,
    representative: Vec<u16>,
    tables: Vec<ValueTable>,
    /// Representative masks grouped by population count.
    by_size: Vec<Vec<u16>>,
}

impl SubsetTable {
    pub fn bag(&self) -> &Bag {
        &self.bag
    }

    /// The mask whose table backs `mask` (the first mask in processing
    /// order with the same value multiset).
    pub fn representative(&self, mask: u16) -> u16 {
        self.representative[mask as usize]
    }

    fn table(&self, mask: u16) -> &ValueTable {
        &self.tables[self.representative(mask) as usize]
    }

    /// Number of distinct values obtainable with exactly the subset `mask`.
    pub fn value_count(&self, mask: u16) -> usize {
        self.table(mask).entries.len()
    }

    /// Values for `mask`, ascending.
    pub fn values(&self, mask: u16) -> Vec<u64> {
        let mut out: Vec<u64> = self.table(mask).entries.iter().map(|e| e.value).collect();
        out.sort_unstable();
        out
    }

    pub fn contains(&self, mask: u16, value: u64) -> bool {
        self.table(mask).index.contains_key(&value)
    }

    pub fn witness(&self, mask: u16, value: u64) -> Option<Expression> {
        let rep = self.representative(mask);
        let index = *self.tables[rep as usize].index.get(&value)?;
        Some(self.build(EntryRef { mask: rep, index }))
    }

    /// Canonical (and serialized) text of the stored witness.
    pub fn witness_text(&self, mask: u16, value: u64) -> Option<&str> {
        self.table(mask).get(value).map(|e| &*e.canonical)
    }

    /// The multiset of bag values selected by `mask`.
    pub fn subset_values(&self, mask: u16) -> Vec<u64> {
        subset_values(self.bag.values(), mask)
    }

    fn entry(&self, r: EntryRef) -> &Entry {
        &self.tables[r.mask as usize].entries[r.index as usize]
    }

    fn build(&self, r: EntryRef) -> Expression {
        let entry = self.entry(r);
        match entry.source {
            Source::Leaf => Expression::Leaf(entry.value),
            Source::Node { op, left, right } => Expression::node(op, self.build(left), self.build(right)),
        }
    }

    /// Union of all subset tables, each value at its smallest subset size minus one.
    pub fn reach_map(&self) -> ReachMap {
        let mut reach = ReachMap::default();
        for (ops, masks) in self.by_size.iter().enumerate() {
            for &mask in masks {
                for e in &self.tables[mask as usize].entries {
                    reach.record(e.value, ops as u32);
                }
            }
        }
        reach
    }

    pub fn solve(&self, target: u64) -> SolveResult {
        for masks in &self.by_size {
            let hits: Vec<(u16, &Entry)> = masks
                .iter()
                .filter_map(|&m| self.tables[m as usize].get(target).map(|e| (m, e)))
                .collect();
            let Some(&(mask, best)) = hits
                .iter()
                .min_by(|a, b| a.1.canonical.cmp(&b.1.canonical))
            else {
                continue;
            };
            let index = self.tables[mask as usize].index[&target];
            let subset_size = mask.count_ones();
            let minimal_value_subsets = hits.iter().map(|&(m, _)| self.subset_values(m)).collect();
            return SolveResult {
                target,
                solvable: true,
                min_ops: Some(subset_size - 1),
                subset_size: Some(subset_size),
                witness: Some(self.build(EntryRef { mask, index })),
                minimal_value_subsets,
                max_intermediate: Some(best.max_internal.max(target)),
                op_counts: best.op_counts.map(u32::from),
            };
        }
        SolveResult::unsolvable(target)
    }
}

fn subset_values(values: &[u64], mask: u16) -> Vec<u64> {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| mask & (1 << i) != 0)
        .map(|(_, &v)| v)
        .collect()
}

/// Builds the subset-indexed witness table for `bag`.
pub fn subset_dp(bag: &Bag) -> SubsetTable {
    subset_dp_with::<StandardRules>(bag)
}

pub fn subset_dp_with<R: CombineRules>(bag: &Bag) -> SubsetTable {
    let n = bag.len();
    let full = (1u16 << n) - 1;
    let mut order: Vec<u16> = (1..=full).collect();
    order.sort_by_key(|&m| (m.count_ones(), m));

    let mut representative = vec![0u16; 1 << n];
    let mut seen: BTreeMap<Vec<u64>, u16> = BTreeMap::new();
    let mut by_size = vec![Vec::new(); n];
    for &mask in &order {
        let key = subset_values(bag.values(), mask);
        let rep = *seen.entry(key).or_insert(mask);
        representative[mask as usize] = rep;
        if rep == mask {
            by_size[mask.count_ones() as usize - 1].push(mask);
        }
    }

    let mut tables = vec![ValueTable::default(); 1 << n];
    for &mask in &order {
        if representative[mask as usize] != mask {
            continue;
        }
        let mut table = ValueTable::default();
        if mask.count_ones() == 1 {
            let value = bag.values()[mask.trailing_zeros() as usize];
            table.index.insert(value, 0);
            table.entries.push(Entry {
                value,
                canonical: value.to_string().into_boxed_str(),
                source: Source::Leaf,
                max_internal: 0,
                op_counts: [0; 4],
            });
        } else {
            // Sub-masks A of S in ascending order, keeping A < B = S \ A.
            let mut a = 0u16.wrapping_sub(mask) & mask;
            while a != 0 {
                let b = mask ^ a;
                if a < b {
                    let ra = representative[a as usize];
                    let rb = representative[b as usize];
                    combine_tables::<R>(&mut table, (&tables[ra as usize], ra), (&tables[rb as usize], rb));
                }
                a = a.wrapping_sub(mask) & mask;
            }
        }
        tables[mask as usize] = table;
    }

    SubsetTable { bag: bag.clone(), representative, tables, by_size }
}

fn combine_tables<R: CombineRules>(out: &mut ValueTable, a: (&ValueTable, u16), b: (&ValueTable, u16)) {
    let (ta, ma) = a;
    let (tb, mb) = b;
    for (ia, ea) in ta.entries.iter().enumerate() {
        let ra = EntryRef { mask: ma, index: ia as u32 };
        for (ib, eb) in tb.entries.iter().enumerate() {
            let rb = EntryRef { mask: mb, index: ib as u32 };
            let (x, y) = (ea.value, eb.value);

            let (first, second) = if ea.canonical <= eb.canonical {
                ((ea, ra), (eb, rb))
            } else {
                ((eb, rb), (ea, ra))
            };
            for op in [Operator::Add, Operator::Mul] {
                if let Some(v) = R::combine(x, y, op) {
                    out.offer(v, op, first, second);
                }
            }

            // Larger over smaller; equal values are tried in both orders
            // since the two witnesses differ.
            let mut ordered = Vec::with_capacity(2);
            if x >= y {
                ordered.push(((ea, ra), (eb, rb)));
            }
            if y >= x {
                ordered.push(((eb, rb), (ea, ra)));
            }
            for (hi, lo) in ordered {
                for op in [Operator::Sub, Operator::Div] {
                    if let Some(v) = R::combine(hi.0.value, lo.0.value, op) {
                        out.offer(v, op, hi, lo);
                    }
                }
            }
        }
    }
}

/// Outcome of solving one `(bag, target)` instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub target: u64,
    pub solvable: bool,
    pub min_ops: Option<u32>,
    pub subset_size: Option<u32>,
    pub witness: Option<Expression>,
    /// Distinct value multisets of the minimal-size subsets reaching the target.
    pub minimal_value_subsets: BTreeSet<Vec<u64>>,
    /// Largest internal-node value of the witness, root included.
    pub max_intermediate: Option<u64>,
    /// `[add, sub, mul, div]` node counts of the witness.
    pub op_counts: [u32; 4],
}

impl SolveResult {
    fn unsolvable(target: u64) -> Self {
        SolveResult {
            target,
            solvable: false,
            min_ops: None,
            subset_size: None,
            witness: None,
            minimal_value_subsets: BTreeSet::new(),
            max_intermediate: None,
            op_counts: [0; 4],
        }
    }
}

pub fn solve(bag: &Bag, target: u64) -> SolveResult {
    subset_dp(bag).solve(target)
}

/// Solves every target in `lo..=hi` against one shared subset table.
pub fn reachable_targets(bag: &Bag, lo: u64, hi: u64) -> BTreeMap<u64, SolveResult> {
    let table = subset_dp(bag);
    (lo..=hi).map(|t| (t, table.solve(t))).collect()
}

/// Exhaustive minimum-operation search for testing.
///
/// Repeatedly combines two elements of a working list, without memoization,
/// deepening the operation budget one step at a time. Only the combination
/// rules are shared with the real solver.
pub fn brute_force_oracle(bag: &Bag, target: u64) -> Option<u32> {
    assert!(bag.len() <= 6, "oracle is limited to bags of at most six values");
    let mut work = bag.values().to_vec();
    (0..bag.len() as u32).find(|&budget| search(&mut work, target, budget))
}

fn search(work: &mut Vec<u64>, target: u64, budget: u32) -> bool {
    if work.contains(&target) {
        return true;
    }
    if budget == 0 || work.len() < 2 {
        return false;
    }
    for i in 0..work.len() {
        for j in i + 1..work.len() {
            let (x, y) = (work[i], work[j]);
            let outcomes = [
                combine(x, y, Operator::Add),
                combine(x, y, Operator::Mul),
                combine(x, y, Operator::Sub),
                combine(y, x, Operator::Sub),
                combine(x, y, Operator::Div),
                combine(y, x, Operator::Div),
            ];
            for v in outcomes.into_iter().flatten() {
                // Shrink in place: drop position j, overwrite i with the result.
                work.swap_remove(j);
                work[i] = v;
                let found = search(work, target, budget - 1);
                work[i] = x;
                work.push(y);
                let last = work.len() - 1;
                work.swap(j, last);
                if found {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{canonical_form, eval_expression, serialize_expression};
    use proptest::prelude::*;

    fn bag(v: &[u64]) -> Bag {
        Bag::new(v.to_vec()).unwrap()
    }

    #[test]
    fn closure_of_pair() {
        let reach = closure_reach(&bag(&[2, 3]));
        let entries: Vec<_> = reach.iter().collect();
        assert_eq!(entries, vec![(1, 1), (2, 0), (3, 0), (5, 1), (6, 1)]);
    }

    #[test]
    fn closure_of_singleton() {
        let reach = closure_reach(&bag(&[4]));
        assert_eq!(reach.iter().collect::<Vec<_>>(), vec![(4, 0)]);
    }

    #[test]
    fn closure_reaches_100_in_two() {
        let reach = closure_reach(&bag(&[1, 2, 3, 4, 5, 75]));
        assert_eq!(reach.min_ops(100), Some(2));
    }

    #[test]
    fn dp_pair_tables() {
        let t = subset_dp(&bag(&[2, 50]));
        assert_eq!(t.witness_text(0b11, 100), Some("(2*50)"));
        assert_eq!(serialize_expression(&t.witness(0b11, 100).unwrap()), "(2*50)");

        let t = subset_dp(&bag(&[4, 4]));
        assert_eq!(t.values(0b11), vec![1, 8, 16]);
        assert!(!t.contains(0b11, 0));
    }

    #[test]
    fn dp_singletons_are_leaves() {
        let b = bag(&[3, 7, 7, 25]);
        let t = subset_dp(&b);
        for i in 0..4 {
            let mask = 1 << i;
            assert_eq!(t.values(mask), vec![b.values()[i]]);
            assert_eq!(t.witness(mask, b.values()[i]), Some(Expression::Leaf(b.values()[i])));
        }
    }

    #[test]
    fn dp_needs_three_inputs_for_100() {
        let t = subset_dp(&bag(&[1, 2, 3, 4, 5, 75]));
        let sizes: Vec<u32> = (1u16..64).filter(|&m| t.contains(m, 100)).map(|m| m.count_ones()).collect();
        assert_eq!(sizes.iter().min(), Some(&3));
    }

    #[test]
    fn duplicate_values_share_tables() {
        let t = subset_dp(&bag(&[2, 2, 2, 2, 2, 50]));
        assert_eq!(t.representative(0b000010), 0b000001);
        assert_eq!(t.representative(0b100010), 0b100001);
        assert_eq!(t.values(0b100010), t.values(0b100001));
    }

    #[test]
    fn solve_examples() {
        let r = solve(&bag(&[2, 2, 2, 2, 2, 50]), 100);
        assert!(r.solvable);
        assert_eq!(r.min_ops, Some(1));
        assert_eq!(r.subset_size, Some(2));
        assert_eq!(serialize_expression(r.witness.as_ref().unwrap()), "(2*50)");
        assert_eq!(r.op_counts, [0, 0, 1, 0]);
        assert_eq!(r.max_intermediate, Some(100));
        assert_eq!(r.minimal_value_subsets, BTreeSet::from([vec![2, 50]]));

        let r = solve(&bag(&[1, 1, 1, 1, 1, 25]), 999);
        assert!(!r.solvable);
        assert_eq!((r.min_ops, r.subset_size, r.max_intermediate), (None, None, None));
        assert!(r.witness.is_none());

        let r = solve(&bag(&[1, 2, 3, 4, 5, 75]), 100);
        assert_eq!((r.min_ops, r.subset_size), (Some(2), Some(3)));
        assert_eq!(eval_expression(r.witness.as_ref().unwrap()), Ok(100));
    }

    #[test]
    fn solve_zero_op_target() {
        let r = solve(&bag(&[3, 9]), 9);
        assert_eq!((r.min_ops, r.subset_size), (Some(0), Some(1)));
        assert_eq!(r.witness, Some(Expression::Leaf(9)));
        assert_eq!(r.max_intermediate, Some(9));
    }

    #[test]
    fn witness_prefers_smallest_canonical_form() {
        // 100 = 2*50 = 50*2 = 50+50 ... from (2, 50, 50): minimal subsets {2,50} and {50,50}.
        let r = solve(&bag(&[2, 50, 50]), 100);
        assert_eq!(r.subset_size, Some(2));
        assert_eq!(serialize_expression(r.witness.as_ref().unwrap()), "(2*50)");
        assert_eq!(r.minimal_value_subsets, BTreeSet::from([vec![2, 50], vec![50, 50]]));
    }

    #[test]
    fn max_value_for_ones_and_25() {
        let reach = closure_reach(&bag(&[1, 1, 1, 1, 1, 25]));
        assert_eq!(reach.max_value(), Some(150));
        let targets = reachable_targets(&bag(&[1, 1, 1, 1, 1, 25]), 151, 999);
        assert_eq!(targets.len(), 849);
        assert!(targets.values().all(|r| !r.solvable));
    }

    #[test]
    fn reachable_targets_matches_solve() {
        let b = bag(&[2, 2, 2, 2, 2, 50]);
        let all = reachable_targets(&b, 100, 100);
        assert_eq!(all.len(), 1);
        assert_eq!(all[&100].min_ops, Some(1));
        for (t, r) in reachable_targets(&b, 95, 130) {
            assert_eq!(r, solve(&b, t));
        }
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(brute_force_oracle(&bag(&[2, 3]), 6), Some(1));
        assert_eq!(brute_force_oracle(&bag(&[2, 2, 2, 2, 2, 50]), 100), Some(1));
        assert_eq!(brute_force_oracle(&bag(&[1, 2, 3, 4, 5, 75]), 100), Some(2));
        assert_eq!(brute_force_oracle(&bag(&[1, 1, 1, 1, 1, 25]), 999), None);
        assert_eq!(brute_force_oracle(&bag(&[1, 1, 1, 1, 1, 25]), 150), Some(5));
    }

    #[test]
    fn equal_values_divide_to_one() {
        // Among ((2*2)/4), (4/(2*2)), ((4-2)/2), (2/(4-2)), ... the first sorts lowest.
        let t = subset_dp(&bag(&[2, 2, 4]));
        assert_eq!(t.witness_text(0b111, 1), Some("((2*2)/4)"));
    }

    fn small_bag() -> impl Strategy<Value = Bag> {
        prop::collection::vec(1u64..=12, 1..=4).prop_map(|v| Bag::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn formulations_agree(b in small_bag()) {
            prop_assert_eq!(closure_reach(&b), subset_dp(&b).reach_map());
        }

        #[test]
        fn table_witnesses_are_exact(b in small_bag()) {
            let t = subset_dp(&b);
            for mask in 1u16..(1 << b.len()) {
                let mut want = t.subset_values(mask);
                want.sort_unstable();
                for v in t.values(mask) {
                    let w = t.witness(mask, v).unwrap();
                    prop_assert_eq!(eval_expression(&w), Ok(v));
                    prop_assert_eq!(w.op_count(), mask.count_ones() as usize - 1);
                    let mut leaves = w.leaves();
                    leaves.sort_unstable();
                    prop_assert_eq!(&leaves, &want);
                    prop_assert_eq!(canonical_form(&w), t.witness_text(mask, v).unwrap());
                }
            }
        }

        #[test]
        fn solve_matches_oracle(b in small_bag(), target in 1u64..200) {
            let r = solve(&b, target);
            prop_assert_eq!(r.min_ops, brute_force_oracle(&b, target));
            if let Some(w) = &r.witness {
                prop_assert_eq!(eval_expression(w), Ok(target));
                prop_assert!(b.contains_multiset(&w.leaves()));
                prop_assert_eq!(r.min_ops, r.subset_size.map(|s| s - 1));
                prop_assert_eq!(r.op_counts.iter().sum::<u32>(), r.min_ops.unwrap());
            }
        }

        #[test]
        fn adding_a_value_never_hurts(b in small_bag(), extra in 1u64..=12) {
            let mut bigger = b.values().to_vec();
            bigger.push(extra);
            let small = closure_reach(&b);
            let large = closure_reach(&Bag::new(bigger).unwrap());
            for (v, k) in small.iter() {
                let k2 = large.min_ops(v);
                prop_assert!(k2.is_some_and(|k2| k2 <= k), "value {} lost or worsened", v);
            }
        }

        #[test]
        fn solve_is_deterministic(b in small_bag(), target in 1u64..100) {
            prop_assert_eq!(solve(&b, target), solve(&b, target));
        }
    }
}
