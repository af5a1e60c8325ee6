//! Puzzle values, integer-constrained operations and expression trees.
//!
//! Every intermediate value is a positive integer: subtraction must stay
//! strictly positive and division must be exact. Expressions serialize to a
//! fully parenthesized, whitespace-free infix grammar:
//!
//! ```text
//! expr := INT | "(" expr op expr ")"
//! op   := "+" | "-" | "*" | "/"
//! INT  := [1-9][0-9]*
//! ```

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest bag the engine accepts.
pub const MAX_BAG_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("bag must hold between 1 and {MAX_BAG_LEN} values, got {0}")]
    BagSize(usize),
    #[error("bag values must be positive integers")]
    NonPositive,
    #[error("constraint violation at {node}: {rule}")]
    ConstraintViolation { node: String, rule: Violation },
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
}

/// Which combination rule an expression node broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NonPositiveSubtraction,
    InexactDivision,
    Overflow,
    ZeroLeaf,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::NonPositiveSubtraction => "subtraction result is not positive",
            Violation::InexactDivision => "division is not exact",
            Violation::Overflow => "value exceeds 64-bit range",
            Violation::ZeroLeaf => "leaf value must be positive",
        })
    }
}

/// A sorted multiset of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bag(Vec<u64>);

impl Bag {
    pub fn new(mut values: Vec<u64>) -> Result<Self, EngineError> {
        if values.is_empty() || values.len() > MAX_BAG_LEN {
            return Err(EngineError::BagSize(values.len()));
        }
        if values.contains(&0) {
            return Err(EngineError::NonPositive);
        }
        values.sort_unstable();
        Ok(Bag(values))
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when `values` is a sub-multiset of this bag.
    pub fn contains_multiset(&self, values: &[u64]) -> bool {
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let mut pool = self.0.iter().peekable();
        'outer: for v in sorted {
            while let Some(&&p) = pool.peek() {
                pool.next();
                match p.cmp(&v) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }
}

impl fmt::Display for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Div,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Add, Operator::Sub, Operator::Mul, Operator::Div];

    pub fn symbol(self) -> char {
        match self {
            Operator::Add => '+',
            Operator::Sub => '-',
            Operator::Mul => '*',
            Operator::Div => '/',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Operator::Add),
            '-' => Some(Operator::Sub),
            '*' => Some(Operator::Mul),
            '/' => Some(Operator::Div),
            _ => None,
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, Operator::Add | Operator::Mul)
    }

    /// Position of this operator in `[add, sub, mul, div]` counters.
    pub fn index(self) -> usize {
        self as usize
    }
}

/// The arithmetic used to combine two values. The solver is generic over it
/// so alternative rule sets (e.g. deliberately broken ones for mutation
/// testing) can be plugged in without touching the search code.
pub trait CombineRules {
    fn combine(a: u64, b: u64, op: Operator) -> Option<u64>;
}

/// Positive-integer arithmetic: `a - b` only if positive, `a / b` only if exact.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardRules;

impl CombineRules for StandardRules {
    #[inline]
    fn combine(a: u64, b: u64, op: Operator) -> Option<u64> {
        combine(a, b, op)
    }
}

/// Applies `op` to the ordered operands, returning `None` if the result would
/// not be a positive integer.
#[inline]
pub fn combine(a: u64, b: u64, op: Operator) -> Option<u64> {
    if a == 0 || b == 0 {
        return None;
    }
    match op {
        Operator::Add => a.checked_add(b),
        Operator::Mul => a.checked_mul(b),
        Operator::Sub => (a > b).then(|| a - b),
        Operator::Div => a.is_multiple_of(b).then(|| a / b),
    }
}

/// Every valid `(operator, value)` outcome of combining the unordered pair
/// `{a, b}`. Subtraction and division are only tried larger-over-smaller;
/// results are deduplicated and returned in operator order.
pub fn valid_results(a: u64, b: u64) -> Vec<(Operator, u64)> {
    valid_results_with::<StandardRules>(a, b)
}

pub fn valid_results_with<R: CombineRules>(a: u64, b: u64) -> Vec<(Operator, u64)> {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(4);
    for op in Operator::ALL {
        if let Some(v) = R::combine(hi, lo, op) {
            out.push((op, v));
        }
    }
    out
}

/// Binary expression tree over positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expression {
    Leaf(u64),
    Node(Operator, Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn node(op: Operator, left: Expression, right: Expression) -> Self {
        Expression::Node(op, Box::new(left), Box::new(right))
    }

    pub fn op_count(&self) -> usize {
        match self {
            Expression::Leaf(_) => 0,
            Expression::Node(_, l, r) => 1 + l.op_count() + r.op_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Expression::Leaf(_) => 1,
            Expression::Node(_, l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    /// Leaf values in left-to-right order.
    pub fn leaves(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<u64>) {
        match self {
            Expression::Leaf(v) => out.push(*v),
            Expression::Node(_, l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    /// Number of `[add, sub, mul, div]` nodes.
    pub fn op_counts(&self) -> [u32; 4] {
        let mut counts = [0; 4];
        self.count_ops(&mut counts);
        counts
    }

    fn count_ops(&self, counts: &mut [u32; 4]) {
        if let Expression::Node(op, l, r) = self {
            counts[op.index()] += 1;
            l.count_ops(counts);
            r.count_ops(counts);
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Leaf(v) => write!(f, "{v}"),
            Expression::Node(op, l, r) => write!(f, "({l}{}{r})", op.symbol()),
        }
    }
}

/// Evaluates `expr`, failing on the first node (in post-order) that breaks
/// the positive-integer rules.
pub fn eval_expression(expr: &Expression) -> Result<u64, EngineError> {
    match expr {
        Expression::Leaf(0) => Err(EngineError::ConstraintViolation {
            node: "0".into(),
            rule: Violation::ZeroLeaf,
        }),
        Expression::Leaf(v) => Ok(*v),
        Expression::Node(op, l, r) => {
            let a = eval_expression(l)?;
            let b = eval_expression(r)?;
            combine(a, b, *op).ok_or_else(|| EngineError::ConstraintViolation {
                node: expr.to_string(),
                rule: match op {
                    Operator::Sub => Violation::NonPositiveSubtraction,
                    Operator::Div => Violation::InexactDivision,
                    Operator::Add | Operator::Mul => Violation::Overflow,
                },
            })
        }
    }
}

pub fn serialize_expression(expr: &Expression) -> String {
    expr.to_string()
}

/// Parses the fully parenthesized grammar produced by [`serialize_expression`].
pub fn parse_expression(text: &str) -> Result<Expression, EngineError> {
    let mut parser = Parser { bytes: text.as_bytes(), pos: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: &str) -> EngineError {
        EngineError::Parse { offset: self.pos, reason: reason.to_string() }
    }

    fn expr(&mut self) -> Result<Expression, EngineError> {
        match self.bytes.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let left = self.expr()?;
                let op = match self.bytes.get(self.pos).and_then(|&b| Operator::from_symbol(b as char)) {
                    Some(op) => op,
                    None => return Err(self.error("expected operator")),
                };
                self.pos += 1;
                let right = self.expr()?;
                if self.bytes.get(self.pos) != Some(&b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(Expression::node(op, left, right))
            }
            Some(b'1'..=b'9') => {
                let start = self.pos;
                while matches!(self.bytes.get(self.pos), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
                // Digits are ASCII, so the slice is valid UTF-8.
                let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or_default();
                digits.parse().map(Expression::Leaf).map_err(|_| EngineError::Parse {
                    offset: start,
                    reason: "integer out of range".into(),
                })
            }
            Some(_) => Err(self.error("expected integer or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Serialization with the operands of `+` and `*` emitted in lexicographic
/// order, so expressions equal up to commutativity share one text.
pub fn canonical_form(expr: &Expression) -> String {
    match expr {
        Expression::Leaf(v) => v.to_string(),
        Expression::Node(op, l, r) => {
            let mut a = canonical_form(l);
            let mut b = canonical_form(r);
            if op.is_commutative() && b < a {
                std::mem::swap(&mut a, &mut b);
            }
            format!("({a}{}{b})", op.symbol())
        }
    }
}

/// Working multiset during closure search, kept sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValueState {
    len: u8,
    values: [u64; MAX_BAG_LEN],
}

impl ValueState {
    pub fn new(values: &[u64]) -> Self {
        assert!(
            !values.is_empty() && values.len() <= MAX_BAG_LEN,
            "value state must hold 1..={MAX_BAG_LEN} values"
        );
        let mut state = ValueState { len: values.len() as u8, values: [0; MAX_BAG_LEN] };
        state.values[..values.len()].copy_from_slice(values);
        state.values[..values.len()].sort_unstable();
        state
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.values[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The state obtained by replacing positions `i` and `j` with `value`.
    pub fn replace_pair(&self, i: usize, j: usize, value: u64) -> Self {
        debug_assert!(i < j && j < self.len());
        let mut next = ValueState { len: self.len - 1, values: [0; MAX_BAG_LEN] };
        let mut w = 0;
        let mut inserted = false;
        for (k, &x) in self.as_slice().iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            if !inserted && value <= x {
                next.values[w] = value;
                w += 1;
                inserted = true;
            }
            next.values[w] = x;
            w += 1;
        }
        if !inserted {
            next.values[w] = value;
        }
        next
    }
}
