//! Game of 24: combine four numbers with `+ - * /` and parentheses to make 24.

mod expr;
mod rational;
mod suite;

pub use expr::{parse_expression, parse_infix, Expr, MalformedError, Op};
pub use rational::{ExactValue, Rational};
pub use suite::{generate_expression_suite, ExpressionSuite, SuiteError};

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::harness::{Critique, FeedbackLevel, UnsupportedLevel, Verdict, VerdictSource};

pub const TARGET: i64 = 24;

/// Inclusive bounds for the four puzzle numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumberRange {
    pub min: i64,
    pub max: i64,
}

impl Default for NumberRange {
    fn default() -> Self {
        Self { min: 1, max: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("expected exactly 4 numbers, found {0}")]
    WrongCount(usize),
    #[error("number {value} outside [{min}, {max}]")]
    OutOfRange { value: i64, min: i64, max: i64 },
    #[error("line {line}: {source}")]
    Line { line: usize, source: Box<InstanceError> },
    #[error("'{0}' is not an integer")]
    NotInteger(String),
}

/// A Game of 24 puzzle. Numbers are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G24Instance {
    numbers: [i64; 4],
    /// 1-based position in the difficulty-ordered instance file.
    pub rank: Option<usize>,
}

impl G24Instance {
    pub fn new(numbers: &[i64], range: NumberRange) -> Result<Self, InstanceError> {
        let arr: [i64; 4] = numbers
            .try_into()
            .map_err(|_| InstanceError::WrongCount(numbers.len()))?;
        if let Some(&value) = arr.iter().find(|v| **v < range.min || **v > range.max) {
            return Err(InstanceError::OutOfRange {
                value,
                min: range.min,
                max: range.max,
            });
        }
        let mut numbers = arr;
        numbers.sort_unstable();
        Ok(Self { numbers, rank: None })
    }

    pub fn numbers(&self) -> &[i64; 4] {
        &self.numbers
    }

    /// Space-separated numbers, as shown to the model.
    pub fn describe(&self) -> String {
        let [a, b, c, d] = self.numbers;
        format!("{a} {b} {c} {d}")
    }
}

/// Parse an instance file: one puzzle per line, four whitespace-separated
/// integers. Blank lines and `#` comments are skipped but still count
/// toward the line-number rank.
pub fn parse_instance_file(text: &str, range: NumberRange) -> Result<Vec<G24Instance>, InstanceError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let wrap = |e| InstanceError::Line {
            line: line_no,
            source: Box::new(e),
        };
        let nums = body
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| InstanceError::NotInteger(t.into())))
            .collect::<Result<Vec<_>, _>>()
            .map_err(wrap)?;
        let mut inst = G24Instance::new(&nums, range).map_err(wrap)?;
        inst.rank = Some(line_no);
        out.push(inst);
    }
    Ok(out)
}

/// One reason a proposed expression fails, in priority order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum G24Fault {
    Malformed(MalformedError),
    WrongNumbers { expr: String, used: Vec<i64>, expected: [i64; 4] },
    WrongValue { expr: String, value: ExactValue },
}

fn join_numbers(nums: &[i64]) -> String {
    let parts: Vec<String> = nums.iter().map(|n| format!("{n}")).collect();
    parts.join(" ")
}

impl fmt::Display for G24Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            G24Fault::Malformed(e) => write!(f, "The expression is malformed ({e})."),
            G24Fault::WrongNumbers { expr, used, expected } => write!(
                f,
                "{expr} uses the numbers {} instead of {}",
                join_numbers(used),
                join_numbers(expected)
            ),
            G24Fault::WrongValue { expr, value } => write!(f, "{expr}={value} not {TARGET}"),
        }
    }
}

/// Full check of a response: parsed expression (if any) and every fault found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressionCheck {
    pub expr: Option<Expr>,
    pub faults: Vec<G24Fault>,
}

impl ExpressionCheck {
    pub fn accepted(&self) -> bool {
        self.faults.is_empty()
    }
}

pub fn check_expression(instance: &G24Instance, text: &str) -> ExpressionCheck {
    let expr = match parse_expression(text) {
        Ok(e) => e,
        Err(e) => {
            return ExpressionCheck {
                expr: None,
                faults: alloc::vec![G24Fault::Malformed(e)],
            }
        }
    };
    let canonical = expr.canonical();
    let mut faults = Vec::new();
    let mut used = expr.leaves();
    used.sort_unstable();
    if used.as_slice() != instance.numbers() {
        faults.push(G24Fault::WrongNumbers {
            expr: canonical.clone(),
            used,
            expected: instance.numbers,
        });
    }
    let value = expr.evaluate();
    if !value.is(TARGET) {
        faults.push(G24Fault::WrongValue { expr: canonical, value });
    }
    ExpressionCheck {
        expr: Some(expr),
        faults,
    }
}

/// Sound verification. Only binary and first-error feedback exist for this domain.
pub fn verify_expression(
    instance: &G24Instance,
    text: &str,
    level: FeedbackLevel,
) -> Result<Verdict, UnsupportedLevel> {
    if level == FeedbackLevel::AllErrors {
        return Err(UnsupportedLevel { level, domain: "game24" });
    }
    let check = check_expression(instance, text);
    if check.accepted() {
        return Ok(Verdict::accept(VerdictSource::SoundVerifier));
    }
    let items = check.faults.iter().map(|f| format!("{f}")).collect::<Vec<_>>();
    Ok(Verdict::reject(
        VerdictSource::SoundVerifier,
        Critique::from_faults(level, items),
    ))
}

const SHAPES: usize = 5;

fn build_shape(shape: usize, l: [i64; 4], o: [Op; 3]) -> Expr {
    let n = Expr::Num;
    match shape {
        0 => Expr::bin(o[2], Expr::bin(o[1], Expr::bin(o[0], n(l[0]), n(l[1])), n(l[2])), n(l[3])),
        1 => Expr::bin(o[2], Expr::bin(o[0], n(l[0]), Expr::bin(o[1], n(l[1]), n(l[2]))), n(l[3])),
        2 => Expr::bin(o[1], Expr::bin(o[0], n(l[0]), n(l[1])), Expr::bin(o[2], n(l[2]), n(l[3]))),
        3 => Expr::bin(o[0], n(l[0]), Expr::bin(o[2], Expr::bin(o[1], n(l[1]), n(l[2])), n(l[3]))),
        _ => Expr::bin(o[0], n(l[0]), Expr::bin(o[1], n(l[1]), Expr::bin(o[2], n(l[2]), n(l[3])))),
    }
}

fn permutations(items: [i64; 4]) -> Vec<[i64; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([items[a], items[b], items[c], items[d]]);
                    }
                }
            }
        }
    }
    out
}

/// Every expression over the four numbers: 5 tree shapes, 24 leaf orders
/// (repeats included) and 64 operator assignments, 7680 in total.
pub fn enumerate_expressions(numbers: &[i64; 4]) -> Vec<Expr> {
    let mut out = Vec::with_capacity(SHAPES * 24 * 64);
    for shape in 0..SHAPES {
        for leaves in permutations(*numbers) {
            for code in 0..64usize {
                let ops = [Op::ALL[code & 3], Op::ALL[(code >> 2) & 3], Op::ALL[code >> 4]];
                out.push(build_shape(shape, leaves, ops));
            }
        }
    }
    out
}

/// First enumerated expression equal to 24, if the puzzle is solvable.
pub fn solve_brute_force(instance: &G24Instance) -> Option<Expr> {
    enumerate_expressions(instance.numbers())
        .into_iter()
        .find(|e| e.evaluate().is(TARGET))
}

/// A numeric value stated in free text, as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatedValue {
    /// `numer / denom`, from an integer or a fraction.
    Exact(i64, i64),
    /// `mantissa / 10^digits`, from a decimal with `digits` places.
    Decimal(i64, u32),
    Undefined,
}

impl StatedValue {
    /// Whether the stated value matches `actual`. Decimals match when they
    /// equal `actual` rounded to the number of places given.
    pub fn matches(&self, actual: &ExactValue) -> bool {
        let v = match actual {
            ExactValue::DivByZero => return *self == StatedValue::Undefined,
            ExactValue::Value(v) => v,
        };
        let (p, q) = (i128::from(v.numer()), i128::from(v.denom()));
        match *self {
            StatedValue::Exact(n, d) => d != 0 && i128::from(n) * q == p * i128::from(d),
            StatedValue::Decimal(m, digits) => {
                let scale = 10i128.pow(digits);
                (i128::from(m) * q - p * scale).abs() * 2 <= q
            }
            StatedValue::Undefined => false,
        }
    }
}

fn parse_stated(text: &str) -> Option<StatedValue> {
    let t = text.trim_start();
    if t.starts_with("undefined") || t.starts_with("division by zero") {
        return Some(StatedValue::Undefined);
    }
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, t),
    };
    let digits = |s: &str| s.chars().take_while(char::is_ascii_digit).count();
    let n = digits(t);
    if n == 0 || n > 15 {
        return None;
    }
    let whole: i64 = t[..n].parse().ok()?;
    let sign = if neg { -1 } else { 1 };
    let rest = &t[n..];
    if let Some(frac) = rest.strip_prefix('.') {
        let d = digits(frac);
        if d > 0 && d <= 9 {
            let scale = 10i64.pow(d as u32);
            let f: i64 = frac[..d].parse().ok()?;
            return Some(StatedValue::Decimal(sign * (whole * scale + f), d as u32));
        }
    }
    if let Some(den) = rest.trim_start().strip_prefix('/') {
        let den = den.trim_start();
        let d = digits(den);
        if d > 0 && d <= 15 {
            return Some(StatedValue::Exact(sign * whole, den[..d].parse().ok()?));
        }
    }
    Some(StatedValue::Exact(sign * whole, 1))
}

/// The value given after the last `Value:` marker in a model reply.
pub fn stated_value(text: &str) -> Option<StatedValue> {
    let lower = text.to_lowercase();
    let mut search = lower.as_str();
    while let Some(i) = search.rfind("value") {
        let after = search[i + "value".len()..].trim_start_matches(|c: char| c == '*' || c.is_whitespace());
        let after = after
            .strip_prefix(':')
            .or_else(|| after.strip_prefix('='))
            .or_else(|| after.strip_prefix("is"));
        if let Some(v) = after.and_then(|a| parse_stated(a.trim_start_matches('*'))) {
            return Some(v);
        }
        search = &search[..i];
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn inst(nums: [i64; 4]) -> G24Instance {
        G24Instance::new(&nums, NumberRange::default()).unwrap()
    }

    #[test]
    fn stated_values_are_read_from_replies() {
        let v = parse_expression("6/(1-3/4)").unwrap().evaluate();
        assert!(stated_value("Step 1: 3/4. Value: 24").unwrap().matches(&v));
        assert!(!stated_value("Value: 23").unwrap().matches(&v));
        let third = parse_expression("1/3").unwrap().evaluate();
        assert!(stated_value("the value is 0.33").unwrap().matches(&third));
        assert!(!stated_value("the value is 0.34").unwrap().matches(&third));
        assert!(stated_value("**Value:** 1 / 3").unwrap().matches(&third));
        assert_eq!(stated_value("Value: -2"), Some(StatedValue::Exact(-2, 1)));
        let undefined = parse_expression("1/(2-2)").unwrap().evaluate();
        assert!(stated_value("Value: undefined").unwrap().matches(&undefined));
        assert_eq!(stated_value("no number here"), None);
    }

    #[test]
    fn rejects_bad_instances() {
        assert_eq!(
            G24Instance::new(&[1, 2, 3], NumberRange::default()),
            Err(InstanceError::WrongCount(3))
        );
        assert!(matches!(
            G24Instance::new(&[1, 2, 3, 13], NumberRange::default()),
            Err(InstanceError::OutOfRange { value: 13, .. })
        ));
        assert!(G24Instance::new(&[1, 2, 3, 13], NumberRange { min: 1, max: 13 }).is_ok());
    }

    #[test]
    fn sum_that_misses_target() {
        let v = verify_expression(&inst([1, 1, 4, 6]), "1+1+4+6", FeedbackLevel::FirstError).unwrap();
        assert!(!v.accepted);
        assert_eq!(v.critique.unwrap().items, vec!["1+1+4+6=12 not 24".to_string()]);
    }

    #[test]
    fn accepts_valid_solution() {
        let v = verify_expression(&inst([1, 1, 6, 6]), "(1+1)*(6+6)", FeedbackLevel::FirstError).unwrap();
        assert!(v.accepted);
        assert!(v.critique.is_none());
    }

    #[test]
    fn wrong_numbers_reported_before_value() {
        let check = check_expression(&inst([1, 1, 4, 6]), "(2+2)*(4+2)");
        assert!(matches!(check.faults[0], G24Fault::WrongNumbers { .. }));
        let v = verify_expression(&inst([1, 1, 4, 6]), "(2+2)*(4+2)", FeedbackLevel::FirstError).unwrap();
        let items = v.critique.unwrap().items;
        assert_eq!(items, vec!["(2+2)*(4+2) uses the numbers 2 2 2 4 instead of 1 1 4 6".to_string()]);
    }

    #[test]
    fn malformed_critique() {
        let v = verify_expression(&inst([1, 2, 3, 4]), "(1+2*3", FeedbackLevel::FirstError).unwrap();
        let c = v.critique.unwrap();
        assert_eq!(c.items.len(), 1);
        assert!(c.items[0].contains("malformed"));
    }

    #[test]
    fn binary_has_no_items_and_all_errors_unsupported() {
        let v = verify_expression(&inst([1, 1, 4, 6]), "1+1+4+6", FeedbackLevel::Binary).unwrap();
        assert!(v.critique.unwrap().items.is_empty());
        assert!(verify_expression(&inst([1, 1, 4, 6]), "1+1+4+6", FeedbackLevel::AllErrors).is_err());
    }

    #[test]
    fn enumeration_size() {
        assert_eq!(enumerate_expressions(&[1, 2, 3, 4]).len(), 7680);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(solve_brute_force(&inst([1, 1, 1, 1])), None);
        let w = solve_brute_force(&inst([1, 3, 4, 6])).unwrap();
        assert!(w.evaluate().is(24));
        let mut leaves = w.leaves();
        leaves.sort_unstable();
        assert_eq!(leaves, vec![1, 3, 4, 6]);
        assert!(solve_brute_force(&inst([6, 6, 6, 6])).is_some());
    }

    #[test]
    fn instance_file_ranks_are_line_numbers() {
        let text = "1 1 4 6\n\n# comment\n4 6 1 1\n";
        let all = parse_instance_file(text, NumberRange::default()).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].rank, Some(1));
        assert_eq!(all[1].rank, Some(4));
        assert_eq!(all[1].numbers(), &[1, 1, 4, 6]);
        let err = parse_instance_file("1 2 3 4\n1 2 x 4\n", NumberRange::default()).unwrap_err();
        assert!(matches!(err, InstanceError::Line { line: 2, .. }));
    }
}
