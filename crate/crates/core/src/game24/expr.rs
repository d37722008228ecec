use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::rational::{ExactValue, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Div];

    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
        }
    }

    pub fn apply(self, lhs: ExactValue, rhs: ExactValue) -> ExactValue {
        let (ExactValue::Value(a), ExactValue::Value(b)) = (lhs, rhs) else {
            return ExactValue::DivByZero;
        };
        match self {
            Op::Add => ExactValue::Value(a + b),
            Op::Sub => ExactValue::Value(a - b),
            Op::Mul => ExactValue::Value(a * b),
            Op::Div => a.checked_div(b).map_or(ExactValue::DivByZero, ExactValue::Value),
        }
    }
}

/// Arithmetic expression tree over integer literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(i64),
    Bin(Op, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: Op, lhs: Expr, rhs: Expr) -> Self {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// Exact value; any division by an exact zero poisons the whole expression.
    pub fn evaluate(&self) -> ExactValue {
        match self {
            Expr::Num(n) => ExactValue::Value(Rational::integer(*n)),
            Expr::Bin(op, l, r) => op.apply(l.evaluate(), r.evaluate()),
        }
    }

    /// Leaf values, left to right.
    pub fn leaves(&self) -> Vec<i64> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<i64>) {
        match self {
            Expr::Num(n) => out.push(*n),
            Expr::Bin(_, l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    /// Number of operator nodes.
    pub fn op_count(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Bin(_, l, r) => 1 + l.op_count() + r.op_count(),
        }
    }

    /// Canonical infix form: ASCII operators, no whitespace, and only the
    /// parentheses needed to reproduce this exact tree under left associativity.
    pub fn canonical(&self) -> String {
        use alloc::string::ToString;
        self.to_string()
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parent: Op, right: bool) -> fmt::Result {
        let wrap = match self {
            Expr::Num(_) => false,
            Expr::Bin(op, _, _) => {
                if right {
                    op.precedence() <= parent.precedence()
                } else {
                    op.precedence() < parent.precedence()
                }
            }
        };
        if wrap {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Bin(op, l, r) => {
                l.fmt_child(f, *op, false)?;
                write!(f, "{}", op.symbol())?;
                r.fmt_child(f, *op, true)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MalformedError {
    #[error("no arithmetic expression found")]
    NoExpression,
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("unexpected character '{0}'")]
    InvalidCharacter(char),
    #[error("unexpected token '{0}'")]
    UnexpectedToken(String),
    #[error("expression ended early")]
    UnexpectedEnd,
    #[error("number literal out of range")]
    NumberTooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Num(i64),
    Op(Op),
    Open,
    Close,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(n) => write!(f, "{n}"),
            Token::Op(op) => write!(f, "{}", op.symbol()),
            Token::Open => f.write_str("("),
            Token::Close => f.write_str(")"),
        }
    }
}

fn op_for(c: char) -> Option<Op> {
    match c {
        '+' => Some(Op::Add),
        '-' | '\u{2212}' | '\u{2013}' => Some(Op::Sub),
        '*' | '\u{00d7}' | '\u{22c5}' | '\u{00b7}' => Some(Op::Mul),
        '/' | '\u{00f7}' => Some(Op::Div),
        _ => None,
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, MalformedError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if let Some(d) = c.to_digit(10) {
            let mut value = i64::from(d);
            while let Some(d) = chars.peek().and_then(|c| c.to_digit(10)) {
                chars.next();
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(i64::from(d)))
                    .filter(|v| *v <= 1_000_000)
                    .ok_or(MalformedError::NumberTooLarge)?;
            }
            tokens.push(Token::Num(value));
        } else if let Some(op) = op_for(c) {
            tokens.push(Token::Op(op));
        } else if c == '(' || c == '[' {
            tokens.push(Token::Open);
        } else if c == ')' || c == ']' {
            tokens.push(Token::Close);
        } else {
            return Err(MalformedError::InvalidCharacter(c));
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, MalformedError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ (Op::Add | Op::Sub))) = self.peek() {
            self.pos += 1;
            lhs = Expr::bin(op, lhs, self.term()?);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, MalformedError> {
        let mut lhs = self.factor()?;
        while let Some(Token::Op(op @ (Op::Mul | Op::Div))) = self.peek() {
            self.pos += 1;
            lhs = Expr::bin(op, lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, MalformedError> {
        match self.peek() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    None => Err(MalformedError::UnbalancedParens),
                    Some(t) => Err(MalformedError::UnexpectedToken(alloc::format!("{t}"))),
                }
            }
            Some(Token::Close) => Err(MalformedError::UnbalancedParens),
            Some(t) => Err(MalformedError::UnexpectedToken(alloc::format!("{t}"))),
            None => Err(MalformedError::UnexpectedEnd),
        }
    }
}

/// Strict parse of a bare infix expression.
pub fn parse_infix(text: &str) -> Result<Expr, MalformedError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(MalformedError::NoExpression);
    }
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(Token::Close) => Err(MalformedError::UnbalancedParens),
        Some(t) => Err(MalformedError::UnexpectedToken(alloc::format!("{t}"))),
    }
}

/// The expression-looking part of a line: everything before `=`, trimmed to
/// start at the first digit or opening bracket and end at the last digit or
/// closing bracket. Lines without an operator are not expressions.
fn expression_segment(line: &str) -> Option<&str> {
    let before_eq = line.split('=').next().unwrap_or("");
    let is_start = |c: char| c.is_ascii_digit() || c == '(' || c == '[';
    let is_end = |c: char| c.is_ascii_digit() || c == ')' || c == ']';
    let start = before_eq.find(is_start)?;
    let end = before_eq.rfind(is_end)? + 1;
    if end <= start {
        return None;
    }
    let seg = &before_eq[start..end];
    seg.chars().any(|c| op_for(c).is_some()).then_some(seg)
}

/// Parse an expression out of free-form model output.
///
/// Lines are scanned from the last to the first; the first expression-looking
/// line that parses wins. If none parses, the error of the last
/// expression-looking line is returned.
pub fn parse_expression(text: &str) -> Result<Expr, MalformedError> {
    let mut first_err = None;
    for line in text.lines().rev() {
        let Some(seg) = expression_segment(line) else {
            continue;
        };
        match parse_infix(seg) {
            Ok(expr) => return Ok(expr),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(MalformedError::NoExpression))
}
