//! 24-game verification and a brute-force solver oracle.
//!
//! The game: combine four integers from 1..9 with + − × ÷ and parentheses,
//! each number used exactly once, to reach exactly 24. Evaluation runs in
//! exact rational arithmetic, so the classic fractional solutions (e.g.
//! 8/(3−8/3) for {3,3,8,8}) verify correctly.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::BenchError;

/// Target value of the game.
pub const TARGET: i64 = 24;

/// Four integers in 1..9 (a multiset; stored sorted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Game24Problem {
    numbers: [i64; 4],
}

impl Game24Problem {
    pub fn new(mut numbers: [i64; 4]) -> Result<Self, BenchError> {
        if numbers.iter().any(|n| !(1..=9).contains(n)) {
            return Err(BenchError::InvalidProblem(format!(
                "numbers {numbers:?} must all lie in 1..9"
            )));
        }
        numbers.sort_unstable();
        Ok(Self { numbers })
    }

    pub fn numbers(&self) -> [i64; 4] {
        self.numbers
    }
}

impl fmt::Display for Game24Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.numbers;
        write!(f, "{a} {b} {c} {d}")
    }
}

/// Why an expression was accepted or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictReason {
    Ok,
    WrongValue,
    WrongNumbers,
    BadOperator,
    ParseError,
    DivByZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Game24Verdict {
    pub valid: bool,
    pub reason: VerdictReason,
}

impl Game24Verdict {
    fn ok() -> Self {
        Self {
            valid: true,
            reason: VerdictReason::Ok,
        }
    }

    fn reject(reason: VerdictReason) -> Self {
        Self {
            valid: false,
            reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Num(i64),
    BinOp(Op, Box<Expr>, Box<Expr>),
}

impl Expr {
    fn operands(&self, out: &mut Vec<i64>) {
        match self {
            Expr::Num(n) => out.push(*n),
            Expr::BinOp(_, l, r) => {
                l.operands(out);
                r.operands(out);
            }
        }
    }

    fn eval(&self) -> Result<Rational64, VerdictReason> {
        match self {
            Expr::Num(n) => Ok(Rational64::from_integer(*n)),
            Expr::BinOp(op, l, r) => {
                let left = l.eval()?;
                let right = r.eval()?;
                match op {
                    Op::Add => Ok(left + right),
                    Op::Sub => Ok(left - right),
                    Op::Mul => Ok(left * right),
                    Op::Div => {
                        if right.is_zero() {
                            Err(VerdictReason::DivByZero)
                        } else {
                            Ok(left / right)
                        }
                    }
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::BinOp(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Num(i64),
    Op(Op),
    LParen,
    RParen,
}

fn tokenize(expression: &str) -> Result<Vec<Token>, VerdictReason> {
    let mut tokens = Vec::new();
    let mut chars = expression.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut value: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(digit) = d.to_digit(10) {
                        value = value
                            .checked_mul(10)
                            .and_then(|v| v.checked_add(digit as i64))
                            .ok_or(VerdictReason::ParseError)?;
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Num(value));
            }
            '+' => {
                tokens.push(Token::Op(Op::Add));
                chars.next();
            }
            '-' | '−' => {
                tokens.push(Token::Op(Op::Sub));
                chars.next();
            }
            '*' | '×' | 'x' | 'X' => {
                tokens.push(Token::Op(Op::Mul));
                chars.next();
            }
            '/' | '÷' => {
                tokens.push(Token::Op(Op::Div));
                chars.next();
            }
            '(' => {
                tokens.push(Token::LParen);
                chars.next();
            }
            ')' => {
                tokens.push(Token::RParen);
                chars.next();
            }
            // Recognizable arithmetic operators the game forbids.
            '^' | '%' | '!' | '√' => return Err(VerdictReason::BadOperator),
            _ => return Err(VerdictReason::ParseError),
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

    fn next(&mut self) -> Option<Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, VerdictReason> {
        let mut node = self.term()?;
        while let Some(Token::Op(op @ (Op::Add | Op::Sub))) = self.peek() {
            self.next();
            let rhs = self.term()?;
            node = Expr::BinOp(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<Expr, VerdictReason> {
        let mut node = self.factor()?;
        while let Some(Token::Op(op @ (Op::Mul | Op::Div))) = self.peek() {
            self.next();
            let rhs = self.factor()?;
            node = Expr::BinOp(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    // factor := NUMBER | '(' expr ')'
    fn factor(&mut self) -> Result<Expr, VerdictReason> {
        match self.next() {
            Some(Token::Num(n)) => Ok(Expr::Num(n)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(VerdictReason::ParseError),
                }
            }
            _ => Err(VerdictReason::ParseError),
        }
    }
}

fn parse_expression(expression: &str) -> Result<Expr, VerdictReason> {
    let tokens = tokenize(expression)?;
    if tokens.is_empty() {
        return Err(VerdictReason::ParseError);
    }
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(VerdictReason::ParseError);
    }
    Ok(expr)
}

/// Check an expression against the game rules: parses with the four
/// operators only, uses exactly the problem's numbers once each, and
/// evaluates to exactly 24 in rational arithmetic. Never panics; all
/// failures map to a reason code.
pub fn verify_24(problem: &Game24Problem, expression: &str) -> Game24Verdict {
    let expr = match parse_expression(expression) {
        Ok(e) => e,
        Err(reason) => return Game24Verdict::reject(reason),
    };
    let mut used = Vec::with_capacity(4);
    expr.operands(&mut used);
    used.sort_unstable();
    if used != problem.numbers() {
        return Game24Verdict::reject(VerdictReason::WrongNumbers);
    }
    match expr.eval() {
        Err(reason) => Game24Verdict::reject(reason),
        Ok(value) => {
            if value == Rational64::from_integer(TARGET) {
                Game24Verdict::ok()
            } else {
                Game24Verdict::reject(VerdictReason::WrongValue)
            }
        }
    }
}

const OPS: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Div];

fn permutations(numbers: [i64; 4]) -> Vec<[i64; 4]> {
    let mut out: Vec<[i64; 4]> = Vec::new();
    let mut items = numbers;
    permute(&mut items, 0, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

fn permute(items: &mut [i64; 4], k: usize, out: &mut Vec<[i64; 4]>) {
    if k == 3 {
        out.push(*items);
        return;
    }
    for i in k..4 {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

fn shapes(nums: [i64; 4], ops: [Op; 3]) -> [Expr; 5] {
    let n = |v: i64| Box::new(Expr::Num(v));
    let b = |op: Op, l: Box<Expr>, r: Box<Expr>| Box::new(Expr::BinOp(op, l, r));
    let [a, c, d, e] = nums;
    let [o1, o2, o3] = ops;
    [
        // ((a o1 c) o2 d) o3 e
        *b(o3, b(o2, b(o1, n(a), n(c)), n(d)), n(e)),
        // (a o1 (c o2 d)) o3 e
        *b(o3, b(o1, n(a), b(o2, n(c), n(d))), n(e)),
        // (a o1 c) o2 (d o3 e)
        *b(o2, b(o1, n(a), n(c)), b(o3, n(d), n(e))),
        // a o1 ((c o2 d) o3 e)
        *b(o1, n(a), b(o3, b(o2, n(c), n(d)), n(e))),
        // a o1 (c o2 (d o3 e))
        *b(o1, n(a), b(o2, n(c), b(o3, n(d), n(e)))),
    ]
}

/// Exhaustive search over operand orderings, operator choices, and the five
/// parenthesization shapes. Returns a witness expression that [`verify_24`]
/// accepts, or `None` when 24 is unreachable.
pub fn solve_24(problem: &Game24Problem) -> Option<String> {
    let target = Rational64::from_integer(TARGET);
    for perm in permutations(problem.numbers()) {
        for o1 in OPS {
            for o2 in OPS {
                for o3 in OPS {
                    for expr in shapes(perm, [o1, o2, o3]) {
                        if let Ok(value) = expr.eval() {
                            if value == target {
                                return Some(expr.to_string());
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// All 495 multisets of four values from 1..9, for oracle sweeps.
pub fn all_problems() -> Vec<Game24Problem> {
    let mut problems = Vec::new();
    for a in 1..=9 {
        for b in a..=9 {
            for c in b..=9 {
                for d in c..=9 {
                    problems.push(Game24Problem::new([a, b, c, d]).expect("in range"));
                }
            }
        }
    }
    problems
}

/// Pull the last well-formed equation out of free answer text. Lines are
/// scanned bottom-up; for lines containing `=` the left side is taken.
pub fn extract_equation(answer: &str) -> Option<String> {
    for line in answer.lines().rev() {
        let candidate = match line.find('=') {
            Some(idx) => &line[..idx],
            None => line,
        };
        let trimmed = trim_to_arithmetic(candidate);
        if trimmed.is_empty() {
            continue;
        }
        if let Ok(expr) = parse_expression(trimmed) {
            // A bare number is not an equation.
            if matches!(expr, Expr::BinOp(..)) {
                return Some(trimmed.to_string());
            }
        }
    }
    None
}

/// Strip leading/trailing prose around an arithmetic core.
fn trim_to_arithmetic(text: &str) -> &str {
    let is_arith =
        |c: char| c.is_ascii_digit() || "+-*/×÷()".contains(c) || c == '−' || c.is_whitespace();
    let Some(start) = text.find(|c: char| c.is_ascii_digit() || c == '(') else {
        return "";
    };
    let rest = &text[start..];
    let end = rest
        .char_indices()
        .take_while(|(_, c)| is_arith(*c))
        .last()
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    rest[..end].trim()
}
