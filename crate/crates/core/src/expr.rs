//! Closed-form scalar expressions over the fixed variables `x, y, u, theta`.
//!
//! Grammar (precedence low to high, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | var | func '(' expr ')' | '(' expr ')'
//! var    := x | y | u | theta
//! func   := sin | cos | exp | sqrt
//! ```
//!
//! Exponents must simplify to constants. Derivatives are exact and
//! simplified; evaluation goes through a compiled register program that
//! computes shared subexpressions once.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X = 0,
    Y = 1,
    U = 2,
    Theta = 3,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::U, Var::Theta];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::U => "u",
            Var::Theta => "theta",
        }
    }
}

impl std::str::FromStr for Var {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Var::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| ExprError::UnknownIdent { name: s.into(), pos: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(Var),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    /// Base raised to a constant exponent.
    Pow(Expr, f64),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unexpected character {ch:?} at offset {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unknown identifier {name:?} at offset {pos}")]
    UnknownIdent { name: String, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected} at offset {pos}")]
    Expected { expected: &'static str, pos: usize },
    #[error("exponent at offset {pos} is not constant")]
    NonConstantExponent { pos: usize },
    #[error("bad number {text:?} at offset {pos}")]
    BadNumber { text: String, pos: usize },
}

impl Expr {
    fn new(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(Node::Const(c))
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Node::Var(v))
    }

    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let mut p = Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.bytes.len() {
            return Err(ExprError::UnexpectedChar {
                ch: src[p.pos..].chars().next().unwrap_or('?'),
                pos: p.pos,
            });
        }
        Ok(e)
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn add(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(0.0), _) => o.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => Expr::new(Node::Add(self.clone(), o.clone())),
        }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::new(Node::Neg(self.clone())),
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::constant(0.0),
            (Some(1.0), _) => o.clone(),
            (_, Some(1.0)) => self.clone(),
            (Some(-1.0), _) => o.neg(),
            (_, Some(-1.0)) => self.neg(),
            // keep constants on the left so they fold with each other
            (None, Some(_)) => Expr::new(Node::Mul(o.clone(), self.clone())),
            _ => Expr::new(Node::Mul(self.clone(), o.clone())),
        }
    }

    pub fn div(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a / b),
            (Some(0.0), _) => Expr::constant(0.0),
            (_, Some(1.0)) => self.clone(),
            _ => Expr::new(Node::Div(self.clone(), o.clone())),
        }
    }

    pub fn powf(&self, p: f64) -> Expr {
        if p == 0.0 {
            return Expr::constant(1.0);
        }
        if p == 1.0 {
            return self.clone();
        }
        match &*self.0 {
            Node::Const(c) => Expr::constant(c.powf(p)),
            _ => Expr::new(Node::Pow(self.clone(), p)),
        }
    }

    pub fn call(f: Func, arg: &Expr) -> Expr {
        match arg.as_const() {
            Some(c) => Expr::constant(f.apply(c)),
            None => Expr::new(Node::Call(f, arg.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> Expr {
        self.diff_memo(v, &mut HashMap::new())
    }

    // Trees built by repeated differentiation share subtrees heavily; the
    // memo keeps the walk linear in the number of distinct nodes.
    fn diff_memo(&self, v: Var, memo: &mut HashMap<*const Node, Expr>) -> Expr {
        let key = Arc::as_ptr(&self.0);
        if let Some(d) = memo.get(&key) {
            return d.clone();
        }
        let d = match &*self.0 {
            Node::Const(_) => Expr::constant(0.0),
            Node::Var(w) => Expr::constant(if *w == v { 1.0 } else { 0.0 }),
            Node::Add(a, b) => a.diff_memo(v, memo).add(&b.diff_memo(v, memo)),
            Node::Neg(a) => a.diff_memo(v, memo).neg(),
            Node::Mul(a, b) => {
                let da = a.diff_memo(v, memo);
                let db = b.diff_memo(v, memo);
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.diff_memo(v, memo);
                let db = b.diff_memo(v, memo);
                da.mul(b).sub(&a.mul(&db)).div(&b.powf(2.0))
            }
            Node::Pow(a, p) => Expr::constant(*p)
                .mul(&a.powf(p - 1.0))
                .mul(&a.diff_memo(v, memo)),
            Node::Call(f, a) => {
                let da = a.diff_memo(v, memo);
                if da.is_zero() {
                    da
                } else {
                    let outer = match f {
                        Func::Sin => a.cos(),
                        Func::Cos => a.sin().neg(),
                        Func::Exp => self.clone(),
                        Func::Sqrt => Expr::constant(0.5).div(self),
                    };
                    outer.mul(&da)
                }
            }
        };
        memo.insert(key, d.clone());
        d
    }

    pub fn gradient(&self, vars: &[Var]) -> Vec<Expr> {
        vars.iter().map(|&v| self.diff(v)).collect()
    }

    /// Directional derivative `Σ field_i ∂_i self`.
    pub fn lie(&self, vars: &[Var], field: &[Expr]) -> Expr {
        assert_eq!(vars.len(), field.len());
        vars.iter()
            .zip(field)
            .fold(Expr::constant(0.0), |acc, (&v, f)| acc.add(&f.mul(&self.diff(v))))
    }

    pub fn uses(&self, v: Var) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var(w) => *w == v,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.uses(v) || b.uses(v),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.uses(v),
        }
    }

    /// Direct recursive evaluation; `compile` is faster for repeated use.
    pub fn eval(&self, env: &[f64; 4]) -> f64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(v) => env[*v as usize],
            Node::Add(a, b) => a.eval(env) + b.eval(env),
            Node::Mul(a, b) => a.eval(env) * b.eval(env),
            Node::Div(a, b) => a.eval(env) / b.eval(env),
            Node::Neg(a) => -a.eval(env),
            Node::Pow(a, p) => pow(a.eval(env), *p),
            Node::Call(f, a) => f.apply(a.eval(env)),
        }
    }

    pub fn compile(&self) -> Program {
        Program::compile(std::slice::from_ref(self))
    }

    /// Number of distinct nodes (by identity).
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut HashSet<*const Node>) {
            if !seen.insert(Arc::as_ptr(&e.0)) {
                return;
            }
            match &*e.0 {
                Node::Const(_) | Node::Var(_) => {}
                Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => walk(a, seen),
            }
        }
        let mut seen = HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

fn pow(base: f64, p: f64) -> f64 {
    if p == p.trunc() && p.abs() <= 64.0 {
        base.powi(p as i32)
    } else {
        base.powf(p)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Node::Var(v) => f.write_str(v.name()),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, p) => {
                if *p < 0.0 {
                    write!(f, "({a} ^ ({p}))")
                } else {
                    write!(f, "({a} ^ {p})")
                }
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Load(u8),
    Add(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Pow(u32, f64),
    Call(Func, u32),
}

#[derive(PartialEq, Eq, Hash)]
enum OpKey {
    Const(u64),
    Load(u8),
    Add(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Pow(u32, u64),
    Call(u8, u32),
}

impl Op {
    fn key(&self) -> OpKey {
        match *self {
            Op::Const(c) => OpKey::Const(c.to_bits()),
            Op::Load(i) => OpKey::Load(i),
            // commutative ops get a canonical operand order
            Op::Add(a, b) => OpKey::Add(a.min(b), a.max(b)),
            Op::Mul(a, b) => OpKey::Mul(a.min(b), a.max(b)),
            Op::Div(a, b) => OpKey::Div(a, b),
            Op::Neg(a) => OpKey::Neg(a),
            Op::Pow(a, p) => OpKey::Pow(a, p.to_bits()),
            Op::Call(f, a) => OpKey::Call(f as u8, a),
        }
    }
}

/// Register program evaluating one or more expressions with shared
/// subexpressions computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    outputs: Vec<u32>,
}

struct Builder {
    ops: Vec<Op>,
    by_key: HashMap<OpKey, u32>,
    by_node: HashMap<*const Node, u32>,
}

impl Builder {
    fn push(&mut self, op: Op) -> u32 {
        let key = op.key();
        if let Some(&r) = self.by_key.get(&key) {
            return r;
        }
        let r = self.ops.len() as u32;
        self.ops.push(op);
        self.by_key.insert(key, r);
        r
    }

    fn emit(&mut self, e: &Expr) -> u32 {
        let ptr = Arc::as_ptr(&e.0);
        if let Some(&r) = self.by_node.get(&ptr) {
            return r;
        }
        let op = match &*e.0 {
            Node::Const(c) => Op::Const(*c),
            Node::Var(v) => Op::Load(*v as u8),
            Node::Add(a, b) => Op::Add(self.emit(a), self.emit(b)),
            Node::Mul(a, b) => Op::Mul(self.emit(a), self.emit(b)),
            Node::Div(a, b) => Op::Div(self.emit(a), self.emit(b)),
            Node::Neg(a) => Op::Neg(self.emit(a)),
            Node::Pow(a, p) => Op::Pow(self.emit(a), *p),
            Node::Call(f, a) => Op::Call(*f, self.emit(a)),
        };
        let r = self.push(op);
        self.by_node.insert(ptr, r);
        r
    }
}

impl Program {
    pub fn compile(exprs: &[Expr]) -> Program {
        let mut b = Builder {
            ops: Vec::new(),
            by_key: HashMap::new(),
            by_node: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| b.emit(e)).collect();
        Program {
            ops: b.ops,
            outputs,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every output into `out`, using `scratch` as the register file.
    pub fn eval_into(&self, env: &[f64; 4], scratch: &mut Vec<f64>, out: &mut [f64]) {
        scratch.clear();
        scratch.reserve(self.ops.len());
        for op in &self.ops {
            let r = |i: u32| scratch[i as usize];
            let v = match *op {
                Op::Const(c) => c,
                Op::Load(i) => env[i as usize],
                Op::Add(a, b) => r(a) + r(b),
                Op::Mul(a, b) => r(a) * r(b),
                Op::Div(a, b) => r(a) / r(b),
                Op::Neg(a) => -r(a),
                Op::Pow(a, p) => pow(r(a), p),
                Op::Call(f, a) => f.apply(r(a)),
            };
            scratch.push(v);
        }
        for (o, &i) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[i as usize];
        }
    }

    /// First output; allocates a scratch buffer.
    pub fn eval(&self, env: &[f64; 4]) -> f64 {
        let mut scratch = Vec::new();
        let mut out = [0.0];
        self.eval_into(env, &mut scratch, &mut out);
        out[0]
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let exp = self.unary()?;
            let p = exp
                .as_const()
                .ok_or(ExprError::NonConstantExponent { pos: at })?;
            return Ok(base.powf(p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some(c) = self.peek() else {
            return Err(ExprError::UnexpectedEnd);
        };
        let start = self.pos;
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')', "')'")?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
            {
                self.pos += 1;
            }
            // exponent part
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                    self.pos += 1;
                }
                let digits = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos == digits {
                    self.pos = save;
                }
            }
            let text = &self.src[start..self.pos];
            return text
                .parse::<f64>()
                .map(Expr::constant)
                .map_err(|_| ExprError::BadNumber {
                    text: text.to_string(),
                    pos: start,
                });
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            let var = match name {
                "x" => Some(Var::X),
                "y" => Some(Var::Y),
                "u" => Some(Var::U),
                "theta" => Some(Var::Theta),
                _ => None,
            };
            if let Some(v) = var {
                return Ok(Expr::var(v));
            }
            let func = match name {
                "sin" => Func::Sin,
                "cos" => Func::Cos,
                "exp" => Func::Exp,
                "sqrt" => Func::Sqrt,
                _ => {
                    return Err(ExprError::UnknownIdent {
                        name: name.to_string(),
                        pos: start,
                    })
                }
            };
            self.expect(b'(', "'('")?;
            let arg = self.expr()?;
            self.expect(b')', "')'")?;
            return Ok(Expr::call(func, &arg));
        }
        Err(ExprError::UnexpectedChar {
            ch: self.src[start..].chars().next().unwrap_or('?'),
            pos: start,
        })
    }

    fn expect(&mut self, b: u8, what: &'static str) -> Result<(), ExprError> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            None => Err(ExprError::UnexpectedEnd),
            _ => Err(ExprError::Expected {
                expected: what,
                pos: self.pos,
            }),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env(x: f64, y: f64) -> [f64; 4] {
        [x, y, 0.0, 0.0]
    }

    #[test]
    fn parse_and_eval() {
        let e = Expr::parse("x^2 + y^2 - 1").unwrap();
        assert_eq!(e.eval(&env(3.0, 4.0)), 24.0);
        let e = Expr::parse("-2^2").unwrap();
        assert_eq!(e.as_const(), Some(-4.0));
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.as_const(), Some(512.0));
        let e = Expr::parse("1.5e-1 * sqrt(x) + exp(0)").unwrap();
        assert!((e.eval(&env(4.0, 0.0)) - 1.3).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Expr::parse("x +"), Err(ExprError::UnexpectedEnd)));
        assert!(matches!(
            Expr::parse("z + 1"),
            Err(ExprError::UnknownIdent { .. })
        ));
        assert!(matches!(
            Expr::parse("x ^ y"),
            Err(ExprError::NonConstantExponent { .. })
        ));
        assert!(matches!(
            Expr::parse("(x"),
            Err(ExprError::UnexpectedEnd)
        ));
        assert!(Expr::parse("x y").is_err());
    }

    #[test]
    fn derivatives_simplify() {
        let e = Expr::parse("x^2 + 4*(y - 0.5*x^2)^2 - 1").unwrap();
        let dy = e.diff(Var::Y);
        assert!((dy.eval(&env(1.0, 2.0)) - 8.0 * 1.5 * 2.0 / 2.0 * 2.0 / 2.0).abs() < 1e-12);
        assert!(e.diff(Var::U).is_zero());
        assert!(e.diff(Var::X).diff(Var::X).diff(Var::X).diff(Var::X).diff(Var::X).is_zero());
    }

    #[test]
    fn lie_derivative_of_disk() {
        let z = Expr::parse("x^2 + y^2 - 1").unwrap();
        let v = [Expr::constant(1.0), Expr::constant(0.0)];
        let l1 = z.lie(&[Var::X, Var::Y], &v);
        let l2 = l1.lie(&[Var::X, Var::Y], &v);
        assert_eq!(l1.eval(&env(-1.0, 0.0)), -2.0);
        assert_eq!(l2.as_const(), Some(2.0));
    }

    fn finite_diff(e: &Expr, v: Var, p: [f64; 4]) -> f64 {
        let h = 1e-6;
        let mut a = p;
        let mut b = p;
        a[v as usize] += h;
        b[v as usize] -= h;
        (e.eval(&a) - e.eval(&b)) / (2.0 * h)
    }

    #[test]
    fn repeated_lie_derivatives_stay_small() {
        let z = Expr::parse("x^2 + 4*(y - 0.5*x^2)^2 - 1").unwrap();
        let vars = [Var::X, Var::Y];
        let field = [Expr::parse("cos(x*y)").unwrap(), Expr::parse("1 + sin(x)").unwrap()];
        let mut l = z.clone();
        for _ in 0..6 {
            l = l.lie(&vars, &field);
        }
        let prog = Program::compile(&[l.clone()]);
        assert!(prog.len() < 20_000, "{} ops", prog.len());
        let p = [0.3, -0.2, 0.0, 0.0];
        assert!((prog.eval(&p) - l.eval(&p)).abs() <= 1e-9 * (1.0 + l.eval(&p).abs()));
    }

    #[test]
    fn joint_program_shares_work() {
        let a = Expr::parse("sin(x*y) + 1").unwrap();
        let b = Expr::parse("sin(x*y) * 2").unwrap();
        let joint = Program::compile(&[a.clone(), b.clone()]);
        assert!(joint.len() < a.compile().len() + b.compile().len());
        let mut out = [0.0; 2];
        joint.eval_into(&[0.5, 2.0, 0.0, 0.0], &mut Vec::new(), &mut out);
        assert_eq!(out, [1.0f64.sin() + 1.0, 2.0 * 1.0f64.sin()]);
    }

    proptest! {
        #[test]
        fn compiled_matches_tree(x in -2.0f64..2.0, y in -2.0f64..2.0, t in -3.0f64..3.0) {
            let e = Expr::parse("sin(theta)*x^3 - cos(x*y)/(2 + y^2) + exp(-x) * sqrt(1 + y^2)").unwrap();
            let env = [x, y, 0.0, t];
            let prog = e.compile();
            prop_assert_eq!(prog.eval(&env).to_bits(), e.eval(&env).to_bits());
        }

        #[test]
        fn derivative_matches_central_difference(x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let e = Expr::parse("x^2 * sin(y) + exp(x*y) / (1 + x^2) - sqrt(2 + cos(x))").unwrap();
            let p = [x, y, 0.0, 0.0];
            for v in [Var::X, Var::Y] {
                let exact = e.diff(v).eval(&p);
                let approx = finite_diff(&e, v, p);
                prop_assert!((exact - approx).abs() < 1e-6 * (1.0 + exact.abs()));
            }
        }
    }
}
