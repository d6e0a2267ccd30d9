//! Scalar expression trees over chart variables.
//!
//! An [`Expr`] is an immutable, reference-counted DAG. Variable `x0` is the
//! fibre coordinate of the Thomas bundle; `x1..xn` are base coordinates.
//! Smart constructors apply only light simplification (identities for 0 and
//! 1, folding of constant subtrees), so equality of two expressions is
//! decided numerically by [`equal_prob`] rather than by normal forms.

mod display;
mod num;
mod parse;
mod sample;
mod tape;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

pub use num::{Num, Rational};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use sample::{compare, equal_prob, Comparison, SampleDomain};
pub use tape::{EvalError, Tape};

/// Largest supported variable index + 1.
pub const MAX_VARS: usize = 64;

#[derive(Clone)]
pub struct Expr(Arc<Node>);

pub(crate) struct Node {
    kind: Kind,
    /// Bit `v` is set when the subtree mentions `x_v`.
    vars: u64,
}

#[derive(Clone)]
pub(crate) enum Kind {
    Const(Num),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Exp(Expr),
    Log(Expr),
    Sin(Expr),
    Cos(Expr),
}

impl Expr {
    fn from_kind(kind: Kind) -> Expr {
        let vars = match &kind {
            Kind::Const(_) => 0,
            Kind::Var(v) => 1u64 << v,
            Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => a.0.vars | b.0.vars,
            Kind::Neg(a) | Kind::Pow(a, _) | Kind::Exp(a) | Kind::Log(a) | Kind::Sin(a) | Kind::Cos(a) => a.0.vars,
        };
        Expr(Arc::new(Node { kind, vars }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: Num) -> Expr {
        Expr::from_kind(Kind::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(Num::ZERO)
    }

    pub fn one() -> Expr {
        Expr::constant(Num::ONE)
    }

    pub fn int(v: i64) -> Expr {
        Expr::constant(Num::int(v))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::constant(Num::ratio(p, q))
    }

    /// The chart variable `x_index`. Panics if `index >= MAX_VARS`.
    pub fn var(index: usize) -> Expr {
        assert!(index < MAX_VARS, "variable index {index} out of range");
        Expr::from_kind(Kind::Var(index))
    }

    pub fn as_const(&self) -> Option<Num> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Num::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Num::is_one)
    }

    /// True when `x_v` occurs in the expression.
    pub fn depends_on(&self, v: usize) -> bool {
        v < MAX_VARS && self.0.vars & (1u64 << v) != 0
    }

    /// Highest variable index that occurs, if any.
    pub fn max_var(&self) -> Option<usize> {
        (self.0.vars != 0).then(|| 63 - self.0.vars.leading_zeros() as usize)
    }

    pub fn powi(&self, k: i32) -> Expr {
        match k {
            0 => return Expr::one(),
            1 => return self.clone(),
            _ => {}
        }
        if let Some(c) = self.as_const() {
            if let Some(v) = c.powi(k) {
                return Expr::constant(v);
            }
        }
        Expr::from_kind(Kind::Pow(self.clone(), k))
    }

    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Expr::from_kind(Kind::Exp(self.clone()))
    }

    pub fn log(&self) -> Expr {
        if self.is_one() {
            return Expr::zero();
        }
        Expr::from_kind(Kind::Log(self.clone()))
    }

    pub fn sin(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        Expr::from_kind(Kind::Sin(self.clone()))
    }

    pub fn cos(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Expr::from_kind(Kind::Cos(self.clone()))
    }

    pub fn scale(&self, c: Num) -> Expr {
        Expr::constant(c) * self
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, t| acc + t)
    }

    /// Number of distinct nodes in the DAG.
    pub fn size(&self) -> usize {
        fn walk(e: &Expr, seen: &mut HashMap<usize, ()>) {
            if seen.insert(e.id(), ()).is_some() {
                return;
            }
            e.for_each_child(|c| walk(c, seen));
        }
        let mut seen = HashMap::new();
        walk(self, &mut seen);
        seen.len()
    }

    fn for_each_child(&self, mut f: impl FnMut(&Expr)) {
        match self.kind() {
            Kind::Const(_) | Kind::Var(_) => {}
            Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
                f(a);
                f(b);
            }
            Kind::Neg(a) | Kind::Pow(a, _) | Kind::Exp(a) | Kind::Log(a) | Kind::Sin(a) | Kind::Cos(a) => f(a),
        }
    }

    /// Exact partial derivative with respect to `x_v`.
    pub fn diff(&self, v: usize) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(v, &mut memo)
    }

    fn diff_memo(&self, v: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        if let Some(d) = memo.get(&self.id()) {
            return d.clone();
        }
        let d = match self.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Add(a, b) => a.diff_memo(v, memo) + b.diff_memo(v, memo),
            Kind::Sub(a, b) => a.diff_memo(v, memo) - b.diff_memo(v, memo),
            Kind::Mul(a, b) => a.diff_memo(v, memo) * b + a * b.diff_memo(v, memo),
            Kind::Div(a, b) => {
                let da = a.diff_memo(v, memo);
                let db = b.diff_memo(v, memo);
                if db.is_zero() {
                    da / b
                } else {
                    (da * b - a * db) / b.powi(2)
                }
            }
            Kind::Neg(a) => -a.diff_memo(v, memo),
            Kind::Pow(a, k) => Expr::int(*k as i64) * a.powi(k - 1) * a.diff_memo(v, memo),
            Kind::Exp(a) => self * a.diff_memo(v, memo),
            Kind::Log(a) => a.diff_memo(v, memo) / a,
            Kind::Sin(a) => a.cos() * a.diff_memo(v, memo),
            Kind::Cos(a) => -(a.sin() * a.diff_memo(v, memo)),
        };
        memo.insert(self.id(), d.clone());
        d
    }

    /// Replace `x_v` by `map[v]` wherever `map[v]` is `Some`.
    pub fn subs(&self, map: &[Option<Expr>]) -> Expr {
        let mask = map
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_some())
            .fold(0u64, |acc, (i, _)| acc | (1u64 << i));
        let mut memo = HashMap::new();
        self.subs_memo(map, mask, &mut memo)
    }

    fn subs_memo(&self, map: &[Option<Expr>], mask: u64, memo: &mut HashMap<usize, Expr>) -> Expr {
        if self.0.vars & mask == 0 {
            return self.clone();
        }
        if let Some(e) = memo.get(&self.id()) {
            return e.clone();
        }
        let mut s = |e: &Expr| e.subs_memo(map, mask, memo);
        let out = match self.kind() {
            Kind::Const(_) => self.clone(),
            Kind::Var(w) => map[*w].clone().unwrap_or_else(|| self.clone()),
            Kind::Add(a, b) => s(a) + s(b),
            Kind::Sub(a, b) => s(a) - s(b),
            Kind::Mul(a, b) => s(a) * s(b),
            Kind::Div(a, b) => s(a) / s(b),
            Kind::Neg(a) => -s(a),
            Kind::Pow(a, k) => s(a).powi(*k),
            Kind::Exp(a) => s(a).exp(),
            Kind::Log(a) => s(a).log(),
            Kind::Sin(a) => s(a).sin(),
            Kind::Cos(a) => s(a).cos(),
        };
        memo.insert(self.id(), out.clone());
        out
    }

    /// Substitute a single variable.
    pub fn subs_var(&self, v: usize, value: &Expr) -> Expr {
        let mut map = vec![None; v + 1];
        map[v] = Some(value.clone());
        self.subs(&map)
    }

    /// Evaluate at `point` (indexed by variable). Builds a throwaway tape;
    /// compile a [`Tape`] directly when evaluating many times.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        Ok(Tape::compile(std::slice::from_ref(self)).eval(point)?[0])
    }
}

fn add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x.is_zero() => b.clone(),
        (_, Some(y)) if y.is_zero() => a.clone(),
        _ => Expr::from_kind(Kind::Add(a.clone(), b.clone())),
    }
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x.is_zero() => neg(b),
        (_, Some(y)) if y.is_zero() => a.clone(),
        _ => Expr::from_kind(Kind::Sub(a.clone(), b.clone())),
    }
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x.is_zero() => Expr::zero(),
        (Some(x), _) if x.is_one() => b.clone(),
        (_, Some(y)) if y.is_one() => a.clone(),
        (Some(x), _) if x.is_minus_one() => neg(b),
        (_, Some(y)) if y.is_minus_one() => neg(a),
        _ => Expr::from_kind(Kind::Mul(a.clone(), b.clone())),
    }
}

fn div(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if !y.is_zero() => Expr::constant(x / y),
        (Some(x), _) if x.is_zero() => Expr::zero(),
        (_, Some(y)) if y.is_one() => a.clone(),
        (_, Some(y)) if !y.is_zero() => mul(&Expr::constant(Num::ONE / y), a),
        _ => Expr::from_kind(Kind::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &Expr) -> Expr {
    match a.kind() {
        Kind::Const(c) => Expr::constant(-*c),
        Kind::Neg(inner) => inner.clone(),
        _ => Expr::from_kind(Kind::Neg(a.clone())),
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);
forward_binop!(Div, div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl From<Num> for Expr {
    fn from(c: Num) -> Self {
        Expr::constant(c)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

/// Structural equality. Two mathematically equal but differently built
/// expressions compare unequal; use [`equal_prob`] for identity checks.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.vars != other.0.vars {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Const(a), Kind::Const(b)) => a == b,
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Add(a, b), Kind::Add(c, d))
            | (Kind::Sub(a, b), Kind::Sub(c, d))
            | (Kind::Mul(a, b), Kind::Mul(c, d))
            | (Kind::Div(a, b), Kind::Div(c, d)) => a == c && b == d,
            (Kind::Pow(a, k), Kind::Pow(b, l)) => k == l && a == b,
            (Kind::Neg(a), Kind::Neg(b))
            | (Kind::Exp(a), Kind::Exp(b))
            | (Kind::Log(a), Kind::Log(b))
            | (Kind::Sin(a), Kind::Sin(b))
            | (Kind::Cos(a), Kind::Cos(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
