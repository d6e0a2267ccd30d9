//! Linearised evaluation of expression DAGs.

use std::collections::HashMap;

use thiserror::Error;

use super::{Expr, Kind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at {point:?}")]
    DivisionByZero { point: Vec<f64> },
    #[error("logarithm of nonpositive value {value} at {point:?}")]
    LogNonpositive { value: f64, point: Vec<f64> },
    #[error("non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("point has {got} coordinates but x{needed} is referenced")]
    PointTooShort { needed: usize, got: usize },
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, i32),
    Exp(usize),
    Log(usize),
    Sin(usize),
    Cos(usize),
}

/// A straight-line program computing several expressions at once. Shared
/// subexpressions (by node identity) are evaluated once.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    max_var: Option<usize>,
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut slots: HashMap<usize, usize> = HashMap::new();
        let mut ops = Vec::new();
        let outputs = exprs.iter().map(|e| lower(e, &mut slots, &mut ops)).collect();
        let max_var = exprs.iter().filter_map(Expr::max_var).max();
        Tape { ops, outputs, max_var }
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

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut scratch = vec![0.0; self.ops.len()];
        self.eval_into(point, &mut scratch)?;
        Ok(self.outputs.iter().map(|&s| scratch[s]).collect())
    }

    /// Evaluate reusing a caller-owned buffer; returns output values via
    /// `out`.
    pub fn eval_with(&self, point: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<(), EvalError> {
        scratch.resize(self.ops.len(), 0.0);
        self.eval_into(point, scratch)?;
        for (o, &s) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[s];
        }
        Ok(())
    }

    fn eval_into(&self, point: &[f64], r: &mut [f64]) -> Result<(), EvalError> {
        if let Some(m) = self.max_var {
            if m >= point.len() {
                return Err(EvalError::PointTooShort { needed: m, got: point.len() });
            }
        }
        for (i, op) in self.ops.iter().enumerate() {
            r[i] = match *op {
                Op::Const(c) => c,
                Op::Var(v) => point[v],
                Op::Add(a, b) => r[a] + r[b],
                Op::Sub(a, b) => r[a] - r[b],
                Op::Mul(a, b) => r[a] * r[b],
                Op::Div(a, b) => {
                    if r[b] == 0.0 {
                        return Err(EvalError::DivisionByZero { point: point.to_vec() });
                    }
                    r[a] / r[b]
                }
                Op::Neg(a) => -r[a],
                Op::Pow(a, k) => {
                    if k < 0 && r[a] == 0.0 {
                        return Err(EvalError::DivisionByZero { point: point.to_vec() });
                    }
                    r[a].powi(k)
                }
                Op::Exp(a) => r[a].exp(),
                Op::Log(a) => {
                    if r[a] <= 0.0 {
                        return Err(EvalError::LogNonpositive { value: r[a], point: point.to_vec() });
                    }
                    r[a].ln()
                }
                Op::Sin(a) => r[a].sin(),
                Op::Cos(a) => r[a].cos(),
            };
            if !r[i].is_finite() {
                return Err(EvalError::NonFinite { point: point.to_vec() });
            }
        }
        Ok(())
    }
}

fn lower(e: &Expr, slots: &mut HashMap<usize, usize>, ops: &mut Vec<Op>) -> usize {
    if let Some(&s) = slots.get(&e.id()) {
        return s;
    }
    let op = match e.kind() {
        Kind::Const(c) => Op::Const(c.to_f64()),
        Kind::Var(v) => Op::Var(*v),
        Kind::Add(a, b) => Op::Add(lower(a, slots, ops), lower(b, slots, ops)),
        Kind::Sub(a, b) => Op::Sub(lower(a, slots, ops), lower(b, slots, ops)),
        Kind::Mul(a, b) => Op::Mul(lower(a, slots, ops), lower(b, slots, ops)),
        Kind::Div(a, b) => Op::Div(lower(a, slots, ops), lower(b, slots, ops)),
        Kind::Neg(a) => Op::Neg(lower(a, slots, ops)),
        Kind::Pow(a, k) => Op::Pow(lower(a, slots, ops), *k),
        Kind::Exp(a) => Op::Exp(lower(a, slots, ops)),
        Kind::Log(a) => Op::Log(lower(a, slots, ops)),
        Kind::Sin(a) => Op::Sin(lower(a, slots, ops)),
        Kind::Cos(a) => Op::Cos(lower(a, slots, ops)),
    };
    ops.push(op);
    let slot = ops.len() - 1;
    slots.insert(e.id(), slot);
    slot
}
