//! Coordinate charts and explicit-inverse coordinate changes.

use crate::error::{Error, Result};
use crate::expr::{Expr, Num, SampleDomain, Tape};

/// A block of consecutive chart variables.
///
/// A base chart of dimension `n` uses `x1..xn`; the Thomas chart over it
/// uses `x0..xn`, with the fibre coordinate stored first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chart {
    dim: usize,
    first_var: usize,
}

impl Chart {
    pub fn base(n: usize) -> Chart {
        Chart { dim: n, first_var: 1 }
    }

    /// The chart on the Thomas bundle over an `n`-dimensional base.
    pub fn thomas(n: usize) -> Chart {
        Chart { dim: n + 1, first_var: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_thomas(&self) -> bool {
        self.first_var == 0
    }

    /// Dimension of the base manifold this chart lives over.
    pub fn base_dim(&self) -> usize {
        if self.is_thomas() {
            self.dim - 1
        } else {
            self.dim
        }
    }

    /// Variable index of array position `a`.
    pub fn var(&self, a: usize) -> usize {
        debug_assert!(a < self.dim);
        self.first_var + a
    }

    pub fn coord(&self, a: usize) -> Expr {
        Expr::var(self.var(a))
    }

    pub fn partial(&self, e: &Expr, a: usize) -> Expr {
        e.diff(self.var(a))
    }

    /// Length of a point vector covering every variable of this chart,
    /// always including `x0`.
    pub fn point_len(&self) -> usize {
        self.first_var + self.dim
    }

    pub fn default_domain(&self) -> SampleDomain {
        SampleDomain::new(self.point_len())
    }

    /// Error unless every variable of `e` belongs to this chart (a base
    /// chart also tolerates `x0`-free expressions only).
    pub fn check_vars(&self, e: &Expr) -> Result<()> {
        let last = self.first_var + self.dim - 1;
        if let Some(v) = e.max_var() {
            if v > last {
                return Err(Error::VariableOutOfChart { var: v, first: self.first_var, last });
            }
        }
        if self.first_var > 0 && e.depends_on(0) {
            return Err(Error::VariableOutOfChart { var: 0, first: self.first_var, last });
        }
        Ok(())
    }
}

pub fn delta(a: usize, b: usize) -> Expr {
    if a == b {
        Expr::one()
    } else {
        Expr::zero()
    }
}

/// Determinant by cofactor expansion of a row-major square matrix.
pub fn determinant(m: &[Expr], dim: usize) -> Expr {
    assert_eq!(m.len(), dim * dim);
    match dim {
        0 => Expr::one(),
        1 => m[0].clone(),
        2 => &m[0] * &m[3] - &m[1] * &m[2],
        _ => {
            let mut acc = Expr::zero();
            for col in 0..dim {
                if m[col].is_zero() {
                    continue;
                }
                let minor: Vec<Expr> = (1..dim)
                    .flat_map(|r| (0..dim).filter(move |&c| c != col).map(move |c| (r, c)))
                    .map(|(r, c)| m[r * dim + c].clone())
                    .collect();
                let term = &m[col] * determinant(&minor, dim - 1);
                acc = if col % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// `J^{-w}` for a positive expression `J`.
pub(crate) fn power_of_positive(j: &Expr, w: Num) -> Expr {
    if w.is_zero() {
        return Expr::one();
    }
    if let Some(k) = w.as_i32() {
        return j.powi(k);
    }
    (Expr::constant(w) * j.log()).exp()
}

/// A coordinate change `x̄ = f(x)` together with its inverse `x = g(x̄)`.
/// Both maps use the variable indices of `chart`.
#[derive(Clone, Debug)]
pub struct ChartTransition {
    chart: Chart,
    forward: Vec<Expr>,
    inverse: Vec<Expr>,
}

impl ChartTransition {
    pub fn new(chart: Chart, forward: Vec<Expr>, inverse: Vec<Expr>) -> Result<ChartTransition> {
        for maps in [&forward, &inverse] {
            if maps.len() != chart.dim() {
                return Err(Error::DimensionMismatch { expected: chart.dim(), found: maps.len() });
            }
            for e in maps.iter() {
                chart.check_vars(e)?;
            }
        }
        Ok(ChartTransition { chart, forward, inverse })
    }

    pub fn identity(chart: Chart) -> ChartTransition {
        let id: Vec<Expr> = (0..chart.dim()).map(|a| chart.coord(a)).collect();
        ChartTransition { chart, forward: id.clone(), inverse: id }
    }

    /// `x̄ = A x + b` with an explicitly supplied inverse matrix.
    pub fn affine(chart: Chart, a: &[Num], b: &[Num], a_inv: &[Num]) -> Result<ChartTransition> {
        let n = chart.dim();
        let fwd = (0..n)
            .map(|r| Expr::sum((0..n).map(|c| chart.coord(c).scale(a[r * n + c]))) + Expr::constant(b[r]))
            .collect();
        let inv = (0..n)
            .map(|r| Expr::sum((0..n).map(|c| (chart.coord(c) - Expr::constant(b[c])).scale(a_inv[r * n + c]))))
            .collect();
        ChartTransition::new(chart, fwd, inv)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn inverse(&self) -> &[Expr] {
        &self.inverse
    }

    /// `∂x̄^a/∂x^i`, row-major, in old coordinates.
    pub fn jacobian(&self) -> Vec<Expr> {
        let n = self.chart.dim();
        (0..n * n).map(|k| self.chart.partial(&self.forward[k / n], k % n)).collect()
    }

    /// `∂x^i/∂x̄^a`, row-major (`[i][a]`), in new coordinates.
    pub fn inverse_jacobian(&self) -> Vec<Expr> {
        let n = self.chart.dim();
        (0..n * n).map(|k| self.chart.partial(&self.inverse[k / n], k % n)).collect()
    }

    /// `det ∂x̄/∂x` in old coordinates.
    pub fn jacobian_det(&self) -> Expr {
        determinant(&self.jacobian(), self.chart.dim())
    }

    /// Re-express an old-coordinate quantity in the new coordinates.
    pub fn pull(&self, e: &Expr) -> Expr {
        let mut map = vec![None; self.chart.point_len()];
        for a in 0..self.chart.dim() {
            map[self.chart.var(a)] = Some(self.inverse[a].clone());
        }
        e.subs(&map)
    }

    /// Re-express a new-coordinate quantity in the old coordinates.
    pub fn push(&self, e: &Expr) -> Expr {
        let mut map = vec![None; self.chart.point_len()];
        for a in 0..self.chart.dim() {
            map[self.chart.var(a)] = Some(self.forward[a].clone());
        }
        e.subs(&map)
    }

    /// Check `g∘f = id`, `f∘g = id` and `det ∂f/∂x > 0` at the domain's
    /// sample points (used for both charts of the overlap).
    pub fn validate(&self, domain: &SampleDomain) -> Result<()> {
        let n = self.chart.dim();
        let round_trips: Vec<Expr> = (0..n)
            .map(|a| self.push(&self.inverse[a]))
            .chain((0..n).map(|a| self.pull(&self.forward[a])))
            .collect();
        let tape = Tape::compile(&round_trips);
        let det = Tape::compile(&[self.jacobian_det()]);
        for p in domain.points() {
            let v = tape.eval(&p)?;
            for (k, value) in v.iter().enumerate() {
                let want = p[self.chart.var(k % n)];
                let defect = (value - want).abs() / (1.0 + want.abs());
                if defect > domain.tolerance.max(1e-9) {
                    return Err(Error::InverseMismatch { defect, point: p });
                }
            }
            if det.eval(&p)?[0] <= 0.0 {
                return Err(Error::NonpositiveJacobian { point: p });
            }
        }
        Ok(())
    }
}
