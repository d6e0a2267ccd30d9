use crate::error::{Error, Result};
use crate::expr::{compare, Expr, Num, SampleDomain};

use super::chart::Chart;

/// Connection-like coefficients `C^k_ij`, stored `[k][i][j]`.
#[derive(Clone, Debug)]
pub(crate) struct Coefficients {
    chart: Chart,
    data: Vec<Expr>,
}

impl Coefficients {
    fn from_fn(chart: Chart, mut f: impl FnMut(usize, usize, usize) -> Expr) -> Coefficients {
        let n = chart.dim();
        let mut data = vec![Expr::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let e = f(k, i, j);
                    data[(k * n + i) * n + j] = e.clone();
                    data[(k * n + j) * n + i] = e;
                }
            }
        }
        Coefficients { chart, data }
    }

    fn new(chart: Chart, data: Vec<Expr>, what: &'static str) -> Result<Coefficients> {
        let n = chart.dim();
        if data.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, found: data.len() });
        }
        for e in &data {
            chart.check_vars(e)?;
        }
        for k in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    if data[(k * n + i) * n + j] != data[(k * n + j) * n + i] {
                        return Err(Error::NotSymmetric { what, i: i + 1, j: j + 1 });
                    }
                }
            }
        }
        Ok(Coefficients { chart, data })
    }

    fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        let n = self.chart.dim();
        &self.data[(k * n + i) * n + j]
    }
}

/// A torsion-free linear connection `Γ^k_ij`.
#[derive(Clone, Debug)]
pub struct Connection(pub(crate) Coefficients);

impl Connection {
    /// Components are `[k][i][j]`-ordered; lower-index symmetry is
    /// required structurally.
    pub fn new(chart: Chart, data: Vec<Expr>) -> Result<Connection> {
        Ok(Connection(Coefficients::new(chart, data, "connection")?))
    }

    /// Builds from `f(k, i, j)` evaluated for `i <= j` and mirrored.
    pub fn from_fn(chart: Chart, f: impl FnMut(usize, usize, usize) -> Expr) -> Connection {
        Connection(Coefficients::from_fn(chart, f))
    }

    pub fn flat(chart: Chart) -> Connection {
        Connection::from_fn(chart, |_, _, _| Expr::zero())
    }

    pub fn chart(&self) -> Chart {
        self.0.chart
    }

    pub fn dim(&self) -> usize {
        self.0.chart.dim()
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        self.0.get(k, i, j)
    }

    pub fn components(&self) -> &[Expr] {
        &self.0.data
    }

    /// Adds `δ^k_i ω_j + δ^k_j ω_i`, which leaves the projective class
    /// unchanged.
    pub fn shifted(&self, omega: &[Expr]) -> Connection {
        Connection::from_fn(self.chart(), |k, i, j| {
            let mut e = self.get(k, i, j).clone();
            if k == i {
                e = e + &omega[j];
            }
            if k == j {
                e = e + &omega[i];
            }
            e
        })
    }
}

/// Coefficients `Π^k_ij` of a projective class: symmetric and trace-free.
#[derive(Clone, Debug)]
pub struct ProjectiveClass(pub(crate) Coefficients);

impl ProjectiveClass {
    /// Validates symmetry structurally and both traces on `domain`.
    pub fn new(chart: Chart, data: Vec<Expr>, domain: &SampleDomain) -> Result<ProjectiveClass> {
        let p = ProjectiveClass(Coefficients::new(chart, data, "projective class")?);
        let defect = p.trace_defect(domain)?;
        if defect > domain.tolerance {
            return Err(Error::TraceNonzero { defect });
        }
        Ok(p)
    }

    pub(crate) fn from_fn_unchecked(chart: Chart, f: impl FnMut(usize, usize, usize) -> Expr) -> ProjectiveClass {
        ProjectiveClass(Coefficients::from_fn(chart, f))
    }

    pub fn flat(chart: Chart) -> ProjectiveClass {
        ProjectiveClass::from_fn_unchecked(chart, |_, _, _| Expr::zero())
    }

    pub fn chart(&self) -> Chart {
        self.0.chart
    }

    pub fn dim(&self) -> usize {
        self.0.chart.dim()
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        self.0.get(k, i, j)
    }

    pub fn components(&self) -> &[Expr] {
        &self.0.data
    }

    /// `Σ_s Π^s_sj` for each `j` (equal to the other trace by symmetry).
    pub fn traces(&self) -> Vec<Expr> {
        let n = self.dim();
        (0..n).map(|j| Expr::sum((0..n).map(|s| self.get(s, s, j).clone()))).collect()
    }

    /// Worst sampled `|Σ_s Π^s_sj|` and `|Σ_s Π^s_is|` relative defect.
    pub fn trace_defect(&self, domain: &SampleDomain) -> Result<f64> {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let first = Expr::sum((0..n).map(|s| self.get(s, s, j).clone()));
            let second = Expr::sum((0..n).map(|s| self.get(s, j, s).clone()));
            for t in [first, second] {
                worst = worst.max(compare(&t, &Expr::zero(), domain)?.worst_defect);
            }
        }
        Ok(worst)
    }

    /// The class viewed as one of its own representatives.
    pub fn as_connection(&self) -> Connection {
        Connection(self.0.clone())
    }

    /// `∂_sΠ^s_ij − Π^p_qi Π^q_pj`, row-major `[i][j]`: the Ricci tensor of
    /// the trace-free representative.
    pub fn ricci(&self) -> Vec<Expr> {
        let n = self.dim();
        let c = self.chart();
        let mut out = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let div = Expr::sum((0..n).map(|s| c.partial(self.get(s, i, j), s)));
                let quad = Expr::sum(
                    (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| self.get(p, q, i) * self.get(q, p, j)),
                );
                let e = div - quad;
                out[i * n + j] = e.clone();
                out[j * n + i] = e;
            }
        }
        out
    }
}

/// A symmetric contravariant 2-tensor density `S^ij |Dx|^λ`.
#[derive(Clone, Debug)]
pub struct TensorDensity2 {
    chart: Chart,
    data: Vec<Expr>,
    weight: Num,
}

impl TensorDensity2 {
    /// Accepts a row-major matrix. Off-diagonal pairs must agree either
    /// structurally or on the chart's default sample domain.
    pub fn new(chart: Chart, data: Vec<Expr>, weight: Num) -> Result<TensorDensity2> {
        let n = chart.dim();
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        for e in &data {
            chart.check_vars(e)?;
        }
        let domain = chart.default_domain();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&data[i * n + j], &data[j * n + i]);
                if a != b && !compare(a, b, &domain)?.passed() {
                    return Err(Error::NotSymmetric { what: "tensor density", i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(TensorDensity2::from_fn(chart, weight, |i, j| data[i * n + j].clone()))
    }

    /// Builds from `f(i, j)` for `i <= j`, mirrored.
    pub fn from_fn(chart: Chart, weight: Num, mut f: impl FnMut(usize, usize) -> Expr) -> TensorDensity2 {
        let n = chart.dim();
        let mut data = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let e = f(i, j);
                data[i * n + j] = e.clone();
                data[j * n + i] = e;
            }
        }
        TensorDensity2 { chart, data, weight }
    }

    /// `δ^ij` with the given weight.
    pub fn identity(chart: Chart, weight: Num) -> TensorDensity2 {
        TensorDensity2::from_fn(chart, weight, super::chart::delta)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn weight(&self) -> Num {
        self.weight
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.dim() + j]
    }

    pub fn components(&self) -> &[Expr] {
        &self.data
    }

    pub fn with_weight(&self, weight: Num) -> TensorDensity2 {
        TensorDensity2 { weight, ..self.clone() }
    }

    /// `∂_j S^ij`.
    pub fn divergence(&self) -> Vec<Expr> {
        let n = self.dim();
        (0..n)
            .map(|i| Expr::sum((0..n).map(|j| self.chart.partial(self.get(i, j), j))))
            .collect()
    }

    /// `S^jk C^i_jk` for connection-like coefficients.
    pub(crate) fn contract(&self, c: &Coefficients) -> Vec<Expr> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                Expr::sum((0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| self.get(j, k) * c.get(i, j, k)))
            })
            .collect()
    }
}

/// A density `φ(x)|Dx|^μ` on the base manifold.
#[derive(Clone, Debug)]
pub struct Density {
    pub coefficient: Expr,
    pub weight: Num,
}

impl Density {
    pub fn new(coefficient: Expr, weight: Num) -> Density {
        Density { coefficient, weight }
    }

    /// A weight-0 density, i.e. a function.
    pub fn function(f: Expr) -> Density {
        Density::new(f, Num::ZERO)
    }

    /// The coordinate volume element `|Dx|`.
    pub fn volume() -> Density {
        Density::new(Expr::one(), Num::ONE)
    }

    pub fn zero(weight: Num) -> Density {
        Density::new(Expr::zero(), weight)
    }

    pub fn mul(&self, other: &Density) -> Density {
        Density::new(&self.coefficient * &other.coefficient, self.weight + other.weight)
    }

    pub fn scale(&self, c: &Expr) -> Density {
        Density::new(c * &self.coefficient, self.weight)
    }

    pub fn add(&self, other: &Density) -> Density {
        debug_assert!(self.weight.approx_eq(other.weight, 1e-12));
        Density::new(&self.coefficient + &other.coefficient, self.weight)
    }

    pub fn sub(&self, other: &Density) -> Density {
        debug_assert!(self.weight.approx_eq(other.weight, 1e-12));
        Density::new(&self.coefficient - &other.coefficient, self.weight)
    }
}
