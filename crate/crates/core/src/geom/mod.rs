//! Charts, transformation laws, projective classes and the projective
//! Laplacian on functions.

mod chart;
mod tensor;

pub use chart::{delta, determinant, Chart, ChartTransition};
pub use tensor::{Connection, Density, ProjectiveClass, TensorDensity2};

pub(crate) use chart::power_of_positive;

use crate::error::{Error, Result};
use crate::expr::{Expr, Num};

fn require_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(())
}

fn require_same_chart(a: Chart, b: Chart) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `Π^k_ij = Γ^k_ij − (δ^k_i Γ^s_sj + δ^k_j Γ^s_is)/(n+1)`.
pub fn projective_class(c: &Connection) -> Result<ProjectiveClass> {
    let n = c.dim();
    require_dim(n)?;
    let first: Vec<Expr> = (0..n).map(|j| Expr::sum((0..n).map(|s| c.get(s, s, j).clone()))).collect();
    let second: Vec<Expr> = (0..n).map(|i| Expr::sum((0..n).map(|s| c.get(s, i, s).clone()))).collect();
    let k_n = Num::ratio(1, n as i64 + 1);
    Ok(ProjectiveClass::from_fn_unchecked(c.chart(), |k, i, j| {
        let mut trace = Expr::zero();
        if k == i {
            trace = trace + &first[j];
        }
        if k == j {
            trace = trace + &second[i];
        }
        c.get(k, i, j) - trace.scale(k_n)
    }))
}

/// Connection coefficients in the new chart:
/// `Γ̄^c_ab = ∂_k x̄^c (∂_a x^i ∂_b x^j Γ^k_ij + ∂_a∂_b x^k)`.
pub fn transform_connection(c: &Connection, t: &ChartTransition) -> Result<Connection> {
    require_same_chart(t.chart(), c.chart())?;
    let chart = c.chart();
    let n = chart.dim();
    let jac: Vec<Expr> = t.jacobian().iter().map(|e| t.pull(e)).collect();
    let inv = t.inverse_jacobian();
    let gamma: Vec<Expr> = c.components().iter().map(|e| t.pull(e)).collect();
    let g = |k: usize, i: usize, j: usize| &gamma[(k * n + i) * n + j];
    let mut inner = vec![Expr::zero(); n * n * n];
    for k in 0..n {
        let dg: Vec<Expr> = (0..n).map(|a| chart.partial(&t.inverse()[k], a)).collect();
        for a in 0..n {
            for b in a..n {
                let homogeneous = Expr::sum(
                    (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .filter(|&(i, j)| !g(k, i, j).is_zero())
                        .map(|(i, j)| &inv[i * n + a] * &inv[j * n + b] * g(k, i, j)),
                );
                inner[(k * n + a) * n + b] = homogeneous + chart.partial(&dg[a], b);
            }
        }
    }
    Ok(Connection::from_fn(chart, |cc, a, b| {
        Expr::sum((0..n).map(|k| &jac[cc * n + k] * &inner[(k * n + a) * n + b]))
    }))
}

/// `S̄^ab = J^{−λ} ∂_i x̄^a ∂_j x̄^b S^ij` in the new chart.
pub fn transform_tensor_density(s: &TensorDensity2, t: &ChartTransition) -> Result<TensorDensity2> {
    require_same_chart(t.chart(), s.chart())?;
    let n = s.dim();
    let jac = t.jacobian();
    let factor = power_of_positive(&t.jacobian_det(), -s.weight());
    Ok(TensorDensity2::from_fn(s.chart(), s.weight(), |a, b| {
        let e = Expr::sum(
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| &jac[a * n + i] * &jac[b * n + j] * s.get(i, j)),
        );
        t.pull(&(&factor * e))
    }))
}

/// `φ̄ = J^{−μ} φ` in the new chart.
pub fn transform_density(d: &Density, t: &ChartTransition) -> Density {
    let factor = power_of_positive(&t.jacobian_det(), -d.weight);
    Density::new(t.pull(&(factor * &d.coefficient)), d.weight)
}

/// A second-order operator `S^ij ∂_i∂_j + A^i ∂_i` on functions.
#[derive(Clone, Debug)]
pub struct ProjectiveLaplacian {
    pub second: TensorDensity2,
    pub first: Vec<Expr>,
}

impl ProjectiveLaplacian {
    pub fn apply(&self, f: &Expr) -> Expr {
        let c = self.second.chart();
        let n = c.dim();
        let grad: Vec<Expr> = (0..n).map(|i| c.partial(f, i)).collect();
        let second = Expr::sum(
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !self.second.get(i, j).is_zero())
                .map(|(i, j)| self.second.get(i, j) * c.partial(&grad[i], j)),
        );
        second + Expr::sum((0..n).map(|i| &self.first[i] * &grad[i]))
    }
}

fn check_laplacian_inputs(s: &TensorDensity2, p: &ProjectiveClass) -> Result<()> {
    require_same_chart(p.chart(), s.chart())?;
    require_dim(s.dim())?;
    if !s.weight().is_zero() {
        return Err(Error::NonzeroWeight(s.weight()));
    }
    Ok(())
}

/// `S^ij∂_i∂_j + ((2/(n+3))∂_jS^ij − ((n+1)/(n+3))S^jkΠ^i_jk)∂_i`.
pub fn projective_laplacian(s: &TensorDensity2, p: &ProjectiveClass) -> Result<ProjectiveLaplacian> {
    check_laplacian_inputs(s, p)?;
    let n = s.dim() as i64;
    let div = s.divergence();
    let contraction = s.contract(&p.0);
    let first = div
        .iter()
        .zip(&contraction)
        .map(|(d, sp)| d.scale(Num::ratio(2, n + 3)) - sp.scale(Num::ratio(n + 1, n + 3)))
        .collect();
    Ok(ProjectiveLaplacian { second: s.clone(), first })
}

/// `Γ^i = ((n+1)/(n+3))(∂_jS^ij + S^jkΠ^i_jk)`.
pub fn upper_connection(s: &TensorDensity2, p: &ProjectiveClass) -> Result<Vec<Expr>> {
    check_laplacian_inputs(s, p)?;
    let n = s.dim() as i64;
    Ok(s.divergence()
        .iter()
        .zip(s.contract(&p.0))
        .map(|(d, sp)| (d + sp).scale(Num::ratio(n + 1, n + 3)))
        .collect())
}
