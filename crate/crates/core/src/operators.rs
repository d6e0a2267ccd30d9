//! Brackets on densities and the second order operators generating them.
//!
//! Every operator is kept in the normal form `(S, γ, θ, a, b, c)`: on
//! `φ|Dx|^μ` it returns
//! `(S^ij∂_i∂_jφ + 2μγ^i∂_iφ + μ²θφ + a^i∂_iφ + μbφ + cφ)|Dx|^{μ+λ}`,
//! which is the operator on the Thomas bundle with `∂0` replaced by `μ`.

use std::fmt;

use log::warn;

use crate::error::{Error, Result};
use crate::expr::{compare, Comparison, Expr, Num, SampleDomain, Tape};
use crate::geom::{projective_laplacian, Chart, Density, ProjectiveClass, TensorDensity2};
use crate::thomas::induced_projective_class;

/// Relative distance under which a real weight counts as resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-12;
/// Distance under which a weight is reported as nearly resonant.
pub const NEAR_RESONANCE: f64 = 1e-6;

/// The two excluded weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resonance {
    /// `λ = (n+3)/(n+1)`: the prefactor of `γ` is singular.
    Gamma,
    /// `λ = (n+2)/(n+1)`: the prefactor of `θ` is singular.
    Theta,
}

impl Resonance {
    pub fn value(self, n: usize) -> Num {
        let n = n as i64;
        match self {
            Resonance::Gamma => Num::ratio(n + 3, n + 1),
            Resonance::Theta => Num::ratio(n + 2, n + 1),
        }
    }
}

impl fmt::Display for Resonance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resonance::Gamma => write!(f, "lambda = (n+3)/(n+1), the gamma denominator vanishes"),
            Resonance::Theta => write!(f, "lambda = (n+2)/(n+1), the theta denominator vanishes"),
        }
    }
}

/// The resonance hit by `lambda`, if any. Exact for rational weights.
/// `γ` is checked first since `θ` is built from it.
pub fn resonance(n: usize, lambda: Num) -> Option<Resonance> {
    [Resonance::Gamma, Resonance::Theta].into_iter().find(|r| {
        let v = r.value(n);
        if lambda.is_exact() {
            lambda == v
        } else {
            (lambda.to_f64() - v.to_f64()).abs() <= RESONANCE_TOLERANCE
        }
    })
}

/// For a non-resonant weight within [`NEAR_RESONANCE`] of a resonant
/// value, the message that is also logged when operators are built.
pub fn resonance_warning(n: usize, lambda: Num) -> Option<String> {
    if resonance(n, lambda).is_some() {
        return None;
    }
    [Resonance::Gamma, Resonance::Theta].into_iter().find_map(|r| {
        let d = (lambda.to_f64() - r.value(n).to_f64()).abs();
        (d <= NEAR_RESONANCE).then(|| {
            format!("near-resonant weight {lambda}: distance {d:.3e} to resonance {} ({r})", r.value(n))
        })
    })
}

fn check_weight(n: usize, lambda: Num, shifted: bool) -> Result<()> {
    if let Some(r) = resonance(n, lambda) {
        return Err(if shifted {
            Error::ShiftedResonance { effective: lambda, resonance: r }
        } else {
            Error::ResonantWeight { weight: lambda, resonance: r }
        });
    }
    if let Some(msg) = resonance_warning(n, lambda) {
        warn!("{msg}");
    }
    Ok(())
}

fn require_compatible(s: &TensorDensity2, p: &ProjectiveClass) -> Result<usize> {
    if s.chart() != p.chart() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: p.dim() });
    }
    if s.chart().is_thomas() {
        return Err(Error::DimensionMismatch { expected: s.chart().base_dim(), found: s.dim() });
    }
    if s.dim() < 2 {
        return Err(Error::DimensionTooSmall(s.dim()));
    }
    Ok(s.dim())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A symmetric bracket of weight `λ` on densities, determined by
/// `{x^i, x^j} = S^ij`, `{x^i, |Dx|} = γ^i|Dx|` and `{|Dx|, |Dx|} = θ|Dx|²`.
#[derive(Clone, Debug)]
pub struct DensityBracket {
    pub s: TensorDensity2,
    pub gamma: Vec<Expr>,
    pub theta: Expr,
}

impl DensityBracket {
    pub fn new(s: TensorDensity2, gamma: Vec<Expr>, theta: Expr) -> Result<DensityBracket> {
        check_len(s.dim(), gamma.len())?;
        for e in gamma.iter().chain([&theta]) {
            s.chart().check_vars(e)?;
        }
        Ok(DensityBracket { s, gamma, theta })
    }

    pub fn zero(chart: Chart, weight: Num) -> DensityBracket {
        DensityBracket {
            s: TensorDensity2::from_fn(chart, weight, |_, _| Expr::zero()),
            gamma: vec![Expr::zero(); chart.dim()],
            theta: Expr::zero(),
        }
    }

    pub fn chart(&self) -> Chart {
        self.s.chart()
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn weight(&self) -> Num {
        self.s.weight()
    }

    /// The bracket extended as a biderivation:
    /// `{φ|Dx|^μ, ψ|Dx|^ν} = (S^ij∂_iφ∂_jψ + μγ^iφ∂_iψ + νγ^iψ∂_iφ + μνθφψ)|Dx|^{μ+ν+λ}`.
    pub fn apply(&self, a: &Density, b: &Density) -> Density {
        let c = self.chart();
        let n = self.dim();
        let (phi, psi) = (&a.coefficient, &b.coefficient);
        let dphi: Vec<Expr> = (0..n).map(|i| c.partial(phi, i)).collect();
        let dpsi: Vec<Expr> = (0..n).map(|i| c.partial(psi, i)).collect();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                terms.push(self.s.get(i, j) * &dphi[i] * &dpsi[j]);
            }
            if !a.weight.is_zero() {
                terms.push((&self.gamma[i] * phi * &dpsi[i]).scale(a.weight));
            }
            if !b.weight.is_zero() {
                terms.push((&self.gamma[i] * psi * &dphi[i]).scale(b.weight));
            }
        }
        terms.push((&self.theta * phi * psi).scale(a.weight * b.weight));
        Density::new(Expr::sum(terms), a.weight + b.weight + self.weight())
    }
}

/// A second order operator on densities in normal form.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    pub s: TensorDensity2,
    pub gamma: Vec<Expr>,
    pub theta: Expr,
    pub a: Vec<Expr>,
    pub b: Expr,
    pub c: Expr,
}

impl DensityOperator {
    pub fn zero(chart: Chart, weight: Num) -> DensityOperator {
        let n = chart.dim();
        DensityOperator {
            s: TensorDensity2::from_fn(chart, weight, |_, _| Expr::zero()),
            gamma: vec![Expr::zero(); n],
            theta: Expr::zero(),
            a: vec![Expr::zero(); n],
            b: Expr::zero(),
            c: Expr::zero(),
        }
    }

    pub fn chart(&self) -> Chart {
        self.s.chart()
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn weight(&self) -> Num {
        self.s.weight()
    }

    /// `Δ(1) = 0`, decided structurally.
    pub fn is_constant_free(&self) -> bool {
        self.c.is_zero()
    }

    /// The symbol part `(S, γ, θ)`.
    pub fn bracket(&self) -> DensityBracket {
        DensityBracket { s: self.s.clone(), gamma: self.gamma.clone(), theta: self.theta.clone() }
    }

    /// The coefficient of the image of `φ|Dx|^μ`, for fixed `μ`.
    pub fn apply_coefficient(&self, phi: &Expr, mu: Num) -> Expr {
        let c = self.chart();
        let n = self.dim();
        let grad: Vec<Expr> = (0..n).map(|i| c.partial(phi, i)).collect();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !self.s.get(i, j).is_zero() {
                    terms.push(self.s.get(i, j) * c.partial(&grad[i], j));
                }
            }
            let first = self.gamma[i].scale(mu * Num::int(2)) + &self.a[i];
            terms.push(first * &grad[i]);
        }
        let zeroth = self.theta.scale(mu * mu) + self.b.scale(mu) + &self.c;
        terms.push(zeroth * phi);
        Expr::sum(terms)
    }

    pub fn apply(&self, d: &Density) -> Result<Density> {
        self.chart().check_vars(&d.coefficient)?;
        Ok(Density::new(self.apply_coefficient(&d.coefficient, d.weight), d.weight + self.weight()))
    }

    /// The same operator with `a^i` replaced by `a^i + shift^i`.
    pub fn with_first_order_shift(&self, shift: &[Expr]) -> DensityOperator {
        let mut out = self.clone();
        for (a, s) in out.a.iter_mut().zip(shift) {
            *a = &*a + s;
        }
        out
    }

    /// Named components in a fixed order, 1-based indices.
    pub fn components(&self) -> Vec<(String, Expr)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                out.push((format!("S^{}{}", i + 1, j + 1), self.s.get(i, j).clone()));
            }
        }
        for i in 0..n {
            out.push((format!("gamma^{}", i + 1), self.gamma[i].clone()));
        }
        out.push(("theta".into(), self.theta.clone()));
        for i in 0..n {
            out.push((format!("a^{}", i + 1), self.a[i].clone()));
        }
        out.push(("b".into(), self.b.clone()));
        out.push(("c".into(), self.c.clone()));
        out
    }

    /// Componentwise comparison. Operators of different weight or chart
    /// compare with infinite defect.
    pub fn compare(&self, other: &DensityOperator, domain: &SampleDomain) -> Result<Comparison> {
        if self.chart() != other.chart() || !self.weight().approx_eq(other.weight(), RESONANCE_TOLERANCE) {
            return Ok(Comparison { worst_defect: f64::INFINITY, worst_point: Vec::new(), tolerance: domain.tolerance });
        }
        let mut worst = Comparison { worst_defect: 0.0, worst_point: Vec::new(), tolerance: domain.tolerance };
        for ((_, x), (_, y)) in self.components().iter().zip(other.components()) {
            let c = compare(x, &y, domain)?;
            if worst.worst_point.is_empty() || c.worst_defect > worst.worst_defect {
                worst = c;
            }
        }
        Ok(worst)
    }
}

/// `Δ(ab) − aΔ(b) − Δ(a)b + abΔ(1)`, which is twice the generated bracket.
pub fn deviation(op: &DensityOperator, a: &Density, b: &Density) -> Result<Density> {
    let ab = op.apply(&a.mul(b))?;
    let a_db = a.mul(&op.apply(b)?);
    let da_b = op.apply(a)?.mul(b);
    let ab_d1 = a.mul(b).mul(&op.apply(&Density::function(Expr::one()))?);
    Ok(ab.sub(&a_db).sub(&da_b).add(&ab_d1))
}

/// The bracket generated by `op`, normalised so that `S^ij∂_i∂_j`
/// generates `{f, g} = S^ij∂_if∂_jg`.
pub fn generated_bracket(op: &DensityOperator, a: &Density, b: &Density) -> Result<Density> {
    Ok(deviation(op, a, b)?.scale(&Expr::ratio(1, 2)))
}

/// The unique constant free operator generating `bracket` that is self
/// adjoint for the canonical pairing of densities.
pub fn canonical_operator(bracket: &DensityBracket) -> DensityOperator {
    let c = bracket.chart();
    let n = bracket.dim();
    let shift = bracket.weight() - Num::ONE;
    let a = bracket.s.divergence().into_iter().zip(&bracket.gamma).map(|(d, g)| d + g.scale(shift)).collect();
    let div_gamma = Expr::sum((0..n).map(|i| c.partial(&bracket.gamma[i], i)));
    DensityOperator {
        s: bracket.s.clone(),
        gamma: bracket.gamma.clone(),
        theta: bracket.theta.clone(),
        a,
        b: div_gamma + bracket.theta.scale(shift),
        c: Expr::zero(),
    }
}

/// `((n+1)/(n−1)) S^ij Q_ij` with `Q` the Ricci tensor of the class.
fn curvature_term(s: &TensorDensity2, p: &ProjectiveClass) -> Expr {
    let n = s.dim();
    let q = p.ricci();
    let sum = Expr::sum((0..n * n).filter(|&k| !s.components()[k].is_zero()).map(|k| &s.components()[k] * &q[k]));
    sum.scale(Num::ratio(n as i64 + 1, n as i64 - 1))
}

fn prefactors(n: usize, lambda: Num) -> (Num, Num) {
    let n1 = Num::int(n as i64 + 1);
    let gamma = n1 / (Num::int(n as i64 + 3) - lambda * n1);
    let theta = n1 / (Num::int(n as i64 + 2) - lambda * n1);
    (gamma, theta)
}

/// `γ^i` and `θ` making the operator on the Thomas bundle self adjoint.
pub fn gamma_theta(s: &TensorDensity2, p: &ProjectiveClass) -> Result<(Vec<Expr>, Expr)> {
    let n = require_compatible(s, p)?;
    let lambda = s.weight();
    check_weight(n, lambda, false)?;
    let (kg, kt) = prefactors(n, lambda);
    let gamma: Vec<Expr> =
        s.divergence().into_iter().zip(s.contract(&p.0)).map(|(d, sp)| (d + sp).scale(kg)).collect();
    let c = s.chart();
    let div_gamma = Expr::sum((0..n).map(|i| c.partial(&gamma[i], i)));
    let theta = (div_gamma + curvature_term(s, p)).scale(kt);
    Ok((gamma, theta))
}

/// The canonical operator extending `S` and compatible with `p`.
pub fn main_operator(s: &TensorDensity2, p: &ProjectiveClass) -> Result<DensityOperator> {
    let (gamma, theta) = gamma_theta(s, p)?;
    Ok(canonical_operator(&DensityBracket { s: s.clone(), gamma, theta }))
}

/// The canonical weight-0 bracket extending `s` to all densities.
pub fn extend_bracket(s: &TensorDensity2, p: &ProjectiveClass) -> Result<DensityBracket> {
    require_compatible(s, p)?;
    if !s.weight().is_zero() {
        return Err(Error::NonzeroWeight(s.weight()));
    }
    let (gamma, theta) = gamma_theta(s, p)?;
    Ok(DensityBracket { s: s.clone(), gamma, theta })
}

/// The constants `2(λ+nλ+1)/((n+1)(n+4))` and `(2λ+2λn−n)/((n+1)(n+4))`.
fn lemma_constants(n: usize, lambda: Num) -> (Num, Num) {
    let n = n as i64;
    let den = Num::int((n + 1) * (n + 4));
    let l = lambda * Num::int(n + 1);
    let c1 = (l + Num::ONE) * Num::int(2) / den;
    let c2 = (l * Num::int(2) - Num::int(n)) / den;
    (c1, c2)
}

/// The explicit operator generating `bracket` obtained from the Thomas
/// bundle, written out in base coordinates.
pub fn lemma_operator(bracket: &DensityBracket, p: &ProjectiveClass) -> Result<DensityOperator> {
    let n = require_compatible(&bracket.s, p)?;
    let ni = n as i64;
    let (c1, c2) = lemma_constants(n, bracket.weight());
    let s = &bracket.s;
    let c = s.chart();
    let a = s
        .divergence()
        .into_iter()
        .zip(s.contract(&p.0))
        .zip(&bracket.gamma)
        .map(|((d, sp), g)| d.scale(Num::ratio(2, ni + 4)) + g.scale(c1) - sp.scale(Num::ratio(ni + 2, ni + 4)))
        .collect();
    let div_gamma = Expr::sum((0..n).map(|i| c.partial(&bracket.gamma[i], i)));
    let curvature = curvature_term(s, p).scale(Num::ratio(ni + 2, ni + 4));
    let b = div_gamma.scale(Num::ratio(2, ni + 4)) + bracket.theta.scale(c2) - curvature;
    Ok(DensityOperator {
        s: s.clone(),
        gamma: bracket.gamma.clone(),
        theta: bracket.theta.clone(),
        a,
        b,
        c: Expr::zero(),
    })
}

/// Builds the weight-0 tensor `e^{λx0}(S, γ, θ)` on the Thomas bundle,
/// applies the projective Laplacian there with the induced class, and
/// reads the components back at `x0 = 0`.
pub fn tilde_operator_via_lift(bracket: &DensityBracket, p: &ProjectiveClass) -> Result<DensityOperator> {
    let n = require_compatible(&bracket.s, p)?;
    let lambda = bracket.weight();
    let grading = (Expr::constant(lambda) * Expr::var(0)).exp();
    let lifted = TensorDensity2::from_fn(Chart::thomas(n), Num::ZERO, |a, b| {
        let e = match (a, b) {
            (0, 0) => bracket.theta.clone(),
            (0, j) => bracket.gamma[j - 1].clone(),
            (i, j) => bracket.s.get(i - 1, j - 1).clone(),
        };
        &grading * e
    });
    let lap = projective_laplacian(&lifted, &induced_projective_class(p)?)?;
    let at_section = |e: &Expr| e.subs_var(0, &Expr::zero());
    Ok(DensityOperator {
        s: TensorDensity2::from_fn(bracket.chart(), lambda, |i, j| at_section(lifted.get(i + 1, j + 1))),
        gamma: (1..=n).map(|i| at_section(lifted.get(0, i))).collect(),
        theta: at_section(lifted.get(0, 0)),
        a: (1..=n).map(|i| at_section(&lap.first[i])).collect(),
        b: at_section(&lap.first[0]),
        c: Expr::zero(),
    })
}

/// The member of the pencil acting on densities of one fixed weight.
#[derive(Clone, Debug)]
pub struct PencilMember {
    pub mu: Num,
    pub s: TensorDensity2,
    pub first: Vec<Expr>,
    pub zeroth: Expr,
}

impl PencilMember {
    pub fn apply(&self, phi: &Expr) -> Expr {
        let c = self.s.chart();
        let n = self.s.dim();
        let grad: Vec<Expr> = (0..n).map(|i| c.partial(phi, i)).collect();
        let second = Expr::sum(
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !self.s.get(i, j).is_zero())
                .map(|(i, j)| self.s.get(i, j) * c.partial(&grad[i], j)),
        );
        second + Expr::sum((0..n).map(|i| &self.first[i] * &grad[i])) + &self.zeroth * phi
    }
}

/// The operator on densities of weight `mu`, written with `∂0` already
/// replaced by `mu`.
pub fn pencil_member(bracket: &DensityBracket, p: &ProjectiveClass, mu: Num) -> Result<PencilMember> {
    let n = require_compatible(&bracket.s, p)?;
    let ni = n as i64;
    let (c1, c2) = lemma_constants(n, bracket.weight());
    let s = &bracket.s;
    let c = s.chart();
    let first = s
        .divergence()
        .into_iter()
        .zip(s.contract(&p.0))
        .zip(&bracket.gamma)
        .map(|((d, sp), g)| {
            d.scale(Num::ratio(2, ni + 4)) + g.scale(c1 + mu * Num::int(2)) - sp.scale(Num::ratio(ni + 2, ni + 4))
        })
        .collect();
    let div_gamma = Expr::sum((0..n).map(|i| c.partial(&bracket.gamma[i], i)));
    let q = p.ricci();
    let sq = Expr::sum((0..n * n).map(|k| &s.components()[k] * &q[k]));
    let zeroth = div_gamma.scale(mu * Num::ratio(2, ni + 4)) + bracket.theta.scale(mu * (c2 + mu))
        - sq.scale(mu * Num::ratio((ni + 1) * (ni + 2), (ni - 1) * (ni + 4)));
    Ok(PencilMember { mu, s: s.clone(), first, zeroth })
}

/// Checks `ρ > 0` at every sample point of `domain`.
fn require_positive(rho: &Expr, domain: &SampleDomain) -> Result<()> {
    let tape = Tape::compile(std::slice::from_ref(rho));
    for pt in domain.points() {
        let v = tape.eval(&pt)?[0];
        if v.is_nan() || v <= 0.0 {
            return Err(Error::NonpositiveDensity { point: pt });
        }
    }
    Ok(())
}

/// `γ^i` and `θ` for the pairing `∫φψρ` with `ρ|Dx|^σ`.
pub fn rho_sigma_gamma_theta(
    s: &TensorDensity2,
    p: &ProjectiveClass,
    rho: &Density,
    domain: &SampleDomain,
) -> Result<(Vec<Expr>, Expr)> {
    let n = require_compatible(s, p)?;
    let ni = n as i64;
    s.chart().check_vars(&rho.coefficient)?;
    let boost = Num::ratio(ni + 4, ni + 2);
    let effective = s.weight() + boost * rho.weight;
    check_weight(n, effective, true)?;
    require_positive(&rho.coefficient, domain)?;
    let c = s.chart();
    let dlog: Vec<Expr> = (0..n).map(|j| c.partial(&rho.coefficient.log(), j)).collect();
    let (kg, kt) = prefactors(n, effective);
    let gamma: Vec<Expr> = s
        .divergence()
        .into_iter()
        .zip(s.contract(&p.0))
        .enumerate()
        .map(|(i, (d, sp))| {
            let drift = Expr::sum((0..n).map(|j| s.get(i, j) * &dlog[j]));
            (d + sp + drift.scale(boost)).scale(kg)
        })
        .collect();
    let div_gamma = Expr::sum((0..n).map(|i| c.partial(&gamma[i], i)));
    let drift = Expr::sum((0..n).map(|i| &gamma[i] * &dlog[i]));
    let theta = (div_gamma + curvature_term(s, p) + drift.scale(boost)).scale(kt);
    Ok((gamma, theta))
}

/// The operator self adjoint for `⟨φ,ψ⟩ = ∫φψρ`, built on the same
/// skeleton as [`lemma_operator`].
pub fn rho_sigma_operator(
    s: &TensorDensity2,
    p: &ProjectiveClass,
    rho: &Density,
    domain: &SampleDomain,
) -> Result<DensityOperator> {
    let (gamma, theta) = rho_sigma_gamma_theta(s, p, rho, domain)?;
    lemma_operator(&DensityBracket { s: s.clone(), gamma, theta }, p)
}

/// The weight-0 bracket coming from the flat connection `γ_i = −∂_i log ρ`
/// of a positive density; weights other than 1 are normalised first.
pub fn flat_density_bracket(s: &TensorDensity2, rho: &Density, domain: &SampleDomain) -> Result<DensityBracket> {
    if !s.weight().is_zero() {
        return Err(Error::NonzeroWeight(s.weight()));
    }
    if rho.weight.is_zero() {
        return Err(Error::Scenario("flat density bracket needs a density of nonzero weight".into()));
    }
    s.chart().check_vars(&rho.coefficient)?;
    require_positive(&rho.coefficient, domain)?;
    let c = s.chart();
    let n = s.dim();
    let log_rho = rho.coefficient.log().scale(Num::ONE / rho.weight);
    let lower: Vec<Expr> = (0..n).map(|i| -c.partial(&log_rho, i)).collect();
    let gamma: Vec<Expr> = (0..n).map(|i| Expr::sum((0..n).map(|j| s.get(i, j) * &lower[j]))).collect();
    let theta = Expr::sum((0..n).map(|i| &gamma[i] * &lower[i]));
    Ok(DensityBracket { s: s.clone(), gamma, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equal_prob, parse};
    use crate::geom::{projective_class, upper_connection, Connection};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn domain() -> SampleDomain {
        SampleDomain::new(3)
    }

    fn same(a: &Expr, b: &Expr) -> bool {
        equal_prob(a, b, &domain()).unwrap()
    }

    fn curved() -> (TensorDensity2, ProjectiveClass) {
        let chart = Chart::base(2);
        let gamma = Connection::from_fn(chart, |k, i, j| match (k, i, j) {
            (0, 0, 0) => p("x2"),
            (1, 0, 1) => p("x1*x2"),
            (1, 1, 1) => p("x1^2 + 1"),
            _ => Expr::zero(),
        });
        let s = TensorDensity2::from_fn(chart, Num::ratio(1, 2), |i, j| match (i, j) {
            (0, 0) => p("1 + x1^2"),
            (0, 1) => p("x1*x2"),
            _ => p("2 + x2"),
        });
        (s, projective_class(&gamma).unwrap())
    }

    #[test]
    fn resonances_in_dimension_two() {
        assert_eq!(resonance(2, Num::ratio(5, 3)), Some(Resonance::Gamma));
        assert_eq!(resonance(2, Num::ratio(4, 3)), Some(Resonance::Theta));
        assert_eq!(resonance(2, Num::real(4.0 / 3.0)), Some(Resonance::Theta));
        assert_eq!(resonance(2, Num::ONE), None);
        assert!(resonance_warning(2, Num::real(4.0 / 3.0 + 1e-7)).is_some());
        assert!(resonance_warning(2, Num::real(4.0 / 3.0 + 1e-5)).is_none());
    }

    #[test]
    fn resonant_weight_is_rejected() {
        let (s, pi) = curved();
        let err = main_operator(&s.with_weight(Num::ratio(5, 3)), &pi).unwrap_err();
        assert!(matches!(err, Error::ResonantWeight { resonance: Resonance::Gamma, .. }));
    }

    #[test]
    fn only_second_order_part_is_harmonic_on_x1x2() {
        let chart = Chart::base(2);
        let op = DensityOperator { s: TensorDensity2::identity(chart, Num::ZERO), ..DensityOperator::zero(chart, Num::ZERO) };
        let out = op.apply(&Density::function(p("x1*x2"))).unwrap();
        assert!(out.coefficient.is_zero());
    }

    #[test]
    fn theta_alone_on_volume() {
        let chart = Chart::base(2);
        let op = DensityOperator { theta: Expr::one(), ..DensityOperator::zero(chart, Num::ZERO) };
        let out = op.apply(&Density::volume()).unwrap();
        assert_eq!(out.coefficient.as_const(), Some(Num::ONE));
        assert_eq!(out.weight, Num::ONE);
    }

    #[test]
    fn zero_operator_generates_zero() {
        let op = DensityOperator::zero(Chart::base(2), Num::ratio(1, 2));
        let b = generated_bracket(&op, &Density::function(p("x1")), &Density::volume()).unwrap();
        assert!(same(&b.coefficient, &Expr::zero()));
    }

    #[test]
    fn second_order_part_generates_gradient_pairing() {
        let (s, _) = curved();
        let s = s.with_weight(Num::ZERO);
        let op = DensityOperator { s: s.clone(), ..DensityOperator::zero(Chart::base(2), Num::ZERO) };
        let (f, g) = (p("x1^2*x2"), p("exp(x2) + x1"));
        let got = generated_bracket(&op, &Density::function(f.clone()), &Density::function(g.clone())).unwrap();
        let c = s.chart();
        let want = Expr::sum((0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| s.get(i, j) * c.partial(&f, i) * c.partial(&g, j)));
        assert!(same(&got.coefficient, &want));
    }

    #[test]
    fn canonical_operator_generates_its_bracket_on_generators() {
        let (s, pi) = curved();
        let (gamma, theta) = gamma_theta(&s, &pi).unwrap();
        let bracket = DensityBracket::new(s, gamma, theta).unwrap();
        let op = canonical_operator(&bracket);
        let gens = [Density::function(p("x1")), Density::function(p("x2")), Density::volume()];
        for a in &gens {
            for b in &gens {
                let got = generated_bracket(&op, a, b).unwrap();
                let want = bracket.apply(a, b);
                assert!(same(&got.coefficient, &want.coefficient));
                assert_eq!(got.weight, want.weight);
            }
        }
        let vol = bracket.apply(&Density::function(p("x2")), &Density::volume());
        assert!(same(&vol.coefficient, &bracket.gamma[1]));
    }

    #[test]
    fn canonical_constant_s_has_no_first_order_part() {
        let chart = Chart::base(2);
        let op = canonical_operator(&DensityBracket::new(TensorDensity2::identity(chart, Num::ZERO), vec![Expr::zero(); 2], Expr::zero()).unwrap());
        assert!(op.a.iter().all(Expr::is_zero));
        assert!(op.b.is_zero());
    }

    #[test]
    fn canonical_at_weight_one_drops_gamma() {
        let (s, pi) = curved();
        let s = s.with_weight(Num::ONE);
        let (gamma, theta) = gamma_theta(&s, &pi).unwrap();
        let op = canonical_operator(&DensityBracket::new(s.clone(), gamma, theta).unwrap());
        for (a, d) in op.a.iter().zip(s.divergence()) {
            assert_eq!(a, &d);
        }
    }

    #[test]
    fn prefactors_at_weight_one() {
        let (g, t) = prefactors(2, Num::ONE);
        assert_eq!(g, Num::ratio(3, 2));
        assert_eq!(t, Num::int(3));
    }

    #[test]
    fn gamma_at_weight_zero_is_upper_connection() {
        let (s, pi) = curved();
        let s = s.with_weight(Num::ZERO);
        let (gamma, _) = gamma_theta(&s, &pi).unwrap();
        for (g, u) in gamma.iter().zip(upper_connection(&s, &pi).unwrap()) {
            assert!(same(g, &u));
        }
    }

    #[test]
    fn flat_data_give_zero_gamma_theta() {
        let chart = Chart::base(3);
        let s = TensorDensity2::from_fn(chart, Num::ratio(1, 3), |i, j| Expr::int((i + 2 * j + 1) as i64));
        let (gamma, theta) = gamma_theta(&s, &ProjectiveClass::flat(chart)).unwrap();
        assert!(gamma.iter().all(Expr::is_zero));
        assert!(theta.is_zero());
    }

    #[test]
    fn main_operator_reduces_to_laplacian_at_weight_zero() {
        let (s, pi) = curved();
        let s = s.with_weight(Num::ZERO);
        let op = main_operator(&s, &pi).unwrap();
        let lap = projective_laplacian(&s, &pi).unwrap();
        let f = p("x1^3*x2 + exp(x2)");
        assert!(same(&op.apply(&Density::function(f.clone())).unwrap().coefficient, &lap.apply(&f)));
        assert!(op.is_constant_free());
    }

    #[test]
    fn lift_construction_matches_explicit_lemma() {
        let (s, pi) = curved();
        let bracket = DensityBracket::new(s, vec![p("x1 - x2"), p("x1*x2")], p("x2^2")).unwrap();
        let via_lift = tilde_operator_via_lift(&bracket, &pi).unwrap();
        let explicit = lemma_operator(&bracket, &pi).unwrap();
        assert!(via_lift.compare(&explicit, &domain()).unwrap().passed());
    }

    #[test]
    fn lemma_operator_equals_main_operator() {
        let (s, pi) = curved();
        let (gamma, theta) = gamma_theta(&s, &pi).unwrap();
        let lemma = lemma_operator(&DensityBracket::new(s.clone(), gamma, theta).unwrap(), &pi).unwrap();
        assert!(lemma.compare(&main_operator(&s, &pi).unwrap(), &domain()).unwrap().passed());
    }

    #[test]
    fn zero_bracket_lifts_to_zero_operator() {
        let chart = Chart::base(2);
        let op = tilde_operator_via_lift(&DensityBracket::zero(chart, Num::ratio(1, 2)), &ProjectiveClass::flat(chart)).unwrap();
        assert!(op.components().iter().all(|(_, e)| e.is_zero()));
    }

    #[test]
    fn pencil_matches_application() {
        let (s, pi) = curved();
        let bracket = DensityBracket::new(s, vec![p("x1"), p("x2^2")], p("x1*x2")).unwrap();
        let op = lemma_operator(&bracket, &pi).unwrap();
        let phi = p("x1^2 + x2*x1 + 3");
        for mu in [Num::int(-1), Num::ZERO, Num::ratio(1, 3), Num::ONE, Num::int(2)] {
            let member = pencil_member(&bracket, &pi, mu).unwrap();
            assert!(same(&op.apply_coefficient(&phi, mu), &member.apply(&phi)));
        }
    }

    #[test]
    fn extend_rejects_weighted_tensor() {
        let (s, pi) = curved();
        assert!(matches!(extend_bracket(&s, &pi), Err(Error::NonzeroWeight(_))));
        let flat = extend_bracket(&TensorDensity2::identity(Chart::base(2), Num::ZERO), &ProjectiveClass::flat(Chart::base(2))).unwrap();
        assert!(flat.gamma.iter().all(Expr::is_zero) && flat.theta.is_zero());
    }

    #[test]
    fn trivial_density_gives_main_operator() {
        let (s, pi) = curved();
        let op = rho_sigma_operator(&s, &pi, &Density::function(Expr::one()), &domain()).unwrap();
        assert!(op.compare(&main_operator(&s, &pi).unwrap(), &domain()).unwrap().passed());
    }

    #[test]
    fn exponential_density_shifts_gamma() {
        let chart = Chart::base(2);
        let s = TensorDensity2::identity(chart, Num::ZERO);
        let rho = Density::function(p("exp(x1)"));
        let (gamma, _) = rho_sigma_gamma_theta(&s, &ProjectiveClass::flat(chart), &rho, &domain()).unwrap();
        // (3/5)·(6/4)·S^i1
        assert!(same(&gamma[0], &Expr::ratio(9, 10)));
        assert!(gamma[1].is_zero() || same(&gamma[1], &Expr::zero()));
    }

    #[test]
    fn shifted_resonance_and_positivity() {
        let chart = Chart::base(2);
        let s = TensorDensity2::identity(chart, Num::ZERO);
        let flat = ProjectiveClass::flat(chart);
        // 0 + (6/4)·σ = 5/3 at σ = 10/9
        let rho = Density::new(Expr::one(), Num::ratio(10, 9));
        assert!(matches!(rho_sigma_operator(&s, &flat, &rho, &domain()), Err(Error::ShiftedResonance { .. })));
        let neg = Density::function(p("x1 - 1"));
        assert!(matches!(rho_sigma_operator(&s, &flat, &neg, &domain()), Err(Error::NonpositiveDensity { .. })));
    }

    #[test]
    fn flat_density_bracket_examples() {
        let chart = Chart::base(2);
        let s = TensorDensity2::identity(chart, Num::ZERO);
        let b = flat_density_bracket(&s, &Density::new(Expr::int(3), Num::ONE), &domain()).unwrap();
        assert!(b.gamma.iter().all(|g| same(g, &Expr::zero())) && same(&b.theta, &Expr::zero()));
        let b = flat_density_bracket(&s, &Density::new(p("exp(x1)"), Num::ONE), &domain()).unwrap();
        assert!(same(&b.gamma[0], &Expr::int(-1)));
        assert!(same(&b.gamma[1], &Expr::zero()));
        assert!(same(&b.theta, &Expr::one()));
    }
}
