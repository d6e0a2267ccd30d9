//! Property checks, quadrature-based self-adjointness and reports.

mod battery;
mod quadrature;
mod report;

pub use battery::{run_invariance_battery, CHECK_NAMES, PROBE_SHIFT, PROBE_THRESHOLD};
pub use quadrature::{
    bump_pairs, check_self_adjoint, modified_scalar_product, scalar_product, BumpDensity, Field, Jet,
    Product, QuadratureSpec, SelfAdjointReport,
};
pub use report::{Bound, CheckResult, Report, Status};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::{compare, Expr, Num, SampleDomain};
use crate::geom::{
    projective_class, projective_laplacian, transform_connection, transform_density, transform_tensor_density,
    Chart, ChartTransition, Connection, Density, ProjectiveClass, TensorDensity2,
};
use crate::operators::{
    canonical_operator, gamma_theta, generated_bracket, lemma_operator, main_operator, pencil_member,
    tilde_operator_via_lift, DensityBracket, DensityOperator,
};
use crate::thomas::{induced_projective_class, lift_connection, tilde_transition};

/// Worst sampled defect over a list of expression pairs.
pub fn worst_defect<'a>(pairs: impl IntoIterator<Item = (&'a Expr, &'a Expr)>, domain: &SampleDomain) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (a, b) in pairs {
        worst = worst.max(compare(a, b, domain)?.worst_defect);
    }
    Ok(worst)
}

fn density_defect(a: &Density, b: &Density, domain: &SampleDomain) -> Result<f64> {
    if !a.weight.approx_eq(b.weight, 1e-12) {
        return Ok(f64::INFINITY);
    }
    Ok(compare(&a.coefficient, &b.coefficient, domain)?.worst_defect)
}

/// Both traces of the class.
pub fn trace_defect(p: &ProjectiveClass, domain: &SampleDomain) -> Result<f64> {
    p.trace_defect(domain)
}

/// `Γ` and its `ω`-shift give the same class.
pub fn projective_equivalence_defect(c: &Connection, omega: &[Expr], domain: &SampleDomain) -> Result<f64> {
    let a = projective_class(c)?;
    let b = projective_class(&c.shifted(omega))?;
    worst_defect(a.components().iter().zip(b.components()), domain)
}

/// The class of the transformed connection against the transformed class.
pub fn class_naturality_defect(c: &Connection, t: &ChartTransition, domain: &SampleDomain) -> Result<f64> {
    let direct = projective_class(&transform_connection(c, t)?)?;
    let via_class = projective_class(&transform_connection(&projective_class(c)?.as_connection(), t)?)?;
    worst_defect(direct.components().iter().zip(via_class.components()), domain)
}

/// The lifted connection transforms as a connection under the lifted
/// coordinate change.
pub fn lift_law_defect(p: &ProjectiveClass, t: &ChartTransition, domain: &SampleDomain) -> Result<f64> {
    let tilde = tilde_transition(t, domain)?;
    let transported = transform_connection(&lift_connection(p)?, &tilde.lifted)?;
    let new_class = projective_class(&transform_connection(&p.as_connection(), t)?)?;
    let lifted_new = lift_connection(&new_class)?;
    worst_defect(transported.components().iter().zip(lifted_new.components()), domain)
}

/// The induced class against the class of the lifted connection.
pub fn induced_class_defect(p: &ProjectiveClass, domain: &SampleDomain) -> Result<f64> {
    let a = induced_projective_class(p)?;
    let b = projective_class(&lift_connection(p)?)?;
    worst_defect(a.components().iter().zip(b.components()), domain)
}

fn operator_defect(a: &DensityOperator, b: &DensityOperator, domain: &SampleDomain) -> Result<f64> {
    Ok(a.compare(b, domain)?.worst_defect)
}

/// The operator read off the Thomas bundle against the explicit display,
/// and the explicit display with `γ`, `θ` solved against the canonical
/// operator. Returns the worse of the two.
pub fn cross_construction_defect(s: &TensorDensity2, p: &ProjectiveClass, domain: &SampleDomain) -> Result<f64> {
    let (gamma, theta) = gamma_theta(s, p)?;
    let bracket = DensityBracket::new(s.clone(), gamma, theta)?;
    let explicit = lemma_operator(&bracket, p)?;
    let via_lift = tilde_operator_via_lift(&bracket, p)?;
    let canonical = canonical_operator(&bracket);
    let main = main_operator(s, p)?;
    Ok(operator_defect(&via_lift, &explicit, domain)?
        .max(operator_defect(&explicit, &canonical, domain)?)
        .max(operator_defect(&main, &canonical, domain)?))
}

/// Theorem 1 naturality on functions.
pub fn laplacian_invariance_defect(
    s: &TensorDensity2,
    c: &Connection,
    t: &ChartTransition,
    f: &Expr,
    domain: &SampleDomain,
) -> Result<f64> {
    let s0 = s.with_weight(Num::ZERO);
    let before = projective_laplacian(&s0, &projective_class(c)?)?.apply(f);
    let s_bar = transform_tensor_density(&s0, t)?;
    let p_bar = projective_class(&transform_connection(c, t)?)?;
    let after = projective_laplacian(&s_bar, &p_bar)?.apply(&t.pull(f));
    Ok(compare(&after, &t.pull(&before), domain)?.worst_defect)
}

/// Transformed inputs give the transformed output of the main operator.
pub fn operator_invariance_defect(
    s: &TensorDensity2,
    c: &Connection,
    t: &ChartTransition,
    densities: &[Density],
    domain: &SampleDomain,
) -> Result<f64> {
    let op = main_operator(s, &projective_class(c)?)?;
    let s_bar = transform_tensor_density(s, t)?;
    let p_bar = projective_class(&transform_connection(c, t)?)?;
    let op_bar = main_operator(&s_bar, &p_bar)?;
    let mut worst: f64 = 0.0;
    for d in densities {
        let lhs = op_bar.apply(&transform_density(d, t))?;
        let rhs = transform_density(&op.apply(d)?, t);
        worst = worst.max(density_defect(&lhs, &rhs, domain)?);
    }
    Ok(worst)
}

/// Application at weight `μ` against the pencil display.
pub fn pencil_defect(
    bracket: &DensityBracket,
    p: &ProjectiveClass,
    mus: &[Num],
    phis: &[Expr],
    domain: &SampleDomain,
) -> Result<f64> {
    let op = lemma_operator(bracket, p)?;
    let mut worst: f64 = 0.0;
    for &mu in mus {
        let member = pencil_member(bracket, p, mu)?;
        for phi in phis {
            let got = op.apply(&Density::new(phi.clone(), mu))?;
            worst = worst.max(compare(&got.coefficient, &member.apply(phi), domain)?.worst_defect);
        }
    }
    Ok(worst)
}

/// Coordinate functions and the volume element.
pub fn generators(chart: Chart) -> Vec<Density> {
    let mut out: Vec<Density> = (0..chart.dim()).map(|a| Density::function(chart.coord(a))).collect();
    out.push(Density::volume());
    out
}

/// `c·x^e|Dx|^w` with small random exponents, coefficients and weights.
pub fn random_monomial_densities(chart: Chart, count: usize, seed: u64) -> Vec<Density> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = [Num::int(-1), Num::ZERO, Num::ratio(1, 2), Num::ONE, Num::ratio(3, 2), Num::int(2)];
    (0..count)
        .map(|_| {
            let c = Num::ratio(rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=3));
            let m = (0..chart.dim()).fold(Expr::constant(c), |m, a| m * chart.coord(a).powi(rng.gen_range(0..=2)));
            Density::new(m, *weights.choose(&mut rng).unwrap())
        })
        .collect()
}

/// How far `op` is from generating `bracket`, on generator pairs and on
/// random monomial pairs.
pub fn check_generates(op: &DensityOperator, bracket: &DensityBracket, domain: &SampleDomain, pairs: usize) -> Result<f64> {
    let chart = bracket.chart();
    let gens = generators(chart);
    let mut list: Vec<(Density, Density)> = Vec::new();
    for a in &gens {
        for b in &gens {
            list.push((a.clone(), b.clone()));
        }
    }
    let mono = random_monomial_densities(chart, 2 * pairs, domain.seed);
    list.extend(mono.chunks(2).map(|c| (c[0].clone(), c[1].clone())));
    let mut worst: f64 = 0.0;
    for (a, b) in &list {
        let got = generated_bracket(op, a, b)?;
        worst = worst.max(density_defect(&got, &bracket.apply(a, b), domain)?);
    }
    Ok(worst)
}

/// Leibniz rule and symmetry of the bracket generated by the canonical
/// operator of `bracket`, on random monomial triples.
pub fn check_biderivation(bracket: &DensityBracket, domain: &SampleDomain, triples: usize) -> Result<f64> {
    let op = canonical_operator(bracket);
    let mono = random_monomial_densities(bracket.chart(), 3 * triples, domain.seed ^ 0xb1de);
    let mut worst: f64 = 0.0;
    for t in mono.chunks(3) {
        let (a, b, c) = (&t[0], &t[1], &t[2]);
        let lhs = generated_bracket(&op, a, &b.mul(c))?;
        let rhs = generated_bracket(&op, a, b)?.mul(c).add(&b.mul(&generated_bracket(&op, a, c)?));
        worst = worst.max(density_defect(&lhs, &rhs, domain)?);
        let ab = generated_bracket(&op, a, b)?;
        let ba = generated_bracket(&op, b, a)?;
        worst = worst.max(density_defect(&ab, &ba, domain)?);
        let expected = a.weight + b.weight + bracket.weight();
        if !ab.weight.approx_eq(expected, 1e-12) {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}
