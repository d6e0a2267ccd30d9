//! The Thomas bundle: the extra fibre coordinate `x0`, the connection a
//! projective class induces there, and densities viewed as functions.
//!
//! Arrays on the bundle are indexed `0..=n` with the fibre direction first,
//! so array index `a` is the variable `x_a`.

use crate::error::{Error, Result};
use crate::expr::{Expr, Num, SampleDomain, Tape};
use crate::geom::{delta, Chart, ChartTransition, Connection, Density, ProjectiveClass};

fn require_base(p: &ProjectiveClass) -> Result<usize> {
    let chart = p.chart();
    if chart.is_thomas() {
        return Err(Error::DimensionMismatch { expected: chart.base_dim(), found: chart.dim() });
    }
    let n = chart.dim();
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(n)
}

/// The linear connection on the bundle:
/// `Γ̃^k_ij = Π^k_ij`, `Γ̃^a_0b = Γ̃^a_b0 = −δ^a_b/(n+1)`,
/// `Γ̃^0_ij = ((n+1)/(n−1))(∂_sΠ^s_ij − Π^p_qiΠ^q_pj)`, all others zero.
pub fn lift_connection(p: &ProjectiveClass) -> Result<Connection> {
    let n = require_base(p)?;
    let ricci = p.ricci();
    let fibre = Num::ratio(-1, n as i64 + 1);
    let curvature = Num::ratio(n as i64 + 1, n as i64 - 1);
    Ok(Connection::from_fn(Chart::thomas(n), |a, b, c| match (a, b, c) {
        (_, 0, c) => delta(a, c).scale(fibre),
        (0, i, j) => ricci[(i - 1) * n + (j - 1)].scale(curvature),
        (k, i, j) => p.get(k - 1, i - 1, j - 1).clone(),
    }))
}

/// The projective class induced on the bundle, component by component.
pub fn induced_projective_class(p: &ProjectiveClass) -> Result<ProjectiveClass> {
    let n = require_base(p)?;
    let ni = n as i64;
    let ricci = p.ricci();
    let mixed = Num::ratio(-1, (ni + 1) * (ni + 2));
    let vertical = Num::ratio(ni, (ni + 1) * (ni + 2));
    let curvature = Num::ratio(ni + 1, ni - 1);
    Ok(ProjectiveClass::from_fn_unchecked(Chart::thomas(n), |a, b, c| match (a, b, c) {
        (0, 0, 0) => Expr::constant(vertical),
        (0, _, 0) | (0, 0, _) => Expr::zero(),
        (0, i, j) => ricci[(i - 1) * n + (j - 1)].scale(curvature),
        (_, 0, 0) => Expr::zero(),
        (k, i, 0) | (k, 0, i) => delta(k, i).scale(mixed),
        (k, i, j) => p.get(k - 1, i - 1, j - 1).clone(),
    }))
}

/// A base coordinate change together with its lift to the bundle,
/// `x̄^0 = x^0 + log J_f`.
#[derive(Clone, Debug)]
pub struct TildeTransition {
    pub base: ChartTransition,
    pub lifted: ChartTransition,
}

/// Lift a base transition. Fails if `det ∂f/∂x` is not positive at a
/// sample point, so `log J_f` never needs an absolute value.
pub fn tilde_transition(t: &ChartTransition, domain: &SampleDomain) -> Result<TildeTransition> {
    let base_chart = t.chart();
    if base_chart.is_thomas() {
        return Err(Error::DimensionMismatch { expected: base_chart.base_dim(), found: base_chart.dim() });
    }
    let n = base_chart.dim();
    let det = t.jacobian_det();
    let tape = Tape::compile(std::slice::from_ref(&det));
    for p in domain.points() {
        if tape.eval(&p)?[0] <= 0.0 {
            return Err(Error::NonpositiveJacobian { point: p });
        }
    }
    let log_j = det.log();
    let mut forward = vec![Expr::var(0) + &log_j];
    forward.extend(t.forward().iter().cloned());
    let mut inverse = vec![Expr::var(0) - t.pull(&log_j)];
    inverse.extend(t.inverse().iter().cloned());
    let lifted = ChartTransition::new(Chart::thomas(n), forward, inverse)?;
    Ok(TildeTransition { base: t.clone(), lifted })
}

/// `φ(x)|Dx|^μ ↦ φ(x) e^{μ x0}`.
pub fn embed_density(d: &Density) -> Expr {
    if d.weight.is_zero() {
        return d.coefficient.clone();
    }
    &d.coefficient * (Expr::constant(d.weight) * Expr::var(0)).exp()
}

/// The weight operator as the vector field `∂/∂x0`.
pub fn weight_operator(f: &Expr) -> Expr {
    f.diff(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equal_prob, parse};
    use crate::geom::{projective_class, transform_density};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn same(a: &Expr, b: &Expr) -> bool {
        equal_prob(a, b, &SampleDomain::new(4)).unwrap()
    }

    #[test]
    fn flat_lift_has_only_fibre_terms() {
        for n in [2usize, 3] {
            let lift = lift_connection(&ProjectiveClass::flat(Chart::base(n))).unwrap();
            let m = n + 1;
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        let got = lift.get(a, b, c);
                        let want = if (b == 0 && a == c) || (c == 0 && a == b) {
                            Expr::ratio(-1, n as i64 + 1)
                        } else {
                            Expr::zero()
                        };
                        assert_eq!(got.as_const(), want.as_const(), "n={n} Γ̃^{a}_{b}{c}");
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_term_against_loop_oracle() {
        let chart = Chart::base(2);
        // constant Π with only Π^1_12 = Π^1_21 = c (traces not required here)
        let c = 0.7;
        let pi = ProjectiveClass::from_fn_unchecked(chart, |k, i, j| {
            if k == 0 && i != j {
                Expr::constant(Num::ratio(7, 10))
            } else {
                Expr::zero()
            }
        });
        let get = |k: usize, i: usize, j: usize| if k == 0 && i != j { c } else { 0.0 };
        let lift = lift_connection(&pi).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut quad = 0.0;
                for pp in 0..2 {
                    for q in 0..2 {
                        quad += get(pp, q, i) * get(q, pp, j);
                    }
                }
                let want = 3.0 * (0.0 - quad);
                let got = lift.get(0, i + 1, j + 1).eval(&[0.0, 0.5, 0.5]).unwrap();
                assert!((got - want).abs() < 1e-14, "({i},{j}) {got} vs {want}");
            }
        }
        assert!((lift.get(0, 2, 2).eval(&[0.0, 0.5, 0.5]).unwrap() + 3.0 * c * c).abs() < 1e-14);
    }

    #[test]
    fn induced_class_constants_in_dimension_two() {
        let induced = induced_projective_class(&ProjectiveClass::flat(Chart::base(2))).unwrap();
        assert_eq!(induced.get(1, 1, 0).as_const(), Some(Num::ratio(-1, 12)));
        assert_eq!(induced.get(2, 0, 2).as_const(), Some(Num::ratio(-1, 12)));
        assert_eq!(induced.get(0, 0, 0).as_const(), Some(Num::ratio(1, 6)));
        for i in 1..3 {
            for j in 1..3 {
                assert!(induced.get(0, i, j).is_zero());
            }
        }
    }

    #[test]
    fn induced_class_is_class_of_lift() {
        let gamma = Connection::from_fn(Chart::base(2), |k, i, j| p(&format!("x{}*x{} + {}", k + 1, (i + j) % 2 + 1, k)));
        let pi = projective_class(&gamma).unwrap();
        let via_lift = projective_class(&lift_connection(&pi).unwrap()).unwrap();
        let direct = induced_projective_class(&pi).unwrap();
        for (a, b) in via_lift.components().iter().zip(direct.components()) {
            assert!(same(a, b));
        }
    }

    #[test]
    fn lift_rejects_dimension_one() {
        assert!(matches!(lift_connection(&ProjectiveClass::flat(Chart::base(1))), Err(Error::DimensionTooSmall(1))));
    }

    #[test]
    fn tilde_of_identity_fixes_fibre() {
        let t = tilde_transition(&ChartTransition::identity(Chart::base(2)), &SampleDomain::new(3)).unwrap();
        assert_eq!(t.lifted.forward()[0], Expr::var(0));
    }

    #[test]
    fn tilde_of_scaling_shifts_by_log_four() {
        let base = ChartTransition::new(Chart::base(2), vec![p("2*x1"), p("2*x2")], vec![p("x1/2"), p("x2/2")]).unwrap();
        let t = tilde_transition(&base, &SampleDomain::new(3)).unwrap();
        assert!(same(&t.lifted.forward()[0], &(Expr::var(0) + Expr::int(4).log())));
        t.lifted.validate(&SampleDomain::new(3)).unwrap();
    }

    #[test]
    fn lifted_jacobian_determinant_equals_base() {
        let base = ChartTransition::new(
            Chart::base(2),
            vec![p("exp(x1)"), p("x2*exp(x1) + x1^2")],
            vec![p("log(x1)"), p("(x2 - log(x1)^2)/x1")],
        )
        .unwrap();
        let t = tilde_transition(&base, &SampleDomain::new(3)).unwrap();
        assert!(same(&t.lifted.jacobian_det(), &base.jacobian_det()));
    }

    #[test]
    fn orientation_reversing_base_is_rejected() {
        let base = ChartTransition::new(Chart::base(2), vec![p("x2"), p("x1")], vec![p("x2"), p("x1")]).unwrap();
        assert!(matches!(tilde_transition(&base, &SampleDomain::new(3)), Err(Error::NonpositiveJacobian { .. })));
    }

    #[test]
    fn embedding_and_weight_operator() {
        let f = p("x1 + x2^2");
        assert_eq!(embed_density(&Density::function(f.clone())), f);
        let vol = embed_density(&Density::volume());
        assert!(same(&weight_operator(&vol), &vol));
        assert!(same(&vol, &p("exp(x0)")));
    }

    #[test]
    fn embedding_commutes_with_chart_change() {
        let base = ChartTransition::new(
            Chart::base(2),
            vec![p("exp(x1)"), p("x2*exp(x1) + x1^2")],
            vec![p("log(x1)"), p("(x2 - log(x1)^2)/x1")],
        )
        .unwrap();
        let t = tilde_transition(&base, &SampleDomain::new(3)).unwrap();
        let d = Density::new(p("x1*x2 + 1"), Num::ratio(2, 3));
        let lhs = t.lifted.pull(&embed_density(&d));
        let rhs = embed_density(&transform_density(&d, &base));
        assert!(same(&lhs, &rhs));
    }
}
