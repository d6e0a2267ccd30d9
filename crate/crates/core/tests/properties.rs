use proptest::prelude::*;

use projlap::expr::{compare, parse, Expr, Num, SampleDomain};
use projlap::geom::{projective_class, Chart, Connection};
use projlap::verify::worst_defect;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (1usize..=2).prop_map(Expr::var),
        (-5i64..=5, 1i64..=4).prop_map(|(p, q)| Expr::ratio(p, q)),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| (a.scale(Num::ratio(1, 4))).exp()),
            inner.clone().prop_map(|a| (Expr::one() + &a * &a).log()),
            (inner, 1i32..=3).prop_map(|(a, k)| a.powi(k)),
        ]
    })
}

fn domain() -> SampleDomain {
    SampleDomain::new(3).with_samples(8)
}

fn same(a: &Expr, b: &Expr) -> bool {
    compare(a, b, &domain()).unwrap().worst_defect <= 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_is_linear(f in expr(), g in expr(), p in -4i64..=4, q in 1i64..=3) {
        let c = Num::ratio(p, q);
        let lhs = (f.scale(c) + &g).diff(1);
        let rhs = f.diff(1).scale(c) + g.diff(1);
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn derivative_obeys_leibniz(f in expr(), g in expr()) {
        let lhs = (&f * &g).diff(2);
        let rhs = f.diff(2) * &g + &f * g.diff(2);
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn mixed_partials_commute(f in expr()) {
        prop_assert!(same(&f.diff(1).diff(2), &f.diff(2).diff(1)));
    }

    #[test]
    fn derivative_matches_central_difference(f in expr(), x in 0.3f64..1.1, y in 0.3f64..1.1) {
        let h = 1e-5;
        let at = |a: f64| f.eval(&[0.0, a, y]).unwrap();
        let fd = (at(x + h) - at(x - h)) / (2.0 * h);
        let exact = f.diff(1).eval(&[0.0, x, y]).unwrap();
        prop_assume!(exact.is_finite() && fd.is_finite() && exact.abs() < 1e6);
        prop_assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "fd {fd} exact {exact}");
    }

    #[test]
    fn plain_rendering_round_trips(f in expr()) {
        let back = parse(&f.to_string()).unwrap();
        prop_assert!(same(&f, &back));
    }

    #[test]
    fn class_ignores_projective_shift(g in proptest::collection::vec(expr(), 6), w1 in expr(), w2 in expr()) {
        let chart = Chart::base(2);
        let mut it = g.into_iter();
        let mut table = vec![Expr::zero(); 8];
        for k in 0..2 {
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let e = it.next().unwrap();
                table[(k * 2 + i) * 2 + j] = e.clone();
                table[(k * 2 + j) * 2 + i] = e;
            }
        }
        let c = Connection::new(chart, table).unwrap();
        let p = projective_class(&c).unwrap();
        let shifted = projective_class(&c.shifted(&[w1, w2])).unwrap();
        let d = worst_defect(p.components().iter().zip(shifted.components()), &domain()).unwrap();
        prop_assert!(d <= 1e-9, "defect {d}");
    }
}
