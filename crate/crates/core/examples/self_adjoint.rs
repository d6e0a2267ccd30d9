//! Self-adjointness of the operator under `⟨φ,ψ⟩ = ∫φψ` for weights
//! `μ + ν = 1 − λ`, tested by quadrature on bump densities, and a
//! perturbation the test must notice.
//!
//! ```bash
//! cargo run --release --example self_adjoint
//! ```

use projlap::expr::{parse, Expr, Num};
use projlap::geom::{Chart, ProjectiveClass, TensorDensity2};
use projlap::operators::main_operator;
use projlap::verify::{check_self_adjoint, QuadratureSpec};

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let s = TensorDensity2::new(chart, vec![parse("1 + x1^2/4")?, parse("x2/4")?, parse("x2/4")?, parse("1")?], Num::ratio(1, 2))?;
    let op = main_operator(&s, &ProjectiveClass::flat(chart))?;
    let q = QuadratureSpec::default_for(2);
    let exact = check_self_adjoint(&op, Num::ratio(1, 5), &q, None, 5, 11)?;
    println!("operator:  defect {:.2e} on {}^2 nodes", exact.worst_defect, exact.grid);

    let bad = op.with_first_order_shift(&[Expr::ratio(1, 10), Expr::ratio(1, 10)]);
    let probe = check_self_adjoint(&bad, Num::ratio(1, 5), &q, None, 5, 11)?;
    println!("perturbed: defect {:.2e}", probe.worst_defect);
    assert!(exact.worst_defect <= 1e-4 && probe.worst_defect >= 1e-2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
