//! Operators self-adjoint for the modified pairing `∫φψρ`, indexed by a
//! positive density `ρ|Dx|^σ`.
//!
//! ```bash
//! cargo run --release --example rho_sigma
//! ```

use projlap::expr::{parse, Expr, Num, SampleDomain};
use projlap::geom::{Chart, Density, ProjectiveClass, TensorDensity2};
use projlap::operators::{main_operator, rho_sigma_operator};
use projlap::verify::{check_self_adjoint, QuadratureSpec};

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let s = TensorDensity2::identity(chart, Num::ZERO);
    let p = ProjectiveClass::flat(chart);
    let domain = SampleDomain::new(3);

    let trivial = rho_sigma_operator(&s, &p, &Density::function(Expr::one()), &domain)?;
    let defect = trivial.compare(&main_operator(&s, &p)?, &domain)?.worst_defect;
    println!("rho = 1, sigma = 0 reproduces the main operator: defect {defect:.1e}");

    let rho = Density::new(parse("exp(x1)")?, Num::ratio(1, 4));
    let op = rho_sigma_operator(&s, &p, &rho, &domain)?;
    println!("gamma = [{}, {}]", op.gamma[0], op.gamma[1]);
    let r = check_self_adjoint(&op, Num::ZERO, &QuadratureSpec::default_for(2), Some(&rho), 5, 3)?;
    println!("modified pairing: defect {:.2e}", r.worst_defect);
    assert!(r.worst_defect <= 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
