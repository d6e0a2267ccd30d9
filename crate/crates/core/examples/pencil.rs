//! The operators induced on densities of each fixed weight `μ`.
//!
//! ```bash
//! cargo run --example pencil
//! ```

use projlap::expr::{parse, Num, SampleDomain};
use projlap::geom::{Chart, Density, ProjectiveClass, TensorDensity2};
use projlap::operators::{gamma_theta, main_operator, pencil_member, DensityBracket};

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let s = TensorDensity2::new(chart, vec![parse("1 + x1^2")?, parse("x1*x2")?, parse("x1*x2")?, parse("1")?], Num::ratio(1, 3))?;
    let p = ProjectiveClass::flat(chart);
    let (gamma, theta) = gamma_theta(&s, &p)?;
    let bracket = DensityBracket::new(s.clone(), gamma, theta)?;
    let op = main_operator(&s, &p)?;
    let phi = parse("x1*x2^2 + exp(x1)")?;
    let domain = SampleDomain::new(3);
    for mu in [Num::int(-1), Num::ZERO, Num::ratio(1, 3), Num::ONE, Num::int(2)] {
        let member = pencil_member(&bracket, &p, mu)?;
        let direct = op.apply(&Density::new(phi.clone(), mu))?;
        let cmp = projlap::expr::compare(&member.apply(&phi), &direct.coefficient, &domain)?;
        println!("mu = {mu}: zeroth-order term {}, defect {:.1e}", member.zeroth, cmp.worst_defect);
        assert!(cmp.passed());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
