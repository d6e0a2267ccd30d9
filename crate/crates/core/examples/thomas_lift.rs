//! Lift a projective class to the Thomas bundle and follow a chart change
//! up to the lifted coordinates `(x0 + log J, f(x))`.
//!
//! ```bash
//! cargo run --example thomas_lift
//! ```

use projlap::expr::{parse, SampleDomain};
use projlap::geom::{projective_class, Chart, ChartTransition, ProjectiveClass};
use projlap::thomas::{induced_projective_class, lift_connection, tilde_transition};
use projlap::verify::{induced_class_defect, lift_law_defect};

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let flat = ProjectiveClass::flat(chart);
    let induced = induced_projective_class(&flat)?;
    // Flat plane: the fibre direction carries -1/12 and 1/6.
    println!("Pi~^0_00 = {}", induced.get(0, 0, 0));
    println!("Pi~^1_10 = {}", induced.get(1, 1, 0));

    let lifted = lift_connection(&flat)?;
    println!("Gamma~^1_10 = {}", lifted.get(1, 1, 0));
    let again = projective_class(&lifted)?;
    assert_eq!(again.get(0, 0, 0).as_const(), induced.get(0, 0, 0).as_const());

    let t = ChartTransition::new(
        chart,
        vec![parse("exp(x1)")?, parse("x2 + x1^2")?],
        vec![parse("log(x1)")?, parse("x2 - log(x1)^2")?],
    )?;
    let domain = SampleDomain::new(3);
    let tt = tilde_transition(&t, &domain)?;
    println!("lifted forward map: {:?}", tt.lifted.forward().iter().map(|e| e.to_string()).collect::<Vec<_>>());
    let defect = lift_law_defect(&flat, &t, &domain)?;
    println!("lift law defect {defect:.1e}, induced-class defect {:.1e}", induced_class_defect(&flat, &domain)?);
    assert!(defect < 1e-7);
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
