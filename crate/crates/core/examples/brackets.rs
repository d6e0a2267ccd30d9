//! Brackets on densities: the extension of a weight-zero tensor, the
//! bracket a given operator generates, and the flat bracket of a density.
//!
//! ```bash
//! cargo run --example brackets
//! ```

use projlap::expr::{parse, Num, SampleDomain};
use projlap::geom::{Chart, Density, ProjectiveClass, TensorDensity2};
use projlap::operators::{extend_bracket, flat_density_bracket, generated_bracket, main_operator};
use projlap::verify::{check_biderivation, check_generates};

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let s = TensorDensity2::new(chart, vec![parse("1 + x1*x2")?, parse("x1")?, parse("x1")?, parse("2")?], Num::ZERO)?;
    let p = ProjectiveClass::flat(chart);
    let domain = SampleDomain::new(3);

    let ext = extend_bracket(&s, &p)?;
    println!("extension: gamma = [{}, {}], theta = {}", ext.gamma[0], ext.gamma[1], ext.theta);
    let op = main_operator(&s, &p)?;
    println!("generation defect  {:.1e}", check_generates(&op, &ext, &domain, 10)?);
    println!("biderivation defect {:.1e}", check_biderivation(&ext, &domain, 5)?);

    let f = Density::function(parse("x1^2")?);
    let g = Density::new(parse("x2")?, Num::ratio(1, 2));
    let fg = generated_bracket(&op, &f, &g)?;
    println!("{{x1^2, x2|Dx|^(1/2)}} has weight {} and coefficient {}", fg.weight, fg.coefficient);

    let rho = Density::new(parse("exp(x1 + x2)")?, Num::ONE);
    let flat = flat_density_bracket(&s, &rho, &domain)?;
    println!("flat bracket of exp(x1+x2)|Dx|: theta = {}", flat.theta);
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
