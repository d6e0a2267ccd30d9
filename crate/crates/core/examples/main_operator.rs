//! The constant-free operator on densities extending a tensor density of
//! weight `λ`, built two ways, and the refusal at resonant weights.
//!
//! ```bash
//! cargo run --example main_operator
//! ```

use projlap::expr::{parse, Num, SampleDomain};
use projlap::geom::{projective_class, Chart, Connection, Density, TensorDensity2};
use projlap::operators::{gamma_theta, main_operator, resonance, DensityBracket, lemma_operator};
use projlap::Error;

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let conn = Connection::from_fn(chart, |k, i, j| match (k, i.min(j), i.max(j)) {
        (0, 0, 1) => parse("x2").unwrap(),
        (1, 1, 1) => parse("x1").unwrap(),
        _ => projlap::expr::Expr::zero(),
    });
    let p = projective_class(&conn)?;
    let s = TensorDensity2::new(
        chart,
        vec![parse("1 + x1^2")?, parse("x2/2")?, parse("x2/2")?, parse("2")?],
        Num::ratio(1, 2),
    )?;
    let op = main_operator(&s, &p)?;
    for (name, e) in op.components() {
        println!("{name:8} = {e}");
    }
    let one = op.apply(&Density::function(projlap::expr::Expr::one()))?;
    println!("Delta(1) = {}", one.coefficient);

    let (gamma, theta) = gamma_theta(&s, &p)?;
    let other = lemma_operator(&DensityBracket::new(s.clone(), gamma, theta)?, &p)?;
    let cmp = op.compare(&other, &SampleDomain::new(3))?;
    println!("lemma operator agrees: defect {:.1e}", cmp.worst_defect);

    let bad = s.with_weight(Num::ratio(4, 3));
    println!("resonance at 4/3: {:?}", resonance(2, Num::ratio(4, 3)));
    match main_operator(&bad, &p) {
        Err(e @ Error::ResonantWeight { .. }) => println!("refused: {e}"),
        other => panic!("expected a resonance error, got {other:?}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
