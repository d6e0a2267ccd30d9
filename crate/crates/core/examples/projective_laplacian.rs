//! The second-order operator on functions attached to a weight-zero
//! tensor `S^ij` and a projective class, and its upper connection.
//!
//! ```bash
//! cargo run --example projective_laplacian
//! ```

use projlap::expr::{equal_prob, parse, Num, SampleDomain};
use projlap::geom::{projective_laplacian, upper_connection, Chart, ProjectiveClass, TensorDensity2};

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let s = TensorDensity2::new(
        chart,
        vec![parse("1 + x1^2")?, parse("x1*x2")?, parse("x1*x2")?, parse("2 + x2")?],
        Num::ZERO,
    )?;
    let flat = ProjectiveClass::flat(chart);
    let lap = projective_laplacian(&s, &flat)?;
    let gamma = upper_connection(&s, &flat)?;
    let div = s.divergence();
    let domain = SampleDomain::new(3);
    for i in 0..2 {
        println!("first-order coefficient {}: {}", i + 1, lap.first[i]);
        println!("upper connection        {}: {}", i + 1, gamma[i]);
        assert!(equal_prob(&lap.first[i], &div[i].scale(Num::ratio(2, 5)), &domain)?);
        assert!(equal_prob(&gamma[i], &div[i].scale(Num::ratio(3, 5)), &domain)?);
    }
    let f = parse("sin(x1)*x2^2")?;
    println!("Delta(f) = {}", lap.apply(&f));
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
