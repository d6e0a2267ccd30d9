//! The trace-free projective class of a connection and its invariance
//! under the shift `Γ^k_ij + δ^k_i ω_j + δ^k_j ω_i`.
//!
//! ```bash
//! cargo run --example projective_class
//! ```

use projlap::expr::{parse, SampleDomain};
use projlap::geom::{projective_class, Chart, Connection};
use projlap::verify::worst_defect;

pub fn run_example() -> projlap::Result<()> {
    let chart = Chart::base(2);
    let conn = Connection::from_fn(chart, |k, i, j| match (k, i.min(j), i.max(j)) {
        (0, 0, 1) => parse("x2").unwrap(),
        (1, 0, 0) => parse("x1*x2").unwrap(),
        (1, 1, 1) => parse("1 + x1").unwrap(),
        _ => projlap::expr::Expr::zero(),
    });
    let p = projective_class(&conn)?;
    for k in 0..2 {
        for i in 0..2 {
            for j in i..2 {
                println!("Pi^{}_{}{} = {}", k + 1, i + 1, j + 1, p.get(k, i, j));
            }
        }
    }
    let domain = SampleDomain::new(3);
    println!("trace defect: {:.1e}", p.trace_defect(&domain)?);

    let omega = vec![parse("x1 - x2^2")?, parse("exp(x1)")?];
    let shifted = projective_class(&conn.shifted(&omega))?;
    let defect = worst_defect(p.components().iter().zip(shifted.components()), &domain)?;
    println!("class of the shifted connection differs by {defect:.1e}");
    assert!(defect < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
