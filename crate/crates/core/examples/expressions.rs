//! Parse, differentiate and compare expressions in the coordinate grammar.
//!
//! ```bash
//! cargo run --example expressions
//! ```

use projlap::expr::{compare, equal_prob, parse, SampleDomain};

pub fn run_example() -> projlap::Result<()> {
    let f = parse("x1^2*exp(x2) + log(x1*x2)")?;
    let fx1 = f.diff(1);
    println!("f        = {f}");
    println!("df/dx1   = {fx1}");
    println!("latex    = {}", fx1.to_latex());

    // Mixed partials commute; the identity is checked at 20 seeded points.
    let domain = SampleDomain::new(3);
    let mixed = compare(&f.diff(1).diff(2), &f.diff(2).diff(1), &domain)?;
    println!("mixed partials agree: {} (defect {:.1e})", mixed.passed(), mixed.worst_defect);
    assert!(mixed.passed());

    let expected = parse("2*x1*exp(x2) + 1/x1")?;
    assert!(equal_prob(&fx1, &expected, &domain)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    run_example()
}
