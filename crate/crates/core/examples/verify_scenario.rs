//! Run the full invariance battery on a shipped scenario file.
//!
//! ```bash
//! cargo run --release --example verify_scenario -- scenarios/curved_n2.toml
//! ```

use std::path::{Path, PathBuf};

use projlap::cli::{Overrides, Scenario};
use projlap::verify::run_invariance_battery;

pub fn run_example() -> projlap::Result<()> {
    verify(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/flat_n2.toml"))
}

fn verify(path: &Path) -> projlap::Result<()> {
    let sc = Scenario::load(path, &Overrides::default())?;
    let report = run_invariance_battery(&sc)?;
    print!("{}", report.to_text());
    assert!(report.passed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> projlap::Result<()> {
    match std::env::args().nth(1) {
        Some(p) => verify(Path::new(&p)),
        None => run_example(),
    }
}
