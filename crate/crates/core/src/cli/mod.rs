//! The `projlap` command line: scenario loading, subcommands and output
//! formats.

mod scenario;

pub use scenario::{parse_weight, ExpectedError, Overrides, Scenario, SAMPLE_DOMAIN_ENV};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geom::Chart;
use crate::operators::{
    extend_bracket, gamma_theta, main_operator, rho_sigma_operator, DensityBracket, DensityOperator,
};
use crate::thomas::{induced_projective_class, lift_connection};
use crate::verify::run_invariance_battery;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "projlap", version, about = "Projectively invariant Laplacians on densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Projective class of the scenario's connection, with the trace check.
    Project(Common),
    /// Connection and projective class on the Thomas bundle.
    Lift(Common),
    /// Operator extending the tensor density (and the ρ,σ variant if given).
    Extend(Common),
    /// Canonical extension of a weight-0 tensor to a bracket on densities.
    Bracket(Common),
    /// Run the invariance battery.
    Verify(Common),
    /// Operator coefficients only.
    Emit(Common),
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance for sampled identities.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Quadrature points per axis (odd, at least 11).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// `name = expression`, re-parseable.
    Plain,
    Latex,
    /// JSON.
    Report,
}

/// Named expressions in output order.
#[derive(Default)]
pub struct Listing {
    pub title: String,
    pub entries: Vec<(String, String, Expr)>,
}

impl Listing {
    fn new(title: &str) -> Listing {
        Listing { title: title.to_string(), entries: Vec::new() }
    }

    fn push(&mut self, plain: String, latex: String, e: Expr) {
        self.entries.push((plain, latex, e));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Plain => {
                let mut s = format!("# {}\n", self.title);
                for (name, _, e) in &self.entries {
                    s.push_str(&format!("{name} = {e}\n"));
                }
                s
            }
            Format::Latex => {
                let mut s = format!("% {}\n\\begin{{align*}}\n", self.title);
                for (_, name, e) in &self.entries {
                    s.push_str(&format!("{name} &= {} \\\\\n", e.to_latex()));
                }
                s.push_str("\\end{align*}\n");
                s
            }
            Format::Report => {
                let mut m = Map::new();
                for (name, _, e) in &self.entries {
                    m.insert(name.clone(), Value::String(e.to_string()));
                }
                format!("{}\n", serde_json::to_string_pretty(&json!({ "title": self.title, "coefficients": m })).unwrap())
            }
        }
    }
}

fn coefficient_listing(title: &str, symbol: &str, latex: &str, chart: Chart, get: impl Fn(usize, usize, usize) -> Expr) -> Listing {
    let mut l = Listing::new(title);
    let n = chart.dim();
    // 1-based on the base, 0-based (fibre first) on the Thomas chart
    let label = |a: usize| chart.var(a);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                l.push(
                    format!("{symbol}^{}_{}{}", label(k), label(i), label(j)),
                    format!("{latex}^{{{}}}_{{{}{}}}", label(k), label(i), label(j)),
                    get(k, i, j),
                );
            }
        }
    }
    l
}

pub fn operator_listing(title: &str, op: &DensityOperator) -> Listing {
    let mut l = Listing::new(title);
    let n = op.dim();
    for i in 0..n {
        for j in i..n {
            l.push(format!("S^{}{}", i + 1, j + 1), format!("S^{{{}{}}}", i + 1, j + 1), op.s.get(i, j).clone());
        }
    }
    for i in 0..n {
        l.push(format!("gamma^{}", i + 1), format!("\\gamma^{{{}}}", i + 1), op.gamma[i].clone());
    }
    l.push("theta".into(), "\\theta".into(), op.theta.clone());
    for i in 0..n {
        l.push(format!("a^{}", i + 1), format!("a^{{{}}}", i + 1), op.a[i].clone());
    }
    l.push("b".into(), "b".into(), op.b.clone());
    l.push("c".into(), "c".into(), op.c.clone());
    l
}

fn bracket_listing(title: &str, b: &DensityBracket) -> Listing {
    let mut l = Listing::new(title);
    let n = b.dim();
    for i in 0..n {
        for j in i..n {
            l.push(format!("S^{}{}", i + 1, j + 1), format!("S^{{{}{}}}", i + 1, j + 1), b.s.get(i, j).clone());
        }
    }
    for i in 0..n {
        l.push(format!("gamma^{}", i + 1), format!("\\gamma^{{{}}}", i + 1), b.gamma[i].clone());
    }
    l.push("theta".into(), "\\theta".into(), b.theta.clone());
    l
}

fn execute(cmd: &Command, sc: &Scenario, out: &mut dyn Write) -> Result<i32> {
    let write = |out: &mut dyn Write, s: String| {
        out.write_all(s.as_bytes()).map_err(|e| Error::Scenario(format!("cannot write output: {e}")))
    };
    match cmd {
        Command::Project(c) => {
            let p = &sc.class;
            let l = coefficient_listing("projective class", "Pi", "\\Pi", p.chart(), |k, i, j| p.get(k, i, j).clone());
            let defect = p.trace_defect(&sc.domain)?;
            let ok = defect <= sc.domain.tolerance;
            let mut text = l.render(c.format);
            if c.format == Format::Report {
                text = format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "title": l.title,
                        "coefficients": l.entries.iter().map(|(n, _, e)| (n.clone(), Value::String(e.to_string()))).collect::<Map<_, _>>(),
                        "trace-defect": defect,
                        "tolerance": sc.domain.tolerance,
                        "status": if ok { "pass" } else { "fail" },
                    }))
                    .unwrap()
                );
            } else {
                let mark = if c.format == Format::Latex { "%" } else { "#" };
                text.push_str(&format!("{mark} trace defect {defect:.3e} ({})\n", if ok { "pass" } else { "fail" }));
            }
            write(out, text)?;
            Ok(if ok { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Lift(c) => {
            let lift = lift_connection(&sc.class)?;
            let induced = induced_projective_class(&sc.class)?;
            let chart = lift.chart();
            let a = coefficient_listing("lifted connection", "Gamma~", "\\tilde{\\Gamma}", chart, |k, i, j| lift.get(k, i, j).clone());
            let b = coefficient_listing("induced projective class", "Pi~", "\\tilde{\\Pi}", chart, |k, i, j| induced.get(k, i, j).clone());
            write(out, a.render(c.format) + &b.render(c.format))?;
            Ok(EXIT_PASS)
        }
        Command::Extend(c) => {
            let op = main_operator(&sc.tensor, &sc.class)?;
            let mut text = operator_listing("operator", &op).render(c.format);
            if let Some(rho) = &sc.rho {
                let weighted = rho_sigma_operator(&sc.tensor, &sc.class, rho, &sc.domain)?;
                text += &operator_listing("rho-sigma operator", &weighted).render(c.format);
            }
            write(out, text)?;
            Ok(EXIT_PASS)
        }
        Command::Emit(c) => {
            let op = main_operator(&sc.tensor, &sc.class)?;
            write(out, operator_listing("operator", &op).render(c.format))?;
            Ok(EXIT_PASS)
        }
        Command::Bracket(c) => {
            // Weight 0 is the canonical extension; other weights print the
            // bracket the main operator generates.
            let b = if sc.tensor.weight().is_zero() {
                extend_bracket(&sc.tensor, &sc.class)?
            } else {
                let (gamma, theta) = gamma_theta(&sc.tensor, &sc.class)?;
                DensityBracket::new(sc.tensor.clone(), gamma, theta)?
            };
            write(out, bracket_listing("bracket", &b).render(c.format))?;
            Ok(EXIT_PASS)
        }
        Command::Verify(c) => {
            let report = run_invariance_battery(sc)?;
            let text = match c.format {
                Format::Report => report.to_json() + "\n",
                _ => report.to_text(),
            };
            write(out, text)?;
            Ok(if report.passed() { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Project(c)
        | Command::Lift(c)
        | Command::Extend(c)
        | Command::Bracket(c)
        | Command::Verify(c)
        | Command::Emit(c) => c,
    }
}

/// Exit code for an error raised after the scenario loaded.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_precondition() {
        EXIT_PRECONDITION
    } else {
        EXIT_INVALID
    }
}

/// Parses arguments, runs one command and returns the process exit code.
/// `sample_env` is the value of [`SAMPLE_DOMAIN_ENV`].
pub fn run<I, T>(args: I, sample_env: Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
        }
    };
    let c = common(&cli.command);
    let ov = Overrides { seed: c.seed, tolerance: c.tol, grid: c.grid, sample_env };
    let sc = match Scenario::load(&c.scenario, &ov) {
        Ok(sc) => sc,
        Err(e) => {
            let _ = writeln!(err, "error: invalid scenario: {e}");
            return EXIT_INVALID;
        }
    };
    match execute(&cli.command, &sc, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equal_prob, parse, Num, SampleDomain};
    use crate::geom::TensorDensity2;

    #[test]
    fn plain_listing_round_trips() {
        let chart = Chart::base(2);
        let s = TensorDensity2::from_fn(chart, Num::ratio(1, 2), |i, j| parse(&format!("x{}^2/3 + {}", i + 1, j)).unwrap());
        let op = main_operator(&s, &crate::geom::ProjectiveClass::flat(chart)).unwrap();
        let listing = operator_listing("op", &op);
        let text = listing.render(Format::Plain);
        for ((_, _, e), line) in listing.entries.iter().zip(text.lines().skip(1)) {
            let rhs = line.split_once(" = ").unwrap().1;
            assert!(equal_prob(&parse(rhs).unwrap(), e, &SampleDomain::new(3)).unwrap(), "{line}");
        }
    }

    #[test]
    fn latex_and_report_formats() {
        let mut l = Listing::new("t");
        l.push("a^1".into(), "a^{1}".into(), parse("x1/2").unwrap());
        assert!(l.render(Format::Latex).contains("a^{1} &= "));
        let v: Value = serde_json::from_str(&l.render(Format::Report)).unwrap();
        assert_eq!(v["coefficients"]["a^1"], "1/2*x1");
    }

    #[test]
    fn missing_scenario_is_a_validation_error() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["projlap", "verify", "--scenario", "/nonexistent.toml"], None, &mut out, &mut err);
        assert_eq!(code, EXIT_INVALID);
        let code = run(["projlap", "frobnicate"], None, &mut out, &mut err);
        assert_eq!(code, EXIT_INVALID);
    }
}
