//! Scenario files: TOML with every mathematical field written as a string
//! in the expression grammar. See `scenarios/SCHEMA.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Num, SampleDomain};
use crate::geom::{Chart, ChartTransition, Connection, Density, ProjectiveClass, TensorDensity2};
use crate::verify::QuadratureSpec;

/// Environment variable overriding the default sample domain, written
/// `lo:hi` or `lo:hi:samples`.
pub const SAMPLE_DOMAIN_ENV: &str = "PROJLAP_SAMPLE_DOMAIN";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    dimension: usize,
    seed: Option<u64>,
    connection: Option<BTreeMap<String, String>>,
    projective_class: Option<BTreeMap<String, String>>,
    tensor: RawTensor,
    rho: Option<RawDensity>,
    #[serde(default)]
    densities: Vec<RawDensity>,
    #[serde(default)]
    transitions: Vec<RawTransition>,
    sample: Option<RawSample>,
    quadrature: Option<RawQuadrature>,
    checks: Option<Vec<String>>,
    expect_error: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTensor {
    weight: String,
    components: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    coefficient: String,
    weight: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    forward: Vec<String>,
    inverse: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    samples: Option<usize>,
    tolerance: Option<f64>,
    intervals: Option<Vec<(f64, f64)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    #[serde(rename = "box")]
    bounds: Option<Vec<(f64, f64)>>,
    points: Option<usize>,
    pairs: Option<usize>,
    weights: Option<Vec<String>>,
}

/// Errors a scenario may declare as the expected outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedError {
    ResonantWeight,
    ShiftedResonance,
    NonpositiveDensity,
}

impl ExpectedError {
    fn parse(s: &str) -> Result<ExpectedError> {
        match s {
            "resonant-weight" => Ok(ExpectedError::ResonantWeight),
            "shifted-resonance" => Ok(ExpectedError::ShiftedResonance),
            "nonpositive-density" => Ok(ExpectedError::NonpositiveDensity),
            other => Err(Error::Scenario(format!("unknown expect_error '{other}'"))),
        }
    }
}

impl fmt::Display for ExpectedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpectedError::ResonantWeight => "resonant-weight",
            ExpectedError::ShiftedResonance => "shifted-resonance",
            ExpectedError::NonpositiveDensity => "nonpositive-density",
        })
    }
}

/// Command-line and environment settings applied on top of a file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub grid: Option<usize>,
    /// Value of [`SAMPLE_DOMAIN_ENV`], if set.
    pub sample_env: Option<String>,
}

impl Overrides {
    pub fn from_env() -> Overrides {
        Overrides { sample_env: std::env::var(SAMPLE_DOMAIN_ENV).ok(), ..Overrides::default() }
    }
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub seed: u64,
    pub connection: Option<Connection>,
    pub class: ProjectiveClass,
    pub tensor: TensorDensity2,
    pub rho: Option<Density>,
    pub densities: Vec<Density>,
    pub transitions: Vec<ChartTransition>,
    pub domain: SampleDomain,
    pub quadrature: QuadratureSpec,
    pub pairs: usize,
    /// Weights `μ` of the first bump in self-adjointness checks.
    pub weights: Vec<Num>,
    pub checks: Option<Vec<String>>,
    pub expect_error: Option<ExpectedError>,
}

fn field<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Scenario(format!("{what}: {e}")))
}

fn expr(what: &str, s: &str, chart: Chart) -> Result<Expr> {
    let e = field(what, parse(s).map_err(Error::from))?;
    field(what, chart.check_vars(&e))?;
    Ok(e)
}

/// A constant in the expression grammar, e.g. `1/2`, `-0.25` or `4/3`.
pub fn parse_weight(what: &str, s: &str) -> Result<Num> {
    let e = field(what, parse(s).map_err(Error::from))?;
    e.as_const().ok_or_else(|| Error::Scenario(format!("{what}: '{s}' is not a constant")))
}

fn indices(what: &str, key: &str, count: usize, n: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    let bad = || Error::Scenario(format!("{what}: key '{key}' needs {count} comma-separated indices in 1..={n}"));
    if parts.len() != count {
        return Err(bad());
    }
    parts
        .iter()
        .map(|p| match p.parse::<usize>() {
            Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
            _ => Err(bad()),
        })
        .collect()
}

/// Coefficients `C^k_ij` from `"k,i,j"` keys; a missing mirror entry is
/// filled in, a conflicting one is an error.
fn coefficient_table(what: &str, table: &BTreeMap<String, String>, chart: Chart) -> Result<Vec<Expr>> {
    let n = chart.dim();
    let mut data: Vec<Option<Expr>> = vec![None; n * n * n];
    for (key, value) in table {
        let ix = indices(what, key, 3, n)?;
        data[(ix[0] * n + ix[1]) * n + ix[2]] = Some(expr(&format!("{what} {key}"), value, chart)?);
    }
    let mut out = vec![Expr::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&data[(k * n + i) * n + j], &data[(k * n + j) * n + i]);
                out[(k * n + i) * n + j] = match (a, b) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(Error::NotSymmetric { what: "connection", i: i + 1, j: j + 1 });
                    }
                    (Some(x), _) | (None, Some(x)) => x.clone(),
                    (None, None) => Expr::zero(),
                };
            }
        }
    }
    Ok(out)
}

fn sample_domain(raw: Option<&RawSample>, n: usize, ov: &Overrides) -> Result<SampleDomain> {
    let mut domain = SampleDomain::new(n + 1);
    if let Some(env) = &ov.sample_env {
        let parts: Vec<&str> = env.split(':').collect();
        let num = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Scenario(format!("{SAMPLE_DOMAIN_ENV}: cannot parse '{env}'")))
        };
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::Scenario(format!("{SAMPLE_DOMAIN_ENV} must be lo:hi or lo:hi:samples, got '{env}'")));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        if !(lo < hi) {
            return Err(Error::Scenario(format!("{SAMPLE_DOMAIN_ENV}: empty interval in '{env}'")));
        }
        domain = SampleDomain::uniform(n + 1, lo, hi);
        if let Some(k) = parts.get(2) {
            let k = k.trim().parse::<usize>().ok().filter(|&k| k > 0);
            domain = domain.with_samples(k.ok_or_else(|| Error::Scenario(format!("{SAMPLE_DOMAIN_ENV}: bad sample count")))?);
        }
    }
    if let Some(raw) = raw {
        if let Some(k) = raw.samples {
            if k == 0 {
                return Err(Error::Scenario("sample.samples must be positive".into()));
            }
            domain = domain.with_samples(k);
        }
        if let Some(t) = raw.tolerance {
            if !(t > 0.0) {
                return Err(Error::Scenario("sample.tolerance must be positive".into()));
            }
            domain = domain.with_tolerance(t);
        }
        if let Some(iv) = &raw.intervals {
            if iv.len() != n {
                return Err(Error::Scenario(format!("sample.intervals needs {n} entries, got {}", iv.len())));
            }
            for (a, &(lo, hi)) in iv.iter().enumerate() {
                if !(lo <= hi) {
                    return Err(Error::Scenario(format!("sample.intervals[{a}] is empty")));
                }
                domain = domain.with_interval(a + 1, lo, hi);
            }
        }
    }
    if let Some(t) = ov.tolerance {
        if !(t > 0.0) {
            return Err(Error::Scenario("--tol must be positive".into()));
        }
        domain = domain.with_tolerance(t);
    }
    Ok(domain)
}

impl Scenario {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Scenario::from_toml(&text, &stem, ov)
    }

    pub fn from_toml(text: &str, default_name: &str, ov: &Overrides) -> Result<Scenario> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        let n = raw.dimension;
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let chart = Chart::base(n);
        let domain = sample_domain(raw.sample.as_ref(), n, ov)?;
        let (connection, class) = match (&raw.connection, &raw.projective_class) {
            (Some(c), None) => {
                let c = Connection::new(chart, coefficient_table("connection", c, chart)?)?;
                let p = crate::geom::projective_class(&c)?;
                (Some(c), p)
            }
            (None, Some(p)) => {
                let data = coefficient_table("projective_class", p, chart)?;
                (None, ProjectiveClass::new(chart, data, &domain)?)
            }
            _ => return Err(Error::Scenario("exactly one of [connection] and [projective_class] is required".into())),
        };
        let weight = parse_weight("tensor.weight", &raw.tensor.weight)?;
        let mut s_data = vec![None; n * n];
        for (key, value) in &raw.tensor.components {
            let ix = indices("tensor.components", key, 2, n)?;
            s_data[ix[0] * n + ix[1]] = Some(expr(&format!("tensor {key}"), value, chart)?);
        }
        let s_data: Vec<Expr> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                s_data[k].clone().or_else(|| s_data[j * n + i].clone()).unwrap_or_else(Expr::zero)
            })
            .collect();
        let tensor = TensorDensity2::new(chart, s_data, weight)?;
        let density = |what: &str, d: &RawDensity| -> Result<Density> {
            Ok(Density::new(expr(what, &d.coefficient, chart)?, parse_weight(what, &d.weight)?))
        };
        let rho = raw.rho.as_ref().map(|r| density("rho", r)).transpose()?;
        let densities = raw.densities.iter().map(|d| density("densities", d)).collect::<Result<Vec<_>>>()?;
        let mut transitions = Vec::new();
        for (k, t) in raw.transitions.iter().enumerate() {
            let what = format!("transitions[{k}]");
            let fwd = t.forward.iter().map(|s| expr(&what, s, chart)).collect::<Result<Vec<_>>>()?;
            let inv = t.inverse.iter().map(|s| expr(&what, s, chart)).collect::<Result<Vec<_>>>()?;
            let tr = field(&what, ChartTransition::new(chart, fwd, inv))?;
            field(&what, tr.validate(&domain))?;
            transitions.push(tr);
        }
        let rq = raw.quadrature.as_ref();
        let mut quadrature = match rq.and_then(|q| q.bounds.clone()) {
            Some(bounds) => {
                if bounds.len() != n {
                    return Err(Error::Scenario(format!("quadrature.box needs {n} intervals")));
                }
                let points = rq.and_then(|q| q.points).unwrap_or(QuadratureSpec::default_for(n).points());
                QuadratureSpec::new(bounds, points)?
            }
            None => {
                let d = QuadratureSpec::default_for(n);
                match rq.and_then(|q| q.points) {
                    Some(p) => d.with_points(p)?,
                    None => d,
                }
            }
        };
        if let Some(g) = ov.grid {
            quadrature = quadrature.with_points(g)?;
        }
        let pairs = rq.and_then(|q| q.pairs).unwrap_or(5);
        if pairs == 0 {
            return Err(Error::Scenario("quadrature.pairs must be positive".into()));
        }
        let weights = match rq.and_then(|q| q.weights.as_ref()) {
            Some(ws) => ws.iter().map(|w| parse_weight("quadrature.weights", w)).collect::<Result<Vec<_>>>()?,
            None => vec![Num::ZERO, Num::ratio(1, 3)],
        };
        if let Some(checks) = &raw.checks {
            for c in checks {
                if !crate::verify::CHECK_NAMES.contains(&c.as_str()) {
                    return Err(Error::Scenario(format!("unknown check '{c}'")));
                }
            }
        }
        let expect_error = raw.expect_error.as_deref().map(ExpectedError::parse).transpose()?;
        let seed = ov.seed.or(raw.seed).unwrap_or(domain.seed);
        Ok(Scenario {
            name: raw.name.unwrap_or_else(|| default_name.to_string()),
            dim: n,
            seed,
            connection,
            class,
            tensor,
            rho,
            densities,
            transitions,
            domain: domain.with_seed(seed),
            quadrature,
            pairs,
            weights,
            checks: raw.checks,
            expect_error,
        })
    }

    /// The given connection, or the class used as its own representative.
    pub fn connection_or_class(&self) -> Connection {
        self.connection.clone().unwrap_or_else(|| self.class.as_connection())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dimension = 2
[connection]
"1,1,2" = "x2"
[tensor]
weight = "1/2"
components = { "1,1" = "1", "2,2" = "1" }
"#;

    #[test]
    fn minimal_scenario_loads_with_mirrored_entries() {
        let sc = Scenario::from_toml(MINIMAL, "mini", &Overrides::default()).unwrap();
        assert_eq!(sc.name, "mini");
        let c = sc.connection.unwrap();
        assert_eq!(c.get(0, 1, 0), c.get(0, 0, 1));
        assert_eq!(sc.tensor.weight(), Num::ratio(1, 2));
        assert_eq!(sc.quadrature.points(), 101);
    }

    #[test]
    fn both_or_neither_connection_is_rejected() {
        let both = format!("{MINIMAL}\n[projective_class]\n");
        assert!(matches!(Scenario::from_toml(&both, "x", &Overrides::default()), Err(Error::Scenario(_))));
        let neither = MINIMAL.replace("[connection]\n\"1,1,2\" = \"x2\"", "");
        assert!(matches!(Scenario::from_toml(&neither, "x", &Overrides::default()), Err(Error::Scenario(_))));
    }

    #[test]
    fn bad_index_and_expression_are_reported() {
        let bad_key = MINIMAL.replace("\"1,1,2\"", "\"1,3,2\"");
        assert!(Scenario::from_toml(&bad_key, "x", &Overrides::default()).is_err());
        let bad_expr = MINIMAL.replace("\"x2\"", "\"x2 +\"");
        assert!(Scenario::from_toml(&bad_expr, "x", &Overrides::default()).is_err());
        let bad_var = MINIMAL.replace("\"x2\"", "\"x0\"");
        assert!(Scenario::from_toml(&bad_var, "x", &Overrides::default()).is_err());
    }

    #[test]
    fn dimension_one_is_rejected() {
        let text = "dimension = 1\n[connection]\n[tensor]\nweight = \"0\"\ncomponents = {}\n";
        assert!(matches!(Scenario::from_toml(text, "x", &Overrides::default()), Err(Error::DimensionTooSmall(1))));
    }

    #[test]
    fn explicit_class_must_be_trace_free() {
        let text = "dimension = 2\n[projective_class]\n\"1,1,1\" = \"1\"\n[tensor]\nweight = \"0\"\ncomponents = {}\n";
        assert!(matches!(Scenario::from_toml(text, "x", &Overrides::default()), Err(Error::TraceNonzero { .. })));
    }

    #[test]
    fn overrides_apply() {
        let ov = Overrides { seed: Some(9), tolerance: Some(1e-6), grid: Some(51), sample_env: Some("0.5:0.7:7".into()) };
        let sc = Scenario::from_toml(MINIMAL, "x", &ov).unwrap();
        assert_eq!(sc.seed, 9);
        assert_eq!(sc.domain.seed, 9);
        assert_eq!(sc.domain.tolerance, 1e-6);
        assert_eq!(sc.domain.samples, 7);
        assert_eq!(sc.domain.intervals()[1], (0.5, 0.7));
        assert_eq!(sc.quadrature.points(), 51);
        let bad = Overrides { sample_env: Some("1:0".into()), ..Overrides::default() };
        assert!(Scenario::from_toml(MINIMAL, "x", &bad).is_err());
    }

    #[test]
    fn unknown_check_is_rejected() {
        let text = format!("checks = [\"nope\"]\n{MINIMAL}");
        assert!(Scenario::from_toml(&text, "x", &Overrides::default()).is_err());
    }
}
