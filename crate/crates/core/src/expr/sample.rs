//! Probabilistic identity testing by seeded point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvalError, Expr, Tape};

pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_INTERVAL: (f64, f64) = (0.2, 1.2);
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Per-variable sampling intervals (index 0 is `x0`), a sample count, a
/// relative tolerance and a seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDomain {
    intervals: Vec<(f64, f64)>,
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl SampleDomain {
    /// Default domain over variables `x0..x_{vars-1}`.
    pub fn new(vars: usize) -> SampleDomain {
        SampleDomain::uniform(vars, DEFAULT_INTERVAL.0, DEFAULT_INTERVAL.1)
    }

    pub fn uniform(vars: usize, lo: f64, hi: f64) -> SampleDomain {
        SampleDomain {
            intervals: vec![(lo, hi); vars],
            samples: DEFAULT_SAMPLES,
            tolerance: DEFAULT_TOLERANCE,
            seed: DEFAULT_SEED,
        }
    }

    /// Panics if an interval is empty or `samples == 0`.
    pub fn from_intervals(intervals: Vec<(f64, f64)>, samples: usize, tolerance: f64, seed: u64) -> SampleDomain {
        assert!(samples >= 1, "sample count must be positive");
        assert!(tolerance > 0.0, "tolerance must be positive");
        for &(lo, hi) in &intervals {
            assert!(lo <= hi && lo.is_finite() && hi.is_finite(), "empty interval [{lo}, {hi}]");
        }
        SampleDomain { intervals, samples, tolerance, seed }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn vars(&self) -> usize {
        self.intervals.len()
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> SampleDomain {
        self.tolerance = tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> SampleDomain {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> SampleDomain {
        assert!(samples >= 1);
        self.samples = samples;
        self
    }

    /// Replace the interval of one variable.
    pub fn with_interval(mut self, var: usize, lo: f64, hi: f64) -> SampleDomain {
        assert!(lo <= hi);
        if var >= self.intervals.len() {
            self.intervals.resize(var + 1, DEFAULT_INTERVAL);
        }
        self.intervals[var] = (lo, hi);
        self
    }

    /// The deterministic sample points.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.samples)
            .map(|_| self.intervals.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) }).collect())
            .collect()
    }
}

/// Outcome of comparing two expressions on a sample domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// Largest `|a-b| / (1 + max(|a|,|b|))` over the samples.
    pub worst_defect: f64,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.worst_defect <= self.tolerance
    }
}

pub fn compare(a: &Expr, b: &Expr, domain: &SampleDomain) -> Result<Comparison, EvalError> {
    let tape = Tape::compile(&[a.clone(), b.clone()]);
    let mut scratch = Vec::new();
    let mut out = [0.0; 2];
    let mut cmp = Comparison { worst_defect: 0.0, worst_point: Vec::new(), tolerance: domain.tolerance };
    for p in domain.points() {
        tape.eval_with(&p, &mut scratch, &mut out)?;
        let defect = (out[0] - out[1]).abs() / (1.0 + out[0].abs().max(out[1].abs()));
        if cmp.worst_point.is_empty() || defect > cmp.worst_defect {
            cmp.worst_defect = defect;
            cmp.worst_point = p;
        }
    }
    Ok(cmp)
}

/// Decide `a == b` by evaluation at the domain's seeded sample points.
pub fn equal_prob(a: &Expr, b: &Expr, domain: &SampleDomain) -> Result<bool, EvalError> {
    Ok(compare(a, b, domain)?.passed())
}
