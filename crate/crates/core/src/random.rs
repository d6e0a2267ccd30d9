//! Seeded generators of random geometric data for property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, Num};
use crate::geom::{projective_class, Chart, ChartTransition, Connection, Density, ProjectiveClass, TensorDensity2};
use crate::operators::resonance;

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Generator {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// `p/q` with `|p| <= 3`, `1 <= q <= 4`.
    pub fn small_rational(&mut self) -> Num {
        Num::ratio(self.rng.gen_range(-3..=3), self.rng.gen_range(1..=4))
    }

    fn nonzero_rational(&mut self) -> Num {
        loop {
            let r = self.small_rational();
            if !r.is_zero() {
                return r;
            }
        }
    }

    /// A monomial `x^e` of total degree at most `degree` in the chart's
    /// coordinates.
    pub fn monomial(&mut self, chart: Chart, degree: u32) -> Expr {
        let mut left = self.rng.gen_range(0..=degree);
        let mut m = Expr::one();
        let mut axes: Vec<usize> = (0..chart.dim()).collect();
        axes.shuffle(&mut self.rng);
        for a in axes {
            if left == 0 {
                break;
            }
            let e = self.rng.gen_range(0..=left);
            left -= e;
            m = m * chart.coord(a).powi(e as i32);
        }
        m
    }

    pub fn polynomial(&mut self, chart: Chart, degree: u32, terms: usize) -> Expr {
        Expr::sum((0..terms).map(|_| {
            let c = self.nonzero_rational();
            self.monomial(chart, degree).scale(c)
        }))
    }

    /// Quadratic polynomial coefficients, with about half the entries zero.
    pub fn connection(&mut self, chart: Chart) -> Connection {
        Connection::from_fn(chart, |_, _, _| {
            if self.rng.gen_bool(0.5) {
                Expr::zero()
            } else {
                self.polynomial(chart, 2, 2)
            }
        })
    }

    pub fn projective_class(&mut self, chart: Chart) -> ProjectiveClass {
        projective_class(&self.connection(chart)).expect("dimension checked by caller")
    }

    pub fn one_form(&mut self, chart: Chart) -> Vec<Expr> {
        (0..chart.dim()).map(|_| self.polynomial(chart, 2, 2)).collect()
    }

    /// A constant positive-definite part plus small polynomial entries.
    pub fn tensor_density(&mut self, chart: Chart, weight: Num) -> TensorDensity2 {
        TensorDensity2::from_fn(chart, weight, |i, j| {
            let base = if i == j { Expr::int(2) } else { Expr::zero() };
            base + self.polynomial(chart, 2, 2).scale(Num::ratio(1, 2))
        })
    }

    pub fn density(&mut self, chart: Chart, weight: Num) -> Density {
        Density::new(Expr::one() + self.polynomial(chart, 3, 3), weight)
    }

    /// A weight in `[-1, 2]` at distance at least `0.05` from both
    /// resonances of dimension `n`.
    pub fn admissible_weight(&mut self, n: usize) -> Num {
        loop {
            let w = Num::ratio(self.rng.gen_range(-12..=24), 12);
            let clear = [n as i64 + 2, n as i64 + 3]
                .iter()
                .all(|&p| (w.to_f64() - p as f64 / (n as f64 + 1.0)).abs() >= 0.05);
            if clear && resonance(n, w).is_none() {
                return w;
            }
        }
    }

    /// An invertible rational matrix of positive determinant with its
    /// exact inverse, both row-major.
    pub fn linear_part(&mut self, n: usize) -> (Vec<Num>, Vec<Num>) {
        loop {
            let a: Vec<Num> = (0..n * n)
                .map(|k| {
                    let off = Num::ratio(self.rng.gen_range(-2..=2), 4);
                    if k / n == k % n {
                        off + Num::ONE
                    } else {
                        off
                    }
                })
                .collect();
            if let Some((inv, det)) = invert(&a, n) {
                if det.to_f64() > 0.25 {
                    return (a, inv);
                }
            }
        }
    }

    /// A non-affine transition `x̄ = h(Ax)` with an explicit inverse:
    /// `h_1 = exp(c y_1)` and `h_k = y_k exp(q_k) + p_k` where `q_k`, `p_k`
    /// depend on `y_1..y_{k-1}` only. The Jacobian determinant is positive
    /// everywhere, and the inverse is defined wherever `x̄_1 > 0`.
    pub fn transition(&mut self, chart: Chart) -> ChartTransition {
        let n = chart.dim();
        let (a, a_inv) = self.linear_part(n);
        let y: Vec<Expr> = (0..n)
            .map(|r| Expr::sum((0..n).map(|c| chart.coord(c).scale(a[r * n + c]))))
            .collect();
        let rate = Num::ratio(self.rng.gen_range(2..=4), 4);
        // q_k and p_k as (coefficient, power) per lower variable y_j
        type Shear = Vec<(Num, i32)>;
        let mut shears: Vec<(Shear, Shear)> = Vec::new();
        for k in 1..n {
            let mut lower = |scale: Num| -> Shear {
                (0..k).map(|_| (self.small_rational() * scale, self.rng.gen_range(1..=2))).collect()
            };
            let q = lower(Num::ratio(1, 4));
            let p = lower(Num::ratio(1, 2));
            shears.push((q, p));
        }
        let build = |terms: &Shear, ys: &[Expr]| Expr::sum(terms.iter().zip(ys).map(|(&(c, k), y)| y.powi(k).scale(c)));
        let mut forward = vec![y[0].scale(rate).exp()];
        for k in 1..n {
            let (q, p) = &shears[k - 1];
            forward.push(&y[k] * build(q, &y).exp() + build(p, &y));
        }
        let mut ys = vec![chart.coord(0).log().scale(Num::ONE / rate)];
        for k in 1..n {
            let (q, p) = &shears[k - 1];
            let yk = (chart.coord(k) - build(p, &ys)) * (-build(q, &ys)).exp();
            ys.push(yk);
        }
        let inverse = (0..n).map(|r| Expr::sum((0..n).map(|c| ys[c].scale(a_inv[r * n + c])))).collect();
        ChartTransition::new(chart, forward, inverse).expect("variables stay within the chart")
    }
}

/// Gauss-Jordan elimination over exact numbers. Returns the inverse and
/// the determinant, or `None` for a singular matrix.
pub fn invert(a: &[Num], n: usize) -> Option<(Vec<Num>, Num)> {
    let mut m = a.to_vec();
    let mut inv: Vec<Num> = (0..n * n).map(|k| if k / n == k % n { Num::ONE } else { Num::ZERO }).collect();
    let mut det = Num::ONE;
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r * n + col].is_zero())?;
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let pv = m[col * n + col];
        det = det * pv;
        for c in 0..n {
            m[col * n + c] = m[col * n + c] / pv;
            inv[col * n + c] = inv[col * n + c] / pv;
        }
        for r in 0..n {
            if r == col || m[r * n + col].is_zero() {
                continue;
            }
            let f = m[r * n + col];
            for c in 0..n {
                m[r * n + c] = m[r * n + c] - f * m[col * n + c];
                inv[r * n + c] = inv[r * n + c] - f * inv[col * n + c];
            }
        }
    }
    Some((inv, det))
}
