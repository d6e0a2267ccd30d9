//! Box quadrature of density pairings and the self-adjointness check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Num, Tape};
use crate::geom::Density;
use crate::operators::DensityOperator;

/// Tolerance on the weight condition of the pairing.
const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Composite Simpson rule on a tensor grid over a box in the base
/// coordinates `x1..xn`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    bounds: Vec<(f64, f64)>,
    points: usize,
}

impl QuadratureSpec {
    pub fn new(bounds: Vec<(f64, f64)>, points: usize) -> Result<QuadratureSpec> {
        if points < 11 || points.is_multiple_of(2) {
            return Err(Error::Quadrature(format!("grid needs an odd number >= 11 of points per axis, got {points}")));
        }
        if bounds.is_empty() {
            return Err(Error::Quadrature("empty box".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Quadrature(format!("invalid interval [{lo}, {hi}]")));
            }
        }
        Ok(QuadratureSpec { bounds, points })
    }

    /// `[-2, 2]^n` with 101 points per axis for `n = 2` and 41 otherwise.
    pub fn default_for(n: usize) -> QuadratureSpec {
        let points = if n <= 2 { 101 } else { 41 };
        QuadratureSpec { bounds: vec![(-2.0, 2.0); n], points }
    }

    pub fn with_points(&self, points: usize) -> Result<QuadratureSpec> {
        QuadratureSpec::new(self.bounds.clone(), points)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn points(&self) -> usize {
        self.points
    }

    fn axis(&self, a: usize) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.bounds[a];
        let m = self.points;
        let h = (hi - lo) / (m - 1) as f64;
        let nodes = (0..m).map(|k| lo + h * k as f64).collect();
        let weights = (0..m)
            .map(|k| {
                let c = if k == 0 || k == m - 1 {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        (nodes, weights)
    }

    /// All nodes with their weights. Points carry a leading `x0 = 0` slot
    /// so chart expressions evaluate directly.
    pub fn grid(&self) -> Vec<(Vec<f64>, f64)> {
        let axes: Vec<_> = (0..self.dim()).map(|a| self.axis(a)).collect();
        let total = self.points.pow(self.dim() as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; self.dim() + 1];
                let mut w = 1.0;
                for (a, (nodes, weights)) in axes.iter().enumerate() {
                    let k = idx % self.points;
                    idx /= self.points;
                    p[a + 1] = nodes[k];
                    w *= weights[k];
                }
                (p, w)
            })
            .collect()
    }

    fn contains_ball(&self, center: &[f64], radius: f64) -> bool {
        self.bounds.iter().zip(center).all(|(&(lo, hi), &c)| c - radius > lo && c + radius < hi)
    }
}

/// Value, gradient and Hessian (row-major) at a point.
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

/// A compactly supported test density `exp(−1/(1−r²))|Dx|^μ`, with `r` the
/// distance to `center` divided by `radius`.
#[derive(Clone, Debug, Serialize)]
pub struct BumpDensity {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(serialize_with = "serialize_num")]
    pub weight: Num,
}

fn serialize_num<S: serde::Serializer>(n: &Num, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

impl BumpDensity {
    pub fn new(center: Vec<f64>, radius: f64, weight: Num) -> BumpDensity {
        assert!(radius > 0.0);
        BumpDensity { center, radius, weight }
    }

    /// `point` uses chart layout: index 0 is `x0` and is ignored.
    pub fn jet(&self, point: &[f64]) -> Jet {
        let n = self.center.len();
        let r2 = self.radius * self.radius;
        let d: Vec<f64> = (0..n).map(|i| point[i + 1] - self.center[i]).collect();
        let u = d.iter().map(|x| x * x).sum::<f64>() / r2;
        if u >= 1.0 {
            return Jet { value: 0.0, grad: vec![0.0; n], hess: vec![0.0; n * n] };
        }
        let s = 1.0 - u;
        let value = (-1.0 / s).exp();
        // φ = e^{g(u)}, g = −1/(1−u)
        let g1 = -1.0 / (s * s);
        let g2 = -2.0 / (s * s * s);
        let du: Vec<f64> = d.iter().map(|x| 2.0 * x / r2).collect();
        let grad = du.iter().map(|ui| value * g1 * ui).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let uij = if i == j { 2.0 / r2 } else { 0.0 };
                hess[i * n + j] = value * ((g1 * g1 + g2) * du[i] * du[j] + g1 * uij);
            }
        }
        Jet { value, grad, hess }
    }
}

/// Something that can be integrated against: a weight and a pointwise
/// coefficient.
pub trait Field: Sync {
    fn weight(&self) -> Num;
    /// Ball containing the support, if compact.
    fn support(&self) -> Option<(&[f64], f64)>;
    fn values(&self, grid: &[(Vec<f64>, f64)]) -> Result<Vec<f64>>;
}

impl Field for BumpDensity {
    fn weight(&self) -> Num {
        self.weight
    }

    fn support(&self) -> Option<(&[f64], f64)> {
        Some((&self.center, self.radius))
    }

    fn values(&self, grid: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
        Ok(grid.par_iter().map(|(p, _)| self.jet(p).value).collect())
    }
}

impl Field for Density {
    fn weight(&self) -> Num {
        self.weight
    }

    fn support(&self) -> Option<(&[f64], f64)> {
        None
    }

    fn values(&self, grid: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
        expr_values(&self.coefficient, grid)
    }
}

/// Pointwise product of fields; weights add.
pub struct Product<'a>(pub Vec<&'a dyn Field>);

impl Field for Product<'_> {
    fn weight(&self) -> Num {
        self.0.iter().fold(Num::ZERO, |w, f| w + f.weight())
    }

    fn support(&self) -> Option<(&[f64], f64)> {
        self.0
            .iter()
            .filter_map(|f| f.support())
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn values(&self, grid: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
        let mut acc = vec![1.0; grid.len()];
        for f in &self.0 {
            for (a, v) in acc.iter_mut().zip(f.values(grid)?) {
                *a *= v;
            }
        }
        Ok(acc)
    }
}

fn expr_values(e: &Expr, grid: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
    let tape = Tape::compile(std::slice::from_ref(e));
    grid.par_iter().map(|(p, _)| Ok(tape.eval(p)?[0])).collect()
}

fn require_support(q: &QuadratureSpec, fields: &[&dyn Field]) -> Result<()> {
    let mut compact = false;
    for f in fields {
        if let Some((c, r)) = f.support() {
            if c.len() != q.dim() || !q.contains_ball(c, r) {
                return Err(Error::SupportEscapesBox);
            }
            compact = true;
        }
    }
    if compact {
        Ok(())
    } else {
        Err(Error::SupportEscapesBox)
    }
}

fn integrate(q: &QuadratureSpec, fields: &[&dyn Field]) -> Result<f64> {
    require_support(q, fields)?;
    let grid = q.grid();
    let mut acc: Vec<f64> = grid.iter().map(|(_, w)| *w).collect();
    for f in fields {
        for (a, v) in acc.iter_mut().zip(f.values(&grid)?) {
            *a *= v;
        }
    }
    Ok(acc.iter().sum())
}

/// `∫φψ` over the box when the weights add up to 1, otherwise 0.
pub fn scalar_product(a: &dyn Field, b: &dyn Field, q: &QuadratureSpec) -> Result<f64> {
    if ((a.weight() + b.weight()).to_f64() - 1.0).abs() > WEIGHT_TOLERANCE {
        return Ok(0.0);
    }
    integrate(q, &[a, b])
}

/// `∫φψρ` when the weights of `a`, `b` and `ρ|Dx|^σ` add up to 1.
pub fn modified_scalar_product(a: &dyn Field, b: &dyn Field, rho: &Density, q: &QuadratureSpec) -> Result<f64> {
    if ((a.weight() + b.weight() + rho.weight).to_f64() - 1.0).abs() > WEIGHT_TOLERANCE {
        return Ok(0.0);
    }
    integrate(q, &[a, b, rho])
}

/// Outcome of a self-adjointness check.
#[derive(Clone, Debug, Serialize)]
pub struct SelfAdjointReport {
    pub worst_defect: f64,
    pub pairs: usize,
    pub grid: usize,
    pub seed: u64,
}

/// Coefficients of an operator tabulated on the grid, in the layout
/// `[S (n²), γ (n), θ, a (n), b, c]`.
struct Tabulated {
    n: usize,
    values: Vec<Vec<f64>>,
}

impl Tabulated {
    fn new(op: &DensityOperator, grid: &[(Vec<f64>, f64)]) -> Result<Tabulated> {
        let mut exprs: Vec<Expr> = op.s.components().to_vec();
        exprs.extend(op.gamma.iter().cloned());
        exprs.push(op.theta.clone());
        exprs.extend(op.a.iter().cloned());
        exprs.push(op.b.clone());
        exprs.push(op.c.clone());
        let tape = Tape::compile(&exprs);
        let values = grid.par_iter().map(|(p, _)| tape.eval(p)).collect::<std::result::Result<_, _>>()?;
        Ok(Tabulated { n: op.dim(), values })
    }

    /// `Δ(bump)` at grid node `k`, for a bump of weight `mu`.
    fn apply(&self, k: usize, jet: &Jet, mu: f64) -> f64 {
        let n = self.n;
        let v = &self.values[k];
        let (s, rest) = v.split_at(n * n);
        let (gamma, rest) = rest.split_at(n);
        let theta = rest[0];
        let a = &rest[1..1 + n];
        let (b, c) = (rest[1 + n], rest[2 + n]);
        let mut out = 0.0;
        for i in 0..n {
            for j in 0..n {
                out += s[i * n + j] * jet.hess[i * n + j];
            }
            out += (2.0 * mu * gamma[i] + a[i]) * jet.grad[i];
        }
        out + (mu * mu * theta + mu * b + c) * jet.value
    }
}

/// Random bump pairs with a common radius, nearly filling the box, and
/// centres offset by 10 to 20 percent of the radius in a direction with
/// positive components.
///
/// The standard bump is steep near the edge of its support, and Simpson's
/// rule resolves it to about `1e-4` only with some 45 or more grid steps
/// per radius. Large, strongly overlapping bumps keep the test in that
/// regime.
pub fn bump_pairs(q: &QuadratureSpec, mu: Num, nu: Num, count: usize, seed: u64) -> Vec<(BumpDensity, BumpDensity)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = q.dim();
    (0..count)
        .map(|_| {
            let frac = rng.gen_range(0.1..0.2);
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let dir: Vec<f64> = dir.iter().map(|x| x / norm).collect();
            let radius = q
                .bounds
                .iter()
                .zip(&dir)
                .map(|(&(lo, hi), d)| 0.98 * (hi - lo) / (2.0 + frac * d))
                .fold(f64::INFINITY, f64::min);
            let mut first = Vec::with_capacity(n);
            let mut second = Vec::with_capacity(n);
            for (&(lo, hi), d) in q.bounds.iter().zip(&dir) {
                let step = frac * radius * d;
                let slack = (hi - lo) - 2.0 * radius - step;
                let c = lo + radius + slack * rng.gen_range(0.1..0.9);
                first.push(c);
                second.push(c + step);
            }
            let (a, b) = if rng.gen_bool(0.5) { (first, second) } else { (second, first) };
            (BumpDensity::new(a, radius, mu), BumpDensity::new(b, radius, nu))
        })
        .collect()
}

/// `max |⟨Δφ,ψ⟩ − ⟨φ,Δψ⟩| / (1 + |⟨Δφ,ψ⟩|)` over random bump pairs, with
/// `φ` of weight `mu` and `ψ` of the complementary weight. With `rho` the
/// pairing is `∫φψρ` and `ρ`'s weight enters the complement.
pub fn check_self_adjoint(
    op: &DensityOperator,
    mu: Num,
    q: &QuadratureSpec,
    rho: Option<&Density>,
    pairs: usize,
    seed: u64,
) -> Result<SelfAdjointReport> {
    if q.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: q.dim() });
    }
    let sigma = rho.map_or(Num::ZERO, |r| r.weight);
    let nu = Num::ONE - mu - op.weight() - sigma;
    let grid = q.grid();
    let table = Tabulated::new(op, &grid)?;
    let rho_values = match rho {
        Some(r) => Some(expr_values(&r.coefficient, &grid)?),
        None => None,
    };
    let (muf, nuf) = (mu.to_f64(), nu.to_f64());
    let mut worst: f64 = 0.0;
    for (phi, psi) in bump_pairs(q, mu, nu, pairs, seed) {
        require_support(q, &[&phi, &psi])?;
        let (lhs, rhs) = grid
            .par_iter()
            .enumerate()
            .map(|(k, (p, w))| {
                let (jp, js) = (phi.jet(p), psi.jet(p));
                if jp.value == 0.0 && js.value == 0.0 {
                    return (0.0, 0.0);
                }
                let weight = w * rho_values.as_ref().map_or(1.0, |r| r[k]);
                (weight * table.apply(k, &jp, muf) * js.value, weight * jp.value * table.apply(k, &js, nuf))
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok(SelfAdjointReport { worst_defect: worst, pairs, grid: q.points(), seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geom::{Chart, TensorDensity2};

    fn square(points: usize) -> QuadratureSpec {
        QuadratureSpec::new(vec![(-2.0, 2.0); 2], points).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(QuadratureSpec::new(vec![(0.0, 1.0)], 10).is_err());
        assert!(QuadratureSpec::new(vec![(0.0, 1.0)], 9).is_err());
        assert!(QuadratureSpec::new(vec![(1.0, 0.0)], 11).is_err());
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let q = QuadratureSpec::new(vec![(0.0, 1.0), (0.0, 2.0)], 11).unwrap();
        let total: f64 = q.grid().iter().map(|(p, w)| w * p[1].powi(3) * p[2]).sum();
        assert!((total - 0.25 * 2.0).abs() < 1e-13);
    }

    #[test]
    fn bump_jet_matches_finite_differences() {
        let b = BumpDensity::new(vec![0.1, -0.2], 0.9, Num::ZERO);
        let p = [0.0, 0.3, 0.1];
        let jet = b.jet(&p);
        let h = 1e-5;
        for i in 0..2 {
            let mut plus = p;
            let mut minus = p;
            plus[i + 1] += h;
            minus[i + 1] -= h;
            let fd = (b.jet(&plus).value - b.jet(&minus).value) / (2.0 * h);
            assert!((fd - jet.grad[i]).abs() < 1e-8);
            for j in 0..2 {
                let fd2 = (b.jet(&plus).grad[j] - b.jet(&minus).grad[j]) / (2.0 * h);
                assert!((fd2 - jet.hess[i * 2 + j]).abs() < 1e-7);
            }
        }
        assert_eq!(b.jet(&[0.0, 2.0, 2.0]).value, 0.0);
    }

    #[test]
    fn weights_not_summing_to_one_pair_to_zero() {
        let b = BumpDensity::new(vec![0.0, 0.0], 1.0, Num::ZERO);
        let c = BumpDensity::new(vec![0.2, 0.0], 1.0, Num::ZERO);
        assert_eq!(scalar_product(&b, &c, &square(21)).unwrap(), 0.0);
    }

    #[test]
    fn pairing_with_volume_integrates_bump() {
        let b = BumpDensity::new(vec![0.0, 0.0], 1.0, Num::ZERO);
        let got = scalar_product(&b, &Density::volume(), &square(201)).unwrap();
        // polar oracle: 2π ∫_0^1 r exp(−1/(1−r²)) dr by midpoint rule
        let m = 200_000;
        let polar: f64 = (0..m)
            .map(|k| {
                let r = (k as f64 + 0.5) / m as f64;
                r * (-1.0 / (1.0 - r * r)).exp()
            })
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI
            / m as f64;
        assert!((got - polar).abs() < 1e-6, "{got} vs {polar}");
    }

    #[test]
    fn support_outside_box_is_an_error() {
        let b = BumpDensity::new(vec![1.5, 0.0], 1.0, Num::ZERO);
        assert!(matches!(scalar_product(&b, &Density::volume(), &square(21)), Err(Error::SupportEscapesBox)));
        let whole = Density::new(Expr::one(), Num::ZERO);
        assert!(matches!(scalar_product(&whole, &Density::volume(), &square(21)), Err(Error::SupportEscapesBox)));
    }

    #[test]
    fn modified_product_with_unit_density_reduces() {
        let b = BumpDensity::new(vec![0.0, 0.1], 0.8, Num::ZERO);
        let c = BumpDensity::new(vec![0.2, 0.0], 0.8, Num::ONE);
        let plain = scalar_product(&b, &c, &square(51)).unwrap();
        let modified = modified_scalar_product(&b, &c, &Density::function(Expr::one()), &square(51)).unwrap();
        assert!((plain - modified).abs() < 1e-15);
        let rho = Density::new(parse("exp(x1)").unwrap(), Num::ONE);
        let c0 = BumpDensity::new(vec![0.2, 0.0], 0.8, Num::ZERO);
        let with_rho = modified_scalar_product(&b, &c0, &rho, &square(51)).unwrap();
        assert!(with_rho > 0.0 && (with_rho - plain).abs() > 1e-6);
    }

    #[test]
    fn pairing_is_invariant_under_moving_a_factor() {
        let q = QuadratureSpec::default_for(2).with_points(61).unwrap();
        let a = BumpDensity::new(vec![0.1, -0.2], 1.5, Num::ratio(1, 3));
        let b = Density::new(parse("1 + x1*x2^2").unwrap(), Num::ratio(1, 4));
        let c = Density::new(parse("exp(x2/3) - x1/5").unwrap(), Num::ratio(5, 12));
        let rho = Density::new(parse("exp(x1)").unwrap(), Num::ratio(-1, 2));
        let lhs = scalar_product(&a, &Product(vec![&b, &c]), &q).unwrap();
        let rhs = scalar_product(&Product(vec![&a, &b]), &c, &q).unwrap();
        assert!(lhs.abs() > 0.1 && (lhs - rhs).abs() <= 1e-12 * lhs.abs(), "{lhs} {rhs}");
        let c2 = Density::new(c.coefficient.clone(), c.weight + Num::ratio(1, 2));
        let lhs = modified_scalar_product(&a, &Product(vec![&b, &c2]), &rho, &q).unwrap();
        let rhs = modified_scalar_product(&Product(vec![&a, &b]), &c2, &rho, &q).unwrap();
        assert!(lhs.abs() > 0.1 && (lhs - rhs).abs() <= 1e-6 * lhs.abs(), "{lhs} {rhs}");
    }

    #[test]
    fn doubling_the_grid_shrinks_the_defect() {
        let s = TensorDensity2::from_fn(Chart::base(2), Num::ZERO, |i, j| {
            let base = if i == j { Expr::one() } else { Expr::zero() };
            base + parse("x1*x2/8").unwrap()
        });
        let op = crate::operators::main_operator(&s, &crate::geom::ProjectiveClass::flat(Chart::base(2))).unwrap();
        let mut last = f64::INFINITY;
        for points in [41, 81, 161] {
            let q = QuadratureSpec::default_for(2).with_points(points).unwrap();
            let d = check_self_adjoint(&op, Num::ratio(1, 3), &q, None, 3, 5).unwrap().worst_defect;
            assert!(d <= 1e-10 || d * 4.0 <= last, "{points}: {d} after {last}");
            last = d;
        }
    }

    #[test]
    fn bump_pairs_fit_the_box() {
        let q = QuadratureSpec::new(vec![(-1.0, 3.0), (0.0, 2.0)], 51).unwrap();
        for (a, b) in bump_pairs(&q, Num::ZERO, Num::ONE, 20, 4) {
            assert!(q.contains_ball(&a.center, a.radius) && q.contains_ball(&b.center, b.radius));
            assert_eq!(a.radius, b.radius);
            assert!(a.radius > 0.9);
        }
    }

    #[test]
    fn zero_operator_is_self_adjoint() {
        let op = DensityOperator::zero(Chart::base(2), Num::ZERO);
        let r = check_self_adjoint(&op, Num::ratio(1, 3), &square(31), None, 3, 1).unwrap();
        assert_eq!(r.worst_defect, 0.0);
    }

    #[test]
    fn flat_laplacian_is_self_adjoint_but_drift_is_not() {
        let chart = Chart::base(2);
        let op = DensityOperator { s: TensorDensity2::identity(chart, Num::ZERO), ..DensityOperator::zero(chart, Num::ZERO) };
        let ok = check_self_adjoint(&op, Num::ZERO, &square(101), None, 5, 2).unwrap();
        assert!(ok.worst_defect < 1e-4, "{}", ok.worst_defect);
        let drift = op.with_first_order_shift(&[Expr::ratio(1, 10), Expr::ratio(1, 10)]);
        let bad = check_self_adjoint(&drift, Num::ZERO, &square(101), None, 5, 2).unwrap();
        assert!(bad.worst_defect > 1e-2, "{}", bad.worst_defect);
    }
}
