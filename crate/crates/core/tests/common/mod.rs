//! Independent re-derivations used as oracles by the integration and
//! acceptance tests. Everything here is written from the formulas directly,
//! with explicit index loops, and shares no code with the library beyond
//! the expression type.
#![allow(dead_code)]

use projlap::expr::{compare, Expr, Num, SampleDomain};
use projlap::geom::{Chart, Connection, ProjectiveClass, TensorDensity2};
use projlap::operators::DensityOperator;

/// `[k][i][j]` coefficients.
pub type T3 = Vec<Vec<Vec<Expr>>>;
pub type M2 = Vec<Vec<Expr>>;

pub fn d(c: Chart, e: &Expr, a: usize) -> Expr {
    e.diff(c.var(a))
}

fn q(p: i64, r: i64) -> Num {
    Num::ratio(p, r)
}

pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
    terms.into_iter().fold(Expr::zero(), |acc, t| acc + t)
}

pub fn conn_table(c: &Connection) -> T3 {
    let n = c.dim();
    (0..n).map(|k| (0..n).map(|i| (0..n).map(|j| c.get(k, i, j).clone()).collect()).collect()).collect()
}

pub fn class_table(p: &ProjectiveClass) -> T3 {
    let n = p.dim();
    (0..n).map(|k| (0..n).map(|i| (0..n).map(|j| p.get(k, i, j).clone()).collect()).collect()).collect()
}

pub fn tensor_table(s: &TensorDensity2) -> M2 {
    let n = s.dim();
    (0..n).map(|i| (0..n).map(|j| s.get(i, j).clone()).collect()).collect()
}

pub fn flatten3(t: &T3) -> Vec<Expr> {
    t.iter().flatten().flatten().cloned().collect()
}

pub fn flatten2(t: &M2) -> Vec<Expr> {
    t.iter().flatten().cloned().collect()
}

/// `Γ^k_ij − (δ^k_i Γ^s_sj + δ^k_j Γ^s_si)/(n+1)`.
pub fn trace_free_part(g: &T3) -> T3 {
    let n = g.len();
    let tr: Vec<Expr> = (0..n).map(|j| sum((0..n).map(|s| g[s][s][j].clone()))).collect();
    let mut out = g.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut t = Expr::zero();
                if k == i {
                    t = t + &tr[j];
                }
                if k == j {
                    t = t + &tr[i];
                }
                out[k][i][j] = &g[k][i][j] - t.scale(q(1, n as i64 + 1));
            }
        }
    }
    out
}

/// `∂_s Π^s_ij − Π^p_qi Π^q_pj`.
pub fn curvature_term(c: Chart, p: &T3) -> M2 {
    let n = p.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let div = sum((0..n).map(|s| d(c, &p[s][i][j], s)));
                    let quad = sum((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| &p[a][b][i] * &p[b][a][j]));
                    div - quad
                })
                .collect()
        })
        .collect()
}

/// `∂_j S^ij`.
pub fn divergence(c: Chart, s: &M2) -> Vec<Expr> {
    let n = s.len();
    (0..n).map(|i| sum((0..n).map(|j| d(c, &s[i][j], j)))).collect()
}

/// `S^jk Π^i_jk`.
pub fn contraction(s: &M2, p: &T3) -> Vec<Expr> {
    let n = s.len();
    (0..n)
        .map(|i| sum((0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| &s[j][k] * &p[i][j][k])))
        .collect()
}

/// `γ^i`, `θ` for weight `λ`, optionally shifted by a density `ρ|Dx|^σ`.
pub fn gamma_theta(c: Chart, s: &M2, p: &T3, lambda: Num, rho: Option<(&Expr, Num)>) -> (Vec<Expr>, Expr) {
    let n = s.len();
    let ni = n as i64;
    let k = q(ni + 4, ni + 2);
    let (lam, grad_log) = match rho {
        Some((r, sigma)) => {
            let lr = r.log();
            (lambda + k * sigma, Some((0..n).map(|j| d(c, &lr, j)).collect::<Vec<_>>()))
        }
        None => (lambda, None),
    };
    let n1 = Num::int(ni + 1);
    let pre_g = n1 / (Num::int(ni + 3) - lam * n1);
    let pre_t = n1 / (Num::int(ni + 2) - lam * n1);
    let div = divergence(c, s);
    let con = contraction(s, p);
    let gamma: Vec<Expr> = (0..n)
        .map(|i| {
            let mut e = &div[i] + &con[i];
            if let Some(g) = &grad_log {
                e = e + sum((0..n).map(|j| &s[i][j] * &g[j])).scale(k);
            }
            e.scale(pre_g)
        })
        .collect();
    let r = curvature_term(c, p);
    let mut t = sum((0..n).map(|i| d(c, &gamma[i], i)))
        + sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| &s[i][j] * &r[i][j])).scale(q(ni + 1, ni - 1));
    if let Some(g) = &grad_log {
        t = t + sum((0..n).map(|i| &gamma[i] * &g[i])).scale(k);
    }
    (gamma, t.scale(pre_t))
}

/// Components of an operator in the `(S, γ, θ, a, b, c)` normal form.
#[derive(Clone, Debug)]
pub struct Coeffs {
    pub s: M2,
    pub gamma: Vec<Expr>,
    pub theta: Expr,
    pub a: Vec<Expr>,
    pub b: Expr,
    pub c: Expr,
}

/// The operator obtained by lifting the bracket and reading off the
/// coefficients of `∂_i` and `∂_0`.
pub fn lemma(c: Chart, s: &M2, gamma: &[Expr], theta: &Expr, p: &T3, lambda: Num) -> Coeffs {
    let n = s.len();
    let ni = n as i64;
    let c1 = (lambda * Num::int(ni) + lambda + Num::ONE) * Num::int(2) / Num::int((ni + 1) * (ni + 4));
    let c2 = (lambda * Num::int(2) + lambda * Num::int(2 * ni) - Num::int(ni)) / Num::int((ni + 1) * (ni + 4));
    let div = divergence(c, s);
    let con = contraction(s, p);
    let a = (0..n)
        .map(|i| div[i].scale(q(2, ni + 4)) + gamma[i].scale(c1) - con[i].scale(q(ni + 2, ni + 4)))
        .collect();
    let r = curvature_term(c, p);
    let sr = sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| &s[i][j] * &r[i][j]));
    let b = sum((0..n).map(|k| d(c, &gamma[k], k))).scale(q(2, ni + 4)) + theta.scale(c2)
        - sr.scale(q((ni + 1) * (ni + 2), (ni - 1) * (ni + 4)));
    Coeffs { s: s.clone(), gamma: gamma.to_vec(), theta: theta.clone(), a, b, c: Expr::zero() }
}

/// The canonical operator generating the bracket: `a^i = ∂_jS^ij + (λ−1)γ^i`,
/// `b = ∂_iγ^i + (λ−1)θ`.
pub fn canonical(c: Chart, s: &M2, gamma: &[Expr], theta: &Expr, lambda: Num) -> Coeffs {
    let n = s.len();
    let l1 = lambda - Num::ONE;
    let div = divergence(c, s);
    let a = (0..n).map(|i| &div[i] + gamma[i].scale(l1)).collect();
    let b = sum((0..n).map(|i| d(c, &gamma[i], i))) + theta.scale(l1);
    Coeffs { s: s.clone(), gamma: gamma.to_vec(), theta: theta.clone(), a, b, c: Expr::zero() }
}

/// Worst relative defect between two expression lists.
pub fn worst(a: &[Expr], b: &[Expr], domain: &SampleDomain) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| compare(x, y, domain).expect("evaluation").worst_defect).fold(0.0, f64::max)
}

pub fn op_defect(op: &DensityOperator, co: &Coeffs, domain: &SampleDomain) -> f64 {
    let mut lhs = op.s.components().to_vec();
    lhs.extend(op.gamma.iter().cloned());
    lhs.push(op.theta.clone());
    lhs.extend(op.a.iter().cloned());
    lhs.push(op.b.clone());
    lhs.push(op.c.clone());
    let mut rhs = flatten2(&co.s);
    rhs.extend(co.gamma.iter().cloned());
    rhs.push(co.theta.clone());
    rhs.extend(co.a.iter().cloned());
    rhs.push(co.b.clone());
    rhs.push(co.c.clone());
    worst(&lhs, &rhs, domain)
}

/// The member of the pencil acting on weight `μ`, written from the
/// display: `S∂∂φ + A^i∂_iφ + Bφ`.
pub fn pencil_apply(c: Chart, s: &M2, gamma: &[Expr], theta: &Expr, p: &T3, lambda: Num, mu: Num, phi: &Expr) -> Expr {
    let n = s.len();
    let ni = n as i64;
    let c1 = (lambda + Num::int(ni) * lambda + Num::ONE) * Num::int(2) / Num::int((ni + 1) * (ni + 4));
    let c2 = (Num::int(2) * lambda + Num::int(2 * ni) * lambda - Num::int(ni)) / Num::int((ni + 1) * (ni + 4));
    let div = divergence(c, s);
    let con = contraction(s, p);
    let r = curvature_term(c, p);
    let mut out = Expr::zero();
    for i in 0..n {
        let di = d(c, phi, i);
        for j in 0..n {
            out = out + &s[i][j] * d(c, &di, j);
        }
        let first = div[i].scale(q(2, ni + 4)) + gamma[i].scale(c1 + Num::int(2) * mu) - con[i].scale(q(ni + 2, ni + 4));
        out = out + first * di;
    }
    let div_g = sum((0..n).map(|k| d(c, &gamma[k], k)));
    let sr = sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| &s[i][j] * &r[i][j]));
    let zeroth = div_g.scale(Num::int(2) * mu / Num::int(ni + 4)) + theta.scale(mu * (c2 + mu))
        - sr.scale(mu * q((ni + 1) * (ni + 2), (ni - 1) * (ni + 4)));
    out + zeroth * phi
}

/// `S^ij ∂_i∂_j f + ((2/(n+3))∂_jS^ij − ((n+1)/(n+3)) S^jkΠ^i_jk) ∂_i f`.
pub fn laplacian_apply(c: Chart, s: &M2, p: &T3, f: &Expr) -> Expr {
    let n = s.len();
    let ni = n as i64;
    let div = divergence(c, s);
    let con = contraction(s, p);
    let mut out = Expr::zero();
    for i in 0..n {
        let di = d(c, f, i);
        for j in 0..n {
            out = out + &s[i][j] * d(c, &di, j);
        }
        out = out + (div[i].scale(q(2, ni + 3)) - con[i].scale(q(ni + 1, ni + 3))) * di;
    }
    out
}

fn det(m: &M2) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut out = Expr::zero();
    for col in 0..n {
        let minor: M2 = (1..n).map(|r| (0..n).filter(|&c| c != col).map(|c| m[r][c].clone()).collect()).collect();
        let term = &m[0][col] * det(&minor);
        out = if col % 2 == 0 { out + term } else { out - term };
    }
    out
}

/// A coordinate change `y = F(x)` with inverse `x = G(y)`, both written in
/// the variables of one chart.
#[derive(Clone, Debug)]
pub struct Change {
    pub chart: Chart,
    pub forward: Vec<Expr>,
    pub inverse: Vec<Expr>,
}

impl Change {
    fn subs_all(&self, e: &Expr, with: &[Expr]) -> Expr {
        let mut map = vec![None; self.chart.var(self.chart.dim() - 1) + 1];
        for (a, w) in with.iter().enumerate() {
            map[self.chart.var(a)] = Some(w.clone());
        }
        e.subs(&map)
    }

    /// `e(x)` rewritten as a function of `y`.
    pub fn to_new(&self, e: &Expr) -> Expr {
        self.subs_all(e, &self.inverse)
    }

    /// `∂y^i/∂x^a`, in `x`.
    pub fn jacobian(&self) -> M2 {
        let n = self.chart.dim();
        (0..n).map(|i| (0..n).map(|a| d(self.chart, &self.forward[i], a)).collect()).collect()
    }

    pub fn jacobian_det(&self) -> Expr {
        det(&self.jacobian())
    }

    /// `J^{-w}` in `x`, for a positive Jacobian.
    fn det_power(&self, w: Num) -> Expr {
        if w.is_zero() {
            Expr::one()
        } else {
            self.jacobian_det().log().scale(-w).exp()
        }
    }

    /// The coefficient of `φ|Dx|^w` in the new chart.
    pub fn density(&self, phi: &Expr, w: Num) -> Expr {
        self.to_new(&(self.det_power(w) * phi))
    }

    /// `S̄^ij = J^{-λ} ∂_a y^i ∂_b y^j S^ab`, in `y`.
    pub fn tensor(&self, s: &M2, lambda: Num) -> M2 {
        let n = s.len();
        let jac = self.jacobian();
        let f = self.det_power(lambda);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = sum((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| &jac[i][a] * &jac[j][b] * &s[a][b]));
                        self.to_new(&(&f * e))
                    })
                    .collect()
            })
            .collect()
    }

    /// `Γ̄^k_ij = ∂_a y^k (Γ^a_bc ∂_i x^b ∂_j x^c + ∂_i∂_j x^a)`, in `y`.
    pub fn connection(&self, g: &T3) -> T3 {
        let c = self.chart;
        let n = g.len();
        let jac_new: M2 = self.jacobian().iter().map(|row| row.iter().map(|e| self.to_new(e)).collect()).collect();
        let g_new: T3 = g.iter().map(|m| m.iter().map(|r| r.iter().map(|e| self.to_new(e)).collect()).collect()).collect();
        let dx: M2 = (0..n).map(|b| (0..n).map(|i| d(c, &self.inverse[b], i)).collect()).collect();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                sum((0..n).map(|a| {
                                    let inner = sum((0..n)
                                        .flat_map(|b| (0..n).map(move |cc| (b, cc)))
                                        .map(|(b, cc)| &g_new[a][b][cc] * &dx[b][i] * &dx[cc][j]));
                                    &jac_new[k][a] * (inner + d(c, &dx[a][i], j))
                                }))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// The induced change `(x0 + log J, F)` on the Thomas chart.
    pub fn lifted(&self) -> Change {
        let n = self.chart.dim();
        let t = Chart::thomas(n);
        let log_j = self.jacobian_det().log();
        let mut forward = vec![t.coord(0) + &log_j];
        forward.extend(self.forward.iter().cloned());
        let mut inverse = vec![t.coord(0) - self.to_new(&log_j)];
        inverse.extend(self.inverse.iter().cloned());
        Change { chart: t, forward, inverse }
    }
}

/// A projective class from a table, mirrored from its `i <= j` entries so
/// that symmetry holds structurally.
pub fn class_from_table(chart: Chart, t: &T3, domain: &SampleDomain) -> projlap::Result<ProjectiveClass> {
    let mirrored = Connection::from_fn(chart, |k, i, j| t[k][i][j].clone());
    ProjectiveClass::new(chart, mirrored.components().to_vec(), domain)
}
