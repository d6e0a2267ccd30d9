//! Plain (re-parseable) and LaTeX rendering.

use std::fmt::{self, Write as _};

use super::{Expr, Kind, Num};

// Binding strength of the outermost operator when printed.
const P_SUM: u8 = 1;
const P_PRODUCT: u8 = 2;
const P_UNARY: u8 = 3;
const P_POWER: u8 = 4;
const P_ATOM: u8 = 5;

fn const_prec(c: Num) -> u8 {
    match c {
        Num::Rat(r) if r.is_integer() && !c.is_negative() => P_ATOM,
        Num::Real(_) if !c.is_negative() => P_ATOM,
        Num::Rat(r) if !r.is_integer() => P_PRODUCT,
        _ => P_UNARY,
    }
}

fn prec(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Const(c) => const_prec(*c),
        Kind::Var(_) | Kind::Exp(_) | Kind::Log(_) | Kind::Sin(_) | Kind::Cos(_) => P_ATOM,
        Kind::Add(..) | Kind::Sub(..) => P_SUM,
        Kind::Mul(..) | Kind::Div(..) => P_PRODUCT,
        Kind::Neg(_) => P_UNARY,
        Kind::Pow(..) => P_POWER,
    }
}

fn plain(e: &Expr, out: &mut String, min: u8) {
    let wrap = prec(e) < min;
    if wrap {
        out.push('(');
    }
    match e.kind() {
        Kind::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Kind::Var(v) => {
            let _ = write!(out, "x{v}");
        }
        Kind::Add(a, b) => {
            plain(a, out, P_SUM);
            out.push_str(" + ");
            plain(b, out, P_SUM);
        }
        Kind::Sub(a, b) => {
            plain(a, out, P_SUM);
            out.push_str(" - ");
            plain(b, out, P_PRODUCT);
        }
        Kind::Mul(a, b) => {
            plain(a, out, P_PRODUCT);
            out.push('*');
            plain(b, out, P_PRODUCT);
        }
        Kind::Div(a, b) => {
            plain(a, out, P_PRODUCT);
            out.push('/');
            plain(b, out, P_UNARY);
        }
        Kind::Neg(a) => {
            out.push('-');
            plain(a, out, P_UNARY);
        }
        Kind::Pow(a, k) => {
            plain(a, out, P_ATOM);
            if *k < 0 {
                let _ = write!(out, "^({k})");
            } else {
                let _ = write!(out, "^{k}");
            }
        }
        Kind::Exp(a) | Kind::Log(a) | Kind::Sin(a) | Kind::Cos(a) => {
            out.push_str(func_name(e));
            out.push('(');
            plain(a, out, 0);
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

fn func_name(e: &Expr) -> &'static str {
    match e.kind() {
        Kind::Exp(_) => "exp",
        Kind::Log(_) => "log",
        Kind::Sin(_) => "sin",
        Kind::Cos(_) => "cos",
        _ => unreachable!(),
    }
}

fn latex(e: &Expr, out: &mut String, min: u8) {
    let wrap = prec(e) < min;
    if wrap {
        out.push_str("\\left(");
    }
    match e.kind() {
        Kind::Const(Num::Rat(r)) if !r.is_integer() => {
            if *r.numer() < 0 {
                out.push('-');
            }
            let _ = write!(out, "\\frac{{{}}}{{{}}}", r.numer().abs(), r.denom());
        }
        Kind::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Kind::Var(v) => {
            let _ = write!(out, "x^{{{v}}}");
        }
        Kind::Add(a, b) => {
            latex(a, out, P_SUM);
            out.push_str(" + ");
            latex(b, out, P_SUM);
        }
        Kind::Sub(a, b) => {
            latex(a, out, P_SUM);
            out.push_str(" - ");
            latex(b, out, P_PRODUCT);
        }
        Kind::Mul(a, b) => {
            latex(a, out, P_PRODUCT);
            out.push_str(" \\cdot ");
            latex(b, out, P_PRODUCT);
        }
        Kind::Div(a, b) => {
            out.push_str("\\frac{");
            latex(a, out, 0);
            out.push_str("}{");
            latex(b, out, 0);
            out.push('}');
        }
        Kind::Neg(a) => {
            out.push('-');
            latex(a, out, P_UNARY);
        }
        Kind::Pow(a, k) => {
            // Superscripted bases need braces to avoid a double superscript.
            let braced = matches!(a.kind(), Kind::Var(_) | Kind::Exp(_));
            if braced {
                out.push('{');
            }
            latex(a, out, P_ATOM);
            if braced {
                out.push('}');
            }
            let _ = write!(out, "^{{{k}}}");
        }
        Kind::Exp(a) => {
            out.push_str("e^{");
            latex(a, out, 0);
            out.push('}');
        }
        Kind::Log(a) | Kind::Sin(a) | Kind::Cos(a) => {
            let _ = write!(out, "\\{}", func_name(e));
            out.push_str("\\left(");
            latex(a, out, 0);
            out.push_str("\\right)");
        }
    }
    if wrap {
        out.push_str("\\right)");
    }
}

impl Expr {
    pub fn to_latex(&self) -> String {
        let mut s = String::new();
        latex(self, &mut s, 0);
        s
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        plain(self, &mut s, 0);
        f.write_str(&s)
    }
}
