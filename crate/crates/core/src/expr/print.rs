//! Plain-text printer (same grammar the parser accepts) and a LaTeX renderer.

use std::fmt::{self, Write as _};

use num_traits::{One, Signed};

use super::{AtomKind, DerivSym, Expr, Rational};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    let mut out = String::new();
    write_prec(&mut out, e, 0);
    f.write_str(&out)
}

pub(super) fn write_deriv(f: &mut fmt::Formatter<'_>, d: &DerivSym) -> fmt::Result {
    if d.orders.is_empty() {
        return f.write_str(&d.target);
    }
    write!(f, "D({}", d.target)?;
    for (v, n) in &d.orders {
        write!(f, ",{v},{n}")?;
    }
    f.write_str(")")
}

fn rational_text(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Splits a leading minus sign off a term: `-3*x` -> `(true, 3*x)`.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Rational(q) if q.is_negative() => (true, Expr::Rational(-q)),
        Expr::Product(items) => match items.first() {
            Some(Expr::Rational(q)) if q.is_negative() => {
                let mut rest: Vec<Expr> = items[1..].to_vec();
                if !(-q).is_one() {
                    rest.insert(0, Expr::Rational(-q));
                }
                let abs = match rest.len() {
                    0 => Expr::Rational(Rational::one()),
                    1 => rest.pop().unwrap(),
                    _ => Expr::Product(rest),
                };
                (true, abs)
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

fn write_prec(out: &mut String, e: &Expr, prec: u8) {
    match e {
        Expr::Rational(q) => {
            let needs_parens = (q.is_negative() && prec >= PREC_PRODUCT)
                || (!q.is_integer() && prec >= PREC_POWER);
            if needs_parens {
                out.push('(');
            }
            out.push_str(&rational_text(q));
            if needs_parens {
                out.push(')');
            }
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Deriv(d) => {
            let _ = write!(out, "{d}");
        }
        Expr::Atom(kind, arg) => {
            out.push_str(kind.name());
            out.push('(');
            write_prec(out, arg, 0);
            out.push(')');
        }
        Expr::Power(base, n) => {
            if prec > PREC_POWER {
                out.push('(');
            }
            write_prec(out, base, PREC_POWER + 1);
            let _ = write!(out, "^{n}");
            if prec > PREC_POWER {
                out.push(')');
            }
        }
        Expr::Sum(items) => {
            if items.is_empty() {
                out.push('0');
                return;
            }
            let parens = prec > PREC_SUM;
            if parens {
                out.push('(');
            }
            for (i, item) in items.iter().enumerate() {
                if i == 0 {
                    write_prec(out, item, PREC_SUM);
                    continue;
                }
                let (negative, abs) = split_sign(item);
                out.push_str(if negative { " - " } else { " + " });
                write_prec(out, &abs, PREC_SUM);
            }
            if parens {
                out.push(')');
            }
        }
        Expr::Product(items) => {
            if items.is_empty() {
                out.push('1');
                return;
            }
            let (negative, abs) = split_sign(e);
            if negative {
                let parens = prec >= PREC_PRODUCT;
                if parens {
                    out.push('(');
                }
                out.push('-');
                write_prec(out, &abs, PREC_PRODUCT);
                if parens {
                    out.push(')');
                }
                return;
            }
            let parens = prec > PREC_PRODUCT;
            if parens {
                out.push('(');
            }
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                // a fraction after another factor would re-associate as a division
                let p = match item {
                    Expr::Rational(q) if i > 0 && !q.is_integer() => PREC_POWER,
                    _ => PREC_PRODUCT,
                };
                write_prec(out, item, p);
            }
            if parens {
                out.push(')');
            }
        }
    }
}

/// LaTeX rendering, e.g. `-\frac{1}{6} x^{2}` or `y^{2} e^{x y}`.
pub fn to_latex(e: &Expr) -> String {
    let mut out = String::new();
    latex_prec(&mut out, e, 0);
    out
}

fn latex_rational(out: &mut String, q: &Rational) {
    if q.is_integer() {
        let _ = write!(out, "{}", q.numer());
    } else {
        let sign = if q.is_negative() { "-" } else { "" };
        let _ = write!(out, "{sign}\\frac{{{}}}{{{}}}", q.numer().abs(), q.denom());
    }
}

fn latex_deriv(out: &mut String, d: &DerivSym) {
    out.push_str(&d.target);
    if d.orders.is_empty() {
        return;
    }
    out.push_str("_{");
    for (v, n) in &d.orders {
        for _ in 0..*n {
            out.push_str(v);
        }
    }
    out.push('}');
}

fn latex_prec(out: &mut String, e: &Expr, prec: u8) {
    match e {
        Expr::Rational(q) => {
            let parens = q.is_negative() && prec >= PREC_PRODUCT;
            if parens {
                out.push_str("\\left(");
            }
            latex_rational(out, q);
            if parens {
                out.push_str("\\right)");
            }
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Deriv(d) => latex_deriv(out, d),
        Expr::Atom(AtomKind::Exp, arg) => {
            out.push_str("e^{");
            latex_prec(out, arg, 0);
            out.push('}');
        }
        Expr::Atom(kind, arg) => {
            let _ = write!(out, "\\{}\\left(", kind.name());
            latex_prec(out, arg, 0);
            out.push_str("\\right)");
        }
        Expr::Power(base, n) => {
            match base.as_ref() {
                Expr::Atom(kind @ (AtomKind::Sin | AtomKind::Cos), arg) => {
                    let _ = write!(out, "\\{}^{{{n}}}\\left(", kind.name());
                    latex_prec(out, arg, 0);
                    out.push_str("\\right)");
                }
                _ => {
                    latex_prec(out, base, PREC_POWER + 1);
                    let _ = write!(out, "^{{{n}}}");
                }
            }
        }
        Expr::Sum(items) => {
            let parens = prec > PREC_SUM;
            if parens {
                out.push_str("\\left(");
            }
            for (i, item) in items.iter().enumerate() {
                if i == 0 {
                    latex_prec(out, item, PREC_SUM);
                    continue;
                }
                let (negative, abs) = split_sign(item);
                out.push_str(if negative { " - " } else { " + " });
                latex_prec(out, &abs, PREC_SUM);
            }
            if parens {
                out.push_str("\\right)");
            }
        }
        Expr::Product(items) => {
            let (negative, abs) = split_sign(e);
            if negative {
                out.push('-');
                latex_prec(out, &abs, PREC_PRODUCT);
                return;
            }
            let parens = prec > PREC_PRODUCT;
            if parens {
                out.push_str("\\left(");
            }
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                latex_prec(out, item, PREC_PRODUCT);
            }
            if parens {
                out.push_str("\\right)");
            }
        }
    }
}
