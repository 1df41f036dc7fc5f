//! Symbolic expressions for the reduced differential transform.
//!
//! The supported class is polynomials in the declared variables with exact
//! rational coefficients, multiplied by `exp`/`sin`/`cos` atoms whose
//! arguments are themselves polynomials. Unknown-function symbols
//! (`u`, `D(u,x,2)`, ...) may appear polynomially; they only occur in PDE
//! right-hand sides.
//!
//! [`Expr`] is the tree form handed to callers. All algebra happens on
//! [`NormalForm`], a fully expanded sum of terms keyed by their non-numeric
//! part, which is what makes canonicalization a simple round trip.

mod normal;
mod parse;
mod precise;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use normal::{NormalForm, Poly, Term, VarPowers};
pub use parse::{parse_expr, Lexer, Parser, Span, Token, TokenKind};
pub use precise::{evaluate_normal, HighPrecision, PrecisionContext};
pub use print::to_latex;

/// Exact rational used for every coefficient in the tree.
pub type Rational = num_rational::BigRational;

/// Name of the time variable.
pub const TIME_VAR: &str = "t";
/// Name of the unknown function in PDE right-hand sides.
pub const UNKNOWN: &str = "u";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Exp,
    Sin,
    Cos,
}

impl AtomKind {
    pub fn name(self) -> &'static str {
        match self {
            AtomKind::Exp => "exp",
            AtomKind::Sin => "sin",
            AtomKind::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(AtomKind::Exp),
            "sin" => Some(AtomKind::Sin),
            "cos" => Some(AtomKind::Cos),
            _ => None,
        }
    }
}

/// A partial derivative of an unknown function, `D(u, x, 1, y, 2)`.
///
/// Zero orders are never stored, so `u` itself has an empty order map.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivSym {
    pub target: String,
    pub orders: BTreeMap<String, u32>,
}

impl DerivSym {
    pub fn unknown() -> Self {
        DerivSym {
            target: UNKNOWN.to_string(),
            orders: BTreeMap::new(),
        }
    }

    pub fn new<I, S>(target: &str, orders: I) -> Self
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut sym = DerivSym {
            target: target.to_string(),
            orders: BTreeMap::new(),
        };
        for (var, n) in orders {
            sym = sym.differentiated(&var.into(), n);
        }
        sym
    }

    /// The symbol for one more derivative in `var`.
    pub fn differentiated(&self, var: &str, order: u32) -> Self {
        let mut out = self.clone();
        if order > 0 {
            *out.orders.entry(var.to_string()).or_insert(0) += order;
        }
        out
    }

    pub fn order_in(&self, var: &str) -> u32 {
        self.orders.get(var).copied().unwrap_or(0)
    }
}

/// Immutable expression tree.
///
/// Trees produced by [`simplify`] (and therefore by [`parse_expr`]) are
/// canonical: equal expressions are structurally identical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Rational(Rational),
    Var(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, i64),
    Atom(AtomKind, Box<Expr>),
    Deriv(DerivSym),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared identifier `{name}` at line {line}, column {column}")]
    UndeclaredIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("non-integer exponent at line {line}, column {column}")]
    NonIntegerExponent { line: usize, column: usize },
    #[error("argument of {kind} is not a polynomial in the variables: {subterm}")]
    NonPolynomialArgument { kind: &'static str, subterm: String },
    #[error("expression is not polynomial in the unknown: {subterm}")]
    NonPolynomialInUnknown { subterm: String },
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("derivative symbol `{0}` cannot be evaluated")]
    DerivativeNotEvaluable(String),
    #[error("working precision must be at least 15 decimal digits, got {0}")]
    PrecisionTooLow(u32),
}

impl Expr {
    pub fn int(n: i64) -> Self {
        Expr::Rational(Rational::from_integer(n.into()))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Expr::Rational(Rational::new(num.into(), den.into()))
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Rational(q) if num_traits::Zero::is_zero(q))
    }

    pub fn to_normal(&self) -> Result<NormalForm, ExprError> {
        NormalForm::from_expr(self)
    }

    /// `true` if any `DerivSym` occurs in the tree.
    pub fn contains_deriv(&self) -> bool {
        match self {
            Expr::Deriv(_) => true,
            Expr::Rational(_) | Expr::Var(_) => false,
            Expr::Sum(items) | Expr::Product(items) => items.iter().any(Expr::contains_deriv),
            Expr::Power(base, _) => base.contains_deriv(),
            Expr::Atom(_, arg) => arg.contains_deriv(),
        }
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Self {
        Expr::Rational(q)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

impl fmt::Display for DerivSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_deriv(f, self)
    }
}

/// Canonical form of `e`.
pub fn simplify(e: &Expr) -> Result<Expr, ExprError> {
    Ok(NormalForm::from_expr(e)?.to_expr())
}

/// `order`-th partial derivative in `var`, canonicalized.
///
/// On unknown-function symbols this acts as the total derivative,
/// `d/dx D(u,x,1) = D(u,x,2)`.
pub fn differentiate(e: &Expr, var: &str, order: u32) -> Result<Expr, ExprError> {
    let mut nf = NormalForm::from_expr(e)?;
    for _ in 0..order {
        nf = nf.differentiate(var);
    }
    Ok(nf.to_expr())
}

/// Simultaneous substitution of variables followed by simplification.
pub fn substitute(e: &Expr, bindings: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
    let nf = NormalForm::from_expr(e)?;
    let values = bindings
        .iter()
        .map(|(k, v)| Ok((k.clone(), NormalForm::from_expr(v)?)))
        .collect::<Result<BTreeMap<_, _>, ExprError>>()?;
    Ok(nf.substitute(&values)?.to_expr())
}

/// Evaluates `e` at an exact rational point.
pub fn eval_precise(
    e: &Expr,
    point: &BTreeMap<String, Rational>,
    ctx: &PrecisionContext,
) -> Result<HighPrecision, ExprError> {
    evaluate_normal(&NormalForm::from_expr(e)?, point, ctx)
}
