//! Compiles a wave-like problem `u_tt = rhs` into a spectral recurrence and
//! steps it to produce the time spectra `V_0 .. V_{N-1}`.
//!
//! Transform rules used:
//! - sums and rational multiples transform term by term;
//! - a coefficient `c(x) t^n` multiplies the spectrum and shifts its index by `n`;
//! - a product of factors becomes an n-ary Cauchy convolution of spectra;
//! - spatial derivatives commute with the transform;
//! - `u_tt` at index `k` is `(k+1)(k+2) V_{k+2}`.

mod compile;
mod step;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{self, Expr, ExprError, NormalForm, TIME_VAR, UNKNOWN};

pub use compile::compile_recurrence;
pub use step::{advance_step, cauchy_product, cauchy_product_normal, solve_series};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("unsupported nonlinearity: {0}")]
    UnsupportedNonlinearity(String),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("unsupported coefficient: {0}")]
    UnsupportedCoefficient(String),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("truncation order must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("spectrum index {index} out of range ({available} available)")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("a Cauchy product needs at least one sequence")]
    EmptyProduct,
}

pub(crate) fn lift(err: ExprError) -> EngineError {
    match err {
        ExprError::NonPolynomialInUnknown { subterm } => EngineError::UnsupportedNonlinearity(subterm),
        other => EngineError::Expr(other),
    }
}

/// A wave-like problem `u_tt = rhs(u, u_x, ..., x, t)` with `u(x,0) = init_u`
/// and `u_t(x,0) = init_ut`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdeSpec {
    pub name: String,
    pub spatial_vars: Vec<String>,
    pub rhs: Expr,
    pub init_u: Expr,
    pub init_ut: Expr,
    pub exact: Option<Expr>,
}

impl PdeSpec {
    /// Canonicalizes every expression and validates the problem.
    pub fn new(
        name: &str,
        spatial_vars: &[&str],
        rhs: &Expr,
        init_u: &Expr,
        init_ut: &Expr,
        exact: Option<&Expr>,
    ) -> Result<Self, EngineError> {
        let spec = PdeSpec {
            name: name.to_string(),
            spatial_vars: spatial_vars.iter().map(|s| s.to_string()).collect(),
            rhs: expr::simplify(rhs).map_err(lift)?,
            init_u: expr::simplify(init_u).map_err(lift)?,
            init_ut: expr::simplify(init_ut).map_err(lift)?,
            exact: exact.map(expr::simplify).transpose().map_err(lift)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses each expression over `spatial_vars`.
    pub fn parse(
        name: &str,
        spatial_vars: &[&str],
        rhs: &str,
        init_u: &str,
        init_ut: &str,
        exact: Option<&str>,
    ) -> Result<Self, EngineError> {
        let p = |text: &str| expr::parse_expr(text, spatial_vars).map_err(lift);
        let exact = exact.map(p).transpose()?;
        PdeSpec::new(name, spatial_vars, &p(rhs)?, &p(init_u)?, &p(init_ut)?, exact.as_ref())
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.spatial_vars.is_empty() {
            return Err(EngineError::InvalidSpec("at least one spatial variable is required".into()));
        }
        for (i, v) in self.spatial_vars.iter().enumerate() {
            if v == TIME_VAR || v == UNKNOWN || v == "D" || expr::AtomKind::from_name(v).is_some() {
                return Err(EngineError::InvalidSpec(format!("`{v}` cannot be a spatial variable")));
            }
            if self.spatial_vars[..i].contains(v) {
                return Err(EngineError::InvalidSpec(format!("spatial variable `{v}` declared twice")));
            }
        }
        let rhs = self.rhs.to_normal().map_err(lift)?;
        self.check_vars(&rhs, true, "right-hand side")?;
        for sym in rhs.deriv_symbols() {
            if sym.target != UNKNOWN {
                return Err(EngineError::UnsupportedStructure(format!(
                    "unknown function `{}` in {sym}",
                    sym.target
                )));
            }
            if sym.order_in(TIME_VAR) > 0 {
                return Err(EngineError::UnsupportedStructure(format!(
                    "time derivative {sym} on the right-hand side; only u_tt on the left is supported"
                )));
            }
            for v in sym.orders.keys() {
                if !self.spatial_vars.contains(v) {
                    return Err(EngineError::InvalidSpec(format!("derivative in undeclared variable `{v}`")));
                }
            }
        }
        for (term, _) in rhs.terms() {
            let in_atoms = term.exp_arg().variables().contains(TIME_VAR)
                || term.trig().keys().any(|(_, a)| a.variables().contains(TIME_VAR));
            if in_atoms {
                return Err(EngineError::UnsupportedCoefficient(format!(
                    "time dependence must be a power of t, found {}",
                    NormalForm::from_term(term.without_derivs(), num_traits::One::one()).to_expr()
                )));
            }
        }
        for (label, e) in [("init", &self.init_u), ("init_t", &self.init_ut)] {
            let nf = e.to_normal().map_err(lift)?;
            if nf.contains_derivs() {
                return Err(EngineError::InvalidSpec(format!("{label} may not contain u")));
            }
            if nf.variables().contains(TIME_VAR) {
                return Err(EngineError::InvalidSpec(format!("{label} may not depend on t")));
            }
            self.check_vars(&nf, false, label)?;
        }
        if let Some(exact) = &self.exact {
            let nf = exact.to_normal().map_err(lift)?;
            if nf.contains_derivs() {
                return Err(EngineError::InvalidSpec("exact solution may not contain u".into()));
            }
            self.check_vars(&nf, true, "exact")?;
        }
        Ok(())
    }

    fn check_vars(&self, nf: &NormalForm, allow_time: bool, label: &str) -> Result<(), EngineError> {
        for v in nf.variables() {
            let ok = self.spatial_vars.contains(&v) || (allow_time && v == TIME_VAR);
            if !ok {
                return Err(EngineError::InvalidSpec(format!("{label} uses undeclared variable `{v}`")));
            }
        }
        Ok(())
    }

    /// Serializes the problem in the spec-file syntax.
    pub fn to_spec_file(&self) -> String {
        let mut out = format!("pde \"{}\" {{\n", self.name);
        out.push_str(&format!("  vars: {};\n", self.spatial_vars.join(", ")));
        out.push_str(&format!("  equation: D(u,t,2) = {};\n", self.rhs));
        out.push_str(&format!("  init: {};\n", self.init_u));
        out.push_str(&format!("  init_t: {};\n", self.init_ut));
        if let Some(exact) = &self.exact {
            out.push_str(&format!("  exact: {exact};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Spatial derivative orders applied to a spectrum; empty means the spectrum itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivOrder(pub BTreeMap<String, u32>);

impl DerivOrder {
    pub fn identity() -> Self {
        DerivOrder(BTreeMap::new())
    }

    pub fn of<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u32)>) -> Self {
        DerivOrder(
            pairs
                .into_iter()
                .map(|(v, n)| (v.into(), n))
                .filter(|(_, n)| *n > 0)
                .collect(),
        )
    }

    pub fn apply(&self, e: &NormalForm) -> NormalForm {
        let mut out = e.clone();
        for (v, n) in &self.0 {
            for _ in 0..*n {
                out = out.differentiate(v);
            }
        }
        out
    }
}

impl fmt::Display for DerivOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("V");
        }
        f.write_str("D(V")?;
        for (v, n) in &self.0 {
            write!(f, ",{v},{n}")?;
        }
        f.write_str(")")
    }
}

/// One factor of a convolution: a derivative image of the spectra, or the
/// unit sequence `delta(k)` used for source terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Unit,
    Spectrum(DerivOrder),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Unit => f.write_str("delta"),
            Factor::Spectrum(order) => write!(f, "{order}"),
        }
    }
}

/// `coefficient * conv_{k - time_shift}(factors...)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceTerm {
    pub coefficient: Expr,
    pub time_shift: u32,
    /// Sorted; repeated entries encode powers.
    pub factors: Vec<Factor>,
}

impl fmt::Display for RecurrenceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let factors: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}] * conv(k-{}; {})", self.coefficient, self.time_shift, factors.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralRecurrence {
    pub terms: Vec<RecurrenceTerm>,
    pub spatial_vars: Vec<String>,
}

impl SpectralRecurrence {
    /// Transformed right-hand side at index `k`, i.e. `(k+1)(k+2) V_{k+2}`.
    pub fn transformed_rhs(&self, spectra: &[Expr], k: usize) -> Result<Expr, EngineError> {
        let spectra = spectra
            .iter()
            .map(|e| e.to_normal().map_err(lift))
            .collect::<Result<Vec<_>, _>>()?;
        let mut stepper = step::Stepper::new(self, spectra)?;
        Ok(stepper.rhs_at(k)?.to_expr())
    }
}

/// Spectra `V_0 .. V_{N-1}` of a problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesSolution {
    pub spec: PdeSpec,
    pub spectra: Vec<Expr>,
    pub order: usize,
}

impl SeriesSolution {
    pub fn spectra_normal(&self) -> Result<Vec<NormalForm>, EngineError> {
        self.spectra.iter().map(|e| e.to_normal().map_err(lift)).collect()
    }

    /// Truncated series `sum_k V_k t^k` in normal form.
    pub fn series_normal(&self) -> Result<NormalForm, EngineError> {
        let t = NormalForm::var(TIME_VAR);
        let mut acc = NormalForm::zero();
        let mut power = NormalForm::one();
        for v in self.spectra_normal()? {
            acc.add_assign(&v.mul(&power));
            power = power.mul(&t);
        }
        Ok(acc)
    }

    pub fn series_expr(&self) -> Result<Expr, EngineError> {
        Ok(self.series_normal()?.to_expr())
    }

    /// Series text, factoring out a shared non-numeric part when every
    /// nonzero spectrum is a rational multiple of it: `x^2*(t - 1/6*t^3)`.
    pub fn series_text(&self) -> Result<String, EngineError> {
        let spectra = self.spectra_normal()?;
        let mut shared = None;
        let mut coefficients = Vec::new();
        for (k, v) in spectra.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            if v.num_terms() != 1 {
                return Ok(self.series_expr()?.to_string());
            }
            let (term, c) = v.terms().next().unwrap();
            match &shared {
                None => shared = Some(term.clone()),
                Some(s) if s == term => {}
                Some(_) => return Ok(self.series_expr()?.to_string()),
            }
            coefficients.push((k, c.clone()));
        }
        let Some(shared) = shared else {
            return Ok("0".into());
        };
        let t = NormalForm::var(TIME_VAR);
        let mut poly = NormalForm::zero();
        for (k, c) in coefficients {
            poly.add_assign(&t.pow(k as u32).scale(&c));
        }
        let key = NormalForm::from_term(shared, num_traits::One::one()).to_expr();
        if key == Expr::int(1) {
            return Ok(poly.to_expr().to_string());
        }
        let inner = poly.to_expr();
        Ok(match inner {
            Expr::Sum(_) => format!("{key}*({inner})"),
            _ => NormalForm::from_expr(&Expr::Product(vec![key, inner]))?.to_expr().to_string(),
        })
    }

    /// Copy with spectrum `k` replaced; used to probe the residual check.
    pub fn with_spectrum(&self, k: usize, value: Expr) -> Result<SeriesSolution, EngineError> {
        if k >= self.spectra.len() {
            return Err(EngineError::IndexOutOfRange {
                index: k,
                available: self.spectra.len(),
            });
        }
        let mut out = self.clone();
        out.spectra[k] = expr::simplify(&value).map_err(lift)?;
        Ok(out)
    }
}

/// `(V_0, V_1)` from the two initial conditions.
pub fn initial_spectra(spec: &PdeSpec) -> Result<(Expr, Expr), EngineError> {
    spec.validate()?;
    Ok((
        expr::simplify(&spec.init_u).map_err(lift)?,
        expr::simplify(&spec.init_ut).map_err(lift)?,
    ))
}
