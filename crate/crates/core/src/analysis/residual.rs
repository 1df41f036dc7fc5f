use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use super::AnalysisError;
use crate::engine::{DerivOrder, PdeSpec, SeriesSolution};
use crate::expr::{Expr, NormalForm, Rational, TIME_VAR};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualReport {
    /// Largest `M` such that the coefficients of `t^0 ..= t^M` in
    /// `S_tt - rhs(S)` all vanish; `None` if the `t^0` coefficient does not.
    pub vanishing_through: Option<usize>,
    /// Highest power of `t` that was examined.
    pub checked_through: usize,
}

fn rhs_of(spec: &PdeSpec, u: &NormalForm, cap: Option<(&str, u32)>) -> Result<NormalForm, AnalysisError> {
    let rhs = spec.rhs.to_normal()?;
    rhs.substitute_derivs::<AnalysisError, _>(|sym| Ok(DerivOrder(sym.orders.clone()).apply(u)), cap)
}

/// `u_tt - rhs(u)` for a closed-form candidate, in canonical form.
pub fn pde_residual(spec: &PdeSpec, candidate: &Expr) -> Result<Expr, AnalysisError> {
    let u = candidate.to_normal()?;
    let u_tt = u.differentiate(TIME_VAR).differentiate(TIME_VAR);
    Ok(u_tt.sub(&rhs_of(spec, &u, None)?).to_expr())
}

/// Substitutes the truncated series back into the equation and reports how
/// many leading powers of `t` cancel exactly.
pub fn residual_order_check(sol: &SeriesSolution) -> Result<ResidualReport, AnalysisError> {
    let s = sol.series_normal()?;
    let cap = sol.order.saturating_sub(1) as u32;
    let s_tt = s.differentiate(TIME_VAR).differentiate(TIME_VAR);
    let residual = s_tt
        .sub(&rhs_of(&sol.spec, &s, Some((TIME_VAR, cap)))?)
        .truncate(TIME_VAR, cap);
    let first_nonzero = (0..=cap).find(|&j| !residual.coefficient_of(TIME_VAR, j).is_zero());
    let vanishing_through = match first_nonzero {
        Some(0) => None,
        Some(j) => Some(j as usize - 1),
        None => Some(cap as usize),
    };
    Ok(ResidualReport {
        vanishing_through,
        checked_through: cap as usize,
    })
}

/// The first `count` Taylor coefficients of `e` in `var` about 0.
pub fn taylor_coefficients(e: &Expr, var: &str, count: usize) -> Result<Vec<Expr>, AnalysisError> {
    let mut d = e.to_normal()?;
    let at_zero: BTreeMap<String, NormalForm> = [(var.to_string(), NormalForm::zero())].into();
    let mut factorial = BigInt::one();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        if k > 0 {
            factorial *= k;
        }
        let value = d.substitute(&at_zero)?;
        out.push(value.scale(&Rational::new(1.into(), factorial.clone())).to_expr());
        d = d.differentiate(var);
    }
    Ok(out)
}

/// Index of the first spectrum that differs from the matching Taylor
/// coefficient of `exact` in `t`, or `None` if all agree.
pub fn closed_form_agreement(sol: &SeriesSolution, exact: &Expr) -> Result<Option<usize>, AnalysisError> {
    let expected = taylor_coefficients(exact, TIME_VAR, sol.order)?;
    Ok(sol.spectra.iter().zip(&expected).position(|(v, e)| v != e))
}
