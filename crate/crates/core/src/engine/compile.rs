use num_traits::One;

use super::{lift, DerivOrder, EngineError, Factor, PdeSpec, RecurrenceTerm, SpectralRecurrence};
use crate::expr::{NormalForm, Rational, TIME_VAR};

/// Expands the right-hand side into monomials in the unknown-function
/// symbols; each monomial `c(x) t^n * prod D^a(u)` becomes one term with
/// time shift `n` and one factor per symbol occurrence.
pub fn compile_recurrence(spec: &PdeSpec) -> Result<SpectralRecurrence, EngineError> {
    spec.validate()?;
    let rhs = spec.rhs.to_normal().map_err(lift)?;
    let mut terms = Vec::with_capacity(rhs.num_terms());
    for (term, c) in rhs.terms() {
        let mut factors = Vec::new();
        for (sym, power) in term.derivs() {
            let order = DerivOrder(sym.orders.clone());
            for _ in 0..*power {
                factors.push(Factor::Spectrum(order.clone()));
            }
        }
        if factors.is_empty() {
            factors.push(Factor::Unit);
        }
        factors.sort();
        let time_shift = term.vars().exponent(TIME_VAR);
        let coefficient = NormalForm::from_term(term.without_derivs(), Rational::one())
            .coefficient_of(TIME_VAR, time_shift)
            .scale(c);
        terms.push(RecurrenceTerm {
            coefficient: coefficient.to_expr(),
            time_shift,
            factors,
        });
    }
    Ok(SpectralRecurrence {
        terms,
        spatial_vars: spec.spatial_vars.clone(),
    })
}
