//! Reduced differential transform solver for second-order-in-time nonlinear
//! wave-like PDEs with variable coefficients.
//!
//! A problem `u_tt = N(u, u_x, ..., x, t)` is compiled once into a spectral
//! recurrence over the time spectra `V_k(x)` (the Taylor coefficients of the
//! solution in `t`) and then stepped with exact rational arithmetic. The
//! `analysis` module evaluates truncated series at high precision and builds
//! absolute-error tables against closed-form solutions.

pub mod analysis;
pub mod engine;
pub mod expr;
pub mod models;
pub mod specfile;

pub use analysis::{
    absolute_error_grid, closed_form_agreement, evaluate_series, export_figure_data,
    pde_residual, rational_to_decimal, render_table, residual_order_check, taylor_coefficients,
    AnalysisError, Axis, ErrorTable, FigureData, FigureRow, Grid2D, ResidualReport, SweepAxis,
    TableStyle, Tie,
};
pub use engine::{
    advance_step, cauchy_product, compile_recurrence, initial_spectra, solve_series,
    DerivOrder, EngineError, Factor, PdeSpec, RecurrenceTerm, SeriesSolution,
    SpectralRecurrence,
};
pub use expr::{
    differentiate, eval_precise, parse_expr, simplify, substitute, to_latex, AtomKind, DerivSym, Expr,
    ExprError, HighPrecision, NormalForm, PrecisionContext, Rational,
};
pub use models::{builtin_model, exact_solution, ModelId};
pub use specfile::{parse_spec_file, SpecFileError};
