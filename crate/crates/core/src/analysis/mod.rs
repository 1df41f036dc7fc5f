//! High-precision evaluation of truncated series, absolute-error grids,
//! residual checks and table/figure output.

mod figure;
mod render;
mod residual;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{EngineError, SeriesSolution};
use crate::expr::{evaluate_normal, Expr, ExprError, HighPrecision, NormalForm, PrecisionContext, Rational};

pub use figure::{export_figure_data, FigureData, FigureRow, SweepAxis};
pub use render::{rational_to_decimal, render_table, TableStyle};
pub use residual::{closed_form_agreement, pde_residual, residual_order_check, taylor_coefficients, ResidualReport};

/// Minimum working precision for error grids.
pub const MIN_GRID_DIGITS: u32 = 30;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid axis `{axis}`: {reason}")]
    InvalidAxis { axis: String, reason: String },
    #[error("error grids need at least {required} digits of precision, got {digits}")]
    PrecisionTooLow { digits: u32, required: u32 },
    #[error("precision insufficient at cell ({row}, {col}): error {value} is below the {digits}-digit resolution")]
    PrecisionInsufficient {
        row: String,
        col: String,
        value: String,
        digits: u32,
    },
    #[error("inconsistent point specification: {0}")]
    Constraint(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<Rational>,
}

impl Axis {
    /// Non-empty, strictly increasing values.
    pub fn new(name: &str, values: Vec<Rational>) -> Result<Self, AnalysisError> {
        if values.is_empty() {
            return Err(AnalysisError::InvalidAxis {
                axis: name.into(),
                reason: "no values".into(),
            });
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AnalysisError::InvalidAxis {
                axis: name.into(),
                reason: "values must be strictly increasing".into(),
            });
        }
        Ok(Axis {
            name: name.to_string(),
            values,
        })
    }

    /// `start, start + step, ...` up to and including `stop`.
    pub fn range(name: &str, start: &Rational, stop: &Rational, step: &Rational) -> Result<Self, AnalysisError> {
        Axis::new(name, rational_range(name, start, stop, step)?)
    }
}

pub(crate) fn rational_range(
    name: &str,
    start: &Rational,
    stop: &Rational,
    step: &Rational,
) -> Result<Vec<Rational>, AnalysisError> {
    if *step <= Rational::from_integer(0.into()) {
        return Err(AnalysisError::InvalidAxis {
            axis: name.into(),
            reason: "step must be positive".into(),
        });
    }
    let mut values = Vec::new();
    let mut v = start.clone();
    while v <= *stop {
        values.push(v.clone());
        v += step;
    }
    Ok(values)
}

/// How a variable that is not an axis gets its value at each cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tie {
    Row,
    Col,
    Fixed(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid2D {
    pub row: Axis,
    pub col: Axis,
    pub ties: BTreeMap<String, Tie>,
}

impl Grid2D {
    pub fn new(row: Axis, col: Axis) -> Self {
        Grid2D {
            row,
            col,
            ties: BTreeMap::new(),
        }
    }

    pub fn with_tie(mut self, var: &str, tie: Tie) -> Self {
        self.ties.insert(var.to_string(), tie);
        self
    }

    /// Header label such as `t/x,y`.
    pub fn label(&self) -> String {
        let mut cols = vec![self.col.name.clone()];
        cols.extend(
            self.ties
                .iter()
                .filter(|(_, t)| **t == Tie::Col)
                .map(|(v, _)| v.clone()),
        );
        format!("{}/{}", self.row.name, cols.join(","))
    }

    pub fn point(&self, i: usize, j: usize) -> BTreeMap<String, Rational> {
        let mut p = BTreeMap::new();
        p.insert(self.row.name.clone(), self.row.values[i].clone());
        p.insert(self.col.name.clone(), self.col.values[j].clone());
        for (v, tie) in &self.ties {
            let value = match tie {
                Tie::Row => self.row.values[i].clone(),
                Tie::Col => self.col.values[j].clone(),
                Tie::Fixed(q) => q.clone(),
            };
            p.insert(v.clone(), value);
        }
        p
    }
}

#[derive(Clone, Debug)]
pub struct ErrorTable {
    pub grid: Grid2D,
    /// `values[i][j]` is the error at row value `i`, column value `j`.
    pub values: Vec<Vec<HighPrecision>>,
    pub truncation_order: usize,
    pub precision: u32,
}

/// `sum_k V_k(x) t^k` at an exact point.
pub fn evaluate_series(
    sol: &SeriesSolution,
    point: &BTreeMap<String, Rational>,
    ctx: &PrecisionContext,
) -> Result<HighPrecision, AnalysisError> {
    Ok(evaluate_normal(&sol.series_normal()?, point, ctx)?)
}

fn check_point(sol: &SeriesSolution, point: &BTreeMap<String, Rational>) -> Result<(), AnalysisError> {
    for v in sol.spec.spatial_vars.iter().map(String::as_str).chain([crate::expr::TIME_VAR]) {
        if !point.contains_key(v) {
            return Err(ExprError::UnboundVariable(v.to_string()).into());
        }
    }
    Ok(())
}

/// `|series - exact|` on every grid cell.
///
/// The difference is formed symbolically first, so terms that agree exactly
/// (for instance everything at `t = 0`) cancel in rational arithmetic.
pub fn absolute_error_grid(
    sol: &SeriesSolution,
    exact: &Expr,
    grid: &Grid2D,
    ctx: &PrecisionContext,
) -> Result<ErrorTable, AnalysisError> {
    let digits = ctx.decimal_digits();
    if digits < MIN_GRID_DIGITS {
        return Err(AnalysisError::PrecisionTooLow {
            digits,
            required: MIN_GRID_DIGITS,
        });
    }
    let diff = sol.series_normal()?.sub(&exact.to_normal()?);
    let (rows, cols) = (grid.row.values.len(), grid.col.values.len());
    check_point(sol, &grid.point(0, 0))?;
    let floor = -(digits as i64 - 4);
    let cells: Vec<HighPrecision> = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / cols, idx % cols);
            let value = evaluate_normal(&diff, &grid.point(i, j), ctx)?.abs();
            if value.decimal_exponent().is_some_and(|e| e < floor) {
                return Err(AnalysisError::PrecisionInsufficient {
                    row: rational_to_decimal(&grid.row.values[i]),
                    col: rational_to_decimal(&grid.col.values[j]),
                    value: value.to_scientific(3),
                    digits,
                });
            }
            Ok(value)
        })
        .collect::<Result<_, _>>()?;
    let mut values = Vec::with_capacity(rows);
    let mut it = cells.into_iter();
    for _ in 0..rows {
        values.push(it.by_ref().take(cols).collect());
    }
    Ok(ErrorTable {
        grid: grid.clone(),
        values,
        truncation_order: sol.order,
        precision: digits,
    })
}

pub(crate) fn difference(sol: &SeriesSolution, exact: &Expr) -> Result<NormalForm, AnalysisError> {
    Ok(sol.series_normal()?.sub(&exact.to_normal()?))
}
