use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{difference, rational_range, rational_to_decimal, AnalysisError};
use crate::engine::SeriesSolution;
use crate::expr::{evaluate_normal, Expr, HighPrecision, PrecisionContext, Rational, TIME_VAR};

/// A swept variable; unlike a table axis it may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<Rational>,
}

impl SweepAxis {
    pub fn new(name: &str, values: Vec<Rational>) -> Result<Self, AnalysisError> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AnalysisError::InvalidAxis {
                axis: name.into(),
                reason: "values must be strictly increasing".into(),
            });
        }
        Ok(SweepAxis {
            name: name.to_string(),
            values,
        })
    }

    pub fn range(name: &str, start: &Rational, stop: &Rational, step: &Rational) -> Result<Self, AnalysisError> {
        SweepAxis::new(name, rational_range(name, start, stop, step)?)
    }
}

#[derive(Clone, Debug)]
pub struct FigureRow {
    /// Values of the swept variables, in sweep order.
    pub coords: Vec<Rational>,
    pub series: HighPrecision,
    pub exact: HighPrecision,
    pub error: HighPrecision,
}

#[derive(Clone, Debug)]
pub struct FigureData {
    /// Swept variable names followed by `series`, `exact`, `abs_error`.
    pub columns: Vec<String>,
    pub rows: Vec<FigureRow>,
}

impl FigureData {
    pub fn to_csv(&self, significant: usize) -> String {
        let mut out = self.columns.join(",") + "\n";
        for r in &self.rows {
            let mut cells: Vec<String> = r.coords.iter().map(rational_to_decimal).collect();
            cells.push(r.series.to_scientific(significant));
            cells.push(r.exact.to_scientific(significant));
            cells.push(r.error.to_scientific(significant));
            out += &cells.join(",");
            out.push('\n');
        }
        out
    }
}

/// Series, exact and error values over the cartesian product of `sweep`,
/// with the remaining variables fixed by `slice`.
pub fn export_figure_data(
    sol: &SeriesSolution,
    exact: &Expr,
    slice: &BTreeMap<String, Rational>,
    sweep: &[SweepAxis],
    ctx: &PrecisionContext,
) -> Result<FigureData, AnalysisError> {
    let required: BTreeSet<&str> = sol
        .spec
        .spatial_vars
        .iter()
        .map(String::as_str)
        .chain([TIME_VAR])
        .collect();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    for name in slice.keys().map(String::as_str).chain(sweep.iter().map(|a| a.name.as_str())) {
        if !required.contains(name) {
            return Err(AnalysisError::Constraint(format!("`{name}` is not a variable of the problem")));
        }
        if !bound.insert(name) {
            return Err(AnalysisError::Constraint(format!("`{name}` is fixed or swept more than once")));
        }
    }
    if let Some(missing) = required.difference(&bound).next() {
        return Err(AnalysisError::Constraint(format!("`{missing}` is neither fixed nor swept")));
    }

    let mut columns: Vec<String> = sweep.iter().map(|a| a.name.clone()).collect();
    columns.extend(["series", "exact", "abs_error"].map(String::from));

    let mut coords: Vec<Vec<Rational>> = vec![Vec::new()];
    for axis in sweep {
        coords = coords
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }

    let series = sol.series_normal()?;
    let exact_nf = exact.to_normal()?;
    let diff = difference(sol, exact)?;
    let rows = coords
        .into_par_iter()
        .map(|c| {
            let mut point = slice.clone();
            for (axis, v) in sweep.iter().zip(&c) {
                point.insert(axis.name.clone(), v.clone());
            }
            Ok(FigureRow {
                series: evaluate_normal(&series, &point, ctx)?,
                exact: evaluate_normal(&exact_nf, &point, ctx)?,
                error: evaluate_normal(&diff, &point, ctx)?.abs(),
                coords: c,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(FigureData { columns, rows })
}
