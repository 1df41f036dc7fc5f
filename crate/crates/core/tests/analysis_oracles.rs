use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use rdtm_core::{
    absolute_error_grid, builtin_model, evaluate_series, exact_solution, export_figure_data,
    render_table, solve_series, Axis, Grid2D, HighPrecision, ModelId, PrecisionContext, Rational,
    SweepAxis, TableStyle, Tie,
};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn tenths(from: i64, to: i64, step: i64) -> Vec<Rational> {
    (from..=to).step_by(step as usize).map(|i| q(i, 10)).collect()
}

/// `sin(t)` from 120 Taylor terms in rational arithmetic.
fn sine(t: &Rational) -> Rational {
    partial_sine(t, 120)
}

/// First `terms` nonzero terms of the sine series.
fn partial_sine(t: &Rational, terms: usize) -> Rational {
    let mut term = t.clone();
    let mut total = Rational::zero();
    for j in 0..terms as i64 {
        total += &term;
        term = -term * t * t / Rational::from_integer(BigInt::from((2 * j + 2) * (2 * j + 3)));
    }
    total
}

fn ex3_grid() -> Grid2D {
    Grid2D::new(
        Axis::new("t", tenths(2, 10, 2)).unwrap(),
        Axis::new("x", tenths(2, 10, 2)).unwrap(),
    )
}

#[test]
fn ex3_errors_match_remainder_oracle() {
    let ctx = PrecisionContext::default();
    let sol = solve_series(&builtin_model(ModelId::Ex3), 20).unwrap();
    let table = absolute_error_grid(&sol, &exact_solution(ModelId::Ex3), &ex3_grid(), &ctx).unwrap();
    let grid = &table.grid;
    for (i, t) in grid.row.values.iter().enumerate() {
        for (j, x) in grid.col.values.iter().enumerate() {
            let remainder = x * x * (sine(t) - partial_sine(t, 10));
            let oracle = HighPrecision::from_rational(&remainder, &ctx).abs();
            assert_eq!(table.values[i][j].to_scientific(6), oracle.to_scientific(6), "t={t} x={x}");
        }
    }
}

#[test]
fn error_vanishes_at_initial_time() {
    let ctx = PrecisionContext::default();
    for id in ModelId::ALL {
        let spec = builtin_model(id);
        let sol = solve_series(&spec, 8).unwrap();
        let mut grid = Grid2D::new(
            Axis::new("t", vec![q(0, 1)]).unwrap(),
            Axis::new("x", tenths(1, 9, 2)).unwrap(),
        );
        if spec.spatial_vars.len() == 2 {
            grid = grid.with_tie("y", Tie::Fixed(q(1, 3)));
        }
        let table = absolute_error_grid(&sol, &exact_solution(id), &grid, &ctx).unwrap();
        assert!(table.values.iter().flatten().all(HighPrecision::is_zero), "{id}");
    }
}

#[test]
fn more_spectra_shrink_ex3_errors() {
    let ctx = PrecisionContext::default();
    let exact = exact_solution(ModelId::Ex3);
    let grid = Grid2D::new(
        Axis::new("t", tenths(1, 10, 1)).unwrap(),
        Axis::new("x", tenths(2, 10, 2)).unwrap(),
    );
    let tables: Vec<_> = [6, 8, 10, 12, 14]
        .map(|n| {
            let sol = solve_series(&builtin_model(ModelId::Ex3), n).unwrap();
            absolute_error_grid(&sol, &exact, &grid, &ctx).unwrap()
        })
        .into();
    for pair in tables.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        for (a, b) in fine.values.iter().flatten().zip(coarse.values.iter().flatten()) {
            assert!(a < b, "N={}: {a} !< {b}", fine.truncation_order);
        }
    }
}

#[test]
fn extra_precision_changes_no_reported_digit() {
    let grid = Grid2D::new(
        Axis::new("t", tenths(1, 10, 1)).unwrap(),
        Axis::new("x", tenths(1, 10, 1)).unwrap(),
    )
    .with_tie("y", Tie::Col);
    let sol = solve_series(&builtin_model(ModelId::Ex1), 8).unwrap();
    let exact = exact_solution(ModelId::Ex1);
    let base = PrecisionContext::default();
    let a = absolute_error_grid(&sol, &exact, &grid, &base).unwrap();
    let b = absolute_error_grid(&sol, &exact, &grid, &base.widened(10)).unwrap();
    assert_eq!(render_table(&a, TableStyle::Csv, 6), render_table(&b, TableStyle::Csv, 6));
}

#[test]
fn parallel_grid_equals_cellwise_evaluation() {
    let ctx = PrecisionContext::default();
    let sol = solve_series(&builtin_model(ModelId::Ex2), 10).unwrap();
    let exact = exact_solution(ModelId::Ex2);
    let grid = ex3_grid();
    let table = absolute_error_grid(&sol, &exact, &grid, &ctx).unwrap();
    for i in 0..grid.row.values.len() {
        for j in 0..grid.col.values.len() {
            let p = grid.point(i, j);
            let series = evaluate_series(&sol, &p, &ctx).unwrap();
            let e = rdtm_core::eval_precise(&exact, &p, &ctx).unwrap();
            let diff = series.sub(&e).abs();
            // separate evaluation rounds differently; agreement to 30 digits
            let rel = diff.sub(&table.values[i][j]).abs().to_f64() / diff.to_f64();
            assert!(rel < 1e-30, "cell ({i},{j}): {rel}");
        }
    }
}

#[test]
fn ex2_series_at_unit_time() {
    let ctx = PrecisionContext::default();
    let sol = solve_series(&builtin_model(ModelId::Ex2), 10).unwrap();
    let mut fact = BigInt::one();
    let mut sum = Rational::zero();
    for k in 0..10 {
        if k > 0 {
            fact *= k;
        }
        sum += Rational::new(1.into(), fact.clone());
    }
    let p: BTreeMap<String, Rational> = [("x".to_string(), q(0, 1)), ("t".to_string(), q(1, 1))].into();
    assert_eq!(evaluate_series(&sol, &p, &ctx).unwrap(), HighPrecision::from_rational(&sum, &ctx));
}

#[test]
fn figure_datasets() {
    let ctx = PrecisionContext::default();
    let sol = solve_series(&builtin_model(ModelId::Ex1), 6).unwrap();
    let slice: BTreeMap<String, Rational> = [("y".to_string(), q(1, 2))].into();
    let sweep = [
        SweepAxis::range("x", &q(0, 1), &q(1, 1), &q(1, 10)).unwrap(),
        SweepAxis::range("t", &q(0, 1), &q(1, 1), &q(1, 10)).unwrap(),
    ];
    let data = export_figure_data(&sol, &exact_solution(ModelId::Ex1), &slice, &sweep, &ctx).unwrap();
    assert_eq!(data.rows.len(), 121);

    let sol = solve_series(&builtin_model(ModelId::Ex3), 10).unwrap();
    let slice: BTreeMap<String, Rational> = [("x".to_string(), q(1, 2))].into();
    let sweep = [SweepAxis::range("t", &q(0, 1), &q(1, 1), &q(1, 10)).unwrap()];
    let data = export_figure_data(&sol, &exact_solution(ModelId::Ex3), &slice, &sweep, &ctx).unwrap();
    for row in &data.rows {
        let t = &row.coords[0];
        let oracle = HighPrecision::from_rational(&(q(1, 4) * (sine(t) - partial_sine(t, 5))), &ctx).abs();
        assert_eq!(row.error.to_scientific(6), oracle.to_scientific(6), "t={t}");
    }
}
