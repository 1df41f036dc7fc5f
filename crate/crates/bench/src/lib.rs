//! Workloads shared by the criterion benches.

use rdtm_core::{builtin_model, Axis, Grid2D, ModelId, Rational, Tie};

/// Default table order for each built-in model.
pub fn table_order(id: ModelId) -> usize {
    match id {
        ModelId::Ex1 => 8,
        ModelId::Ex2 => 16,
        ModelId::Ex3 => 20,
    }
}

/// The `t` by `x` grid used for the built-in error tables.
pub fn table_grid(id: ModelId) -> Grid2D {
    let (first, step) = if id == ModelId::Ex1 { (1, 1) } else { (2, 2) };
    let values: Vec<Rational> = (first..=10)
        .step_by(step)
        .map(|i| Rational::new(i.into(), 10.into()))
        .collect();
    let grid = Grid2D::new(
        Axis::new("t", values.clone()).expect("increasing"),
        Axis::new("x", values).expect("increasing"),
    );
    if builtin_model(id).spatial_vars.len() == 2 {
        grid.with_tie("y", Tie::Col)
    } else {
        grid
    }
}
