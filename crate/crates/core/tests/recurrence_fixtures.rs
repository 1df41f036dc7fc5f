//! Hand-transcribed recurrences, one convolution per displayed sum, stepped
//! independently and compared against the compiled recurrences.

use rdtm_core::{
    advance_step, builtin_model, compile_recurrence, initial_spectra, parse_expr, solve_series,
    DerivOrder, Expr, Factor, ModelId, RecurrenceTerm, SpectralRecurrence,
};

fn term(coefficient: &str, vars: &[&str], factors: &[&[(&str, u32)]]) -> RecurrenceTerm {
    let mut factors: Vec<Factor> = factors
        .iter()
        .map(|f| Factor::Spectrum(DerivOrder::of(f.iter().copied())))
        .collect();
    factors.sort();
    RecurrenceTerm {
        coefficient: parse_expr(coefficient, vars).unwrap(),
        time_shift: 0,
        factors,
    }
}

fn check_against_compiled(id: ModelId, fixture: Vec<RecurrenceTerm>, order: usize) {
    let spec = builtin_model(id);
    let rec = SpectralRecurrence {
        terms: fixture,
        spatial_vars: spec.spatial_vars.clone(),
    };
    let compiled = compile_recurrence(&spec).unwrap();
    let (v0, v1) = initial_spectra(&spec).unwrap();
    let mut spectra: Vec<Expr> = vec![v0, v1];
    for k in 0..order - 2 {
        assert_eq!(
            rec.transformed_rhs(&spectra, k).unwrap(),
            compiled.transformed_rhs(&spectra, k).unwrap(),
            "{id}: transformed right-hand side at k={k}"
        );
        let next = advance_step(&rec, &spectra, k).unwrap();
        spectra.push(next);
    }
    assert_eq!(spectra, solve_series(&spec, order).unwrap().spectra, "{id}");
}

#[test]
fn ex1_sum_by_sum_recurrence() {
    let v = &["x", "y"];
    let fixture = vec![
        term("1", v, &[&[("y", 2)], &[("x", 3), ("y", 1)]]),
        term("1", v, &[&[("x", 2), ("y", 1)], &[("x", 1), ("y", 2)]]),
        term("1", v, &[&[("x", 3)], &[("y", 3)]]),
        term("1", v, &[&[("x", 2)], &[("x", 1), ("y", 3)]]),
        term("-1", v, &[&[("x", 1)], &[("y", 1)]]),
        term("-x", v, &[&[("y", 1)], &[("x", 2)]]),
        term("-x", v, &[&[("x", 1)], &[("x", 1), ("y", 1)]]),
        term("-y", v, &[&[("y", 1)], &[("x", 1), ("y", 1)]]),
        term("-x*y", v, &[&[("y", 1)], &[("x", 2), ("y", 1)]]),
        term("-x*y", v, &[&[("x", 1), ("y", 1)], &[("x", 1), ("y", 1)]]),
        term("-y", v, &[&[("x", 1)], &[("y", 2)]]),
        term("-x*y", v, &[&[("x", 2)], &[("y", 2)]]),
        term("-x*y", v, &[&[("x", 1)], &[("x", 1), ("y", 2)]]),
        term("-1", v, &[&[]]),
    ];
    check_against_compiled(ModelId::Ex1, fixture, 8);
}

#[test]
fn ex2_sum_by_sum_recurrence() {
    let v = &["x"];
    let u: &[(&str, u32)] = &[];
    let d = |n: u32| -> &'static [(&'static str, u32)] {
        match n {
            1 => &[("x", 1)],
            2 => &[("x", 2)],
            3 => &[("x", 3)],
            4 => &[("x", 4)],
            _ => &[("x", 5)],
        }
    };
    let fixture = vec![
        term("3", v, &[u, u, d(2), d(3), d(3)]),
        term("2", v, &[u, u, d(2), d(2), d(4)]),
        term("3", v, &[u, u, d(1), d(3), d(4)]),
        term("1", v, &[u, u, d(1), d(2), d(5)]),
        term("6", v, &[d(1), d(1), d(2), d(3), d(3)]),
        term("3", v, &[d(1), d(1), d(2), d(2), d(4)]),
        term("-18", v, &[u, u, u, u, u]),
        term("1", v, &[u]),
    ];
    check_against_compiled(ModelId::Ex2, fixture, 10);
}

#[test]
fn ex3_sum_by_sum_recurrence() {
    let v = &["x"];
    let fixture = vec![
        term("x^2", v, &[&[("x", 2)], &[("x", 2)]]),
        term("x^2", v, &[&[("x", 1)], &[("x", 3)]]),
        term("-x^2", v, &[&[("x", 2)], &[("x", 2)]]),
        term("-1", v, &[&[]]),
    ];
    check_against_compiled(ModelId::Ex3, fixture, 14);
}
