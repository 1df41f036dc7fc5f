use std::collections::HashMap;

use num_bigint::BigInt;

use super::{
    compile_recurrence, initial_spectra, lift, EngineError, Factor, PdeSpec, SeriesSolution,
    SpectralRecurrence,
};
use crate::expr::{Expr, NormalForm, Rational};

/// Incremental evaluator for a compiled recurrence.
///
/// Derivative images of each spectrum and the partial products of every
/// factor prefix are memoized, so an m-factor term costs O(m k) new
/// convolution products per step instead of re-running the nested sums.
pub(crate) struct Stepper<'a> {
    rec: &'a SpectralRecurrence,
    coefficients: Vec<NormalForm>,
    spectra: Vec<NormalForm>,
    images: HashMap<Factor, Vec<NormalForm>>,
    partials: HashMap<Vec<Factor>, Vec<NormalForm>>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(rec: &'a SpectralRecurrence, spectra: Vec<NormalForm>) -> Result<Self, EngineError> {
        let coefficients = rec
            .terms
            .iter()
            .map(|t| t.coefficient.to_normal().map_err(lift))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Stepper {
            rec,
            coefficients,
            spectra,
            images: HashMap::new(),
            partials: HashMap::new(),
        })
    }

    fn image(&mut self, factor: &Factor, j: usize) -> Result<NormalForm, EngineError> {
        if j >= self.spectra.len() {
            return Err(EngineError::IndexOutOfRange {
                index: j,
                available: self.spectra.len(),
            });
        }
        let cached = self.images.entry(factor.clone()).or_default();
        while cached.len() <= j {
            let i = cached.len();
            let value = match factor {
                Factor::Unit if i == 0 => NormalForm::one(),
                Factor::Unit => NormalForm::zero(),
                Factor::Spectrum(order) => order.apply(&self.spectra[i]),
            };
            cached.push(value);
        }
        Ok(cached[j].clone())
    }

    /// Convolution of `factors` at index `j`.
    fn product(&mut self, factors: &[Factor], j: usize) -> Result<NormalForm, EngineError> {
        if factors.len() == 1 {
            return self.image(&factors[0], j);
        }
        let done = self.partials.get(factors).map_or(0, Vec::len);
        for i in done..=j {
            let (head, last) = factors.split_at(factors.len() - 1);
            let mut acc = NormalForm::zero();
            for r in 0..=i {
                let left = self.product(head, r)?;
                if left.is_zero() {
                    continue;
                }
                let right = self.image(&last[0], i - r)?;
                if right.is_zero() {
                    continue;
                }
                acc.add_assign(&left.mul(&right));
            }
            self.partials.entry(factors.to_vec()).or_default().push(acc);
        }
        Ok(self.partials[factors][j].clone())
    }

    /// Transformed right-hand side at index `k`.
    pub(crate) fn rhs_at(&mut self, k: usize) -> Result<NormalForm, EngineError> {
        let mut total = NormalForm::zero();
        let rec = self.rec;
        for (idx, term) in rec.terms.iter().enumerate() {
            let shift = term.time_shift as usize;
            if shift > k {
                continue;
            }
            if self.coefficients[idx].is_zero() {
                continue;
            }
            let conv = self.product(&term.factors, k - shift)?;
            total.add_assign(&self.coefficients[idx].mul(&conv));
        }
        Ok(total)
    }

    /// Computes `V_{k+2}` from `V_0 ..= V_{k+1}`.
    pub(crate) fn step(&mut self, k: usize) -> Result<NormalForm, EngineError> {
        if self.spectra.len() < k + 2 {
            return Err(EngineError::IndexOutOfRange {
                index: k + 1,
                available: self.spectra.len(),
            });
        }
        let rhs = self.rhs_at(k)?;
        let denom = BigInt::from((k + 1) * (k + 2));
        Ok(rhs.scale(&Rational::new(1.into(), denom)))
    }

    pub(crate) fn push(&mut self, v: NormalForm) {
        self.spectra.push(v);
    }
}

/// n-ary Cauchy product `sum over r_1 + ... + r_m = k of prod_i seq_i[r_i]`,
/// evaluated as a left fold of pairwise convolutions.
pub fn cauchy_product_normal(sequences: &[&[NormalForm]], k: usize) -> Result<NormalForm, EngineError> {
    let (first, rest) = sequences.split_first().ok_or(EngineError::EmptyProduct)?;
    for seq in sequences {
        if seq.len() <= k {
            return Err(EngineError::IndexOutOfRange {
                index: k,
                available: seq.len(),
            });
        }
    }
    let mut acc: Vec<NormalForm> = first[..=k].to_vec();
    for seq in rest {
        acc = (0..=k)
            .map(|j| {
                let mut sum = NormalForm::zero();
                for r in 0..=j {
                    sum.add_assign(&acc[r].mul(&seq[j - r]));
                }
                sum
            })
            .collect();
    }
    Ok(acc.swap_remove(k))
}

pub fn cauchy_product(sequences: &[Vec<Expr>], k: usize) -> Result<Expr, EngineError> {
    let normal = sequences
        .iter()
        .map(|s| s.iter().map(|e| e.to_normal().map_err(lift)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&[NormalForm]> = normal.iter().map(Vec::as_slice).collect();
    Ok(cauchy_product_normal(&refs, k)?.to_expr())
}

/// `V_{k+2} = rhs_k / ((k+1)(k+2))` given `spectra = V_0 ..= V_{k+1}` (or more).
pub fn advance_step(rec: &SpectralRecurrence, spectra: &[Expr], k: usize) -> Result<Expr, EngineError> {
    if spectra.len() < k + 2 {
        return Err(EngineError::IndexOutOfRange {
            index: k + 1,
            available: spectra.len(),
        });
    }
    let spectra = spectra[..k + 2]
        .iter()
        .map(|e| e.to_normal().map_err(lift))
        .collect::<Result<Vec<_>, _>>()?;
    let mut stepper = Stepper::new(rec, spectra)?;
    Ok(stepper.step(k)?.to_expr())
}

/// Computes `order` spectra `V_0 .. V_{order-1}`.
pub fn solve_series(spec: &PdeSpec, order: usize) -> Result<SeriesSolution, EngineError> {
    if order < 2 {
        return Err(EngineError::InvalidOrder(order));
    }
    let rec = compile_recurrence(spec)?;
    let (v0, v1) = initial_spectra(spec)?;
    let seeds = vec![v0.to_normal().map_err(lift)?, v1.to_normal().map_err(lift)?];
    let mut stepper = Stepper::new(&rec, seeds)?;
    let mut spectra = vec![v0, v1];
    for k in 0..order - 2 {
        let next = stepper.step(k)?;
        spectra.push(next.to_expr());
        stepper.push(next);
    }
    Ok(SeriesSolution {
        spec: spec.clone(),
        spectra,
        order,
    })
}
