//! Arbitrary-precision evaluation of normal forms at exact rational points.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_traits::{One, Zero};

use super::{AtomKind, ExprError, NormalForm, Rational};

const ROUNDING: RoundingMode = RoundingMode::ToEven;
/// Extra binary digits carried beyond the requested decimal precision.
const GUARD_BITS: usize = 64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working precision for transcendental evaluation, in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    decimal_digits: u32,
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 50;

    pub fn new(decimal_digits: u32) -> Result<Self, ExprError> {
        if decimal_digits < 15 {
            return Err(ExprError::PrecisionTooLow(decimal_digits));
        }
        Ok(PrecisionContext { decimal_digits })
    }

    pub fn decimal_digits(&self) -> u32 {
        self.decimal_digits
    }

    /// Mantissa size in bits: `ceil(digits * log2(10))` plus guard bits.
    pub fn bits(&self) -> usize {
        (self.decimal_digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
    }

    pub fn widened(&self, extra_digits: u32) -> Self {
        PrecisionContext {
            decimal_digits: self.decimal_digits + extra_digits,
        }
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            decimal_digits: Self::DEFAULT_DIGITS,
        }
    }
}

/// A real number carried at a fixed binary precision.
#[derive(Clone, Debug)]
pub struct HighPrecision {
    value: BigFloat,
    bits: usize,
}

impl HighPrecision {
    pub fn zero(ctx: &PrecisionContext) -> Self {
        HighPrecision {
            value: BigFloat::from_word(0, ctx.bits()),
            bits: ctx.bits(),
        }
    }

    pub fn from_rational(q: &Rational, ctx: &PrecisionContext) -> Self {
        let p = ctx.bits();
        let value = with_consts(|cc| {
            let n = BigFloat::parse(&q.numer().to_string(), Radix::Dec, p, ROUNDING, cc);
            if q.denom().is_one() {
                n
            } else {
                let d = BigFloat::parse(&q.denom().to_string(), Radix::Dec, p, ROUNDING, cc);
                n.div(&d, p, ROUNDING)
            }
        });
        HighPrecision { value, bits: p }
    }

    /// `kind(q)` for a rational argument.
    pub fn atom(kind: AtomKind, q: &Rational, ctx: &PrecisionContext) -> Self {
        if q.is_zero() {
            let v = if kind == AtomKind::Sin { Rational::zero() } else { Rational::one() };
            return HighPrecision::from_rational(&v, ctx);
        }
        let arg = HighPrecision::from_rational(q, ctx);
        let p = arg.bits;
        let value = with_consts(|cc| match kind {
            AtomKind::Exp => arg.value.exp(p, ROUNDING, cc),
            AtomKind::Sin => arg.value.sin(p, ROUNDING, cc),
            AtomKind::Cos => arg.value.cos(p, ROUNDING, cc),
        });
        HighPrecision { value, bits: p }
    }

    fn bits_with(&self, other: &Self) -> usize {
        self.bits.max(other.bits)
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.bits_with(other);
        HighPrecision {
            value: self.value.add(&other.value, p, ROUNDING),
            bits: p,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.bits_with(other);
        HighPrecision {
            value: self.value.sub(&other.value, p, ROUNDING),
            bits: p,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.bits_with(other);
        HighPrecision {
            value: self.value.mul(&other.value, p, ROUNDING),
            bits: p,
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        HighPrecision {
            value: self.value.powi(n as usize, self.bits, ROUNDING),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        HighPrecision {
            value: self.value.abs(),
            bits: self.bits,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.value.is_zero() && self.value.is_negative()
    }

    /// Decimal digits and exponent with `value = 0.d1 d2 ... * 10^exponent`.
    fn decimal_parts(&self) -> (bool, Vec<u8>, i64) {
        with_consts(|cc| {
            let (sign, digits, exponent) = self
                .value
                .convert_to_radix(Radix::Dec, ROUNDING, cc)
                .expect("finite value");
            (sign == Sign::Neg, digits, exponent as i64)
        })
    }

    /// Normalized scientific notation with `significant` digits, e.g. `1.3095E-7`.
    /// Zero renders as `0`.
    pub fn to_scientific(&self, significant: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let significant = significant.max(1);
        let (negative, digits, exponent) = self.decimal_parts();
        let first_nonzero = digits.iter().position(|d| *d != 0).unwrap_or(0);
        let digits = &digits[first_nonzero..];
        let mut exponent = exponent - first_nonzero as i64 - 1;
        let mut kept: Vec<u8> = digits.iter().take(significant).copied().collect();
        kept.resize(significant, 0);
        if digits.get(significant).is_some_and(|d| *d >= 5) {
            let mut i = significant;
            loop {
                if i == 0 {
                    kept.insert(0, 1);
                    kept.pop();
                    exponent += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push((b'0' + kept[0]) as char);
        if kept.len() > 1 {
            out.push('.');
            out.extend(kept[1..].iter().map(|d| (b'0' + d) as char));
        }
        let sign = if exponent < 0 { '-' } else { '+' };
        out.push_str(&format!("E{sign}{}", exponent.abs()));
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.to_scientific(17).parse().unwrap_or(f64::NAN)
    }

    /// `floor(log10(|value|))`, `None` for zero.
    pub fn decimal_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let (_, digits, exponent) = self.decimal_parts();
        let first_nonzero = digits.iter().position(|d| *d != 0)? as i64;
        Some(exponent - first_nonzero - 1)
    }
}

impl PartialEq for HighPrecision {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for HighPrecision {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for HighPrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        f.write_str(&self.to_scientific(digits))
    }
}

/// Evaluates a normal form at an exact rational point.
///
/// Polynomial parts and atom arguments are evaluated exactly; terms sharing
/// the same atom values are combined in rational arithmetic before any
/// transcendental is computed, so exactly cancelling terms give exactly 0.
pub fn evaluate_normal(
    nf: &NormalForm,
    point: &BTreeMap<String, Rational>,
    ctx: &PrecisionContext,
) -> Result<HighPrecision, ExprError> {
    // (exp argument, trig (kind, argument) -> power) -> rational coefficient
    type AtomKey = (Rational, BTreeMap<(AtomKind, Rational), u32>);
    let mut groups: BTreeMap<AtomKey, Rational> = BTreeMap::new();
    'terms: for (term, coeff) in nf.terms() {
        if let Some(sym) = term.derivs().keys().next() {
            return Err(ExprError::DerivativeNotEvaluable(sym.to_string()));
        }
        let mut c = coeff.clone();
        for (v, e) in term.vars().iter() {
            let value = point
                .get(v)
                .ok_or_else(|| ExprError::UnboundVariable(v.clone()))?;
            c *= num_traits::pow(value.clone(), *e as usize);
        }
        let exp_arg = term.exp_arg().eval(point)?;
        let mut trig = BTreeMap::new();
        for ((kind, arg), power) in term.trig() {
            let q = arg.eval(point)?;
            if q.is_zero() {
                if *kind == AtomKind::Sin {
                    continue 'terms;
                }
                continue;
            }
            *trig.entry((*kind, q)).or_insert(0) += power;
        }
        *groups.entry((exp_arg, trig)).or_insert_with(Rational::zero) += c;
    }
    let mut atoms: BTreeMap<(AtomKind, Rational), HighPrecision> = BTreeMap::new();
    let mut total = HighPrecision::zero(ctx);
    for ((exp_arg, trig), c) in groups {
        if c.is_zero() {
            continue;
        }
        let mut value = HighPrecision::from_rational(&c, ctx);
        if !exp_arg.is_zero() {
            let a = atoms
                .entry((AtomKind::Exp, exp_arg.clone()))
                .or_insert_with(|| HighPrecision::atom(AtomKind::Exp, &exp_arg, ctx));
            value = value.mul(a);
        }
        for ((kind, q), power) in trig {
            let a = atoms
                .entry((kind, q.clone()))
                .or_insert_with(|| HighPrecision::atom(kind, &q, ctx));
            value = value.mul(&a.powi(power));
        }
        total = total.add(&value);
    }
    Ok(total)
}
