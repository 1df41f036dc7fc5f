use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::{AtomKind, DerivSym, Expr, ExprError, Rational};

/// Product of variable powers such as `x^2*y`.
///
/// Ordered by total degree, then lexicographically with earlier variables and
/// higher exponents first, so `1 < x < y < x^2 < x*y < y^2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VarPowers(BTreeMap<String, u32>);

impl VarPowers {
    pub fn one() -> Self {
        VarPowers(BTreeMap::new())
    }

    pub fn single(var: &str, exponent: u32) -> Self {
        let mut m = BTreeMap::new();
        if exponent > 0 {
            m.insert(var.to_string(), exponent);
        }
        VarPowers(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn exponent(&self, var: &str) -> u32 {
        self.0.get(var).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u32)> {
        self.0.iter()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        VarPowers(out)
    }

    pub fn with_exponent(&self, var: &str, exponent: u32) -> Self {
        let mut out = self.0.clone();
        if exponent == 0 {
            out.remove(var);
        } else {
            out.insert(var.to_string(), exponent);
        }
        VarPowers(out)
    }

    fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, ExprError> {
        let mut acc = Rational::one();
        for (v, e) in &self.0 {
            let value = point
                .get(v)
                .ok_or_else(|| ExprError::UnboundVariable(v.clone()))?;
            acc *= num_traits::pow(value.clone(), *e as usize);
        }
        Ok(acc)
    }
}

impl Ord for VarPowers {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut a = self.0.iter();
            let mut b = other.0.iter();
            loop {
                match (a.next(), b.next()) {
                    (None, None) => return Ordering::Equal,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(_), None) => return Ordering::Greater,
                    (Some((va, ea)), Some((vb, eb))) => {
                        if va != vb {
                            return va.cmp(vb);
                        }
                        if ea != eb {
                            return eb.cmp(ea);
                        }
                    }
                }
            }
        })
    }
}

impl PartialOrd for VarPowers {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with exact rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(BTreeMap<VarPowers, Rational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(q: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(VarPowers::one(), q);
        p
    }

    pub fn var(name: &str) -> Self {
        let mut p = Poly::zero();
        p.add_term(VarPowers::single(name, 1), Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarPowers, &Rational)> {
        self.0.iter()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&VarPowers::one()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: VarPowers, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * q)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, var: &str) -> Self {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let e = m.exponent(var);
            if e > 0 {
                out.add_term(m.with_exponent(var, e - 1), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, ExprError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.0 {
            acc += c * m.eval(point)?;
        }
        Ok(acc)
    }

    pub fn substitute(&self, values: &BTreeMap<String, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut term = Poly::constant(c.clone());
            for (v, e) in m.iter() {
                let factor = match values.get(v) {
                    Some(p) => p.pow(*e),
                    None => {
                        let mut p = Poly::zero();
                        p.add_term(VarPowers::single(v, *e), Rational::one());
                        p
                    }
                };
                term = term.mul(&factor);
            }
            out = out.add(&term);
        }
        out
    }

    /// Sign of the highest-ordered coefficient; used to pick `sin(P)` over `sin(-P)`.
    pub fn leading_is_negative(&self) -> bool {
        self.0
            .iter()
            .next_back()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.0
            .keys()
            .flat_map(|m| m.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn to_expr(&self) -> Expr {
        NormalForm::from_poly(self).to_expr()
    }
}

/// The non-numeric part of a term: `x^a * D(u,..)^b * exp(P) * sin(Q)^c * ...`.
///
/// An empty `exp` polynomial means no exponential factor.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    exp: Poly,
    trig: BTreeMap<(AtomKind, Poly), u32>,
    derivs: BTreeMap<DerivSym, u32>,
    vars: VarPowers,
}

impl Term {
    pub fn one() -> Self {
        Term::default()
    }

    pub fn vars(&self) -> &VarPowers {
        &self.vars
    }

    pub fn derivs(&self) -> &BTreeMap<DerivSym, u32> {
        &self.derivs
    }

    pub fn exp_arg(&self) -> &Poly {
        &self.exp
    }

    pub fn trig(&self) -> &BTreeMap<(AtomKind, Poly), u32> {
        &self.trig
    }

    pub fn has_atoms(&self) -> bool {
        !self.exp.is_zero() || !self.trig.is_empty()
    }

    pub fn mul(&self, other: &Term) -> Term {
        let mut trig = self.trig.clone();
        for (k, e) in &other.trig {
            *trig.entry(k.clone()).or_insert(0) += e;
        }
        let mut derivs = self.derivs.clone();
        for (k, e) in &other.derivs {
            *derivs.entry(k.clone()).or_insert(0) += e;
        }
        Term {
            exp: self.exp.add(&other.exp),
            trig,
            derivs,
            vars: self.vars.mul(&other.vars),
        }
    }

    /// Same term with the unknown-function factors removed.
    pub fn without_derivs(&self) -> Term {
        Term {
            derivs: BTreeMap::new(),
            ..self.clone()
        }
    }

    fn with_vars(&self, vars: VarPowers) -> Term {
        Term {
            vars,
            ..self.clone()
        }
    }

    fn with_deriv_power(&self, sym: &DerivSym, power: u32) -> Term {
        let mut out = self.clone();
        if power == 0 {
            out.derivs.remove(sym);
        } else {
            out.derivs.insert(sym.clone(), power);
        }
        out
    }

    fn with_trig_power(&self, key: &(AtomKind, Poly), power: u32) -> Term {
        let mut out = self.clone();
        if power == 0 {
            out.trig.remove(key);
        } else {
            out.trig.insert(key.clone(), power);
        }
        out
    }

    pub fn to_expr(&self, coeff: &Rational) -> Expr {
        let mut factors = Vec::new();
        if !coeff.is_one() {
            factors.push(Expr::Rational(coeff.clone()));
        }
        for (v, e) in self.vars.iter() {
            factors.push(power_expr(Expr::Var(v.clone()), *e));
        }
        for (d, e) in &self.derivs {
            factors.push(power_expr(Expr::Deriv(d.clone()), *e));
        }
        if !self.exp.is_zero() {
            factors.push(Expr::Atom(AtomKind::Exp, Box::new(self.exp.to_expr())));
        }
        for ((kind, arg), e) in &self.trig {
            factors.push(power_expr(Expr::Atom(*kind, Box::new(arg.to_expr())), *e));
        }
        match factors.len() {
            0 => Expr::Rational(coeff.clone()),
            1 => factors.pop().unwrap(),
            _ => Expr::Product(factors),
        }
    }
}

fn power_expr(base: Expr, e: u32) -> Expr {
    if e == 1 {
        base
    } else {
        Expr::Power(Box::new(base), e as i64)
    }
}

/// Fully expanded sum of `coefficient * Term`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalForm {
    terms: BTreeMap<Term, Rational>,
}

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm::default()
    }

    pub fn one() -> Self {
        NormalForm::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        NormalForm::from_term(Term::one(), q)
    }

    pub fn from_term(term: Term, coeff: Rational) -> Self {
        let mut nf = NormalForm::zero();
        nf.add_term(term, coeff);
        nf
    }

    pub fn var(name: &str) -> Self {
        NormalForm::from_term(
            Term::one().with_vars(VarPowers::single(name, 1)),
            Rational::one(),
        )
    }

    pub fn deriv(sym: DerivSym) -> Self {
        NormalForm::from_term(Term::one().with_deriv_power(&sym, 1), Rational::one())
    }

    pub fn from_poly(p: &Poly) -> Self {
        let mut nf = NormalForm::zero();
        for (m, c) in p.terms() {
            nf.add_term(Term::one().with_vars(m.clone()), c.clone());
        }
        nf
    }

    /// Builds `kind(arg)` with `exp(0) = cos(0) = 1`, `sin(0) = 0`, and the
    /// argument sign normalized for the odd/even trig functions.
    pub fn atom(kind: AtomKind, arg: Poly) -> Self {
        if arg.is_zero() {
            return match kind {
                AtomKind::Sin => NormalForm::zero(),
                AtomKind::Exp | AtomKind::Cos => NormalForm::one(),
            };
        }
        match kind {
            AtomKind::Exp => NormalForm::from_term(
                Term {
                    exp: arg,
                    ..Term::one()
                },
                Rational::one(),
            ),
            AtomKind::Sin | AtomKind::Cos => {
                let (arg, negate) = if arg.leading_is_negative() {
                    (arg.neg(), kind == AtomKind::Sin)
                } else {
                    (arg, false)
                };
                let nf = NormalForm::from_term(
                    Term::one().with_trig_power(&(kind, arg), 1),
                    Rational::one(),
                );
                if negate {
                    nf.neg()
                } else {
                    nf
                }
            }
        }
    }

    fn add_term(&mut self, term: Term, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(term) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (t, c) in &other.terms {
            self.add_term(t.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NormalForm {
            terms: self.terms.iter().map(|(t, c)| (t.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            terms: self.terms.iter().map(|(t, c)| (t.clone(), c * q)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    /// Product, dropping every term whose degree in `cap.0` exceeds `cap.1`.
    pub fn mul_truncated(&self, other: &Self, cap: Option<(&str, u32)>) -> Self {
        let mut out = NormalForm::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                if let Some((v, max)) = cap {
                    if ta.vars.exponent(v) + tb.vars.exponent(v) > max {
                        continue;
                    }
                }
                out.add_term(ta.mul(tb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        self.pow_truncated(n, None)
    }

    pub fn pow_truncated(&self, n: u32, cap: Option<(&str, u32)>) -> Self {
        let mut out = NormalForm::one();
        for _ in 0..n {
            out = out.mul_truncated(self, cap);
        }
        out
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Term::one()).cloned(),
            _ => None,
        }
    }

    /// The expression as a plain polynomial, if it has no atoms or unknowns.
    pub fn as_poly(&self) -> Option<Poly> {
        let mut p = Poly::zero();
        for (t, c) in &self.terms {
            if t.has_atoms() || !t.derivs.is_empty() {
                return None;
            }
            p.add_term(t.vars.clone(), c.clone());
        }
        Some(p)
    }

    pub fn contains_derivs(&self) -> bool {
        self.terms.keys().any(|t| !t.derivs.is_empty())
    }

    pub fn deriv_symbols(&self) -> BTreeSet<DerivSym> {
        self.terms
            .keys()
            .flat_map(|t| t.derivs.keys().cloned())
            .collect()
    }

    /// Every variable occurring anywhere, including inside atom arguments.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in self.terms.keys() {
            out.extend(t.vars.iter().map(|(v, _)| v.clone()));
            out.extend(t.exp.variables());
            for (_, arg) in t.trig.keys() {
                out.extend(arg.variables());
            }
        }
        out
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        self.terms
            .keys()
            .map(|t| t.vars.exponent(var))
            .max()
            .unwrap_or(0)
    }

    /// Collects the coefficient of `var^n`, treating `var` as the only
    /// polynomial variable of interest. Atom arguments are left untouched.
    pub fn coefficient_of(&self, var: &str, n: u32) -> NormalForm {
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            if t.vars.exponent(var) == n {
                out.add_term(t.with_vars(t.vars.with_exponent(var, 0)), c.clone());
            }
        }
        out
    }

    pub fn differentiate(&self, var: &str) -> NormalForm {
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            let e = t.vars.exponent(var);
            if e > 0 {
                out.add_term(
                    t.with_vars(t.vars.with_exponent(var, e - 1)),
                    c * Rational::from_integer(e.into()),
                );
            }
            for (sym, p) in &t.derivs {
                let next = sym.differentiated(var, 1);
                let lowered = t.with_deriv_power(sym, p - 1);
                let raised_power = lowered.derivs.get(&next).copied().unwrap_or(0) + 1;
                out.add_term(
                    lowered.with_deriv_power(&next, raised_power),
                    c * Rational::from_integer((*p).into()),
                );
            }
            if !t.exp.is_zero() {
                let inner = t.exp.derivative(var);
                if !inner.is_zero() {
                    let term = NormalForm::from_term(t.clone(), c.clone());
                    out.add_assign(&term.mul(&NormalForm::from_poly(&inner)));
                }
            }
            for (key, p) in &t.trig {
                let inner = key.1.derivative(var);
                if inner.is_zero() {
                    continue;
                }
                let lowered = t.with_trig_power(key, p - 1);
                let (other_kind, sign) = match key.0 {
                    AtomKind::Sin => (AtomKind::Cos, Rational::one()),
                    AtomKind::Cos => (AtomKind::Sin, -Rational::one()),
                    AtomKind::Exp => unreachable!("exp is never stored as a trig factor"),
                };
                let other_key = (other_kind, key.1.clone());
                let power = lowered.trig.get(&other_key).copied().unwrap_or(0) + 1;
                let term = NormalForm::from_term(
                    lowered.with_trig_power(&other_key, power),
                    c * Rational::from_integer((*p).into()) * sign,
                );
                out.add_assign(&term.mul(&NormalForm::from_poly(&inner)));
            }
        }
        out
    }

    /// Simultaneous substitution of variables. Values substituted into atom
    /// arguments must be polynomials.
    pub fn substitute(&self, values: &BTreeMap<String, NormalForm>) -> Result<NormalForm, ExprError> {
        let mut poly_values: BTreeMap<String, Poly> = BTreeMap::new();
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            let mut acc = NormalForm::constant(c.clone());
            for (v, e) in t.vars.iter() {
                let factor = match values.get(v) {
                    Some(value) => value.pow(*e),
                    None => NormalForm::from_term(
                        Term::one().with_vars(VarPowers::single(v, *e)),
                        Rational::one(),
                    ),
                };
                acc = acc.mul(&factor);
            }
            for (sym, p) in &t.derivs {
                acc = acc.mul(&NormalForm::deriv(sym.clone()).pow(*p));
            }
            if !t.exp.is_zero() {
                let arg = substitute_poly(&t.exp, values, &mut poly_values, AtomKind::Exp)?;
                acc = acc.mul(&NormalForm::atom(AtomKind::Exp, arg));
            }
            for ((kind, arg), p) in &t.trig {
                let arg = substitute_poly(arg, values, &mut poly_values, *kind)?;
                acc = acc.mul(&NormalForm::atom(*kind, arg).pow(*p));
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    /// Replaces every unknown-function symbol using `image`, optionally
    /// truncating products in the degree of one variable.
    pub fn substitute_derivs<E, F>(&self, mut image: F, cap: Option<(&str, u32)>) -> Result<NormalForm, E>
    where
        F: FnMut(&DerivSym) -> Result<NormalForm, E>,
    {
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            let mut acc = NormalForm::from_term(t.without_derivs(), c.clone());
            for (sym, p) in &t.derivs {
                let value = image(sym)?;
                acc = acc.mul_truncated(&value.pow_truncated(*p, cap), cap);
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    pub fn truncate(&self, var: &str, max: u32) -> NormalForm {
        NormalForm {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.vars.exponent(var) <= max)
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn from_expr(e: &Expr) -> Result<NormalForm, ExprError> {
        match e {
            Expr::Rational(q) => Ok(NormalForm::constant(q.clone())),
            Expr::Var(v) => Ok(NormalForm::var(v)),
            Expr::Deriv(sym) => Ok(NormalForm::deriv(sym.clone())),
            Expr::Sum(items) => {
                let mut acc = NormalForm::zero();
                for item in items {
                    acc.add_assign(&NormalForm::from_expr(item)?);
                }
                Ok(acc)
            }
            Expr::Product(items) => {
                let mut acc = NormalForm::one();
                for item in items {
                    acc = acc.mul(&NormalForm::from_expr(item)?);
                    if acc.is_zero() {
                        break;
                    }
                }
                Ok(acc)
            }
            Expr::Power(base, n) => {
                let b = NormalForm::from_expr(base)?;
                if *n >= 0 {
                    return Ok(b.pow(*n as u32));
                }
                b.inverse_pow(n.unsigned_abs() as u32).ok_or_else(|| {
                    let subterm = e.to_string();
                    if b.contains_derivs() {
                        ExprError::NonPolynomialInUnknown { subterm }
                    } else {
                        ExprError::Unsupported(format!(
                            "negative power of a possibly vanishing expression: {subterm}"
                        ))
                    }
                })
            }
            Expr::Atom(kind, arg) => {
                let a = NormalForm::from_expr(arg)?;
                if a.contains_derivs() {
                    return Err(ExprError::NonPolynomialInUnknown {
                        subterm: e.to_string(),
                    });
                }
                let poly = a.as_poly().ok_or_else(|| ExprError::NonPolynomialArgument {
                    kind: kind.name(),
                    subterm: e.to_string(),
                })?;
                Ok(NormalForm::atom(*kind, poly))
            }
        }
    }

    /// `self^-n` when `self` is `c * exp(P)` with `c != 0`.
    fn inverse_pow(&self, n: u32) -> Option<NormalForm> {
        if self.terms.len() != 1 {
            return None;
        }
        let (t, c) = self.terms.iter().next()?;
        if !t.vars.is_one() || !t.derivs.is_empty() || !t.trig.is_empty() {
            return None;
        }
        let inv = c.recip();
        let scale = Rational::from_integer(n.into());
        Some(
            NormalForm::atom(AtomKind::Exp, t.exp.scale(&-scale))
                .scale(&num_traits::pow(inv, n as usize)),
        )
    }

    pub fn to_expr(&self) -> Expr {
        let mut items: Vec<Expr> = self.terms.iter().map(|(t, c)| t.to_expr(c)).collect();
        match items.len() {
            0 => Expr::Rational(Rational::zero()),
            1 => items.pop().unwrap(),
            _ => Expr::Sum(items),
        }
    }
}

fn substitute_poly(
    arg: &Poly,
    values: &BTreeMap<String, NormalForm>,
    cache: &mut BTreeMap<String, Poly>,
    kind: AtomKind,
) -> Result<Poly, ExprError> {
    for v in arg.variables() {
        if cache.contains_key(&v) {
            continue;
        }
        if let Some(value) = values.get(&v) {
            let p = value.as_poly().ok_or_else(|| {
                ExprError::Unsupported(format!(
                    "substituting {} into the argument of {} leaves the polynomial class",
                    value.to_expr(),
                    kind.name()
                ))
            })?;
            cache.insert(v, p);
        }
    }
    Ok(arg.substitute(cache))
}
