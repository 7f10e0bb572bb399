//! Exact scalar expressions.
//!
//! An [`Expr`] is a finite sum of monomials with rational coefficients. A
//! monomial is a product of atoms raised to rational exponents, where an atom
//! is a named generator or a prime number. Sums under a non-integer or
//! negative power cannot be expanded and become opaque atoms.
//!
//! Every constructor returns the canonical form:
//!
//! * like monomials are collected and zero coefficients dropped;
//! * prime atoms carry exponents in `(0, 1)`, the integer part being folded
//!   into the rational coefficient;
//! * opaque bases carry exponents below 1, positive integer parts are expanded;
//! * opaque bases are primitive: positive unit content and no common
//!   generator factor;
//! * when an opaque base appears with a negative exponent, the polynomial
//!   numerator sharing that denominator is divided by the base as often as the
//!   division is exact.
//!
//! For expressions without opaque bases whose generators are algebraically
//! independent, structural equality of canonical forms is semantic equality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Exact rational coefficient.
pub type Q = BigRational;
/// Rational exponent.
pub type Exp = Ratio<i64>;

/// Build a rational coefficient from a numerator and denominator.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Build a rational exponent.
pub fn ex(n: i64, d: i64) -> Exp {
    Exp::new(n, d)
}

/// An interned-by-value generator name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(name: &str) -> Self {
        Sym(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Gen(Sym),
    Prime(u64),
    Base(Arc<Expr>),
}

/// A product of atoms with nonzero rational exponents, sorted by atom.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Mono(pub Vec<(Atom, Exp)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if !e.is_zero() {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Mono(out)
    }

    fn pow(&self, e: Exp) -> Mono {
        if e.is_zero() {
            return Mono::one();
        }
        Mono(self.0.iter().map(|(a, x)| (a.clone(), *x * e)).collect())
    }

    fn exponent_of(&self, atom: &Atom) -> Exp {
        self.0
            .iter()
            .find(|(a, _)| a == atom)
            .map(|(_, e)| *e)
            .unwrap_or_else(Exp::zero)
    }

    /// True when every atom is a generator with a nonnegative integer exponent.
    fn is_polynomial(&self) -> bool {
        self.0
            .iter()
            .all(|(a, e)| matches!(a, Atom::Gen(_)) && e.is_integer() && *e.numer() > 0)
    }
}

/// Canonical sum of monomials.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Expr {
    terms: Vec<(Mono, Q)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("generator `{0}` has no value at this point")]
    Unassigned(String),
    #[error("domain error: {0}")]
    Domain(String),
}

fn frac_floor(e: Exp) -> (i64, Exp) {
    let fl = e.floor();
    (fl.to_integer(), e - fl)
}

fn int_pow_q(base: &Q, n: i64) -> Q {
    if n >= 0 {
        num_traits::pow(base.clone(), n as usize)
    } else {
        num_traits::pow(base.recip(), (-n) as usize)
    }
}

fn factor_u64(mut n: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Accumulates canonical terms.
#[derive(Default)]
struct Acc(BTreeMap<Mono, Q>);

impl Acc {
    fn add_raw(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Insert a term after bringing its atoms into canonical ranges.
    fn push(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let mut coef = c;
        let mut rest = Vec::with_capacity(m.0.len());
        let mut expand: Vec<(Arc<Expr>, i64)> = Vec::new();
        for (atom, e) in m.0 {
            match atom {
                Atom::Prime(p) => {
                    let (fl, f) = frac_floor(e);
                    if fl != 0 {
                        coef *= int_pow_q(&Q::from_integer(BigInt::from(p)), fl);
                    }
                    if !f.is_zero() {
                        rest.push((Atom::Prime(p), f));
                    }
                }
                Atom::Base(b) => {
                    if e >= Exp::one() {
                        let (fl, f) = frac_floor(e);
                        expand.push((b.clone(), fl));
                        if !f.is_zero() {
                            rest.push((Atom::Base(b), f));
                        }
                    } else {
                        rest.push((Atom::Base(b), e));
                    }
                }
                g => rest.push((g, e)),
            }
        }
        if expand.is_empty() {
            self.add_raw(Mono(rest), coef);
        } else {
            let mut poly = Expr::from_mono(Mono(rest), coef);
            for (b, n) in expand {
                poly = &poly * &b.powi(n as u32);
            }
            for (m, c) in poly.terms {
                self.add_raw(m, c);
            }
        }
    }

    fn finish(self) -> Expr {
        let terms: Vec<(Mono, Q)> = self.0.into_iter().collect();
        Expr {
            terms: reduce_denominators(terms),
        }
    }
}

/// Class key of a term: the fractional parts of its opaque-base exponents.
fn class_key(m: &Mono) -> Vec<(Arc<Expr>, Exp)> {
    m.0.iter()
        .filter_map(|(a, e)| match a {
            Atom::Base(b) => {
                let (_, f) = frac_floor(*e);
                if f.is_zero() {
                    None
                } else {
                    Some((b.clone(), f))
                }
            }
            _ => None,
        })
        .collect()
}

fn reduce_denominators(terms: Vec<(Mono, Q)>) -> Vec<(Mono, Q)> {
    let has_den = terms.iter().any(|(m, _)| {
        m.0.iter()
            .any(|(a, e)| matches!(a, Atom::Base(_)) && *e < Exp::zero())
    });
    if !has_den {
        return terms;
    }
    let mut classes: BTreeMap<Vec<(Arc<Expr>, Exp)>, Vec<(Mono, Q)>> = BTreeMap::new();
    for t in terms {
        classes.entry(class_key(&t.0)).or_default().push(t);
    }
    let mut out = Acc::default();
    for (_, cls) in classes {
        let mut bases: BTreeSet<Arc<Expr>> = BTreeSet::new();
        for (m, _) in &cls {
            for (a, _) in &m.0 {
                if let Atom::Base(b) = a {
                    bases.insert(b.clone());
                }
            }
        }
        let mut dens: Vec<(Arc<Expr>, Exp)> = Vec::new();
        for b in &bases {
            let atom = Atom::Base(b.clone());
            let min = cls
                .iter()
                .map(|(m, _)| m.exponent_of(&atom))
                .min()
                .unwrap_or_else(Exp::zero);
            if min < Exp::zero() {
                dens.push((b.clone(), min));
            }
        }
        if dens.is_empty() {
            for (m, c) in cls {
                out.add_raw(m, c);
            }
            continue;
        }
        let shift = Mono(
            dens.iter()
                .map(|(b, e)| (Atom::Base(b.clone()), -*e))
                .collect(),
        );
        let mut num = Acc::default();
        for (m, c) in cls {
            num.push(m.mul(&shift), c);
        }
        let mut p = Expr {
            terms: num.0.into_iter().collect(),
        };
        for (b, e) in dens.iter_mut() {
            while *e < Exp::zero() && !p.is_zero() {
                match p.div_exact_poly(b) {
                    Some(qt) => {
                        p = qt;
                        *e += Exp::one();
                    }
                    None => break,
                }
            }
        }
        let den_mono = Mono(
            dens.into_iter()
                .filter(|(_, e)| !e.is_zero())
                .map(|(b, e)| (Atom::Base(b), e))
                .collect(),
        );
        for (m, c) in p.terms {
            out.add_raw(m.mul(&den_mono), c);
        }
    }
    out.0.into_iter().collect()
}

/// Lexicographic comparison of polynomial monomials (earlier generator names
/// dominate).
fn lex_cmp(a: &Mono, b: &Mono) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.0.get(i), b.0.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ex.cmp(ey) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    o => return o,
                },
            },
        }
    }
}

fn mono_divides(d: &Mono, m: &Mono) -> bool {
    d.0.iter().all(|(a, e)| m.exponent_of(a) >= *e)
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_q(Q::one())
    }

    pub fn int(n: i64) -> Self {
        Self::from_q(Q::from_integer(BigInt::from(n)))
    }

    pub fn rat(n: i64, d: i64) -> Self {
        Self::from_q(q(n, d))
    }

    pub fn from_q(c: Q) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Expr {
                terms: vec![(Mono::one(), c)],
            }
        }
    }

    pub fn gen(name: &str) -> Self {
        Expr {
            terms: vec![(Mono(vec![(Atom::Gen(Sym::new(name)), Exp::one())]), Q::one())],
        }
    }

    pub fn from_sym(s: &Sym) -> Self {
        Expr {
            terms: vec![(Mono(vec![(Atom::Gen(s.clone()), Exp::one())]), Q::one())],
        }
    }

    fn from_mono(m: Mono, c: Q) -> Self {
        let mut acc = Acc::default();
        acc.push(m, c);
        acc.finish()
    }

    pub fn terms(&self) -> &[(Mono, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_const().map(|c| c.is_one()).unwrap_or(false)
    }

    /// The rational value when the expression is constant (no atoms at all).
    pub fn as_const(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        self.as_const().is_some()
    }

    /// True when no opaque base occurs anywhere.
    pub fn has_opaque(&self) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.0.iter().any(|(a, _)| matches!(a, Atom::Base(_))))
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_polynomial())
    }

    pub fn scale(&self, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let mut acc = Acc::default();
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            acc.add_raw(m.clone(), c.clone());
        }
        acc.finish()
    }

    pub fn neg(&self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = self.as_const() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_const() {
            return self.scale(&c);
        }
        let mut acc = Acc::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                acc.push(ma.mul(mb), ca * cb);
            }
        }
        acc.finish()
    }

    pub fn powi(&self, n: u32) -> Expr {
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Rational power. Panics on zero raised to a non-positive power.
    pub fn pow(&self, e: Exp) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if self.is_zero() {
            assert!(e > Exp::zero(), "zero raised to a non-positive power");
            return Expr::zero();
        }
        if e.is_integer() && e > Exp::zero() {
            return self.powi(e.to_integer() as u32);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return rational_pow(c, e).mul(&Expr::from_mono(m.pow(e), Q::one()));
        }
        // Opaque base: split off positive content and the common generator factor.
        let lead = &self.terms[self.terms.len() - 1].1;
        let content = lead.abs();
        let mut common: Vec<(Atom, Exp)> = Vec::new();
        if let Some((first, _)) = self.terms.first() {
            for (a, _) in &first.0 {
                if let Atom::Gen(_) = a {
                    let min = self
                        .terms
                        .iter()
                        .map(|(m, _)| m.exponent_of(a))
                        .min()
                        .unwrap_or_else(Exp::zero);
                    if !min.is_zero() && self.terms.iter().all(|(m, _)| !m.exponent_of(a).is_zero()) {
                        common.push((a.clone(), min));
                    }
                }
            }
        }
        let common = Mono(common);
        let inv = common.pow(-Exp::one());
        let base_terms: Vec<(Mono, Q)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.mul(&inv), c / &content))
            .collect();
        let mut acc = Acc::default();
        for (m, c) in base_terms {
            acc.add_raw(m, c);
        }
        let base = acc.finish();
        let atom = Mono(vec![(Atom::Base(Arc::new(base)), e)]);
        rational_pow(&content, e).mul(&Expr::from_mono(atom.mul(&common.pow(e)), Q::one()))
    }

    pub fn sqrt(&self) -> Expr {
        self.pow(ex(1, 2))
    }

    pub fn recip(&self) -> Expr {
        self.pow(ex(-1, 1))
    }

    /// Exact polynomial division, returning `None` unless both operands are
    /// polynomials and the division leaves no remainder.
    fn div_exact_poly(&self, d: &Expr) -> Option<Expr> {
        if !self.is_polynomial() || !d.is_polynomial() || d.is_zero() {
            return None;
        }
        let lead = |e: &Expr| -> Option<(Mono, Q)> {
            e.terms
                .iter()
                .max_by(|a, b| lex_cmp(&a.0, &b.0))
                .cloned()
        };
        let (ld, lc) = lead(d)?;
        let inv = ld.pow(-Exp::one());
        let mut rem = self.clone();
        let mut quot = Acc::default();
        let mut steps = 0usize;
        while let Some((lm, cm)) = lead(&rem) {
            if !mono_divides(&ld, &lm) {
                return None;
            }
            steps += 1;
            if steps > 100_000 {
                return None;
            }
            let tm = lm.mul(&inv);
            let tc = cm / &lc;
            quot.add_raw(tm.clone(), tc.clone());
            rem = rem.sub(&Expr::from_mono(tm, tc).mul(d));
        }
        Some(quot.finish())
    }

    /// Partial derivative with respect to a generator.
    pub fn diff(&self, g: &Sym) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in &self.terms {
            for (idx, (a, e)) in m.0.iter().enumerate() {
                let inner = match a {
                    Atom::Gen(h) if h == g => Expr::one(),
                    Atom::Base(b) => b.diff(g),
                    _ => continue,
                };
                if inner.is_zero() {
                    continue;
                }
                let mut rest = m.0.clone();
                let new_e = *e - Exp::one();
                if new_e.is_zero() {
                    rest.remove(idx);
                } else {
                    rest[idx].1 = new_e;
                }
                let coef = c * Q::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()));
                let term = Expr::from_mono(Mono(rest), coef).mul(&inner);
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// All generators occurring anywhere, including inside opaque bases.
    pub fn gens(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_gens(&mut out);
        out
    }

    fn collect_gens(&self, out: &mut BTreeSet<Sym>) {
        for (m, _) in &self.terms {
            for (a, _) in &m.0 {
                match a {
                    Atom::Gen(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Base(b) => b.collect_gens(out),
                    Atom::Prime(_) => {}
                }
            }
        }
    }

    /// Replace generators by expressions; generators mapped to `None` stay.
    pub fn subst(&self, f: &dyn Fn(&Sym) -> Option<Expr>) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in &self.terms {
            let mut t = Expr::from_q(c.clone());
            for (a, e) in &m.0 {
                let base = match a {
                    Atom::Gen(s) => f(s).unwrap_or_else(|| Expr::from_sym(s)),
                    Atom::Prime(p) => Expr::from_q(Q::from_integer(BigInt::from(*p))),
                    Atom::Base(b) => b.subst(f),
                };
                t = t.mul(&base.pow(*e));
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn eval(&self, env: &dyn Fn(&Sym) -> Option<f64>) -> Result<f64, EvalError> {
        self.eval_cached(env, &mut HashMap::new())
    }

    /// Evaluation that remembers opaque bases by allocation, since the same
    /// shared base typically recurs across many monomials.
    fn eval_cached(
        &self,
        env: &dyn Fn(&Sym) -> Option<f64>,
        cache: &mut HashMap<*const Expr, f64>,
    ) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (a, e) in &m.0 {
                let v = match a {
                    Atom::Gen(s) => env(s).ok_or_else(|| EvalError::Unassigned(s.to_string()))?,
                    Atom::Prime(p) => *p as f64,
                    Atom::Base(b) => {
                        let key = Arc::as_ptr(b);
                        match cache.get(&key) {
                            Some(v) => *v,
                            None => {
                                let v = b.eval_cached(env, cache)?;
                                cache.insert(key, v);
                                v
                            }
                        }
                    }
                };
                t *= real_pow(v, *e)?;
            }
            total += t;
        }
        Ok(total)
    }

    /// Total number of monomials, counting inside opaque bases.
    pub fn size(&self) -> usize {
        self.terms
            .iter()
            .map(|(m, _)| {
                1 + m
                    .0
                    .iter()
                    .map(|(a, _)| match a {
                        Atom::Base(b) => b.size(),
                        _ => 0,
                    })
                    .sum::<usize>()
            })
            .sum()
    }
}

fn real_pow(v: f64, e: Exp) -> Result<f64, EvalError> {
    if e.is_integer() {
        let n = e.to_integer();
        if v == 0.0 && n < 0 {
            return Err(EvalError::Domain("zero raised to a negative power".into()));
        }
        return Ok(v.powi(n as i32));
    }
    if v < 0.0 {
        return Err(EvalError::Domain(format!(
            "negative base {v} under fractional power {e}"
        )));
    }
    if v == 0.0 && e < Exp::zero() {
        return Err(EvalError::Domain("zero raised to a negative power".into()));
    }
    Ok(v.powf(*e.numer() as f64 / *e.denom() as f64))
}

/// `c^e` for a rational constant, factoring into prime atoms when needed.
fn rational_pow(c: &Q, e: Exp) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if e.is_integer() {
        return Expr::from_q(int_pow_q(c, e.to_integer()));
    }
    let mut sign = Q::one();
    let mut mag = c.clone();
    if c.is_negative() {
        if e.denom() % 2 == 0 {
            let base = Expr::from_q(c.clone());
            return Expr::from_mono(Mono(vec![(Atom::Base(Arc::new(base)), e)]), Q::one());
        }
        if e.numer().is_odd() {
            sign = -Q::one();
        }
        mag = -mag;
    }
    let mut atoms: BTreeMap<Atom, Exp> = BTreeMap::new();
    let mut fallback = Q::one();
    for (part, s) in [(mag.numer().clone(), 1i64), (mag.denom().clone(), -1i64)] {
        match part.to_u64() {
            Some(n) => {
                for (p, k) in factor_u64(n) {
                    *atoms.entry(Atom::Prime(p)).or_insert_with(Exp::zero) += Exp::from(k * s) * e;
                }
            }
            None => {
                let v = Q::from_integer(part);
                fallback *= if s > 0 { v } else { v.recip() };
            }
        }
    }
    let mut m = Mono(
        atoms
            .into_iter()
            .filter(|(_, x)| !x.is_zero())
            .collect(),
    );
    if !fallback.is_one() {
        let base = Expr::from_q(fallback);
        m = m.mul(&Mono(vec![(Atom::Base(Arc::new(base)), e)]));
    }
    Expr::from_mono(m, sign)
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_exp(e: &Exp) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn fmt_term(m: &Mono, c: &Q) -> String {
    let mut factors: Vec<String> = Vec::new();
    for (a, e) in &m.0 {
        let base = match a {
            Atom::Gen(s) => s.to_string(),
            Atom::Prime(p) => p.to_string(),
            Atom::Base(b) => b.to_string(),
        };
        if e.is_one() {
            factors.push(base);
        } else {
            factors.push(format!("(^ {} {})", base, fmt_exp(e)));
        }
    }
    if factors.is_empty() {
        return fmt_q(c);
    }
    if c.is_one() && factors.len() == 1 {
        return factors.pop().unwrap();
    }
    let mut s = String::from("(*");
    if !c.is_one() {
        s.push(' ');
        s.push_str(&fmt_q(c));
    }
    for f in factors {
        s.push(' ');
        s.push_str(&f);
    }
    s.push(')');
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.terms.as_slice() {
            [] => write!(f, "0"),
            [(m, c)] => write!(f, "{}", fmt_term(m, c)),
            ts => {
                write!(f, "(+")?;
                for (m, c) in ts {
                    write!(f, " {}", fmt_term(m, c))?;
                }
                write!(f, ")")
            }
        }
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Q> for Expr {
    fn from(c: Q) -> Self {
        Expr::from_q(c)
    }
}

/// Parse failure with a 1-based column into the input string.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

/// Parse a rational literal such as `-3`, `2/5`.
pub fn parse_rational(s: &str) -> Option<Q> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

fn parse_exp(s: &str) -> Option<Exp> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: i64 = n.parse().ok()?;
    let d: i64 = d.parse().ok()?;
    if d == 0 {
        return None;
    }
    Some(Exp::new(n, d))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, at: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            column: self.src[..at].chars().count() + 1,
            message: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let c = rest.chars().next()?;
        if c == '(' || c == ')' {
            self.pos += 1;
            return Some((start, &self.src[start..start + 1]));
        }
        let len = rest
            .find(|ch: char| ch.is_whitespace() || ch == '(' || ch == ')')
            .unwrap_or(rest.len());
        self.pos += len;
        Some((start, &self.src[start..start + len]))
    }

    fn peek_close(&mut self) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(')')
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let (at, tok) = self
            .token()
            .ok_or_else(|| self.err(self.src.len(), "unexpected end of input"))?;
        if tok == "(" {
            let (op_at, op) = self
                .token()
                .ok_or_else(|| self.err(self.src.len(), "missing operator"))?;
            let mut args = Vec::new();
            if op == "^" {
                let base = self.expr()?;
                let (e_at, e_tok) = self
                    .token()
                    .ok_or_else(|| self.err(self.src.len(), "missing exponent"))?;
                let e = parse_exp(e_tok)
                    .ok_or_else(|| self.err(e_at, format!("invalid exponent `{e_tok}`")))?;
                self.close()?;
                if base.is_zero() && e <= Exp::zero() {
                    return Err(self.err(at, "zero raised to a non-positive power"));
                }
                return Ok(base.pow(e));
            }
            while !self.peek_close() {
                if self.pos >= self.src.len() {
                    return Err(self.err(self.src.len(), "unbalanced parenthesis"));
                }
                args.push(self.expr()?);
            }
            self.close()?;
            match op {
                "+" => Ok(args.iter().fold(Expr::zero(), |a, b| a.add(b))),
                "*" => Ok(args.iter().fold(Expr::one(), |a, b| a.mul(b))),
                "-" => match args.len() {
                    0 => Err(self.err(op_at, "`-` needs an argument")),
                    1 => Ok(args[0].neg()),
                    _ => Ok(args[1..].iter().fold(args[0].clone(), |a, b| a.sub(b))),
                },
                other => Err(self.err(op_at, format!("unknown operator `{other}`"))),
            }
        } else if tok == ")" {
            Err(self.err(at, "unexpected `)`"))
        } else if let Some(c) = parse_rational(tok) {
            Ok(Expr::from_q(c))
        } else if is_ident(tok) {
            Ok(Expr::gen(tok))
        } else {
            Err(self.err(at, format!("invalid token `{tok}`")))
        }
    }

    fn close(&mut self) -> Result<(), ParseError> {
        match self.token() {
            Some((_, ")")) => Ok(()),
            Some((at, t)) => Err(self.err(at, format!("expected `)`, found `{t}`"))),
            None => Err(self.err(self.src.len(), "expected `)`")),
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse the prefix grammar: `(+ ...)`, `(* ...)`, `(- ...)`, `(^ base p/q)`,
/// rational literals and generator names.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.err(p.pos, "trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> Expr {
        Expr::gen(s)
    }

    #[test]
    fn collects_like_terms() {
        let e = &g("x") + &g("x");
        assert_eq!(e, g("x").scale(&q(2, 1)));
        assert!((&g("x") - &g("x")).is_zero());
    }

    #[test]
    fn merges_generator_powers() {
        let r = g("r");
        let e = r.pow(ex(1, 3)).mul(&r.pow(ex(2, 3)));
        assert_eq!(e, r);
        assert_eq!(r.pow(ex(3, 1)).pow(ex(4, 9)), r.pow(ex(4, 3)));
    }

    #[test]
    fn prime_atoms_fold_integer_parts() {
        let two = Expr::int(2);
        assert_eq!(two.sqrt().mul(&two.sqrt()), two);
        let e = Expr::int(8).sqrt();
        assert_eq!(e, Expr::int(2).mul(&two.sqrt()));
        assert_eq!(Expr::rat(9, 4).sqrt(), Expr::rat(3, 2));
    }

    #[test]
    fn opaque_base_expands_at_integer_exponents() {
        let b = &(&g("x") * &g("x")) + &Expr::one();
        let s = b.sqrt();
        assert_eq!(s.mul(&s), b);
        assert_eq!(b.recip().mul(&b), Expr::one());
    }

    #[test]
    fn denominators_cancel_by_exact_division() {
        let b = &(&g("x") * &g("x")) + &(&g("y") * &g("y"));
        let num = &(&g("x") * &b) + &(&g("y") * &b);
        let e = num.mul(&b.recip());
        assert_eq!(e, &g("x") + &g("y"));
    }

    #[test]
    fn content_and_common_factor_are_pulled_out() {
        let b = &g("x").scale(&q(4, 1)) + &g("y").scale(&q(4, 1));
        let s = b.sqrt();
        let expect = Expr::int(2).mul(&(&g("x") + &g("y")).sqrt());
        assert_eq!(s, expect);
        let xy = &(&g("x") * &g("x")) + &(&g("x") * &g("y"));
        let lhs = xy.sqrt();
        let rhs = g("x").sqrt().mul(&(&g("x") + &g("y")).sqrt());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_of_opaque_power() {
        let b = &(&g("x") * &g("x")) + &Expr::one();
        let d = b.pow(ex(1, 4)).diff(&Sym::new("x"));
        let expect = g("x").scale(&q(1, 2)).mul(&b.pow(ex(-3, 4)));
        assert_eq!(d, expect);
    }

    #[test]
    fn evaluation_and_domain_errors() {
        let e = parse("(+ (* 2 x) (^ y 1/2))").unwrap();
        let env = |s: &Sym| match s.as_str() {
            "x" => Some(1.5),
            "y" => Some(4.0),
            _ => None,
        };
        assert!((e.eval(&env).unwrap() - 5.0).abs() < 1e-15);
        let bad = |s: &Sym| if s.as_str() == "y" { Some(-1.0) } else { Some(0.0) };
        assert!(matches!(e.eval(&bad), Err(EvalError::Domain(_))));
        let none = |_: &Sym| None;
        assert!(matches!(e.eval(&none), Err(EvalError::Unassigned(_))));
    }

    #[test]
    fn display_parse_round_trip() {
        let cases = [
            "(+ (* 2/3 x) (^ y 1/2))",
            "(* -1 x y)",
            "(^ (+ 1 (* 2 x)) -1/4)",
            "(+ 1 (* 3 (^ 2 1/2) z))",
        ];
        for c in cases {
            let e = parse(c).unwrap();
            let back = parse(&e.to_string()).unwrap();
            assert_eq!(e, back, "{c}");
        }
    }

    #[test]
    fn parse_errors_carry_columns() {
        let err = parse("(+ x ?)").unwrap_err();
        assert_eq!(err.column, 6);
        let err = parse("(% x)").unwrap_err();
        assert_eq!(err.column, 2);
        assert!(parse("(+ x").is_err());
    }
}
