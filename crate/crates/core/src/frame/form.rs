use super::{add_term, mask_of, FrameAlgebra, FrameError, Point, Terms, VectorField};
use crate::expr::{EvalError, Expr, Q};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Sign of `e^A ∧ e^B` relative to `e^{A∪B}`, or `None` when they overlap.
pub fn wedge_sign(a: u32, b: u32) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    Some(if inv % 2 == 0 { 1 } else { -1 })
}

/// Wedge product of raw sparse terms.
pub(crate) fn wedge_terms(a: &Terms, b: &Terms) -> Terms {
    let mut t = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if let Some(s) = wedge_sign(*ma, *mb) {
                add_term(&mut t, ma | mb, neg_if(&(ca * cb), s));
            }
        }
    }
    t
}

/// Mask and sign of the wedge of coframe elements listed in the given order.
pub fn basis_sign(idx: &[usize]) -> Option<(u32, i32)> {
    mask_of(idx)
}

/// A homogeneous exterior form with symbolic coefficients.
#[derive(Clone)]
pub struct Form {
    alg: Arc<FrameAlgebra>,
    deg: usize,
    terms: Terms,
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.alg, &other.alg) && self.deg == other.deg && self.terms == other.terms
    }
}

fn neg_if(c: &Expr, s: i32) -> Expr {
    if s < 0 {
        c.neg()
    } else {
        c.clone()
    }
}

impl Form {
    pub fn zero(alg: &Arc<FrameAlgebra>, deg: usize) -> Form {
        Form {
            alg: alg.clone(),
            deg,
            terms: Terms::new(),
        }
    }

    pub fn scalar(alg: &Arc<FrameAlgebra>, f: Expr) -> Form {
        let mut terms = Terms::new();
        add_term(&mut terms, 0, f);
        Form {
            alg: alg.clone(),
            deg: 0,
            terms,
        }
    }

    /// `e^{i_1} ∧ ... ∧ e^{i_k}` with zero-based indices in any order.
    pub fn basis(alg: &Arc<FrameAlgebra>, idx: &[usize]) -> Form {
        Self::term(alg, Expr::one(), idx)
    }

    /// `c e^{i_1} ∧ ... ∧ e^{i_k}`.
    pub fn term(alg: &Arc<FrameAlgebra>, c: Expr, idx: &[usize]) -> Form {
        for &i in idx {
            assert!(i < alg.dim(), "coframe index {i} out of range");
        }
        let mut terms = Terms::new();
        if let Some((m, s)) = mask_of(idx) {
            add_term(&mut terms, m, neg_if(&c, s));
        }
        Form {
            alg: alg.clone(),
            deg: idx.len(),
            terms,
        }
    }

    pub fn coframe(alg: &Arc<FrameAlgebra>, i: usize) -> Form {
        Self::basis(alg, &[i])
    }

    pub fn from_terms(alg: &Arc<FrameAlgebra>, deg: usize, terms: Terms) -> Form {
        let mut t = Terms::new();
        for (m, c) in terms {
            debug_assert_eq!(m.count_ones() as usize, deg);
            add_term(&mut t, m, c);
        }
        Form {
            alg: alg.clone(),
            deg,
            terms: t,
        }
    }

    /// A 1-form from its components.
    pub fn one_form(alg: &Arc<FrameAlgebra>, comps: &[Expr]) -> Form {
        let mut t = Terms::new();
        for (i, c) in comps.iter().enumerate() {
            add_term(&mut t, 1 << i, c.clone());
        }
        Form {
            alg: alg.clone(),
            deg: 1,
            terms: t,
        }
    }

    pub fn volume(alg: &Arc<FrameAlgebra>) -> Form {
        Form::from_terms(alg, alg.dim(), [(alg.full_mask(), Expr::int(alg.orientation() as i64))].into())
    }

    pub fn alg(&self) -> &Arc<FrameAlgebra> {
        &self.alg
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn into_terms(self) -> Terms {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_mask(&self, mask: u32) -> Expr {
        self.terms.get(&mask).cloned().unwrap_or_else(Expr::zero)
    }

    /// Coefficient of `e^{i_1...i_k}` for indices in any order, with the
    /// permutation sign applied.
    pub fn coeff(&self, idx: &[usize]) -> Expr {
        match mask_of(idx) {
            Some((m, s)) => neg_if(&self.coeff_mask(m), s),
            None => Expr::zero(),
        }
    }

    /// The scalar value of a 0-form.
    pub fn as_scalar(&self) -> Expr {
        assert_eq!(self.deg, 0, "not a 0-form");
        self.coeff_mask(0)
    }

    /// Coefficient relative to the oriented volume form of a top-degree form.
    pub fn top_coeff(&self) -> Expr {
        assert_eq!(self.deg, self.alg.dim(), "not a top-degree form");
        let c = self.coeff_mask(self.alg.full_mask());
        if self.alg.orientation() < 0 {
            c.neg()
        } else {
            c
        }
    }

    fn check_same(&self, other: &Form) -> Result<(), FrameError> {
        if Arc::ptr_eq(&self.alg, &other.alg) {
            Ok(())
        } else {
            Err(FrameError::AlgebraMismatch(
                self.alg.name().to_string(),
                other.alg.name().to_string(),
            ))
        }
    }

    pub fn try_add(&self, other: &Form) -> Result<Form, FrameError> {
        self.check_same(other)?;
        if self.deg != other.deg {
            if self.is_zero() {
                return Ok(other.clone());
            }
            if other.is_zero() {
                return Ok(self.clone());
            }
            return Err(FrameError::DegreeMismatch(self.deg, other.deg));
        }
        let mut t = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut t, *m, c.clone());
        }
        Ok(Form {
            alg: self.alg.clone(),
            deg: self.deg,
            terms: t,
        })
    }

    pub fn add(&self, other: &Form) -> Form {
        self.try_add(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        Form {
            alg: self.alg.clone(),
            deg: self.deg,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn scale(&self, f: &Expr) -> Form {
        if f.is_zero() {
            return Form::zero(&self.alg, self.deg);
        }
        if f.is_one() {
            return self.clone();
        }
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            add_term(&mut t, *m, c * f);
        }
        Form {
            alg: self.alg.clone(),
            deg: self.deg,
            terms: t,
        }
    }

    pub fn scale_q(&self, q: &Q) -> Form {
        self.scale(&Expr::from_q(q.clone()))
    }

    pub fn scale_i(&self, n: i64) -> Form {
        self.scale(&Expr::int(n))
    }

    pub fn scale_r(&self, n: i64, d: i64) -> Form {
        self.scale(&Expr::rat(n, d))
    }

    pub fn try_wedge(&self, other: &Form) -> Result<Form, FrameError> {
        self.check_same(other)?;
        let deg = self.deg + other.deg;
        let mut t = Terms::new();
        if deg <= self.alg.dim() {
            for (ma, ca) in &self.terms {
                for (mb, cb) in &other.terms {
                    if let Some(s) = wedge_sign(*ma, *mb) {
                        add_term(&mut t, ma | mb, neg_if(&(ca * cb), s));
                    }
                }
            }
        }
        Ok(Form {
            alg: self.alg.clone(),
            deg,
            terms: t,
        })
    }

    pub fn wedge(&self, other: &Form) -> Form {
        self.try_wedge(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Exterior derivative.
    pub fn d(&self) -> Form {
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            let dc = self.alg.d_scalar(c);
            for (mi, ci) in &dc {
                if let Some(s) = wedge_sign(*mi, *m) {
                    add_term(&mut t, mi | m, neg_if(&(ci), s));
                }
            }
            for (mb, cb) in self.alg.d_basis(*m) {
                add_term(&mut t, *mb, cb * c);
            }
        }
        Form {
            alg: self.alg.clone(),
            deg: self.deg + 1,
            terms: t,
        }
    }

    /// Hodge star of the declared orthonormal coframe and orientation.
    pub fn hodge(&self) -> Form {
        let full = self.alg.full_mask();
        let o = self.alg.orientation();
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            let comp = full & !m;
            let s = wedge_sign(*m, comp).unwrap() * o;
            add_term(&mut t, comp, neg_if(c, s));
        }
        Form {
            alg: self.alg.clone(),
            deg: self.alg.dim() - self.deg,
            terms: t,
        }
    }

    /// Hodge star restricted to the sub-coframe `idx` (listed in oriented
    /// order). Terms involving indices outside `idx` are not allowed.
    pub fn hodge_sub(&self, idx: &[usize]) -> Form {
        let (full, o) = mask_of(idx).expect("repeated index in sub-coframe");
        self.hodge_in(full, o)
    }

    /// Hodge star on the sub-coframe `full`, whose volume form is
    /// `orient` times the increasing wedge of its elements.
    pub fn hodge_in(&self, full: u32, orient: i32) -> Form {
        let o = orient;
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            assert!(m & !full == 0, "form has components outside the sub-coframe");
            let comp = full & !m;
            let s = wedge_sign(*m, comp).unwrap() * o;
            add_term(&mut t, comp, neg_if(c, s));
        }
        Form {
            alg: self.alg.clone(),
            deg: full.count_ones() as usize - self.deg,
            terms: t,
        }
    }

    /// Contraction with the i-th frame vector.
    pub fn interior_basis(&self, i: usize) -> Form {
        let bit = 1u32 << i;
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            if m & bit != 0 {
                let pos = (m & (bit - 1)).count_ones();
                add_term(&mut t, m & !bit, neg_if(c, if pos % 2 == 0 { 1 } else { -1 }));
            }
        }
        Form {
            alg: self.alg.clone(),
            deg: self.deg.saturating_sub(1),
            terms: t,
        }
    }

    pub fn interior(&self, x: &VectorField) -> Form {
        assert!(Arc::ptr_eq(&self.alg, x.alg()), "vector field from another algebra");
        let mut acc = Form::zero(&self.alg, self.deg.saturating_sub(1));
        if self.deg == 0 {
            return acc;
        }
        for (i, xi) in x.comps().iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            acc = acc.add(&self.interior_basis(i).scale(xi));
        }
        acc
    }

    /// Lie derivative by Cartan's formula.
    pub fn lie(&self, x: &VectorField) -> Form {
        self.d().interior(x).add(&self.interior(x).d())
    }

    /// Pointwise inner product for the declared orthonormal coframe.
    pub fn try_inner(&self, other: &Form) -> Result<Expr, FrameError> {
        self.check_same(other)?;
        if self.deg != other.deg && !(self.is_zero() || other.is_zero()) {
            return Err(FrameError::DegreeMismatch(self.deg, other.deg));
        }
        let mut acc = Expr::zero();
        for (m, c) in &self.terms {
            if let Some(d) = other.terms.get(m) {
                acc = &acc + &(c * d);
            }
        }
        Ok(acc)
    }

    pub fn inner(&self, other: &Form) -> Expr {
        self.try_inner(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn norm_sq(&self) -> Expr {
        self.inner(self)
    }

    /// Codifferential: `-∗d∗` in even dimension, `(-1)^k ∗d∗` in odd dimension.
    pub fn codiff(&self) -> Form {
        let r = self.hodge().d().hodge();
        let n = self.alg.dim();
        let sign = if n % 2 == 0 {
            -1
        } else if self.deg % 2 == 0 {
            1
        } else {
            -1
        };
        if sign < 0 {
            r.neg()
        } else {
            r
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> Form {
        let mut t = Terms::new();
        for (m, c) in &self.terms {
            add_term(&mut t, *m, f(c));
        }
        Form {
            alg: self.alg.clone(),
            deg: self.deg,
            terms: t,
        }
    }

    /// Keep only terms whose mask avoids `mask`.
    pub fn without(&self, mask: u32) -> Form {
        Form {
            alg: self.alg.clone(),
            deg: self.deg,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| *m & mask == 0)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// True when exact normal forms may fail to detect zero, so comparisons
    /// have to fall back to sampling.
    pub fn needs_numeric(&self) -> bool {
        self.alg.has_dependent_generators() || self.terms.values().any(|c| c.has_opaque())
    }

    pub fn eval(&self, p: &Point) -> Result<BTreeMap<u32, f64>, EvalError> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            out.insert(*m, p.eval(c)?);
        }
        Ok(out)
    }

    /// Largest absolute coefficient over the sample points.
    pub fn max_abs(&self, points: &[Point]) -> Result<f64, EvalError> {
        let mut worst: f64 = 0.0;
        for p in points {
            for c in self.terms.values() {
                let v = p.eval(c)?;
                if !v.is_finite() {
                    return Ok(f64::INFINITY);
                }
                worst = worst.max(v.abs());
            }
        }
        Ok(worst)
    }

    /// Exact equality of normal forms.
    pub fn equals_exact(&self, other: &Form) -> bool {
        self.sub(other).is_zero()
    }

    /// Coefficientwise equality within `tol` at every point.
    pub fn equals_numeric(&self, other: &Form, points: &[Point], tol: f64) -> Result<bool, EvalError> {
        Ok(self.sub(other).max_abs(points)? <= tol)
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let labels: Vec<&str> = (0..self.alg.dim())
                .filter(|i| m & (1 << i) != 0)
                .map(|i| self.alg.labels()[i].as_str())
                .collect();
            if labels.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·{}", labels.join("∧"))?;
            }
        }
        Ok(())
    }
}

macro_rules! form_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl std::ops::$tr<&Form> for &Form {
            type Output = Form;
            fn $method(self, rhs: &Form) -> Form {
                Form::$inner(self, rhs)
            }
        }
        impl std::ops::$tr<Form> for Form {
            type Output = Form;
            fn $method(self, rhs: Form) -> Form {
                Form::$inner(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Form> for Form {
            type Output = Form;
            fn $method(self, rhs: &Form) -> Form {
                Form::$inner(&self, rhs)
            }
        }
        impl std::ops::$tr<Form> for &Form {
            type Output = Form;
            fn $method(self, rhs: Form) -> Form {
                Form::$inner(self, &rhs)
            }
        }
    };
}

form_binop!(Add, add, add);
form_binop!(Sub, sub, sub);
form_binop!(BitXor, bitxor, wedge);

impl std::ops::Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form::neg(&self)
    }
}

impl std::ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::AlgebraBuilder;

    fn flat(n: usize) -> Arc<FrameAlgebra> {
        let labels: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
        AlgebraBuilder::with_labels("flat", labels).build().unwrap()
    }

    #[test]
    fn wedge_of_basis_elements() {
        let a = flat(4);
        let e1 = Form::coframe(&a, 0);
        let e2 = Form::coframe(&a, 1);
        assert_eq!(e1.wedge(&e2), Form::basis(&a, &[0, 1]));
        assert_eq!(e2.wedge(&e1), Form::basis(&a, &[0, 1]).neg());
        assert!(Form::basis(&a, &[0, 1]).wedge(&Form::basis(&a, &[0, 2])).is_zero());
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = flat(3);
        let b = flat(3);
        let err = Form::coframe(&a, 0).try_wedge(&Form::coframe(&b, 1)).unwrap_err();
        assert!(matches!(err, FrameError::AlgebraMismatch(_, _)));
    }

    #[test]
    fn hodge_on_basis() {
        let a = flat(7);
        let s = Form::coframe(&a, 0).hodge();
        assert_eq!(s, Form::basis(&a, &[1, 2, 3, 4, 5, 6]));
        for k in 0..=7 {
            for m in 0u32..128 {
                if m.count_ones() as usize != k {
                    continue;
                }
                let f = Form::from_terms(&a, k, [(m, Expr::one())].into());
                let vol = f.wedge(&f.hodge());
                assert_eq!(vol, Form::volume(&a));
                let ss = f.hodge().hodge();
                let sign = if (k * (7 - k)) % 2 == 0 { 1 } else { -1 };
                assert_eq!(ss, f.scale_i(sign));
            }
        }
    }

    #[test]
    fn interior_is_antiderivation_on_basis() {
        let a = flat(5);
        let x = VectorField::new(&a, (0..5).map(|i| Expr::int(i as i64 + 1)).collect());
        let f = Form::basis(&a, &[0, 2]);
        let g = Form::basis(&a, &[1, 3, 4]);
        let lhs = f.wedge(&g).interior(&x);
        let rhs = f.interior(&x).wedge(&g).add(&f.wedge(&g.interior(&x)));
        assert_eq!(lhs, rhs);
        assert!(f.interior(&x).interior(&x).is_zero());
    }

    #[test]
    fn orientation_flips_hodge() {
        let a = AlgebraBuilder::new("neg", &["a", "b"]).orientation(-1).build().unwrap();
        let e1 = Form::coframe(&a, 0);
        assert_eq!(e1.hodge(), Form::coframe(&a, 1).neg());
        assert_eq!(e1.wedge(&e1.hodge()), Form::volume(&a));
    }
}
