//! Frame algebras: an abstract chart described by a coframe, its structure
//! 2-forms and a set of scalar generators with declared differentials.

mod form;
pub mod json;
mod map;
mod tensor;

pub use form::{basis_sign, wedge_sign, Form};
pub use map::{CoframeMap, FormMap};
pub use tensor::{SymTensor, VectorField};

use crate::expr::{EvalError, Expr, Sym};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use thiserror::Error;

/// Sparse terms of a form: bit mask of coframe indices to coefficient.
pub type Terms = BTreeMap<u32, Expr>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("forms belong to different frame algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree {0} out of range for dimension {1}")]
    DegreeOutOfRange(usize, usize),
    #[error("generator `{0}` is not registered in algebra `{1}`")]
    UnknownGenerator(String, String),
    #[error("coframe index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("d∘d is nonzero on `{0}`: residual {1}")]
    DSquared(String, String),
    #[error("invalid coframe change: {0}")]
    InvalidMap(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid frame-algebra description: {0}")]
    Invalid(String),
}

/// How sample values of a generator are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampler {
    /// Uniform on an open interval.
    Uniform(f64, f64),
    /// Value determined by other generators (for example `w = (1 - R^2)^(1/2)`).
    Defined(Expr),
}

#[derive(Clone, Debug)]
pub struct GenInfo {
    pub positive: bool,
    pub d: Terms,
    pub sampler: Sampler,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub struct FrameAlgebra {
    id: u64,
    name: String,
    labels: Vec<String>,
    orientation: i32,
    structure: Vec<Terms>,
    gens: BTreeMap<Sym, GenInfo>,
    gen_order: Vec<Sym>,
    basis_d: Vec<OnceLock<Terms>>,
}

impl std::fmt::Debug for FrameAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FrameAlgebra({}, dim {})", self.name, self.dim())
    }
}

/// Incremental construction of a [`FrameAlgebra`].
#[derive(Clone)]
pub struct AlgebraBuilder {
    name: String,
    labels: Vec<String>,
    orientation: i32,
    structure: Vec<Terms>,
    gens: Vec<(Sym, GenInfo)>,
}

fn mask_of(idx: &[usize]) -> Option<(u32, i32)> {
    let mut mask = 0u32;
    let mut sign = 1;
    for &i in idx {
        let bit = 1u32 << i;
        if mask & bit != 0 {
            return None;
        }
        if (mask >> (i + 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        mask |= bit;
    }
    Some((mask, sign))
}

fn add_term(t: &mut Terms, mask: u32, c: Expr) {
    if c.is_zero() {
        return;
    }
    match t.get_mut(&mask) {
        Some(v) => {
            let s = &*v + &c;
            if s.is_zero() {
                t.remove(&mask);
            } else {
                *v = s;
            }
        }
        None => {
            t.insert(mask, c);
        }
    }
}

impl AlgebraBuilder {
    pub fn new(name: &str, labels: &[&str]) -> Self {
        let n = labels.len();
        assert!(n <= 16, "frame algebras support at most 16 coframe elements");
        AlgebraBuilder {
            name: name.to_string(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            orientation: 1,
            structure: vec![Terms::new(); n],
            gens: Vec::new(),
        }
    }

    pub fn with_labels(name: &str, labels: Vec<String>) -> Self {
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        Self::new(name, &refs)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Orientation sign: the volume form is `sign * e^1 ∧ ... ∧ e^n`.
    pub fn orientation(mut self, sign: i32) -> Self {
        self.orientation = sign.signum();
        self
    }

    /// Add `c * e^i ∧ e^j` to the declared `d e^a`.
    pub fn structure_term(mut self, a: usize, c: Expr, i: usize, j: usize) -> Self {
        let (mask, sign) = mask_of(&[i, j]).expect("repeated index in structure term");
        let c = if sign < 0 { c.neg() } else { c };
        add_term(&mut self.structure[a], mask, c);
        self
    }

    pub fn structure_terms(mut self, a: usize, terms: Terms) -> Self {
        for (m, c) in terms {
            add_term(&mut self.structure[a], m, c);
        }
        self
    }

    /// Register a generator with its differential given as `(coef, index)` pairs.
    pub fn generator(mut self, name: &str, positive: bool, sampler: Sampler, d: Vec<(Expr, usize)>) -> Self {
        let mut t = Terms::new();
        for (c, i) in d {
            add_term(&mut t, 1 << i, c);
        }
        self.gens.push((
            Sym::new(name),
            GenInfo {
                positive,
                d: t,
                sampler,
            },
        ));
        self
    }

    pub fn generator_terms(mut self, name: &str, positive: bool, sampler: Sampler, d: Terms) -> Self {
        self.gens.push((
            Sym::new(name),
            GenInfo {
                positive,
                d,
                sampler,
            },
        ));
        self
    }

    pub fn build(self) -> Result<Arc<FrameAlgebra>, FrameError> {
        let n = self.labels.len();
        let known: BTreeMap<Sym, ()> = self.gens.iter().map(|(s, _)| (s.clone(), ())).collect();
        if known.len() != self.gens.len() {
            return Err(FrameError::Invalid("duplicate generator name".into()));
        }
        let check = |t: &Terms, deg: usize| -> Result<(), FrameError> {
            for (m, c) in t {
                if m.count_ones() as usize != deg || (*m >> n) != 0 {
                    return Err(FrameError::Invalid(format!(
                        "term with mask {m:#b} does not fit degree {deg} in dimension {n}"
                    )));
                }
                for g in c.gens() {
                    if !known.contains_key(&g) {
                        return Err(FrameError::UnknownGenerator(g.to_string(), self.name.clone()));
                    }
                }
            }
            Ok(())
        };
        for t in &self.structure {
            check(t, 2)?;
        }
        for (_, info) in &self.gens {
            check(&info.d, 1)?;
            if let Sampler::Defined(e) = &info.sampler {
                for g in e.gens() {
                    if !known.contains_key(&g) {
                        return Err(FrameError::UnknownGenerator(g.to_string(), self.name.clone()));
                    }
                }
            }
        }
        let gen_order = self.gens.iter().map(|(s, _)| s.clone()).collect();
        Ok(Arc::new(FrameAlgebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            name: self.name,
            labels: self.labels,
            orientation: self.orientation,
            structure: self.structure,
            gens: self.gens.into_iter().collect(),
            gen_order,
            basis_d: (0..(1usize << n)).map(|_| OnceLock::new()).collect(),
        }))
    }
}

impl FrameAlgebra {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn orientation(&self) -> i32 {
        self.orientation
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.dim()) - 1) as u32
    }

    pub fn same(a: &Arc<FrameAlgebra>, b: &Arc<FrameAlgebra>) -> bool {
        Arc::ptr_eq(a, b)
    }

    pub fn structure_terms(&self, a: usize) -> &Terms {
        &self.structure[a]
    }

    pub fn generators(&self) -> impl Iterator<Item = (&Sym, &GenInfo)> {
        self.gen_order.iter().map(move |s| (s, &self.gens[s]))
    }

    pub fn generator(&self, s: &Sym) -> Option<&GenInfo> {
        self.gens.get(s)
    }

    pub fn has_generator(&self, name: &str) -> bool {
        self.gens.contains_key(&Sym::new(name))
    }

    /// True when some generator is tied to others by a definition, so exact
    /// normal forms may miss algebraic relations.
    pub fn has_dependent_generators(&self) -> bool {
        self.gens
            .values()
            .any(|g| matches!(g.sampler, Sampler::Defined(_)))
    }

    /// Differential of a scalar as sparse 1-form terms.
    pub fn d_scalar(&self, f: &Expr) -> Terms {
        let mut out = Terms::new();
        if f.is_const() {
            return out;
        }
        for g in f.gens() {
            let info = self
                .gens
                .get(&g)
                .unwrap_or_else(|| panic!("generator `{g}` is not registered in `{}`", self.name));
            if info.d.is_empty() {
                continue;
            }
            let partial = f.diff(&g);
            if partial.is_zero() {
                continue;
            }
            for (m, c) in &info.d {
                add_term(&mut out, *m, &partial * c);
            }
        }
        out
    }

    /// Exterior derivative of the basis form `e^I`.
    pub fn d_basis(&self, mask: u32) -> &Terms {
        self.basis_d[mask as usize].get_or_init(|| {
            let mut out = Terms::new();
            let mut p = 0;
            for i in 0..self.dim() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                let before = mask & ((1u32 << i) - 1);
                let after = mask & !((1u32 << (i + 1)) - 1);
                let sgn = if p % 2 == 0 { 1 } else { -1 };
                for (m, c) in &self.structure[i] {
                    if let Some(s1) = wedge_sign(before, *m) {
                        if let Some(s2) = wedge_sign(before | *m, after) {
                            let s = sgn * s1 * s2;
                            let c = if s < 0 { c.neg() } else { c.clone() };
                            add_term(&mut out, before | *m | after, c);
                        }
                    }
                }
                p += 1;
            }
            out
        })
    }

    /// Sample points with the deterministic generator of the verification runner.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Point>, FrameError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::with_capacity(count);
        for _ in 0..count {
            let mut values: HashMap<Sym, f64> = HashMap::new();
            for s in &self.gen_order {
                if let Sampler::Uniform(lo, hi) = self.gens[s].sampler {
                    values.insert(s.clone(), rng.gen_range(lo..hi));
                }
            }
            let defined: Vec<(&Sym, &Expr)> = self
                .gen_order
                .iter()
                .filter_map(|s| match &self.gens[s].sampler {
                    Sampler::Defined(e) => Some((s, e)),
                    _ => None,
                })
                .collect();
            let mut pending = defined;
            while !pending.is_empty() {
                let before = pending.len();
                let mut rest = Vec::new();
                for (s, e) in pending {
                    match e.eval(&|g: &Sym| values.get(g).copied()) {
                        Ok(v) => {
                            values.insert(s.clone(), v);
                        }
                        Err(EvalError::Unassigned(_)) => rest.push((s, e)),
                        Err(err) => return Err(err.into()),
                    }
                }
                if rest.len() == before {
                    let (s, _) = rest[0];
                    return Err(EvalError::Unassigned(s.to_string()).into());
                }
                pending = rest;
            }
            pts.push(Point { values });
        }
        Ok(pts)
    }

    /// Verify `d∘d = 0` on every coframe element and generator. Exact when no
    /// dependent generators or opaque bases are involved, numeric otherwise.
    pub fn check_d_squared(self: &Arc<Self>, points: &[Point], tol: f64) -> Result<f64, FrameError> {
        let mut worst: f64 = 0.0;
        let mut items: Vec<(String, Form)> = Vec::new();
        for a in 0..self.dim() {
            items.push((self.labels[a].clone(), Form::coframe(self, a).d().d()));
        }
        for s in &self.gen_order {
            items.push((s.to_string(), Form::scalar(self, Expr::from_sym(s)).d().d()));
        }
        for (name, dd) in items {
            if dd.is_zero() {
                continue;
            }
            let r = dd.max_abs(points)?;
            if !(r <= tol) || !dd.needs_numeric() {
                return Err(FrameError::DSquared(name, format!("{r:.3e}")));
            }
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// Numeric values for the generators of an algebra.
#[derive(Clone, Debug, Default)]
pub struct Point {
    values: HashMap<Sym, f64>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.values.insert(Sym::new(name), v);
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.set(name, v);
        self
    }

    pub fn get(&self, s: &Sym) -> Option<f64> {
        self.values.get(s).copied()
    }

    pub fn eval(&self, e: &Expr) -> Result<f64, EvalError> {
        e.eval(&|s: &Sym| self.values.get(s).copied())
    }

    pub fn values(&self) -> &HashMap<Sym, f64> {
        &self.values
    }

    /// Fill in dependent generators of `alg` from the already assigned ones.
    pub fn complete(mut self, alg: &FrameAlgebra) -> Result<Self, EvalError> {
        for (s, info) in alg.generators() {
            if let Sampler::Defined(e) = &info.sampler {
                if !self.values.contains_key(s) {
                    let v = self.eval(e)?;
                    self.values.insert(s.clone(), v);
                }
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_rejects_unknown_generators() {
        let err = AlgebraBuilder::new("bad", &["e1", "e2", "e3"])
            .structure_term(0, Expr::gen("z"), 1, 2)
            .build()
            .unwrap_err();
        assert!(matches!(err, FrameError::UnknownGenerator(_, _)));
    }

    #[test]
    fn heisenberg_d_squared_vanishes() {
        let alg = AlgebraBuilder::new("heis", &["e1", "e2", "e3"])
            .structure_term(2, Expr::one(), 0, 1)
            .build()
            .unwrap();
        assert_eq!(alg.check_d_squared(&[], 1e-9).unwrap(), 0.0);
        let de3 = Form::coframe(&alg, 2).d();
        assert_eq!(de3, Form::basis(&alg, &[0, 1]));
    }

    #[test]
    fn inconsistent_structure_is_reported() {
        let alg = AlgebraBuilder::new("bad", &["e1", "e2", "e3"])
            .structure_term(0, Expr::one(), 1, 2)
            .structure_term(1, Expr::one(), 0, 2)
            .structure_term(2, Expr::one(), 0, 1)
            .build()
            .unwrap();
        assert!(alg.check_d_squared(&[], 1e-9).is_ok());
        let alg = AlgebraBuilder::new("bad2", &["e1", "e2", "e3", "e4"])
            .structure_term(0, Expr::one(), 1, 2)
            .structure_term(3, Expr::one(), 0, 3)
            .build()
            .unwrap();
        assert!(matches!(
            alg.check_d_squared(&[], 1e-9),
            Err(FrameError::DSquared(_, _))
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let alg = AlgebraBuilder::new("r", &["e1"])
            .generator("r", true, Sampler::Uniform(1.0, 2.0), vec![(Expr::one(), 0)])
            .build()
            .unwrap();
        let a = alg.sample_points(5, 7).unwrap();
        let b = alg.sample_points(5, 7).unwrap();
        let r = Sym::new("r");
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.get(&r), q.get(&r));
            let v = p.get(&r).unwrap();
            assert!((1.0..2.0).contains(&v));
        }
    }
}
