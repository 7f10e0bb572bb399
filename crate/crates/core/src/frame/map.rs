use super::form::wedge_terms;
use super::{add_term, AlgebraBuilder, Form, FrameAlgebra, FrameError, Point, Terms};
use crate::expr::{Expr, Sym};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Substitute coframe elements by 1-forms given as raw terms.
fn linear_sub(terms: &Terms, images: &[Terms], coeff: &dyn Fn(&Expr) -> Expr) -> Terms {
    let mut cache: HashMap<u32, Terms> = HashMap::new();
    let mut out = Terms::new();
    for (m, c) in terms {
        let img = cache.entry(*m).or_insert_with(|| {
            let mut acc: Terms = [(0u32, Expr::one())].into();
            let mut bits = *m;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                acc = wedge_terms(&acc, &images[i]);
                bits &= bits - 1;
            }
            acc
        });
        let c = coeff(c);
        if c.is_zero() {
            continue;
        }
        for (mi, ci) in img.iter() {
            add_term(&mut out, *mi, &c * ci);
        }
    }
    out
}

/// A map of forms between two frame algebras, defined by images of the
/// coframe elements and substitutions of generators (a pullback).
#[derive(Clone)]
pub struct FormMap {
    from: Arc<FrameAlgebra>,
    to: Arc<FrameAlgebra>,
    gens: BTreeMap<Sym, Expr>,
    images: Vec<Terms>,
}

impl FormMap {
    pub fn new(
        from: &Arc<FrameAlgebra>,
        to: &Arc<FrameAlgebra>,
        gens: BTreeMap<Sym, Expr>,
        images: Vec<Form>,
    ) -> Result<Self, FrameError> {
        if images.len() != from.dim() {
            return Err(FrameError::InvalidMap(format!(
                "{} coframe images for dimension {}",
                images.len(),
                from.dim()
            )));
        }
        for f in &images {
            if !Arc::ptr_eq(f.alg(), to) || (f.deg() != 1 && !f.is_zero()) {
                return Err(FrameError::InvalidMap("coframe images must be 1-forms of the target".into()));
            }
        }
        Ok(FormMap {
            from: from.clone(),
            to: to.clone(),
            gens,
            images: images.into_iter().map(|f| f.into_terms()).collect(),
        })
    }

    pub fn from_alg(&self) -> &Arc<FrameAlgebra> {
        &self.from
    }

    pub fn to_alg(&self) -> &Arc<FrameAlgebra> {
        &self.to
    }

    pub fn scalar(&self, e: &Expr) -> Expr {
        if self.gens.is_empty() {
            return e.clone();
        }
        e.subst(&|s: &Sym| self.gens.get(s).cloned())
    }

    pub fn apply(&self, f: &Form) -> Form {
        assert!(Arc::ptr_eq(f.alg(), &self.from), "form is not on the source algebra");
        let t = linear_sub(f.terms(), &self.images, &|c| self.scalar(c));
        Form::from_terms(&self.to, f.deg(), t)
    }

    /// Largest violation of `d ∘ map = map ∘ d` on coframe elements and
    /// generators, measured at points of the target.
    pub fn commutes_with_d(&self, points: &[Point]) -> Result<f64, FrameError> {
        let mut worst: f64 = 0.0;
        let mut probes: Vec<Form> = (0..self.from.dim()).map(|i| Form::coframe(&self.from, i)).collect();
        for (s, _) in self.from.generators() {
            probes.push(Form::scalar(&self.from, Expr::from_sym(s)));
        }
        for p in probes {
            let r = self.apply(&p.d()).sub(&self.apply(&p).d());
            if !r.is_zero() {
                worst = worst.max(r.max_abs(points)?);
                if !r.needs_numeric() && worst == 0.0 {
                    worst = f64::MIN_POSITIVE;
                }
            }
        }
        Ok(worst)
    }
}

impl std::fmt::Debug for CoframeMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CoframeMap({} -> {})", self.source().name(), self.target().name())
    }
}

/// A change of coframe `Θ = M θ` on the same chart, producing a new algebra
/// whose coframe is `Θ`.
#[derive(Clone)]
pub struct CoframeMap {
    push: FormMap,
    pull: FormMap,
}

impl CoframeMap {
    /// Build the algebra of the new coframe `Θ^a = Σ_b M[a][b] θ^b`, given
    /// the inverse matrix `n` with `θ^b = Σ_c N[b][c] Θ^c`.
    pub fn new(
        from: &Arc<FrameAlgebra>,
        name: &str,
        labels: Vec<String>,
        m: Vec<Vec<Expr>>,
        n: Vec<Vec<Expr>>,
        points: &[Point],
        tol: f64,
    ) -> Result<Self, FrameError> {
        Self::build(from, name, labels, m, n, points, tol, from.orientation())
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        from: &Arc<FrameAlgebra>,
        name: &str,
        labels: Vec<String>,
        m: Vec<Vec<Expr>>,
        n: Vec<Vec<Expr>>,
        points: &[Point],
        tol: f64,
        orientation: i32,
    ) -> Result<Self, FrameError> {
        let dim = from.dim();
        if m.len() != dim || n.len() != dim || labels.len() != dim {
            return Err(FrameError::InvalidMap("matrix size does not match dimension".into()));
        }
        for a in 0..dim {
            for c in 0..dim {
                let mut s = Expr::zero();
                for b in 0..dim {
                    s = &s + &(&m[a][b] * &n[b][c]);
                }
                let target = if a == c { Expr::one() } else { Expr::zero() };
                let r = &s - &target;
                if !r.is_zero() {
                    let mut worst: f64 = 0.0;
                    for p in points {
                        worst = worst.max(p.eval(&r)?.abs());
                    }
                    if points.is_empty() || worst > tol {
                        return Err(FrameError::InvalidMap(format!(
                            "M·N differs from the identity at ({a},{c})"
                        )));
                    }
                }
            }
        }
        let to_new: Vec<Terms> = n
            .iter()
            .map(|row| {
                let mut t = Terms::new();
                for (c, e) in row.iter().enumerate() {
                    add_term(&mut t, 1 << c, e.clone());
                }
                t
            })
            .collect();
        let id = |e: &Expr| e.clone();
        let mut builder = AlgebraBuilder::with_labels(name, labels).orientation(orientation);
        for a in 0..dim {
            let mut old = Form::zero(from, 1);
            for b in 0..dim {
                if !m[a][b].is_zero() {
                    old = old.add(&Form::coframe(from, b).scale(&m[a][b]));
                }
            }
            let d_old = old.d();
            builder = builder.structure_terms(a, linear_sub(d_old.terms(), &to_new, &id));
        }
        for (s, info) in from.generators() {
            let d = linear_sub(&info.d, &to_new, &id);
            builder = builder.generator_terms(s.as_str(), info.positive, info.sampler.clone(), d);
        }
        let to = builder.build()?;
        let push_images: Vec<Form> = to_new.into_iter().map(|t| Form::from_terms(&to, 1, t)).collect();
        let pull_images: Vec<Form> = m
            .iter()
            .map(|row| {
                let mut t = Terms::new();
                for (b, e) in row.iter().enumerate() {
                    add_term(&mut t, 1 << b, e.clone());
                }
                Form::from_terms(from, 1, t)
            })
            .collect();
        Ok(CoframeMap {
            push: FormMap::new(from, &to, BTreeMap::new(), push_images)?,
            pull: FormMap::new(&to, from, BTreeMap::new(), pull_images)?,
        })
    }

    /// Diagonal rescaling `Θ^a = λ_a θ^a`.
    pub fn rescale(from: &Arc<FrameAlgebra>, name: &str, factors: &[Expr]) -> Result<Self, FrameError> {
        Self::rescale_oriented(from, name, factors, from.orientation())
    }

    /// Diagonal rescaling whose target carries the given orientation sign.
    pub fn rescale_oriented(
        from: &Arc<FrameAlgebra>,
        name: &str,
        factors: &[Expr],
        orientation: i32,
    ) -> Result<Self, FrameError> {
        let dim = from.dim();
        let mut m = vec![vec![Expr::zero(); dim]; dim];
        let mut n = vec![vec![Expr::zero(); dim]; dim];
        for a in 0..dim {
            m[a][a] = factors[a].clone();
            n[a][a] = factors[a].recip();
        }
        let labels = from.labels().iter().map(|l| format!("{l}'")).collect();
        Self::build(from, name, labels, m, n, &[], 0.0, orientation)
    }

    pub fn source(&self) -> &Arc<FrameAlgebra> {
        self.push.from_alg()
    }

    pub fn target(&self) -> &Arc<FrameAlgebra> {
        self.push.to_alg()
    }

    /// Re-express a form of the source algebra in the new coframe.
    pub fn push(&self, f: &Form) -> Form {
        self.push.apply(f)
    }

    /// Re-express a form of the new algebra in the old coframe.
    pub fn pull(&self, f: &Form) -> Form {
        self.pull.apply(f)
    }
}
