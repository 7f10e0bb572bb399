//! Spin(7)-structures on an 8-dimensional orthonormal coframe algebra.

use crate::check::Ctx;
use crate::expr::{q, Expr, Q};
use crate::frame::{Form, FrameAlgebra, SymTensor};
use crate::g2::standard_phi;
use crate::linalg::{q_inverse, q_rank, QMat};
use nalgebra::DMatrix;
use num_traits::Zero;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Spin7Error {
    #[error("Spin(7) structures need an 8-dimensional algebra, got {0}")]
    Dimension(usize),
    #[error("Φ∧Φ is not 14 times the volume form (coefficient {0})")]
    Volume(String),
    #[error("Φ is not self-dual")]
    NotSelfDual,
    #[error("Φ must have constant coefficients in the coframe")]
    NotConstant,
}

/// The standard 4-form `e^0∧φ0 + ∗φ0`, with `idx[0]` playing `e^0` and
/// `idx[1..8]` the G2 coframe.
pub fn standard_cayley(alg: &Arc<FrameAlgebra>, idx: &[usize]) -> Form {
    assert_eq!(idx.len(), 8);
    let phi = standard_phi(alg, &idx[1..]);
    Form::coframe(alg, idx[0]).wedge(&phi).add(&phi.hodge_sub(&idx[1..]))
}

/// Torsion `dΦ = T1∧Φ + T5` with `∗T5∧Φ = 0`.
#[derive(Clone, Debug)]
pub struct Spin7Torsion {
    pub t1: Form,
    pub t5: Form,
    pub dphi: Form,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TorsionClass {
    TorsionFree,
    Balanced,
    Lcp,
    Generic,
}

impl fmt::Display for TorsionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorsionClass::TorsionFree => "torsion_free",
            TorsionClass::Balanced => "balanced",
            TorsionClass::Lcp => "lcp",
            TorsionClass::Generic => "generic",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Spin7Structure {
    alg: Arc<FrameAlgebra>,
    phi: Form,
    /// `∗(e^b∧Φ)` for each coframe element.
    contractions: Vec<Form>,
    /// Index pairs `a ≤ b` labelling the basis `e^a ⊙ e^b` of symmetric tensors.
    pairs: Vec<(usize, usize)>,
    images: Vec<Form>,
    gram_inv: QMat,
}

impl Spin7Structure {
    pub fn new(alg: &Arc<FrameAlgebra>, phi: Form) -> Result<Self, Spin7Error> {
        if alg.dim() != 8 {
            return Err(Spin7Error::Dimension(alg.dim()));
        }
        if phi.terms().values().any(|c| c.as_const().is_none()) {
            return Err(Spin7Error::NotConstant);
        }
        let top = phi.wedge(&phi).top_coeff();
        if top != Expr::int(14) {
            return Err(Spin7Error::Volume(top.to_string()));
        }
        if phi.hodge() != phi {
            return Err(Spin7Error::NotSelfDual);
        }
        let contractions: Vec<Form> = (0..8).map(|b| Form::coframe(alg, b).wedge(&phi).hodge()).collect();
        let mut pairs = Vec::new();
        let mut images = Vec::new();
        for a in 0..8 {
            for b in a..8 {
                pairs.push((a, b));
                let ea = Form::coframe(alg, a);
                let eb = Form::coframe(alg, b);
                let img = if a == b {
                    ea.wedge(&contractions[a]).scale_i(2)
                } else {
                    ea.wedge(&contractions[b]).add(&eb.wedge(&contractions[a]))
                };
                images.push(img);
            }
        }
        let n = images.len();
        let mut gram = vec![vec![q(0, 1); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = images[i].inner(&images[j]).as_const().ok_or(Spin7Error::NotConstant)?;
                gram[i][j] = v.clone();
                gram[j][i] = v;
            }
        }
        let gram_inv = q_inverse(&gram).expect("the symmetric tensors embed injectively into 4-forms");
        Ok(Spin7Structure {
            alg: alg.clone(),
            phi,
            contractions,
            pairs,
            images,
            gram_inv,
        })
    }

    pub fn alg(&self) -> &Arc<FrameAlgebra> {
        &self.alg
    }

    pub fn phi(&self) -> &Form {
        &self.phi
    }

    /// `(a_7, a_21)` for a 2-form `a`.
    pub fn project2(&self, a: &Form) -> (Form, Form) {
        let t = a.wedge(&self.phi).hodge();
        (a.add(&t).scale_r(1, 4), a.scale_i(3).sub(&t).scale_r(1, 4))
    }

    /// Matrix of `a ↦ ∗(a∧Φ)` on the basis `e^{ab}`, `a < b`.
    pub fn lambda2_operator(&self) -> QMat {
        let basis: Vec<Form> = (0..8)
            .flat_map(|a| (a + 1..8).map(move |b| (a, b)))
            .map(|(a, b)| Form::basis(&self.alg, &[a, b]))
            .collect();
        basis
            .iter()
            .map(|bi| {
                let img = bi.wedge(&self.phi).hodge();
                basis.iter().map(|bj| img.inner(bj).as_const().unwrap()).collect()
            })
            .collect()
    }

    /// Eigenvalues of [`Self::lambda2_operator`], sorted.
    pub fn lambda2_spectrum(&self) -> Vec<f64> {
        let m = self.lambda2_operator();
        let n = m.len();
        let dm = DMatrix::from_fn(n, n, |i, j| q_to_f64(&m[i][j]));
        let mut ev: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// `i(h) = Σ h_ab (e^a∧∗(e^b∧Φ) + e^b∧∗(e^a∧Φ))`.
    pub fn i_map(&self, h: &SymTensor) -> Form {
        let mut acc = Form::zero(&self.alg, 4);
        for a in 0..8 {
            for b in 0..8 {
                let c = h.get(a, b);
                if !c.is_zero() {
                    acc = acc.add(&Form::coframe(&self.alg, a).wedge(&self.contractions[b]).scale(c).scale_i(2));
                }
            }
        }
        acc
    }

    /// Least-squares inverse of `i` on 4-forms; it annihilates `Λ⁴_7 ⊕ Λ⁴_27`.
    pub fn j_map(&self, k: &Form) -> SymTensor {
        let rhs: Vec<Expr> = self.images.iter().map(|img| img.inner(k)).collect();
        let mut out = SymTensor::zero(8);
        let half = q(1, 2);
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            let mut c = Expr::zero();
            for (j, r) in rhs.iter().enumerate() {
                if !r.is_zero() && !self.gram_inv[i][j].is_zero() {
                    c = &c + &r.scale(&self.gram_inv[i][j]);
                }
            }
            out.set(a, b, if a == b { c } else { c.scale(&half) });
        }
        out
    }

    /// Rank of `i` on the 36-dimensional space of symmetric tensors.
    pub fn i_rank(&self) -> usize {
        let mut rows = Vec::new();
        for img in &self.images {
            let mut row = Vec::with_capacity(70);
            for m in 0u32..256 {
                if m.count_ones() == 4 {
                    row.push(img.coeff_mask(m).as_const().unwrap());
                }
            }
            rows.push(row);
        }
        q_rank(&rows)
    }

    /// Solves `7∗T1 = ∗dΦ∧Φ`, then `T5 = dΦ - T1∧Φ`.
    pub fn torsion(&self) -> Spin7Torsion {
        let dphi = self.phi.d();
        // ∗∗ = -1 on 7-forms in dimension 8
        let t1 = dphi.hodge().wedge(&self.phi).hodge().scale_r(-1, 7);
        let t5 = dphi.sub(&t1.wedge(&self.phi));
        Spin7Torsion { t1, t5, dphi }
    }

    pub fn classify(&self, t: &Spin7Torsion, ctx: &Ctx) -> TorsionClass {
        let t1_zero = ctx.form_zero(&t.t1).pass;
        let t5_zero = ctx.form_zero(&t.t5).pass;
        match (t1_zero, t5_zero) {
            (true, true) => TorsionClass::TorsionFree,
            (true, false) => TorsionClass::Balanced,
            (false, true) => TorsionClass::Lcp,
            (false, false) => TorsionClass::Generic,
        }
    }

    /// Scalar curvature from the torsion forms.
    pub fn scal_formula(&self, t: &Spin7Torsion) -> Expr {
        let dt = t.t1.codiff().as_scalar_or_zero();
        &(&dt.scale(&q(7, 2)) + &t.t1.norm_sq().scale(&q(21, 8))) - &t.t5.norm_sq().scale(&q(1, 2))
    }

    /// Ricci tensor from the torsion forms, with the mixed term
    /// `-2 j(T¹∧∗T⁵)` as printed. It agrees with the Levi-Civita Ricci tensor
    /// whenever `T¹ = 0` or `T⁵ = 0`.
    pub fn ricci_formula(&self, t: &Spin7Torsion) -> SymTensor {
        self.ricci_formula_mixed(t, -2)
    }

    /// Ricci tensor from the torsion forms with the mixed coefficient `+1`,
    /// the value a least-squares fit against the Levi-Civita oracle gives on
    /// structures with both torsion components non-zero.
    pub fn ricci_formula_corrected(&self, t: &Spin7Torsion) -> SymTensor {
        self.ricci_formula_mixed(t, 1)
    }

    fn ricci_formula_mixed(&self, t: &Spin7Torsion, mixed: i64) -> SymTensor {
        let t1 = &t.t1;
        let t5 = &t.t5;
        let dt = t1.codiff().as_scalar_or_zero();
        let trace_part = &(&dt.scale(&q(5, 8)) + &t1.norm_sq().scale(&q(3, 8))) - &t5.norm_sq().scale(&q(2, 7));
        let t1phi = t1.wedge(&self.phi);
        let star_t5 = t5.hodge();
        let k = t1phi
            .codiff()
            .scale_i(-3)
            .add(&t5.codiff().scale_i(4))
            .add(&t1.wedge(&star_t5).scale_i(mixed))
            .sub(&t1phi.hodge().wedge(t1).scale_r(9, 4));
        let contracted: Vec<Form> = (0..8).map(|a| star_t5.interior_basis(a)).collect();
        let h = SymTensor::from_fn(8, |a, b| contracted[a].inner(&contracted[b]));
        SymTensor::identity(8)
            .scale(&trace_part)
            .add(&self.j_map(&k))
            .add(&h.scale(&Expr::rat(1, 2)))
    }
}

fn q_to_f64(v: &Q) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{AlgebraBuilder, Sampler};

    fn flat8() -> Arc<FrameAlgebra> {
        let labels: Vec<String> = (0..8).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        AlgebraBuilder::new("flat8", &refs).build().unwrap()
    }

    fn standard(alg: &Arc<FrameAlgebra>) -> Spin7Structure {
        let idx: Vec<usize> = (0..8).collect();
        Spin7Structure::new(alg, standard_cayley(alg, &idx)).unwrap()
    }

    #[test]
    fn standard_form_checks() {
        let alg = flat8();
        let s = standard(&alg);
        assert_eq!(s.phi().terms().len(), 14);
        assert_eq!(s.i_rank(), 36);
        let ev = s.lambda2_spectrum();
        assert!(ev[..21].iter().all(|v| (v + 1.0).abs() < 1e-10));
        assert!(ev[21..].iter().all(|v| (v - 3.0).abs() < 1e-10));
    }

    #[test]
    fn anti_self_dual_form_is_rejected() {
        let alg = flat8();
        let idx: Vec<usize> = (0..8).collect();
        let phi = standard_phi(&alg, &idx[1..]);
        let bad = Form::coframe(&alg, 0).wedge(&phi).sub(&phi.hodge_sub(&idx[1..]));
        assert!(Spin7Structure::new(&alg, bad).is_err());
    }

    #[test]
    fn i_and_j_are_inverse() {
        let alg = flat8();
        let s = standard(&alg);
        let g = SymTensor::identity(8);
        assert_eq!(s.i_map(&g), s.phi().scale_i(8));
        assert_eq!(s.j_map(s.phi()), g.scale(&Expr::rat(1, 8)));
        let h = SymTensor::from_fn(8, |a, b| Expr::int((3 * a as i64 + 5 * b as i64) % 7 - 3));
        assert_eq!(s.j_map(&s.i_map(&h)), h);
    }

    #[test]
    fn two_form_projections_split_the_spectrum() {
        let alg = flat8();
        let s = standard(&alg);
        let a = Form::basis(&alg, &[0, 1]).add(&Form::basis(&alg, &[2, 5]).scale_i(2));
        let (a7, a21) = s.project2(&a);
        assert_eq!(a7.add(&a21), a);
        assert_eq!(a7.wedge(s.phi()).hodge(), a7.scale_i(3));
        assert_eq!(a21.wedge(s.phi()).hodge(), a21.neg());
    }

    #[test]
    fn conformal_scaling_has_pure_lee_form() {
        // coframe e^i = exp(x0) dx^i, Φ = exp(4 x0) Φ0, so T1 = 4 d x0 = 4u e^0
        let u = Expr::gen("u");
        let mut b = AlgebraBuilder::new("conf8", &["e0", "e1", "e2", "e3", "e4", "e5", "e6", "e7"]);
        for i in 1..8 {
            b = b.structure_term(i, u.clone(), 0, i);
        }
        let alg = b
            .generator("u", true, Sampler::Uniform(0.5, 2.0), vec![(u.powi(2).neg(), 0)])
            .build()
            .unwrap();
        let s = standard(&alg);
        let t = s.torsion();
        assert_eq!(t.t1, Form::coframe(&alg, 0).scale(&u.scale(&q(4, 1))));
        assert!(t.t5.is_zero());
        let ctx = Ctx::default_for(&alg).unwrap();
        assert_eq!(s.classify(&t, &ctx), TorsionClass::Lcp);
    }
}
