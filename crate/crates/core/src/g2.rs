//! G2-structures: the positive 3-form, its metric and Hodge star, type
//! decompositions and intrinsic torsion.

use crate::check::{Claim, Identity};
use crate::expr::{ex, Expr, Q};
use crate::frame::{Form, FrameAlgebra, FrameError, Point, VectorField};
use crate::linalg::{q_inverse, QMat};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum G2Error {
    #[error("3-form is not positive: metric entry ({0}, {1}) is {2}")]
    NotPositive(String, String, String),
    #[error("expected a {expected}-form, got degree {got}")]
    Degree { expected: usize, got: usize },
    #[error("form has components outside the G2 coframe")]
    Support,
    #[error("normal vector does not have unit length")]
    NonUnitNormal,
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Terms of the standard 3-form, 1-based: `e123 + e145 + e167 + e246 - e257 - e347 - e356`.
pub const PHI0: [(i64, [usize; 3]); 7] = [
    (1, [1, 2, 3]),
    (1, [1, 4, 5]),
    (1, [1, 6, 7]),
    (1, [2, 4, 6]),
    (-1, [2, 5, 7]),
    (-1, [3, 4, 7]),
    (-1, [3, 5, 6]),
];

/// The standard 3-form on the coframe elements `idx[0..7]` (playing `e^1..e^7`).
pub fn standard_phi(alg: &Arc<FrameAlgebra>, idx: &[usize]) -> Form {
    assert_eq!(idx.len(), 7);
    let mut f = Form::zero(alg, 3);
    for (c, t) in PHI0 {
        let i: Vec<usize> = t.iter().map(|k| idx[k - 1]).collect();
        f = f.add(&Form::term(alg, Expr::int(c), &i));
    }
    f
}

#[derive(Clone, Debug)]
enum Kind {
    /// The coframe elements `idx` are orthonormal for the induced metric.
    Frame { idx: Vec<usize>, full: u32, orient: i32 },
    /// Induced on the horizontal forms of a Spin(7) coframe algebra by a
    /// vector field `x` of length `1/s`.
    Reduced { x: VectorField, s: Expr },
}

/// A G2-structure `φ` with its metric data.
#[derive(Clone, Debug)]
pub struct G2Structure {
    alg: Arc<FrameAlgebra>,
    kind: Kind,
    phi: Form,
    psi: Form,
    vol: Form,
    /// Inverse Gram matrix of `∗(e^i ∧ φ)`, when it is constant.
    gram_inv: Option<QMat>,
}

/// Intrinsic torsion `dφ = τ0 ∗φ + 3τ1∧φ + ∗τ3`, `d∗φ = 4τ1∧∗φ + τ2∧φ`.
#[derive(Clone, Debug)]
pub struct G2Torsion {
    pub tau0: Expr,
    pub tau1: Form,
    pub tau2: Form,
    pub tau3: Form,
    pub dphi: Form,
    pub dpsi: Form,
}

/// SU(3)-structure induced on a hypersurface with unit normal `n`.
#[derive(Clone, Debug)]
pub struct Su3Structure {
    pub omega: Form,
    pub re_omega: Form,
    pub im_omega: Form,
}

fn pow_third(s: &Expr, n: i64) -> Expr {
    s.pow(ex(n, 3))
}

impl G2Structure {
    /// A G2-structure on coframe elements `idx`, which must be orthonormal
    /// for the metric of `phi`. The orientation is read off from `phi`.
    pub fn frame(alg: &Arc<FrameAlgebra>, idx: &[usize], phi: Form) -> Result<Self, G2Error> {
        if phi.deg() != 3 {
            return Err(G2Error::Degree {
                expected: 3,
                got: phi.deg(),
            });
        }
        let full = idx.iter().fold(0u32, |m, i| m | (1 << i));
        if full.count_ones() != 7 {
            return Err(G2Error::Support);
        }
        if phi.terms().keys().any(|m| m & !full != 0) {
            return Err(G2Error::Support);
        }
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        let b = metric_matrix(&phi, &sorted, full);
        let orient = match metric_sign(alg, &b)? {
            Ok(o) => o,
            Err((i, j, v)) => {
                let l = alg.labels();
                return Err(G2Error::NotPositive(l[sorted[i]].clone(), l[sorted[j]].clone(), v));
            }
        };
        let psi = phi.hodge_in(full, orient);
        let vol = Form::basis(alg, &sorted).scale_i(orient as i64);
        let mut g = G2Structure {
            alg: alg.clone(),
            kind: Kind::Frame {
                idx: sorted,
                full,
                orient,
            },
            phi,
            psi,
            vol,
            gram_inv: None,
        };
        g.gram_inv = g.lambda37_gram();
        Ok(g)
    }

    /// The G2-structure `ι_X Φ` on the horizontal forms of `alg`, whose
    /// coframe is orthonormal for `Φ`; `s = |X|^{-1}`.
    pub fn reduced(alg: &Arc<FrameAlgebra>, big_phi: &Form, x: &VectorField) -> Self {
        let len2 = x.comps().iter().fold(Expr::zero(), |a, c| &a + &(c * c));
        let s = len2.pow(ex(-1, 2));
        let phi = big_phi.interior(x);
        let vol = Form::volume(alg).interior(x).scale(&pow_third(&s, -4));
        let mut g = G2Structure {
            alg: alg.clone(),
            kind: Kind::Reduced { x: x.clone(), s },
            phi: phi.clone(),
            psi: Form::zero(alg, 4),
            vol,
            gram_inv: None,
        };
        g.psi = g.hodge(&phi);
        g
    }

    pub fn alg(&self) -> &Arc<FrameAlgebra> {
        &self.alg
    }

    pub fn phi(&self) -> &Form {
        &self.phi
    }

    pub fn psi(&self) -> &Form {
        &self.psi
    }

    pub fn vol(&self) -> &Form {
        &self.vol
    }

    /// The coframe indices for a frame-kind structure.
    pub fn frame_indices(&self) -> Option<&[usize]> {
        match &self.kind {
            Kind::Frame { idx, .. } => Some(idx),
            Kind::Reduced { .. } => None,
        }
    }

    /// Orthonormal basis of the 1-forms of the structure, as forms of `alg`.
    pub fn coframe(&self) -> Vec<Form> {
        match &self.kind {
            Kind::Frame { idx, .. } => idx.iter().map(|&i| Form::coframe(&self.alg, i)).collect(),
            Kind::Reduced { .. } => panic!("a reduced structure has no distinguished coframe"),
        }
    }

    pub fn hodge(&self, f: &Form) -> Form {
        match &self.kind {
            Kind::Frame { full, orient, .. } => f.hodge_in(*full, *orient),
            Kind::Reduced { x, s } => {
                let k = f.deg() as i64;
                let r = f.hodge().interior(x).scale(&pow_third(s, 2 * k - 4));
                if k % 2 == 1 {
                    r.neg()
                } else {
                    r
                }
            }
        }
    }

    pub fn inner(&self, a: &Form, b: &Form) -> Expr {
        match &self.kind {
            Kind::Frame { .. } => a.inner(b),
            Kind::Reduced { s, .. } => &a.inner(b) * &pow_third(s, 2 * a.deg() as i64),
        }
    }

    pub fn norm_sq(&self, a: &Form) -> Expr {
        self.inner(a, a)
    }

    /// `δ = (-1)^k ∗d∗` on k-forms.
    pub fn codiff(&self, f: &Form) -> Form {
        let r = self.hodge(&self.hodge(f).d());
        if f.deg() % 2 == 1 {
            r.neg()
        } else {
            r
        }
    }

    /// `(a_7, a_14)` for a 2-form `a`.
    pub fn project2(&self, a: &Form) -> (Form, Form) {
        let t = self.hodge(&a.wedge(&self.phi));
        let a7 = a.add(&t).scale_r(1, 3);
        let a14 = a.scale_i(2).sub(&t).scale_r(1, 3);
        (a7, a14)
    }

    /// The 1-form `α` with `∗(α∧φ) = c_7`, by the closed formula `α = -¼∗(c∧φ)`.
    pub fn lambda37_vector(&self, c: &Form) -> Form {
        self.hodge(&c.wedge(&self.phi)).scale_r(-1, 4)
    }

    /// `∗(α∧φ)` for a 1-form `α`.
    pub fn lambda37(&self, alpha: &Form) -> Form {
        self.hodge(&alpha.wedge(&self.phi))
    }

    fn lambda37_gram(&self) -> Option<QMat> {
        let basis: Vec<Form> = self.coframe().iter().map(|e| self.lambda37(e)).collect();
        let mut g = vec![vec![Q::from_integer(0.into()); 7]; 7];
        for i in 0..7 {
            for j in 0..7 {
                g[i][j] = self.inner(&basis[i], &basis[j]).as_const()?;
            }
        }
        q_inverse(&g)
    }

    /// `(c_1, c_7, c_27)` for a 3-form `c`. The `Λ³_7` part comes from a
    /// Gram solve against `∗(e^i∧φ)` when that system is constant, and from
    /// the closed formula otherwise.
    pub fn project3(&self, c: &Form) -> (Form, Form, Form) {
        let c1 = self.phi.scale(&self.inner(c, &self.phi).scale(&Q::new(1.into(), 7.into())));
        let c7 = match (&self.gram_inv, &self.kind) {
            (Some(ginv), Kind::Frame { .. }) => {
                let basis: Vec<Form> = self.coframe().iter().map(|e| self.lambda37(e)).collect();
                let rhs: Vec<Expr> = basis.iter().map(|b| self.inner(b, c)).collect();
                let mut acc = Form::zero(&self.alg, 3);
                for i in 0..7 {
                    let mut coef = Expr::zero();
                    for j in 0..7 {
                        coef = &coef + &rhs[j].scale(&ginv[i][j]);
                    }
                    acc = acc.add(&basis[i].scale(&coef));
                }
                acc
            }
            _ => self.lambda37(&self.lambda37_vector(c)),
        };
        let c27 = c.sub(&c1).sub(&c7);
        (c1, c7, c27)
    }

    pub fn torsion(&self) -> G2Torsion {
        let dphi = self.phi.d();
        let dpsi = self.psi.d();
        let tau0 = self.inner(&dphi, &self.psi).scale(&Q::new(1.into(), 7.into()));
        let tau1 = self.hodge(&self.hodge(&dphi).wedge(&self.phi)).scale_r(-1, 12);
        let rest = dpsi.sub(&tau1.wedge(&self.psi).scale_i(4));
        let tau2 = self.hodge(&rest).neg();
        let r3 = dphi
            .sub(&self.psi.scale(&tau0))
            .sub(&tau1.wedge(&self.phi).scale_i(3));
        let tau3 = self.hodge(&r3);
        G2Torsion {
            tau0,
            tau1,
            tau2,
            tau3,
            dphi,
            dpsi,
        }
    }

    /// Type conditions on the torsion forms, with ids under `prefix`.
    pub fn type_identities(&self, t: &G2Torsion, prefix: &str) -> Vec<Identity> {
        let (phi, psi) = (&self.phi, &self.psi);
        let zero = |d: usize| Form::zero(&self.alg, d);
        vec![
            Identity::new(
                format!("{prefix}.dpsi"),
                "d∗φ = 4τ₁∧∗φ + τ₂∧φ",
                Claim::Forms(t.dpsi.clone(), t.tau1.wedge(psi).scale_i(4).add(&t.tau2.wedge(phi))),
            ),
            Identity::new(format!("{prefix}.tau2_type"), "τ₂∧∗φ = 0", Claim::Forms(t.tau2.wedge(psi), zero(6))),
            Identity::new(
                format!("{prefix}.tau3_type"),
                "τ₃∧φ = 0, τ₃∧∗φ = 0",
                Claim::All(vec![
                    Claim::Forms(t.tau3.wedge(phi), zero(6)),
                    Claim::Forms(t.tau3.wedge(psi), zero(7)),
                ]),
            ),
        ]
    }

    /// Scalar curvature of the induced metric from the torsion forms:
    /// `12δτ1 + (21/8)τ0² + 30|τ1|² - ½|τ2|² - ½|τ3|²`.
    pub fn scal_formula(&self, t: &G2Torsion) -> Expr {
        let dt = self.codiff(&t.tau1).as_scalar_or_zero();
        let mut acc = dt.scale(&Q::from_integer(12.into()));
        acc = &acc + &t.tau0.powi(2).scale(&Q::new(21.into(), 8.into()));
        acc = &acc + &self.norm_sq(&t.tau1).scale(&Q::from_integer(30.into()));
        let half = Q::new(1.into(), 2.into());
        &(&acc - &self.norm_sq(&t.tau2).scale(&half)) - &self.norm_sq(&t.tau3).scale(&half)
    }

    /// Induced SU(3)-structure on the hypersurface orthogonal to the unit
    /// vector `n` (components in the frame of `alg`).
    pub fn hypersurface_su3(&self, n: &VectorField, points: &[Point], tol: f64) -> Result<Su3Structure, G2Error> {
        let (nflat, len2) = match &self.kind {
            Kind::Frame { idx, .. } => {
                let mut comps = vec![Expr::zero(); self.alg.dim()];
                let mut len2 = Expr::zero();
                for &i in idx {
                    comps[i] = n.comps()[i].clone();
                    len2 = &len2 + &(&n.comps()[i] * &n.comps()[i]);
                }
                (Form::one_form(&self.alg, &comps), len2)
            }
            Kind::Reduced { s, .. } => {
                let nf = n.flat();
                let l = self.norm_sq(&nf);
                (nf.scale(&pow_third(s, -2)), l)
            }
        };
        let r = &len2 - &Expr::one();
        if !r.is_zero() {
            let bad = points.is_empty()
                || points
                    .iter()
                    .any(|p| p.eval(&r).map(|v| v.abs() > tol).unwrap_or(true));
            if bad {
                return Err(G2Error::NonUnitNormal);
            }
        }
        let omega = self.phi.interior(n);
        let re_omega = self.phi.sub(&nflat.wedge(&omega));
        let im_omega = self.psi.interior(n).neg();
        Ok(Su3Structure {
            omega,
            re_omega,
            im_omega,
        })
    }
}

/// `B_ij = (1/6) ι_i φ ∧ ι_j φ ∧ φ` relative to the increasing volume of `idx`.
pub fn metric_matrix(phi: &Form, idx: &[usize], full: u32) -> Vec<Vec<Expr>> {
    let ip: Vec<Form> = idx.iter().map(|&i| phi.interior_basis(i)).collect();
    let mut b = vec![vec![Expr::zero(); 7]; 7];
    for i in 0..7 {
        for j in i..7 {
            let top = ip[i].wedge(&ip[j]).wedge(phi);
            let v = top.coeff_mask(full).scale(&Q::new(1.into(), 6.into()));
            b[i][j] = v.clone();
            b[j][i] = v;
        }
    }
    b
}

/// `Ok(±1)` when `B = ±identity`; otherwise the first offending entry.
fn metric_sign(
    alg: &Arc<FrameAlgebra>,
    b: &[Vec<Expr>],
) -> Result<Result<i32, (usize, usize, String)>, G2Error> {
    let numeric = b.iter().flatten().any(|e| e.has_opaque()) || alg.has_dependent_generators();
    let points = if numeric { alg.sample_points(20, 0)? } else { vec![] };
    let close = |e: &Expr, target: i64| -> bool {
        let r = e - &Expr::int(target);
        if r.is_zero() {
            return true;
        }
        numeric
            && points
                .iter()
                .all(|p| p.eval(&r).map(|v| v.abs() <= 1e-9).unwrap_or(false))
    };
    for sign in [1, -1] {
        let ok = (0..7).all(|i| (0..7).all(|j| close(&b[i][j], if i == j { sign } else { 0 })));
        if ok {
            return Ok(Ok(sign as i32));
        }
    }
    let sign = if close(&b[0][0], -1) { -1 } else { 1 };
    for i in 0..7 {
        for j in i..7 {
            if !close(&b[i][j], if i == j { sign } else { 0 }) {
                return Ok(Err((i, j, b[i][j].to_string())));
            }
        }
    }
    unreachable!("metric entries matched on a second pass")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{AlgebraBuilder, Sampler};

    fn flat7() -> Arc<FrameAlgebra> {
        let labels: Vec<String> = (1..=7).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        AlgebraBuilder::new("flat7", &refs).build().unwrap()
    }

    fn idx7() -> Vec<usize> {
        (0..7).collect()
    }

    #[test]
    fn standard_form_is_positive_with_unit_metric() {
        let alg = flat7();
        let g = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7())).unwrap();
        assert_eq!(g.phi().wedge(g.psi()), g.vol().scale_i(7));
        assert_eq!(g.norm_sq(g.phi()), Expr::int(7));
        let neg = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7()).neg()).unwrap();
        assert_eq!(neg.vol(), &g.vol().neg());
    }

    #[test]
    fn degenerate_form_is_rejected_with_the_offending_pair() {
        let alg = flat7();
        let bad = Form::basis(&alg, &[0, 1, 2]).add(&Form::basis(&alg, &[0, 3, 4]));
        match G2Structure::frame(&alg, &idx7(), bad) {
            Err(G2Error::NotPositive(a, b, _)) => assert_eq!((a.as_str(), b.as_str()), ("e1", "e1")),
            other => panic!("unexpected {other:?}"),
        }
        // a positive form whose metric is 4 times the identity
        let scaled = standard_phi(&alg, &idx7()).scale_i(2);
        assert!(matches!(G2Structure::frame(&alg, &idx7(), scaled), Err(G2Error::NotPositive(..))));
    }

    #[test]
    fn two_form_projections_are_eigenspaces() {
        let alg = flat7();
        let g = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7())).unwrap();
        for i in 0..7 {
            for j in i + 1..7 {
                let a = Form::basis(&alg, &[i, j]);
                let (a7, a14) = g.project2(&a);
                assert_eq!(a7.add(&a14), a);
                assert_eq!(g.hodge(&a7.wedge(g.phi())), a7.scale_i(2));
                assert_eq!(g.hodge(&a14.wedge(g.phi())), a14.neg());
            }
        }
    }

    #[test]
    fn three_form_projections_agree_with_closed_form() {
        let alg = flat7();
        let g = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7())).unwrap();
        assert!(g.gram_inv.is_some());
        let c = Form::basis(&alg, &[0, 1, 2])
            .add(&Form::basis(&alg, &[1, 3, 6]).scale_i(3))
            .add(&Form::basis(&alg, &[2, 4, 5]).scale_r(-1, 2));
        let (c1, c7, c27) = g.project3(&c);
        assert_eq!(c7, g.lambda37(&g.lambda37_vector(&c)));
        assert!(c27.wedge(g.phi()).is_zero());
        assert!(c27.wedge(g.psi()).is_zero());
        assert_eq!(c1.add(&c7).add(&c27), c);
    }

    #[test]
    fn flat_torsion_vanishes() {
        let alg = flat7();
        let t = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7())).unwrap().torsion();
        assert!(t.tau0.is_zero() && t.tau1.is_zero() && t.tau2.is_zero() && t.tau3.is_zero());
    }

    #[test]
    fn conformal_rescaling_has_pure_tau1() {
        // coframe e^i = exp(x1) dx^i, so de^i = u e^1 ∧ e^i with u = exp(-x1)
        let mut b = AlgebraBuilder::new("conf", &["e1", "e2", "e3", "e4", "e5", "e6", "e7"]);
        let ef = Expr::gen("u");
        for i in 1..7 {
            b = b.structure_term(i, ef.clone(), 0, i);
        }
        let alg = b
            .generator("u", true, Sampler::Uniform(0.5, 2.0), vec![(ef.powi(2).neg(), 0)])
            .build()
            .unwrap();
        let g = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7())).unwrap();
        let t = g.torsion();
        assert!(t.tau0.is_zero() && t.tau2.is_zero() && t.tau3.is_zero());
        assert_eq!(t.tau1, Form::coframe(&alg, 0).scale(&ef));
        // conformally flat metric exp(2x1) g0 in dimension 7 has Scal = -30 exp(-2x1)
        let oracle = crate::curvature::LeviCivita::new(&alg).scalar();
        assert_eq!(oracle, ef.powi(2).scale(&Q::from_integer((-30).into())));
        assert_eq!(g.scal_formula(&t), oracle);
    }

    #[test]
    fn hypersurface_forms_satisfy_su3_relations() {
        let alg = flat7();
        let g = G2Structure::frame(&alg, &idx7(), standard_phi(&alg, &idx7())).unwrap();
        let su3 = g.hypersurface_su3(&VectorField::basis(&alg, 0), &[], 1e-9).unwrap();
        assert!(su3.omega.wedge(&su3.re_omega).is_zero());
        assert!(su3.omega.wedge(&su3.im_omega).is_zero());
        let w3 = su3.omega.wedge(&su3.omega).wedge(&su3.omega).scale_r(2, 3);
        assert_eq!(w3, su3.re_omega.wedge(&su3.im_omega));
    }
}
