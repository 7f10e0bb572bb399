//! Circle quotients of Spin(7)-structures. `Φ = η∧φ + s^{4/3}∗φ` is assembled
//! from G2 data, and the identities relating the two torsions are produced
//! here as checks.

use crate::check::{Claim, Ctx, Identity};
use crate::expr::{ex, q, Expr};
use crate::frame::{wedge_sign, CoframeMap, Form, FrameAlgebra, FrameError, SymTensor, VectorField};
use crate::g2::{G2Error, G2Structure, G2Torsion};
use crate::spin7::{Spin7Error, Spin7Structure, Spin7Torsion};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("total space must be 8-dimensional with η as coframe element 0")]
    Shape,
    #[error("G2 structure must live on coframe elements 1..7 of the total space")]
    BaseCoframe,
    #[error("data is not invariant under the fibre direction: {0}")]
    NotInvariant(String),
    #[error("vector field is not an infinitesimal symmetry: |L_X Φ| = {0:e}")]
    LieDerivative(f64),
    #[error("vector field vanishes at a sample point")]
    FixedPoint,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    G2(#[from] G2Error),
    #[error(transparent)]
    Spin7(#[from] Spin7Error),
}

/// An S¹-invariant Spin(7)-structure together with its quotient G2 data.
///
/// Forms "on W" live on the total-space algebra; for assembled data the
/// Spin(7) structure itself lives on the rescaled orthonormal coframe
/// `{s⁻¹η, s^{1/3}e^i}`, reached through `map`.
#[derive(Clone, Debug)]
pub struct QuotientData {
    w: Arc<FrameAlgebra>,
    eta: Form,
    x: VectorField,
    s: Expr,
    base: G2Structure,
    map: Option<CoframeMap>,
    spin7: Spin7Structure,
}

/// Torsion of the total space split into quotient components.
#[derive(Clone, Debug)]
pub struct QuotientTorsion {
    pub base: G2Torsion,
    pub spin7: Spin7Torsion,
    pub t1: Form,
    pub t5: Form,
    pub f: Expr,
    pub t1_7: Form,
    pub t5_7: Form,
    pub t5_14: Form,
    pub t4_1: Form,
    pub t4_7: Form,
    pub t4_27: Form,
    pub deta: Form,
    pub deta7: Form,
    pub deta14: Form,
}

fn sp(s: &Expr, n: i64, d: i64) -> Expr {
    s.pow(ex(n, d))
}

impl QuotientData {
    /// Assemble `Φ = η∧φ + s^{4/3}∗φ` with `η = e^0`.
    pub fn assemble(w: &Arc<FrameAlgebra>, s: Expr, base: G2Structure) -> Result<Self, QuotientError> {
        if w.dim() != 8 {
            return Err(QuotientError::Shape);
        }
        if !Arc::ptr_eq(base.alg(), w) || base.frame_indices() != Some(&[1, 2, 3, 4, 5, 6, 7][..]) {
            return Err(QuotientError::BaseCoframe);
        }
        for i in 1..8 {
            if Form::coframe(w, i).d().terms().keys().any(|m| m & 1 != 0) {
                return Err(QuotientError::NotInvariant(format!("d{} has an η component", w.labels()[i])));
            }
        }
        for (g, info) in w.generators() {
            if info.d.keys().any(|m| m & 1 != 0) {
                return Err(QuotientError::NotInvariant(format!("d{} has an η component", g.as_str())));
            }
        }
        let eta = Form::coframe(w, 0);
        let deta = eta.d();
        if deta.terms().keys().any(|m| m & 1 != 0) {
            return Err(QuotientError::NotInvariant("dη is not basic".into()));
        }
        let sigma = base.vol().coeff_mask(0xfe).as_const().expect("G2 volume has unit coefficient");
        let sigma = if sigma > q(0, 1) { 1 } else { -1 };
        let orient = sigma * wedge_sign(1, 0xfe).unwrap();
        let mut factors = vec![s.recip()];
        factors.extend(std::iter::repeat(sp(&s, 1, 3)).take(7));
        let map = CoframeMap::rescale_oriented(w, &format!("{}_spin7", w.name()), &factors, orient)?;
        let big_w = eta.wedge(base.phi()).add(&base.psi().scale(&sp(&s, 4, 3)));
        let spin7 = Spin7Structure::new(map.target(), map.push(&big_w))?;
        Ok(QuotientData {
            w: w.clone(),
            x: VectorField::basis(w, 0),
            eta,
            s,
            base,
            map: Some(map),
            spin7,
        })
    }

    /// Reduce along `x`: `φ = ι_XΦ`, `s = |X|⁻¹`, `η = s² X♭`.
    pub fn reduce(spin7: &Spin7Structure, x: &VectorField, ctx: &Ctx) -> Result<Self, QuotientError> {
        let o = spin7.alg();
        let lie = spin7.phi().lie(x);
        if !lie.is_zero() {
            let r = ctx.form_zero(&lie);
            if !r.pass {
                return Err(QuotientError::LieDerivative(r.residual));
            }
        }
        let len2 = x.comps().iter().fold(Expr::zero(), |a, c| &a + &(c * c));
        for p in &ctx.points {
            if p.eval(&len2).map(|v| v <= 0.0).unwrap_or(true) {
                return Err(QuotientError::FixedPoint);
            }
        }
        let base = G2Structure::reduced(o, spin7.phi(), x);
        let s = len2.pow(ex(-1, 2));
        let eta = x.flat().scale(&s.powi(2));
        Ok(QuotientData {
            w: o.clone(),
            eta,
            x: x.clone(),
            s,
            base,
            map: None,
            spin7: spin7.clone(),
        })
    }

    pub fn w(&self) -> &Arc<FrameAlgebra> {
        &self.w
    }

    pub fn eta(&self) -> &Form {
        &self.eta
    }

    pub fn fibre(&self) -> &VectorField {
        &self.x
    }

    pub fn s(&self) -> &Expr {
        &self.s
    }

    pub fn base(&self) -> &G2Structure {
        &self.base
    }

    pub fn spin7(&self) -> &Spin7Structure {
        &self.spin7
    }

    /// The orthonormal coframe map to the Spin(7) algebra, for assembled data.
    pub fn coframe_map(&self) -> Option<&CoframeMap> {
        self.map.as_ref()
    }

    pub fn to_spin7(&self, f: &Form) -> Form {
        match &self.map {
            Some(m) => m.push(f),
            None => f.clone(),
        }
    }

    pub fn from_spin7(&self, f: &Form) -> Form {
        match &self.map {
            Some(m) => m.pull(f),
            None => f.clone(),
        }
    }

    /// The fibre direction as a vector field on the Spin(7) algebra.
    pub fn fibre_spin7(&self) -> VectorField {
        match &self.map {
            Some(m) => {
                let o = m.target();
                let mut comps = vec![Expr::zero(); 8];
                comps[0] = self.s.recip();
                VectorField::new(o, comps)
            }
            None => self.x.clone(),
        }
    }

    /// `Φ` expressed on W.
    pub fn big_phi(&self) -> Form {
        self.from_spin7(self.spin7.phi())
    }

    /// Hodge star of `g_Φ` applied to a form on W.
    pub fn hodge_big(&self, f: &Form) -> Form {
        self.from_spin7(&self.to_spin7(f).hodge())
    }

    pub fn vol_big(&self) -> Form {
        self.from_spin7(&Form::volume(self.spin7.alg()))
    }

    /// Remove the η component: `γ - η∧ι_Xγ`.
    pub fn horizontal(&self, f: &Form) -> Form {
        f.sub(&self.eta.wedge(&f.interior(&self.x)))
    }

    fn probe_one_forms(&self) -> Vec<Form> {
        match self.base.frame_indices() {
            Some(_) => self.base.coframe(),
            None => (0..8).map(|a| self.horizontal(&Form::coframe(&self.w, a))).collect(),
        }
    }

    /// Hodge transfer identities between `∗_Φ` and `∗_φ`.
    pub fn hodge_transfer(&self) -> Vec<Identity> {
        let s = &self.s;
        let eta = &self.eta;
        let phi = self.base.phi();
        let ones = self.probe_one_forms();
        let mut items: Vec<Vec<Claim>> = vec![Vec::new(); 7];
        for (i, a) in ones.iter().enumerate() {
            for b in &ones[i + 1..] {
                let (al, be) = self.base.project2(&a.wedge(b));
                items[0].push(Claim::Forms(
                    self.hodge_big(&al.wedge(phi)),
                    eta.wedge(&al).scale(&sp(s, -2, 1)).scale_i(-2),
                ));
                items[1].push(Claim::Forms(self.hodge_big(&be.wedge(phi)), eta.wedge(&be).scale(&sp(s, -2, 1))));
                items[4].push(Claim::Forms(
                    self.hodge_big(&eta.wedge(&al)),
                    al.wedge(phi).scale(&sp(s, 2, 1)).scale_r(1, 2),
                ));
                items[5].push(Claim::Forms(
                    self.hodge_big(&eta.wedge(&be)),
                    be.wedge(phi).scale(&sp(s, 2, 1)).neg(),
                ));
            }
            let star = self.base.hodge(a);
            items[2].push(Claim::Forms(self.hodge_big(a), eta.wedge(&star).scale(&sp(s, 2, 3)).neg()));
            items[6].push(Claim::Forms(self.hodge_big(&eta.wedge(a)), star.scale(&sp(s, 8, 3))));
        }
        items[3].push(Claim::Forms(self.hodge_big(eta), self.base.vol().scale(&sp(s, 10, 3))));
        let formulas = [
            "∗_Φ(α∧φ) = -2s⁻²η∧α",
            "∗_Φ(β∧φ) = s⁻²η∧β",
            "∗_Φγ = -s^{2/3}η∧∗_φγ",
            "∗_Φη = s^{10/3}vol_φ",
            "∗_Φ(η∧α) = ½s²α∧φ",
            "∗_Φ(η∧β) = -s²β∧φ",
            "∗_Φ(η∧γ) = s^{8/3}∗_φγ",
        ];
        let mut out: Vec<Identity> = items
            .into_iter()
            .enumerate()
            .map(|(k, c)| Identity::new(format!("hodge.item{}", k + 1), formulas[k], Claim::All(c)))
            .collect();
        out.push(Identity::new(
            "hodge.volume",
            "vol_Φ = s^{4/3}η∧vol_φ",
            Claim::Forms(self.vol_big(), eta.wedge(self.base.vol()).scale(&sp(s, 4, 3))),
        ));
        out
    }

    pub fn torsion(&self) -> QuotientTorsion {
        let base_t = self.base.torsion();
        let sp_t = self.spin7.torsion();
        let t1 = self.from_spin7(&sp_t.t1);
        let t5 = self.from_spin7(&sp_t.t5);
        let f = t1.interior(&self.x).as_scalar_or_zero();
        let t1_7 = t1.sub(&self.eta.scale(&f));
        let kappa = t5.interior(&self.x);
        let a = t5.sub(&self.eta.wedge(&kappa));
        let (a7, a14) = self.base.project2(&self.base.hodge(&a));
        let (c1, c7, c27) = self.base.project3(&self.base.hodge(&kappa));
        let deta = self.eta.d();
        let (deta7, deta14) = self.base.project2(&deta);
        QuotientTorsion {
            t5_7: self.base.hodge(&a7),
            t5_14: self.base.hodge(&a14),
            t4_1: self.base.hodge(&c1),
            t4_7: self.base.hodge(&c7),
            t4_27: self.base.hodge(&c27),
            base: base_t,
            spin7: sp_t,
            t1,
            t5,
            f,
            t1_7,
            deta,
            deta7,
            deta14,
        }
    }

    fn ds43(&self) -> Form {
        Form::scalar(&self.w, sp(&self.s, 4, 3)).d()
    }

    /// `L = ∧φ ∘ ∗ ∘ ∧∗φ ∘ ∗`, taking `Λ⁵_7` to `Λ⁴_7`.
    pub fn l_map(&self, f: &Form) -> Form {
        let g = &self.base;
        g.hodge(&g.hodge(f).wedge(g.psi())).wedge(g.phi())
    }

    /// Base torsion identities and the relations between the two torsions.
    pub fn torsion_relations(&self, t: &QuotientTorsion) -> Vec<Identity> {
        let g = &self.base;
        let (phi, psi) = (g.phi(), g.psi());
        let bt = &t.base;
        let s43 = sp(&self.s, 4, 3);
        let sm43 = sp(&self.s, -4, 3);
        let ds43 = self.ds43();
        let w = &self.w;
        let zero = |d: usize| Form::zero(w, d);
        let star_deta7_psi = g.hodge(&t.deta7.wedge(psi));
        let t5_7_pred = t
            .deta7
            .wedge(phi)
            .add(&ds43.wedge(psi))
            .add(&bt.tau1.wedge(psi).scale(&s43))
            .scale_i(4);
        let mut out = g.type_identities(bt, "base");
        out.extend([
            Identity::new(
                "spin7.t5_type",
                "∗T⁵∧Φ = 0",
                Claim::Forms(t.spin7.t5.hodge().wedge(self.spin7.phi()), Form::zero(self.spin7.alg(), 7)),
            ),
            Identity::new(
                "split.t1",
                "T¹₈ = f·η + T¹₇",
                Claim::Forms(t.t1.clone(), self.eta.scale(&t.f).add(&t.t1_7)),
            ),
            Identity::new(
                "split.t5",
                "T⁵₄₈ = T⁵₇ + T⁵₁₄ + η∧(T⁴₇ + T⁴₂₇)",
                Claim::All(vec![
                    Claim::Forms(
                        t.t5.clone(),
                        t.t5_7.add(&t.t5_14).add(&self.eta.wedge(&t.t4_7.add(&t.t4_27))),
                    ),
                    Claim::Forms(t.t4_1.clone(), zero(4)),
                ]),
            ),
            Identity::new(
                "rel.f",
                "f = -s^{-4/3}τ₀",
                Claim::Scalars(w.clone(), t.f.clone(), (&sm43 * &bt.tau0).neg()),
            ),
            Identity::new(
                "rel.t1_7",
                "7T¹₇ = 24τ₁ + 3s^{-4/3}d(s^{4/3}) + 2s^{-4/3}∗((dη)₇∧∗φ)",
                Claim::Forms(
                    t.t1_7.scale_i(7),
                    bt.tau1
                        .scale_i(24)
                        .add(&ds43.scale(&sm43).scale_i(3))
                        .add(&star_deta7_psi.scale(&sm43).scale_i(2)),
                ),
            ),
            Identity::new(
                "rel.t5_7",
                "7T⁵₇ = 4(dη)₇∧φ + 4d(s^{4/3})∧∗φ + 4s^{4/3}τ₁∧∗φ",
                Claim::Forms(t.t5_7.scale_i(7), t5_7_pred.clone()),
            ),
            Identity::new(
                "rel.t5_14",
                "T⁵₁₄ = (dη)₁₄∧φ + s^{4/3}τ₂∧φ",
                Claim::Forms(t.t5_14.clone(), t.deta14.wedge(phi).add(&bt.tau2.wedge(phi).scale(&s43))),
            ),
            Identity::new(
                "rel.t4_27",
                "T⁴₂₇ = -∗τ₃",
                Claim::Forms(t.t4_27.clone(), g.hodge(&bt.tau3).neg()),
            ),
            Identity::new(
                "rel.l_map",
                "L(7T⁵₇) = 4s^{-4/3}T⁴₇",
                Claim::Forms(self.l_map(&t.t5_7.scale_i(7)), t.t4_7.scale(&sm43).scale_i(4)),
            ),
            Identity::new(
                "rel.l_map_corrected",
                "L(T⁵₇) = 4s^{4/3}T⁴₇",
                Claim::Forms(self.l_map(&t.t5_7), t.t4_7.scale(&s43).scale_i(4)),
            ),
            Identity::new(
                "rel.t5_7_t1_7",
                "T⁵₇ - (1/6)s^{4/3}T¹₇∧∗φ = ½(d(s^{4/3})∧∗φ + (dη)₇∧φ)",
                Claim::Forms(
                    t.t5_7.sub(&t.t1_7.wedge(psi).scale(&s43).scale_r(1, 6)),
                    ds43.wedge(psi).add(&t.deta7.wedge(phi)).scale_r(1, 2),
                ),
            ),
            Identity::new(
                "rel.tau1_t1_7",
                "3τ₁∧∗φ = T¹₇∧∗φ - (3/4)s^{-4/3}T⁵₇",
                Claim::Forms(
                    bt.tau1.wedge(psi).scale_i(3),
                    t.t1_7.wedge(psi).sub(&t.t5_7.scale(&sm43).scale_r(3, 4)),
                ),
            ),
            Identity::new(
                "determined.t5_7",
                "T⁵₇ = (1/6)s^{4/3}T¹₇∧∗φ + ½(d(s^{4/3})∧∗φ + (dη)₇∧φ)",
                Claim::Forms(
                    t.t5_7.clone(),
                    t.t1_7
                        .wedge(psi)
                        .scale(&s43)
                        .scale_r(1, 6)
                        .add(&ds43.wedge(psi).add(&t.deta7.wedge(phi)).scale_r(1, 2)),
                ),
            ),
            Identity::new(
                "determined.t4_7",
                "T⁴₇ = (s^{-4/3}/28)L(7T⁵₇) with T⁵₇ predicted",
                Claim::Forms(t.t4_7.clone(), self.l_map(&t5_7_pred).scale(&sm43).scale_r(1, 28)),
            ),
        ]);
        out
    }

    /// Identities forced when `Φ` is torsion free.
    pub fn torsion_free_relations(&self, t: &QuotientTorsion) -> Vec<Identity> {
        let g = &self.base;
        let s43 = sp(&self.s, 4, 3);
        let bt = &t.base;
        vec![
            Identity::new(
                "tf.dPhi",
                "dΦ = 0",
                Claim::Forms(t.spin7.dphi.clone(), Form::zero(self.spin7.alg(), 5)),
            ),
            Identity::new(
                "tf.deta7",
                "(dη)₇∧∗φ = -(3/2)∗d(s^{4/3})",
                Claim::Forms(t.deta7.wedge(g.psi()), g.hodge(&self.ds43()).scale_r(-3, 2)),
            ),
            Identity::new(
                "tf.deta14",
                "(dη)₁₄ = -s^{4/3}τ₂",
                Claim::Forms(t.deta14.clone(), bt.tau2.scale(&s43).neg()),
            ),
            Identity::new(
                "tf.calibrated",
                "dφ = 0",
                Claim::Forms(bt.dphi.clone(), Form::zero(&self.w, 4)),
            ),
        ]
    }

    /// Identities of a balanced quotient with `s ≡ 1`.
    pub fn balanced_relations(&self, t: &QuotientTorsion) -> Vec<Identity> {
        let g = &self.base;
        let w = &self.w;
        vec![
            Identity::new("bal.s", "s ≡ 1", Claim::Scalars(w.clone(), self.s.clone(), Expr::one())),
            Identity::new("bal.t1", "T¹₈ = 0", Claim::Forms(t.t1.clone(), Form::zero(w, 1))),
            Identity::new(
                "bal.deta7",
                "(dη)₇ = -4∗(τ₁∧∗φ)",
                Claim::Forms(t.deta7.clone(), g.hodge(&t.base.tau1.wedge(g.psi())).scale_i(-4)),
            ),
            Identity::new(
                "bal.tau0",
                "τ₀ = 0",
                Claim::Scalars(w.clone(), t.base.tau0.clone(), Expr::zero()),
            ),
        ]
    }

    /// Identities of a locally conformally parallel quotient.
    pub fn lcp_relations(&self, t: &QuotientTorsion) -> Vec<Identity> {
        let w = &self.w;
        let mut out = vec![
            Identity::new("lcp.t5", "T⁵₄₈ = 0", Claim::Forms(t.t5.clone(), Form::zero(w, 5))),
            Identity::new(
                "lcp.f_constant",
                "df = 0",
                Claim::Forms(Form::scalar(w, t.f.clone()).d(), Form::zero(w, 1)),
            ),
            Identity::new("lcp.tau3", "τ₃ = 0", Claim::Forms(t.base.tau3.clone(), Form::zero(w, 3))),
        ];
        if !t.f.is_zero() {
            out.push(Identity::new(
                "lcp.deta_exact",
                "dη = -(1/f)dT¹₇",
                Claim::Forms(t.deta.clone(), t.t1_7.d().scale(&t.f.recip()).neg()),
            ));
        }
        out
    }

    /// `δT¹₈`, `|T¹₈|²` and `|T⁵₄₈|²` from quotient data, against the direct values.
    pub fn torsion_budget(&self, t: &QuotientTorsion) -> Vec<Identity> {
        let g = &self.base;
        let psi = g.psi();
        let s = &self.s;
        let w = &self.w;
        let ds = Form::scalar(w, s.clone()).d();
        let ds43 = self.ds43();
        let bt = &t.base;
        let star_d7 = g.hodge(&t.deta7.wedge(psi));
        let star_t1 = g.hodge(&bt.tau1.wedge(psi));
        let sm43 = sp(s, -4, 3);

        let inner1 = bt
            .tau1
            .scale(&sp(s, 2, 3))
            .scale_i(24)
            .add(&ds.scale(&sp(s, -1, 3)).scale_i(4))
            .add(&star_d7.scale(&sp(s, -2, 3)).scale_i(2));
        let delta = g.codiff(&inner1).as_scalar_or_zero().scale(&q(1, 7));
        let delta = &delta * &sm43;

        let v2 = bt
            .tau1
            .scale_i(24)
            .add(&ds.scale(&s.recip()).scale_i(4))
            .add(&star_d7.scale(&sm43).scale_i(2));
        let norm1 = &(&bt.tau0.powi(2) + &g.norm_sq(&v2).scale(&q(1, 49))) * &sp(s, -2, 3);

        let p14 = t.deta14.scale(&s.recip()).add(&bt.tau2.scale(&sp(s, 1, 3)));
        let p7 = t
            .deta7
            .scale_r(8, 7)
            .add(&g.hodge(&ds43.wedge(psi)).scale_r(4, 7))
            .add(&star_t1.scale(&sp(s, 4, 3)).scale_r(4, 7));
        let p1 = bt
            .tau1
            .scale(&sp(s, 2, 3))
            .scale_r(3, 7)
            .add(&star_d7.scale(&sp(s, -2, 3)).scale_r(2, 7))
            .add(&ds43.scale(&sp(s, -2, 3)).scale_r(3, 7));
        let mut norm5 = &g.norm_sq(&bt.tau3) * &sp(s, -2, 3);
        norm5 = &norm5 + &(&g.norm_sq(&p14) * &sm43);
        norm5 = &norm5 + &(&g.norm_sq(&p7) * &sp(s, -10, 3));
        norm5 = &norm5 + &g.norm_sq(&p1).scale(&q(4, 1));

        let direct_delta = t.spin7.t1.codiff().as_scalar_or_zero();
        vec![
            Identity::new(
                "budget.delta_t1",
                "δT¹₈ = (1/7)s^{-4/3}δ_φ(24s^{2/3}τ₁ + 4s^{-1/3}ds + 2s^{-2/3}∗((dη)₇∧∗φ))",
                Claim::Scalars(w.clone(), direct_delta, delta),
            ),
            Identity::new(
                "budget.norm_t1",
                "|T¹₈|² = s^{-2/3}τ₀² + (1/49)s^{-2/3}|24τ₁ + 4s⁻¹ds + 2s^{-4/3}∗((dη)₇∧∗φ)|²",
                Claim::Scalars(w.clone(), t.spin7.t1.norm_sq(), norm1),
            ),
            Identity::new(
                "budget.norm_t5",
                "|T⁵₄₈|² = s^{-2/3}|τ₃|² + s^{-4/3}|s⁻¹(dη)₁₄ + s^{1/3}τ₂|² + s^{-10/3}|…|² + 4|…|²",
                Claim::Scalars(w.clone(), t.spin7.t5.norm_sq(), norm5),
            ),
        ]
    }

    /// Scalar curvature of a Riemannian submersion with `s ≡ 1`.
    pub fn submersion_scal(&self, t: &QuotientTorsion) -> Identity {
        let g = &self.base;
        let psi = g.psi();
        let bt = &t.base;
        let d7psi = t.deta7.wedge(psi);
        let mut rhs = g.scal_formula(bt);
        rhs = &rhs - &g.norm_sq(&t.deta).scale(&q(1, 2));
        rhs = &rhs - &g.inner(&t.deta14, &bt.tau2);
        rhs = &rhs + &g.codiff(&g.hodge(&d7psi)).as_scalar_or_zero();
        rhs = &rhs + &g.inner(&g.hodge(&bt.tau1), &d7psi).scale(&q(4, 1));
        Identity::new(
            "submersion.scal",
            "Scal(g_Φ) = Scal(g_φ) - ½|dη|² - g((dη)₁₄,τ₂) + δ(∗((dη)₇∧∗φ)) + 4g(∗τ₁,(dη)₇∧∗φ)",
            Claim::Scalars(self.w.clone(), self.spin7.scal_formula(&t.spin7), rhs),
        )
    }

    /// Reduce the assembled structure along its fibre and compare.
    pub fn round_trip(&self, ctx: &Ctx) -> Result<Identity, QuotientError> {
        let x = self.fibre_spin7();
        let r = QuotientData::reduce(&self.spin7, &x, ctx)?;
        let o = self.spin7.alg();
        let claim = Claim::All(vec![
            Claim::Scalars(o.clone(), r.s.clone(), self.s.clone()),
            Claim::Forms(r.eta.clone(), self.to_spin7(&self.eta)),
            Claim::Forms(r.base.phi().clone(), self.to_spin7(self.base.phi())),
            Claim::Forms(r.base.psi().clone(), self.to_spin7(self.base.psi())),
        ]);
        Ok(Identity::new("round_trip", "reduce(assemble(q), X) = q", claim))
    }
}

/// The Spin(7) form of the Calabi ansatz over a Calabi–Yau 3-fold:
/// `½ω̂² + Re Ω̂`, with `ω̂ = s^{2/3}ω + η∧d(s^{2/3})` and
/// `Ω̂ = Ω∧(-η - i(2/3)s^{5/3}ds)`.
pub fn calabi_form(eta: &Form, s: &Expr, omega: &Form, re: &Form, im: &Form) -> Form {
    let alg = eta.alg();
    let s23 = sp(s, 2, 3);
    let omega_hat = omega.scale(&s23).add(&eta.wedge(&Form::scalar(alg, s23.clone()).d()));
    let ds = Form::scalar(alg, s.clone()).d();
    let re_hat = re.wedge(eta).neg().add(&im.wedge(&ds).scale(&sp(s, 5, 3)).scale_r(2, 3));
    omega_hat.wedge(&omega_hat).scale_r(1, 2).add(&re_hat)
}

/// The base G2 form `(2/3)s^{1/3}ds∧ω + Ω⁺` of the Calabi ansatz.
pub fn calabi_phi(s: &Expr, omega: &Form, re: &Form) -> Form {
    let ds = Form::scalar(omega.alg(), s.clone()).d();
    ds.wedge(omega).scale(&sp(s, 1, 3)).scale_r(2, 3).add(re)
}

/// Curvature of the balanced lift: `dη = λ - 4∗(τ₁∧∗φ)`, with its
/// preconditions as identities.
pub fn balanced_curvature(g: &G2Structure, lambda: &Form) -> (Form, Vec<Identity>) {
    let t = g.torsion();
    let alg = g.alg();
    let deta = lambda.sub(&g.hodge(&t.tau1.wedge(g.psi())).scale_i(4));
    let checks = vec![
        Identity::new("lift.tau0", "τ₀ = 0", Claim::Scalars(alg.clone(), t.tau0.clone(), Expr::zero())),
        Identity::new(
            "lift.lambda14",
            "λ∧∗φ = 0",
            Claim::Forms(lambda.wedge(g.psi()), Form::zero(alg, 6)),
        ),
        Identity::new("lift.closed", "d(λ - 4∗(τ₁∧∗φ)) = 0", Claim::Forms(deta.d(), Form::zero(alg, 3))),
    ];
    (deta, checks)
}

/// Gibbons–Hawking data on a 4-dimensional algebra: the pulled-back base
/// coordinates `μ_i`, the potential `f(m1, m2, m3)` in terms of base
/// coordinate symbols, and the connection form `η`.
#[derive(Clone, Debug)]
pub struct GibbonsHawking {
    pub alg: Arc<FrameAlgebra>,
    pub mu: [Expr; 3],
    pub base_syms: [String; 3],
    pub f: Expr,
    pub eta: Form,
}

impl GibbonsHawking {
    fn on_total(&self, e: &Expr) -> Expr {
        e.subst(&|s| self.base_syms.iter().position(|b| b == s.as_str()).map(|i| self.mu[i].clone()))
    }

    pub fn dmu(&self) -> [Form; 3] {
        let f = |i: usize| Form::scalar(&self.alg, self.mu[i].clone()).d();
        [f(0), f(1), f(2)]
    }

    pub fn potential(&self) -> Expr {
        self.on_total(&self.f)
    }

    /// `ω_i = η∧dμ_i - f dμ_j∧dμ_k` for cyclic `(i, j, k)`.
    pub fn hyperkahler_forms(&self) -> [Form; 3] {
        let dm = self.dmu();
        let f = self.potential();
        let w = |i: usize| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            self.eta.wedge(&dm[i]).sub(&dm[j].wedge(&dm[k]).scale(&f))
        };
        [w(0), w(1), w(2)]
    }

    /// `∗₀df` on the flat base, pulled back.
    pub fn monopole_rhs(&self) -> Form {
        let dm = self.dmu();
        let mut acc = Form::zero(&self.alg, 2);
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let di = self.on_total(&self.f.diff(&crate::expr::Sym::new(&self.base_syms[i])));
            acc = acc.add(&dm[j].wedge(&dm[k]).scale(&di));
        }
        acc
    }

    /// `g = fπ*g₀ + f⁻¹η²` in the coframe of the algebra.
    pub fn metric(&self) -> SymTensor {
        let dm = self.dmu();
        let f = self.potential();
        let mut g = SymTensor::sym_product(&self.eta, &self.eta).scale(&f.recip());
        for d in &dm {
            g = g.add(&SymTensor::sym_product(d, d).scale(&f));
        }
        g
    }

    pub fn identities(&self) -> Vec<Identity> {
        let ws = self.hyperkahler_forms();
        let alg = &self.alg;
        let lap = (0..3).fold(Expr::zero(), |acc, i| {
            let s = crate::expr::Sym::new(&self.base_syms[i]);
            &acc + &self.f.diff(&s).diff(&s)
        });
        let vol = ws[0].wedge(&ws[0]).scale_r(1, 2);
        let mut pairs = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let lhs = ws[i].wedge(&ws[j]).scale_r(1, 2);
                let rhs = if i == j { vol.clone() } else { Form::zero(alg, 4) };
                pairs.push(Claim::Forms(lhs, rhs));
            }
        }
        let vol_coeff = vol.top_coeff();
        vec![
            Identity::new("gh.monopole", "∗df = dη", Claim::Forms(self.eta.d(), self.monopole_rhs())),
            Identity::new(
                "gh.harmonic",
                "Δf = 0",
                Claim::Scalars(alg.clone(), self.on_total(&lap), Expr::zero()),
            ),
            Identity::new(
                "gh.closed",
                "dω₁ = dω₂ = dω₃ = 0",
                Claim::All(ws.iter().map(|w| Claim::Forms(w.d(), Form::zero(alg, 3))).collect()),
            ),
            Identity::new("gh.orthonormal", "½ωᵢ∧ωⱼ = δᵢⱼ vol_g", Claim::All(pairs)),
            Identity::new(
                "gh.volume",
                "(½ω₁∧ω₁)² = det g",
                Claim::Scalars(alg.clone(), vol_coeff.powi(2), self.metric().det()),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::AlgebraBuilder;
    use crate::g2::standard_phi;

    fn flat8() -> Arc<FrameAlgebra> {
        let labels: Vec<String> = (0..8).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        AlgebraBuilder::new("flat8", &refs).build().unwrap()
    }

    #[test]
    fn product_case_gives_standard_cayley_form() {
        let w = flat8();
        let idx: Vec<usize> = (1..8).collect();
        let base = G2Structure::frame(&w, &idx, standard_phi(&w, &idx)).unwrap();
        let qd = QuotientData::assemble(&w, Expr::one(), base).unwrap();
        let expected = crate::spin7::standard_cayley(&w, &(0..8).collect::<Vec<_>>());
        assert_eq!(qd.big_phi(), expected);
        let ctx = Ctx::default_for(&w).unwrap();
        for id in qd.hodge_transfer() {
            assert!(ctx.judge(&id.claim).pass, "{}", id.id);
        }
        let t = qd.torsion();
        for id in qd.torsion_relations(&t) {
            let o = ctx.judge(&id.claim);
            assert!(o.pass && o.residual == 0.0, "{}", id.id);
        }
        assert!(ctx.judge(&qd.round_trip(&ctx).unwrap().claim).pass);
    }

    #[test]
    fn flat_gibbons_hawking_cylinder() {
        let alg = AlgebraBuilder::new("hk", &["eta", "dx1", "dx2", "dx3"])
            .generator("x1", false, crate::frame::Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), 1)])
            .generator("x2", false, crate::frame::Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), 2)])
            .generator("x3", false, crate::frame::Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), 3)])
            .build()
            .unwrap();
        let gh = GibbonsHawking {
            alg: alg.clone(),
            mu: [Expr::gen("x1"), Expr::gen("x2"), Expr::gen("x3")],
            base_syms: ["m1".into(), "m2".into(), "m3".into()],
            f: Expr::int(2),
            eta: Form::coframe(&alg, 0),
        };
        let ctx = Ctx::default_for(&alg).unwrap();
        for id in gh.identities() {
            assert!(ctx.judge(&id.claim).pass, "{}", id.id);
        }
    }
}
