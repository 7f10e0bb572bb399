//! `S⁷ × S¹` as the cylinder `R⁸ \ {0}` with metric `r⁻²g₀` and the product
//! Spin(7)-structure `r⁻⁴Φ₀`, together with two circle quotients: along the
//! Euler field (giving the nearly parallel `S⁷`) and along a Hopf field
//! (giving `CP³ × S¹`).
//!
//! Coframe: `E_i = dx_i/r` for `i = 0..7`, orthonormal for the cylinder
//! metric, with `dE_i = -r⁻¹ Σ_j x_j E_j∧E_i`.

use super::{CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::expr::Expr;
use crate::frame::{AlgebraBuilder, Form, FrameAlgebra, FrameError, Sampler, VectorField};
use crate::quotient::QuotientData;
use crate::spin7::{standard_cayley, Spin7Structure};
use crate::verify::Suite;
use std::sync::Arc;

/// Components of the Hopf field `J x` before dividing by `r`.
const HOPF: [(i64, usize); 8] = [(1, 1), (-1, 0), (-1, 3), (1, 2), (-1, 5), (1, 4), (1, 7), (-1, 6)];

fn x(i: usize) -> Expr {
    Expr::gen(&format!("x{i}"))
}

fn cylinder() -> Result<Arc<FrameAlgebra>, FrameError> {
    let labels: Vec<String> = (0..8).map(|i| format!("E{i}")).collect();
    let r = Expr::gen("r");
    let r_inv = r.recip();
    let mut b = AlgebraBuilder::with_labels("s7_cylinder", labels);
    for i in 0..8 {
        for j in (0..8).filter(|&j| j != i) {
            b = b.structure_term(i, (&x(j) * &r_inv).neg(), j, i);
        }
        b = b.generator(&format!("x{i}"), false, Sampler::Uniform(-1.0, 1.0), vec![(r.clone(), i)]);
    }
    let r2 = (0..8).fold(Expr::zero(), |a, i| &a + &(&x(i) * &x(i)));
    b.generator("r", true, Sampler::Defined(r2.sqrt()), (0..8).map(|i| (x(i), i)).collect())
        .build()
}

pub(super) fn round_s7() -> Result<CatalogEntry, CatalogError> {
    let alg = cylinder()?;
    let spin7 = Spin7Structure::new(&alg, standard_cayley(&alg, &(0..8).collect::<Vec<_>>()))?;
    let ctx = Ctx::default_for(&alg)?;
    let r_inv = Expr::gen("r").recip();
    let euler = VectorField::new(&alg, (0..8).map(|i| &x(i) * &r_inv).collect());
    let hopf = VectorField::new(&alg, HOPF.iter().map(|&(c, j)| &(&x(j) * &r_inv) * &Expr::int(c)).collect());
    let qe = QuotientData::reduce(&spin7, &euler, &ctx)?;
    let qh = QuotientData::reduce(&spin7, &hopf, &ctx)?;

    let mut e = CatalogEntry::new(
        "round_s7_ambient",
        "S⁷×S¹ as a cylinder in R⁸ with its Euler and Hopf circle quotients",
        &alg,
    );
    let dtheta = euler.flat();
    let omega = spin7.phi().interior(&euler).interior(&hopf);
    e.form("Phi", spin7.phi().clone())
        .form("phi_s7", qe.base().phi().clone())
        .form("psi_s7", qe.base().psi().clone())
        .form("phi_cp3", qh.base().phi().clone())
        .form("dtheta", dtheta.clone())
        .form("omega", omega.clone());
    e.fields.insert("euler".into(), euler.clone());
    e.fields.insert("hopf".into(), hopf.clone());
    e.spin7 = Some(spin7.clone());
    e.holonomy_rank = Some(21);

    let (qe2, qh2) = (qe.clone(), qh.clone());
    e.checks(Suite::LcpQuotient, move |_: &Ctx| {
        let mut out = Vec::new();
        let te = qe2.torsion();
        for id in qe2.lcp_relations(&te) {
            out.push(Identity::new(format!("euler.{}", id.id), id.formula, id.claim));
        }
        let g = qe2.base();
        out.push(Identity::new(
            "euler.nearly_parallel",
            "dφ_S⁷ = 4∗φ_S⁷",
            Claim::Forms(g.phi().d(), g.psi().scale_i(4)),
        ));
        out.push(Identity::new(
            "euler.f_value",
            "f = T¹₈(X) = -τ₀ = -4",
            Claim::Scalars(qe2.w().clone(), te.f.clone(), Expr::int(-4)),
        ));

        let th = qh2.torsion();
        for id in qh2.lcp_relations(&th) {
            out.push(Identity::new(format!("hopf.{}", id.id), id.formula, id.claim));
        }
        let g = qh2.base();
        let w = qh2.w();
        let bt = &th.base;
        let tau1 = dtheta.scale_r(-4, 3);
        let tau2 = omega.scale_r(2, 3).add(&th.deta).neg();
        out.extend([
            Identity::new("hopf.tau0", "τ₀ = 0", Claim::Scalars(w.clone(), bt.tau0.clone(), Expr::zero())),
            Identity::new("hopf.tau3", "τ₃ = 0", Claim::Forms(bt.tau3.clone(), Form::zero(w, 3))),
            Identity::new("hopf.dtau1", "dτ₁ = 0", Claim::Forms(bt.tau1.d(), Form::zero(w, 2))),
            Identity::new("hopf.tau1", "τ₁ = -(4/3)dθ", Claim::Forms(bt.tau1.clone(), tau1.clone())),
            Identity::new("hopf.tau2", "τ₂ = -((2/3)ω + dη)", Claim::Forms(bt.tau2.clone(), tau2.clone())),
            Identity::new(
                "hopf.dphi",
                "dφ = 3(-(4/3)dθ)∧φ",
                Claim::Forms(g.phi().d(), tau1.wedge(g.phi()).scale_i(3)),
            ),
            Identity::new(
                "hopf.dpsi",
                "d∗φ = 4(-(4/3)dθ)∧∗φ - ((2/3)ω + dη)∧φ",
                Claim::Forms(g.psi().d(), tau1.wedge(g.psi()).scale_i(4).add(&tau2.wedge(g.phi()))),
            ),
        ]);
        Ok(out)
    });
    for (check, expected, prov) in [
        ("euler.lcp.t5", "T⁵₄₈ = 0", Provenance::Stated),
        ("euler.lcp.f_constant", "df = 0", Provenance::Stated),
        ("euler.lcp.tau3", "τ₃ = 0", Provenance::Stated),
        ("euler.lcp.deta_exact", "dη = -(1/f)dT¹₇", Provenance::Stated),
        ("euler.nearly_parallel", "dφ = 4∗φ", Provenance::Stated),
        ("euler.f_value", "-4", Provenance::Computed),
        ("hopf.lcp.t5", "T⁵₄₈ = 0", Provenance::Stated),
        ("hopf.lcp.f_constant", "df = 0", Provenance::Stated),
        ("hopf.lcp.tau3", "τ₃ = 0", Provenance::Stated),
        ("hopf.tau0", "τ₀ = 0", Provenance::Stated),
        ("hopf.tau3", "τ₃ = 0", Provenance::Stated),
        ("hopf.dtau1", "dτ₁ = 0", Provenance::Stated),
        ("hopf.tau1", "-(4/3)dθ", Provenance::Stated),
        ("hopf.tau2", "-((2/3)ω + dη)", Provenance::Stated),
        ("hopf.dphi", "dφ = 3τ₁∧φ", Provenance::Stated),
        ("hopf.dpsi", "d∗φ = 4τ₁∧∗φ + τ₂∧φ", Provenance::Stated),
    ] {
        e.claim(Suite::LcpQuotient, check, expected, prov);
    }
    e.quotients.push(("euler".into(), qe));
    e.quotients.push(("hopf".into(), qh));
    Ok(e)
}
