//! Flat tori and flat R⁸ with the standard forms.

use super::{labels, CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx};
use crate::check::Identity;
use crate::expr::Expr;
use crate::frame::{AlgebraBuilder, Sampler, VectorField};
use crate::g2::{standard_phi, G2Structure};
use crate::quotient::QuotientData;
use crate::spin7::{standard_cayley, Spin7Structure};
use crate::verify::Suite;

fn refs(l: &[String]) -> Vec<&str> {
    l.iter().map(String::as_str).collect()
}

pub(super) fn flat_t7() -> Result<CatalogEntry, CatalogError> {
    let l = labels("e", 1..8);
    let alg = AlgebraBuilder::new("T7", &refs(&l)).build()?;
    let idx: Vec<usize> = (0..7).collect();
    let g2 = G2Structure::frame(&alg, &idx, standard_phi(&alg, &idx))?;
    let mut e = CatalogEntry::new("flat_T7", "flat 7-torus with the standard G2 form", &alg);
    e.form("phi", g2.phi().clone()).form("psi", g2.psi().clone());
    e.g2 = Some(g2);
    e.holonomy_rank = Some(0);
    Ok(e)
}

pub(super) fn flat_t8() -> Result<CatalogEntry, CatalogError> {
    let l = labels("e", 0..8);
    let alg = AlgebraBuilder::new("T8", &refs(&l)).build()?;
    let idx: Vec<usize> = (1..8).collect();
    let base = G2Structure::frame(&alg, &idx, standard_phi(&alg, &idx))?;
    let q = QuotientData::assemble(&alg, Expr::one(), base)?;
    let mut e = CatalogEntry::new("flat_T8", "flat 8-torus as the trivial circle bundle over T⁷", &alg);
    e.form("Phi", q.big_phi());
    e.holonomy_rank = Some(0);
    let cayley = standard_cayley(&alg, &(0..8).collect::<Vec<_>>());
    let qc = q.clone();
    e.checks(Suite::TorsionFreeQuotient, move |_: &Ctx| {
        let t = qc.torsion();
        let mut out = qc.torsion_free_relations(&t);
        out.push(Identity::new(
            "product.cayley",
            "η∧φ₀ + ∗φ₀ = Φ₀",
            Claim::Forms(qc.big_phi(), cayley.clone()),
        ));
        Ok(out)
    });
    for check in ["tf.dPhi", "tf.deta7", "tf.deta14", "tf.calibrated", "product.cayley"] {
        e.claim(Suite::TorsionFreeQuotient, check, "holds", Provenance::Trivial);
    }
    e.quotients.push(("product".into(), q));
    Ok(e)
}

/// Flat R⁸ in the coordinate coframe, reduced along the translation `∂₀`.
pub(super) fn flat_r8() -> Result<CatalogEntry, CatalogError> {
    let l = labels("dx", 0..8);
    let mut b = AlgebraBuilder::new("R8", &refs(&l));
    for i in 0..8 {
        b = b.generator(&format!("x{i}"), false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), i)]);
    }
    let alg = b.build()?;
    let spin7 = Spin7Structure::new(&alg, standard_cayley(&alg, &(0..8).collect::<Vec<_>>()))?;
    let ctx = Ctx::default_for(&alg)?;
    let q = QuotientData::reduce(&spin7, &VectorField::basis(&alg, 0), &ctx)?;
    let mut e = CatalogEntry::new("flat_R8", "flat R⁸ reduced along a translation", &alg);
    e.form("Phi", spin7.phi().clone()).form("phi", q.base().phi().clone());
    e.spin7 = Some(spin7);
    e.holonomy_rank = Some(0);
    let qc = q.clone();
    e.checks(Suite::TorsionFreeQuotient, move |_: &Ctx| {
        let t = qc.torsion();
        Ok(qc.torsion_free_relations(&t))
    });
    for check in ["tf.dPhi", "tf.deta7", "tf.deta14", "tf.calibrated"] {
        e.claim(Suite::TorsionFreeQuotient, check, "holds", Provenance::Trivial);
    }
    e.quotients.push(("translation".into(), q));
    Ok(e)
}
