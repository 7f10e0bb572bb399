//! A circle bundle whose Spin(7)-structure has both torsion components
//! non-zero, so that the mixed terms of the curvature formulas are exercised.
//!
//! Coframe `eta, e1..e7` with `de1 = … = de4 = 0`, `dη = e¹² + e³⁴`,
//! `de5 = e¹³`, `de6 = e¹⁴ - e²³`, `de7 = e²⁴`; the generator `r` has
//! `dr = e¹`, the base carries the standard `φ` on `e1..e7` and the fibre
//! length is `s = r`.

use super::{CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::expr::Expr;
use crate::frame::{AlgebraBuilder, FrameAlgebra, FrameError, Sampler};
use crate::g2::{standard_phi, G2Structure};
use crate::quotient::QuotientData;
use crate::spin7::TorsionClass;
use crate::verify::Suite;
use std::sync::Arc;

fn total_space() -> Result<Arc<FrameAlgebra>, FrameError> {
    let one = Expr::one();
    AlgebraBuilder::new("generic", &["eta", "e1", "e2", "e3", "e4", "e5", "e6", "e7"])
        .structure_term(0, one.clone(), 1, 2)
        .structure_term(0, one.clone(), 3, 4)
        .structure_term(5, one.clone(), 1, 3)
        .structure_term(6, one.clone(), 1, 4)
        .structure_term(6, Expr::int(-1), 2, 3)
        .structure_term(7, one.clone(), 2, 4)
        .generator("r", true, Sampler::Uniform(0.5, 2.0), vec![(one, 1)])
        .build()
}

pub(super) fn generic_circle_bundle() -> Result<CatalogEntry, CatalogError> {
    let w = total_space()?;
    let idx: Vec<usize> = (1..8).collect();
    let base = G2Structure::frame(&w, &idx, standard_phi(&w, &idx))?;
    let q = QuotientData::assemble(&w, Expr::gen("r"), base)?;
    let mut e = CatalogEntry::new(
        "generic_circle_bundle",
        "circle bundle over a nilpotent frame with s = r: T¹ and T⁵ both non-zero",
        &w,
    );
    e.form("eta", q.eta().clone())
        .form("phi", q.base().phi().clone())
        .form("Phi", q.big_phi());
    e.quantities.insert("s".into(), q.s().clone());

    let spin7 = q.spin7().clone();
    e.checks(Suite::RicciOracle, move |ctx: &Ctx| {
        let class = spin7.classify(&spin7.torsion(), ctx);
        Ok(vec![Identity::new(
            "generic.class",
            format!("T¹ ≠ 0 and T⁵ ≠ 0 (class {class})"),
            Claim::Fact {
                holds: class == TorsionClass::Generic,
                residual: 0.0,
            },
        )])
    });
    for (check, expected, prov) in [
        ("generic.class", "generic", Provenance::Computed),
        ("ricci.scal", "Scal from T¹, T⁵", Provenance::Stated),
        ("ricci.tensor", "Ric from T¹, T⁵ with mixed term -2j(T¹∧∗T⁵)", Provenance::Stated),
        ("ricci.tensor_corrected", "mixed term +j(T¹∧∗T⁵)", Provenance::Computed),
    ] {
        e.claim(Suite::RicciOracle, check, expected, prov);
    }
    for (check, expected, prov) in [
        ("round_trip", "reduce(assemble(q), X) = q", Provenance::Trivial),
        ("rel.l_map", "L(7T⁵₇) = 4s^{-4/3}T⁴₇", Provenance::Stated),
        ("rel.l_map_corrected", "L(T⁵₇) = 4s^{4/3}T⁴₇", Provenance::Computed),
        ("rel.t5_7", "7T⁵₇ from (dη)₇, ds^{4/3}, τ₁", Provenance::Stated),
        ("rel.t1_7", "7T¹₇ from τ₁, ds^{4/3}, (dη)₇", Provenance::Stated),
    ] {
        e.claim(Suite::TorsionRelations, check, expected, prov);
    }
    e.quotients.push(("bundle".into(), q));
    Ok(e)
}
