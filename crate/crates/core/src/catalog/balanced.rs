//! Balanced Spin(7)-structures on circle bundles over `B⁵ × T²`, where `B⁵`
//! is the nilmanifold with `de⁴ = e⁰² + e³¹`, and one further iteration of
//! the construction.
//!
//! Coframes keep the labels of the worked example. The total spaces put the
//! connection form first: `e5, e0, e1, e2, e3, e4, e6, e7` for the first two
//! lifts and `xi, e0, e1, e2, e3, e5, e6, e7` for the second iteration.

use super::{lift, with_connection, CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::expr::Expr;
use crate::frame::{AlgebraBuilder, Form, FrameAlgebra, FrameError, VectorField};
use crate::g2::G2Structure;
use crate::quotient::{balanced_curvature, QuotientData};
use crate::verify::Suite;
use std::sync::Arc;

/// `c·e^{abc…}` with the digits of `word` naming labels `e<digit>`.
fn mono(alg: &Arc<FrameAlgebra>, c: i64, word: &str) -> Form {
    let idx: Vec<usize> = word
        .chars()
        .map(|ch| {
            let l = format!("e{ch}");
            alg.labels().iter().position(|x| *x == l).unwrap_or_else(|| panic!("no coframe element {l}"))
        })
        .collect();
    Form::term(alg, Expr::int(c), &idx)
}

/// Sum of `(coefficient, word)` monomials.
fn poly(alg: &Arc<FrameAlgebra>, deg: usize, t: &[(i64, &str)]) -> Form {
    t.iter().fold(Form::zero(alg, deg), |acc, (c, w)| acc.add(&mono(alg, *c, w)))
}

/// `B⁵ × T²` with coframe `e0, e1, e2, e3, e4, e6, e7`.
fn base_manifold() -> Result<Arc<FrameAlgebra>, FrameError> {
    AlgebraBuilder::new("b5t2", &["e0", "e1", "e2", "e3", "e4", "e6", "e7"])
        .structure_term(4, Expr::one(), 0, 2)
        .structure_term(4, Expr::one(), 3, 1)
        .build()
}

fn base_phi(m: &Arc<FrameAlgebra>) -> Form {
    poly(
        m,
        3,
        &[(1, "137"), (1, "104"), (1, "162"), (1, "306"), (1, "324"), (-1, "702"), (-1, "746")],
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    A,
    B,
}

impl Variant {
    /// The `Λ²₁₄` component `λ` and the resulting curvature, as stated.
    fn data(self, m: &Arc<FrameAlgebra>) -> (Form, Form) {
        match self {
            Variant::A => (
                poly(m, 2, &[(1, "03"), (1, "12"), (2, "47")]).scale_r(1, 3),
                poly(m, 2, &[(1, "03"), (1, "12")]),
            ),
            Variant::B => (
                poly(m, 2, &[(2, "12"), (-1, "03"), (1, "47")]).scale_r(2, 3),
                poly(m, 2, &[(2, "12")]),
            ),
        }
    }
}

/// A balanced lift: the base structure, the curvature with its
/// preconditions, and the assembled quotient data with `s ≡ 1`.
struct Lift {
    base: G2Structure,
    lambda: Form,
    deta: Form,
    lift_checks: Vec<Identity>,
    q: QuotientData,
}

fn balanced_lift(
    base: G2Structure,
    lambda: Form,
    name: &str,
    eta: &str,
) -> Result<Lift, CatalogError> {
    let (deta, lift_checks) = balanced_curvature(&base, &lambda);
    let w = with_connection(base.alg(), name, eta, &deta)?;
    let g = G2Structure::frame(&w, &[1, 2, 3, 4, 5, 6, 7], lift(base.phi(), &w))?;
    let q = QuotientData::assemble(&w, Expr::one(), g)?;
    Ok(Lift {
        base,
        lambda,
        deta,
        lift_checks,
        q,
    })
}

fn first_lift(v: Variant) -> Result<(Lift, Form), CatalogError> {
    let m = base_manifold()?;
    let base = G2Structure::frame(&m, &[0, 1, 2, 3, 4, 5, 6], base_phi(&m))?;
    let (lambda, curvature) = v.data(&m);
    let name = if v == Variant::A { "b5t2_a" } else { "b5t2_b" };
    Ok((balanced_lift(base, lambda, name, "e5")?, curvature))
}

/// Balanced-suite identities shared by all three entries.
fn balanced_checks(l: &Lift, curvature: &Form, deta7: &Form) -> Vec<Identity> {
    let w = l.q.w();
    let t = l.q.torsion();
    let mut out = l.q.balanced_relations(&t);
    out.extend(l.lift_checks.iter().cloned());
    out.push(Identity::new(
        "bal.curvature",
        "dη = λ - 4∗(τ₁∧∗φ) is the stated curvature form",
        Claim::Forms(l.deta.clone(), curvature.clone()),
    ));
    out.push(Identity::new(
        "bal.deta7_value",
        "(dη)₇ as stated",
        Claim::Forms(t.deta7.clone(), lift(deta7, w)),
    ));
    out.push(Identity::new("bal.lambda", "(dη)₁₄ = λ", Claim::Forms(t.deta14.clone(), lift(&l.lambda, w))));
    out
}

const BALANCED_CLAIMS: [(&str, &str, Provenance); 10] = [
    ("bal.s", "s ≡ 1", Provenance::Trivial),
    ("bal.t1", "T¹₈ = 0", Provenance::Stated),
    ("bal.deta7", "(dη)₇ = -4∗(τ₁∧∗φ)", Provenance::Stated),
    ("bal.tau0", "τ₀ = 0", Provenance::Stated),
    ("lift.tau0", "τ₀ = 0", Provenance::Stated),
    ("lift.lambda14", "λ ∈ Λ²₁₄", Provenance::Stated),
    ("lift.closed", "d(dη) = 0", Provenance::Computed),
    ("bal.curvature", "stated curvature form", Provenance::Stated),
    ("bal.deta7_value", "stated (dη)₇", Provenance::Stated),
    ("bal.lambda", "(dη)₁₄ = λ", Provenance::Trivial),
];

fn variant(v: Variant, id: &'static str, summary: &'static str) -> Result<CatalogEntry, CatalogError> {
    let (l, curvature) = first_lift(v)?;
    let m = l.base.alg().clone();
    let deta7 = poly(&m, 2, &[(1, "03"), (1, "12"), (-1, "47")]).scale_r(2, 3);
    let w = l.q.w().clone();
    let mut e = CatalogEntry::new(id, summary, &w);
    e.form("phi", l.q.base().phi().clone())
        .form("Phi", l.q.big_phi())
        .form("deta", l.q.eta().d());
    let ids = balanced_checks(&l, &curvature, &deta7);
    e.checks(Suite::BalancedQuotient, move |_: &Ctx| Ok(ids.clone()));
    for (check, expected, prov) in BALANCED_CLAIMS {
        e.claim(Suite::BalancedQuotient, check, expected, prov);
    }
    e.quotients.push(("lift".into(), l.q));
    Ok(e)
}

pub(super) fn variant_a() -> Result<CatalogEntry, CatalogError> {
    variant(Variant::A, "balanced_b5t2_a", "balanced lift of B⁵×T² with curvature e⁰³ + e¹²")
}

pub(super) fn variant_b() -> Result<CatalogEntry, CatalogError> {
    variant(Variant::B, "balanced_b5t2_b", "balanced lift of B⁵×T² with curvature 2e¹²")
}

/// `M̃` with coframe `e0, e1, e2, e3, e5, e6, e7` and `de⁵ = 2e¹²`.
fn second_base() -> Result<Arc<FrameAlgebra>, FrameError> {
    AlgebraBuilder::new("b5t2_tilde", &["e0", "e1", "e2", "e3", "e5", "e6", "e7"])
        .structure_term(4, Expr::int(2), 1, 2)
        .build()
}

pub(super) fn second_iteration() -> Result<CatalogEntry, CatalogError> {
    let (lb, _) = first_lift(Variant::B)?;
    let mt = second_base()?;
    let phi_t = poly(
        &mt,
        3,
        &[(1, "501"), (1, "523"), (1, "567"), (1, "026"), (1, "073"), (-1, "127"), (-1, "136")],
    );
    let base = G2Structure::frame(&mt, &[0, 1, 2, 3, 4, 5, 6], phi_t.clone())?;
    // The connection of the new fibre direction e_4 over M̃.
    let deta_t = poly(&mt, 2, &[(1, "02"), (1, "31")]);
    let (_, deta_t14) = base.project2(&deta_t);
    let lambda = deta_t14.add(&poly(&mt, 2, &[(1, "51"), (2, "26"), (1, "37")]));
    let l = balanced_lift(base, lambda, "b5t2_second", "xi")?;
    let w = l.q.w().clone();

    let mut e = CatalogEntry::new(
        "balanced_second_iteration",
        "balanced lift over the quotient of the 2e¹² lift by e₄",
        &w,
    );
    e.form("phi", l.q.base().phi().clone())
        .form("Phi", l.q.big_phi())
        .form("dxi", l.q.eta().d());

    let curvature = poly(&mt, 2, &[(1, "02"), (1, "31"), (1, "51"), (2, "26"), (1, "37")]);
    let dxi7 = poly(&mt, 2, &[(1, "02"), (1, "31"), (-1, "57")]).scale_r(2, 3);
    let mut ids = balanced_checks(&l, &curvature, &dxi7);

    // φ̃ = ι_{e₄}Φ_b, read on the total space of the 2e¹² lift where e4 sits
    // at index 5 and the M̃ coframe e5, e0, e1, e2, e3, e6, e7 at 0, 1, 2, 3, 4, 6, 7.
    let wb = lb.q.w().clone();
    let to_wb = [1usize, 2, 3, 4, 0, 6, 7];
    let phi_t_wb = phi_t.terms().iter().fold(Form::zero(&wb, 3), |acc, (mask, c)| {
        let idx: Vec<usize> = (0..7).filter(|i| mask & (1 << i) != 0).map(|i| to_wb[i]).collect();
        acc.add(&Form::term(&wb, c.clone(), &idx))
    });
    let contracted = lb.q.big_phi().interior(&VectorField::basis(&wb, 5));
    let (deta_t7, _) = l.base.project2(&deta_t);
    ids.push(Identity::new(
        "second.phi_tilde",
        "φ̃ = ι_{e₄}Φ",
        Claim::Forms(contracted, phi_t_wb),
    ));
    ids.push(Identity::new(
        "second.deta_tilde7",
        "(dη̃)₇ = (2/3)(e⁰² + e³¹ - e⁵⁷)",
        Claim::Forms(lift(&deta_t7, &w), lift(&dxi7, &w)),
    ));
    e.checks(Suite::BalancedQuotient, move |_: &Ctx| Ok(ids.clone()));
    for (check, expected, prov) in BALANCED_CLAIMS {
        e.claim(Suite::BalancedQuotient, check, expected, prov);
    }
    e.claim(Suite::BalancedQuotient, "second.phi_tilde", "φ̃ = ι_{e₄}Φ", Provenance::Stated);
    e.claim(Suite::BalancedQuotient, "second.deta_tilde7", "(2/3)(e⁰² + e³¹ - e⁵⁷)", Provenance::Stated);
    e.quotients.push(("lift".into(), l.q));
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stated_lambdas_give_the_stated_curvatures_by_hand() {
        // (dη)₇ + λ, added coefficientwise without the projection machinery.
        let m = base_manifold().unwrap();
        let d7 = poly(&m, 2, &[(1, "03"), (1, "12"), (-1, "47")]).scale_r(2, 3);
        for v in [Variant::A, Variant::B] {
            let (lambda, curvature) = v.data(&m);
            assert_eq!(d7.add(&lambda), curvature);
        }
    }

    #[test]
    fn base_structure_has_no_tau0() {
        let m = base_manifold().unwrap();
        let g = G2Structure::frame(&m, &[0, 1, 2, 3, 4, 5, 6], base_phi(&m)).unwrap();
        assert!(g.torsion().tau0.is_zero());
    }
}
