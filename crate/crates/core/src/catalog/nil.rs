//! The Calabi model over the flat torus: a circle bundle over `T⁶ × R⁺`
//! with `dη = -ω` and fibre length `s = r³`.
//!
//! Coframe of the total space: `eta, e1..e6, f7` where `e^i = dθ_i` and
//! `f7 = 2r³dr` is the unit 1-form of the base metric along `R⁺`.

use super::{terms, CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::curvature::LeviCivita;
use crate::expr::{q as rat, Expr};
use crate::frame::{AlgebraBuilder, Form, FrameAlgebra, FrameError, Point, Sampler, SymTensor};
use crate::g2::G2Structure;
use crate::linalg::fit_slope;
use crate::quotient::{calabi_form, calabi_phi, QuotientData};
use crate::verify::Suite;
use std::sync::Arc;

/// Range of `ρ = (2/5)r⁵` over which the asymptotic slopes are fitted.
pub const ASYMPTOTIC_RANGE: (f64, f64) = (10.0, 1000.0);

struct CyForms {
    omega: Form,
    re: Form,
    im: Form,
}

fn cy_forms(w: &Arc<FrameAlgebra>) -> CyForms {
    CyForms {
        omega: terms(w, 2, &[(1, &[1, 2]), (1, &[3, 4]), (1, &[5, 6])]),
        re: terms(w, 3, &[(1, &[1, 3, 5]), (-1, &[1, 4, 6]), (-1, &[2, 3, 6]), (-1, &[2, 4, 5])]),
        im: terms(w, 3, &[(1, &[1, 3, 6]), (1, &[1, 4, 5]), (1, &[2, 3, 5]), (-1, &[2, 4, 6])]),
    }
}

fn total_space() -> Result<Arc<FrameAlgebra>, FrameError> {
    let r = Expr::gen("r");
    let minus = Expr::int(-1);
    AlgebraBuilder::new("nil_cy", &["eta", "e1", "e2", "e3", "e4", "e5", "e6", "f7"])
        .structure_term(0, minus.clone(), 1, 2)
        .structure_term(0, minus.clone(), 3, 4)
        .structure_term(0, minus, 5, 6)
        .generator("r", true, Sampler::Uniform(0.5, 2.0), vec![(r.powi(3).recip().scale(&rat(1, 2)), 7)])
        .build()
}

/// Points with the given values of `r`.
fn radial_points(alg: &FrameAlgebra, rs: &[f64]) -> Result<Vec<Point>, FrameError> {
    rs.iter()
        .map(|&r| Point::new().with("r", r).complete(alg).map_err(FrameError::from))
        .collect()
}

fn r_of_rho(rho: f64) -> f64 {
    (2.5 * rho).powf(0.2)
}

/// `log ρ` samples spread evenly over [`ASYMPTOTIC_RANGE`].
fn log_grid(n: usize) -> Vec<f64> {
    let (a, b) = ASYMPTOTIC_RANGE;
    (0..n).map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Volume of `{ρ' < ρ}` per unit volume of the torus and fibre, by Simpson's
/// rule in `r` on the density read off from `vol_Φ`.
fn volume_up_to(density_r: &dyn Fn(f64) -> f64, r: f64) -> f64 {
    let n = 2000;
    let h = r / n as f64;
    let mut acc = density_r(0.0) + density_r(r);
    for k in 1..n {
        acc += density_r(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

pub(super) fn nil_cy() -> Result<CatalogEntry, CatalogError> {
    let w = total_space()?;
    let cy = cy_forms(&w);
    let f7 = Form::coframe(&w, 7);
    let phi = f7.wedge(&cy.omega).add(&cy.re);
    let base = G2Structure::frame(&w, &[1, 2, 3, 4, 5, 6, 7], phi)?;
    let r = Expr::gen("r");
    let s = r.powi(3);
    let q = QuotientData::assemble(&w, s.clone(), base)?;

    let mut e = CatalogEntry::new("nil_cy", "Calabi model over T⁶: SU(4)-holonomy metric on a nilmanifold times R⁺", &w);
    e.form("eta", q.eta().clone())
        .form("omega", cy.omega.clone())
        .form("re_Omega", cy.re.clone())
        .form("im_Omega", cy.im.clone())
        .form("phi", q.base().phi().clone())
        .form("Phi", q.big_phi());
    e.quantities.insert("s".into(), s.clone());
    e.quantities.insert("rho".into(), r.powi(5).scale(&rat(2, 5)));
    e.holonomy_rank = Some(15);

    let metric_stated = {
        // r²g_T⁶ + r⁻⁶η² + 4r⁸dr², with dr = f7/(2r³).
        let mut g = SymTensor::sym_product(q.eta(), q.eta()).scale(&r.powi(6).recip());
        for i in 1..7 {
            let c = Form::coframe(&w, i);
            g = g.add(&SymTensor::sym_product(&c, &c).scale(&r.powi(2)));
        }
        let dr = Form::scalar(&w, r.clone()).d();
        g.add(&SymTensor::sym_product(&dr, &dr).scale(&r.powi(8).scale(&rat(4, 1))))
    };
    let metric_structure = {
        let o = q.spin7().alg();
        (0..8).fold(SymTensor::zero(8), |g, a| {
            let c = q.from_spin7(&Form::coframe(o, a));
            g.add(&SymTensor::sym_product(&c, &c))
        })
    };
    let calabi = vec![
        Identity::new(
            "calabi.form",
            "Φ = ½ω̂² + Re Ω̂",
            Claim::Forms(calabi_form(q.eta(), &s, &cy.omega, &cy.re, &cy.im), q.big_phi()),
        ),
        Identity::new(
            "calabi.phi",
            "φ = (2/3)s^{1/3}ds∧ω + Ω⁺",
            Claim::Forms(calabi_phi(&s, &cy.omega, &cy.re), q.base().phi().clone()),
        ),
        Identity::new("calabi.deta", "dη = -ω", Claim::Forms(q.eta().d(), cy.omega.neg())),
        Identity::new(
            "calabi.metric",
            "ĥ = r²g_T⁶ + r⁻⁶η² + 4r⁸dr²",
            Claim::Tensors(w.clone(), metric_structure, metric_stated),
        ),
    ];
    e.checks(Suite::Calabi, move |_: &Ctx| Ok(calabi.clone()));

    let vol_coeff = q.vol_big().coeff(&[0, 1, 2, 3, 4, 5, 6, 7]);
    let rm = LeviCivita::new(q.spin7().alg()).norm_sq();
    let w_asym = w.clone();
    e.checks(Suite::Calabi, move |_: &Ctx| {
        // vol_Φ = c·η∧e¹..e⁶∧f7 with f7 = 2r³dr and dρ = 2r⁴dr.
        let density = |rv: f64| -> f64 {
            if rv == 0.0 {
                return 0.0;
            }
            let p = Point::new().with("r", rv);
            p.eval(&vol_coeff).map(|c| c.abs() * 2.0 * rv.powi(3)).unwrap_or(f64::NAN)
        };
        let rhos = log_grid(25);
        let (mut lx, mut lv, mut lr) = (Vec::new(), Vec::new(), Vec::new());
        let pts = radial_points(&w_asym, &rhos.iter().map(|&x| r_of_rho(x)).collect::<Vec<_>>())?;
        for (rho, p) in rhos.iter().zip(&pts) {
            lx.push(rho.ln());
            lv.push(volume_up_to(&density, r_of_rho(*rho)).ln());
            lr.push(0.5 * p.eval(&rm).map_err(FrameError::from)?.ln());
        }
        Ok(vec![
            Identity::new(
                "calabi.volume_growth",
                "vol{ρ' < ρ} ~ ρ^{8/5} on ρ ∈ [10, 10³]",
                Claim::Value {
                    observed: fit_slope(&lx, &lv),
                    expected: 1.6,
                    tol: 0.05,
                },
            ),
            Identity::new(
                "calabi.curvature_decay",
                "|Rm| ~ ρ⁻² on ρ ∈ [10, 10³]",
                Claim::Value {
                    observed: fit_slope(&lx, &lr),
                    expected: -2.0,
                    tol: 0.05,
                },
            ),
        ])
    });

    let qc = q.clone();
    e.checks(Suite::TorsionFreeQuotient, move |_: &Ctx| {
        let t = qc.torsion();
        Ok(qc.torsion_free_relations(&t))
    });
    e.quotients.push(("calabi".into(), q));

    for (check, expected, prov) in [
        ("calabi.form", "Φ = ½ω̂² + Re Ω̂", Provenance::Stated),
        ("calabi.phi", "φ = (2/3)s^{1/3}ds∧ω + Ω⁺", Provenance::Stated),
        ("calabi.deta", "dη = -ω", Provenance::Stated),
        ("calabi.metric", "r²g_T⁶ + r⁻⁶η² + 4r⁸dr²", Provenance::Stated),
        ("calabi.volume_growth", "slope 8/5 ± 0.05", Provenance::Stated),
        ("calabi.curvature_decay", "slope -2 ± 0.05", Provenance::Stated),
    ] {
        e.claim(Suite::Calabi, check, expected, prov);
    }
    for check in ["tf.dPhi", "tf.deta7", "tf.deta14", "tf.calibrated"] {
        e.claim(Suite::TorsionFreeQuotient, check, "holds", Provenance::Stated);
    }
    e.claim(Suite::HolonomyRank, "holonomy.rank", "15", Provenance::Stated);
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_density_is_r_cubed_in_rho() {
        // vol = r⁴η∧e¹..e⁶∧(2r³dr), so V = ∫₀^r 2r'^7 dr' = r⁸/4.
        let w = total_space().unwrap();
        let q = {
            let cy = cy_forms(&w);
            let phi = Form::coframe(&w, 7).wedge(&cy.omega).add(&cy.re);
            let base = G2Structure::frame(&w, &[1, 2, 3, 4, 5, 6, 7], phi).unwrap();
            QuotientData::assemble(&w, Expr::gen("r").powi(3), base).unwrap()
        };
        let c = q.vol_big().coeff(&[0, 1, 2, 3, 4, 5, 6, 7]);
        let density = |rv: f64| Point::new().with("r", rv).eval(&c).unwrap().abs() * 2.0 * rv.powi(3);
        for r in [1.0, 2.5, 4.0] {
            let v = volume_up_to(&density, r);
            assert!((v - r.powi(8) / 4.0).abs() < 1e-8 * r.powi(8), "r = {r}: {v}");
        }
    }
}
