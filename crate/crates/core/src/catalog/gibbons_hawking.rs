//! Gibbons–Hawking data: the flat cylinder with constant potential, and the
//! Hopf map `R⁴ → R³` with `f = 1/(2R)`.
//!
//! Radii for the Hopf entry: `r² = Σx_i²` on `R⁴` and `R² = Σμ_i²` on `R³`,
//! related by `R = r²/2`.

use super::{terms, CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::expr::{ex, Expr};
use crate::frame::{AlgebraBuilder, Form, FrameAlgebra, FrameError, Sampler, SymTensor};
use crate::quotient::GibbonsHawking;
use crate::verify::Suite;
use std::sync::Arc;

const BASE: [&str; 3] = ["m1", "m2", "m3"];

fn base_syms() -> [String; 3] {
    BASE.map(String::from)
}

/// `½(m1² + m2² + m3²)^{-1/2}` in the base coordinate symbols.
fn hopf_potential() -> Expr {
    let r2 = BASE.iter().fold(Expr::zero(), |a, m| &a + &Expr::gen(m).powi(2));
    &r2.pow(ex(-1, 2)) * &Expr::rat(1, 2)
}

pub(super) fn gh_flat() -> Result<CatalogEntry, CatalogError> {
    let mut b = AlgebraBuilder::new("gh_flat", &["eta", "dm1", "dm2", "dm3"]);
    for (i, m) in BASE.iter().enumerate() {
        b = b.generator(m, false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), i + 1)]);
    }
    let alg = b.build()?;
    let gh = GibbonsHawking {
        alg: alg.clone(),
        mu: BASE.map(Expr::gen),
        base_syms: base_syms(),
        f: Expr::int(2),
        eta: Form::coframe(&alg, 0),
    };
    let mut e = CatalogEntry::new("gh_flat", "flat hyperkähler cylinder from a constant potential", &alg);
    for (i, w) in gh.hyperkahler_forms().into_iter().enumerate() {
        e.form(&format!("omega{}", i + 1), w);
    }
    let ids = gh.identities();
    e.checks(Suite::GibbonsHawking, move |_: &Ctx| Ok(ids.clone()));
    for (check, expected) in [
        ("gh.monopole", "∗df = dη"),
        ("gh.harmonic", "Δf = 0"),
        ("gh.closed", "dωᵢ = 0"),
        ("gh.orthonormal", "½ωᵢ∧ωⱼ = δᵢⱼ vol"),
        ("gh.volume", "(½ω₁²)² = det g"),
    ] {
        e.claim(Suite::GibbonsHawking, check, expected, Provenance::Trivial);
    }
    e.gh = Some(gh);
    Ok(e)
}

struct Hopf {
    alg: Arc<FrameAlgebra>,
    x: [Expr; 4],
    mu: [Expr; 3],
    /// `r²η = x₂dx₁ - x₁dx₂ - x₄dx₃ + x₃dx₄`.
    eta_r2: Form,
    gamma: [Form; 3],
    r2: Expr,
}

fn hopf() -> Result<Hopf, FrameError> {
    let mut b = AlgebraBuilder::new("gh_hopf", &["dx1", "dx2", "dx3", "dx4"]);
    for i in 0..4 {
        b = b.generator(&format!("x{}", i + 1), false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), i)]);
    }
    let alg = b.build()?;
    let x: [Expr; 4] = std::array::from_fn(|i| Expr::gen(&format!("x{}", i + 1)));
    let half = Expr::rat(1, 2);
    let mu = [
        &(&(&(&x[0] * &x[0]) + &(&x[1] * &x[1])) - &(&x[2] * &x[2])) - &(&x[3] * &x[3]),
        &(&x[0] * &x[3]) + &(&x[1] * &x[2]),
        &(&x[0] * &x[2]) - &(&x[1] * &x[3]),
    ];
    let mu = [&mu[0] * &half, mu[1].clone(), mu[2].clone()];
    let eta_r2 = Form::one_form(&alg, &[x[1].clone(), x[0].neg(), x[3].neg(), x[2].clone()]);
    let gamma = [
        terms(&alg, 2, &[(1, &[0, 1]), (1, &[2, 3])]),
        terms(&alg, 2, &[(1, &[0, 2]), (-1, &[1, 3])]),
        terms(&alg, 2, &[(-1, &[0, 3]), (-1, &[1, 2])]),
    ];
    let r2 = x.iter().fold(Expr::zero(), |a, xi| &a + &(xi * xi));
    Ok(Hopf {
        alg,
        x,
        mu,
        eta_r2,
        gamma,
        r2,
    })
}

pub(super) fn gh_hopf() -> Result<CatalogEntry, CatalogError> {
    let h = hopf()?;
    let alg = h.alg.clone();
    let eta = h.eta_r2.scale(&h.r2.recip());
    let gh = GibbonsHawking {
        alg: alg.clone(),
        mu: h.mu.clone(),
        base_syms: base_syms(),
        f: hopf_potential(),
        eta: eta.clone(),
    };
    let dmu = gh.dmu();
    let mut e = CatalogEntry::new("gh_hopf", "flat R⁴ as the Gibbons–Hawking space of f = 1/(2R) via the Hopf map", &alg);
    e.form("eta", eta.clone());
    for (i, g) in h.gamma.iter().enumerate() {
        e.form(&format!("gamma{}", i + 1), g.clone());
    }
    e.quantities.insert("r2".into(), h.r2.clone());
    e.quantities.insert("f".into(), gh.potential());

    let cyc = |i: usize| ((i + 1) % 3, (i + 2) % 3);
    // r²γᵢ = r²η∧dμᵢ - dμⱼ∧dμₖ, using f = r⁻² from R = r²/2.
    let expansion: Vec<Claim> = (0..3)
        .map(|i| {
            let (j, k) = cyc(i);
            Claim::Forms(
                h.gamma[i].scale(&h.r2),
                h.eta_r2.wedge(&dmu[i]).sub(&dmu[j].wedge(&dmu[k])),
            )
        })
        .collect();
    let dmu1_display = Form::one_form(&alg, &[h.x[0].clone(), h.x[1].clone(), h.x[2].neg(), h.x[3].neg()]);
    let dmu3_display = Form::one_form(&alg, &[h.x[2].clone(), h.x[3].neg(), h.x[0].clone(), h.x[1].neg()]);
    let dmu2_display = Form::one_form(&alg, &[h.x[3].clone(), h.x[2].clone(), h.x[1].clone(), h.x[0].clone()]);
    let hk = gh.hyperkahler_forms();
    let mut ids = gh.identities();
    let radius = h.mu.iter().fold(Expr::zero(), |a, m| &a + &(m * m));
    ids.extend([
        Identity::new(
            "gh_hopf.gamma3_display",
            "r²γ₃ = (r²η)∧(x₁dx₃ + x₃dx₁ - x₂dx₄ - x₄dx₂) - (x₁dx₁ + x₂dx₂ - x₃dx₃ - x₄dx₄)∧(x₁dx₄ + x₄dx₁ + x₂dx₃ + x₃dx₂)",
            Claim::Forms(
                h.gamma[2].scale(&h.r2),
                h.eta_r2.wedge(&dmu3_display).sub(&dmu1_display.wedge(&dmu2_display)),
            ),
        ),
        Identity::new("gh_hopf.gamma_expansion", "r²γᵢ = r²η∧dμᵢ - dμⱼ∧dμₖ", Claim::All(expansion)),
        Identity::new(
            "gh_hopf.radius",
            "R² = Σμᵢ² = r⁴/4",
            Claim::Scalars(alg.clone(), radius, &h.r2.powi(2) * &Expr::rat(1, 4)),
        ),
        Identity::new(
            "gh_hopf.gamma_closed",
            "dγᵢ = 0",
            Claim::All(h.gamma.iter().map(|g| Claim::Forms(g.d(), Form::zero(&alg, 3))).collect()),
        ),
        Identity::new(
            "gh_hopf.gamma_is_omega",
            "γᵢ = η∧dμᵢ - f dμⱼ∧dμₖ with f = 1/(2R)",
            Claim::All(h.gamma.iter().zip(&hk).map(|(g, w)| Claim::Forms(g.clone(), w.clone())).collect()),
        ),
        Identity::new(
            "gh_hopf.metric",
            "f⁻¹η² + f π*g_U = Σdx_i²",
            Claim::Tensors(alg.clone(), gh.metric(), SymTensor::identity(4)),
        ),
    ]);
    e.checks(Suite::GibbonsHawking, move |_: &Ctx| Ok(ids.clone()));
    for (check, expected, prov) in [
        ("gh.monopole", "∗df = dη", Provenance::Stated),
        ("gh.harmonic", "Δf = 0", Provenance::Trivial),
        ("gh.closed", "dωᵢ = 0", Provenance::Stated),
        ("gh.orthonormal", "½ωᵢ∧ωⱼ = δᵢⱼ vol", Provenance::Stated),
        ("gh.volume", "(½ω₁²)² = det g", Provenance::Computed),
        ("gh_hopf.gamma3_display", "expansion of γ₃ with dμ₁ in the second slot", Provenance::Computed),
        ("gh_hopf.gamma_expansion", "γᵢ = η∧dμᵢ - f dμⱼ∧dμₖ", Provenance::Stated),
        ("gh_hopf.radius", "R² = r⁴/4", Provenance::Stated),
        ("gh_hopf.gamma_closed", "dγᵢ = 0", Provenance::Trivial),
        ("gh_hopf.gamma_is_omega", "γᵢ = ωᵢ", Provenance::Stated),
        ("gh_hopf.metric", "g_R⁴ = f⁻¹η² + f π*g_U", Provenance::Stated),
    ] {
        e.claim(Suite::GibbonsHawking, check, expected, prov);
    }
    e.gh = Some(gh);
    Ok(e)
}
