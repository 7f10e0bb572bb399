//! Flat R⁸ = H² reduced along the diagonal circle `X`, with the second
//! circle `Y` used to write the closed G2-structure on `R⁺ × CP³` over
//! `R³ ⊕ R³ \ {0}` in the moment coordinates `u_i`, `v_i`.
//!
//! Scalars: `u = x0² + x1² + x4² + x5²` and `v = x2² + x3² + x6² + x7²`, so
//! that `|u| = u`, `|v| = v` for the moment vectors and `R² = u + v`.

use super::{CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::expr::{ex, Expr};
use crate::frame::{AlgebraBuilder, Form, FrameAlgebra, FrameError, Sampler, SymTensor, VectorField};
use crate::g2::G2Structure;
use crate::quotient::QuotientData;
use crate::spin7::Spin7Structure;
use crate::verify::Suite;
use std::sync::Arc;

/// `Σ c·x_a dx_b` as `(c, a, b)`. The first row corrects the printed
/// `-x5dx4 + x5dx4` to `-x5dx4 + x4dx5`.
const ALPHA: [[(i64, usize, usize); 8]; 3] = [
    [(-1, 1, 0), (1, 0, 1), (1, 3, 2), (-1, 2, 3), (-1, 5, 4), (1, 4, 5), (1, 7, 6), (-1, 6, 7)],
    [(-1, 2, 0), (1, 0, 2), (1, 1, 3), (-1, 3, 1), (-1, 6, 4), (1, 4, 6), (1, 5, 7), (-1, 7, 5)],
    [(-1, 3, 0), (1, 0, 3), (1, 2, 1), (-1, 1, 2), (-1, 7, 4), (1, 4, 7), (1, 6, 5), (-1, 5, 6)],
];

/// `X` and `Y` as `(sign, source coordinate)` per component.
const X_FIELD: [(i64, usize); 8] = [(-1, 1), (1, 0), (-1, 3), (1, 2), (-1, 5), (1, 4), (-1, 7), (1, 6)];
const Y_FIELD: [(i64, usize); 8] = [(-1, 1), (1, 0), (1, 3), (-1, 2), (-1, 5), (1, 4), (1, 7), (-1, 6)];

fn x(i: usize) -> Expr {
    Expr::gen(&format!("x{i}"))
}

fn r8() -> Result<Arc<FrameAlgebra>, FrameError> {
    let labels: Vec<String> = (0..8).map(|i| format!("dx{i}")).collect();
    let mut b = AlgebraBuilder::with_labels("R8_quaternionic", labels);
    for i in 0..8 {
        b = b.generator(&format!("x{i}"), false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), i)]);
    }
    b.build()
}

fn alpha(alg: &Arc<FrameAlgebra>, row: &[(i64, usize, usize)]) -> Form {
    row.iter()
        .fold(Form::zero(alg, 1), |acc, &(c, a, b)| acc.add(&Form::term(alg, &x(a) * &Expr::int(c), &[b])))
}

/// `(1/8)(-dα₁² + dα₂² + dα₃²)` for the given α rows.
fn cayley_from(alg: &Arc<FrameAlgebra>, rows: &[[(i64, usize, usize); 8]; 3]) -> Form {
    let sq: Vec<Form> = rows
        .iter()
        .map(|r| {
            let da = alpha(alg, r).d();
            da.wedge(&da)
        })
        .collect();
    sq[1].add(&sq[2]).sub(&sq[0]).scale_r(1, 8)
}

fn field(alg: &Arc<FrameAlgebra>, f: &[(i64, usize); 8]) -> VectorField {
    VectorField::new(alg, f.iter().map(|&(c, j)| &x(j) * &Expr::int(c)).collect())
}

fn sum_sq(idx: &[usize]) -> Expr {
    idx.iter().fold(Expr::zero(), |a, &i| &a + &(&x(i) * &x(i)))
}

/// Hyperkähler moment maps of a circle acting on the `R⁴` with coordinates
/// `(a, b, c, d)`: `(a² + b² - c² - d², 2(ac + bd), 2(ad - bc))`.
fn moments(a: usize, b: usize, c: usize, d: usize) -> [Expr; 3] {
    let two = Expr::int(2);
    [
        &(&(&x(a) * &x(a)) + &(&x(b) * &x(b))) - &(&(&x(c) * &x(c)) + &(&x(d) * &x(d))),
        &(&(&x(a) * &x(c)) + &(&x(b) * &x(d))) * &two,
        &(&(&x(a) * &x(d)) - &(&x(b) * &x(c))) * &two,
    ]
}

/// `a₁∧b₂∧c₃ + a₂∧b₃∧c₁ + a₃∧b₁∧c₂`.
fn brace(a: &[Form; 3], b: &[Form; 3], c: &[Form; 3]) -> Form {
    (0..3).fold(Form::zero(a[0].alg(), 3), |acc, i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        acc.add(&a[i].wedge(&b[j]).wedge(&c[k]))
    })
}

/// `s₁ b₂∧c₃ + s₂ b₃∧c₁ + s₃ b₁∧c₂`.
fn brace_s(s: &[Expr; 3], b: &[Form; 3], c: &[Form; 3]) -> Form {
    (0..3).fold(Form::zero(b[0].alg(), 2), |acc, i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        acc.add(&b[j].wedge(&c[k]).scale(&s[i]))
    })
}

fn dot(s: &[Expr; 3], b: &[Form; 3]) -> Form {
    (0..3).fold(Form::zero(b[0].alg(), 1), |acc, i| acc.add(&b[i].scale(&s[i])))
}

/// `g_φ` in the ambient coframe from `ι_aφ∧ι_bφ∧φ = 6 g_ab vol_φ`, with
/// both sides wedged against `X♭` to compare top forms on R⁸. The density
/// `(vol_φ∧X♭)_top` is passed in closed form to keep the entries compact;
/// the computed density is returned alongside for checking.
fn bryant_metric(g: &G2Structure, xf: &VectorField, density: &Expr) -> (SymTensor, Expr) {
    let alg = g.alg();
    let xb = xf.flat();
    let phi_x = g.phi().wedge(&xb);
    let inv = (density * &Expr::int(6)).recip();
    let contractions: Vec<Form> = (0..8).map(|a| g.phi().interior(&VectorField::basis(alg, a))).collect();
    let metric = SymTensor::from_fn(8, |a, b| {
        let top = contractions[a].wedge(&contractions[b]).wedge(&phi_x).top_coeff();
        &top * &inv
    });
    (metric, g.vol().wedge(&xb).top_coeff())
}

struct Model {
    alg: Arc<FrameAlgebra>,
    spin7: Spin7Structure,
    xf: VectorField,
    yf: VectorField,
    mu: [Expr; 3],
    nu: [Expr; 3],
    du: [Form; 3],
    dv: [Form; 3],
    u: Expr,
    v: Expr,
}

fn model() -> Result<Model, CatalogError> {
    let alg = r8()?;
    let spin7 = Spin7Structure::new(&alg, cayley_from(&alg, &ALPHA))?;
    let mu = moments(0, 1, 4, 5);
    let nu = moments(2, 3, 6, 7);
    let du = mu.clone().map(|m| Form::scalar(&alg, m).d());
    let dv = nu.clone().map(|m| Form::scalar(&alg, m).d());
    Ok(Model {
        xf: field(&alg, &X_FIELD),
        yf: field(&alg, &Y_FIELD),
        alg,
        spin7,
        mu,
        nu,
        du,
        dv,
        u: sum_sq(&[0, 1, 4, 5]),
        v: sum_sq(&[2, 3, 6, 7]),
    })
}

pub(super) fn flat_r8_quotient() -> Result<CatalogEntry, CatalogError> {
    let m = model()?;
    let alg = m.alg.clone();
    let ctx = Ctx::default_for(&alg)?;
    let q = QuotientData::reduce(&m.spin7, &m.xf, &ctx)?;

    let mut e = CatalogEntry::new(
        "flat_r8_quotient",
        "closed G2-structure on R⁺×CP³ as the circle quotient of flat R⁸ = H²",
        &alg,
    );
    e.form("Phi0", m.spin7.phi().clone()).form("phi", q.base().phi().clone());
    for (i, r) in ALPHA.iter().enumerate() {
        e.form(&format!("alpha{}", i + 1), alpha(&alg, r));
    }
    e.fields.insert("X".into(), m.xf.clone());
    e.fields.insert("Y".into(), m.yf.clone());
    for i in 0..3 {
        e.quantities.insert(format!("u{}", i + 1), m.mu[i].clone());
        e.quantities.insert(format!("v{}", i + 1), m.nu[i].clone());
    }
    e.quantities.insert("u".into(), m.u.clone());
    e.quantities.insert("v".into(), m.v.clone());
    e.spin7 = Some(m.spin7.clone());
    e.holonomy_rank = Some(0);

    let g = q.base().clone();
    e.checks(Suite::FlatR8, move |_: &Ctx| Ok(flat_r8_identities(&m, &g)));
    for (check, expected, prov) in [
        ("fr8.lie_x", "ℒ_XΦ₀ = 0", Provenance::Stated),
        ("fr8.lie_y", "ℒ_YΦ₀ = 0", Provenance::Stated),
        ("fr8.commute", "[X, Y] = 0", Provenance::Stated),
        ("fr8.u_norm", "u₁² + u₂² + u₃² = u²", Provenance::Stated),
        ("fr8.v_norm", "v₁² + v₂² + v₃² = v²", Provenance::Stated),
        ("fr8.closed", "dφ = 0", Provenance::Stated),
        ("fr8.density", "(vol_φ∧X♭)_top = -R^{10/3}", Provenance::Computed),
        ("fr8.xi", "ξ = H²R^{2/3}(Y♭ - R⁻²(u - v)X♭)", Provenance::Computed),
        ("fr8.H", "H = R^{2/3}/(2u^{1/2}v^{1/2})", Provenance::Stated),
        ("fr8.phi", "displayed φ in u, v, ξ", Provenance::Stated),
        ("fr8.omega_minus", "displayed H^{1/2}Ω⁻", Provenance::Stated),
        ("fr8.dxi", "dξ = -{v,dv,dv}/(4|v|³) + {u,du,du}/(4|u|³)", Provenance::Stated),
        ("fr8.g_omega", "g_φ = H⁻²ξ² + H g_ω", Provenance::Stated),
        ("fr8.J", "J(u^{1/2}∂u_i) = v^{1/2}∂v_i with ι_Yφ = g_ω(·, J·)", Provenance::Computed),
        ("fr8.tau_v", "displayed τ_v, both forms", Provenance::Stated),
        ("fr8.tau_h", "displayed τ_h", Provenance::Stated),
        (
            "fr8.tau_h_corrected",
            "τ₂ - ξ∧τ_v with coefficient 1 on u{v,dv,dv} and v{u,du,du}",
            Provenance::Computed,
        ),
    ] {
        e.claim(Suite::FlatR8, check, expected, prov);
    }
    e.quotients.push(("x".into(), q));
    Ok(e)
}

fn flat_r8_identities(m: &Model, g: &G2Structure) -> Vec<Identity> {
    let alg = &m.alg;
    let big = m.spin7.phi();
    let (u, v) = (&m.u, &m.v);
    let (du, dv) = (&m.du, &m.dv);
    let (mu, nu) = (&m.mu, &m.nu);
    let r2 = u + v;
    let r23 = r2.pow(ex(1, 3));
    let r83 = r2.pow(ex(4, 3));
    let (su, sv) = (u.pow(ex(1, 2)), v.pow(ex(1, 2)));
    let h = &r23 * &(&(&su * &sv) * &Expr::int(2)).recip();
    let h2 = h.powi(2);
    let phi = g.phi();
    let omega = phi.interior(&m.yf);

    // vol_φ = s^{-4/3}ι_X vol with s = R⁻¹, and ι_X vol∧X♭ = -|X|² vol.
    let density = r2.pow(ex(5, 3)).neg();
    let (gphi, density_obs) = bryant_metric(g, &m.xf, &density);
    let xi_bryant = Form::one_form(
        alg,
        &(0..8)
            .map(|b| (0..8).fold(Expr::zero(), |acc, a| &acc + &(&m.yf.comps()[a] * gphi.get(a, b))))
            .map(|c| &c * &h2)
            .collect::<Vec<_>>(),
    );
    // Closed form of the same 1-form, used below to keep products small.
    let xi = m
        .yf
        .flat()
        .sub(&m.xf.flat().scale(&(&(u - v) * &r2.recip())))
        .scale(&(&h2 * &r23));

    let du123 = du[0].wedge(&du[1]).wedge(&du[2]);
    let dv123 = dv[0].wedge(&dv[1]).wedge(&dv[2]);
    let omega_disp = (0..3).fold(Form::zero(alg, 2), |a, i| a.add(&dv[i].wedge(&du[i]))).scale_r(1, 2);
    let phi_disp = xi.wedge(&omega_disp).add(
        &du123
            .sub(&brace(dv, du, du))
            .scale(&u.recip())
            .add(&dv123.sub(&brace(dv, dv, du)).scale(&v.recip()))
            .scale_r(1, 8),
    );
    let om_minus = brace(dv, dv, du)
        .sub(&brace(du, du, dv))
        .add(&dv123.scale(&(u * &v.recip())))
        .sub(&du123.scale(&(v * &u.recip())))
        .scale(&(&r23 * &Expr::int(4)).recip());
    let norm3 = |s: &[Expr; 3]| s.iter().fold(Expr::zero(), |a, c| &a + &(c * c)).pow(ex(3, 2));
    let dxi_disp = brace_s(mu, du, du)
        .scale(&(&norm3(mu) * &Expr::int(4)).recip())
        .sub(&brace_s(nu, dv, dv).scale(&(&norm3(nu) * &Expr::int(4)).recip()));

    let g_omega = (0..3).fold(SymTensor::zero(8), |t, i| {
        t.add(&SymTensor::sym_product(&du[i], &du[i]).scale(&(&sv * &su.recip())))
            .add(&SymTensor::sym_product(&dv[i], &dv[i]).scale(&(&su * &sv.recip())))
    });
    let g_omega = g_omega.scale(&Expr::rat(1, 2));
    let g_split = SymTensor::sym_product(&xi, &xi).scale(&h2.recip()).add(&g_omega.scale(&h));

    // ω(a, b) = g_ω(a, Jb) with J∂u_i = (v/u)^{1/2}∂v_i, J∂v_i = -(u/v)^{1/2}∂u_i:
    // ω(∂v_i, ∂u_i) = g_ω(∂v_i, (v/u)^{1/2}∂v_i) = ½.
    let g_vv = &(&su * &sv.recip()) * &Expr::rat(1, 2);
    let g_uu = &(&sv * &su.recip()) * &Expr::rat(1, 2);
    let j_uv = &sv * &su.recip();
    let omega_j = (0..3).fold(Form::zero(alg, 2), |a, i| a.add(&dv[i].wedge(&du[i]).scale(&(&g_vv * &j_uv))));
    // g_ω(J∂u_i, J∂u_i) = (v/u) g_vv must equal g_uu.
    let hermitian = Claim::Scalars(alg.clone(), &(&j_uv * &j_uv) * &g_vv, g_uu.clone());

    let t = g.torsion();
    let tau_v_sum = (0..3).fold(Form::zero(alg, 1), |a, i| {
        let cv = &(&(v * &mu[i]) - &(&(u * &nu[i]) * &Expr::int(3))) * &v.recip();
        let cu = &(&(u * &nu[i]) - &(&(v * &mu[i]) * &Expr::int(3))) * &u.recip();
        a.add(&dv[i].scale(&cv)).sub(&du[i].scale(&cu))
    });
    let dv_s = Form::scalar(alg, v.clone()).d();
    let du_s = Form::scalar(alg, u.clone()).d();
    let tau_v_vec = dot(mu, dv).sub(&dot(nu, du)).sub(&dv_s.scale(u).sub(&du_s.scale(v)).scale_i(3));
    let tau_v = tau_v_vec.scale(&(&r83 * &Expr::rat(3, 2)).recip());
    let half = Expr::rat(1, 2);
    let tau_h_scaled = {
        let a = brace_s(mu, dv, dv)
            .add(&brace_s(nu, dv, dv))
            .scale(&half)
            .add(&brace_s(nu, dv, dv).scale(&(&(u * &v.recip()) * &Expr::rat(3, 2))))
            .scale(u);
        let b = brace_s(nu, du, du)
            .add(&brace_s(mu, du, du))
            .scale(&half)
            .add(&brace_s(mu, du, du).scale(&(&(v * &u.recip()) * &Expr::rat(3, 2))))
            .scale(v);
        let c = brace_s(nu, dv, du).scale(u).add(&brace_s(mu, dv, du).scale(v)).scale(&half);
        let d = brace_s(mu, du, dv).scale(v).add(&brace_s(nu, du, dv).scale(u)).scale(&half);
        a.add(&b).add(&c).add(&d).neg()
    };
    let denom = (&(&(u * v) * &r83) * &Expr::int(3)).recip();
    let tau_h = tau_h_scaled.scale(&denom);
    // The same with the ½ on u{v,dv,dv} and v{u,du,du} replaced by 1, as
    // fitted against τ₂ - ξ∧τ_v.
    let tau_h_corrected = tau_h_scaled
        .sub(&brace_s(nu, dv, dv).scale(&(u * &half)))
        .sub(&brace_s(mu, du, du).scale(&(v * &half)))
        .scale(&denom);
    // τ_v = ι_Yτ₂ since ξ(Y) = 1 and τ_h is basic. With that checked, the
    // τ_h displays are compared through τ₂ = ξ∧τ_v + τ_h.
    let tv_obs = t.tau2.interior(&m.yf);
    let xi_tv = xi.wedge(&tau_v);

    let zero = |k| Form::zero(alg, k);
    let norm_u = mu.iter().fold(Expr::zero(), |a, c| &a + &(c * c));
    let norm_v = nu.iter().fold(Expr::zero(), |a, c| &a + &(c * c));
    let bracket = m.xf.bracket(&m.yf);
    vec![
        Identity::new("fr8.lie_x", "ℒ_XΦ₀ = 0", Claim::Forms(big.lie(&m.xf), zero(4))),
        Identity::new("fr8.lie_y", "ℒ_YΦ₀ = 0", Claim::Forms(big.lie(&m.yf), zero(4))),
        Identity::new(
            "fr8.commute",
            "[X, Y] = 0",
            Claim::All(bracket.comps().iter().map(|c| Claim::Scalars(alg.clone(), c.clone(), Expr::zero())).collect()),
        ),
        Identity::new(
            "fr8.u_norm",
            "u₁² + u₂² + u₃² = (x0² + x1² + x4² + x5²)²",
            Claim::Scalars(alg.clone(), norm_u, u.powi(2)),
        ),
        Identity::new(
            "fr8.v_norm",
            "v₁² + v₂² + v₃² = (x2² + x3² + x6² + x7²)²",
            Claim::Scalars(alg.clone(), norm_v, v.powi(2)),
        ),
        Identity::new(
            "fr8.closed",
            "dφ = 0, so τ₀ = τ₁ = τ₃ = 0",
            Claim::All(vec![
                Claim::Forms(phi.d(), zero(4)),
                Claim::Scalars(alg.clone(), t.tau0.clone(), Expr::zero()),
                Claim::Forms(t.tau1.clone(), zero(1)),
                Claim::Forms(t.tau3.clone(), zero(3)),
            ]),
        ),
        Identity::new(
            "fr8.density",
            "(vol_φ∧X♭)_top = -R^{10/3}",
            Claim::Scalars(alg.clone(), density_obs, density),
        ),
        Identity::new(
            "fr8.xi",
            "H²g_φ(Y, ·) = H²R^{2/3}(Y♭ - R⁻²(u - v)X♭)",
            Claim::Forms(xi_bryant, xi.clone()),
        ),
        Identity::new(
            "fr8.H",
            "⅙(ι_Yφ)²∧φ = H⁻² vol_φ with H = R^{2/3}/(2u^{1/2}v^{1/2})",
            Claim::Forms(omega.wedge(&omega).wedge(phi).scale_r(1, 6), g.vol().scale(&h2.recip())),
        ),
        Identity::new(
            "fr8.phi",
            "φ = ξ∧½Σdv_i∧du_i + ⅛(u⁻¹(du₁₂₃ - {dv,du,du}) + v⁻¹(dv₁₂₃ - {dv,dv,du}))",
            Claim::Forms(phi.clone(), phi_disp),
        ),
        Identity::new(
            "fr8.omega_minus",
            "-ι_Y∗φ = H^{1/2}Ω⁻ = (4R^{2/3})⁻¹({dv,dv,du} - {du,du,dv} + (u/v)dv₁₂₃ - (v/u)du₁₂₃)",
            Claim::Forms(g.psi().interior(&m.yf).neg(), om_minus),
        ),
        Identity::new(
            "fr8.dxi",
            "dξ = -{v,dv,dv}/(4(v₁²+v₂²+v₃²)^{3/2}) + {u,du,du}/(4(u₁²+u₂²+u₃²)^{3/2})",
            Claim::Forms(xi.d(), dxi_disp),
        ),
        Identity::new(
            "fr8.g_omega",
            "g_φ = H⁻²ξ² + H·½((v/u)^{1/2}Σdu_i² + (u/v)^{1/2}Σdv_i²)",
            Claim::Tensors(alg.clone(), gphi, g_split),
        ),
        Identity::new(
            "fr8.J",
            "ι_Yφ = g_ω(·, J·) and g_ω(J·, J·) = g_ω for J(u^{1/2}∂u_i) = v^{1/2}∂v_i",
            Claim::All(vec![Claim::Forms(omega.clone(), omega_j), hermitian]),
        ),
        Identity::new(
            "fr8.tau_v",
            "(3/2)R^{8/3}ι_Yτ₂ = Σ(v⁻¹(vu_i - 3uv_i)dv_i - u⁻¹(uv_i - 3vu_i)du_i) = u·dv - v·du - 3(u dv - v du)",
            Claim::All(vec![Claim::Forms(tv_obs, tau_v.clone()), Claim::Forms(tau_v_sum, tau_v_vec)]),
        ),
        Identity::new(
            "fr8.tau_h",
            "τ₂ = ξ∧τ_v + τ_h with 3uvR^{8/3}τ_h as displayed",
            Claim::Forms(t.tau2.clone(), xi_tv.add(&tau_h)),
        ),
        Identity::new(
            "fr8.tau_h_corrected",
            "τ₂ = ξ∧τ_v + τ_h with 3uvR^{8/3}τ_h having -u(½{u,dv,dv} + {v,dv,dv} + (3u/2v){v,dv,dv}) and -v(½{v,du,du} + {u,du,du} + (3v/2u){u,du,du})",
            Claim::Forms(t.tau2.clone(), xi_tv.add(&tau_h_corrected)),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_alpha1_does_not_give_a_cayley_form() {
        // The printed first row has -x5dx4 + x5dx4, which drops the x4dx5 term.
        let alg = r8().unwrap();
        let mut rows = ALPHA;
        rows[0][5] = (1, 5, 4);
        assert!(Spin7Structure::new(&alg, cayley_from(&alg, &rows)).is_err());
        assert!(Spin7Structure::new(&alg, cayley_from(&alg, &ALPHA)).is_ok());
    }

    #[test]
    fn x_and_y_have_the_same_length() {
        // |X|² = |Y|² = R² and ⟨X, Y⟩ = u - v, from the component tables.
        let m = model().unwrap();
        let len = |f: &VectorField| f.flat().norm_sq();
        let r2 = &m.u + &m.v;
        assert!((&len(&m.xf) - &r2).is_zero());
        assert!((&len(&m.yf) - &r2).is_zero());
        assert!((&m.xf.flat().inner(&m.yf.flat()) - &(&m.u - &m.v)).is_zero());
    }

    #[test]
    fn bryant_metric_of_the_standard_form_is_euclidean() {
        use crate::g2::standard_phi;
        let alg = r8().unwrap();
        let idx: Vec<usize> = (1..8).collect();
        let g = G2Structure::frame(&alg, &idx, standard_phi(&alg, &idx)).unwrap();
        let (gm, density) = bryant_metric(&g, &VectorField::basis(&alg, 0), &Expr::int(-1));
        assert!((&density + &Expr::one()).is_zero());
        for a in 1..8 {
            for b in 1..8 {
                let want = if a == b { Expr::one() } else { Expr::zero() };
                assert!((gm.get(a, b) - &want).is_zero(), "g[{a}][{b}] = {}", gm.get(a, b));
            }
        }
    }
}
