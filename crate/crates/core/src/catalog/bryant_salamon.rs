//! The anti-self-dual bundle of S⁴ with the Bryant–Salamon family of G2
//! forms. The conical Spin(7) metric is also reduced along a circle here,
//! which induces an SU(3)-structure on the twistor link.
//!
//! Coframe of the bundle algebra: `e1..e4` (indices 0..3) from a chart of
//! the round S⁴ and the vertical forms `b1..b3` (indices 4..6) with
//! `b^i = da_i + a_j ψ^j_i`.

use super::{lift, terms, with_connection, CatalogEntry, CatalogError, Provenance};
use crate::check::{Claim, Ctx, Identity};
use crate::curvature::LeviCivita;
use crate::expr::{ex, Expr};
use crate::frame::{AlgebraBuilder, CoframeMap, Form, FrameAlgebra, FrameError, Point, Sampler, Terms, VectorField};
use crate::g2::G2Structure;
use crate::quotient::QuotientData;
use crate::verify::Suite;
use std::sync::Arc;

const LABELS: [&str; 7] = ["e1", "e2", "e3", "e4", "b1", "b2", "b3"];

/// The fibre radius² on the link: `(2/5)^5`, so that `t = 1`.
pub(super) const RHO_LINK: (i64, i64) = (32, 3125);

pub(super) struct Bundle {
    pub alg: Arc<FrameAlgebra>,
    pub a: [Expr; 3],
    pub c: [Form; 3],
    pub b: [Form; 3],
    pub rho: Expr,
    pub sigma: Form,
    pub alpha: Form,
    pub tau: Form,
    pub beta: Form,
    p: Expr,
}

fn a_name(i: usize) -> String {
    format!("a{}", i + 1)
}

/// `ψ^i_j` (0-based) with `ψ²₁ = Pe¹`, `ψ¹₃ = Pe²`, `ψ²₃ = Pe³`.
fn psi(alg: &Arc<FrameAlgebra>, p: &Expr, i: usize, j: usize) -> Form {
    let e = |k: usize| Form::coframe(alg, k).scale(p);
    match (i, j) {
        (1, 0) => e(0),
        (0, 1) => e(0).neg(),
        (0, 2) => e(1),
        (2, 0) => e(1).neg(),
        (1, 2) => e(2),
        (2, 1) => e(2).neg(),
        _ => Form::zero(alg, 1),
    }
}

/// Builder with the S⁴ structure equations and the generators `R`, `w`.
/// `R` is the chart radius and `w = (1 - R²)^{1/2}`.
fn base_builder(name: &str) -> AlgebraBuilder {
    let r = Expr::gen("R");
    let w = Expr::gen("w");
    let two_r = times(&r.recip(), 2);
    let w_r = &w * &r.recip();
    let one = Expr::one();
    let mut b = AlgebraBuilder::new(name, &LABELS);
    for (k, (i, j)) in [(1, 2), (2, 0), (0, 1)].into_iter().enumerate() {
        b = b.structure_term(k, two_r.clone(), i, j).structure_term(k, w_r.clone(), k, 3);
    }
    b.generator("R", true, Sampler::Uniform(0.2, 0.8), vec![(w.neg(), 3)])
        .generator("w", true, Sampler::Defined((&one - &r.powi(2)).sqrt()), vec![(r, 3)])
}

fn times(e: &Expr, n: i64) -> Expr {
    e * &Expr::int(n)
}

/// The bundle algebra. `samplers` choose how the fibre coordinates are drawn.
pub(super) fn bundle(name: &str, samplers: [Sampler; 3]) -> Result<Bundle, FrameError> {
    let p = &(&Expr::gen("w") + &Expr::one()) * &Expr::gen("R").recip();
    let a: [Expr; 3] = std::array::from_fn(|i| Expr::gen(&a_name(i)));
    let pre0 = base_builder(name).build()?;
    // da_i = b^i - a_j ψ^j_i
    let da: Vec<Terms> = (0..3)
        .map(|i| {
            let mut f = Form::coframe(&pre0, 4 + i);
            for j in 0..3 {
                f = f.sub(&psi(&pre0, &p, j, i).scale(&a[j]));
            }
            f.into_terms()
        })
        .collect();
    let with_fibre = |b: AlgebraBuilder| {
        samplers.iter().enumerate().fold(b, |b, (i, s)| {
            b.generator_terms(&a_name(i), false, s.clone(), da[i].clone())
        })
    };
    let pre1 = with_fibre(base_builder(name)).build()?;
    // db^i = d(a_j ψ^j_i)
    let mut full = with_fibre(base_builder(name));
    for i in 0..3 {
        let mut f = Form::zero(&pre1, 1);
        for j in 0..3 {
            f = f.add(&psi(&pre1, &p, j, i).scale(&a[j]));
        }
        full = full.structure_terms(4 + i, f.d().into_terms());
    }
    let alg = full.build()?;
    let c = [
        terms(&alg, 2, &[(1, &[0, 1]), (-1, &[2, 3])]),
        terms(&alg, 2, &[(1, &[0, 2]), (1, &[1, 3])]),
        terms(&alg, 2, &[(1, &[0, 3]), (-1, &[1, 2])]),
    ];
    let b: [Form; 3] = std::array::from_fn(|i| Form::coframe(&alg, 4 + i));
    let bb = |i: usize, j: usize| b[i].wedge(&b[j]);
    let rho = a.iter().fold(Expr::zero(), |acc, x| &acc + &(x * x));
    let sigma = bb(1, 2)
        .scale(&a[0])
        .add(&bb(2, 0).scale(&a[1]))
        .add(&bb(0, 1).scale(&a[2]))
        .scale_i(2);
    let bc = |i: usize, j: usize| b[i].wedge(&c[j]);
    let alpha = bc(1, 2)
        .scale(&a[0])
        .add(&bc(2, 0).scale(&a[1]))
        .add(&bc(0, 1).scale(&a[2]))
        .sub(&bc(2, 1).scale(&a[0]))
        .sub(&bc(0, 2).scale(&a[1]))
        .sub(&bc(1, 0).scale(&a[2]));
    let tau = (0..3).fold(Form::zero(&alg, 2), |acc, i| acc.add(&c[i].scale(&a[i])));
    let beta = bb(0, 1).wedge(&b[2]).scale_i(6);
    Ok(Bundle {
        alg,
        a,
        c,
        b,
        rho,
        sigma,
        alpha,
        tau,
        beta,
        p,
    })
}

impl Bundle {
    /// `Σ_j ψ^i_j ∧ c^j` for each `i`.
    fn connection_rhs(&self) -> [Form; 3] {
        std::array::from_fn(|i| {
            (0..3).fold(Form::zero(&self.alg, 3), |acc, j| {
                acc.add(&psi(&self.alg, &self.p, i, j).wedge(&self.c[j]))
            })
        })
    }

    fn sum_b_c(&self) -> Form {
        (0..3).fold(Form::zero(&self.alg, 3), |acc, i| acc.add(&self.b[i].wedge(&self.c[i])))
    }

    /// `R_f = ρ^{1/2}`, the radius in the fibre.
    pub fn radius(&self) -> Expr {
        self.rho.sqrt()
    }

    /// `F b¹²³ + G dτ`.
    fn closed_form(&self, f: &Expr, g: &Expr) -> Form {
        self.beta.scale_r(1, 6).scale(f).add(&self.tau.d().scale(g))
    }

    /// Rescale to the coframe in which `F b¹²³ + G Σ b^i∧c^i` is standard.
    fn orthonormal(&self, name: &str, f: &Expr, g: &Expr) -> Result<Structure, CatalogError> {
        let lb = f.pow(ex(1, 3));
        let le = (g * &lb.recip()).sqrt();
        let mut factors = vec![le; 4];
        factors.extend(std::iter::repeat(lb).take(3));
        let map = CoframeMap::rescale(&self.alg, name, &factors)?;
        let o = map.target().clone();
        let g2 = G2Structure::frame(&o, &[0, 1, 2, 3, 4, 5, 6], standard(&o))?;
        Ok(Structure {
            phi: self.closed_form(f, g),
            map,
            g2,
        })
    }

    /// Drop the radial direction `Σ a_i b^i` (normalised by `ρ`).
    fn tangential(&self, f: &Form) -> Form {
        let comps: Vec<Expr> = (0..7).map(|k| if k >= 4 { self.a[k - 4].clone() } else { Expr::zero() }).collect();
        let n = VectorField::new(&self.alg, comps);
        let nu = Form::one_form(&self.alg, &n.comps().to_vec()).scale(&self.rho.recip());
        f.sub(&nu.wedge(&f.interior(&n)))
    }
}

/// `B¹²³ + Σ B^i ∧ C^i` on a coframe laid out like the bundle algebra.
fn standard(o: &Arc<FrameAlgebra>) -> Form {
    terms(
        o,
        3,
        &[
            (1, &[4, 5, 6]),
            (1, &[4, 0, 1]),
            (-1, &[4, 2, 3]),
            (1, &[5, 0, 2]),
            (1, &[5, 1, 3]),
            (1, &[6, 0, 3]),
            (-1, &[6, 1, 2]),
        ],
    )
}

pub(super) struct Structure {
    /// The form on the bundle algebra.
    pub phi: Form,
    pub map: CoframeMap,
    /// The same form as a G2-structure on its orthonormal coframe.
    pub g2: G2Structure,
}

fn torsion_free(prefix: &str, s: &Structure) -> Vec<Identity> {
    let t = s.g2.torsion();
    let o = s.g2.alg();
    vec![
        Identity::new(
            format!("{prefix}.standard"),
            "F b¹²³ + G dτ is the standard form in the rescaled coframe",
            Claim::Forms(s.map.push(&s.phi), s.g2.phi().clone()),
        ),
        Identity::new(format!("{prefix}.closed"), "dφ = 0", Claim::Forms(t.dphi, Form::zero(o, 4))),
        Identity::new(format!("{prefix}.coclosed"), "d∗φ = 0", Claim::Forms(t.dpsi, Form::zero(o, 5))),
    ]
}

struct Family {
    bundle: Bundle,
    bs: Structure,
    cone: Structure,
    gh: Structure,
}

fn family(name: &str, samplers: [Sampler; 3]) -> Result<Family, CatalogError> {
    let bundle = bundle(name, samplers)?;
    let two_rho_1 = &times(&bundle.rho, 2) + &Expr::one();
    let rf = bundle.radius();
    let bs = bundle.orthonormal(
        &format!("{name}_bs"),
        &two_rho_1.pow(ex(-3, 4)),
        &two_rho_1.pow(ex(1, 4)),
    )?;
    let cone = bundle.orthonormal(&format!("{name}_cone"), &rf.pow(ex(-3, 2)), &times(&rf.sqrt(), 2))?;
    let gh = bundle.orthonormal(&format!("{name}_gh"), &rf.pow(ex(-9, 5)), &times(&rf.pow(ex(1, 5)), 5))?;
    Ok(Family { bundle, bs, cone, gh })
}

/// The connection form of the quotient: with `s` given, torsion-freeness of
/// the lift forces `dη = -½∗(d(s^{4/3})∧∗φ) - s^{4/3}τ₂` for closed `φ`.
fn lift_curvature(g: &G2Structure, s: &Expr) -> Form {
    let s43 = s.pow(ex(4, 3));
    let t = g.torsion();
    let ds = Form::scalar(g.alg(), s43.clone()).d();
    g.hodge(&ds.wedge(g.psi())).scale_r(-1, 2).sub(&t.tau2.scale(&s43))
}

/// Circle-fibre length function of the quotient in the rescaled normalisation.
fn fibre_s(rf: &Expr) -> Expr {
    &Expr::int(2).pow(ex(1, 4)) * &rf.pow(ex(-3, 10))
}

pub(super) fn bs_asd_bundle() -> Result<CatalogEntry, CatalogError> {
    let fam = family(
        "asd",
        [
            Sampler::Uniform(0.15, 1.0),
            Sampler::Uniform(-1.0, 1.0),
            Sampler::Uniform(-1.0, 1.0),
        ],
    )?;
    let rf = fam.bundle.radius();
    let s = fibre_s(&rf);
    let o_gh = fam.gh.g2.alg().clone();
    let deta = lift_curvature(&fam.gh.g2, &s);
    let w = with_connection(&o_gh, "asd_gh_total", "eta", &deta)?;
    let base = G2Structure::frame(&w, &[1, 2, 3, 4, 5, 6, 7], lift(fam.gh.g2.phi(), &w))?;
    let q = QuotientData::assemble(&w, s.clone(), base)?;

    let b = &fam.bundle;
    let mut e = CatalogEntry::new(
        "bs_asd_bundle",
        "Λ²₋S⁴ with the Bryant–Salamon forms and the quotient of the conical Spin(7) metric",
        &b.alg,
    );
    e.form("rho", Form::scalar(&b.alg, b.rho.clone()))
        .form("sigma", b.sigma.clone())
        .form("alpha", b.alpha.clone())
        .form("tau", b.tau.clone())
        .form("beta", b.beta.clone())
        .form("phi_bs", fam.bs.phi.clone())
        .form("phi_bs_cone", fam.cone.phi.clone())
        .form("phi_gh", fam.gh.phi.clone())
        .form("deta", deta.clone());
    e.quantities.insert("rho".into(), b.rho.clone());
    e.quantities.insert("s".into(), s.clone());
    e.g2 = Some(fam.gh.g2.clone());
    e.holonomy_rank = Some(21);

    let gh_torsion = fam.gh.g2.torsion();
    let tau2_norm = fam.gh.g2.norm_sq(&gh_torsion.tau2);
    let mut ids = vec![
        Identity::new(
            "bs.connection",
            "dc^i = ψ^i_j ∧ c^j",
            Claim::All(
                b.connection_rhs()
                    .iter()
                    .zip(&b.c)
                    .map(|(rhs, c)| Claim::Forms(c.d(), rhs.clone()))
                    .collect(),
            ),
        ),
        Identity::new("bs.dtau", "dτ = Σ b^i ∧ c^i", Claim::Forms(b.tau.d(), b.sum_b_c())),
    ];
    ids.extend(torsion_free("bs.smooth", &fam.bs));
    ids.extend(torsion_free("bs.cone", &fam.cone));
    ids.push(torsion_free("gh", &fam.gh).swap_remove(0));
    ids.push(Identity::new(
        "gh.closed",
        "dφ_GH = 0",
        Claim::Forms(gh_torsion.dphi.clone(), Form::zero(&o_gh, 4)),
    ));
    let r1 = &rf + &Expr::one();
    let smoothed = b.closed_form(&r1.pow(ex(-9, 5)), &times(&r1.pow(ex(1, 5)), 5));
    ids.push(Identity::new(
        "gh.smoothed_closed",
        "d((1/6)(R+1)^{-9/5}β + 5(R+1)^{1/5}dτ) = 0",
        Claim::Forms(smoothed.d(), Form::zero(&b.alg, 4)),
    ));
    ids.push(Identity::new(
        "quotient.closed",
        "dΦ = 0 for Φ = η∧φ_GH + s^{4/3}∗φ_GH",
        Claim::Forms(q.spin7().phi().d(), Form::zero(q.spin7().alg(), 5)),
    ));
    e.checks(Suite::BryantSalamon, move |ctx| {
        let mut out = ids.clone();
        let mut least = f64::INFINITY;
        for p in &ctx.points {
            least = least.min(p.eval(&tau2_norm).map_err(FrameError::from)?);
        }
        out.push(Identity::new(
            "gh.not_torsion_free",
            "|τ₂(φ_GH)|² > 0",
            Claim::Fact {
                holds: least > 1e-6,
                residual: least,
            },
        ));
        Ok(out)
    });

    let nk = nk_identities(b);
    let (alg_u, rho_u) = (b.alg.clone(), b.rho.clone());
    e.checks(Suite::BryantSalamon, move |ctx| {
        let pts = unit_points(&alg_u, &rho_u, &ctx.points)?;
        Ok(nk
            .iter()
            .map(|id| Identity::new(id.id.clone(), id.formula.clone(), Claim::OnPoints(pts.clone(), Box::new(id.claim.clone()))))
            .collect())
    });

    let q_tf = q.clone();
    e.checks(Suite::TorsionFreeQuotient, move |_| {
        let t = q_tf.torsion();
        Ok(q_tf.torsion_free_relations(&t))
    });
    e.quotients.push(("gh".into(), q));

    for (check, expected, prov) in [
        ("bs.connection", "dc^i = ψ^i_j∧c^j", Provenance::Stated),
        ("bs.dtau", "dτ = Σ b^i∧c^i", Provenance::Computed),
        ("bs.smooth.standard", "F b¹²³ + G dτ is standard", Provenance::Computed),
        ("bs.cone.standard", "F b¹²³ + G dτ is standard", Provenance::Computed),
        ("bs.smooth.closed", "dφ_BS = 0", Provenance::Stated),
        ("bs.smooth.coclosed", "d∗φ_BS = 0", Provenance::Stated),
        ("bs.cone.closed", "dφ_BS-cone = 0", Provenance::Stated),
        ("bs.cone.coclosed", "d∗φ_BS-cone = 0", Provenance::Stated),
        ("gh.standard", "F b¹²³ + G dτ is standard", Provenance::Computed),
        ("gh.closed", "dφ_GH = 0", Provenance::Stated),
        ("gh.not_torsion_free", "τ₂ ≠ 0", Provenance::Stated),
        ("gh.smoothed_closed", "dφ_GH = 0 after R → R+1", Provenance::Stated),
        ("quotient.closed", "dΦ = 0", Provenance::Computed),
        ("nk.domega", "dω_NK = 3Ω⁺_NK on ρ = 1", Provenance::Stated),
        ("nk.domega_minus", "dΩ⁻_NK = -2ω_NK² on ρ = 1", Provenance::Stated),
        ("nk.fs_closed", "dω_FS = 0 on ρ = 1", Provenance::Computed),
    ] {
        e.claim(Suite::BryantSalamon, check, expected, prov);
    }
    for check in ["tf.dPhi", "tf.deta7", "tf.deta14", "tf.calibrated"] {
        e.claim(Suite::TorsionFreeQuotient, check, "holds", Provenance::Stated);
    }
    Ok(e)
}

/// Points moved radially onto the unit sphere bundle `ρ = 1`.
fn unit_points(alg: &FrameAlgebra, rho: &Expr, pts: &[Point]) -> Result<Vec<Point>, FrameError> {
    let mut out = Vec::with_capacity(pts.len());
    for p in pts {
        let k = p.eval(rho)?.sqrt().recip();
        let mut q = Point::new();
        for (s, v) in p.values() {
            q.set(s.as_str(), if s.as_str().starts_with('a') { v * k } else { *v });
        }
        out.push(q.complete(alg)?);
    }
    Ok(out)
}

/// Structure equations of the nearly-Kähler and Fubini–Study forms,
/// restricted to the unit sphere bundle.
fn nk_identities(b: &Bundle) -> Vec<Identity> {
    let omega_nk = b.tau.scale_r(1, 2).add(&b.sigma.scale_r(1, 8));
    let re_nk = b.tau.d().scale_r(1, 4);
    let im_nk = b.alpha.scale_r(-1, 4);
    let omega_fs = b.tau.scale_r(1, 2).sub(&b.sigma.scale_r(1, 4));
    let t = |f: &Form| b.tangential(f);
    vec![
        Identity::new(
            "nk.domega",
            "dω_NK = 3Ω⁺_NK",
            Claim::Forms(t(&omega_nk.d()), t(&re_nk.scale_i(3))),
        ),
        Identity::new(
            "nk.domega_minus",
            "dΩ⁻_NK = -2ω_NK²",
            Claim::Forms(t(&im_nk.d()), t(&omega_nk.wedge(&omega_nk).scale_i(-2))),
        ),
        Identity::new(
            "nk.fs_closed",
            "dω_FS = 0",
            Claim::Forms(t(&omega_fs.d()), Form::zero(&b.alg, 3)),
        ),
    ]
}

pub(super) fn gh_link() -> Result<CatalogEntry, CatalogError> {
    let (n, d) = RHO_LINK;
    let a1 = Expr::gen("a1");
    let a2 = Expr::gen("a2");
    let a3 = (&(&Expr::rat(n, d) - &(&a1 * &a1)) - &(&a2 * &a2)).sqrt();
    let fam = family(
        "link",
        [
            Sampler::Uniform(-0.05, 0.05),
            Sampler::Uniform(-0.05, 0.05),
            Sampler::Defined(a3),
        ],
    )?;
    let b = &fam.bundle;
    let g = fam.gh.g2.clone();
    let o = g.alg().clone();
    let map = &fam.gh.map;
    let rf = b.radius();
    let t = &rf.pow(ex(2, 5)) * &Expr::rat(5, 2);
    let dt = Form::scalar(&o, t.clone()).d();
    let n_field = VectorField::new(&o, (0..7).map(|k| dt.coeff(&[k])).collect());
    let horiz = |f: &Form| f.sub(&dt.wedge(&f.interior(&n_field)));

    let probe = o.sample_points(4, 0)?;
    let su3 = g.hypersurface_su3(&n_field, &probe, 1e-9)?;
    let omega_l = su3.omega.scale(&t.powi(2).recip());
    let re_l = su3.re_omega.scale(&t.powi(3).recip());
    let im_l = su3.im_omega.scale(&t.powi(3).recip());
    // σ/R_f³ and τ/R_f are dilation invariant; on the t = 1 slice they are
    // the unit-sphere-bundle forms carried over by the radial dilation.
    let sigma = map.push(&b.sigma).scale(&rf.powi(3).recip());
    let tau = map.push(&b.tau).scale(&rf.recip());
    let dtau = map.push(&b.tau.d()).scale(&rf.recip());
    let extra = sigma.scale_r(1, 5).sub(&tau).scale_r(1, 5);
    let tor = g.torsion();
    let scal_cone = g.scal_formula(&tor);
    let scal_link = &Expr::int(30) + &(&t.powi(2) * &scal_cone);
    let norm = g.norm_sq(&extra);

    let mut e = CatalogEntry::new(
        "gh_link",
        "SU(3)-structure on the t = 1 link of the quotient G2 cone over CP³",
        &b.alg,
    );
    e.form("sigma", b.sigma.clone())
        .form("tau", b.tau.clone())
        .form("phi_gh", fam.gh.phi.clone())
        .form("omega", omega_l.clone())
        .form("re_omega", re_l.clone())
        .form("im_omega", im_l.clone());
    e.quantities.insert("t".into(), t.clone());
    e.quantities.insert("scal".into(), scal_link.clone());
    e.quantities.insert("extra_norm".into(), norm.clone());
    e.g2 = Some(g.clone());

    let lc_scal = LeviCivita::new(&o).scalar();
    let lc_link = &Expr::int(30) + &(&t.powi(2) * &lc_scal);
    let le = (&Expr::int(5).sqrt() * &rf.pow(ex(2, 5))).powi(2);
    let lb = &rf.pow(ex(-6, 5)) * &b.rho;
    let ids = vec![
        Identity::new(
            "link.t",
            "t = 1 on the link",
            Claim::Scalars(o.clone(), t.clone(), Expr::one()),
        ),
        Identity::new(
            "link.metric",
            "g_GH = dt² + (8/5)t²(½g_S⁴ + (1/10)ĝ_S²)",
            Claim::All(vec![
                Claim::Scalars(o.clone(), le, &t.powi(2) * &Expr::rat(4, 5)),
                Claim::Scalars(o.clone(), lb, &t.powi(2) * &Expr::rat(4, 25)),
            ]),
        ),
        Identity::new("link.dt_unit", "|dt|² = 1", Claim::Scalars(o.clone(), g.norm_sq(&dt), Expr::one())),
        Identity::new(
            "link.domega",
            "dω_GH = 3Ω⁺_GH",
            Claim::Forms(horiz(&omega_l.d()), horiz(&re_l.scale_i(3))),
        ),
        Identity::new(
            "link.domega_minus",
            "dΩ⁻_GH = -2ω_GH² - (1/5)((1/5)σ - τ)∧ω_GH",
            Claim::Forms(
                horiz(&im_l.d()),
                horiz(&omega_l.wedge(&omega_l).scale_i(-2).sub(&extra.wedge(&omega_l))),
            ),
        ),
        Identity::new(
            "link.domega_minus_w2",
            "dΩ⁻_GH = -2ω_GH² - w₂∧ω_GH with w₂ = (4/5)((1/5)σ - τ)",
            Claim::Forms(
                horiz(&im_l.d()),
                horiz(&omega_l.wedge(&omega_l).scale_i(-2).sub(&extra.scale_i(4).wedge(&omega_l))),
            ),
        ),
        Identity::new(
            "link.scal_half_flat",
            "Scal(g_GH) = 30 - ½|w₂|²",
            Claim::Scalars(
                o.clone(),
                scal_link.clone(),
                &Expr::int(30) - &(&g.norm_sq(&extra.scale_i(4)) * &Expr::rat(1, 2)),
            ),
        ),
        Identity::new(
            "link.omega_plus",
            "Ω⁺_GH = (8/25)dτ",
            Claim::Forms(horiz(&re_l), horiz(&dtau.scale_r(8, 25))),
        ),
        Identity::new(
            "link.extra_norm",
            "|(1/5)((1/5)σ - τ)|² = 3/8",
            Claim::Scalars(o.clone(), norm, Expr::rat(3, 8)),
        ),
        Identity::new(
            "link.scal",
            "Scal(g_GH) = 30 - ½|(1/5)((1/5)σ - τ)|² = 477/16",
            Claim::Scalars(o.clone(), scal_link.clone(), Expr::rat(477, 16)),
        ),
        Identity::new(
            "link.scal_levi_civita",
            "30 + t²Scal(cone) from the Levi-Civita connection agrees with the torsion formula",
            Claim::Scalars(o.clone(), lc_link, scal_link.clone()),
        ),
    ];
    e.checks(Suite::Su3Link, move |_: &Ctx| Ok(ids.clone()));
    for (check, expected, prov) in [
        ("link.t", "1", Provenance::Trivial),
        ("link.metric", "coefficients 8/5·½ and 8/5·1/10", Provenance::Stated),
        ("link.dt_unit", "1", Provenance::Computed),
        ("link.domega", "dω = 3Ω⁺", Provenance::Stated),
        ("link.domega_minus", "dΩ⁻ = -2ω² - (1/5)((1/5)σ - τ)∧ω", Provenance::Stated),
        ("link.domega_minus_w2", "dΩ⁻ = -2ω² - (4/5)((1/5)σ - τ)∧ω", Provenance::Computed),
        ("link.scal_half_flat", "30 - ½|w₂|² = 27", Provenance::Computed),
        ("link.omega_plus", "Ω⁺ = (8/25)dτ", Provenance::Stated),
        ("link.extra_norm", "3/8", Provenance::Stated),
        ("link.scal", "477/16", Provenance::Stated),
        ("link.scal_levi_civita", "Levi-Civita and torsion-formula values agree", Provenance::Computed),
    ] {
        e.claim(Suite::Su3Link, check, expected, prov);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Mode;

    fn ctx(alg: &Arc<FrameAlgebra>) -> Ctx {
        Ctx::new(alg, Mode::Auto, 1e-9, 12, 3).unwrap()
    }

    #[test]
    fn bundle_structure_equations() {
        let fam = family(
            "t",
            [
                Sampler::Uniform(0.15, 1.0),
                Sampler::Uniform(-1.0, 1.0),
                Sampler::Uniform(-1.0, 1.0),
            ],
        )
        .unwrap();
        let b = &fam.bundle;
        let c = ctx(&b.alg);
        b.alg.check_d_squared(&c.points, 1e-9).unwrap();
        let rhs = b.connection_rhs();
        for i in 0..3 {
            assert!(c.forms_equal(&b.c[i].d(), &rhs[i]).pass, "dc{}", i + 1);
        }
        assert!(c.forms_equal(&b.tau.d(), &b.sum_b_c()).pass);
    }

    #[test]
    fn fibre_volume_differential() {
        // d(b¹²³) = -½dρ∧dτ, so F b¹²³ + G dτ is closed exactly when
        // dG = (F/2)dρ as functions of ρ.
        let b = bundle(
            "v",
            [
                Sampler::Uniform(0.15, 1.0),
                Sampler::Uniform(-1.0, 1.0),
                Sampler::Uniform(-1.0, 1.0),
            ],
        )
        .unwrap();
        let c = ctx(&b.alg);
        let b123 = b.beta.scale_r(1, 6);
        let drho = Form::scalar(&b.alg, b.rho.clone()).d();
        let out = c.forms_equal(&b123.d(), &drho.wedge(&b.tau.d()).scale_r(-1, 2));
        assert!(out.pass, "residual {}", out.residual);
    }

    #[test]
    fn smoothed_gh_form_is_not_closed() {
        // Replacing R_f by R_f + 1 in φ_GH leaves a nonzero dφ: the b¹²³
        // coefficient would have to satisfy G' = F/2 along ρ.
        let b = bundle(
            "s",
            [
                Sampler::Uniform(0.15, 1.0),
                Sampler::Uniform(-1.0, 1.0),
                Sampler::Uniform(-1.0, 1.0),
            ],
        )
        .unwrap();
        let r1 = &b.radius() + &Expr::one();
        let phi = b.closed_form(&r1.pow(ex(-9, 5)), &times(&r1.pow(ex(1, 5)), 5));
        let c = ctx(&b.alg);
        let out = c.form_zero(&phi.d());
        assert!(!out.pass);
        assert!(out.residual > 1e-3, "residual {}", out.residual);
    }
}
