//! Randomised invariants shared by the property tests and the acceptance
//! runner. Each property is a strategy plus a check on one generated case.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::sample::subsequence;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use spinq::catalog;
use spinq::check::{Ctx, Mode};
use spinq::expr::{ex, Expr};
use spinq::frame::{AlgebraBuilder, Form, FrameAlgebra, Sampler, SymTensor};
use spinq::g2::{standard_phi, G2Structure};
use spinq::quotient::QuotientData;
use std::sync::Arc;

type Check = Result<(), TestCaseError>;

/// One monomial of a random form: indices, integer coefficient, half-integer
/// power of `r`, integer power of `u`.
pub type TermSpec = (Vec<usize>, i64, i64, u32);

/// Constant monomials: indices and an integer weight.
pub type ConstSpec = Vec<(Vec<usize>, i64)>;

fn terms(n: usize, k: usize) -> impl Strategy<Value = Vec<TermSpec>> {
    prop::collection::vec((subsequence((0..n).collect::<Vec<_>>(), k), -3i64..=3, -2i64..=2, 0u32..=2), 1..4)
}

fn const_terms(n: usize, k: usize, max: usize) -> impl Strategy<Value = ConstSpec> {
    prop::collection::vec((subsequence((0..n).collect::<Vec<_>>(), k), -4i64..=4), 1..max)
}

fn coefficient(alg: &FrameAlgebra, c: i64, a: i64, b: u32) -> Expr {
    let mut e = Expr::int(c);
    if alg.has_generator("r") {
        e = &e * &Expr::gen("r").pow(ex(a, 2));
    }
    if alg.has_generator("u") {
        e = &e * &Expr::gen("u").powi(b);
    }
    e
}

fn form(alg: &Arc<FrameAlgebra>, k: usize, spec: &[TermSpec]) -> Form {
    spec.iter().fold(Form::zero(alg, k), |acc, (idx, c, a, b)| {
        acc.add(&Form::term(alg, coefficient(alg, *c, *a, *b), &idx[..k]))
    })
}

fn constant_form(alg: &Arc<FrameAlgebra>, k: usize, spec: &[(Vec<usize>, i64)]) -> Form {
    spec.iter()
        .fold(Form::zero(alg, k), |acc, (idx, c)| acc.add(&Form::term(alg, Expr::int(*c), idx)))
}

/// A two-step nilpotent frame: the `closed` elements have `de = 0`, every
/// other element has `de` a combination of pairs of closed ones, and the
/// generators `r > 0`, `u` are coordinates along the first two closed
/// elements.
pub fn nilpotent(name: &str, dim: usize, closed: [usize; 4], consts: &[i64]) -> Arc<FrameAlgebra> {
    let labels: Vec<String> = (0..dim).map(|i| format!("e{i}")).collect();
    let mut b = AlgebraBuilder::with_labels(name, labels);
    let pairs: Vec<(usize, usize)> =
        (0..4).flat_map(|i| (i + 1..4).map(move |j| (closed[i], closed[j]))).collect();
    let mut c = consts.iter().cycle();
    for a in (0..dim).filter(|a| !closed.contains(a)) {
        for &(i, j) in &pairs {
            let v = *c.next().expect("non-empty constants");
            if v != 0 {
                b = b.structure_term(a, Expr::int(v), i, j);
            }
        }
    }
    b.generator("r", true, Sampler::Uniform(0.5, 2.0), vec![(Expr::one(), closed[0])])
        .generator("u", false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), closed[1])])
        .build()
        .expect("valid nilpotent frame")
}

fn ctx(alg: &Arc<FrameAlgebra>) -> Ctx {
    Ctx::new(alg, Mode::Auto, 1e-9, 6, 11).expect("sample points")
}

fn consts(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-2i64..=2, n)
}

// d² = 0

pub fn d_squared_nilpotent() -> impl Strategy<Value = (Vec<i64>, usize, Vec<TermSpec>, Vec<TermSpec>)> {
    (consts(9), 0usize..=2, terms(7, 2), terms(7, 3))
}

pub fn check_d_squared_nilpotent((c, k, s2, s3): (Vec<i64>, usize, Vec<TermSpec>, Vec<TermSpec>)) -> Check {
    let alg = nilpotent("n7", 7, [0, 1, 2, 3], &c);
    let f = match k {
        0 => form(&alg, 2, &s2),
        1 => form(&alg, 3, &s3),
        _ => form(&alg, 2, &s2).wedge(&form(&alg, 3, &s3)),
    };
    prop_assert!(ctx(&alg).form_zero(&f.d().d()).pass);
    Ok(())
}

pub fn d_squared_cylinder() -> impl Strategy<Value = (Vec<TermSpec>, usize)> {
    (terms(8, 3), 0usize..8)
}

pub fn check_d_squared_cylinder((spec, i): (Vec<TermSpec>, usize)) -> Check {
    let alg = catalog::load("round_s7_ambient").unwrap().alg.clone();
    let xi = Expr::gen(&format!("x{i}"));
    let f = form(&alg, 3, &spec).map_coeffs(|c| c * &xi);
    prop_assert!(ctx(&alg).form_zero(&f.d().d()).pass);
    Ok(())
}

// Leibniz rule

pub fn leibniz() -> impl Strategy<Value = (Vec<i64>, usize, usize, Vec<TermSpec>, Vec<TermSpec>)> {
    (consts(9), 0usize..=3, 0usize..=3, terms(7, 3), terms(7, 3))
}

pub fn check_leibniz((c, p, q, a, b): (Vec<i64>, usize, usize, Vec<TermSpec>, Vec<TermSpec>)) -> Check {
    let alg = nilpotent("n7", 7, [0, 1, 2, 3], &c);
    let (fa, fb) = (form(&alg, p, &a), form(&alg, q, &b));
    let sign = if p % 2 == 0 { 1 } else { -1 };
    let rhs = fa.d().wedge(&fb).add(&fa.wedge(&fb.d()).scale_i(sign));
    prop_assert!(ctx(&alg).forms_equal(&fa.wedge(&fb).d(), &rhs).pass);
    Ok(())
}

// ∗∗ sign

pub fn hodge_r8() -> impl Strategy<Value = (usize, ConstSpec)> {
    (0usize..=8, const_terms(8, 4, 5))
}

pub fn check_hodge_r8((k, spec): (usize, ConstSpec)) -> Check {
    let alg = catalog::load("flat_R8").unwrap().alg.clone();
    // Pad or trim the 4-subsets to degree k.
    let spec: ConstSpec = spec
        .iter()
        .map(|(idx, c)| {
            let mut v = idx.clone();
            v.extend((0..8).filter(|i| !idx.contains(i)).take(k.saturating_sub(4)));
            v.truncate(k);
            v.sort();
            (v, *c)
        })
        .collect();
    let f = constant_form(&alg, k, &spec);
    let sign = if (k * (8 - k)) % 2 == 0 { 1 } else { -1 };
    prop_assert_eq!(f.hodge().hodge(), f.scale_i(sign));
    prop_assert_eq!(f.wedge(&f.hodge()), Form::volume(&alg).scale(&f.norm_sq()));
    Ok(())
}

pub fn hodge_g2() -> impl Strategy<Value = (bool, ConstSpec)> {
    (any::<bool>(), const_terms(7, 3, 5))
}

pub fn check_hodge_g2((dual, spec): (bool, ConstSpec)) -> Check {
    let e = catalog::load("flat_T7").unwrap();
    let g = e.g2.as_ref().unwrap();
    let f = constant_form(&e.alg, 3, &spec);
    let f = if dual { g.hodge(&f) } else { f };
    prop_assert_eq!(g.hodge(&g.hodge(&f)), f);
    Ok(())
}

// Projections

pub fn g2_projections() -> impl Strategy<Value = (ConstSpec, ConstSpec)> {
    (const_terms(7, 2, 8), const_terms(7, 3, 8))
}

pub fn check_g2_projections((two, three): (ConstSpec, ConstSpec)) -> Check {
    let e = catalog::load("flat_T7").unwrap();
    let g = e.g2.as_ref().unwrap();
    let a = constant_form(&e.alg, 2, &two);
    let (a7, a14) = g.project2(&a);
    prop_assert_eq!(a7.add(&a14), a.clone());
    prop_assert_eq!(g.project2(&a7).0, a7.clone());
    prop_assert!(g.project2(&a14).0.is_zero());
    prop_assert!(g.inner(&a7, &a14).is_zero());
    // Λ²₁₄ is the kernel of wedge with ∗φ.
    prop_assert!(a14.wedge(g.psi()).is_zero());

    let c = constant_form(&e.alg, 3, &three);
    let (c1, c7, c27) = g.project3(&c);
    prop_assert_eq!(c1.add(&c7).add(&c27), c.clone());
    prop_assert_eq!(g.project3(&c7).1, c7.clone());
    let (p1, p7, _) = g.project3(&c27);
    prop_assert!(p1.is_zero() && p7.is_zero());
    prop_assert!(g.inner(&c1, &c7).is_zero() && g.inner(&c1, &c27).is_zero() && g.inner(&c7, &c27).is_zero());
    prop_assert!(c27.wedge(g.phi()).is_zero() && c27.wedge(g.psi()).is_zero());
    Ok(())
}

pub fn spin7_projections() -> impl Strategy<Value = ConstSpec> {
    const_terms(8, 2, 10)
}

pub fn check_spin7_projections(two: ConstSpec) -> Check {
    let e = catalog::load("flat_R8").unwrap();
    let s = e.spin7.as_ref().unwrap();
    let a = constant_form(&e.alg, 2, &two);
    let (a7, a21) = s.project2(&a);
    prop_assert_eq!(a7.add(&a21), a.clone());
    prop_assert_eq!(s.project2(&a7).0, a7.clone());
    prop_assert!(s.project2(&a21).0.is_zero());
    prop_assert!(a7.inner(&a21).is_zero());
    // Eigenforms of α ↦ ∗(α∧Φ): 3 on Λ²₇ and -1 on Λ²₂₁.
    prop_assert_eq!(a7.wedge(s.phi()).hodge(), a7.scale_i(3));
    prop_assert_eq!(a21.wedge(s.phi()).hodge(), a21.neg());
    Ok(())
}

// i / j inverse

pub fn sym_tensor() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, 36)
}

pub fn check_i_j_inverse(entries: Vec<i64>) -> Check {
    let e = catalog::load("flat_R8").unwrap();
    let s = e.spin7.as_ref().unwrap();
    let mut it = entries.into_iter();
    let mut h = SymTensor::zero(8);
    for a in 0..8 {
        for b in a..8 {
            h.set(a, b, Expr::int(it.next().unwrap()));
        }
    }
    prop_assert!(s.j_map(&s.i_map(&h)).sub(&h).is_zero());
    Ok(())
}

// Torsion round trips

pub fn g2_torsion() -> impl Strategy<Value = Vec<i64>> {
    consts(9)
}

pub fn check_g2_torsion(c: Vec<i64>) -> Check {
    let alg = nilpotent("n7", 7, [0, 1, 2, 3], &c);
    let idx: Vec<usize> = (0..7).collect();
    let g = G2Structure::frame(&alg, &idx, standard_phi(&alg, &idx)).unwrap();
    let t = g.torsion();
    let cx = ctx(&alg);
    for id in g.type_identities(&t, "t") {
        prop_assert!(cx.judge(&id.claim).pass, "{}", id.id);
    }
    let dphi = g.psi().scale(&t.tau0).add(&t.tau1.wedge(g.phi()).scale_i(3)).add(&g.hodge(&t.tau3));
    prop_assert!(cx.forms_equal(&t.dphi, &dphi).pass);
    prop_assert!(g.project2(&t.tau2).0.is_zero());
    let (t3_1, t3_7, _) = g.project3(&t.tau3);
    prop_assert!(t3_1.is_zero() && t3_7.is_zero());
    Ok(())
}

pub fn quotient() -> impl Strategy<Value = (Vec<i64>, i64, i64, i64)> {
    (consts(11), -3i64..=3, 1i64..=3, 1i64..=2)
}

/// Assemble `Φ = η∧φ + s^{4/3}∗φ`, reduce it again along the fibre, and
/// check the torsion relations with the L-map in its corrected form.
pub fn check_quotient((c, p, q, scale): (Vec<i64>, i64, i64, i64)) -> Check {
    let w = nilpotent("w8", 8, [1, 2, 3, 4], &c);
    let idx: Vec<usize> = (1..8).collect();
    let g = G2Structure::frame(&w, &idx, standard_phi(&w, &idx)).unwrap();
    let s = &Expr::gen("r").pow(ex(p, q)) * &Expr::int(scale);
    let data = QuotientData::assemble(&w, s, g).unwrap();
    let cx = ctx(&w);
    prop_assert!(cx.judge(&data.round_trip(&cx).unwrap().claim).pass);
    let t = data.torsion();
    for id in data.torsion_relations(&t).into_iter().filter(|id| id.id != "rel.l_map") {
        prop_assert!(cx.judge(&id.claim).pass, "{} failed", id.id);
    }
    Ok(())
}

/// Run every property for `cases` cases with a fixed-seed runner and report
/// `(group, property, outcome)`.
pub fn run_all(cases: u32) -> Vec<(&'static str, &'static str, Result<(), String>)> {
    fn go<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Check) -> Result<(), String> {
        let config = Config { cases, failure_persistence: None, ..Config::default() };
        let rng = proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm);
        TestRunner::new_with_rng(config, rng)
            .run(&s, f)
            .map_err(|e| e.to_string())
    }
    vec![
        ("d² = 0", "nilpotent frames", go(cases, d_squared_nilpotent(), check_d_squared_nilpotent)),
        ("d² = 0", "S⁷ cylinder", go(cases, d_squared_cylinder(), check_d_squared_cylinder)),
        ("Leibniz", "nilpotent frames", go(cases, leibniz(), check_leibniz)),
        ("∗∗ sign", "R⁸", go(cases, hodge_r8(), check_hodge_r8)),
        ("∗∗ sign", "G2 on T⁷", go(cases, hodge_g2(), check_hodge_g2)),
        ("projections", "G2", go(cases, g2_projections(), check_g2_projections)),
        ("projections", "Spin(7)", go(cases, spin7_projections(), check_spin7_projections)),
        ("torsion round trip", "G2 torsion forms", go(cases, g2_torsion(), check_g2_torsion)),
        ("torsion round trip", "quotient assembly", go(cases, quotient(), check_quotient)),
        ("i/j inverse", "Sym² on R⁸", go(cases, sym_tensor(), check_i_j_inverse)),
    ]
}
