//! Independent determination of the coefficients of the torsion-form Ricci
//! formula: least squares of the Levi-Civita Ricci tensor against the basis
//! of admissible terms, over structures with both torsion components
//! non-zero.

mod support;

use nalgebra::{DMatrix, DVector};
use spinq::catalog;
use spinq::curvature::LeviCivita;
use spinq::expr::{ex, Expr};
use spinq::frame::{Form, SymTensor};
use spinq::g2::{standard_phi, G2Structure};
use spinq::quotient::QuotientData;
use spinq::spin7::{standard_cayley, Spin7Structure};

/// The eight terms of the formula, in the order of `STATED`.
fn basis(s: &Spin7Structure) -> Vec<SymTensor> {
    let t = s.torsion();
    let (t1, t5) = (&t.t1, &t.t5);
    let star_t5 = t5.hodge();
    let t1phi = t1.wedge(s.phi());
    let contracted: Vec<Form> = (0..8).map(|a| star_t5.interior_basis(a)).collect();
    let g = SymTensor::identity(8);
    vec![
        g.scale(&t1.codiff().as_scalar_or_zero()),
        g.scale(&t1.norm_sq()),
        g.scale(&t5.norm_sq()),
        s.j_map(&t1phi.codiff()),
        s.j_map(&t5.codiff()),
        s.j_map(&t1.wedge(&star_t5)),
        s.j_map(&t1phi.hodge().wedge(t1)),
        SymTensor::from_fn(8, |a, b| contracted[a].inner(&contracted[b])),
    ]
}

/// Coefficients as printed: δT¹ g, |T¹|² g, |T⁵|² g, j(δ(T¹∧Φ)), j(δT⁵),
/// j(T¹∧∗T⁵), j(∗(T¹∧Φ)∧T¹), g(·⌟∗T⁵, ·⌟∗T⁵).
const STATED: [f64; 8] = [5.0 / 8.0, 3.0 / 8.0, -2.0 / 7.0, -3.0, 4.0, -2.0, -9.0 / 4.0, 0.5];
const MIXED: usize = 5;

fn structures() -> Vec<Spin7Structure> {
    let consts: [&[i64]; 3] = [&[1, 0, -1, 2, 0, 1, 1, -2, 0, 1, 2], &[0, 1, 1, 0, -1, 2, 1, 0, 0, -1, 1, 1], &[2, -1, 0, 1, 1, 0, 0, 1, -1, 2]];
    let mut out = Vec::new();
    for (n, c) in consts.iter().enumerate() {
        let w = support::nilpotent("w8", 8, [1, 2, 3, 4], c);
        let idx: Vec<usize> = (1..8).collect();
        let g = G2Structure::frame(&w, &idx, standard_phi(&w, &idx)).unwrap();
        let q = QuotientData::assemble(&w, Expr::gen("r").pow(ex(n as i64 + 1, 2)), g).unwrap();
        out.push(q.spin7().clone());
        out.push(Spin7Structure::new(&w, standard_cayley(&w, &(0..8).collect::<Vec<_>>())).unwrap());
    }
    let e = catalog::load("generic_circle_bundle").unwrap();
    out.push(e.quotients[0].1.spin7().clone());
    out
}

#[test]
fn fitted_ricci_coefficients() {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for s in structures() {
        let feats = basis(&s);
        let ric = LeviCivita::new(s.alg()).ricci();
        for p in s.alg().sample_points(4, 3).unwrap() {
            let f: Vec<_> = feats.iter().map(|b| b.eval(&p).unwrap()).collect();
            let r = ric.eval(&p).unwrap();
            for a in 0..8 {
                for b in a..8 {
                    rows.push(f.iter().map(|m| m[(a, b)]).collect());
                    rhs.push(r[(a, b)]);
                }
            }
        }
    }
    let m = DMatrix::from_fn(rows.len(), STATED.len(), |i, j| rows[i][j]);
    let y = DVector::from_vec(rhs);
    let svd = m.clone().svd(true, true);
    let smallest = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(smallest > 1.0, "basis is degenerate on the sample (σ_min = {smallest})");
    let x = svd.solve(&y, 1e-12).unwrap();
    assert!((&m * &x - &y).norm() < 1e-9 * y.norm(), "Ricci is not in the span of the basis");
    for (i, (&fit, &stated)) in x.iter().zip(&STATED).enumerate() {
        if i == MIXED {
            assert!((fit - 1.0).abs() < 1e-9, "mixed coefficient {fit}");
            assert!((fit - stated).abs() > 1.0);
        } else {
            assert!((fit - stated).abs() < 1e-9, "coefficient {i}: fitted {fit}, stated {stated}");
        }
    }
}
