//! Levi-Civita connection and curvature of an orthonormal coframe.

use crate::expr::{q, EvalError, Expr};
use crate::frame::{Form, FrameAlgebra, Point, SymTensor};
use crate::linalg::rank_stability;
use nalgebra::DMatrix;
use std::sync::Arc;

/// Relative singular value thresholds used for the holonomy span rank.
pub const RANK_THRESHOLDS: [f64; 5] = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10];

/// Connection forms `ω_ab` with `de^a = -ω_ab ∧ e^b` and curvature
/// `F_ab = dω_ab + ω_ac ∧ ω_cb`.
#[derive(Clone, Debug)]
pub struct LeviCivita {
    alg: Arc<FrameAlgebra>,
    omega: Vec<Vec<Form>>,
    curv: Vec<Vec<Form>>,
}

/// Holonomy algebra span estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyRank {
    pub rank: usize,
    pub stable: bool,
}

impl LeviCivita {
    pub fn new(alg: &Arc<FrameAlgebra>) -> Self {
        let n = alg.dim();
        // c[a][b][c] with de^a = Σ_{b<c} c[a][b][c] e^{bc}, antisymmetric in (b, c)
        let mut c = vec![vec![vec![Expr::zero(); n]; n]; n];
        for (a, ca) in c.iter_mut().enumerate() {
            for (m, v) in alg.structure_terms(a) {
                let b = m.trailing_zeros() as usize;
                let d = (m & (m - 1)).trailing_zeros() as usize;
                ca[b][d] = v.clone();
                ca[d][b] = v.neg();
            }
        }
        let half = q(1, 2);
        let mut omega = vec![vec![Form::zero(alg, 1); n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let comps: Vec<Expr> = (0..n)
                    .map(|k| (&(&c[a][b][k] + &c[b][k][a]) - &c[k][a][b]).scale(&half))
                    .collect();
                let w = Form::one_form(alg, &comps);
                omega[b][a] = w.neg();
                omega[a][b] = w;
            }
        }
        let mut curv = vec![vec![Form::zero(alg, 2); n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let mut f = omega[a][b].d();
                for k in 0..n {
                    if !omega[a][k].is_zero() && !omega[k][b].is_zero() {
                        f = f.add(&omega[a][k].wedge(&omega[k][b]));
                    }
                }
                curv[b][a] = f.neg();
                curv[a][b] = f;
            }
        }
        LeviCivita {
            alg: alg.clone(),
            omega,
            curv,
        }
    }

    pub fn alg(&self) -> &Arc<FrameAlgebra> {
        &self.alg
    }

    pub fn connection(&self, a: usize, b: usize) -> &Form {
        &self.omega[a][b]
    }

    pub fn curvature(&self, a: usize, b: usize) -> &Form {
        &self.curv[a][b]
    }

    /// `de^a + ω_ab ∧ e^b`, which vanishes for the Levi-Civita connection.
    pub fn structure_residual(&self, a: usize) -> Form {
        let mut r = Form::coframe(&self.alg, a).d();
        for b in 0..self.alg.dim() {
            r = r.add(&self.omega[a][b].wedge(&Form::coframe(&self.alg, b)));
        }
        r
    }

    /// First Bianchi identity `F_ab ∧ e^b = 0`.
    pub fn bianchi_residual(&self, a: usize) -> Form {
        let mut r = Form::zero(&self.alg, 3);
        for b in 0..self.alg.dim() {
            r = r.add(&self.curv[a][b].wedge(&Form::coframe(&self.alg, b)));
        }
        r
    }

    /// `Ric_bd = Σ_a F_ab(e_a, e_d)`.
    pub fn ricci(&self) -> SymTensor {
        let n = self.alg.dim();
        SymTensor::from_fn(n, |b, d| {
            (0..n).fold(Expr::zero(), |acc, a| {
                if a == d {
                    acc
                } else {
                    &acc + &self.curv[a][b].coeff(&[a, d])
                }
            })
        })
    }

    pub fn scalar(&self) -> Expr {
        self.ricci().trace()
    }

    /// `|F|² = Σ_{a<b} |F_ab|²`.
    pub fn norm_sq(&self) -> Expr {
        let n = self.alg.dim();
        let mut acc = Expr::zero();
        for a in 0..n {
            for b in a + 1..n {
                acc = &acc + &self.curv[a][b].norm_sq();
            }
        }
        acc
    }

    /// Curvature values `F(e_c, e_d)` at a point, one row of `so(n)` per pair.
    pub fn curvature_rows(&self, p: &Point) -> Result<Vec<Vec<f64>>, EvalError> {
        let n = self.alg.dim();
        let evaluated: Vec<Vec<std::collections::BTreeMap<u32, f64>>> = (0..n)
            .map(|a| (0..n).map(|b| self.curv[a][b].eval(p)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        for c in 0..n {
            for d in c + 1..n {
                let mask = (1u32 << c) | (1u32 << d);
                let mut row = Vec::with_capacity(n * (n - 1) / 2);
                for a in 0..n {
                    for b in a + 1..n {
                        row.push(evaluated[a][b].get(&mask).copied().unwrap_or(0.0));
                    }
                }
                rows.push(row);
            }
        }
        Ok(rows)
    }

    /// Dimension of the span of all curvature endomorphisms over the sample
    /// points, with a flag for agreement across [`RANK_THRESHOLDS`]. Pooling
    /// points only makes sense when the coframe is parallel along the way.
    pub fn holonomy_rank(&self, points: &[Point]) -> Result<HolonomyRank, EvalError> {
        let mut rows = Vec::new();
        for p in points {
            rows.extend(self.curvature_rows(p)?);
        }
        Ok(span_rank(&rows))
    }

    /// Frame derivatives `e_k(F_ab(e_c, e_d))` of the curvature coefficients,
    /// as the 1-forms `d(F_ab(e_c, e_d))` keyed by `(a, b, mask of cd)`.
    pub fn curvature_differentials(&self) -> Vec<(usize, usize, u32, Form)> {
        let n = self.alg.dim();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for (m, c) in self.curv[a][b].terms() {
                    if !c.is_const() {
                        out.push((a, b, *m, Form::scalar(&self.alg, c.clone()).d()));
                    }
                }
            }
        }
        out
    }

    /// Span rank of `{R(e_c, e_d), (∇_{e_k}R)(e_c, e_d)}` at each point: the
    /// first-order infinitesimal holonomy algebra. `diffs` comes from
    /// [`LeviCivita::curvature_differentials`].
    pub fn infinitesimal_holonomy_rank(
        &self,
        p: &Point,
        diffs: &[(usize, usize, u32, Form)],
    ) -> Result<HolonomyRank, EvalError> {
        let n = self.alg.dim();
        let at = |a: usize, b: usize, c: usize, d: usize| a * n * n * n + b * n * n + c * n + d;
        // r[a][b][c][d] = F_ab(e_c, e_d), fully antisymmetric in (a,b) and (c,d)
        let mut r = vec![0.0; n * n * n * n];
        // dr[k] holds e_k of the same coefficients
        let mut dr = vec![vec![0.0; n * n * n * n]; n];
        // w[f][a][k] = ω_fa(e_k)
        let mut w = vec![vec![vec![0.0; n]; n]; n];
        for f in 0..n {
            for a in 0..n {
                for (m, v) in self.omega[f][a].eval(p)? {
                    w[f][a][m.trailing_zeros() as usize] = v;
                }
            }
        }
        let pair = |m: u32| (m.trailing_zeros() as usize, (m & (m - 1)).trailing_zeros() as usize);
        let put = |buf: &mut Vec<f64>, a: usize, b: usize, m: u32, v: f64| {
            let (c, d) = pair(m);
            buf[at(a, b, c, d)] = v;
            buf[at(a, b, d, c)] = -v;
            buf[at(b, a, c, d)] = -v;
            buf[at(b, a, d, c)] = v;
        };
        for a in 0..n {
            for b in a + 1..n {
                for (m, v) in self.curv[a][b].eval(p)? {
                    put(&mut r, a, b, m, v);
                }
            }
        }
        for (a, b, m, form) in diffs {
            for (k, v) in form.eval(p)? {
                put(&mut dr[k.trailing_zeros() as usize], *a, *b, *m, v);
            }
        }
        let mut rows = self.curvature_rows(p)?;
        for (k, drk) in dr.iter().enumerate() {
            for c in 0..n {
                for d in c + 1..n {
                    let mut row = Vec::with_capacity(n * (n - 1) / 2);
                    for a in 0..n {
                        for b in a + 1..n {
                            let mut v = drk[at(a, b, c, d)];
                            for f in 0..n {
                                v -= w[f][a][k] * r[at(f, b, c, d)]
                                    + w[f][b][k] * r[at(a, f, c, d)]
                                    + w[f][c][k] * r[at(a, b, f, d)]
                                    + w[f][d][k] * r[at(a, b, c, f)];
                            }
                            row.push(v);
                        }
                    }
                    rows.push(row);
                }
            }
        }
        Ok(span_rank(&rows))
    }
}

fn span_rank(rows: &[Vec<f64>]) -> HolonomyRank {
    if rows.is_empty() {
        return HolonomyRank { rank: 0, stable: true };
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let (rank, stable) = rank_stability(&m, &RANK_THRESHOLDS);
    HolonomyRank { rank, stable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{AlgebraBuilder, Sampler};

    /// Unit 2-sphere `dt² + sin²t dθ²` with `w = sin t`, `c = cos t`.
    fn round_s2() -> Arc<FrameAlgebra> {
        let w = Expr::gen("w");
        let c = Expr::gen("c");
        AlgebraBuilder::new("s2", &["e1", "e2"])
            .structure_term(1, &c * &w.recip(), 0, 1)
            .generator("w", true, Sampler::Uniform(0.2, 0.9), vec![(c.clone(), 0)])
            .generator("c", false, Sampler::Defined((&Expr::one() - &w.powi(2)).sqrt()), vec![(w.neg(), 0)])
            .build()
            .unwrap()
    }

    #[test]
    fn round_sphere_has_unit_curvature() {
        let alg = round_s2();
        let lc = LeviCivita::new(&alg);
        assert!(lc.structure_residual(0).is_zero() && lc.structure_residual(1).is_zero());
        let pts = alg.sample_points(5, 0).unwrap();
        let f = lc.curvature(0, 1).sub(&Form::basis(&alg, &[0, 1]));
        assert!(f.max_abs(&pts).unwrap() < 1e-12);
        let scal = lc.scalar();
        for p in &pts {
            assert!((p.eval(&scal).unwrap() - 2.0).abs() < 1e-12);
        }
        assert_eq!(lc.holonomy_rank(&pts).unwrap(), HolonomyRank { rank: 1, stable: true });
    }

    #[test]
    fn round_sphere_curvature_is_parallel() {
        // ∇R = 0 on a symmetric space, so the first-order span is the
        // pointwise one.
        let alg = round_s2();
        let lc = LeviCivita::new(&alg);
        let diffs = lc.curvature_differentials();
        for p in &alg.sample_points(4, 3).unwrap() {
            assert_eq!(lc.infinitesimal_holonomy_rank(p, &diffs).unwrap(), HolonomyRank { rank: 1, stable: true });
        }
    }

    #[test]
    fn heisenberg_ricci() {
        // de^3 = e^{12}: Ric = diag(-1/2, -1/2, 1/2)
        let alg = AlgebraBuilder::new("heis", &["e1", "e2", "e3"])
            .structure_term(2, Expr::one(), 0, 1)
            .build()
            .unwrap();
        let lc = LeviCivita::new(&alg);
        for a in 0..3 {
            assert!(lc.structure_residual(a).is_zero());
            assert!(lc.bianchi_residual(a).is_zero());
        }
        let ric = lc.ricci();
        let mut expected = SymTensor::zero(3);
        expected.set(0, 0, Expr::rat(-1, 2));
        expected.set(1, 1, Expr::rat(-1, 2));
        expected.set(2, 2, Expr::rat(1, 2));
        assert_eq!(ric, expected);
        assert_eq!(lc.scalar(), Expr::rat(-1, 2));
    }
}
