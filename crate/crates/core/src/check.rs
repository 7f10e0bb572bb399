//! Exact and sampled comparison of forms and tensors.

use crate::expr::{EvalError, Expr};
use crate::frame::{Form, FrameAlgebra, FrameError, Point, SymTensor};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// How identities are decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
    Auto,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "numeric" => Ok(Mode::Numeric),
            "auto" => Ok(Mode::Auto),
            other => Err(format!("unknown mode '{other}' (expected exact, numeric or auto)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Numeric => "numeric",
            Mode::Auto => "auto",
        })
    }
}

/// Result of one comparison. `mode` is the method actually used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub mode: Mode,
    pub residual: f64,
    pub pass: bool,
}

impl Outcome {
    pub fn exact(pass: bool, residual: f64) -> Self {
        Outcome {
            mode: Mode::Exact,
            residual,
            pass,
        }
    }

    pub fn numeric(residual: f64, tol: f64) -> Self {
        Outcome {
            mode: Mode::Numeric,
            residual,
            pass: residual.is_finite() && residual <= tol,
        }
    }

    /// Combine outcomes: passes only if all pass; the mode is numeric if any
    /// part was sampled.
    pub fn all(parts: impl IntoIterator<Item = Outcome>) -> Outcome {
        let mut acc = Outcome::exact(true, 0.0);
        for p in parts {
            acc.pass &= p.pass;
            acc.residual = if p.residual.is_nan() { f64::NAN } else { acc.residual.max(p.residual) };
            if p.mode == Mode::Numeric {
                acc.mode = Mode::Numeric;
            }
        }
        acc
    }
}

/// Settings shared by a batch of comparisons on one family of algebras.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub mode: Mode,
    pub tol: f64,
    pub points: Vec<Point>,
}

impl Ctx {
    pub fn new(alg: &Arc<FrameAlgebra>, mode: Mode, tol: f64, count: usize, seed: u64) -> Result<Self, FrameError> {
        Ok(Ctx {
            mode,
            tol,
            points: alg.sample_points(count, seed)?,
        })
    }

    /// Defaults: auto mode, tolerance 1e-9, 20 points, seed 0.
    pub fn default_for(alg: &Arc<FrameAlgebra>) -> Result<Self, FrameError> {
        Self::new(alg, Mode::Auto, 1e-9, 20, 0)
    }

    fn decide(&self, zero: bool, exact_ok: bool, sample: impl Fn() -> Result<f64, EvalError>) -> Outcome {
        if zero && self.mode != Mode::Numeric {
            return Outcome::exact(true, 0.0);
        }
        let sampled = || sample().unwrap_or(f64::INFINITY);
        match self.mode {
            Mode::Exact => Outcome::exact(zero, if zero { 0.0 } else { sampled() }),
            Mode::Auto if exact_ok => Outcome::exact(false, sampled()),
            _ => Outcome::numeric(sampled(), self.tol),
        }
    }

    /// Is `a - b` zero? Sampled residuals are relative to `max(1, |a|, |b|)`.
    pub fn forms_equal(&self, a: &Form, b: &Form) -> Outcome {
        let diff = a.sub(b);
        let exact_ok = !a.needs_numeric() && !b.needs_numeric();
        self.decide(diff.is_zero(), exact_ok, || {
            let scale = 1f64.max(a.max_abs(&self.points)?).max(b.max_abs(&self.points)?);
            Ok(diff.max_abs(&self.points)? / scale)
        })
    }

    pub fn form_zero(&self, f: &Form) -> Outcome {
        self.forms_equal(f, &Form::zero(f.alg(), f.deg()))
    }

    pub fn scalars_equal(&self, alg: &FrameAlgebra, a: &Expr, b: &Expr) -> Outcome {
        let diff = a - b;
        let exact_ok = !alg.has_dependent_generators() && !a.has_opaque() && !b.has_opaque();
        self.decide(diff.is_zero(), exact_ok, || {
            let mut worst: f64 = 0.0;
            for p in &self.points {
                let (va, vb) = (p.eval(a)?, p.eval(b)?);
                let r = (va - vb).abs() / 1f64.max(va.abs()).max(vb.abs());
                if !r.is_finite() {
                    return Ok(f64::INFINITY);
                }
                worst = worst.max(r);
            }
            Ok(worst)
        })
    }

    pub fn tensors_equal(&self, alg: &FrameAlgebra, a: &SymTensor, b: &SymTensor) -> Outcome {
        let diff = a.sub(b);
        let exact_ok = !alg.has_dependent_generators() && !a.needs_numeric() && !b.needs_numeric();
        self.decide(diff.is_zero(), exact_ok, || {
            let scale = 1f64.max(a.max_abs(&self.points)?).max(b.max_abs(&self.points)?);
            Ok(diff.max_abs(&self.points)? / scale)
        })
    }

    /// Compare a sampled quantity against a target at every point.
    pub fn values_close(&self, values: &[f64], target: f64) -> Outcome {
        let worst = values
            .iter()
            .map(|v| (v - target).abs() / 1f64.max(target.abs()))
            .fold(0.0, f64::max);
        Outcome::numeric(worst, self.tol)
    }
}

/// A statement to be decided by a [`Ctx`].
#[derive(Clone, Debug)]
pub enum Claim {
    Forms(Form, Form),
    Scalars(Arc<FrameAlgebra>, Expr, Expr),
    Tensors(Arc<FrameAlgebra>, SymTensor, SymTensor),
    /// A sampled quantity against a target, with its own tolerance.
    Value { observed: f64, expected: f64, tol: f64 },
    /// A discrete fact, such as a rank, decided exactly.
    Fact { holds: bool, residual: f64 },
    /// A claim decided at the given points instead of the context's.
    OnPoints(Vec<Point>, Box<Claim>),
    All(Vec<Claim>),
}

/// A named claim with the formula it encodes.
#[derive(Clone, Debug)]
pub struct Identity {
    pub id: String,
    pub formula: String,
    pub claim: Claim,
}

impl Identity {
    pub fn new(id: impl Into<String>, formula: impl Into<String>, claim: Claim) -> Self {
        Identity {
            id: id.into(),
            formula: formula.into(),
            claim,
        }
    }
}

impl Ctx {
    pub fn judge(&self, c: &Claim) -> Outcome {
        match c {
            Claim::Forms(a, b) => self.forms_equal(a, b),
            Claim::Scalars(alg, a, b) => self.scalars_equal(alg, a, b),
            Claim::Tensors(alg, a, b) => self.tensors_equal(alg, a, b),
            Claim::Value { observed, expected, tol } => {
                Outcome::numeric((observed - expected).abs(), *tol)
            }
            Claim::Fact { holds, residual } => Outcome::exact(*holds, *residual),
            Claim::OnPoints(points, inner) => {
                let ctx = Ctx {
                    mode: self.mode,
                    tol: self.tol,
                    points: points.clone(),
                };
                ctx.judge(inner)
            }
            Claim::All(parts) => Outcome::all(parts.iter().map(|p| self.judge(p))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{AlgebraBuilder, Sampler};

    fn line() -> Arc<FrameAlgebra> {
        AlgebraBuilder::new("line", &["dx"])
            .generator("x", true, Sampler::Uniform(0.5, 2.0), vec![(Expr::one(), 0)])
            .build()
            .unwrap()
    }

    #[test]
    fn auto_mode_uses_exact_zero() {
        let alg = line();
        let ctx = Ctx::default_for(&alg).unwrap();
        let x = Expr::gen("x");
        let o = ctx.scalars_equal(&alg, &(&x * &x), &x.powi(2));
        assert_eq!(o, Outcome::exact(true, 0.0));
        let o = ctx.scalars_equal(&alg, &x, &Expr::one());
        assert_eq!(o.mode, Mode::Exact);
        assert!(!o.pass);
    }

    #[test]
    fn opaque_values_are_sampled() {
        let alg = line();
        let ctx = Ctx::default_for(&alg).unwrap();
        let x = Expr::gen("x");
        let s = (&x + &Expr::one()).sqrt();
        let o = ctx.scalars_equal(&alg, &(&s * &s), &(&x + &Expr::one()));
        assert!(o.pass);
        let f = Form::coframe(&alg, 0).scale(&s);
        let o = ctx.form_zero(&f);
        assert_eq!(o.mode, Mode::Numeric);
        assert!(!o.pass);
    }
}
