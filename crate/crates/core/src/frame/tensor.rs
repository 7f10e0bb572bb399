use super::{Form, FrameAlgebra, Point};
use crate::expr::{EvalError, Expr};
use nalgebra::DMatrix;
use std::sync::Arc;

/// A vector field given by its components in the frame dual to the coframe.
#[derive(Clone, Debug)]
pub struct VectorField {
    alg: Arc<FrameAlgebra>,
    comps: Vec<Expr>,
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.alg, &other.alg) && self.comps == other.comps
    }
}

impl VectorField {
    pub fn new(alg: &Arc<FrameAlgebra>, comps: Vec<Expr>) -> Self {
        assert_eq!(comps.len(), alg.dim(), "component count must equal the dimension");
        VectorField {
            alg: alg.clone(),
            comps,
        }
    }

    /// The i-th dual frame vector.
    pub fn basis(alg: &Arc<FrameAlgebra>, i: usize) -> Self {
        let mut comps = vec![Expr::zero(); alg.dim()];
        comps[i] = Expr::one();
        Self::new(alg, comps)
    }

    pub fn alg(&self) -> &Arc<FrameAlgebra> {
        &self.alg
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn scale(&self, f: &Expr) -> Self {
        VectorField {
            alg: self.alg.clone(),
            comps: self.comps.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        VectorField {
            alg: self.alg.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    /// Directional derivative of a scalar.
    pub fn apply(&self, f: &Expr) -> Expr {
        Form::scalar(&self.alg, f.clone()).d().interior(self).as_scalar_or_zero()
    }

    /// Lie bracket, from `e^a([X,Y]) = X(Y^a) - Y(X^a) - de^a(X,Y)`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let n = self.alg.dim();
        let mut comps = Vec::with_capacity(n);
        for a in 0..n {
            let mut c = &self.apply(&other.comps[a]) - &other.apply(&self.comps[a]);
            let dea = Form::coframe(&self.alg, a).d();
            let val = dea.interior(self).interior(other);
            c = &c - &val.as_scalar_or_zero();
            comps.push(c);
        }
        VectorField::new(&self.alg, comps)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// The metrically dual 1-form for the declared orthonormal coframe.
    pub fn flat(&self) -> Form {
        Form::one_form(&self.alg, &self.comps)
    }
}

impl Form {
    /// The value of a 0-form, treating an empty form of any degree as zero.
    pub fn as_scalar_or_zero(&self) -> Expr {
        if self.is_zero() {
            Expr::zero()
        } else {
            self.as_scalar()
        }
    }
}

/// Symmetric tensor with components in the orthonormal coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    n: usize,
    comps: Vec<Expr>,
}

impl SymTensor {
    pub fn zero(n: usize) -> Self {
        SymTensor {
            n,
            comps: vec![Expr::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zero(n);
        for i in 0..n {
            t.set(i, i, Expr::one());
        }
        t
    }

    /// Build from a closure evaluated on the upper triangle.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Expr) -> Self {
        let mut t = Self::zero(n);
        for i in 0..n {
            for j in i..n {
                t.set(i, j, f(i, j));
            }
        }
        t
    }

    /// `a ⊙ b = (a ⊗ b + b ⊗ a) / 2` for 1-forms.
    pub fn sym_product(a: &Form, b: &Form) -> Self {
        let n = a.alg().dim();
        let ca: Vec<Expr> = (0..n).map(|i| a.coeff_mask(1 << i)).collect();
        let cb: Vec<Expr> = (0..n).map(|i| b.coeff_mask(1 << i)).collect();
        Self::from_fn(n, |i, j| (&(&ca[i] * &cb[j]) + &(&ca[j] * &cb[i])).scale(&crate::expr::q(1, 2)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Expr) {
        self.comps[i * self.n + j] = v.clone();
        self.comps[j * self.n + i] = v;
    }

    pub fn add(&self, other: &SymTensor) -> SymTensor {
        SymTensor {
            n: self.n,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymTensor) -> SymTensor {
        SymTensor {
            n: self.n,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, f: &Expr) -> SymTensor {
        SymTensor {
            n: self.n,
            comps: self.comps.iter().map(|a| a * f).collect(),
        }
    }

    pub fn trace(&self) -> Expr {
        (0..self.n).fold(Expr::zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Expr {
        fn minor_det(m: &[Vec<Expr>]) -> Expr {
            let n = m.len();
            if n == 1 {
                return m[0][0].clone();
            }
            let mut acc = Expr::zero();
            for (j, c) in m[0].iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let sub: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = c * &minor_det(&sub);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
        let rows: Vec<Vec<Expr>> = (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect();
        minor_det(&rows)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn needs_numeric(&self) -> bool {
        self.comps.iter().any(|c| c.has_opaque())
    }

    pub fn eval(&self, p: &Point) -> Result<DMatrix<f64>, EvalError> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = p.eval(self.get(i, j))?;
            }
        }
        Ok(m)
    }

    pub fn max_abs(&self, points: &[Point]) -> Result<f64, EvalError> {
        let mut worst: f64 = 0.0;
        for p in points {
            for c in &self.comps {
                worst = worst.max(p.eval(c)?.abs());
            }
        }
        Ok(worst)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> SymTensor {
        SymTensor {
            n: self.n,
            comps: self.comps.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{AlgebraBuilder, Sampler};

    #[test]
    fn bracket_of_coordinate_rotations() {
        // flat R^2 with coordinates x, y and coframe dx, dy
        let alg = AlgebraBuilder::new("plane", &["dx", "dy"])
            .generator("x", false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), 0)])
            .generator("y", false, Sampler::Uniform(-1.0, 1.0), vec![(Expr::one(), 1)])
            .build()
            .unwrap();
        let x = Expr::gen("x");
        let y = Expr::gen("y");
        let rot = VectorField::new(&alg, vec![y.neg(), x.clone()]);
        let euler = VectorField::new(&alg, vec![x.clone(), y.clone()]);
        assert!(rot.bracket(&euler).is_zero());
        let dx = VectorField::basis(&alg, 0);
        let b = dx.bracket(&rot);
        assert_eq!(b.comps(), &[Expr::zero(), Expr::one()]);
    }

    #[test]
    fn bracket_sees_structure_constants() {
        let alg = AlgebraBuilder::new("heis", &["e1", "e2", "e3"])
            .structure_term(2, Expr::one(), 0, 1)
            .build()
            .unwrap();
        let b = VectorField::basis(&alg, 0).bracket(&VectorField::basis(&alg, 1));
        assert_eq!(b.comps(), &[Expr::zero(), Expr::zero(), Expr::int(-1)]);
    }
}
