//! Stationary covariance kernels and Gram matrix construction.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Kernel family. Matérn-5/2 is the default; the squared exponential is
/// available by configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
}

/// A stationary kernel with one lengthscale per input dimension and an
/// output scale equal to the prior variance, so `k(x, x) = outputscale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub outputscale: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>, outputscale: f64) -> Result<Self> {
        if lengthscales.is_empty() || lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::Contract(
                "lengthscales must be positive and finite".into(),
            ));
        }
        if !(outputscale > 0.0) || !outputscale.is_finite() {
            return Err(Error::Contract("outputscale must be positive".into()));
        }
        Ok(Kernel {
            family,
            lengthscales,
            outputscale,
        })
    }

    /// Matérn-5/2 with unit lengthscale per dimension and unit variance.
    pub fn default_matern52(dim: usize) -> Self {
        Kernel {
            family: KernelFamily::Matern52,
            lengthscales: vec![1.0; dim],
            outputscale: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Scaled squared distance `sum(((a_i - b_i) / l_i)^2)`.
    #[inline]
    fn scaled_sq_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            let d = (a[i] - b[i]) / self.lengthscales[i];
            s += d * d;
        }
        s
    }

    /// Pointwise kernel value.
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dim());
        debug_assert_eq!(b.len(), self.dim());
        let r2 = self.scaled_sq_dist(a, b);
        match self.family {
            KernelFamily::SquaredExponential => self.outputscale * (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                if r2 == 0.0 {
                    // exact at coincident points
                    return self.outputscale;
                }
                let r = r2.sqrt();
                let s5r = 5.0_f64.sqrt() * r;
                self.outputscale * (1.0 + s5r + 5.0 * r2 / 3.0) * (-s5r).exp()
            }
        }
    }

    fn check_points(&self, pts: &[Vec<f64>]) -> Result<()> {
        for p in pts {
            if p.len() != self.dim() {
                return Err(Error::Contract(format!(
                    "point dimension {} does not match kernel dimension {}",
                    p.len(),
                    self.dim()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Contract("coordinates must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Pairwise kernel values between two point lists. When the lists are
/// identical the upper triangle is mirrored, so the output is symmetric to
/// exact bit equality.
pub fn gram(kernel: &Kernel, points_a: &[Vec<f64>], points_b: &[Vec<f64>]) -> Result<Matrix> {
    kernel.check_points(points_a)?;
    kernel.check_points(points_b)?;
    if points_a == points_b {
        let n = points_a.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(&points_a[i], &points_b[j]);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        return Ok(m);
    }
    let mut m = Matrix::zeros(points_a.len(), points_b.len());
    for (i, a) in points_a.iter().enumerate() {
        for (j, b) in points_b.iter().enumerate() {
            m.set(i, j, kernel.eval(a, b));
        }
    }
    Ok(m)
}
