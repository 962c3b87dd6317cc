//! The centered cMDS kernel.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Compensated;
use crate::space::{uniform_weights, FiniteMmSpace};
use crate::spectral::eigendecompose;

/// Tolerance on the spread of weighted squared-distance row sums.
pub const HOMOGENEITY_TOL: f64 = 1e-10;

/// Matrix mode centers with uniform weights and leaves the operator
/// unnormalized; measure mode uses the stored weights and acts on `L²(μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Matrix,
    Measure,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Matrix => "matrix",
            Mode::Measure => "measure",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Mode::Matrix),
            "measure" => Ok(Mode::Measure),
            other => Err(Error::InvalidSpec(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenteredKernel {
    values: DMatrix<f64>,
    mode: Mode,
    weights: DVector<f64>,
}

impl CenteredKernel {
    /// Wraps an arbitrary symmetric matrix as a kernel.
    pub fn from_parts(values: DMatrix<f64>, mode: Mode, weights: DVector<f64>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n || weights.len() != n {
            return Err(Error::InvalidSpec(format!(
                "kernel is {}x{} with {} weights",
                values.nrows(),
                values.ncols(),
                weights.len()
            )));
        }
        crate::space::check_weights(weights.as_slice(), n)?;
        Ok(Self { values, mode, weights })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Weights used by the operator: stored ones in measure mode, `1/n` in matrix mode.
    pub fn effective_weights(&self) -> DVector<f64> {
        match self.mode {
            Mode::Measure => self.weights.clone(),
            Mode::Matrix => uniform_weights(self.n()),
        }
    }
}

/// `K_ij = −½(d²_ij − r_i − r_j + g)` with `r_i = Σ_s w_s d²_is` and `g = Σ_r w_r r_r`.
pub fn centered_kernel(x: &FiniteMmSpace, mode: Mode) -> CenteredKernel {
    let n = x.n();
    let w = match mode {
        Mode::Matrix => uniform_weights(n),
        Mode::Measure => x.weights().clone(),
    };
    let d2 = x.squared_distances();
    let rows: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|s| w[s] * d2[(i, s)]).collect::<Compensated>().value())
        .collect();
    let grand = (0..n).map(|r| w[r] * rows[r]).collect::<Compensated>().value();
    let values = DMatrix::from_fn(n, n, |i, j| {
        let mut acc = Compensated::new();
        acc.add(d2[(i, j)]);
        acc.add(-rows[i]);
        acc.add(-rows[j]);
        acc.add(grand);
        -0.5 * acc.value()
    });
    CenteredKernel { values, mode, weights: x.weights().clone() }
}

/// `K_ij = −½(d²_ij − diam₂²)`, valid when every weighted row sum of `d²` agrees.
pub fn two_point_homogeneous_kernel(x: &FiniteMmSpace) -> Result<CenteredKernel> {
    let n = x.n();
    let w = x.weights();
    let d2 = x.squared_distances();
    let rows: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|s| w[s] * d2[(i, s)]).collect::<Compensated>().value())
        .collect();
    let lo = rows.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > HOMOGENEITY_TOL * hi.abs().max(1.0) {
        return Err(Error::NotHomogeneous { spread: hi - lo });
    }
    let diam2_sq = (0..n).map(|r| w[r] * rows[r]).collect::<Compensated>().value();
    let values = d2.map(|v| -0.5 * (v - diam2_sq));
    Ok(CenteredKernel { values, mode: Mode::Measure, weights: w.clone() })
}

/// `(Σ_ij w_i w_j d_ij^p)^{1/p}`.
pub fn diam_p(x: &FiniteMmSpace, p: f64) -> f64 {
    let n = x.n();
    let w = x.weights();
    let mut acc = Compensated::new();
    for i in 0..n {
        for j in 0..n {
            let d = x.dist()[(i, j)];
            if d > 0.0 {
                acc.add(w[i] * w[j] * d.powf(p));
            }
        }
    }
    acc.value().max(0.0).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Euclidicity {
    pub embeddable: bool,
    pub min_eigenvalue: f64,
}

/// Schoenberg test on the matrix-mode kernel.
pub fn is_euclidean(x: &FiniteMmSpace, tol: f64) -> Result<Euclidicity> {
    let s = eigendecompose(&centered_kernel(x, Mode::Matrix), None)?;
    let max = s.eigenvalues()[0];
    let min = *s.eigenvalues().last().expect("nonempty spectrum");
    Ok(Euclidicity { embeddable: min >= -tol * max.max(1.0), min_eigenvalue: min })
}
