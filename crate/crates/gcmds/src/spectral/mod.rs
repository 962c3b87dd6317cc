//! Weighted eigendecomposition of centered kernels and PSD projections.

pub mod eigen;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{CenteredKernel, Mode};
use crate::numeric::Compensated;

pub use eigen::symmetric_eigen;

/// Relative factor for the default zero threshold `1e-9·max(1, λ_max)`.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenfunctions: DMatrix<f64>,
    mode: Mode,
    weights: DVector<f64>,
    zero_tol: f64,
}

impl Spectrum {
    /// Descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `m` is φ_m, orthonormal in `L²(μ)` (measure mode) or ℓ² (matrix mode).
    pub fn eigenfunctions(&self) -> &DMatrix<f64> {
        &self.eigenfunctions
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues above `zero_tol`.
    pub fn pr(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > self.zero_tol).count()
    }

    /// Number of eigenvalues below `−zero_tol`.
    pub fn nr(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < -self.zero_tol).count()
    }

    pub fn kernel_dim(&self) -> usize {
        self.n() - self.pr() - self.nr()
    }

    /// Inner product used for orthonormality: `Σ w f g` or `Σ f g`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        match self.mode {
            Mode::Measure => (0..f.len()).map(|i| self.weights[i] * f[i] * g[i]).collect::<Compensated>().value(),
            Mode::Matrix => (0..f.len()).map(|i| f[i] * g[i]).collect::<Compensated>().value(),
        }
    }

    /// `Σ_{m ∈ sel} λ_m φ_m(i) φ_m(j)` over the given eigen-indices.
    pub fn reconstruct(&self, indices: impl IntoIterator<Item = usize>) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, n);
        for m in indices {
            let phi = self.eigenfunctions.column(m);
            out += self.eigenvalues[m] * phi * phi.transpose();
        }
        out
    }
}

/// Eigendecomposition of the operator defined by the kernel.
///
/// Measure mode diagonalizes `D^{1/2} K D^{1/2}` and rescales eigenvectors by
/// `D^{-1/2}`. Each eigenfunction is flipped so that its largest-magnitude
/// entry (lowest index on ties) is positive.
pub fn eigendecompose(k: &CenteredKernel, zero_tol: Option<f64>) -> Result<Spectrum> {
    let n = k.n();
    let (a, sqrt_w) = match k.mode() {
        Mode::Matrix => (k.values().clone(), None),
        Mode::Measure => {
            let s = k.weights().map(f64::sqrt);
            let a = DMatrix::from_fn(n, n, |i, j| s[i] * k.values()[(i, j)] * s[j]);
            (a, Some(s))
        }
    };
    let (vals, vecs) = symmetric_eigen(&a)?;
    let mut eigenvalues: Vec<f64> = vals.iter().rev().copied().collect();
    let mut funcs = DMatrix::from_fn(n, n, |i, m| vecs[(i, n - 1 - m)]);
    if let Some(s) = &sqrt_w {
        for i in 0..n {
            let inv = 1.0 / s[i];
            for m in 0..n {
                funcs[(i, m)] *= inv;
            }
        }
    }
    for m in 0..n {
        let mut col = funcs.column_mut(m);
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    let lmax = eigenvalues.first().copied().unwrap_or(0.0);
    let zero_tol = zero_tol.unwrap_or(DEFAULT_ZERO_TOL * lmax.max(1.0));
    // Normalizes signed zeros.
    for l in eigenvalues.iter_mut() {
        if *l == 0.0 {
            *l = 0.0;
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenfunctions: funcs,
        mode: k.mode(),
        weights: k.weights().clone(),
        zero_tol,
    })
}

pub fn trace_norm(s: &Spectrum) -> f64 {
    s.eigenvalues.iter().map(|l| l.abs()).collect::<Compensated>().value()
}

pub fn negative_trace(s: &Spectrum) -> f64 {
    s.eigenvalues
        .iter()
        .filter(|&&l| l < -s.zero_tol)
        .map(|l| -l)
        .collect::<Compensated>()
        .value()
}

/// Positive part of a kernel, optionally truncated to the top `rank_bound` eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdKernel {
    values: DMatrix<f64>,
    rank_bound: Option<usize>,
    mode: Mode,
}

impl PsdKernel {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn rank_bound(&self) -> Option<usize> {
        self.rank_bound
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

pub fn psd_project(k: &CenteredKernel, rank_bound: Option<usize>) -> Result<PsdKernel> {
    psd_project_spectrum(&eigendecompose(k, None)?, rank_bound)
}

/// `Σ_{m ≤ M} λ_m φ_m φ_mᵀ` over positive eigenvalues, `M = min(rank_bound, pr)`.
pub fn psd_project_spectrum(s: &Spectrum, rank_bound: Option<usize>) -> Result<PsdKernel> {
    let pr = s.pr();
    let m = match rank_bound {
        Some(r) if r > pr => return Err(Error::RankTooLarge { rank: r, pr }),
        Some(r) => r,
        None => pr,
    };
    Ok(PsdKernel { values: s.reconstruct(0..m), rank_bound, mode: s.mode() })
}

/// Frobenius norm in matrix mode; `L²(μ⊗μ)` norm in measure mode.
pub fn kernel_norm(a: &DMatrix<f64>, mode: Mode, weights: &DVector<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = Compensated::new();
    for j in 0..n {
        for i in 0..n {
            let v = a[(i, j)];
            let w = match mode {
                Mode::Matrix => 1.0,
                Mode::Measure => weights[i] * weights[j],
            };
            acc.add(w * v * v);
        }
    }
    acc.value().max(0.0).sqrt()
}
