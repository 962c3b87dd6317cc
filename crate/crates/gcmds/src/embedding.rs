//! cMDS embeddings, distortion functionals and thickness.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{centered_kernel, Mode};
use crate::numeric::Compensated;
use crate::space::{FiniteMmSpace, PointCloud};
use crate::spectral::{eigendecompose, negative_trace, symmetric_eigen, Spectrum};

/// Slack used by the L∞ bound check.
pub const LINF_SLACK: f64 = 1e-9;

/// Anything with pairwise distances and point masses.
pub trait MetricMeasure {
    fn len(&self) -> usize;
    fn weight(&self, i: usize) -> f64;
    fn distance(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl MetricMeasure for FiniteMmSpace {
    fn len(&self) -> usize {
        self.n()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights()[i]
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist()[(i, j)]
    }
}

impl MetricMeasure for PointCloud {
    fn len(&self) -> usize {
        self.n()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights()[i]
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        PointCloud::distance(self, i, j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: DMatrix<f64>,
    source_mode: Mode,
    weights: DVector<f64>,
}

impl Embedding {
    /// Row `i` is Φ(x_i).
    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn source_mode(&self) -> Mode {
        self.source_mode
    }

    pub fn k(&self) -> usize {
        self.coords.ncols()
    }

    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.squared_distance(i, j).sqrt()
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for c in 0..self.k() {
            let t = self.coords[(i, c)] - self.coords[(j, c)];
            s += t * t;
        }
        s
    }

    /// `Σ_i w_i Φ(x_i)`.
    pub fn centroid(&self) -> DVector<f64> {
        DVector::from_fn(self.k(), |c, _| {
            (0..self.n()).map(|i| self.weights[i] * self.coords[(i, c)]).collect::<Compensated>().value()
        })
    }
}

/// `Φ(x_i) = (√λ_1 φ_1(i), …, √λ_k φ_k(i))`.
pub fn embed(s: &Spectrum, k: usize) -> Result<Embedding> {
    let pr = s.pr();
    if k == 0 || k > pr {
        return Err(Error::DimensionTooLarge { k, pr });
    }
    let phi = s.eigenfunctions();
    let coords = DMatrix::from_fn(s.n(), k, |i, m| s.eigenvalues()[m].sqrt() * phi[(i, m)]);
    Ok(Embedding { coords, source_mode: s.mode(), weights: s.weights().clone() })
}

pub fn embedded_distances(e: &Embedding) -> DMatrix<f64> {
    let n = e.n();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let d = e.distance(i, j);
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// `(Σ_ij w_i w_j |‖Φ(i)−Φ(j)‖² − d_ij²|)^{1/2}`.
pub fn distortion<X: MetricMeasure + ?Sized>(x: &X, e: &Embedding) -> f64 {
    let n = x.len();
    assert_eq!(n, e.n(), "embedding and space sizes differ");
    let mut acc = Compensated::new();
    for i in 0..n {
        let mut row = Compensated::new();
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = x.distance(i, j);
            row.add(x.weight(j) * (e.squared_distance(i, j) - d * d).abs());
        }
        acc.add(x.weight(i) * row.value());
    }
    acc.value().max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinfCheck {
    pub max_excess: f64,
    pub min_excess: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `0 ≤ ‖Φ(i)−Φ(j)‖ − d_ij ≤ √(2·Tr_neg(K))` with the matrix-mode kernel.
pub fn linf_distortion_bound_check(x: &FiniteMmSpace, e: &Embedding) -> Result<LinfCheck> {
    if !x.is_uniform() {
        return Err(Error::ModeMismatch("the L-infinity bound needs uniform weights".into()));
    }
    let s = eigendecompose(&centered_kernel(x, Mode::Matrix), None)?;
    let bound = (2.0 * negative_trace(&s)).sqrt();
    let n = x.n();
    let (mut max_excess, mut min_excess) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let ex = e.distance(i, j) - x.dist()[(i, j)];
            max_excess = max_excess.max(ex);
            min_excess = min_excess.min(ex);
        }
    }
    let holds = min_excess >= -LINF_SLACK && max_excess <= bound + LINF_SLACK;
    Ok(LinfCheck { max_excess, min_excess, bound, holds })
}

/// Weighted covariance `Σ_i w_i (x_i − m)(x_i − m)ᵀ`.
pub fn covariance(p: &PointCloud) -> DMatrix<f64> {
    let (n, k) = (p.n(), p.dim());
    let w = p.weights();
    let mean: Vec<f64> = (0..k)
        .map(|c| (0..n).map(|i| w[i] * p.points()[(i, c)]).collect::<Compensated>().value())
        .collect();
    DMatrix::from_fn(k, k, |a, b| {
        (0..n)
            .map(|i| w[i] * (p.points()[(i, a)] - mean[a]) * (p.points()[(i, b)] - mean[b]))
            .collect::<Compensated>()
            .value()
    })
}

/// Square root of the smallest covariance eigenvalue.
pub fn thickness(p: &PointCloud) -> f64 {
    let (vals, _) = symmetric_eigen(&covariance(p)).expect("covariance of a finite cloud is well conditioned");
    vals[0].max(0.0).sqrt()
}

/// Descending covariance eigenvalues: the nonzero measure-mode kernel
/// spectrum of the induced space.
pub fn cloud_spectrum(p: &PointCloud) -> Result<Vec<f64>> {
    let (vals, _) = symmetric_eigen(&covariance(p))?;
    Ok(vals.iter().rev().copied().collect())
}

/// Measure-mode embedding of a Euclidean cloud through its covariance.
///
/// Coordinates are principal-axis projections of the centered points,
/// signed by the same rule as [`eigendecompose`]. Needs only `O(n·k²)` work.
pub fn cloud_embedding(p: &PointCloud, k: usize) -> Result<Embedding> {
    let (vals, vecs) = symmetric_eigen(&covariance(p))?;
    let dim = p.dim();
    let lmax = vals.iter().fold(0.0f64, |m, &x| m.max(x));
    let zero_tol = crate::spectral::DEFAULT_ZERO_TOL * lmax.max(1.0);
    let pr = vals.iter().filter(|&&l| l > zero_tol).count();
    if k == 0 || k > pr {
        return Err(Error::DimensionTooLarge { k, pr });
    }
    let n = p.n();
    let w = p.weights();
    let mean: Vec<f64> = (0..dim)
        .map(|c| (0..n).map(|i| w[i] * p.points()[(i, c)]).collect::<Compensated>().value())
        .collect();
    let mut coords = DMatrix::zeros(n, k);
    for m in 0..k {
        let axis = vecs.column(dim - 1 - m);
        for i in 0..n {
            coords[(i, m)] = (0..dim).map(|c| (p.points()[(i, c)] - mean[c]) * axis[c]).sum::<f64>();
        }
        let mut col = coords.column_mut(m);
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
    Ok(Embedding { coords, source_mode: Mode::Measure, weights: w.clone() })
}
