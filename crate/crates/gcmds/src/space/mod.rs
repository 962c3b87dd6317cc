//! Finite metric measure spaces, weighted graphs and Euclidean point clouds.

pub mod generate;
pub mod io;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result, Violation};

/// Tolerance on `|Σ w − 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Triangle inequality slack, relative to the diameter.
pub const TRIANGLE_REL_TOL: f64 = 1e-12;

/// A finite metric space with a full-support probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMmSpace {
    dist: DMatrix<f64>,
    weights: DVector<f64>,
    labels: Option<Vec<String>>,
}

impl FiniteMmSpace {
    /// Validates the metric axioms, including the triangle inequality, and the weights.
    pub fn new(dist: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        check_metric(&dist)?;
        Self::from_trusted_metric(dist, weights)
    }

    pub fn uniform(dist: DMatrix<f64>) -> Result<Self> {
        let n = dist.nrows();
        Self::new(dist, uniform_weights(n))
    }

    /// Like [`FiniteMmSpace::new`] but skips the cubic triangle check.
    ///
    /// Everything else (shape, symmetry, zero diagonal, positive
    /// off-diagonal, weights) is still validated. Meant for matrices that
    /// are metric by construction: geodesic, Euclidean or shortest-path.
    pub fn from_trusted_metric(dist: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        check_pointwise(&dist)?;
        check_weights(weights.as_slice(), dist.nrows())?;
        Ok(Self { dist, weights, labels: None })
    }

    pub fn singleton() -> Self {
        Self {
            dist: DMatrix::zeros(1, 1),
            weights: DVector::from_element(1, 1.0),
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::InvalidSpec(format!(
                "{} labels for {} points",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Same metric, new weights.
    pub fn reweighted(&self, weights: DVector<f64>) -> Result<Self> {
        check_weights(weights.as_slice(), self.n())?;
        Ok(Self { dist: self.dist.clone(), weights, labels: self.labels.clone() })
    }

    pub fn n(&self) -> usize {
        self.dist.nrows()
    }

    pub fn dist(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn squared_distances(&self) -> DMatrix<f64> {
        self.dist.map(|d| d * d)
    }

    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.n() as f64;
        self.weights.iter().all(|&w| (w - target).abs() <= 1e-12)
    }
}

pub fn uniform_weights(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / n as f64)
}

/// Symmetry, zero diagonal and strictly positive off-diagonal entries.
pub fn check_pointwise(dist: &DMatrix<f64>) -> Result<()> {
    let n = dist.nrows();
    if n == 0 || dist.ncols() != n {
        return Err(Error::InvalidSpec(format!(
            "distance matrix must be square and nonempty, got {}x{}",
            dist.nrows(),
            dist.ncols()
        )));
    }
    for i in 0..n {
        let dii = dist[(i, i)];
        if dii != 0.0 {
            return Err(violation(vec![i, i], "nonzero diagonal", dii.abs()));
        }
        for j in (i + 1)..n {
            let (a, b) = (dist[(i, j)], dist[(j, i)]);
            if !a.is_finite() || !b.is_finite() {
                return Err(violation(vec![i, j], "non-finite distance", f64::NAN));
            }
            if a != b {
                return Err(violation(vec![i, j], "asymmetric distance", (a - b).abs()));
            }
            if a <= 0.0 {
                return Err(violation(vec![i, j], "nonpositive distance between distinct points", -a));
            }
        }
    }
    Ok(())
}

/// Full metric check: pointwise axioms plus the triangle inequality.
pub fn check_metric(dist: &DMatrix<f64>) -> Result<()> {
    check_pointwise(dist)?;
    let n = dist.nrows();
    let diam = dist.iter().copied().fold(0.0, f64::max);
    let slack = TRIANGLE_REL_TOL * diam;
    for i in 0..n {
        for j in 0..n {
            let dij = dist[(i, j)];
            for k in 0..n {
                let excess = dist[(i, k)] - dij - dist[(j, k)];
                if excess > slack {
                    return Err(violation(vec![i, j, k], "triangle inequality d(i,k) <= d(i,j) + d(j,k) fails", excess));
                }
            }
        }
    }
    Ok(())
}

pub fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::Weight(format!("{} weights for {} points", w.len(), n)));
    }
    if let Some(i) = w.iter().position(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::Weight(format!("weight {} at index {} is not positive", w[i], i)));
    }
    let total = crate::numeric::sum(w.iter().copied());
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Weight(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Rescales positive weights to sum to one.
pub fn normalize_weights(w: &[f64]) -> Result<DVector<f64>> {
    if let Some(i) = w.iter().position(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::Weight(format!("weight {} at index {} is not positive", w[i], i)));
    }
    let total = crate::numeric::sum(w.iter().copied());
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Weight(format!("weights sum to {total}")));
    }
    let mut out = DVector::from_iterator(w.len(), w.iter().map(|&x| x / total));
    // One correction pass keeps the sum within an ulp or two of 1.
    let residual = 1.0 - crate::numeric::sum(out.iter().copied());
    let imax = out.imax();
    out[imax] += residual;
    Ok(out)
}

fn violation(indices: Vec<usize>, reason: &'static str, excess: f64) -> Error {
    Error::MetricViolation(Violation { indices, reason, excess })
}

/// Undirected graph with positive edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidSpec("graph needs at least one vertex".into()));
        }
        for &(i, j, len) in &edges {
            if i >= vertex_count || j >= vertex_count {
                return Err(Error::InvalidSpec(format!(
                    "edge ({i}, {j}) out of range for {vertex_count} vertices"
                )));
            }
            if !len.is_finite() || len <= 0.0 {
                return Err(Error::InvalidSpec(format!("edge ({i}, {j}) has length {len}")));
            }
        }
        Ok(Self { vertex_count, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

/// All-pairs shortest paths by Floyd–Warshall, with uniform weights.
pub fn shortest_path_metric(g: &WeightedGraph) -> Result<FiniteMmSpace> {
    let n = g.vertex_count;
    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for i in 0..n {
        d[(i, i)] = 0.0;
    }
    for &(i, j, len) in &g.edges {
        if i != j && len < d[(i, j)] {
            d[(i, j)] = len;
            d[(j, i)] = len;
        }
    }
    for k in 0..n {
        let row_k: Vec<f64> = d.column(k).iter().copied().collect();
        for j in 0..n {
            let dkj = row_k[j];
            if dkj.is_infinite() {
                continue;
            }
            for i in 0..n {
                let through = row_k[i] + dkj;
                if through < d[(i, j)] {
                    d[(i, j)] = through;
                }
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| d[(0, v)].is_infinite()) {
        return Err(Error::DisconnectedGraph { vertex: v });
    }
    FiniteMmSpace::from_trusted_metric(d, uniform_weights(n))
}

/// Points in ℝᵏ (one per row) with a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: DMatrix<f64>,
    weights: DVector<f64>,
}

impl PointCloud {
    pub fn new(points: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::InvalidSpec("empty point cloud".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("point coordinates must be finite".into()));
        }
        check_weights(weights.as_slice(), points.nrows())?;
        Ok(Self { points, weights })
    }

    pub fn uniform(points: DMatrix<f64>) -> Result<Self> {
        let n = points.nrows();
        Self::new(points, uniform_weights(n))
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for c in 0..self.dim() {
            let t = self.points[(i, c)] - self.points[(j, c)];
            s += t * t;
        }
        s.sqrt()
    }

    /// The induced mm-space. Fails if two points coincide.
    pub fn to_space(&self) -> Result<FiniteMmSpace> {
        let n = self.n();
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { self.distance(i, j) });
        FiniteMmSpace::from_trusted_metric(d, self.weights.clone())
    }
}
