//! Couplings, Gromov–Wasserstein coupling costs, the per-coupling
//! stability checks, and sampling-consistency experiments.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::embed;
use crate::error::{Error, Result};
use crate::kernel::{centered_kernel, CenteredKernel, Mode};
use crate::numeric::Compensated;
use crate::oracle::{circle_spectrum, sphere_spectrum, OracleSpectrum};
use crate::space::generate::{circle_sample, polygon, sphere_sample};
use crate::space::FiniteMmSpace;
use crate::spectral::{eigendecompose, psd_project, Spectrum};

/// Marginal tolerance for couplings.
pub const MARGINAL_TOL: f64 = 1e-12;
/// Slack on every inequality check.
pub const CHECK_SLACK: f64 = 1e-9;
/// Largest size for which all permutation couplings are enumerated.
pub const ENUMERATION_CAP: usize = 8;

/// Joint probability matrix with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    joint: DMatrix<f64>,
    source: DVector<f64>,
    target: DVector<f64>,
}

impl Coupling {
    pub fn new(joint: DMatrix<f64>, source: DVector<f64>, target: DVector<f64>) -> Result<Self> {
        if joint.nrows() != source.len() || joint.ncols() != target.len() {
            return Err(Error::MarginalMismatch(format!(
                "joint is {}x{}, marginals have lengths {} and {}",
                joint.nrows(),
                joint.ncols(),
                source.len(),
                target.len()
            )));
        }
        if let Some(v) = joint.iter().find(|&&v| v.is_nan() || v < 0.0) {
            return Err(Error::MarginalMismatch(format!("negative joint entry {v}")));
        }
        for i in 0..joint.nrows() {
            let s = crate::numeric::sum(joint.row(i).iter().copied());
            if (s - source[i]).abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch(format!("row {i} sums to {s}, expected {}", source[i])));
            }
        }
        for j in 0..joint.ncols() {
            let s = crate::numeric::sum(joint.column(j).iter().copied());
            if (s - target[j]).abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch(format!("column {j} sums to {s}, expected {}", target[j])));
            }
        }
        Ok(Self { joint, source, target })
    }

    pub fn joint(&self) -> &DMatrix<f64> {
        &self.joint
    }

    pub fn source(&self) -> &DVector<f64> {
        &self.source
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    pub fn transpose(&self) -> Coupling {
        Coupling { joint: self.joint.transpose(), source: self.target.clone(), target: self.source.clone() }
    }

    fn support(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.joint.ncols() {
            for i in 0..self.joint.nrows() {
                let c = self.joint[(i, j)];
                if c > 0.0 {
                    out.push((i, j, c));
                }
            }
        }
        out
    }
}

/// `w_x w_yᵀ`.
pub fn product_coupling(x: &FiniteMmSpace, y: &FiniteMmSpace) -> Coupling {
    Coupling {
        joint: x.weights() * y.weights().transpose(),
        source: x.weights().clone(),
        target: y.weights().clone(),
    }
}

/// Mass `1/n` on each pair `(i, perm[i])`; both spaces uniform of equal size.
pub fn permutation_coupling(x: &FiniteMmSpace, y: &FiniteMmSpace, perm: &[usize]) -> Result<Coupling> {
    let n = x.n();
    if y.n() != n || !x.is_uniform() || !y.is_uniform() {
        return Err(Error::MarginalMismatch("permutation couplings need uniform spaces of equal size".into()));
    }
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
        return Err(Error::MarginalMismatch(format!("{perm:?} is not a permutation of 0..{n}")));
    }
    let mut joint = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        joint[(i, j)] = 1.0 / n as f64;
    }
    Ok(Coupling { joint, source: x.weights().clone(), target: y.weights().clone() })
}

fn check_coupling(x: &FiniteMmSpace, y: &FiniteMmSpace, c: &Coupling) -> Result<()> {
    if c.joint.nrows() != x.n() || c.joint.ncols() != y.n() {
        return Err(Error::MarginalMismatch(format!(
            "coupling is {}x{} for spaces of sizes {} and {}",
            c.joint.nrows(),
            c.joint.ncols(),
            x.n(),
            y.n()
        )));
    }
    let close = |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax() <= MARGINAL_TOL;
    if !close(&c.source, x.weights()) || !close(&c.target, y.weights()) {
        return Err(Error::MarginalMismatch("coupling marginals differ from the space weights".into()));
    }
    Ok(())
}

/// `Σ_{(i,j),(i′,j′)} f(a(i,i′), b(j,j′)) c_ij c_i′j′` over the coupling support.
fn coupled_sum(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    support: &[(usize, usize, f64)],
    f: impl Fn(f64, f64) -> f64,
) -> f64 {
    let mut acc = Compensated::new();
    for &(i, j, c) in support {
        let mut row = Compensated::new();
        for &(k, l, c2) in support {
            row.add(c2 * f(a[(i, k)], b[(j, l)]));
        }
        acc.add(c * row.value());
    }
    acc.value()
}

/// `½ (Σ |d_x(i,i′) − d_y(j,j′)|^p c_ij c_i′j′)^{1/p}`, an upper bound on `d_GW,p`.
pub fn gw_cost(x: &FiniteMmSpace, y: &FiniteMmSpace, c: &Coupling, p: f64) -> Result<f64> {
    check_coupling(x, y, c)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidSpec(format!("gw_cost needs p >= 1, got {p}")));
    }
    let s = coupled_sum(x.dist(), y.dist(), &c.support(), |a, b| (a - b).abs().powf(p));
    Ok(0.5 * s.max(0.0).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Enumerate,
    Product,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwBound {
    pub cost: f64,
    pub coupling: Coupling,
    pub permutation: Option<Vec<usize>>,
}

/// The `index`-th permutation of `0..n` in lexicographic order.
pub fn nth_permutation(n: usize, mut index: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut fact: Vec<usize> = vec![1; n + 1];
    for i in 1..=n {
        fact[i] = fact[i - 1] * i;
    }
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let q = index / fact[k];
        index %= fact[k];
        out.push(pool.remove(q));
    }
    out
}

/// Best permutation cost (`p = 2`) or the product-coupling cost. Always an
/// upper bound on `d_GW,2`; ties keep the lexicographically first permutation.
pub fn gw_upper_bound(x: &FiniteMmSpace, y: &FiniteMmSpace, strategy: Strategy) -> Result<GwBound> {
    match strategy {
        Strategy::Product => {
            let coupling = product_coupling(x, y);
            let cost = gw_cost(x, y, &coupling, 2.0)?;
            Ok(GwBound { cost, coupling, permutation: None })
        }
        Strategy::Enumerate => {
            let n = x.n();
            if n > ENUMERATION_CAP {
                return Err(Error::TooLargeToEnumerate { n, cap: ENUMERATION_CAP });
            }
            let identity: Vec<usize> = (0..n).collect();
            permutation_coupling(x, y, &identity)?;
            let total: usize = (1..=n).product();
            let (dx, dy) = (x.dist(), y.dist());
            let (best, idx) = (0..total)
                .into_par_iter()
                .map(|k| {
                    let perm = nth_permutation(n, k);
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let t = dx[(i, j)] - dy[(perm[i], perm[j])];
                            acc += t * t;
                        }
                    }
                    (acc, k)
                })
                .reduce(|| (f64::INFINITY, usize::MAX), |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a });
            let perm = nth_permutation(n, idx);
            let coupling = permutation_coupling(x, y, &perm)?;
            let cost = 0.5 * (best / (n * n) as f64).sqrt();
            Ok(GwBound { cost, coupling, permutation: Some(perm) })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelGapCheck {
    pub lhs_kernel_gap: f64,
    pub rhs_bound: f64,
    pub distance_gap: f64,
    pub gw_cost: f64,
    pub holds: bool,
}

/// `‖K_X − K_Y‖ ≤ max(diam X, diam Y)·(3‖d_X − d_Y‖ + 2·gw_cost(c))`, norms in `L²(c⊗c)`.
pub fn kernel_gap_bound_check(x: &FiniteMmSpace, y: &FiniteMmSpace, c: &Coupling) -> Result<KernelGapCheck> {
    check_coupling(x, y, c)?;
    let support = c.support();
    let kx = centered_kernel(x, Mode::Measure);
    let ky = centered_kernel(y, Mode::Measure);
    let sq = |a: f64, b: f64| (a - b) * (a - b);
    let lhs = coupled_sum(kx.values(), ky.values(), &support, sq).max(0.0).sqrt();
    let distance_gap = coupled_sum(x.dist(), y.dist(), &support, sq).max(0.0).sqrt();
    let gw = 0.5 * distance_gap;
    let diam = x.diameter().max(y.diameter());
    let rhs = diam * (3.0 * distance_gap + 2.0 * gw);
    Ok(KernelGapCheck { lhs_kernel_gap: lhs, rhs_bound: rhs, distance_gap, gw_cost: gw, holds: lhs <= rhs + CHECK_SLACK })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionCheck {
    pub projected_gap: f64,
    pub raw_gap: f64,
    pub holds: bool,
}

/// `‖K_X⁺ − K_Y⁺‖ ≤ ‖K_X − K_Y‖` in `L²(c⊗c)` with measure-mode projections.
pub fn projection_stability_check(x: &FiniteMmSpace, y: &FiniteMmSpace, c: &Coupling) -> Result<ProjectionCheck> {
    projection_stability_check_with(x, y, c, |k| Ok(psd_project(k, None)?.values().clone()))
}

/// Same check with a caller-supplied projection.
pub fn projection_stability_check_with(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    c: &Coupling,
    project: impl Fn(&CenteredKernel) -> Result<DMatrix<f64>>,
) -> Result<ProjectionCheck> {
    check_coupling(x, y, c)?;
    let support = c.support();
    let kx = centered_kernel(x, Mode::Measure);
    let ky = centered_kernel(y, Mode::Measure);
    let (px, py) = (project(&kx)?, project(&ky)?);
    let sq = |a: f64, b: f64| (a - b) * (a - b);
    let raw_gap = coupled_sum(kx.values(), ky.values(), &support, sq).max(0.0).sqrt();
    let projected_gap = coupled_sum(&px, &py, &support, sq).max(0.0).sqrt();
    Ok(ProjectionCheck { projected_gap, raw_gap, holds: projected_gap <= raw_gap + CHECK_SLACK })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConsistencyTarget {
    /// Regular polygons: deterministic grids on S¹.
    CircleGrid,
    /// I.i.d. uniform points on S¹.
    Circle,
    /// I.i.d. uniform points on S^{d−1}.
    Sphere { d: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterMatch {
    pub order: usize,
    pub oracle: f64,
    pub multiplicity: u64,
    pub observed: f64,
    pub cluster_size: usize,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub seed: Option<u64>,
    pub top_eigenvalues: Vec<f64>,
    pub clusters: Vec<ClusterMatch>,
    pub median_metric_error: Option<f64>,
}

/// Groups a descending sequence into runs whose consecutive gaps are at most `tol`.
pub fn gap_clusters(values: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > tol {
            out.push((start, i - start));
            start = i;
        }
    }
    out
}

/// Samples the target at each size, compares the measure-mode spectrum with
/// the first `orders` oracle eigenvalues, and records the median relative
/// error of `‖Φ(u)−Φ(v)‖²` against `π·d(u,v)` for the full embedding.
///
/// Grids are clustered by gaps larger than `10·zero_tol`. Random samples
/// split exact multiplicities, so their sorted spectra are cut into chunks
/// of the oracle multiplicities instead.
pub fn consistency_experiment(
    target: ConsistencyTarget,
    sizes: &[usize],
    seed: u64,
    orders: usize,
) -> Result<Vec<ConsistencyRow>> {
    if sizes.is_empty() {
        return Err(Error::InvalidSpec("consistency needs at least one size".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(format!("sizes must be increasing, got {sizes:?}")));
    }
    if orders == 0 {
        return Err(Error::InvalidSpec("consistency needs at least one oracle order".into()));
    }
    let oracle = match target {
        ConsistencyTarget::CircleGrid | ConsistencyTarget::Circle => circle_spectrum(orders)?,
        ConsistencyTarget::Sphere { d } => sphere_spectrum(d, orders)?,
    };
    sizes
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let run_seed = seed.wrapping_add(idx as u64);
            let (space, seed_used) = match target {
                ConsistencyTarget::CircleGrid => (polygon(n)?, None),
                ConsistencyTarget::Circle => (circle_sample(n, run_seed)?, Some(run_seed)),
                ConsistencyTarget::Sphere { d } => (sphere_sample(d, n, run_seed)?, Some(run_seed)),
            };
            let s = eigendecompose(&centered_kernel(&space, Mode::Measure), None)?;
            let clusters = match target {
                ConsistencyTarget::CircleGrid => match_by_gaps(&s, &oracle),
                _ => match_by_multiplicity(&s, &oracle),
            };
            Ok(ConsistencyRow {
                n,
                seed: seed_used,
                top_eigenvalues: s.eigenvalues().iter().take(10).copied().collect(),
                clusters,
                median_metric_error: median_metric_error(&space, &s)?,
            })
        })
        .collect()
}

/// `(order, value, multiplicity)`.
type Entry = (usize, f64, u64);

fn oracle_sides(oracle: &OracleSpectrum) -> (Vec<Entry>, Vec<Entry>) {
    let mut pos: Vec<_> = oracle.nonzero().filter(|e| e.value > 0.0).map(|e| (e.order, e.value, e.multiplicity)).collect();
    let mut neg: Vec<_> = oracle.nonzero().filter(|e| e.value < 0.0).map(|e| (e.order, e.value, e.multiplicity)).collect();
    pos.sort_by(|a, b| b.1.total_cmp(&a.1));
    neg.sort_by(|a, b| a.1.total_cmp(&b.1));
    (pos, neg)
}

fn cluster_match(entry: (usize, f64, u64), values: &[f64]) -> ClusterMatch {
    let observed = values.iter().sum::<f64>() / values.len() as f64;
    ClusterMatch {
        order: entry.0,
        oracle: entry.1,
        multiplicity: entry.2,
        observed,
        cluster_size: values.len(),
        rel_gap: ((observed - entry.1) / entry.1).abs(),
    }
}

fn match_by_gaps(s: &Spectrum, oracle: &OracleSpectrum) -> Vec<ClusterMatch> {
    let ev = s.eigenvalues();
    let groups = gap_clusters(ev, 10.0 * s.zero_tol());
    let tol = s.zero_tol();
    let top: Vec<&[f64]> = groups.iter().map(|&(a, l)| &ev[a..a + l]).filter(|g| g[0] > tol).collect();
    let bottom: Vec<&[f64]> = groups.iter().rev().map(|&(a, l)| &ev[a..a + l]).filter(|g| g[g.len() - 1] < -tol).collect();
    let (pos, neg) = oracle_sides(oracle);
    let mut out: Vec<ClusterMatch> = pos.into_iter().zip(top).map(|(e, g)| cluster_match(e, g)).collect();
    out.extend(neg.into_iter().zip(bottom).map(|(e, g)| cluster_match(e, g)));
    out.sort_by_key(|m| m.order);
    out
}

fn match_by_multiplicity(s: &Spectrum, oracle: &OracleSpectrum) -> Vec<ClusterMatch> {
    let ev = s.eigenvalues();
    let (pos, neg) = oracle_sides(oracle);
    let mut out = Vec::new();
    let mut at = 0;
    for e in pos {
        let m = e.2 as usize;
        if at + m > s.pr() {
            break;
        }
        out.push(cluster_match(e, &ev[at..at + m]));
        at += m;
    }
    let mut end = ev.len();
    for e in neg {
        let m = e.2 as usize;
        if end < m || ev.len() - (end - m) > s.nr() {
            break;
        }
        out.push(cluster_match(e, &ev[end - m..end]));
        end -= m;
    }
    out.sort_by_key(|m| m.order);
    out
}

fn median_metric_error(space: &FiniteMmSpace, s: &Spectrum) -> Result<Option<f64>> {
    if s.pr() == 0 {
        return Ok(None);
    }
    let e = embed(s, s.pr())?;
    let n = space.n();
    let mut errs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.dist()[(i, j)];
            errs.push((e.squared_distance(i, j) / (PI * d) - 1.0).abs());
        }
    }
    if errs.is_empty() {
        return Ok(None);
    }
    errs.sort_by(f64::total_cmp);
    let m = errs.len();
    Ok(Some(if m % 2 == 1 { errs[m / 2] } else { 0.5 * (errs[m / 2 - 1] + errs[m / 2]) }))
}
