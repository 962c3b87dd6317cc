//! Synthetic spaces: polygons, Paley graphs, sphere samples, torus grids,
//! glued Paley truncations, ellipse clouds and random metrics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    normalize_weights, shortest_path_metric, uniform_weights, FiniteMmSpace, PointCloud,
    WeightedGraph,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Polygon { n: usize },
    Paley { q: usize },
    SphereSample { d: usize, n: usize, seed: u64 },
    TorusGrid { factors: usize, n_per_factor: usize },
    GluedPaley { q_list: Vec<usize> },
    EllipseCloud { a: f64, b: f64, n: usize, seed: u64 },
}

pub fn generate(spec: &GeneratorSpec) -> Result<FiniteMmSpace> {
    match *spec {
        GeneratorSpec::Polygon { n } => polygon(n),
        GeneratorSpec::Paley { q } => paley(q),
        GeneratorSpec::SphereSample { d, n, seed } => sphere_sample(d, n, seed),
        GeneratorSpec::TorusGrid { factors, n_per_factor } => torus_grid(factors, n_per_factor),
        GeneratorSpec::GluedPaley { ref q_list } => glued_paley(q_list),
        GeneratorSpec::EllipseCloud { a, b, n, seed } => ellipse_cloud(a, b, n, seed)?.to_space(),
    }
}

/// `n` evenly spaced points on the unit-speed circle of length 2π.
pub fn polygon(n: usize) -> Result<FiniteMmSpace> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("polygon needs n >= 3, got {n}")));
    }
    let step = 2.0 * PI / n as f64;
    let d = DMatrix::from_fn(n, n, |i, j| {
        let k = i.abs_diff(j);
        step * k.min(n - k) as f64
    });
    FiniteMmSpace::from_trusted_metric(d, uniform_weights(n))
}

pub fn is_prime(q: usize) -> bool {
    if q < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= q {
        if q.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

pub fn check_paley_order(q: usize) -> Result<()> {
    if !is_prime(q) || q % 4 != 1 {
        return Err(Error::InvalidSpec(format!("Paley order must be a prime = 1 mod 4, got {q}")));
    }
    Ok(())
}

/// Nonzero quadratic residues mod `q`.
pub fn quadratic_residues(q: usize) -> Vec<bool> {
    let mut res = vec![false; q];
    for x in 1..q {
        res[x * x % q] = true;
    }
    res
}

pub fn paley_graph(q: usize) -> Result<WeightedGraph> {
    check_paley_order(q)?;
    let res = quadratic_residues(q);
    let mut edges = Vec::new();
    for i in 0..q {
        for j in (i + 1)..q {
            if res[(j - i) % q] {
                edges.push((i, j, 1.0));
            }
        }
    }
    WeightedGraph::new(q, edges)
}

pub fn paley(q: usize) -> Result<FiniteMmSpace> {
    shortest_path_metric(&paley_graph(q)?)
}

/// Uniform points on S^{d−1} via normalized Gaussians, geodesic distances.
pub fn sphere_points(d: usize, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidSpec(format!("sphere sample needs d >= 2 and n >= 1, got d={d}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = DMatrix::zeros(n, d);
    for i in 0..n {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for (c, x) in v.iter().enumerate() {
                    pts[(i, c)] = x / norm;
                }
                break;
            }
        }
    }
    Ok(pts)
}

pub fn sphere_sample(d: usize, n: usize, seed: u64) -> Result<FiniteMmSpace> {
    let pts = sphere_points(d, n, seed)?;
    geodesic_space(&pts)
}

/// Geodesic distances between unit vectors (rows of `pts`).
pub fn geodesic_space(pts: &DMatrix<f64>) -> Result<FiniteMmSpace> {
    let n = pts.nrows();
    let gram = pts * pts.transpose();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let g = 0.5 * (gram[(i, j)] + gram[(j, i)]);
            g.clamp(-1.0, 1.0).acos()
        }
    });
    FiniteMmSpace::from_trusted_metric(d, uniform_weights(n))
}

/// Uniform i.i.d. angles on S¹ with arc-length distances.
pub fn circle_sample(n: usize, seed: u64) -> Result<FiniteMmSpace> {
    if n == 0 {
        return Err(Error::InvalidSpec("circle sample needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let g = (theta[i] - theta[j]).abs();
        g.min(2.0 * PI - g)
    });
    FiniteMmSpace::from_trusted_metric(d, uniform_weights(n))
}

/// N-fold ℓ²-product of `polygon(n_per_factor)`.
pub fn torus_grid(factors: usize, n_per_factor: usize) -> Result<FiniteMmSpace> {
    if factors == 0 {
        return Err(Error::InvalidSpec("torus needs at least one factor".into()));
    }
    let base = polygon(n_per_factor)?;
    let mut out = base.clone();
    for _ in 1..factors {
        out = product_space(&out, &base)?;
    }
    Ok(out)
}

/// Disjoint Paley blocks at mutual distance 1, vertex mass ∝ q^{-3/2}.
pub fn glued_paley(q_list: &[usize]) -> Result<FiniteMmSpace> {
    if q_list.is_empty() {
        return Err(Error::InvalidSpec("glued Paley needs at least one block".into()));
    }
    let blocks = q_list.iter().map(|&q| paley(q)).collect::<Result<Vec<_>>>()?;
    let n: usize = q_list.iter().sum();
    let mut d = DMatrix::from_element(n, n, 1.0);
    let mut raw = Vec::with_capacity(n);
    let mut offset = 0;
    for (block, &q) in blocks.iter().zip(q_list) {
        d.view_mut((offset, offset), (q, q)).copy_from(block.dist());
        raw.extend(std::iter::repeat_n((q as f64).powf(-1.5), q));
        offset += q;
    }
    // Paley distances are 1 or 2, so distance 1 across blocks keeps the triangle inequality.
    FiniteMmSpace::from_trusted_metric(d, normalize_weights(&raw)?)
}

/// Rejection-sampled uniform points in the ellipse x²/a² + y²/b² ≤ 1.
pub fn ellipse_cloud(a: f64, b: f64, n: usize, seed: u64) -> Result<PointCloud> {
    if !(a > 0.0 && b > 0.0) || n == 0 {
        return Err(Error::InvalidSpec(format!("ellipse needs a, b > 0 and n >= 1, got a={a}, b={b}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = DMatrix::zeros(n, 2);
    let mut i = 0;
    while i < n {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        if x * x + y * y <= 1.0 {
            pts[(i, 0)] = a * x;
            pts[(i, 1)] = b * y;
            i += 1;
        }
    }
    PointCloud::uniform(pts)
}

/// ℓ²-product metric with product measure; point `(i, j)` has index `i·n_y + j`.
pub fn product_space(x: &FiniteMmSpace, y: &FiniteMmSpace) -> Result<FiniteMmSpace> {
    let (nx, ny) = (x.n(), y.n());
    let n = nx * ny;
    let d = DMatrix::from_fn(n, n, |a, b| {
        let (i, j) = (a / ny, a % ny);
        let (k, l) = (b / ny, b % ny);
        x.dist()[(i, k)].hypot(y.dist()[(j, l)])
    });
    let w = DVector::from_fn(n, |a, _| x.weights()[a / ny] * y.weights()[a % ny]);
    let w = renormalize(w);
    FiniteMmSpace::from_trusted_metric(d, w)
}

fn renormalize(w: DVector<f64>) -> DVector<f64> {
    let total = crate::numeric::sum(w.iter().copied());
    if (total - 1.0).abs() <= super::WEIGHT_SUM_TOL {
        w
    } else {
        w / total
    }
}

/// Random metric with off-diagonal entries uniform in [1, 2].
pub fn random_metric(n: usize, rng: &mut impl Rng) -> Result<FiniteMmSpace> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(1.0..=2.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    FiniteMmSpace::from_trusted_metric(d, uniform_weights(n))
}

/// Shortest-path metric of a random connected graph: a random spanning
/// path plus extra edges with probability `p`, lengths uniform in [0.5, 2].
pub fn random_graph_metric(n: usize, p: f64, rng: &mut impl Rng) -> Result<FiniteMmSpace> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges: Vec<(usize, usize, f64)> =
        order.windows(2).map(|w| (w[0], w[1], rng.random_range(0.5..=2.0))).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                edges.push((i, j, rng.random_range(0.5..=2.0)));
            }
        }
    }
    shortest_path_metric(&WeightedGraph::new(n, edges)?)
}

/// Random full-support probability vector.
pub fn random_weights(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=1.0)).collect();
    normalize_weights(&raw).expect("weights drawn from [0.1, 1] are positive")
}

/// Random points in a `dim`-dimensional box, as a cloud.
pub fn random_cloud(n: usize, dim: usize, rng: &mut impl Rng) -> Result<PointCloud> {
    let pts = DMatrix::from_fn(n, dim, |_, _| rng.random_range(-1.0..1.0));
    PointCloud::uniform(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::check_metric;

    #[test]
    fn hexagon_antipodes() {
        let s = polygon(6).unwrap();
        assert_eq!(s.dist()[(0, 3)], PI);
        assert!((s.dist()[(0, 1)] - PI / 3.0).abs() < 1e-15);
        check_metric(s.dist()).unwrap();
    }

    #[test]
    fn paley_five_is_pentagon() {
        let s = paley(5).unwrap();
        let pent = (0..5).map(|i| (i, (i + 1) % 5, 1.0)).collect();
        let c5 = shortest_path_metric(&WeightedGraph::new(5, pent).unwrap()).unwrap();
        // The residues mod 5 are {1, 4}, so the Paley graph is literally the 5-cycle.
        assert_eq!(s.dist(), c5.dist());
    }

    #[test]
    fn paley_distances_are_one_or_two() {
        for q in [13, 17, 29] {
            let s = paley(q).unwrap();
            for i in 0..q {
                for j in 0..q {
                    let v = s.dist()[(i, j)];
                    assert!(v == 0.0 && i == j || v == 1.0 || v == 2.0);
                }
            }
        }
    }

    #[test]
    fn invalid_paley_orders() {
        for q in [3, 7, 9, 15, 21, 1] {
            assert!(matches!(paley(q), Err(Error::InvalidSpec(_))), "q = {q}");
        }
    }

    #[test]
    fn sphere_sample_two_points() {
        let s = sphere_sample(3, 2, 11).unwrap();
        let d = s.dist()[(0, 1)];
        assert!((0.0..=PI).contains(&d));
        assert_eq!(s, sphere_sample(3, 2, 11).unwrap());
    }

    #[test]
    fn glued_weights_are_normalized_per_block() {
        let s = glued_paley(&[5, 13]).unwrap();
        let w = s.weights();
        let ratio = w[0] / w[5];
        assert!((ratio - (13.0f64 / 5.0).powf(1.5)).abs() < 1e-12);
        check_metric(s.dist()).unwrap();
    }

    #[test]
    fn ellipse_points_inside() {
        let c = ellipse_cloud(2.0, 1.0, 200, 3).unwrap();
        for i in 0..c.n() {
            let (x, y) = (c.points()[(i, 0)], c.points()[(i, 1)]);
            assert!(x * x / 4.0 + y * y <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn product_with_singleton_is_identity() {
        let x = polygon(5).unwrap();
        let p = product_space(&x, &FiniteMmSpace::singleton()).unwrap();
        assert_eq!(p.dist(), x.dist());
        assert_eq!(p.weights(), x.weights());
    }
}
