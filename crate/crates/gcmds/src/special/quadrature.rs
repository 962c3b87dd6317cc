//! Gauss–Legendre quadrature with node-count doubling.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const MIN_NODES: usize = 32;
pub const MAX_NODES: usize = 4096;
/// Absolute floor, in units of machine epsilon times `∫|f|`, below which
/// successive estimates count as agreeing.
pub const CANCELLATION_FLOOR: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn cache() -> &'static RwLock<HashMap<usize, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The `m`-point rule on [−1, 1], computed once per order.
pub fn gauss_legendre(m: usize) -> Arc<QuadratureRule> {
    assert!(m >= 1, "quadrature order must be positive");
    if let Some(rule) = cache().read().expect("quadrature cache poisoned").get(&m) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(compute_rule(m));
    cache().write().expect("quadrature cache poisoned").entry(m).or_insert(rule).clone()
}

fn compute_rule(m: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for iter in 0..100 {
            let (p, deriv) = legendre_and_derivative(m, x);
            dp = deriv;
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) || iter == 99 {
                dp = legendre_and_derivative(m, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn legendre_and_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 1 {
        return (x, 1.0);
    }
    (p1, m as f64 * (x * p1 - p0) / (x * x - 1.0))
}

fn agrees(new: f64, old: f64, abs_mass: f64, rel_tol: f64) -> bool {
    let diff = (new - old).abs();
    diff <= rel_tol * new.abs() || diff <= CANCELLATION_FLOOR * f64::EPSILON * abs_mass
}

/// `∫_{−1}^{1} f(t) dt` by doubling the node count from 32 up to 4096.
pub fn integrate(f: impl Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    let mut prev: Option<f64> = None;
    let mut m = MIN_NODES;
    while m <= MAX_NODES {
        let rule = gauss_legendre(m);
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = w * f(x);
            acc += v;
            mass += v.abs();
        }
        if let Some(p) = prev {
            if agrees(acc, p, mass, rel_tol) {
                return Ok(acc);
            }
        }
        prev = Some(acc);
        m *= 2;
    }
    let last = prev.unwrap_or(f64::NAN);
    let previous = integrate_fixed(&f, MAX_NODES / 2);
    Err(Error::NoConvergence { previous, last })
}

fn integrate_fixed(f: &impl Fn(f64) -> f64, m: usize) -> f64 {
    gauss_legendre(m).apply(f)
}

/// `∫_{−1}^{1} g(t)(1−t²)^{(d−3)/2} dt`, computed as `∫_0^π g(cos θ) sin^{d−2}θ dθ`.
pub fn integrate_zonal(d: usize, g: impl Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    integrate_polar(d, |theta| g(theta.cos()), rel_tol)
}

/// `∫_0^π h(θ) sin^{d−2}θ dθ`.
pub fn integrate_polar(d: usize, h: impl Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    let power = d as i32 - 2;
    integrate(
        |x| {
            let theta = 0.5 * PI * (x + 1.0);
            0.5 * PI * h(theta) * theta.sin().powi(power)
        },
        rel_tol,
    )
}

/// Several polar integrals sharing nodes. `h(θ, out)` writes the `count`
/// integrand values at `θ`. Starts at `min_nodes` (rounded up to a power
/// of two, at least 32) and doubles until every component agrees.
pub fn integrate_polar_many(
    d: usize,
    count: usize,
    min_nodes: usize,
    mut h: impl FnMut(f64, &mut Vec<f64>),
    rel_tol: f64,
) -> Result<Vec<f64>> {
    let power = d as i32 - 2;
    let mut m = min_nodes.max(MIN_NODES).next_power_of_two();
    let mut prev: Option<Vec<f64>> = None;
    let mut buf = Vec::with_capacity(count);
    while m <= MAX_NODES {
        let rule = gauss_legendre(m);
        let mut acc = vec![0.0; count];
        let mut mass = vec![0.0; count];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = 0.5 * PI * (x + 1.0);
            let scale = 0.5 * PI * w * theta.sin().powi(power);
            h(theta, &mut buf);
            for k in 0..count {
                let v = scale * buf[k];
                acc[k] += v;
                mass[k] += v.abs();
            }
        }
        if let Some(p) = &prev {
            if let Some(k) = (0..count).find(|&k| !agrees(acc[k], p[k], mass[k], rel_tol)) {
                if 2 * m > MAX_NODES {
                    return Err(Error::NoConvergence { previous: p[k], last: acc[k] });
                }
            } else {
                return Ok(acc);
            }
        }
        prev = Some(acc);
        m *= 2;
    }
    Err(Error::NoConvergence { previous: f64::NAN, last: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for m in [1, 2, 5, 32, 257, 1024, 4096] {
            let s: f64 = gauss_legendre(m).weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m = {m}: {s}");
        }
    }

    #[test]
    fn exact_on_monomials() {
        let rule = gauss_legendre(8);
        for k in 0..16 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((rule.apply(|x| x.powi(k)) - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn linear_moment() {
        assert!((integrate(|t| t * t, DEFAULT_REL_TOL).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_integral_converges() {
        assert!(integrate(|t| t.powi(3) * (1.0 - t * t).sqrt(), DEFAULT_REL_TOL).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rough_integrand_fails() {
        match integrate(|t| if t > 0.123 { 1.0 } else { 0.0 }, 1e-14) {
            Err(Error::NoConvergence { previous, last }) => {
                assert!((previous - 0.877).abs() < 1e-2 && (last - 0.877).abs() < 1e-2)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zonal_weight() {
        // ∫(1−t²)^{1/2} dt = π/2.
        let v = integrate_zonal(4, |_| 1.0, DEFAULT_REL_TOL).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-14);
    }
}
