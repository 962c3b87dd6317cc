//! Spectra of round spheres and of metric transforms of S².

use std::f64::consts::PI;

use serde::Serialize;

use super::{AnalyticEigenvalue, OracleSpectrum};
use crate::error::{Error, Result};
use crate::numeric::Compensated;
use crate::special::gamma::{harmonic_dim, harmonic_dim_f64, ln_double_factorial, ln_gamma, ln_sphere_area};
use crate::special::legendre::{legendre_unchecked, LegendreEvaluator};
use crate::special::quadrature::{integrate_polar, integrate_polar_many, DEFAULT_REL_TOL};

/// Orders used for tail fits.
pub const TAIL_FIT_TERMS: usize = 10;
/// The tail-corrected metric identity extends the series to this multiple of the truncation order.
pub const TAIL_EXTENSION_FACTOR: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedForm,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidSpec(format!("sphere oracles need d >= 3, got {d}")));
    }
    Ok(())
}

/// `|S^{d−2}| / |S^{d−1}|`.
fn area_ratio(d: usize) -> f64 {
    (ln_sphere_area(d - 1) - ln_sphere_area(d)).exp()
}

fn odd_closed_form_ln(n: usize, d: usize, pi_power: f64, two_power: f64) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    pi_power * PI.ln() + ln_double_factorial(n) + ln_gamma(0.5 * df) + ln_gamma(0.5 * nf)
        - nf.ln()
        - two_power * 2f64.ln()
        - 2.0 * ln_gamma(0.5 * (nf + df))
        - ln_sphere_area(d)
}

fn lambda_closed_form(n: usize, d: usize) -> f64 {
    odd_closed_form_ln(n, d, 0.5 * (d as f64 + 1.0), 0.5 * (n as f64 + 1.0)).exp()
}

fn eta_closed_form(n: usize, d: usize) -> f64 {
    -odd_closed_form_ln(n, d, 0.5 * (d as f64 - 1.0), 0.5 * (n as f64 - 1.0)).exp()
}

fn lambda_quadrature(n: usize, d: usize) -> Result<f64> {
    let integral = integrate_polar(d, |th| legendre_unchecked(n, d, th.cos()) * th * th, DEFAULT_REL_TOL)?;
    Ok(-0.5 * area_ratio(d) * integral)
}

fn eta_quadrature(n: usize, d: usize) -> Result<f64> {
    let integral = integrate_polar(d, |th| legendre_unchecked(n, d, th.cos()) * th, DEFAULT_REL_TOL)?;
    Ok(area_ratio(d) * integral)
}

/// `λ_{n,d}`, the eigenvalue of the S^{d−1} kernel on degree-`n` harmonics.
pub fn sphere_eigenvalue(n: usize, d: usize, method: Method) -> Result<AnalyticEigenvalue> {
    check_dim(d)?;
    if n == 0 {
        return Err(Error::InvalidSpec("sphere eigenvalues are indexed from n = 1".into()));
    }
    let value = match method {
        Method::ClosedForm if n.is_multiple_of(2) => return Err(Error::Parity { n }),
        Method::ClosedForm => lambda_closed_form(n, d),
        Method::Quadrature => lambda_quadrature(n, d)?,
    };
    Ok(AnalyticEigenvalue { order: n, value, multiplicity: harmonic_dim(n, d)? })
}

/// `η_{n,d}`, the eigenvalue of the plain geodesic-distance kernel.
pub fn sphere_eta(n: usize, d: usize, method: Method) -> Result<AnalyticEigenvalue> {
    check_dim(d)?;
    let value = match method {
        Method::ClosedForm if n.is_multiple_of(2) => return Err(Error::Parity { n }),
        Method::ClosedForm => eta_closed_form(n, d),
        Method::Quadrature => eta_quadrature(n, d)?,
    };
    Ok(AnalyticEigenvalue { order: n, value, multiplicity: harmonic_dim(n, d)? })
}

/// Quadrature values `λ_{1,d}, …, λ_{max_order,d}` on shared nodes.
fn lambda_batch(d: usize, max_order: usize) -> Result<Vec<f64>> {
    let eval = LegendreEvaluator::new(d, max_order)?;
    let ratio = area_ratio(d);
    let raw = integrate_polar_many(
        d,
        max_order + 1,
        max_order + 33,
        |th, out| {
            eval.fill(th.cos(), out);
            let w = th * th;
            for v in out.iter_mut() {
                *v *= w;
            }
        },
        DEFAULT_REL_TOL,
    )?;
    Ok(raw[1..].iter().map(|v| -0.5 * ratio * v).collect())
}

pub fn sphere_spectrum(d: usize, max_order: usize) -> Result<OracleSpectrum> {
    check_dim(d)?;
    if max_order == 0 {
        return Err(Error::InvalidSpec("sphere spectrum needs max_order >= 1".into()));
    }
    let lam = lambda_batch(d, max_order)?;
    let mut entries = vec![AnalyticEigenvalue { order: 0, value: 0.0, multiplicity: 1 }];
    let mut weighted = Vec::with_capacity(max_order);
    for (i, &value) in lam.iter().enumerate() {
        let n = i + 1;
        entries.push(AnalyticEigenvalue { order: n, value, multiplicity: harmonic_dim(n, d)? });
        weighted.push((n as f64, value.abs() * harmonic_dim_f64(n, d)));
    }
    let tail_estimate = fit_power_law(&weighted[weighted.len().saturating_sub(TAIL_FIT_TERMS)..])
        .map(|f| f.tail_sum(max_order, 1));
    Ok(OracleSpectrum {
        space: format!("sphere{{d={d}}}"),
        entries,
        truncation_order: max_order,
        tail_estimate,
        one_dim_kernel: true,
        point_count: None,
    })
}

/// Power law `c·n^{−p}` fitted by least squares in log–log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub c: f64,
    pub p: f64,
}

impl TailFit {
    pub fn at(&self, n: f64) -> f64 {
        self.c * n.powf(-self.p)
    }

    /// Midpoint estimate of `Σ c·m^{−p}` over `m > n` with the given stride.
    pub fn tail_sum(&self, n: usize, stride: usize) -> f64 {
        if self.p <= 1.0 {
            return f64::INFINITY;
        }
        let start = n as f64 + 0.5 * stride as f64;
        self.c * start.powf(1.0 - self.p) / ((self.p - 1.0) * stride as f64)
    }
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Option<TailFit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Some(TailFit { c: (my - slope * mx).exp(), p: -slope })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSummaries {
    pub d: usize,
    pub max_order: usize,
    /// `λ_{n,d}` for `n = 1..=max_order` by quadrature.
    pub eigenvalues: Vec<f64>,
    /// `Σ_{odd n ≤ max_order} λ_{n,d} N_{n,d}` from the closed form.
    pub pos_sum: f64,
    pub pos_sum_limit: f64,
    /// Fitted estimate of the odd orders beyond `max_order`.
    pub pos_tail_estimate: Option<f64>,
    pub diam2_sq: f64,
    pub trace: f64,
    /// `π²/4 − trace`.
    pub neg_trace: f64,
    /// `Σ_{even n ≤ max_order} |λ_{n,d}| N_{n,d}`.
    pub neg_trace_partial: f64,
    /// Entry `k` is `Σ_{1 ≤ n ≤ k} |λ_{n,d}| N_{n,d}`; entry 0 is 0.
    pub trace_norm_partials: Vec<f64>,
}

pub fn sphere_summaries(d: usize, max_order: usize) -> Result<SphereSummaries> {
    check_dim(d)?;
    if max_order == 0 {
        return Err(Error::InvalidSpec("summaries need max_order >= 1".into()));
    }
    let eigenvalues = lambda_batch(d, max_order)?;
    let mut pos = Compensated::new();
    let mut neg = Compensated::new();
    let mut partial = Compensated::new();
    let mut trace_norm_partials = vec![0.0];
    let mut pos_terms = Vec::new();
    for (i, &lam) in eigenvalues.iter().enumerate() {
        let n = i + 1;
        let mult = harmonic_dim_f64(n, d);
        if n % 2 == 1 {
            let term = lambda_closed_form(n, d) * mult;
            pos.add(term);
            pos_terms.push((n as f64, term));
        } else {
            neg.add(-lam * mult);
        }
        partial.add(lam.abs() * mult);
        trace_norm_partials.push(partial.value());
    }
    let diam2_sq = area_ratio(d) * integrate_polar(d, |th| th * th, DEFAULT_REL_TOL)?;
    let trace = 0.5 * diam2_sq;
    let pos_sum_limit = PI * PI / 4.0;
    let last_odd = if max_order % 2 == 1 { max_order } else { max_order - 1 };
    let pos_tail_estimate = fit_power_law(&pos_terms[pos_terms.len().saturating_sub(TAIL_FIT_TERMS)..])
        .map(|f| f.tail_sum(last_odd, 2));
    Ok(SphereSummaries {
        d,
        max_order,
        eigenvalues,
        pos_sum: pos.value(),
        pos_sum_limit,
        pos_tail_estimate,
        diam2_sq,
        trace,
        neg_trace: pos_sum_limit - trace,
        neg_trace_partial: neg.value(),
        trace_norm_partials,
    })
}

/// `count` equally spaced angles from 0 to π inclusive.
pub fn angle_grid(count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..count).map(|k| PI * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricIdentityReport {
    pub d: usize,
    pub max_order: usize,
    pub angles: Vec<f64>,
    /// Truncated `‖Φ(u) − Φ(v)‖²` at each angle.
    pub lhs: Vec<f64>,
    /// Truncated series plus the fitted tail, when one is used.
    pub lhs_tail_corrected: Option<Vec<f64>>,
    pub max_error_truncated: f64,
    /// Error of the tail-corrected series for `d ≥ 3`, of the truncated series for `d = 2`.
    pub max_error: f64,
    pub tail_fit: Option<TailFit>,
    pub extension_order: Option<usize>,
}

/// Compares the truncated squared embedding distance with `π·γ`.
///
/// For `d = 2` the circle eigenfunctions `√2 cos nθ`, `√2 sin nθ` are
/// summed directly. For `d ≥ 3` the addition theorem gives
/// `2 Σ_{odd n} λ_{n,d} N_{n,d} (1 − P_{n,d}(cos γ))`; the tail beyond
/// `max_order` is estimated from a power-law fit to the last ten odd terms
/// and summed out to `200·max_order`.
pub fn sphere_metric_identity_check(d: usize, max_order: usize, angles: &[f64]) -> Result<MetricIdentityReport> {
    if d < 2 {
        return Err(Error::InvalidSpec(format!("metric identity needs d >= 2, got {d}")));
    }
    if max_order == 0 {
        return Err(Error::InvalidSpec("metric identity needs max_order >= 1".into()));
    }
    if let Some(&g) = angles.iter().find(|g| !(0.0..=PI).contains(*g)) {
        return Err(Error::Domain { t: g });
    }
    let max_err = |lhs: &[f64]| {
        lhs.iter().zip(angles).map(|(l, g)| (l - PI * g).abs()).fold(0.0f64, f64::max)
    };
    if d == 2 {
        let lhs: Vec<f64> = angles.iter().map(|&g| circle_squared_distance(0.0, g, max_order)).collect();
        let e = max_err(&lhs);
        return Ok(MetricIdentityReport {
            d,
            max_order,
            angles: angles.to_vec(),
            lhs,
            lhs_tail_corrected: None,
            max_error_truncated: e,
            max_error: e,
            tail_fit: None,
            extension_order: None,
        });
    }

    let odd: Vec<usize> = (1..=max_order).step_by(2).collect();
    let terms: Vec<f64> = odd.iter().map(|&n| lambda_closed_form(n, d) * harmonic_dim_f64(n, d)).collect();
    let lhs: Vec<f64> = angles
        .iter()
        .map(|&g| {
            let t = g.cos();
            odd.iter()
                .zip(&terms)
                .map(|(&n, &w)| 2.0 * w * (1.0 - legendre_unchecked(n, d, t)))
                .collect::<Compensated>()
                .value()
        })
        .collect();
    let max_error_truncated = max_err(&lhs);

    let fit_points: Vec<(f64, f64)> = odd
        .iter()
        .zip(&terms)
        .skip(odd.len().saturating_sub(TAIL_FIT_TERMS))
        .map(|(&n, &w)| (n as f64, w))
        .collect();
    let tail_fit = if fit_points.len() == TAIL_FIT_TERMS { fit_power_law(&fit_points) } else { None };
    let Some(fit) = tail_fit else {
        return Ok(MetricIdentityReport {
            d,
            max_order,
            angles: angles.to_vec(),
            lhs,
            lhs_tail_corrected: None,
            max_error_truncated,
            max_error: max_error_truncated,
            tail_fit: None,
            extension_order: None,
        });
    };
    let extension = TAIL_EXTENSION_FACTOR * max_order;
    let eval = LegendreEvaluator::new(d, extension)?;
    let mut p = Vec::with_capacity(extension + 1);
    let corrected: Vec<f64> = angles
        .iter()
        .zip(&lhs)
        .map(|(&g, &base)| {
            eval.fill(g.cos(), &mut p);
            let mut acc = Compensated::new();
            acc.add(base);
            let first = odd.last().map_or(1, |n| n + 2);
            for m in (first..=extension).step_by(2) {
                acc.add(2.0 * fit.at(m as f64) * (1.0 - p[m]));
            }
            acc.value()
        })
        .collect();
    let max_error = max_err(&corrected);
    Ok(MetricIdentityReport {
        d,
        max_order,
        angles: angles.to_vec(),
        lhs,
        lhs_tail_corrected: Some(corrected),
        max_error_truncated,
        max_error,
        tail_fit: Some(fit),
        extension_order: Some(extension),
    })
}

/// `‖Φ(θ) − Φ(θ′)‖²` for S¹ truncated at `max_order`, from the explicit eigenfunctions.
fn circle_squared_distance(theta: f64, theta2: f64, max_order: usize) -> f64 {
    let mut acc = Compensated::new();
    for n in (1..=max_order).step_by(2) {
        let nf = n as f64;
        let lam = 1.0 / (nf * nf);
        let dc = (nf * theta).cos() - (nf * theta2).cos();
        let ds = (nf * theta).sin() - (nf * theta2).sin();
        acc.add(lam * 2.0 * (dc * dc + ds * ds));
    }
    acc.value()
}

/// Distance profile on S² as a function of the angle between points.
#[derive(Clone, Copy)]
pub enum S2Profile<'a> {
    /// `f(t) = arccos t`.
    Geodesic,
    /// `f(t) = (2 − 2t)^{1/4}`, the square root of chordal distance.
    SqrtEuclidean,
    /// Arbitrary `f(t)` on [−1, 1].
    Custom(&'a (dyn Fn(f64) -> f64 + Sync)),
}

impl S2Profile<'_> {
    fn squared(&self, theta: f64) -> f64 {
        match self {
            S2Profile::Geodesic => theta * theta,
            S2Profile::SqrtEuclidean => 2.0 * (0.5 * theta).sin(),
            S2Profile::Custom(f) => {
                let v = f(theta.cos());
                v * v
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            S2Profile::Geodesic => "geodesic",
            S2Profile::SqrtEuclidean => "sqrt_euclidean",
            S2Profile::Custom(_) => "custom",
        }
    }
}

/// `λ^f_{n,3} = −(|S¹|/(2|S²|)) ∫ P_{n,3}(t) f²(t) dt`, multiplicity `2n+1`.
pub fn s2_transform_eigenvalue(n: usize, profile: S2Profile<'_>) -> Result<AnalyticEigenvalue> {
    if n == 0 {
        return Err(Error::InvalidSpec("transform eigenvalues are indexed from n = 1".into()));
    }
    let integral = integrate_polar(3, |th| legendre_unchecked(n, 3, th.cos()) * profile.squared(th), DEFAULT_REL_TOL)?;
    Ok(AnalyticEigenvalue { order: n, value: -0.5 * area_ratio(3) * integral, multiplicity: 2 * n as u64 + 1 })
}

pub fn s2_transform_spectrum(max_order: usize, profile: S2Profile<'_>) -> Result<OracleSpectrum> {
    if max_order == 0 {
        return Err(Error::InvalidSpec("transform spectrum needs max_order >= 1".into()));
    }
    let eval = LegendreEvaluator::new(3, max_order)?;
    let raw = integrate_polar_many(
        3,
        max_order + 1,
        max_order + 33,
        |th, out| {
            eval.fill(th.cos(), out);
            let w = profile.squared(th);
            for v in out.iter_mut() {
                *v *= w;
            }
        },
        DEFAULT_REL_TOL,
    )?;
    let ratio = area_ratio(3);
    let mut entries = vec![AnalyticEigenvalue { order: 0, value: 0.0, multiplicity: 1 }];
    let mut weighted = Vec::new();
    for (n, v) in raw.iter().enumerate().skip(1) {
        let value = -0.5 * ratio * v;
        let multiplicity = 2 * n as u64 + 1;
        weighted.push((n as f64, value.abs() * multiplicity as f64));
        entries.push(AnalyticEigenvalue { order: n, value, multiplicity });
    }
    let tail_estimate = fit_power_law(&weighted[weighted.len().saturating_sub(TAIL_FIT_TERMS)..])
        .map(|f| f.tail_sum(max_order, 1));
    Ok(OracleSpectrum {
        space: format!("s2f{{{}}}", profile.name()),
        entries,
        truncation_order: max_order,
        tail_estimate,
        one_dim_kernel: true,
        point_count: None,
    })
}
