//! Closed-form and quadrature spectra of exemplar spaces.

pub mod sphere;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Mode;
use crate::numeric::Compensated;
use crate::space::generate::check_paley_order;
use crate::spectral::Spectrum;

pub use sphere::{
    angle_grid, s2_transform_eigenvalue, s2_transform_spectrum, sphere_eigenvalue, sphere_eta,
    sphere_metric_identity_check, sphere_spectrum, sphere_summaries, Method, MetricIdentityReport,
    S2Profile, SphereSummaries,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticEigenvalue {
    #[serde(rename = "n")]
    pub order: usize,
    pub value: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub space: String,
    pub entries: Vec<AnalyticEigenvalue>,
    pub truncation_order: usize,
    pub tail_estimate: Option<f64>,
    /// The null space is spanned by the constants alone.
    #[serde(skip)]
    pub one_dim_kernel: bool,
    /// Total number of points, when the underlying space is finite.
    #[serde(skip)]
    pub point_count: Option<u64>,
}

impl OracleSpectrum {
    pub fn nonzero(&self) -> impl Iterator<Item = &AnalyticEigenvalue> {
        self.entries.iter().filter(|e| e.value != 0.0)
    }

    /// `Σ |λ|·mult` over negative entries.
    pub fn negative_trace(&self) -> f64 {
        self.nonzero()
            .filter(|e| e.value < 0.0)
            .map(|e| -e.value * e.multiplicity as f64)
            .collect::<Compensated>()
            .value()
    }

    pub fn positive_sum(&self) -> f64 {
        self.nonzero()
            .filter(|e| e.value > 0.0)
            .map(|e| e.value * e.multiplicity as f64)
            .collect::<Compensated>()
            .value()
    }

    pub fn trace_norm(&self) -> f64 {
        self.nonzero().map(|e| e.value.abs() * e.multiplicity as f64).collect::<Compensated>().value()
    }

    /// Nonzero values repeated by multiplicity, sorted descending.
    pub fn nonzero_multiset(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .nonzero()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity as usize))
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Eigenvalues of a computed spectrum as unit-multiplicity entries,
    /// with the kernel collapsed into one zero entry.
    pub fn from_spectrum(s: &Spectrum, space: impl Into<String>) -> Self {
        let tol = s.zero_tol();
        let mut entries = vec![AnalyticEigenvalue { order: 0, value: 0.0, multiplicity: s.kernel_dim() as u64 }];
        entries.extend(
            s.eigenvalues()
                .iter()
                .enumerate()
                .filter(|(_, l)| l.abs() > tol)
                .map(|(m, &l)| AnalyticEigenvalue { order: m + 1, value: l, multiplicity: 1 }),
        );
        if s.kernel_dim() == 0 {
            entries.remove(0);
        }
        Self {
            space: space.into(),
            entries,
            truncation_order: s.n(),
            tail_estimate: None,
            one_dim_kernel: s.kernel_dim() == 1,
            point_count: Some(s.n() as u64),
        }
    }
}

fn zero_entry() -> AnalyticEigenvalue {
    AnalyticEigenvalue { order: 0, value: 0.0, multiplicity: 1 }
}

/// `λ_n = (−1)^{n+1}/n²` with multiplicity 2, plus the constant.
pub fn circle_spectrum(max_order: usize) -> Result<OracleSpectrum> {
    if max_order == 0 {
        return Err(Error::InvalidSpec("circle spectrum needs max_order >= 1".into()));
    }
    let mut entries = vec![zero_entry()];
    let mut partial = Compensated::new();
    for n in 1..=max_order {
        let nf = n as f64;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        entries.push(AnalyticEigenvalue { order: n, value: sign / (nf * nf), multiplicity: 2 });
        partial.add(2.0 / (nf * nf));
    }
    Ok(OracleSpectrum {
        space: "circle".into(),
        entries,
        truncation_order: max_order,
        tail_estimate: Some(PI * PI / 3.0 - partial.value()),
        one_dim_kernel: true,
        point_count: None,
    })
}

/// `½ Σ_{m > max_order/2} 1/m²`: the part of `Tr_neg(S¹) = π²/12` missing from orders ≤ `max_order`.
pub fn circle_negative_trace_tail(max_order: usize) -> f64 {
    let half = max_order / 2;
    let partial: f64 = (1..=half).map(|m| 1.0 / (m as f64 * m as f64)).collect::<Compensated>().value();
    0.5 * (PI * PI / 6.0 - partial)
}

/// Matrix-mode spectrum of the regular `(4m+2)`-gon with geodesic distances.
pub fn polygon_spectrum(m: usize) -> Result<OracleSpectrum> {
    if m == 0 {
        return Err(Error::InvalidSpec("polygon spectrum needs m >= 1".into()));
    }
    let n = 4 * m + 2;
    let nf = n as f64;
    let mut entries = vec![zero_entry()];
    for k in 1..n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let s = (k as f64 * PI / nf).sin();
        let value = (2.0 * PI / nf).powi(2) * sign * nf / (4.0 * s * s);
        entries.push(AnalyticEigenvalue { order: k, value, multiplicity: 1 });
    }
    Ok(OracleSpectrum {
        space: format!("polygon{{{n}}}"),
        entries,
        truncation_order: n - 1,
        tail_estimate: None,
        one_dim_kernel: true,
        point_count: Some(n as u64),
    })
}

/// `(π/(2m+1))²·m(m+1)(4m+2)/3`.
pub fn polygon_negative_trace(m: usize) -> f64 {
    let mf = m as f64;
    (PI / (2.0 * mf + 1.0)).powi(2) * mf * (mf + 1.0) * (4.0 * mf + 2.0) / 3.0
}

/// `(5 ± 3√q)/4` each with multiplicity `(q−1)/2`, divided by `q` in measure mode.
pub fn paley_spectrum(q: usize, mode: Mode) -> Result<OracleSpectrum> {
    check_paley_order(q)?;
    let qf = q as f64;
    let scale = match mode {
        Mode::Matrix => 1.0,
        Mode::Measure => 1.0 / qf,
    };
    let mult = (q as u64 - 1) / 2;
    let entries = vec![
        zero_entry(),
        AnalyticEigenvalue { order: 1, value: scale * (5.0 + 3.0 * qf.sqrt()) / 4.0, multiplicity: mult },
        AnalyticEigenvalue { order: 2, value: scale * (5.0 - 3.0 * qf.sqrt()) / 4.0, multiplicity: mult },
    ];
    Ok(OracleSpectrum {
        space: format!("paley{{{q}}}"),
        entries,
        truncation_order: 2,
        tail_estimate: None,
        one_dim_kernel: true,
        point_count: Some(q as u64),
    })
}

/// `(3√q − 5)(q − 1)/8`, the matrix-mode negative trace.
pub fn paley_negative_trace(q: usize) -> f64 {
    let qf = q as f64;
    (3.0 * qf.sqrt() - 5.0) * (qf - 1.0) / 8.0
}

/// Nonzero spectrum of a product: the multiset union of the factors'
/// nonzero spectra. Both factors must have a one-dimensional kernel.
pub fn product_spectrum(a: &OracleSpectrum, b: &OracleSpectrum) -> Result<OracleSpectrum> {
    if !a.one_dim_kernel || !b.one_dim_kernel {
        return Err(Error::KernelAssumptionUnmet);
    }
    let mut nonzero: Vec<AnalyticEigenvalue> = a.nonzero().chain(b.nonzero()).copied().collect();
    nonzero.sort_by(|x, y| x.order.cmp(&y.order).then(y.value.total_cmp(&x.value)));
    let point_count = a.point_count.zip(b.point_count).map(|(x, y)| x * y);
    let nonzero_count: u64 = nonzero.iter().map(|e| e.multiplicity).sum();
    let zero_mult = point_count.map_or(1, |p| p - nonzero_count);
    let mut entries = Vec::with_capacity(nonzero.len() + 1);
    if zero_mult > 0 {
        entries.push(AnalyticEigenvalue { order: 0, value: 0.0, multiplicity: zero_mult });
    }
    entries.extend(nonzero);
    let tail_estimate = match (a.tail_estimate, b.tail_estimate) {
        (None, None) => None,
        (x, y) => Some(x.unwrap_or(0.0) + y.unwrap_or(0.0)),
    };
    Ok(OracleSpectrum {
        space: format!("{}x{}", a.space, b.space),
        entries,
        truncation_order: a.truncation_order.max(b.truncation_order),
        tail_estimate,
        one_dim_kernel: zero_mult == 1,
        point_count,
    })
}

/// `factors`-fold product of truncated circle spectra.
pub fn torus_spectrum(factors: usize, max_order: usize) -> Result<OracleSpectrum> {
    if factors == 0 {
        return Err(Error::InvalidSpec("torus needs at least one factor".into()));
    }
    let circle = circle_spectrum(max_order)?;
    let mut out = circle.clone();
    for _ in 1..factors {
        out = product_spectrum(&out, &circle)?;
    }
    out.space = format!("torus{{{factors}}}");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_leading_entries() {
        let c = circle_spectrum(3).unwrap();
        let vals: Vec<f64> = c.nonzero().map(|e| e.value).collect();
        assert_eq!(vals, vec![1.0, -0.25, 1.0 / 9.0]);
        assert!(c.nonzero().all(|e| e.multiplicity == 2));
    }

    #[test]
    fn circle_negative_trace_within_tail() {
        let c = circle_spectrum(200).unwrap();
        let err = PI * PI / 12.0 - c.negative_trace();
        assert!(err > 0.0);
        assert!((err - circle_negative_trace_tail(200)).abs() < 1e-14);
    }

    #[test]
    fn hexagon_closed_form() {
        let p = polygon_spectrum(1).unwrap();
        let v: Vec<f64> = p.nonzero().map(|e| e.value).collect();
        let pi2 = PI * PI;
        assert!((v[0] - 2.0 * pi2 / 3.0).abs() < 1e-13);
        assert!((v[1] + 2.0 * pi2 / 9.0).abs() < 1e-13);
        assert!((p.negative_trace() - 4.0 * pi2 / 9.0).abs() < 1e-13);
        assert!((polygon_negative_trace(1) - 4.0 * pi2 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn paley_entries() {
        let p = paley_spectrum(13, Mode::Matrix).unwrap();
        assert!((p.negative_trace() - paley_negative_trace(13)).abs() < 1e-12);
        assert!(matches!(paley_spectrum(11, Mode::Matrix), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn product_with_point_is_identity() {
        let p = polygon_spectrum(1).unwrap();
        let point = OracleSpectrum {
            space: "point".into(),
            entries: vec![zero_entry()],
            truncation_order: 0,
            tail_estimate: None,
            one_dim_kernel: true,
            point_count: Some(1),
        };
        let prod = product_spectrum(&p, &point).unwrap();
        assert_eq!(prod.nonzero_multiset(), p.nonzero_multiset());
        assert_eq!(prod.entries[0].multiplicity, 1);
    }

    #[test]
    fn product_needs_simple_kernel() {
        let mut p = polygon_spectrum(1).unwrap();
        p.one_dim_kernel = false;
        assert!(matches!(product_spectrum(&p, &p), Err(Error::KernelAssumptionUnmet)));
    }

    #[test]
    fn torus_negative_trace_doubles() {
        let t = torus_spectrum(2, 50).unwrap();
        let c = circle_spectrum(50).unwrap();
        assert!((t.negative_trace() - 2.0 * c.negative_trace()).abs() < 1e-14);
    }
}
