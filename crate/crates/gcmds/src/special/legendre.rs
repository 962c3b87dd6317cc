use crate::error::{Error, Result};

/// Slack allowed outside [−1, 1] before an argument is rejected.
pub const DOMAIN_SLACK: f64 = 1e-14;

/// `P_{n,d}(t)` by the three-term recurrence
/// `(n+d−2) P_{n+1} = (2n+d−2) t P_n − n P_{n−1}`.
pub fn legendre(n: usize, d: usize, t: f64) -> Result<f64> {
    Ok(*LegendreEvaluator::new(d, n)?.eval_all(t)?.last().expect("max_order + 1 values"))
}

/// Scalar recurrence without allocation or domain check.
pub(crate) fn legendre_unchecked(n: usize, d: usize, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let df = d as f64;
    let (mut p0, mut p1) = (1.0, t);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + df - 2.0) * t * p1 - kf * p0) / (kf + df - 2.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Evaluates `P_{0,d}, …, P_{max_order,d}` at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegendreEvaluator {
    d: usize,
    max_order: usize,
}

impl LegendreEvaluator {
    pub fn new(d: usize, max_order: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSpec(format!("Legendre polynomials need d >= 2, got {d}")));
        }
        Ok(Self { d, max_order })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn eval_all(&self, t: f64) -> Result<Vec<f64>> {
        if t.is_nan() || t.abs() > 1.0 + DOMAIN_SLACK {
            return Err(Error::Domain { t });
        }
        let t = t.clamp(-1.0, 1.0);
        let mut out = Vec::with_capacity(self.max_order + 1);
        self.fill(t, &mut out);
        Ok(out)
    }

    /// Recurrence without the domain check; `out` is cleared first.
    pub(crate) fn fill(&self, t: f64, out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        if self.max_order == 0 {
            return;
        }
        out.push(t);
        let d = self.d as f64;
        for n in 1..self.max_order {
            let nf = n as f64;
            let next = ((2.0 * nf + d - 2.0) * t * out[n] - nf * out[n - 1]) / (nf + d - 2.0);
            out.push(next);
        }
    }
}
