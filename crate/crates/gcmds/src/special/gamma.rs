use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use statrs::function::gamma::ln_gamma;

/// `ln n!!` for odd `n`: `n!! = 2^{(n+1)/2} Γ(n/2 + 1) / √π`.
pub fn ln_double_factorial(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let x = n as f64;
    if n % 2 == 1 {
        0.5 * (x + 1.0) * 2f64.ln() + ln_gamma(0.5 * x + 1.0) - 0.5 * PI.ln()
    } else {
        0.5 * x * 2f64.ln() + ln_gamma(0.5 * x + 1.0)
    }
}

/// `ln |S^{d−1}| = ln 2 + (d/2) ln π − ln Γ(d/2)`.
pub fn ln_sphere_area(d: usize) -> f64 {
    assert!(d >= 2, "sphere_area needs d >= 2");
    let h = 0.5 * d as f64;
    2f64.ln() + h * PI.ln() - ln_gamma(h)
}

/// Surface area of the unit sphere in ℝᵈ.
pub fn sphere_area(d: usize) -> f64 {
    ln_sphere_area(d).exp()
}

/// `N_{n,d} = (2n+d−2)(n+d−3)! / (n!(d−2)!)`, the number of independent
/// degree-`n` spherical harmonics on S^{d−1}.
pub fn harmonic_dim(n: usize, d: usize) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidSpec(format!("harmonic_dim needs d >= 2, got {d}")));
    }
    if n == 0 {
        return Ok(1);
    }
    if harmonic_dim_f64(n, d) > 1.8e19 {
        return Err(Error::Overflow(format!("N_{{{n},{d}}} exceeds u64")));
    }
    // N = (2n+d−2)/(n+d−2) · C(n+d−2, n); the binomial is built incrementally and stays exact.
    let mut binom: u128 = 1;
    for i in 1..=(n as u128) {
        binom = binom * ((d as u128) - 2 + i) / i;
    }
    let num = (2 * n + d - 2) as u128 * binom;
    let den = (n + d - 2) as u128;
    u64::try_from(num / den).map_err(|_| Error::Overflow(format!("N_{{{n},{d}}} exceeds u64")))
}

/// `N_{n,d}` as a float, evaluated in log space.
pub fn harmonic_dim_f64(n: usize, d: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if d == 2 {
        return 2.0;
    }
    let (nf, df) = (n as f64, d as f64);
    ((2.0 * nf + df - 2.0).ln() + ln_gamma(nf + df - 2.0) - ln_gamma(nf + 1.0) - ln_gamma(df - 1.0)).exp()
}
