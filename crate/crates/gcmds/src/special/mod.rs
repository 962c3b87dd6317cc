//! Special functions and quadrature for zonal integrals on spheres.

pub mod gamma;
pub mod legendre;
pub mod quadrature;

pub use gamma::{harmonic_dim, harmonic_dim_f64, ln_double_factorial, ln_gamma, ln_sphere_area, sphere_area};
pub use legendre::{legendre, LegendreEvaluator};
pub use quadrature::{
    gauss_legendre, integrate, integrate_polar, integrate_polar_many, integrate_zonal, QuadratureRule,
};
