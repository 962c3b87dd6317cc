//! Generalized classical multidimensional scaling on finite metric measure spaces.
//!
//! A space is a distance matrix together with a full-support probability
//! vector. The centered kernel is built in one of two conventions: the
//! classical matrix convention (uniform, unnormalized) or the operator
//! convention on `L²(μ)`. Its positive spectrum gives the embedding.
//!
//! Besides the finite pipeline the crate carries closed-form and
//! quadrature spectra for the circle, spheres, tori, regular polygons and
//! Paley graphs, and per-coupling checks of the Gromov–Wasserstein
//! stability chain.

pub mod embedding;
pub mod error;
pub mod kernel;
pub mod numeric;
pub mod oracle;
pub mod space;
pub mod special;
pub mod spectral;
pub mod stability;

pub use embedding::{
    cloud_embedding, cloud_spectrum, distortion, embed, embedded_distances,
    linf_distortion_bound_check, thickness, Embedding, LinfCheck, MetricMeasure,
};
pub use error::{Error, Result};
pub use kernel::{
    centered_kernel, diam_p, is_euclidean, two_point_homogeneous_kernel, CenteredKernel,
    Euclidicity, Mode,
};
pub use space::generate::{generate, product_space, GeneratorSpec};
pub use space::io::{load_space, InputFormat};
pub use space::{shortest_path_metric, FiniteMmSpace, PointCloud, WeightedGraph};
pub use spectral::{
    eigendecompose, negative_trace, psd_project, trace_norm, PsdKernel, Spectrum,
};
