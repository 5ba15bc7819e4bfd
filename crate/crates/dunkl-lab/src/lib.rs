//! Numerical laboratory for rational Dunkl analysis.
//!
//! The crate implements, at desk scale, the operators of Dunkl harmonic
//! analysis on `R^N` for a normalized root system with nonnegative
//! multiplicities: the weighted measure `dw`, the Dunkl transform and its
//! inverse, Dunkl translations and convolutions, the heat semigroup and
//! Bessel potentials, smoothly truncated singular integral convolution
//! operators, Calderon-Zygmund decompositions, and the associated maximal
//! functions. Every inequality of the underlying theory that admits a
//! finite-sample formulation (uniform multiplier bounds, weak-type (1,1)
//! constants, Gaussian heat bounds, Cotlar-type domination) is exposed as a
//! verification check that fits constants empirically and reports their
//! stability.
//!
//! Root systems are restricted to products of rank-1 `Z_2` factors, where the
//! one-dimensional Dunkl kernel has a normalized-Bessel closed form and all
//! spectral operators factorize axis by axis.

pub mod geometry;
pub mod spectral;
pub mod quadrature;
pub mod special;

pub use geometry::{reflect, GeometryError, RootSystem};
pub use quadrature::{build_grid, GridFunction, QuadratureError, WeightedGrid};
pub use spectral::{dunkl_kernel, dunkl_kernel_imag, dunkl_operator, SpectralError, SpectralPair};
