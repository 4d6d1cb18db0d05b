//! Spartan (SSRF) and Bessel-Lommel radial covariance models.
//!
//! The crate provides closed-form covariances, length-scale spectra, an
//! independent spectral-integral oracle used to validate every closed form,
//! and an FFT spectral simulator for two-dimensional Gaussian fields.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference constants are kept exactly as published.
#![allow(clippy::excessive_precision)]

pub mod covariance;
pub mod error;
pub mod models;
pub mod oracle;
pub mod scales;
pub mod simulate;
pub mod specfun;
pub mod table;

pub use error::{Error, Result};
pub use models::{BlParams, Family, Model, ParamDoc, Regime, RootPair, SsrfParams};
pub use oracle::{QuadratureConfig, TailStrategy};
pub use scales::{CorrSpectrum, SpectrumMethod, SpectrumQuery};
pub use simulate::{EmpiricalStats, FieldRealization, SeedSpec};
pub use specfun::ComplexValue;
pub use table::RadialTable;
