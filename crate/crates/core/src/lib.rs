//! Correlation spectra, threshold networks and multifractal analysis for
//! panels of financial index prices.
//!
//! The modules follow the pipeline: [`panel`] loads and aligns prices and
//! derives returns, [`spectra`] builds correlation matrices and compares
//! their eigenvalues with random-matrix bounds, [`graphnet`] turns them into
//! threshold networks and spanning trees, and [`mfdfa`] estimates
//! generalized Hurst exponents against surrogate baselines.

pub mod error;
pub mod graphnet;
pub mod linalg;
pub mod mfdfa;
pub mod panel;
pub mod spectra;

pub use error::{Error, Result};
pub use graphnet::{GraphMetrics, Mst, ThresholdGraph};
pub use linalg::{Matrix, SymmetricEigen};
pub use mfdfa::{FluctuationTable, HqCurve, MfdfaConfig, SurrogateSpec};
pub use panel::{DateRange, PricePanel, RawSeries, ReturnPanel};
pub use spectra::{CorrMatrix, MpLaw, Spectrum};
