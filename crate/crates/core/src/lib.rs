//! Joint selection of PCA ranks and the number of correlated signals
//! between two data channels, for small sample sizes.
//!
//! ```no_run
//! use ccorder::{detect, DataMatrixPair, DetectorConfig, Method};
//! # fn pair() -> DataMatrixPair { unimplemented!() }
//! let decision = detect(&pair(), &DetectorConfig::new(Method::MaxMinHt))?;
//! println!("d = {} at ranks ({}, {})", decision.d_hat, decision.r_x_star, decision.r_y_star);
//! # Ok::<(), ccorder::Error>(())
//! ```

pub mod cca;
pub mod datagen;
pub mod detectors;
pub mod error;
pub mod harness;
pub mod stats;

pub use cca::{
    economy_svd, full_canonical_correlations, pca_reduce, reduced_canonical_correlations,
    spectrum_table, CMatrix, CanonicalSpectrum, Complex64, DataMatrixPair, SpectrumTable, SvdCache,
};
pub use datagen::{generate, generate_keyed, ScenarioConfig, StreamKey};
pub use detectors::{baseline, detect, DetectorConfig, DetectorDecision, Method, Selection};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentSpec, MonteCarloReport};
