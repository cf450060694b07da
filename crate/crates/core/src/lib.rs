//! Spectra of k-circulant matrices: exact eigenvalues through the DFT,
//! limiting spectral distributions and the Gumbel law of the spectral radius.

pub mod error;
pub mod export;
pub mod extremes;
pub mod limits;
pub mod montecarlo;
pub mod numtheory;
pub mod quad;
pub mod seeds;
pub mod spectral;

pub use error::{Error, Result};
pub use extremes::{gumbel_cdf, kbar, kbar_asymptotic, normalization, GumbelNormalization};
pub use limits::{esd, lsd_radial_cdf, lsd_sample, EsdSample, LsdLaw};
pub use montecarlo::{
    run_experiment, run_gumbel_experiment, run_lsd_experiment, ExperimentConfig, ExperimentKind,
    ExperimentReport, InputLaw, Tolerances,
};
pub use numtheory::{
    classify_regime, decompose, eigen_partition, EigenPartition, KCirculantParams, Proportion,
    Regime, RegimeCase,
};
pub use spectral::{
    build_matrix, formula_spectrum, InputSequence, KCirculant, SpectrumResult,
};
