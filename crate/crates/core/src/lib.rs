//! Joint estimation of the four phases of a two-mode U(2) network probed by a
//! displaced two-mode squeezed vacuum and read out by two homodyne detectors.
//!
//! The crate covers the forward model (Gaussian phase-space propagation and
//! the closed-form output statistics), the classical Fisher information with
//! its asymptotic coefficient matrices and Cramér–Rao bounds, and
//! maximum-likelihood estimation with seeded Monte Carlo campaigns.

// NaN inputs must fail the `!(x > 0)` style guards, and index loops mirror
// the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimation;
pub mod fisher;
pub mod linalg;
pub mod model;
pub mod simplex;

pub use error::{Error, Result};
pub use estimation::{
    fit_phi1_only, log_likelihood, mle_fit, mle_fit_with, monte_carlo, run_monte_carlo,
    sample_outcomes, score, simulate, EstimationResult, FitOptions, MonteCarloConfig,
    MonteCarloSummary, ParameterSummary, SampleSet, SeedMode,
};
pub use fisher::{
    coefficient_mu, coefficient_sigma, coefficient_total, crb, fisher_matrix, singularity_check,
    CoefficientMatrices, CrbReport, FisherSplit, Singularity, SingularityReport,
};
pub use model::{
    build_unitary, closed_form_stats, homodyne_stats, mirror_equivalent, pipeline_stats,
    probe_state, propagate, symplectic_of, tuned_settings, GaussianState, HomodyneSettings,
    NetworkParams, OperatingPoint, OutputStatistics, ProbeConfig, ResourceSplit, TuningConstants,
};
