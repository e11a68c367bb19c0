//! Multiresolution mode decomposition of oscillatory signals.
//!
//! A signal is modelled as a sum of components
//! `f_k(t) = sum_n a_n cos(2 pi n phi_k) s_cn(2 pi N_k phi_k) + b_n sin(...) s_sn(...)`
//! with known phases. [`dsa`] estimates the coefficients and shapes of one
//! component in a single spectral pass; [`rdsa`] repeats it on the running
//! residual to separate several components. [`oracle`] holds the bin-average
//! regression used to cross-check DSA.

pub mod bench;
pub mod dsa;
pub mod error;
pub mod model;
pub mod oracle;
pub mod par;
pub mod rdsa;
pub mod siggen;
pub mod spectral;

pub use dsa::{effective_fundamental, extract_single, run_dsa, DsaContext, DsaOutput, DsaRequest};
pub use error::{MmdError, Result};
pub use model::{
    banded_approximation, normalize_shape, residual_operator, synthesize_mimf, ConvergenceTrace,
    DecompositionResult, MimfExpansion, Parity, PhaseTrack, ScaleTerm, ShapeTable, StopReason, UniformSignal,
};
pub use oracle::{fold, partition_regress, rdbr_extract, well_diff_report, FoldedSamples, WellDiffReport};
pub use rdsa::{convergence_eta, rdsa1, rdsa2, Band, RdsaConfig};
