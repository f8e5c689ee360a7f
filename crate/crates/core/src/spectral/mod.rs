//! Spectra of finite truncations: eigenvalues, Hausdorff distances, gaps,
//! windowed spectral parts and regularity fits.

mod chain;
mod eigen;
mod fit;
mod gaps;
mod hausdorff;
mod riesz;

pub use chain::{four_step_chain, four_step_chain_filtered, ChainReport, ChainStep, STEP_EXPONENTS};
pub use eigen::{
    eigen_hermitian, eigenvalues_hermitian, hermiticity_defect, operator_norm, EigenDecomposition, SpectrumResult,
    DEFAULT_RESIDUAL_TOL, HERMITIAN_TOL,
};
pub use fit::{holder_fit, spread, HolderFit};
pub use gaps::{
    difference_quotients, find_gaps, track_gap_edge, BulkFilter, EdgeSide, EdgeTrack, Gap, GapList, SweepResult,
};
pub use hausdorff::hausdorff;
pub use riesz::{riesz_project, RieszResult, DEFAULT_QUAD_NODES};
