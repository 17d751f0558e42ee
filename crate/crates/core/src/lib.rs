//! Squeezing eigenmodes of twin beams from parametric downconversion.

pub mod config;
pub mod dispersion;
pub mod error;
pub mod expm;
pub mod export;
pub mod linalg;
pub mod mehler;
pub mod pdc;
pub mod pipeline;
pub mod symplectic;
pub mod takagi;
pub mod twinbeam;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use symplectic::{
    bloch_messiah, compose, evaluate_wigner, exponentiate_generator, mode_wise_squeezer,
    passive_transform, propagate_state, two_mode_squeezer, BlochMessiahFactors, GaussianState,
    GeneratorMatrix, SymplecticMatrix,
};
pub use takagi::{takagi, takagi_general, takagi_real_symmetric, takagi_residual, TakagiFactors};
pub use config::{parse_config, parse_config_str, GridConfig, OutputConfig, OutputFormat, PipelineKind, RunConfig};
pub use dispersion::{refractive_index, Polarization, Sellmeier};
pub use export::{export_matrix_heatmap, export_spectrum_csv, export_spectrum_json, ManifestEntry};
pub use mehler::{
    analytic_schmidt_mode, characteristic_times, evaluate_kernel_lhs, evaluate_kernel_sum, gaussian_model_params,
    hermite_gauss, mehler_factors, mode_overlap, CharacteristicTimes, GaussianModelParams, MehlerFactors,
};
pub use pdc::{
    build_frequency_grid, build_squeezing_matrix, extract_jsa, find_central_detuning, CrystalConfig, FrequencyGrid,
    PumpConfig, SqueezingMatrixPhysical,
};
pub use pipeline::{evaluate, run_pipeline, run_sweep, RunReport};
pub use twinbeam::{
    associated_spectral, fit_geometric, pair_eigenvalues, schmidt_from_jsa, schmidt_number, JointSpectralAmplitude,
    PairingReport, SchmidtDecomposition, SqueezingSpectrum,
};
