//! Multi-fidelity surrogate: projection of reference trajectories,
//! predictor-corrector model, dataset pipeline, and training loops
//! that differentiate through the reduced-order solver.

pub mod adjoint;
pub mod dataset;
pub mod model;
pub mod projection;

pub use dataset::{
    dataset_hash, generate_sbe_dataset, generate_srs_dataset, load_dataset, save_dataset,
    DatasetEpisode, DatasetHeader, MultiFidelityDataset,
};
pub use adjoint::{
    sbe_rhs_vjp, sbe_rk4_tape, sbe_rk4_vjp, srs_lf_rhs_vjp, srs_lf_step_tape, srs_lf_step_vjp,
    SbeBootstrapTape, SrsStepTape,
};
pub use model::{
    load_hybrid_model, save_hybrid_model, CorrectionMode, FeatureStats, HybridDynamics,
    HybridModel, HybridState, HybridStepOut,
};
pub use projection::{project_sbe, project_srs, srs_means_to_vec, srs_vec_to_means, ProjectionKind};
