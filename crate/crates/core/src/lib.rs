//! Spatial-qudit state preparation on a single phase-only SLM.
//!
//! A `D`-dimensional state `Σ β̃_ℓ |ℓ⟩` is written as one blazed grating per
//! slit. The depth of each grating sets `|β̃_ℓ|`. The phase is set either by
//! adding a constant to the grating ([`Method::PhaseAddition`]) or by shifting
//! it laterally ([`Method::GratingDisplacement`]). The crate simulates the
//! triangular flicker of LCoS displays and the mutually-unbiased-basis
//! measurements behind a second SLM. It reconstructs the prepared state by
//! maximum likelihood and scores it by fidelity.
//!
//! The crate is `#![no_std]` and only needs `alloc`. Float math comes from
//! `num_traits::Float`; those imports go unused whenever std is linked.

#![no_std]

extern crate alloc;

pub mod error;
pub mod flicker;
pub mod grating;
pub mod linalg;
pub mod measurement;
pub mod pipeline;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use flicker::{instantaneous_mask, time_samples, triangular_wave, FlickerSpec};
pub use grating::{
    build_blazed_mask, depth_for_amplitude, displacement_for_phase, encode_state,
    first_order_coefficient, first_order_efficiency, EncodedState, EncodingOptions, GratingSpec,
    Method, PhaseMask,
};
pub use linalg::{CMatrix, C64};
pub use measurement::{
    born_frequencies, detector_intensity, mub_bases, simulate_tomography, MeasurementRecord,
    ProjectorSet, ShotNoise, Slm2Model, TomographySetup,
};
pub use pipeline::{decoded_state, run_state, PipelineConfig, StateOutcome};
pub use state::{
    bloch_state, density_from_pure, fidelity, normalize_state, sample_bloch_grid, sample_haar,
    ApertureGeometry, BlochAngles, DensityMatrix, StateVector,
};
pub use tomography::{mle_reconstruct, MleConfig, MleResult};
