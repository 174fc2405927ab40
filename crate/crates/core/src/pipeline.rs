//! One target state through encode → flicker-averaged tomography → MLE → fidelity.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grating::{encode_state, EncodedState, Method};
use crate::measurement::{measure_encoded, MeasurementRecord, ProjectorSet, TomographySetup};
use crate::state::{fidelity, StateVector};
use crate::tomography::{mle_reconstruct, MleConfig, MleResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub setup: TomographySetup,
    pub mle: MleConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateOutcome {
    pub fidelity: f64,
    pub encoded: EncodedState,
    pub records: Vec<MeasurementRecord>,
    pub mle: MleResult,
}

pub fn run_state(
    target: &StateVector,
    method: Method,
    projectors: &ProjectorSet,
    config: &PipelineConfig,
) -> Result<StateOutcome> {
    if target.dim() != projectors.dim() {
        return Err(Error::DimensionMismatch {
            expected: projectors.dim(),
            found: target.dim(),
        });
    }
    let encoded = encode_state(target, method, &config.setup.encoding)?;
    let records = measure_encoded(&encoded, projectors, &config.setup)?;
    let mle = mle_reconstruct(&records, projectors, &config.mle)?;
    let fidelity = fidelity(target, &mle.rho)?;
    Ok(StateOutcome {
        fidelity,
        encoded,
        records,
        mle,
    })
}

/// State actually written by a flicker-free encoding: the normalized
/// first-order coefficients of the slit gratings.
pub fn decoded_state(encoded: &EncodedState) -> Result<StateVector> {
    StateVector::normalize(&encoded.coefficients())
}
