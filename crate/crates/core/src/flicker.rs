//! Temporal phase flicker of an LCoS display.
//!
//! The whole device follows one zero-mean triangular waveform. Its height
//! is proportional to the addressed phase, so pixel value `φ` is displayed as
//! `φ·(1 + a·w(t))`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_range, Error, Result};
use crate::grating::PhaseMask;

/// Largest flicker amplitude accepted, as a fraction of the addressed phase.
pub const MAX_AMPLITUDE: f64 = 1.2;
/// Default number of time samples per frame.
pub const DEFAULT_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlickerSpec {
    amplitude: f64,
    samples_per_frame: usize,
}

impl FlickerSpec {
    pub fn new(amplitude: f64, samples_per_frame: usize) -> Result<Self> {
        check_range("flicker amplitude", amplitude, 0.0, MAX_AMPLITUDE)?;
        if samples_per_frame == 0 {
            return Err(Error::OutOfRange {
                name: "samples_per_frame",
                value: 0.0,
                min: 1.0,
                max: f64::INFINITY,
            });
        }
        Ok(Self {
            amplitude,
            samples_per_frame,
        })
    }

    /// No flicker, one time sample.
    pub fn none() -> Self {
        Self {
            amplitude: 0.0,
            samples_per_frame: 1,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn samples_per_frame(&self) -> usize {
        self.samples_per_frame
    }

    /// Multiplier `1 + a·w(t)` applied to every displayed phase at time `t`.
    pub fn factor(&self, t_frac: f64) -> f64 {
        1.0 + self.amplitude * triangular_wave(t_frac)
    }

    pub fn times(&self) -> Vec<f64> {
        time_samples(self.samples_per_frame)
    }
}

/// Period-1 triangle: −1 at `t = 0`, +1 at `t = ½`, back to −1 at `t = 1`.
pub fn triangular_wave(t_frac: f64) -> f64 {
    let t = t_frac - t_frac.floor();
    if t < 0.5 {
        4.0 * t - 1.0
    } else {
        3.0 - 4.0 * t
    }
}

/// Mask displayed at time `t_frac`.
pub fn instantaneous_mask(mask: &PhaseMask, spec: &FlickerSpec, t_frac: f64) -> PhaseMask {
    mask.scaled(spec.factor(t_frac))
}

/// `{k/T : k = 0..T}`
pub fn time_samples(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 / count as f64).collect()
}
