//! Mutually unbiased bases and the simulated projective measurements.
//!
//! SLM1 prepares the state. Its first diffraction order is imaged onto SLM2,
//! which displays the conjugated projector. A point detector on axis in the
//! Fourier plane of SLM2 then reads `|Σ_ℓ c_ℓ conj(b_ℓ)|²`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::flicker::FlickerSpec;
use crate::grating::{
    encode_state, first_order_coefficient_of, EncodedState, EncodingOptions, Method,
};
use crate::linalg::{inner, C64};
use crate::state::StateVector;

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// A complete set of `D + 1` mutually unbiased bases.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    dim: usize,
    bases: Vec<Vec<StateVector>>,
}

impl ProjectorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[Vec<StateVector>] {
        &self.bases
    }

    /// `(basis, outcome, vector)` in basis-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &StateVector)> {
        self.bases
            .iter()
            .enumerate()
            .flat_map(|(j, b)| b.iter().enumerate().map(move |(k, v)| (j, k, v)))
    }

    pub fn len(&self) -> usize {
        self.bases.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// MUBs for prime `D`: the computational basis plus, for odd `D`, the `D`
/// bases `(1/√D) Σ_n ω^{jn² + kn}|n⟩` with `ω = e^{2πi/D}`. For `D = 2` they
/// are the Pauli X and Y eigenbases.
pub fn mub_bases(dim: usize) -> Result<ProjectorSet> {
    if !is_prime(dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let mut bases = Vec::with_capacity(dim + 1);
    bases.push(
        (0..dim)
            .map(|k| StateVector::basis(dim, k))
            .collect::<Result<Vec<_>>>()?,
    );
    if dim == 2 {
        let h = FRAC_1_SQRT_2;
        let one = C64::new(h, 0.0);
        for (a, b) in [
            ([one, C64::new(h, 0.0)], [one, C64::new(-h, 0.0)]),
            ([one, C64::new(0.0, h)], [one, C64::new(0.0, -h)]),
        ] {
            bases.push(alloc::vec![
                StateVector::from_normalized(a.to_vec())?,
                StateVector::from_normalized(b.to_vec())?,
            ]);
        }
    } else {
        let amp = 1.0 / (dim as f64).sqrt();
        for j in 0..dim {
            let basis = (0..dim)
                .map(|k| {
                    let coeffs = (0..dim)
                        .map(|n| {
                            let e = (j * n * n + k * n) % dim;
                            C64::from_polar(amp, TAU * e as f64 / dim as f64)
                        })
                        .collect();
                    StateVector::from_normalized(coeffs)
                })
                .collect::<Result<Vec<_>>>()?;
            bases.push(basis);
        }
    }
    Ok(ProjectorSet { dim, bases })
}

/// Normalized count rate of one projector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub basis: usize,
    pub outcome: usize,
    pub frequency: f64,
}

/// On-axis intensity `|Σ_ℓ c_ℓ conj(b_ℓ)|²` behind SLM2.
pub fn detector_intensity(prepared: &[C64], projector: &StateVector) -> Result<f64> {
    if prepared.len() != projector.dim() {
        return Err(Error::DimensionMismatch {
            expected: projector.dim(),
            found: prepared.len(),
        });
    }
    Ok(inner(projector.coeffs(), prepared).norm_sqr())
}

/// Exact Born-rule frequencies `|⟨b_jk|ψ⟩|²`.
pub fn born_frequencies(state: &StateVector, projectors: &ProjectorSet) -> Vec<MeasurementRecord> {
    projectors
        .iter()
        .map(|(basis, outcome, b)| MeasurementRecord {
            basis,
            outcome,
            frequency: b.overlap_sqr(state),
        })
        .collect()
}

/// How SLM2 renders the conjugated projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Slm2Model {
    /// Exact complex modulation.
    #[default]
    Ideal,
    /// Same blazed-grating GD encoding and quantization as SLM1, flicker-free.
    Quantized,
}

/// Poisson counting noise on the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoise {
    /// Mean counts per projector for a uniform distribution.
    pub counts_per_projector: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographySetup {
    pub encoding: EncodingOptions,
    pub flicker: FlickerSpec,
    pub slm2: Slm2Model,
    pub shot_noise: Option<ShotNoise>,
}

impl TomographySetup {
    /// Ideal SLM2, no counting noise.
    pub fn new(encoding: EncodingOptions, flicker: FlickerSpec) -> Self {
        Self {
            encoding,
            flicker,
            slm2: Slm2Model::Ideal,
            shot_noise: None,
        }
    }
}

fn slm2_weights(projectors: &ProjectorSet, setup: &TomographySetup) -> Result<Vec<Vec<C64>>> {
    projectors
        .iter()
        .map(|(_, _, b)| match setup.slm2 {
            Slm2Model::Ideal => Ok(b.conj().coeffs().to_vec()),
            Slm2Model::Quantized => {
                let enc = encode_state(&b.conj(), Method::GratingDisplacement, &setup.encoding)?;
                let d = enc.coefficients();
                let n = d.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                Ok(d.into_iter().map(|x| x / n).collect())
            }
        })
        .collect()
}

/// Run the prepare–project–detect cycle for an encoded state.
///
/// Intensities are averaged over the flicker time samples in a fixed order,
/// optionally Poisson-sampled, then normalized within each basis.
pub fn measure_encoded(
    encoded: &EncodedState,
    projectors: &ProjectorSet,
    setup: &TomographySetup,
) -> Result<Vec<MeasurementRecord>> {
    if encoded.dim() != projectors.dim() {
        return Err(Error::DimensionMismatch {
            expected: projectors.dim(),
            found: encoded.dim(),
        });
    }
    let weights = slm2_weights(projectors, setup)?;
    let masks = encoded.masks();
    let times = setup.flicker.times();
    let mut intensity = alloc::vec![0.0f64; weights.len()];
    let mut coeffs = alloc::vec![C64::new(0.0, 0.0); masks.len()];
    for &t in &times {
        let factor = setup.flicker.factor(t);
        for (c, m) in coeffs.iter_mut().zip(&masks) {
            *c = first_order_coefficient_of(m.samples(), factor);
        }
        for (acc, w) in intensity.iter_mut().zip(&weights) {
            let amp: C64 = coeffs.iter().zip(w).map(|(c, w)| c * w).sum();
            *acc += amp.norm_sqr();
        }
    }
    let inv_t = 1.0 / times.len() as f64;
    intensity.iter_mut().for_each(|x| *x *= inv_t);

    if let Some(noise) = setup.shot_noise {
        apply_shot_noise(&mut intensity, projectors, noise);
    }

    let mut records = Vec::with_capacity(intensity.len());
    let mut offset = 0;
    for (j, basis) in projectors.bases().iter().enumerate() {
        let slice = &intensity[offset..offset + basis.len()];
        let total: f64 = slice.iter().sum();
        for (k, &v) in slice.iter().enumerate() {
            let frequency = if total > 0.0 {
                v / total
            } else {
                1.0 / basis.len() as f64
            };
            records.push(MeasurementRecord {
                basis: j,
                outcome: k,
                frequency,
            });
        }
        offset += basis.len();
    }
    Ok(records)
}

fn apply_shot_noise(intensity: &mut [f64], projectors: &ProjectorSet, noise: ShotNoise) {
    let mut rng = ChaCha20Rng::seed_from_u64(noise.seed);
    let mut offset = 0;
    for basis in projectors.bases() {
        let slice = &mut intensity[offset..offset + basis.len()];
        let total: f64 = slice.iter().sum();
        let scale = if total > 0.0 {
            noise.counts_per_projector * basis.len() as f64 / total
        } else {
            0.0
        };
        for v in slice.iter_mut() {
            let mean = *v * scale;
            *v = match Poisson::new(mean) {
                Ok(dist) if mean > 0.0 => dist.sample(&mut rng),
                _ => 0.0,
            };
        }
        offset += basis.len();
    }
}

/// Encode `target` with `method` and measure it in every MUB.
pub fn simulate_tomography(
    target: &StateVector,
    method: Method,
    projectors: &ProjectorSet,
    setup: &TomographySetup,
) -> Result<Vec<MeasurementRecord>> {
    let encoded = encode_state(target, method, &setup.encoding)?;
    measure_encoded(&encoded, projectors, setup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::normalize_state;

    fn max_abs_overlap_defect(set: &ProjectorSet) -> (f64, f64) {
        let d = set.dim() as f64;
        let vecs: Vec<(usize, &StateVector)> = set.iter().map(|(j, _, v)| (j, v)).collect();
        let (mut intra, mut cross) = (0.0f64, 0.0f64);
        for (a, (ja, va)) in vecs.iter().enumerate() {
            for (b, (jb, vb)) in vecs.iter().enumerate() {
                let o = va.overlap_sqr(vb);
                if ja == jb {
                    let want = if a == b { 1.0 } else { 0.0 };
                    intra = intra.max((o - want).abs());
                } else {
                    cross = cross.max((o - 1.0 / d).abs());
                }
            }
        }
        (intra, cross)
    }

    #[test]
    fn mub_sizes_and_overlaps() {
        for (d, n_bases) in [(2usize, 3usize), (3, 4), (5, 6), (7, 8)] {
            let set = mub_bases(d).unwrap();
            assert_eq!(set.bases().len(), n_bases);
            assert_eq!(set.len(), d * (d + 1));
            let (intra, cross) = max_abs_overlap_defect(&set);
            assert!(intra < 1e-12 && cross < 1e-12, "D={d}");
        }
    }

    #[test]
    fn mub_rejects_composite() {
        for d in [0usize, 1, 4, 6, 9] {
            assert_eq!(mub_bases(d), Err(Error::UnsupportedDimension(d)));
        }
    }

    #[test]
    fn detector_examples() {
        let zero = StateVector::basis(2, 0).unwrap();
        let one = StateVector::basis(2, 1).unwrap();
        let plus = normalize_state(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!((detector_intensity(zero.coeffs(), &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(detector_intensity(zero.coeffs(), &one).unwrap().abs() < 1e-15);
        assert!((detector_intensity(plus.coeffs(), &zero).unwrap() - 0.5).abs() < 1e-15);
        assert!(detector_intensity(&[C64::new(1.0, 0.0)], &zero).is_err());
    }

    #[test]
    fn basis_state_frequencies() {
        let set = mub_bases(2).unwrap();
        let setup = TomographySetup::new(EncodingOptions::with_period(16), FlickerSpec::none());
        let zero = StateVector::basis(2, 0).unwrap();
        let rec = simulate_tomography(&zero, Method::GratingDisplacement, &set, &setup).unwrap();
        assert!((rec[0].frequency - 1.0).abs() < 1e-6);
        assert!(rec[1].frequency.abs() < 1e-6);
    }

    #[test]
    fn plus_state_frequencies() {
        let set = mub_bases(2).unwrap();
        let setup = TomographySetup::new(EncodingOptions::with_period(16), FlickerSpec::none());
        let plus = normalize_state(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let bound = (core::f64::consts::PI / 16.0).powi(2);
        for method in Method::ALL {
            let rec = simulate_tomography(&plus, method, &set, &setup).unwrap();
            assert!((rec[2].frequency - 1.0).abs() <= bound);
            assert!(rec[3].frequency <= bound);
        }
    }

    #[test]
    fn frequencies_normalized_per_basis() {
        let set = mub_bases(3).unwrap();
        let mut setup = TomographySetup::new(
            EncodingOptions::with_period(8),
            FlickerSpec::new(0.6, 16).unwrap(),
        );
        setup.shot_noise = Some(ShotNoise {
            counts_per_projector: 50.0,
            seed: 3,
        });
        let s = normalize_state(&[C64::new(0.2, 0.1), C64::new(-0.5, 0.3), C64::new(0.1, 0.8)])
            .unwrap();
        for slm2 in [Slm2Model::Ideal, Slm2Model::Quantized] {
            setup.slm2 = slm2;
            let rec = simulate_tomography(&s, Method::PhaseAddition, &set, &setup).unwrap();
            for j in 0..4 {
                let sum: f64 = rec
                    .iter()
                    .filter(|r| r.basis == j)
                    .map(|r| r.frequency)
                    .sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
            assert!(rec.iter().all(|r| r.frequency >= 0.0));
        }
    }
}
