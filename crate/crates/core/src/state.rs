//! Pure qudit states, density matrices, fidelity and state samplers.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_range, Error, Result};
use crate::linalg::{inner, norm_sqr, CMatrix, C64};

/// Normalization tolerance for [`StateVector`].
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for the Hermitian, trace and positivity checks on [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;

/// Normalized pure state `Σ β̃_ℓ |ℓ⟩` of a `D`-slit spatial qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coeffs: Vec<C64>,
}

impl StateVector {
    /// Normalize raw slit transmissions into a state.
    pub fn normalize(raw: &[C64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidDimension(raw.len()));
        }
        let n2 = norm_sqr(raw);
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::DegenerateState);
        }
        let inv = 1.0 / n2.sqrt();
        Ok(Self {
            coeffs: raw.iter().map(|c| c * inv).collect(),
        })
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k + 1,
            });
        }
        let mut coeffs = alloc::vec![C64::new(0.0, 0.0); dim];
        coeffs[k] = C64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    /// Wrap coefficients that are already normalized (checked to [`NORM_TOL`]).
    pub fn from_normalized(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidDimension(coeffs.len()));
        }
        let n2 = norm_sqr(&coeffs);
        check_range("state norm", n2, 1.0 - NORM_TOL, 1.0 + NORM_TOL)?;
        Ok(Self { coeffs })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap_sqr(&self, other: &Self) -> f64 {
        inner(&self.coeffs, &other.coeffs).norm_sqr()
    }
}

/// Free-function form of [`StateVector::normalize`].
pub fn normalize_state(raw: &[C64]) -> Result<StateVector> {
    StateVector::normalize(raw)
}

/// Physical density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap a matrix.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.dim() < 2 {
            return Err(Error::InvalidDimension(entries.dim()));
        }
        if entries.hermiticity_defect() > DENSITY_TOL {
            return Err(Error::NotADensityMatrix("not Hermitian"));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::NotADensityMatrix("trace differs from 1"));
        }
        let (vals, _) = entries.hermitian_eigen();
        if vals.first().is_some_and(|&v| v < -DENSITY_TOL) {
            return Err(Error::NotADensityMatrix("negative eigenvalue"));
        }
        Ok(Self { entries })
    }

    /// Skip validation; for matrices that are physical by construction.
    pub(crate) fn new_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut m = CMatrix::identity(dim);
        m.scale(C64::new(1.0 / dim as f64, 0.0));
        Ok(Self { entries: m })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.entries.matmul(&self.entries).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.hermitian_eigen().0
    }
}

/// `|ψ⟩⟨ψ|`
pub fn density_from_pure(state: &StateVector) -> DensityMatrix {
    DensityMatrix::new_unchecked(CMatrix::outer(state.coeffs(), state.coeffs()))
}

/// `F = ⟨ψ|ρ|ψ⟩` for a pure target.
pub fn fidelity(target: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if target.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: rho.dim(),
        });
    }
    let f = rho.matrix().expectation(target.coeffs());
    debug_assert!(f.im.abs() < DENSITY_TOL, "complex fidelity {f}");
    Ok(f.re)
}

/// Bloch-sphere coordinates of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

impl BlochAngles {
    /// `theta ∈ [0, π]`, `phi ∈ (−π, π]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, PI)?;
        if !(phi > -PI && phi <= PI) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                min: -PI,
                max: PI,
            });
        }
        Ok(Self { theta, phi })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`
pub fn bloch_state(angles: BlochAngles) -> StateVector {
    let (s, c) = (angles.theta / 2.0).sin_cos();
    StateVector {
        coeffs: alloc::vec![C64::new(c, 0.0), C64::from_polar(s, angles.phi)],
    }
}

/// Regular latitude–longitude grid, latitude-major.
///
/// Latitudes are `θ_i = π i/(n_theta−1)`, so both poles are included once per
/// longitude. Longitudes are `φ_j = −π + 2π(j+1)/n_phi`, which ends on `φ = π`.
pub fn sample_bloch_grid(n_theta: usize, n_phi: usize) -> Result<Vec<BlochAngles>> {
    if n_theta < 2 {
        return Err(Error::OutOfRange {
            name: "n_theta",
            value: n_theta as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    if n_phi < 1 {
        return Err(Error::OutOfRange {
            name: "n_phi",
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = if i + 1 == n_theta {
            PI
        } else {
            PI * i as f64 / (n_theta - 1) as f64
        };
        for j in 0..n_phi {
            let phi = if j + 1 == n_phi {
                PI
            } else {
                -PI + 2.0 * PI * (j + 1) as f64 / n_phi as f64
            };
            out.push(BlochAngles { theta, phi });
        }
    }
    Ok(out)
}

/// `n` Haar-random pure states of dimension `dim`, from normalized complex
/// Gaussian vectors. Deterministic in `seed`.
pub fn sample_haar(dim: usize, n: usize, seed: u64) -> Result<Vec<StateVector>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let raw: Vec<C64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        // A zero vector has probability zero; skip it rather than fail.
        if let Ok(s) = StateVector::normalize(&raw) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Slit-array geometry. Recorded with results; never propagated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureGeometry {
    pub slit_halfwidth: f64,
    pub slit_period: f64,
    pub slit_length: f64,
}

impl ApertureGeometry {
    pub fn new(slit_halfwidth: f64, slit_period: f64, slit_length: f64) -> Result<Self> {
        check_range("slit_halfwidth", slit_halfwidth, 0.0, f64::INFINITY)?;
        if !(2.0 * slit_halfwidth < slit_period) {
            return Err(Error::OutOfRange {
                name: "slit_halfwidth",
                value: slit_halfwidth,
                min: 0.0,
                max: slit_period / 2.0,
            });
        }
        check_range("slit_length", slit_length, 0.0, f64::INFINITY)?;
        Ok(Self {
            slit_halfwidth,
            slit_period,
            slit_length,
        })
    }

    /// `η_ℓ = ℓ + (D−1)/2`
    pub fn slit_center_index(&self, slit: usize, dim: usize) -> f64 {
        slit as f64 + (dim as f64 - 1.0) / 2.0
    }
}

impl Default for ApertureGeometry {
    fn default() -> Self {
        Self {
            slit_halfwidth: 1.0,
            slit_period: 4.0,
            slit_length: 100.0,
        }
    }
}
