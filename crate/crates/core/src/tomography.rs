//! Maximum-likelihood state reconstruction from MUB frequencies.
//!
//! The main loop is the RρR fixed-point iteration
//! `ρ ← N[R(ρ) ρ R(ρ)]` with `R(ρ) = Σ (f_jk / p_jk) |b_jk⟩⟨b_jk|`, started at
//! `I/D`. Dilution `(1−λ)I + λR` is optional.
//!
//! RρR only approaches boundary (rank-deficient) estimates sublinearly. After
//! the loop, each eigenvalue truncation of the iterate is refined by a few
//! hundred more RρR steps on its own rank and scored by likelihood. The best
//! one replaces the iterate if it is strictly more likely.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::measurement::{MeasurementRecord, ProjectorSet};
use crate::state::DensityMatrix;

/// Lower clamp on predicted probabilities inside `R`.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Allowed likelihood decrease before the iteration falls back to dilution.
pub const MONOTONICITY_TOL: f64 = 1e-12;
/// Dilution used after a likelihood decrease.
pub const FALLBACK_DILUTION: f64 = 0.5;
/// RρR steps spent refining each truncation candidate.
pub const REFINE_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    pub max_iterations: usize,
    /// Stop when the max-norm of the update falls below this.
    pub convergence_epsilon: f64,
    /// `λ ∈ (0, 1]`; 1 is plain RρR.
    pub dilution: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            convergence_epsilon: 1e-10,
            dilution: 1.0,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::OutOfRange {
                name: "max_iterations",
                value: 0.0,
                min: 1.0,
                max: f64::INFINITY,
            });
        }
        crate::error::check_range(
            "convergence_epsilon",
            self.convergence_epsilon,
            0.0,
            f64::INFINITY,
        )?;
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return Err(Error::OutOfRange {
                name: "dilution",
                value: self.dilution,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub rho: DensityMatrix,
    /// RρR iterations performed.
    pub iterations: usize,
    /// Update norm fell below the threshold before `max_iterations`.
    pub converged: bool,
    /// The likelihood decreased once and dilution was switched on.
    pub dilution_fallback: bool,
    /// Rank kept by the truncation step, if it replaced the iterate.
    pub truncated_rank: Option<usize>,
    pub log_likelihood: f64,
}

/// Σ f ln p for `rho`; `-inf` if some observed outcome has zero probability.
pub fn log_likelihood(
    records: &[MeasurementRecord],
    projectors: &ProjectorSet,
    rho: &DensityMatrix,
) -> Result<f64> {
    let f = aligned_frequencies(records, projectors)?;
    let vecs: Vec<&[C64]> = projectors.iter().map(|(_, _, b)| b.coeffs()).collect();
    Ok(likelihood_of(&f, &vecs, rho.matrix()))
}

fn likelihood_of(f: &[f64], vecs: &[&[C64]], rho: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for (fi, b) in f.iter().zip(vecs) {
        if *fi > 0.0 {
            let p = rho.expectation(b).re;
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += fi * p.ln();
        }
    }
    acc
}

fn aligned_frequencies(
    records: &[MeasurementRecord],
    projectors: &ProjectorSet,
) -> Result<Vec<f64>> {
    if records.len() != projectors.len() {
        return Err(Error::DimensionMismatch {
            expected: projectors.len(),
            found: records.len(),
        });
    }
    let mut f = alloc::vec![f64::NAN; records.len()];
    let mut offsets = Vec::with_capacity(projectors.bases().len());
    let mut o = 0;
    for b in projectors.bases() {
        offsets.push(o);
        o += b.len();
    }
    for r in records {
        let Some(&base) = offsets.get(r.basis) else {
            return Err(Error::DimensionMismatch {
                expected: offsets.len(),
                found: r.basis + 1,
            });
        };
        if r.outcome >= projectors.bases()[r.basis].len() {
            return Err(Error::DimensionMismatch {
                expected: projectors.dim(),
                found: r.outcome + 1,
            });
        }
        crate::error::check_range("frequency", r.frequency, 0.0, f64::INFINITY)?;
        f[base + r.outcome] = r.frequency;
    }
    if f.iter().any(|x| x.is_nan()) {
        return Err(Error::DimensionMismatch {
            expected: projectors.len(),
            found: records.len(),
        });
    }
    Ok(f)
}

/// Log-likelihood of `rho` and the operator `R(rho)`.
fn ratio_operator(f: &[f64], vecs: &[&[C64]], outers: &[CMatrix], rho: &CMatrix) -> (f64, CMatrix) {
    let mut r = CMatrix::zeros(rho.dim());
    let mut ll = 0.0;
    for ((fi, b), outer) in f.iter().zip(vecs).zip(outers) {
        if *fi <= 0.0 {
            continue;
        }
        let p = rho.expectation(b).re;
        ll += fi * p.max(f64::MIN_POSITIVE).ln();
        r.add_scaled(C64::new(fi / p.max(PROBABILITY_FLOOR), 0.0), outer);
    }
    (ll, r)
}

/// Undiluted RρR started from a truncated estimate. The support never grows,
/// so the iteration stays on the candidate's rank and converges there much
/// faster than from the interior. Returns the most likely iterate seen.
fn refine(
    f: &[f64],
    vecs: &[&[C64]],
    outers: &[CMatrix],
    mut rho: CMatrix,
    config: &MleConfig,
) -> (CMatrix, f64) {
    let mut best = (rho.clone(), likelihood_of(f, vecs, &rho));
    for _ in 0..REFINE_ITERATIONS {
        let (_, r) = ratio_operator(f, vecs, outers, &rho);
        let next = normalized(r.matmul(&rho).matmul(&r));
        let step = next.max_abs_diff(&rho);
        rho = next;
        let ll = likelihood_of(f, vecs, &rho);
        if ll > best.1 {
            best = (rho.clone(), ll);
        }
        if step < config.convergence_epsilon {
            break;
        }
    }
    best
}

fn normalized(mut m: CMatrix) -> CMatrix {
    m.symmetrize();
    let tr = m.trace().re;
    m.scale(C64::new(1.0 / tr, 0.0));
    m
}

/// Reconstruct `ρ` from per-projector frequencies.
pub fn mle_reconstruct(
    records: &[MeasurementRecord],
    projectors: &ProjectorSet,
    config: &MleConfig,
) -> Result<MleResult> {
    mle_reconstruct_traced(records, projectors, config, None)
}

/// [`mle_reconstruct`], also recording the log-likelihood of every iterate
/// (on the normalized frequency scale) into `trace`.
pub fn mle_reconstruct_traced(
    records: &[MeasurementRecord],
    projectors: &ProjectorSet,
    config: &MleConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<MleResult> {
    config.validate()?;
    let dim = projectors.dim();
    let f_raw = aligned_frequencies(records, projectors)?;
    let total: f64 = f_raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::OutOfRange {
            name: "total frequency",
            value: total,
            min: f64::MIN_POSITIVE,
            max: f64::INFINITY,
        });
    }
    // Rescaling f leaves RρR unchanged and makes R → I at the optimum.
    let f: Vec<f64> = f_raw.iter().map(|x| x / total).collect();
    let vecs: Vec<&[C64]> = projectors.iter().map(|(_, _, b)| b.coeffs()).collect();
    let outers: Vec<CMatrix> = vecs.iter().map(|b| CMatrix::outer(b, b)).collect();
    let identity = CMatrix::identity(dim);

    let mut rho = DensityMatrix::maximally_mixed(dim)?.matrix().clone();
    let mut lambda = config.dilution;
    let mut fallback = false;
    let mut prev_ll = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        let (ll, mut r) = ratio_operator(&f, &vecs, &outers, &rho);
        if ll < prev_ll - MONOTONICITY_TOL && lambda >= 1.0 {
            lambda = FALLBACK_DILUTION;
            fallback = true;
        }
        prev_ll = ll;
        if let Some(t) = trace.as_deref_mut() {
            t.push(ll);
        }
        if lambda < 1.0 {
            r.scale(C64::new(lambda, 0.0));
            r.add_scaled(C64::new(1.0 - lambda, 0.0), &identity);
        }
        let next = normalized(r.matmul(&rho).matmul(&r));
        let step = next.max_abs_diff(&rho);
        rho = next;
        iterations += 1;
        if step < config.convergence_epsilon {
            converged = true;
            break;
        }
    }

    let mut ll = likelihood_of(&f, &vecs, &rho);
    let mut truncated_rank = None;
    let (vals, vecs_eig) = rho.hermitian_eigen();
    // vals ascending; keep the top `rank` eigenpairs.
    for rank in 1..dim {
        let mut cand = CMatrix::zeros(dim);
        let mut weight = 0.0;
        for i in (dim - rank)..dim {
            let lam = vals[i].max(0.0);
            let v = vecs_eig.column(i);
            cand.add_scaled(C64::new(lam, 0.0), &CMatrix::outer(&v, &v));
            weight += lam;
        }
        if weight <= 0.0 {
            continue;
        }
        let (cand, cand_ll) = refine(&f, &vecs, &outers, normalized(cand), config);
        if cand_ll > ll {
            ll = cand_ll;
            rho = cand;
            truncated_rank = Some(rank);
        }
    }

    // Report the likelihood on the caller's frequency scale.
    let ll = ll * total;
    Ok(MleResult {
        rho: DensityMatrix::new_unchecked(rho),
        iterations,
        converged,
        dilution_fallback: fallback,
        truncated_rank,
        log_likelihood: ll,
    })
}
