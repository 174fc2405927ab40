//! Blazed phase gratings on a phase-only SLM.
//!
//! Each slit shows a quantized blazed grating. Its modulation depth sets the
//! first-order amplitude. The coefficient phase is set either by adding a
//! constant to the grating (PA) or by displacing it laterally (GD).

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_range, Error, Result};
use crate::linalg::C64;
use crate::state::StateVector;

/// Tolerance on the grating depth range checks.
const DEPTH_TOL: f64 = 1e-12;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

/// How the phase of each coefficient is written onto the SLM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Constant phase added to the slit grating.
    PhaseAddition,
    /// Lateral shift of the slit grating by whole pixels.
    GratingDisplacement,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::PhaseAddition, Method::GratingDisplacement];

    pub fn tag(self) -> &'static str {
        match self {
            Method::PhaseAddition => "PA",
            Method::GratingDisplacement => "GD",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PA" | "pa" => Ok(Method::PhaseAddition),
            "GD" | "gd" => Ok(Method::GratingDisplacement),
            _ => Err(Error::InvalidGrating("method must be PA or GD")),
        }
    }
}

/// `sin(πu)/(πu)`
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        let x = PI * u;
        1.0 - x * x / 6.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

/// Largest usable depth of an `N`-level blazed grating, `2π(N−1)/N`.
pub fn max_depth(levels: usize) -> f64 {
    TAU * (levels as f64 - 1.0) / levels as f64
}

/// Mean displayed phase of every mask, `(N−1)π/N`.
pub fn mean_offset(levels: usize) -> f64 {
    PI * (levels as f64 - 1.0) / levels as f64
}

/// First-order efficiency of an ideal blazed grating, `sinc²(1 − φ0/2π)`.
pub fn first_order_efficiency(phi0: f64) -> Result<f64> {
    check_range("phi0", phi0, 0.0, TAU)?;
    let s = sinc(1.0 - phi0 / TAU);
    Ok(s * s)
}

/// Depth `φ0` whose ideal first-order amplitude is `amp` relative to the
/// full-depth amplitude of an `N`-level grating, found by bisection.
pub fn depth_for_amplitude(amp: f64, levels: usize) -> Result<f64> {
    check_levels(levels)?;
    check_range("amplitude", amp, 0.0, 1.0 + DEPTH_TOL)?;
    let hi_depth = max_depth(levels);
    if amp <= 0.0 {
        return Ok(0.0);
    }
    if amp >= 1.0 {
        return Ok(hi_depth);
    }
    // sqrt(ε1) = sinc(1 − φ/2π) is non-negative and increasing on [0, 2π].
    let target = amp * sinc(1.0 - hi_depth / TAU);
    let (mut lo, mut hi) = (0.0, hi_depth);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sinc(1.0 - mid / TAU) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Displacement in pixels whose phase `2πδ/p` is nearest to `theta`.
pub fn displacement_for_phase(theta: f64, period: usize) -> usize {
    let p = period as f64;
    let steps = (p * theta / TAU).round() as i64;
    steps.rem_euclid(period as i64) as usize
}

/// Reduce a phase into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x % TAU;
    let r = if r < 0.0 { r + TAU } else { r };
    // r + 2π can round up to exactly 2π.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels < 2 {
        return Err(Error::InvalidGrating("need at least 2 quantization levels"));
    }
    Ok(())
}

/// Parameters of the grating shown on one slit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    depth: f64,
    period: usize,
    displacement: usize,
    added_phase: f64,
    levels: usize,
}

impl GratingSpec {
    pub fn new(
        depth: f64,
        period: usize,
        displacement: usize,
        added_phase: f64,
        levels: usize,
    ) -> Result<Self> {
        check_levels(levels)?;
        if period < 2 {
            return Err(Error::InvalidGrating("period must be at least 2 pixels"));
        }
        if displacement >= period {
            return Err(Error::InvalidGrating(
                "displacement must be below the period",
            ));
        }
        check_range("depth", depth, 0.0, max_depth(levels) + DEPTH_TOL)?;
        if !(0.0..TAU).contains(&added_phase) {
            return Err(Error::OutOfRange {
                name: "added_phase",
                value: added_phase,
                min: 0.0,
                max: TAU,
            });
        }
        Ok(Self {
            depth: depth.min(max_depth(levels)),
            period,
            displacement,
            added_phase,
            levels,
        })
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }
    pub fn period(&self) -> usize {
        self.period
    }
    pub fn displacement(&self) -> usize {
        self.displacement
    }
    pub fn added_phase(&self) -> f64 {
        self.added_phase
    }
    pub fn levels(&self) -> usize {
        self.levels
    }
}

/// Displayed phase over one grating period, one value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    samples: Vec<f64>,
}

impl PhaseMask {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> usize {
        self.samples.len()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
        }
    }

    /// `out[x] = self[(x + shift) mod p]`, i.e. the grating moved by `shift` pixels.
    pub fn shifted(&self, shift: usize) -> Self {
        let mut samples = self.samples.clone();
        let p = samples.len();
        samples.rotate_left(shift % p);
        Self { samples }
    }
}

/// Blazed staircase for `spec`.
///
/// Pixel `x` shows level `k = ⌊N·frac((x+δ)/p)⌋`, with phase `φ0·k/(N−1)`.
/// A constant then brings the mask mean to `(N−1)π/N`, and the PA phase is
/// added. With `wrap`, values are reduced modulo 2π, like an SLM whose range
/// stops at 2π.
pub fn build_blazed_mask(spec: &GratingSpec, wrap: bool) -> PhaseMask {
    let p = spec.period;
    let n = spec.levels;
    let step = spec.depth / (n - 1) as f64;
    let mut samples: Vec<f64> = (0..p)
        .map(|x| {
            let level = ((x + spec.displacement) % p) * n / p;
            step * level as f64
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / p as f64;
    let shift = mean_offset(n) - mean + spec.added_phase;
    for s in samples.iter_mut() {
        *s += shift;
        if wrap {
            *s = wrap_phase(*s);
        }
    }
    PhaseMask { samples }
}

/// Order +1 Fourier coefficient of the pixelated transmission `e^{i·mask}`.
///
/// Pixel `x` fills `[x − ½, x + ½)` with a constant phase. The coefficient of
/// `e^{+i2πu/p}` is therefore the DFT term
/// `(1/p) Σ_x e^{i·mask(x)} e^{−i2πx/p}` times the pixel aperture factor
/// `sinc(1/p)`.
pub fn first_order_coefficient(mask: &PhaseMask) -> C64 {
    first_order_coefficient_of(mask.samples(), 1.0)
}

/// [`first_order_coefficient`] of the mask scaled by `factor`, without
/// allocating the scaled mask.
pub fn first_order_coefficient_of(samples: &[f64], factor: f64) -> C64 {
    let p = samples.len();
    let pf = p as f64;
    let mut acc = C64::new(0.0, 0.0);
    for (x, &phi) in samples.iter().enumerate() {
        acc += C64::from_polar(1.0, factor * phi - TAU * x as f64 / pf);
    }
    acc * (sinc(1.0 / pf) / pf)
}

/// Options shared by every slit of an encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingOptions {
    pub period: usize,
    pub levels: usize,
    /// Reduce displayed phases modulo 2π.
    pub wrap: bool,
}

impl EncodingOptions {
    /// `N = p`, no wrapping.
    pub fn with_period(period: usize) -> Self {
        Self {
            period,
            levels: period,
            wrap: false,
        }
    }
}

/// A state written onto SLM regions, one grating per slit.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedState {
    method: Method,
    wrap: bool,
    gratings: Vec<GratingSpec>,
    intrinsic_phases: Vec<f64>,
}

impl EncodedState {
    pub fn dim(&self) -> usize {
        self.gratings.len()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn wrap(&self) -> bool {
        self.wrap
    }

    pub fn gratings(&self) -> &[GratingSpec] {
        &self.gratings
    }

    /// `arg t1` of each slit's unshifted, phase-free mask. Encoding subtracts
    /// this phase from each target phase.
    pub fn intrinsic_phases(&self) -> &[f64] {
        &self.intrinsic_phases
    }

    pub fn masks(&self) -> Vec<PhaseMask> {
        self.gratings
            .iter()
            .map(|g| build_blazed_mask(g, self.wrap))
            .collect()
    }

    /// Flicker-free first-order coefficients, one per slit.
    pub fn coefficients(&self) -> Vec<C64> {
        self.masks().iter().map(first_order_coefficient).collect()
    }
}

/// Intrinsic first-order phase of an unshifted grating at `depth`.
fn intrinsic_phase(depth: f64, opts: &EncodingOptions) -> Result<f64> {
    let spec = GratingSpec::new(depth, opts.period, 0, 0.0, opts.levels)?;
    let t1 = first_order_coefficient(&build_blazed_mask(&spec, opts.wrap));
    // A flat mask has no first order; its phase is irrelevant.
    Ok(if t1.norm() > 1e-14 { t1.arg() } else { 0.0 })
}

/// Write `state` onto one grating per slit.
pub fn encode_state(
    state: &StateVector,
    method: Method,
    opts: &EncodingOptions,
) -> Result<EncodedState> {
    check_levels(opts.levels)?;
    if opts.period < 2 {
        return Err(Error::InvalidGrating("period must be at least 2 pixels"));
    }
    let mut gratings = Vec::with_capacity(state.dim());
    let mut intrinsic_phases = Vec::with_capacity(state.dim());
    for beta in state.coeffs() {
        let amp = beta.norm().min(1.0);
        let depth = depth_for_amplitude(amp, opts.levels)?;
        let correction = intrinsic_phase(depth, opts)?;
        let phase = if amp > 0.0 { beta.arg() } else { 0.0 };
        let wanted = wrap_phase(phase - correction);
        let spec = match method {
            Method::GratingDisplacement => GratingSpec::new(
                depth,
                opts.period,
                displacement_for_phase(wanted, opts.period),
                0.0,
                opts.levels,
            )?,
            Method::PhaseAddition => GratingSpec::new(depth, opts.period, 0, wanted, opts.levels)?,
        };
        gratings.push(spec);
        intrinsic_phases.push(correction);
    }
    Ok(EncodedState {
        method,
        wrap: opts.wrap,
        gratings,
        intrinsic_phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::normalize_state;
    use alloc::vec;

    fn wrap_pi(x: f64) -> f64 {
        let y = wrap_phase(x);
        if y > PI {
            y - TAU
        } else {
            y
        }
    }

    #[test]
    fn efficiency_examples() {
        assert!((first_order_efficiency(TAU).unwrap() - 1.0).abs() < 1e-15);
        assert!(first_order_efficiency(0.0).unwrap().abs() < 1e-30);
        let expected = 4.0 / (PI * PI);
        assert!((first_order_efficiency(PI).unwrap() - expected).abs() < 1e-15);
        assert!(first_order_efficiency(-0.1).is_err());
        assert!(first_order_efficiency(TAU + 0.1).is_err());
    }

    #[test]
    fn depth_examples() {
        assert!((depth_for_amplitude(1.0, 16).unwrap() - 15.0 * PI / 8.0).abs() < 1e-15);
        assert_eq!(depth_for_amplitude(0.0, 7).unwrap(), 0.0);
        // Frozen from an independent Brent root solve of
        // sinc(1 − φ/2π) = 0.5·sinc(1/16).
        let d = depth_for_amplitude(0.5, 16).unwrap();
        assert!((d - 2.477_360_124_519_532_5).abs() < 1e-11, "{d}");
        assert!(depth_for_amplitude(1.5, 16).is_err());
        assert!(depth_for_amplitude(0.5, 1).is_err());
    }

    #[test]
    fn displacement_examples() {
        assert_eq!(displacement_for_phase(PI, 16), 8);
        assert_eq!(displacement_for_phase(0.0, 9), 0);
        assert_eq!(displacement_for_phase(-PI / 8.0, 16), 15);
        assert_eq!(displacement_for_phase(TAU - 1e-9, 16), 0);
    }

    #[test]
    fn displacement_matches_exhaustive_search() {
        for p in [2usize, 3, 4, 8, 16, 17] {
            for i in 0..997 {
                let theta = -7.0 + 14.0 * i as f64 / 997.0;
                let best = (0..p)
                    .min_by(|&a, &b| {
                        let ea = wrap_pi(TAU * a as f64 / p as f64 - theta).abs();
                        let eb = wrap_pi(TAU * b as f64 / p as f64 - theta).abs();
                        ea.total_cmp(&eb)
                    })
                    .unwrap();
                let got = displacement_for_phase(theta, p);
                let err = wrap_pi(TAU * got as f64 / p as f64 - theta).abs();
                let best_err = wrap_pi(TAU * best as f64 / p as f64 - theta).abs();
                assert!((err - best_err).abs() < 1e-12, "p={p} theta={theta}");
                assert!(err <= PI / p as f64 + 1e-12);
            }
        }
        // Exhaustive oracle value for θ = 2π/3, p = 16.
        assert_eq!(displacement_for_phase(TAU / 3.0, 16), 5);
    }

    #[test]
    fn full_depth_mask_has_n_equal_levels() {
        let spec = GratingSpec::new(15.0 * PI / 8.0, 16, 0, 0.0, 16).unwrap();
        let mask = build_blazed_mask(&spec, false);
        let m = mask.samples();
        let offset = m[0];
        for (x, v) in m.iter().enumerate() {
            assert!((v - offset - PI * x as f64 / 8.0).abs() < 1e-14);
        }
        assert!((mask.mean() - mean_offset(16)).abs() < 1e-14);
        assert!(offset.abs() < 1e-14);
    }

    #[test]
    fn zero_depth_mask_is_constant_offset() {
        let spec = GratingSpec::new(0.0, 8, 3, 0.0, 8).unwrap();
        let mask = build_blazed_mask(&spec, false);
        assert!(mask
            .samples()
            .iter()
            .all(|&v| (v - 7.0 * PI / 8.0).abs() < 1e-15));
    }

    #[test]
    fn displacement_is_cyclic_shift() {
        let base = build_blazed_mask(&GratingSpec::new(PI, 4, 0, 0.0, 4).unwrap(), false);
        let moved = build_blazed_mask(&GratingSpec::new(PI, 4, 1, 0.0, 4).unwrap(), false);
        assert_eq!(moved, base.shifted(1));
    }

    #[test]
    fn masks_stay_in_displayable_range() {
        for levels in [2usize, 4, 8, 16] {
            for &p in &[levels, 2 * levels] {
                for i in 0..=10 {
                    let depth = max_depth(levels) * i as f64 / 10.0;
                    let spec = GratingSpec::new(depth, p, p / 3, TAU - 1e-9, levels).unwrap();
                    let m = build_blazed_mask(&spec, false);
                    let lim = max_depth(levels) + TAU;
                    assert!(m.samples().iter().all(|&v| v >= -1e-12 && v < lim));
                    let w = build_blazed_mask(&spec, true);
                    assert!(w.samples().iter().all(|&v| (0.0..TAU).contains(&v)));
                }
            }
        }
    }

    #[test]
    fn flat_mask_has_no_first_order() {
        let m = PhaseMask::from_samples(vec![1.3; 16]);
        assert!(first_order_coefficient(&m).norm() < 1e-15);
    }

    /// Midpoint quadrature of `(1/p)∫ e^{i m(u)} e^{-i2πu/p} du` over the
    /// piecewise-constant pixelated mask, centred pixels.
    fn quadrature_coefficient(mask: &[f64], sub: usize) -> C64 {
        let p = mask.len() as f64;
        let h = 1.0 / sub as f64;
        let mut acc = C64::new(0.0, 0.0);
        for (x, &phi) in mask.iter().enumerate() {
            for k in 0..sub {
                let u = x as f64 - 0.5 + (k as f64 + 0.5) * h;
                acc += C64::from_polar(1.0, phi - TAU * u / p) * h;
            }
        }
        acc / p
    }

    #[test]
    fn coefficient_matches_quadrature_oracle() {
        for (depth, p, d, n) in [(15.0 * PI / 8.0, 16, 0, 16), (2.0, 8, 3, 8), (PI, 4, 1, 4)] {
            let m = build_blazed_mask(&GratingSpec::new(depth, p, d, 0.7, n).unwrap(), false);
            let q = quadrature_coefficient(m.samples(), 4000);
            assert!((q - first_order_coefficient(&m)).norm() < 1e-7);
        }
    }

    #[test]
    fn quantized_blaze_efficiency_at_full_depth() {
        // |t1|² = sinc²(1/16) = 0.98721…, i.e. |t1| = sinc(1/16) = 0.99359…
        let m = build_blazed_mask(
            &GratingSpec::new(max_depth(16), 16, 0, 0.0, 16).unwrap(),
            false,
        );
        let t1 = first_order_coefficient(&m);
        assert!((t1.norm_sqr() - 0.987_214_830_766_658_1).abs() < 1e-12);
        assert!((t1.norm() - 0.993_586_851_144_205_8).abs() < 1e-12);
        for n in [4usize, 8, 16] {
            let m = build_blazed_mask(
                &GratingSpec::new(max_depth(n), n, 0, 0.0, n).unwrap(),
                false,
            );
            let s = sinc(1.0 / n as f64);
            assert!((first_order_coefficient(&m).norm_sqr() - s * s).abs() < 1e-6);
        }
    }

    #[test]
    fn shift_adds_displacement_phase() {
        let m = build_blazed_mask(&GratingSpec::new(2.2, 16, 0, 1.0, 16).unwrap(), false);
        let t0 = first_order_coefficient(&m);
        for d in 0..16 {
            let td = first_order_coefficient(&m.shifted(d));
            let diff = wrap_pi(td.arg() - t0.arg() - TAU * d as f64 / 16.0);
            assert!(diff.abs() < 1e-12);
        }
    }

    #[test]
    fn intrinsic_phase_vanishes_when_levels_equal_period() {
        let opts = EncodingOptions::with_period(16);
        for i in 1..=20 {
            let depth = max_depth(16) * i as f64 / 20.0;
            assert!(intrinsic_phase(depth, &opts).unwrap().abs() < 1e-12);
        }
        // With N ≠ p the correction is genuinely nonzero somewhere.
        let opts = EncodingOptions {
            period: 16,
            levels: 5,
            wrap: false,
        };
        let any = (1..=20).any(|i| {
            intrinsic_phase(max_depth(5) * i as f64 / 20.0, &opts)
                .unwrap()
                .abs()
                > 1e-6
        });
        assert!(any);
    }

    #[test]
    fn encode_basis_state() {
        let s = StateVector::basis(2, 0).unwrap();
        let e = encode_state(
            &s,
            Method::GratingDisplacement,
            &EncodingOptions::with_period(16),
        )
        .unwrap();
        assert!((e.gratings()[0].depth() - max_depth(16)).abs() < 1e-15);
        assert_eq!(e.gratings()[1].depth(), 0.0);
    }

    #[test]
    fn encode_minus_state_gd() {
        let s = normalize_state(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
        let e = encode_state(
            &s,
            Method::GratingDisplacement,
            &EncodingOptions::with_period(16),
        )
        .unwrap();
        let g = e.gratings();
        assert_eq!(g[0].depth(), g[1].depth());
        let diff = (g[1].displacement() + 16 - g[0].displacement()) % 16;
        assert_eq!(diff, 8);
    }

    #[test]
    fn encode_plus_round_trips() {
        let s = normalize_state(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        for method in Method::ALL {
            let e = encode_state(&s, method, &EncodingOptions::with_period(16)).unwrap();
            let c = e.coefficients();
            assert!((c[0].norm() - c[1].norm()).abs() < 1e-12);
            let rel = wrap_pi(c[1].arg() - c[0].arg());
            assert!(rel.abs() <= PI / 16.0);
        }
    }

    #[test]
    fn method_tags() {
        use alloc::string::ToString;
        assert_eq!(Method::PhaseAddition.to_string(), "PA");
        assert_eq!("gd".parse::<Method>().unwrap(), Method::GratingDisplacement);
        assert!("xx".parse::<Method>().is_err());
    }
}
