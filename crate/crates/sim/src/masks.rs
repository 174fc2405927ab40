//! Mask export for inspection.
//!
//! `<stem>.tsv` lists the displayed phase (radians) of every pixel, one row
//! per slit. `<stem>.pgm` is the same data as an 8-bit binary PGM with one
//! image row per slit and one column per pixel of the period, where
//! `level = round(255 · clamp(phase / φ_max, 0, 1))`. Unwrapped masks use
//! `φ_max = 2π(N−1)/N + 2π`, the largest value a depth plus an added phase
//! can reach. Wrapped masks use `φ_max = 2π`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use spatial_qudit::grating::max_depth;
use spatial_qudit::{decoded_state, EncodedState, StateVector};

use crate::error::{Result, SimError};

pub fn phase_ceiling(levels: usize, wrap: bool) -> f64 {
    if wrap {
        TAU
    } else {
        max_depth(levels) + TAU
    }
}

pub fn gray_level(phase: f64, ceiling: f64) -> u8 {
    (255.0 * (phase / ceiling).clamp(0.0, 1.0)).round() as u8
}

pub fn masks_tsv(encoded: &EncodedState) -> String {
    let masks = encoded.masks();
    let p = masks.first().map_or(0, |m| m.period());
    let mut out = String::from("slit");
    for x in 0..p {
        let _ = write!(out, "\tx{x}");
    }
    out.push('\n');
    for (slit, m) in masks.iter().enumerate() {
        let _ = write!(out, "{slit}");
        for v in m.samples() {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

pub fn masks_pgm(encoded: &EncodedState) -> Vec<u8> {
    let masks = encoded.masks();
    let p = masks.first().map_or(0, |m| m.period());
    let levels = encoded.gratings().first().map_or(2, |g| g.levels());
    let ceiling = phase_ceiling(levels, encoded.wrap());
    let mut out = format!("P5\n{p} {}\n255\n", masks.len()).into_bytes();
    for m in &masks {
        out.extend(m.samples().iter().map(|&v| gray_level(v, ceiling)));
    }
    out
}

#[derive(Serialize)]
struct SlitInfo {
    depth: f64,
    displacement: usize,
    added_phase: f64,
    intrinsic_phase: f64,
    /// Flicker-free first-order coefficient `[re, im]`.
    coefficient: [f64; 2],
}

#[derive(Serialize)]
struct EncodingInfo {
    method: &'static str,
    period: usize,
    levels: usize,
    wrap: bool,
    phase_ceiling: f64,
    intrinsic_phase_compensated: bool,
    target: Vec<[f64; 2]>,
    /// `|<target|decoded>|²` of the flicker-free encoding.
    encoding_fidelity: f64,
    slits: Vec<SlitInfo>,
}

pub fn encoding_json(target: &StateVector, encoded: &EncodedState) -> Result<String> {
    let g0 = encoded.gratings()[0];
    let decoded = decoded_state(encoded)?;
    let info = EncodingInfo {
        method: encoded.method().tag(),
        period: g0.period(),
        levels: g0.levels(),
        wrap: encoded.wrap(),
        phase_ceiling: phase_ceiling(g0.levels(), encoded.wrap()),
        intrinsic_phase_compensated: true,
        target: target.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        encoding_fidelity: target.overlap_sqr(&decoded),
        slits: encoded
            .gratings()
            .iter()
            .zip(encoded.intrinsic_phases())
            .zip(encoded.coefficients())
            .map(|((g, &ip), c)| SlitInfo {
                depth: g.depth(),
                displacement: g.displacement(),
                added_phase: g.added_phase(),
                intrinsic_phase: ip,
                coefficient: [c.re, c.im],
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&info).expect("encoding info is plain data");
    s.push('\n');
    Ok(s)
}

/// Write `<stem>.tsv`, `<stem>.pgm` and `<stem>.json` into `dir`.
pub fn export_masks(
    target: &StateVector,
    encoded: &EncodedState,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let files = [
        (format!("{stem}.tsv"), masks_tsv(encoded).into_bytes()),
        (format!("{stem}.pgm"), masks_pgm(encoded)),
        (
            format!("{stem}.json"),
            encoding_json(target, encoded)?.into_bytes(),
        ),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| SimError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spatial_qudit::{encode_state, normalize_state, EncodingOptions, Method, C64};

    #[test]
    fn gray_mapping_endpoints() {
        let c = phase_ceiling(16, false);
        assert!((c - (TAU * 15.0 / 16.0 + TAU)).abs() < 1e-15);
        assert_eq!(gray_level(0.0, c), 0);
        assert_eq!(gray_level(c, c), 255);
        assert_eq!(gray_level(c / 2.0, c), 128);
        assert_eq!(gray_level(-1.0, c), 0);
        assert_eq!(gray_level(2.0 * c, c), 255);
        assert_eq!(phase_ceiling(16, true), TAU);
    }

    #[test]
    fn pgm_has_one_row_per_slit() {
        let s =
            normalize_state(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.0)]).unwrap();
        let enc =
            encode_state(&s, Method::PhaseAddition, &EncodingOptions::with_period(8)).unwrap();
        let pgm = masks_pgm(&enc);
        let header = b"P5\n8 3\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 24);
        let tsv = masks_tsv(&enc);
        assert_eq!(tsv.lines().count(), 4);
        assert!(tsv.starts_with("slit\tx0\tx1"));
    }
}
