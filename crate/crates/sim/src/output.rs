//! Result files.
//!
//! `<scenario>.csv` holds one row per record under [`CSV_HEADER`].
//! `<scenario>.summary.json` holds per-cell statistics, histograms and the
//! resolved config. Floats are printed in shortest round-trip form and
//! nothing depends on time or thread count, so equal inputs give equal bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::config::{Cell, ExperimentConfig, Scenario, Target};
use crate::error::{Result, SimError};
use crate::runner::{FidelityRecord, ScenarioOutput};

pub const CSV_HEADER: &str = "state_id,D,method,p,N,a,theta,phi,fidelity,mle_iters,T";
pub const HISTOGRAM_BINS: usize = 100;
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(format!("unknown format {s:?} (expected csv, json or both)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    #[serde(rename = "D")]
    pub dimension: usize,
    pub method: &'static str,
    pub p: usize,
    #[serde(rename = "N")]
    pub levels: usize,
    pub a: f64,
    pub count: usize,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Minimum over the equatorial ring (period sweep only).
    pub equatorial_min: Option<f64>,
    pub histogram: Vec<u64>,
}

/// Counts in [`HISTOGRAM_BINS`] bins of width 0.01 on `[0, 1]`.
///
/// Bin `k` covers `[k/100, (k+1)/100)`; the last bin is closed and also takes
/// the `F ≤ 1 + 1e-10` overshoot of numerically pure estimates.
pub fn histogram(fidelities: &[f64]) -> Vec<u64> {
    let mut bins = vec![0u64; HISTOGRAM_BINS];
    for &f in fidelities {
        let k = (f / HISTOGRAM_BIN_WIDTH).floor();
        let k = if k.is_nan() || k < 0.0 {
            0
        } else {
            (k as usize).min(HISTOGRAM_BINS - 1)
        };
        bins[k] += 1;
    }
    bins
}

pub fn summarize(cell: &Cell, dimension: usize, fidelities: &[f64]) -> CellSummary {
    let n = fidelities.len();
    let (mean, std, min, max) = if n == 0 {
        (None, None, None, None)
    } else {
        let mean = fidelities.iter().sum::<f64>() / n as f64;
        let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n as f64;
        (
            Some(mean),
            Some(var.sqrt()),
            fidelities.iter().copied().reduce(f64::min),
            fidelities.iter().copied().reduce(f64::max),
        )
    };
    CellSummary {
        dimension,
        method: cell.method.tag(),
        p: cell.period,
        levels: cell.levels,
        a: cell.flicker,
        count: n,
        mean,
        std,
        min,
        max,
        equatorial_min: None,
        histogram: histogram(fidelities),
    }
}

#[derive(Serialize)]
struct Metadata {
    crate_version: &'static str,
    csv_header: &'static str,
    histogram_bin_width: f64,
    std_ddof: u32,
    /// Both methods subtract the grating's own first-order phase.
    intrinsic_phase_compensated: bool,
    probability_floor: f64,
    aperture: crate::config::ApertureSection,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    scenario: Scenario,
    record_count: usize,
    cells: &'a [CellSummary],
    config: &'a ExperimentConfig,
    metadata: Metadata,
}

pub fn csv_row(r: &FidelityRecord) -> [String; 11] {
    let (theta, phi) = match &r.target {
        Target::Bloch(a) => (a.theta().to_string(), a.phi().to_string()),
        Target::Coefficients(_) => (String::new(), String::new()),
    };
    [
        r.state_id.to_string(),
        r.dimension.to_string(),
        r.method.tag().to_string(),
        r.period.to_string(),
        r.levels.to_string(),
        r.flicker.to_string(),
        theta,
        phi,
        r.fidelity.to_string(),
        r.mle_iterations.to_string(),
        r.time_samples.to_string(),
    ]
}

pub fn write_csv(path: &Path, records: &[FidelityRecord]) -> Result<()> {
    let csv_err = |source| SimError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in records {
        w.write_record(csv_row(r)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn summary_json(output: &ScenarioOutput) -> String {
    let summary = Summary {
        schema_version: crate::config::SCHEMA_VERSION,
        scenario: output.config.scenario,
        record_count: output.records.len(),
        cells: &output.cells,
        config: &output.config,
        metadata: Metadata {
            crate_version: env!("CARGO_PKG_VERSION"),
            csv_header: CSV_HEADER,
            histogram_bin_width: HISTOGRAM_BIN_WIDTH,
            std_ddof: 0,
            intrinsic_phase_compensated: true,
            probability_floor: spatial_qudit::tomography::PROBABILITY_FLOOR,
            aperture: output.config.aperture,
        },
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary is plain data");
    s.push('\n');
    s
}

/// Write the requested files into `dir` and return their paths.
pub fn emit_results(
    output: &ScenarioOutput,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    if output.records.is_empty() {
        return Err(SimError::EmptyResults);
    }
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let stem = output.config.scenario.name();
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join(format!("{stem}.csv"));
        write_csv(&path, &output.records)?;
        written.push(path);
    }
    if format.json() {
        let path = dir.join(format!("{stem}.summary.json"));
        fs::write(&path, summary_json(output)).map_err(|e| SimError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Records of an interrupted run, as `<scenario>.partial.csv`.
pub fn emit_partial(scenario: Scenario, records: &[FidelityRecord], dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let path = dir.join(format!("{}.partial.csv", scenario.name()));
    write_csv(&path, records)?;
    Ok(path)
}
