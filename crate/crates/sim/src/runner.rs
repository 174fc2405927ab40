//! Scenario sweeps.
//!
//! Every (cell, state) pair is an independent job on the rayon pool. Results
//! are collected in job order, so the thread count never changes the output.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use spatial_qudit::{mub_bases, run_state, BlochAngles, Method, ProjectorSet};

use crate::config::{Cell, ExperimentConfig, Scenario, Target};
use crate::error::{Result, RunFailure, SimError};
use crate::output::{summarize, CellSummary};

/// One state through one scenario cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityRecord {
    /// Index of the target within the scenario's state list.
    pub state_id: usize,
    pub dimension: usize,
    pub method: Method,
    pub period: usize,
    pub levels: usize,
    pub flicker: f64,
    pub target: Target,
    pub fidelity: f64,
    pub mle_iterations: usize,
    pub time_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub config: ExperimentConfig,
    /// Cell-major, then `state_id`.
    pub records: Vec<FidelityRecord>,
    pub cells: Vec<CellSummary>,
}

fn run_jobs(
    config: &ExperimentConfig,
    cells: &[Cell],
    targets: &[Target],
    projectors: &ProjectorSet,
) -> std::result::Result<Vec<FidelityRecord>, RunFailure> {
    let states: Vec<_> = targets.iter().map(Target::state).collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..targets.len()).map(move |s| (c, s)))
        .collect();
    let results: Vec<Result<FidelityRecord>> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let cell = &cells[c];
            let mut pipeline = cell.pipeline;
            pipeline.setup.shot_noise = config.shot_noise_for(c, s);
            let out = run_state(&states[s], cell.method, projectors, &pipeline)?;
            Ok(FidelityRecord {
                state_id: s,
                dimension: states[s].dim(),
                method: cell.method,
                period: cell.period,
                levels: cell.levels,
                flicker: cell.flicker,
                target: targets[s].clone(),
                fidelity: out.fidelity,
                mle_iterations: out.mle.iterations,
                time_samples: pipeline.setup.flicker.samples_per_frame(),
            })
        })
        .collect();

    let mut completed = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(rec) => completed.push(rec),
            Err(source) => return Err(RunFailure { completed, source }),
        }
    }
    Ok(completed)
}

fn summaries(cells: &[Cell], records: &[FidelityRecord], per_cell: usize) -> Vec<CellSummary> {
    cells
        .iter()
        .zip(records.chunks(per_cell.max(1)))
        .map(|(cell, chunk)| {
            let f: Vec<f64> = chunk.iter().map(|r| r.fidelity).collect();
            summarize(cell, chunk.first().map_or(0, |r| r.dimension), &f)
        })
        .collect()
}

fn run_scenario(
    config: &ExperimentConfig,
    expected: Scenario,
) -> std::result::Result<(Vec<Cell>, Vec<Target>, ProjectorSet, Vec<FidelityRecord>), RunFailure> {
    if config.scenario != expected {
        return Err(
            SimError::Config(format!("config is for {}, not {expected}", config.scenario)).into(),
        );
    }
    config.validate()?;
    let cells = config.cells()?;
    let targets = config.targets()?;
    let projectors = mub_bases(config.dimension).map_err(SimError::from)?;
    let records = run_jobs(config, &cells, &targets, &projectors)?;
    Ok((cells, targets, projectors, records))
}

/// Qubit states on a latitude–longitude grid, for every (method, a) cell.
pub fn run_bloch_sweep(
    config: &ExperimentConfig,
) -> std::result::Result<ScenarioOutput, RunFailure> {
    let (cells, targets, _, records) = run_scenario(config, Scenario::BlochSweep)?;
    Ok(ScenarioOutput {
        config: config.clone(),
        cells: summaries(&cells, &records, targets.len()),
        records,
    })
}

/// Haar-random qudits for every (method, a) cell, summarized as histograms.
pub fn run_qudit_histogram(
    config: &ExperimentConfig,
) -> std::result::Result<ScenarioOutput, RunFailure> {
    let (cells, targets, _, records) = run_scenario(config, Scenario::QuditHist)?;
    Ok(ScenarioOutput {
        config: config.clone(),
        cells: summaries(&cells, &records, targets.len()),
        records,
    })
}

/// Flicker-free Bloch grid for each period in `config.periods`.
///
/// Each cell summary also carries the minimum over an equatorial ring
/// (`θ = π/2` on the grid's longitudes), since grids with an even number of
/// latitudes have no equator row.
pub fn run_period_sweep(
    config: &ExperimentConfig,
) -> std::result::Result<ScenarioOutput, RunFailure> {
    let (cells, targets, projectors, records) = run_scenario(config, Scenario::PeriodSweep)?;
    let mut longitudes: Vec<f64> = Vec::new();
    for t in &targets {
        if let Target::Bloch(a) = t {
            if !longitudes.contains(&a.phi()) {
                longitudes.push(a.phi());
            }
        }
    }
    let ring: Vec<Target> = longitudes
        .iter()
        .map(|&phi| BlochAngles::new(FRAC_PI_2, phi).map(Target::Bloch))
        .collect::<std::result::Result<_, _>>()
        .map_err(SimError::from)?;
    let ring_records = run_jobs(config, &cells, &ring, &projectors).map_err(|f| RunFailure {
        completed: records.clone(),
        source: f.source,
    })?;

    let mut summary = summaries(&cells, &records, targets.len());
    for (s, chunk) in summary
        .iter_mut()
        .zip(ring_records.chunks(ring.len().max(1)))
    {
        s.equatorial_min = chunk.iter().map(|r| r.fidelity).reduce(f64::min);
    }
    Ok(ScenarioOutput {
        config: config.clone(),
        cells: summary,
        records,
    })
}

/// Dispatch on `config.scenario`.
pub fn run(config: &ExperimentConfig) -> std::result::Result<ScenarioOutput, RunFailure> {
    match config.scenario {
        Scenario::BlochSweep => run_bloch_sweep(config),
        Scenario::QuditHist => run_qudit_histogram(config),
        Scenario::PeriodSweep => run_period_sweep(config),
    }
}
