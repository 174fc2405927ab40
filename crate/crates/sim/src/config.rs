//! Experiment configuration.
//!
//! A config file is a JSON object with a `schema_version` and any subset of
//! the [`ConfigFile`] fields. Missing fields take the defaults of the scenario
//! being run, which reproduce the full-size sweeps.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spatial_qudit::measurement::is_prime;
use spatial_qudit::{
    sample_bloch_grid, sample_haar, ApertureGeometry, BlochAngles, EncodingOptions, FlickerSpec,
    Method, MleConfig, PipelineConfig, ShotNoise, Slm2Model, StateVector, TomographySetup,
};

use crate::error::{Result, SimError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    BlochSweep,
    QuditHist,
    PeriodSweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::BlochSweep => "bloch-sweep",
            Scenario::QuditHist => "qudit-hist",
            Scenario::PeriodSweep => "period-sweep",
        }
    }

    pub fn default_seed(self) -> u64 {
        match self {
            Scenario::BlochSweep => 2112,
            Scenario::QuditHist => 2000,
            Scenario::PeriodSweep => 4816,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Pa,
    Gd,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Pa => vec![Method::PhaseAddition],
            MethodChoice::Gd => vec![Method::GratingDisplacement],
            MethodChoice::Both => Method::ALL.to_vec(),
        }
    }
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pa" => Ok(MethodChoice::Pa),
            "gd" => Ok(MethodChoice::Gd),
            "both" => Ok(MethodChoice::Both),
            _ => Err(format!("unknown method {s:?} (expected pa, gd or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    BlochGrid { n_theta: usize, n_phi: usize },
    Haar { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slm2Choice {
    #[default]
    Ideal,
    Quantized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MleSection {
    pub max_iterations: usize,
    pub convergence_epsilon: f64,
    pub dilution_lambda: f64,
}

impl Default for MleSection {
    fn default() -> Self {
        let d = MleConfig::default();
        Self {
            max_iterations: d.max_iterations,
            convergence_epsilon: d.convergence_epsilon,
            dilution_lambda: d.dilution,
        }
    }
}

impl From<MleSection> for MleConfig {
    fn from(m: MleSection) -> Self {
        MleConfig {
            max_iterations: m.max_iterations,
            convergence_epsilon: m.convergence_epsilon,
            dilution: m.dilution_lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotNoiseSection {
    pub counts_per_projector: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApertureSection {
    pub slit_halfwidth: f64,
    pub slit_period: f64,
    pub slit_length: f64,
}

impl Default for ApertureSection {
    fn default() -> Self {
        let g = ApertureGeometry::default();
        Self {
            slit_halfwidth: g.slit_halfwidth,
            slit_period: g.slit_period,
            slit_length: g.slit_length,
        }
    }
}

/// On-disk form: every field except `schema_version` is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub dimension: Option<usize>,
    pub method: Option<MethodChoice>,
    pub period: Option<usize>,
    pub levels: Option<usize>,
    pub flicker: Option<Vec<f64>>,
    pub states: Option<StateSource>,
    pub periods: Option<Vec<usize>>,
    pub time_samples: Option<usize>,
    pub seed: Option<u64>,
    pub scale: Option<usize>,
    pub wrap_phase: Option<bool>,
    pub slm2: Option<Slm2Choice>,
    pub shot_noise: Option<ShotNoiseSection>,
    pub mle: Option<MleSection>,
    pub aperture: Option<ApertureSection>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| SimError::Json {
            path: path.to_owned(),
            source,
        })
    }
}

/// Fully resolved configuration of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub dimension: usize,
    pub method: MethodChoice,
    pub period: usize,
    /// Quantization levels `N`; `None` means `N = p`.
    pub levels: Option<usize>,
    pub flicker: Vec<f64>,
    pub states: StateSource,
    /// Periods visited by the period sweep.
    pub periods: Vec<usize>,
    pub time_samples: usize,
    pub seed: u64,
    /// State-count divisor for reduced runs.
    pub scale: usize,
    pub wrap_phase: bool,
    pub slm2: Slm2Choice,
    pub shot_noise: Option<ShotNoiseSection>,
    pub mle: MleSection,
    pub aperture: ApertureSection,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

/// One (method, p, a) combination of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub period: usize,
    pub levels: usize,
    pub flicker: f64,
    pub pipeline: PipelineConfig,
}

/// A target state and how it was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Bloch(BlochAngles),
    Coefficients(StateVector),
}

impl Target {
    pub fn state(&self) -> StateVector {
        match self {
            Target::Bloch(a) => spatial_qudit::bloch_state(*a),
            Target::Coefficients(s) => s.clone(),
        }
    }
}

impl ExperimentConfig {
    /// Full-size defaults of `scenario`.
    pub fn defaults(scenario: Scenario) -> Self {
        let grid = StateSource::BlochGrid {
            n_theta: 44,
            n_phi: 48,
        };
        let (dimension, method, flicker, states) = match scenario {
            Scenario::BlochSweep => (2, MethodChoice::Both, vec![0.2, 0.3, 0.6], grid),
            Scenario::QuditHist => (
                3,
                MethodChoice::Both,
                vec![0.2, 0.3, 0.6],
                StateSource::Haar { count: 2000 },
            ),
            Scenario::PeriodSweep => (2, MethodChoice::Gd, vec![0.0], grid),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            scenario,
            dimension,
            method,
            period: 16,
            levels: None,
            flicker,
            states,
            periods: vec![4, 8, 16],
            time_samples: spatial_qudit::flicker::DEFAULT_SAMPLES,
            seed: scenario.default_seed(),
            scale: 1,
            wrap_phase: false,
            slm2: Slm2Choice::Ideal,
            shot_noise: None,
            mle: MleSection::default(),
            aperture: ApertureSection::default(),
            output_dir: PathBuf::from("results"),
        }
    }

    /// Defaults of `scenario` overlaid with the fields present in `file`.
    pub fn from_file(scenario: Scenario, file: ConfigFile) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(SimError::Schema {
                found: file.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let mut c = Self::defaults(scenario);
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = file.$field { c.$field = v; })*
            };
        }
        overlay!(
            dimension,
            method,
            period,
            flicker,
            states,
            periods,
            time_samples,
            seed,
            scale,
            wrap_phase,
            slm2,
            mle,
            aperture,
            output_dir
        );
        if file.levels.is_some() {
            c.levels = file.levels;
        }
        if file.shot_noise.is_some() {
            c.shot_noise = file.shot_noise;
        }
        Ok(c)
    }

    pub fn load(scenario: Scenario, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_file(scenario, ConfigFile::load(p)?),
            None => Ok(Self::defaults(scenario)),
        }
    }

    /// Checks every sub-config and the scenario's preconditions.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.dimension < 2 || !is_prime(self.dimension) {
            return bad(format!(
                "dimension {} is not prime; MUB tomography needs a prime D",
                self.dimension
            ));
        }
        if self.scale == 0 {
            return bad("scale must be at least 1".into());
        }
        if self.flicker.is_empty() {
            return bad("flicker list is empty".into());
        }
        match (self.scenario, self.states) {
            (Scenario::BlochSweep | Scenario::PeriodSweep, StateSource::BlochGrid { .. }) => {}
            (Scenario::QuditHist, StateSource::Haar { count }) => {
                if count == 0 {
                    return bad("haar count must be positive".into());
                }
            }
            (s, _) => return bad(format!("{s} does not accept this state source")),
        }
        if matches!(self.scenario, Scenario::BlochSweep | Scenario::PeriodSweep)
            && self.dimension != 2
        {
            return bad(format!("{} needs dimension 2", self.scenario));
        }
        if self.scenario == Scenario::PeriodSweep {
            if self.periods.is_empty() {
                return bad("periods list is empty".into());
            }
            if self.flicker.iter().any(|&a| a != 0.0) {
                return bad("period-sweep runs flicker-free; set flicker to [0]".into());
            }
        }
        if let Some(noise) = self.shot_noise {
            if !(noise.counts_per_projector > 0.0 && noise.counts_per_projector.is_finite()) {
                return bad("shot_noise.counts_per_projector must be positive".into());
            }
        }
        MleConfig::from(self.mle).validate()?;
        let a = self.aperture;
        ApertureGeometry::new(a.slit_halfwidth, a.slit_period, a.slit_length)?;
        self.cells()?;
        Ok(())
    }

    pub fn aperture_geometry(&self) -> Result<ApertureGeometry> {
        let a = self.aperture;
        Ok(ApertureGeometry::new(
            a.slit_halfwidth,
            a.slit_period,
            a.slit_length,
        )?)
    }

    /// Encoding options for period `period`.
    pub fn encoding(&self, period: usize) -> EncodingOptions {
        EncodingOptions {
            period,
            levels: self.levels.unwrap_or(period),
            wrap: self.wrap_phase,
        }
    }

    /// Tomography setup for one cell, without shot noise. Flicker-free
    /// cells use a single time sample.
    pub fn pipeline(&self, period: usize, flicker: f64) -> Result<PipelineConfig> {
        if self.time_samples == 0 {
            return Err(SimError::Config("time_samples must be at least 1".into()));
        }
        let encoding = self.encoding(period);
        let probe = StateVector::basis(2, 0)?;
        spatial_qudit::encode_state(&probe, Method::GratingDisplacement, &encoding)?;
        let flicker = if flicker == 0.0 {
            FlickerSpec::new(0.0, 1)?
        } else {
            FlickerSpec::new(flicker, self.time_samples)?
        };
        let mut setup = TomographySetup::new(encoding, flicker);
        setup.slm2 = match self.slm2 {
            Slm2Choice::Ideal => Slm2Model::Ideal,
            Slm2Choice::Quantized => Slm2Model::Quantized,
        };
        let mle = MleConfig::from(self.mle);
        mle.validate()?;
        Ok(PipelineConfig { setup, mle })
    }

    /// Scenario cells in emission order: period, then flicker, then method.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let periods = match self.scenario {
            Scenario::PeriodSweep => self.periods.clone(),
            _ => vec![self.period],
        };
        let mut out = Vec::new();
        for &period in &periods {
            for &flicker in &self.flicker {
                for method in self.method.methods() {
                    let pipeline = self.pipeline(period, flicker)?;
                    out.push(Cell {
                        method,
                        period,
                        levels: pipeline.setup.encoding.levels,
                        flicker,
                        pipeline,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Target states after applying `scale`.
    pub fn targets(&self) -> Result<Vec<Target>> {
        match self.states {
            StateSource::BlochGrid { n_theta, n_phi } => {
                let (nt, np) = scaled_grid(n_theta, n_phi, self.scale);
                Ok(sample_bloch_grid(nt, np)?
                    .into_iter()
                    .map(Target::Bloch)
                    .collect())
            }
            StateSource::Haar { count } => {
                let n = count.div_ceil(self.scale);
                Ok(sample_haar(self.dimension, n, self.seed)?
                    .into_iter()
                    .map(Target::Coefficients)
                    .collect())
            }
        }
    }

    /// Seeded Poisson noise for one (cell, state) pair.
    pub fn shot_noise_for(&self, cell: usize, state: usize) -> Option<ShotNoise> {
        self.shot_noise.map(|n| ShotNoise {
            counts_per_projector: n.counts_per_projector,
            seed: splitmix64(self.seed ^ splitmix64(((cell as u64) << 32) | state as u64)),
        })
    }
}

/// Latitude and longitude counts of a grid reduced by `scale`.
///
/// The divisor is split as `d · (scale/d)`, with `d` the largest divisor of
/// `scale` such that `d² ≤ scale`; latitudes shrink by `d`, longitudes by the
/// rest. Scale 8 turns 44×48 into 22×12.
pub fn scaled_grid(n_theta: usize, n_phi: usize, scale: usize) -> (usize, usize) {
    let scale = scale.max(1);
    let d = (1..=scale)
        .take_while(|d| d * d <= scale)
        .filter(|d| scale % d == 0)
        .last()
        .unwrap_or(1);
    let shrink = |n: usize, by: usize| ((n as f64 / by as f64).round() as usize).max(1);
    (shrink(n_theta, d).max(2), shrink(n_phi, scale / d))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
