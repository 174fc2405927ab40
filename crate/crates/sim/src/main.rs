use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use spatial_qudit::measurement::measure_encoded;
use spatial_qudit::tomography::mle_reconstruct_traced;
use spatial_qudit::{
    bloch_state, encode_state, fidelity, mub_bases, normalize_state, BlochAngles, StateVector, C64,
};
use spatial_qudit_sim::masks::export_masks;
use spatial_qudit_sim::output::emit_partial;
use spatial_qudit_sim::{
    emit_results, run, ExperimentConfig, MethodChoice, OutputFormat, Scenario,
};

/// Spatial-qudit preparation on phase-only SLMs: sweeps, mask dumps and
/// single-state tomography.
#[derive(Parser)]
#[command(name = "qudit-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Qubit states on a Bloch-sphere grid, PA and GD under flicker.
    BlochSweep(SweepArgs),
    /// Haar-random qudits, fidelity histograms per method and flicker.
    QuditHist(SweepArgs),
    /// Flicker-free GD Bloch grid for several grating periods.
    PeriodSweep(SweepArgs),
    /// Write the SLM masks of one state.
    Encode(EncodeArgs),
    /// Run one state through the pipeline and print every stage.
    Tomo(TomoArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Divide the number of states by this factor.
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
}

#[derive(Args)]
struct StateArgs {
    /// Polar angle of a qubit state.
    #[arg(long, requires = "phi", conflicts_with = "coeffs")]
    theta: Option<f64>,
    /// Azimuth of a qubit state.
    #[arg(long, requires = "theta", allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Qudit amplitudes as "re,im;re,im;...", normalized before use.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<MethodChoice>,
    #[command(flatten)]
    state: StateArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TomoArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<MethodChoice>,
    /// Flicker amplitude; defaults to the first entry of the config list.
    #[arg(long)]
    flicker: Option<f64>,
    #[command(flatten)]
    state: StateArgs,
}

fn parse_coeffs(text: &str) -> anyhow::Result<Vec<C64>> {
    text.split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [re, im] => Ok(C64::new(
                    re.parse()
                        .with_context(|| format!("bad real part {re:?}"))?,
                    im.parse()
                        .with_context(|| format!("bad imaginary part {im:?}"))?,
                )),
                _ => bail!("expected \"re,im\", got {pair:?}"),
            }
        })
        .collect()
}

fn target_state(args: &StateArgs) -> anyhow::Result<StateVector> {
    match (args.theta, args.phi, &args.coeffs) {
        (Some(theta), Some(phi), None) => Ok(bloch_state(BlochAngles::new(theta, phi)?)),
        (None, None, Some(c)) => Ok(normalize_state(&parse_coeffs(c)?)?),
        _ => bail!("give either --theta and --phi, or --coeffs"),
    }
}

fn sweep(scenario: Scenario, args: &SweepArgs) -> anyhow::Result<()> {
    let mut config = ExperimentConfig::load(scenario, args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(scale) = args.scale {
        config.scale = scale;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let output = match run(&config) {
        Ok(o) => o,
        Err(failure) => {
            if !failure.completed.is_empty() {
                let path = emit_partial(scenario, &failure.completed, &config.output_dir)?;
                eprintln!("partial results written to {}", path.display());
            }
            return Err(failure.into());
        }
    };
    for c in &output.cells {
        print!(
            "{scenario} D={} {} p={} N={} a={}: n={} mean={:.6} std={:.6} min={:.6}",
            c.dimension,
            c.method,
            c.p,
            c.levels,
            c.a,
            c.count,
            c.mean.unwrap_or(f64::NAN),
            c.std.unwrap_or(f64::NAN),
            c.min.unwrap_or(f64::NAN),
        );
        match c.equatorial_min {
            Some(e) => println!(" equator_min={e:.6}"),
            None => println!(),
        }
    }
    for path in emit_results(&output, &config.output_dir, args.format)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn single_state_config(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    // Encoding and tomography settings come from the qudit scenario.
    Ok(ExperimentConfig::load(Scenario::QuditHist, path)?)
}

fn encode(args: &EncodeArgs) -> anyhow::Result<()> {
    let config = single_state_config(args.config.as_deref())?;
    let target = target_state(&args.state)?;
    let dir = args.out.clone().unwrap_or(config.output_dir.clone());
    let opts = config.encoding(config.period);
    for method in args.method.unwrap_or(config.method).methods() {
        let enc = encode_state(&target, method, &opts)?;
        let stem = format!("masks_{}", method.tag().to_ascii_lowercase());
        for path in export_masks(&target, &enc, &dir, &stem)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn tomo(args: &TomoArgs) -> anyhow::Result<()> {
    let mut config = single_state_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let target = target_state(&args.state)?;
    let projectors = mub_bases(target.dim())?;
    let a = args.flicker.unwrap_or(config.flicker[0]);
    for method in args.method.unwrap_or(config.method).methods() {
        let mut pipeline = config.pipeline(config.period, a)?;
        pipeline.setup.shot_noise = config.shot_noise_for(0, 0);
        let setup = &pipeline.setup;
        println!(
            "== {} D={} p={} N={} a={} T={}",
            method.tag(),
            target.dim(),
            setup.encoding.period,
            setup.encoding.levels,
            a,
            setup.flicker.samples_per_frame()
        );
        let enc = encode_state(&target, method, &setup.encoding)?;
        for (l, (g, ip)) in enc
            .gratings()
            .iter()
            .zip(enc.intrinsic_phases())
            .enumerate()
        {
            println!(
                "slit {l}: depth={:.6} displacement={} added_phase={:.6} intrinsic_phase={:.3e}",
                g.depth(),
                g.displacement(),
                g.added_phase(),
                ip
            );
        }
        let records = measure_encoded(&enc, &projectors, setup)?;
        for (j, basis) in projectors.bases().iter().enumerate() {
            let f: Vec<String> = records
                .iter()
                .filter(|r| r.basis == j)
                .map(|r| format!("{:.6}", r.frequency))
                .collect();
            debug_assert_eq!(f.len(), basis.len());
            println!("basis {j}: {}", f.join(" "));
        }
        let mut trace = Vec::new();
        let mle = mle_reconstruct_traced(&records, &projectors, &pipeline.mle, Some(&mut trace))?;
        let step = (trace.len() / 10).max(1);
        for (i, ll) in trace.iter().enumerate() {
            if i % step == 0 || i + 1 == trace.len() {
                println!("iter {:>5}: log-likelihood {ll:.12}", i + 1);
            }
        }
        println!(
            "mle: iterations={} converged={} dilution_fallback={} truncated_rank={}",
            mle.iterations,
            mle.converged,
            mle.dilution_fallback,
            mle.truncated_rank.map_or("none".into(), |r| r.to_string())
        );
        let eig: Vec<String> = mle
            .rho
            .eigenvalues()
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect();
        println!("rho eigenvalues: {}", eig.join(" "));
        println!("fidelity: {:.10}", fidelity(&target, &mle.rho)?);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::BlochSweep(a) => sweep(Scenario::BlochSweep, a),
        Command::QuditHist(a) => sweep(Scenario::QuditHist, a),
        Command::PeriodSweep(a) => sweep(Scenario::PeriodSweep, a),
        Command::Encode(a) => encode(a),
        Command::Tomo(a) => tomo(a),
    }
}
