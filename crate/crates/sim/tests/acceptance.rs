//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use spatial_qudit::grating::wrap_phase;
use spatial_qudit::{
    bloch_state, born_frequencies, encode_state, fidelity, first_order_coefficient,
    first_order_efficiency, instantaneous_mask, mle_reconstruct, mub_bases, sample_haar,
    BlochAngles, EncodingOptions, FlickerSpec, Method, MleConfig, PhaseMask,
};
use spatial_qudit_sim::config::{MethodChoice, Scenario, StateSource};
use spatial_qudit_sim::output::{write_csv, CellSummary};
use spatial_qudit_sim::{run, ExperimentConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn wrap_pi(x: f64) -> f64 {
    let y = wrap_phase(x);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

fn efficiency_law() -> Verdict {
    let e1 = (first_order_efficiency(TAU).unwrap() - 1.0).abs();
    let e2 = (first_order_efficiency(PI).unwrap() - 4.0 / (PI * PI)).abs();
    verdict(
        e1 <= 1e-12 && e2 <= 1e-12,
        format!("|eps(2pi) - 1| = {e1:.1e}, |eps(pi) - 4/pi^2| = {e2:.1e} (tol 1e-12)"),
    )
}

fn shift_theorem() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(1000);
    let (mut worst, mut checks) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let p = rng.random_range(2..=32usize);
        let mask =
            PhaseMask::from_samples((0..p).map(|_| rng.random_range(0.0..2.0 * TAU)).collect());
        let t0 = first_order_coefficient(&mask);
        for delta in 0..p {
            let t = first_order_coefficient(&mask.shifted(delta));
            let err = wrap_pi(t.arg() - t0.arg() - TAU * delta as f64 / p as f64).abs();
            worst = worst.max(err);
            checks += 1;
        }
    }
    verdict(
        worst <= 1e-12,
        format!("1000 masks, {checks} shifts, max phase error {worst:.1e} (tol 1e-12)"),
    )
}

fn mub_suite() -> Verdict {
    let mut worst = 0.0f64;
    let mut counts = Vec::new();
    for d in [2usize, 3, 7] {
        let set = mub_bases(d).unwrap();
        counts.push(set.bases().len() == d + 1);
        let vecs: Vec<_> = set.iter().collect();
        for (ja, ka, a) in &vecs {
            for (jb, kb, b) in &vecs {
                let o = a.overlap_sqr(b);
                let want = if ja != jb {
                    1.0 / d as f64
                } else if ka == kb {
                    1.0
                } else {
                    0.0
                };
                worst = worst.max((o - want).abs());
            }
        }
    }
    let complete = counts.iter().all(|&c| c);
    verdict(
        worst <= 1e-12 && complete,
        format!("D in {{2,3,7}}: D+1 bases each = {complete}, max overlap defect {worst:.1e} (tol 1e-12)"),
    )
}

fn mle_oracle() -> Verdict {
    let mut worst = 1.0f64;
    let mut parts = Vec::new();
    for d in [2usize, 3, 7] {
        let set = mub_bases(d).unwrap();
        let mut min_d = 1.0f64;
        for s in sample_haar(d, 100, 77 + d as u64).unwrap() {
            let out =
                mle_reconstruct(&born_frequencies(&s, &set), &set, &MleConfig::default()).unwrap();
            min_d = min_d.min(fidelity(&s, &out.rho).unwrap());
        }
        parts.push(format!("D={d} min F={min_d:.10}"));
        worst = worst.min(min_d);
    }
    verdict(
        worst >= 1.0 - 1e-6,
        format!(
            "100 Haar states per D: {} (need >= 1 - 1e-6)",
            parts.join(", ")
        ),
    )
}

fn reduced(scenario: Scenario) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(scenario);
    c.scale = 8;
    c
}

fn flicker_free_gd_quality() -> Verdict {
    let mut c = reduced(Scenario::BlochSweep);
    c.flicker = vec![0.0];
    c.method = MethodChoice::Gd;
    let out = run(&c).unwrap();
    let s = &out.cells[0];
    let (min, mean) = (s.min.unwrap(), s.mean.unwrap());
    verdict(
        s.count == 264 && min >= 0.999 && mean >= 0.9995,
        format!(
            "p=16 a=0, {} grid states: min F = {min:.6} (need >= 0.999), mean F = {mean:.6} (need >= 0.9995)",
            s.count
        ),
    )
}

fn period_ordering() -> Verdict {
    let out = run(&reduced(Scenario::PeriodSweep)).unwrap();
    let by_p = |p: usize| -> &CellSummary { out.cells.iter().find(|c| c.p == p).unwrap() };
    let (c4, c8, c16) = (by_p(4), by_p(8), by_p(16));
    let (m4, m8, m16) = (c4.mean.unwrap(), c8.mean.unwrap(), c16.mean.unwrap());
    let eq4 = c4.equatorial_min.unwrap();
    let min16 = c16.min.unwrap();
    let bound = (PI / 8.0).cos().powi(2);
    verdict(
        m16 > m8 && m8 > m4 && eq4 >= bound - 1e-6 && eq4 < min16,
        format!(
            "{} states: mean p=4 {m4:.6} < p=8 {m8:.6} < p=16 {m16:.6}; p=4 equator min {eq4:.6} >= cos^2(pi/8) {bound:.6} and < p=16 min {min16:.6}",
            c16.count
        ),
    )
}

/// Qudit-histogram runs for D ∈ {2, 3, 7}, 200 Haar states each.
fn comparison_runs() -> Vec<(usize, Vec<CellSummary>)> {
    [2usize, 3, 7]
        .iter()
        .map(|&d| {
            let mut c = ExperimentConfig::defaults(Scenario::QuditHist);
            c.dimension = d;
            c.states = StateSource::Haar { count: 200 };
            (d, run(&c).unwrap().cells)
        })
        .collect()
}

fn cell<'a>(cells: &'a [CellSummary], method: &str, a: f64) -> &'a CellSummary {
    cells
        .iter()
        .find(|c| c.method == method && c.a == a)
        .unwrap()
}

fn method_comparison(runs: &[(usize, Vec<CellSummary>)]) -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, cells) in runs {
        for a in [0.2, 0.3, 0.6] {
            let (pa, gd) = (cell(cells, "PA", a), cell(cells, "GD", a));
            let (mp, mg) = (pa.mean.unwrap(), gd.mean.unwrap());
            let (sp, sg) = (pa.std.unwrap(), gd.std.unwrap());
            let good = mg > mp && sg < sp;
            ok &= good;
            lines.push(format!(
                "\n      D={d} a={a}: PA {mp:.4}±{sp:.4}  GD {mg:.4}±{sg:.4}{}",
                if good { "" } else { "  <- violated" }
            ));
        }
    }
    verdict(
        ok,
        format!(
            "200 states per cell, GD mean higher and std lower:{}",
            lines.concat()
        ),
    )
}

fn gd_flicker_insensitivity(runs: &[(usize, Vec<CellSummary>)]) -> Verdict {
    let cells = &runs.iter().find(|(d, _)| *d == 2).unwrap().1;
    let lo = cell(cells, "GD", 0.2).mean.unwrap();
    let hi = cell(cells, "GD", 0.6).mean.unwrap();
    let diff = (hi - lo).abs();
    verdict(
        diff < 0.02,
        format!("D=2, 200 states: mean GD a=0.2 {lo:.6}, a=0.6 {hi:.6}, |diff| = {diff:.2e} (need < 0.02)"),
    )
}

fn equal_amplitude_exactness() -> Verdict {
    let opts = EncodingOptions::with_period(16);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for j in 0..48 {
        let phi = -PI + TAU * (j + 1) as f64 / 48.0;
        let state = bloch_state(BlochAngles::new(PI / 2.0, phi.min(PI)).unwrap());
        let enc = encode_state(&state, Method::GratingDisplacement, &opts).unwrap();
        let masks = enc.masks();
        let g = enc.gratings();
        let want = TAU * (g[1].displacement() as f64 - g[0].displacement() as f64) / 16.0;
        for a in [0.2, 0.3, 0.6, 1.2] {
            let spec = FlickerSpec::new(a, 32).unwrap();
            for t in spec.times() {
                let c0 = first_order_coefficient(&instantaneous_mask(&masks[0], &spec, t));
                let c1 = first_order_coefficient(&instantaneous_mask(&masks[1], &spec, t));
                worst = worst.max(wrap_pi(c1.arg() - c0.arg() - want).abs());
                checks += 1;
            }
        }
    }
    verdict(
        worst <= 1e-12,
        format!("48 equatorial states x 4 amplitudes x 32 samples = {checks} checks, max deviation {worst:.1e} rad"),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = reduced(Scenario::BlochSweep);
    let mut files = Vec::new();
    for threads in [1usize, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let out = pool.install(|| run(&config)).unwrap();
        let path = dir.path().join(format!("run{threads}.csv"));
        write_csv(&path, &out.records).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    let same = files[0] == files[1];
    verdict(
        same && !files[0].is_empty(),
        format!(
            "bloch-sweep at scale 8 ({} bytes), 1 vs 3 worker threads: identical = {same}",
            files[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict, f64)> = Vec::new();
    let mut timed = |name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {name}: {} [{secs:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((name, v, secs));
    };

    timed("efficiency-law", &mut efficiency_law);
    timed("shift-theorem", &mut shift_theorem);
    timed("mub-suite", &mut mub_suite);
    timed("mle-oracle", &mut mle_oracle);
    timed("flicker-free-gd-quality", &mut flicker_free_gd_quality);
    timed("period-ordering", &mut period_ordering);
    let mut runs = Vec::new();
    timed("method-comparison", &mut || {
        runs = comparison_runs();
        method_comparison(&runs)
    });
    timed("gd-flicker-insensitivity", &mut || {
        gd_flicker_insensitivity(&runs)
    });
    timed("equal-amplitude-exactness", &mut equal_amplitude_exactness);
    timed("determinism", &mut determinism);

    let failed: Vec<&str> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
