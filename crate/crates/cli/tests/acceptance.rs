//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::io::Write;
use std::process::Command;

use cpz_core::mimo::{
    monte_carlo_sum_rate, monte_carlo_trace, sum_rate_closed_form, wishart_trace_expectation,
    zf_beamformer, C64,
};
use cpz_core::rng::stream_rng;
use cpz_core::schemes::evaluate_scheme;
use cpz_core::sim::{cluster_for_sectors, run_comparison, sweep_distance, sweep_sectors};
use cpz_core::{
    ChannelMatrix, CpzState, PartitionGrid, Placement, ScenarioConfig, SchemeKind, ShadowingMode,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const PEAK_RATE: f64 = 20e6;

fn wishart_identity() -> Outcome {
    let expected = wishart_trace_expectation(10, 200).map_err(|e| e.to_string())?;
    let mc = monte_carlo_trace(10, 200, 10_000, 2024).map_err(|e| e.to_string())?;
    let rel = (mc - expected).abs() / expected;
    let msg = format!("mean tr = {mc:.7} vs K/(M-K) = {expected:.7}, rel err {rel:.3e} (tol 2e-2)");
    if rel < 0.02 { Ok(msg) } else { Err(msg) }
}

fn zero_forcing() -> Outcome {
    let shapes: Vec<(usize, usize)> = [2usize, 8, 32]
        .iter()
        .flat_map(|&k| [16usize, 64, 200].into_iter().map(move |m| (k, m)))
        .filter(|&(k, m)| k < m)
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let (k, m) = shapes[i as usize % shapes.len()];
        let h = ChannelMatrix::sample_with(k, m, &mut stream_rng(31, i)).map_err(|e| e.to_string())?;
        let w = zf_beamformer(&h).map_err(|e| e.to_string())?;
        let hw = h.entries() * w.entries();
        for r in 0..k {
            for c in 0..k {
                let target = C64::new(if r == c { 1.0 } else { 0.0 }, 0.0);
                worst = worst.max((hw[(r, c)] - target).norm());
            }
        }
    }
    let msg = format!("max |HW - I| = {worst:.3e} over 100 channels, {} shapes (tol 1e-9)", shapes.len());
    if worst < 1e-9 { Ok(msg) } else { Err(msg) }
}

fn closed_form_vs_monte_carlo() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for rho in [0.01, 0.1, 1.0] {
        let closed = sum_rate_closed_form(10, 200, rho, 5e6).map_err(|e| e.to_string())?;
        let mc = monte_carlo_sum_rate(10, 200, rho, 5e6, 2000, 77).map_err(|e| e.to_string())?;
        let rel = (closed - mc).abs() / mc;
        ok &= rel < 0.05;
        parts.push(format!("rho={rho}: rel {rel:.2e}"));
    }
    let msg = format!("{} (tol 5e-2)", parts.join(", "));
    if ok { Ok(msg) } else { Err(msg) }
}

fn scheme_ordering() -> Outcome {
    let cfg = ScenarioConfig { n_trials: 1000, seed: 4, ..ScenarioConfig::default() };
    let trials = run_comparison(&cfg).map_err(|e| e.to_string())?;
    let violations = trials
        .iter()
        .filter(|t| {
            !(t.reports[2].total_power <= t.reports[1].total_power
                && t.reports[1].total_power <= t.reports[0].total_power)
        })
        .count();
    let msg = format!("{violations} violations in {} uniform-disk scenarios", trials.len());
    if violations == 0 && trials.len() == 1000 { Ok(msg) } else { Err(msg) }
}

fn angular_fraction() -> Outcome {
    let cfg = ScenarioConfig {
        placement: Placement::ArcCluster { sector_count_occupied: 1, annulus: 2 },
        n_trials: 50,
        seed: 8,
        ..ScenarioConfig::default()
    };
    let trials = run_comparison(&cfg).map_err(|e| e.to_string())?;
    let mut worst_p: f64 = 0.0;
    let mut worst_ee: f64 = 0.0;
    for t in &trials {
        let (zoom, cpz) = (&t.reports[1], &t.reports[2]);
        if zoom.sum_rate != cpz.sum_rate {
            return Err(format!("trial {}: rates differ", t.trial));
        }
        worst_p = worst_p.max(((cpz.total_power / zoom.total_power) * 18.0 - 1.0).abs());
        let ratio = cpz.ee.ok_or("cpz ee undefined")? / zoom.ee.ok_or("zoom ee undefined")?;
        worst_ee = worst_ee.max((ratio - 18.0).abs() / 18.0);
    }
    let msg = format!("P ratio rel err {worst_p:.2e} (tol 1e-12), EE ratio rel err {worst_ee:.2e} (tol 1e-9)");
    if worst_p < 1e-12 && worst_ee < 1e-9 { Ok(msg) } else { Err(msg) }
}

fn sleep_mode() -> Outcome {
    let cfg = ScenarioConfig {
        placement: Placement::Fixed { positions: vec![] },
        ..ScenarioConfig::default()
    };
    let t = &run_comparison(&cfg).map_err(|e| e.to_string())?[0];
    for r in &t.reports[1..] {
        if r.total_power != 0.0 || r.ee.is_some() {
            return Err(format!("{}: power {} ee {:?}", r.scheme, r.total_power, r.ee));
        }
    }
    // and the CSV renders the undefined EE as an empty field
    let csv = cpz_sim::output::trials_csv(std::slice::from_ref(t));
    let empty_ee = csv
        .lines()
        .skip(2)
        .all(|l| l.split(',').nth(5) == Some(""));
    if !empty_ee {
        return Err("CSV ee field not empty in sleep mode".into());
    }
    Ok("zooming and cpz radiate 0 W with EE null".into())
}

fn edge_rate_guarantee() -> Outcome {
    let floor = PEAK_RATE * (1.0 - 1e-9);
    let mut worst = f64::INFINITY;
    let mut rows = 0usize;
    let base = ScenarioConfig { shadowing: ShadowingMode::DeterministicUnit, ..ScenarioConfig::default() };

    let ds: Vec<f64> = (0..=36).map(|i| 100.0 + 25.0 * i as f64).collect();
    for grid in [(3, 18), (1, 1), (5, 36)] {
        let cfg = ScenarioConfig {
            grid: PartitionGrid::new(grid.0, grid.1, 1000.0).unwrap(),
            n_trials: 2,
            ..base.clone()
        };
        for res in [
            sweep_distance(&cfg, &ds).map_err(|e| e.to_string())?,
            sweep_sectors(&cfg, &[1, 2, 6, 9, 18, 36]).map_err(|e| e.to_string())?,
        ] {
            for r in &res.rows {
                worst = worst.min(r.min_ue_rate.ok_or("sweep row without users")?);
                rows += 1;
            }
        }
    }
    let cfg = ScenarioConfig { n_trials: 200, seed: 12, ..base };
    for t in run_comparison(&cfg).map_err(|e| e.to_string())? {
        for r in &t.reports {
            if let Some(m) = r.min_ue_rate {
                worst = worst.min(m);
                rows += 1;
            }
        }
    }
    let msg = format!("min served-UE rate {worst:.6e} bit/s over {rows} rows (floor {floor:.6e})");
    if worst >= floor { Ok(msg) } else { Err(msg) }
}

fn ee_monotone_in_sectors() -> Outcome {
    let counts = [1usize, 2, 6, 9, 18];
    let cfg = ScenarioConfig { n_trials: 30, seed: 21, ..ScenarioConfig::default() };
    let model = cfg.model();
    for trial in 0..cfg.n_trials {
        let positions = cluster_for_sectors(&cfg, 18, trial).map_err(|e| e.to_string())?;
        let mut prev = f64::NEG_INFINITY;
        for &n in &counts {
            let grid = PartitionGrid::new(3, n, 1000.0).unwrap();
            let st = CpzState::with_positions(grid, &positions).map_err(|e| e.to_string())?;
            let ee = evaluate_scheme(SchemeKind::Cpz, &st, &model)
                .map_err(|e| e.to_string())?
                .ee
                .ok_or("undefined EE")?;
            if ee < prev {
                return Err(format!("trial {trial}: EE drops at {n} sectors"));
            }
            prev = ee;
        }
    }
    let res = sweep_sectors(&cfg, &counts).map_err(|e| e.to_string())?;
    let col: Vec<f64> = res
        .rows
        .iter()
        .filter(|r| r.scheme == SchemeKind::Cpz)
        .map(|r| r.mean_ee.unwrap())
        .collect();
    if col.windows(2).any(|w| w[1] < w[0]) {
        return Err(format!("mean EE column not monotone: {col:?}"));
    }
    Ok(format!("EE nondecreasing over {counts:?} in {} trials and in the sweep means", cfg.n_trials))
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let invocations: [&[&str]; 3] = [
        &["simulate", "--seed", "7", "--trials", "64"],
        &["sweep", "--seed", "7", "--trials", "16", "--variable", "distance", "--values", "150,300,450,600,750,900,1000"],
        &["sweep", "--seed", "7", "--trials", "16", "--variable", "sectors", "--values", "1,2,6,9,18"],
    ];
    for (i, args) in invocations.iter().enumerate() {
        let mut outputs = Vec::new();
        for (j, workers) in ["1", "8", "1", "8"].iter().enumerate() {
            let path = dir.path().join(format!("{i}_{j}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_cpz-sim"))
                .env_remove(cpz_sim::SEED_ENV)
                .args(*args)
                .args(["--workers", workers, "--out", path.to_str().unwrap()])
                .output()
                .map_err(|e| e.to_string())?
                .status;
            if !status.success() {
                return Err(format!("{args:?} exited with {status}"));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{args:?}: CSV differs across runs/worker counts"));
        }
    }
    Ok("simulate and both sweeps byte-identical at 1 and 8 workers".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("1 Wishart identity", wishart_identity),
        ("2 zero forcing", zero_forcing),
        ("3 closed form vs Monte Carlo rate", closed_form_vs_monte_carlo),
        ("4 scheme ordering", scheme_ordering),
        ("5 angular fraction", angular_fraction),
        ("6 sleep mode", sleep_mode),
        ("7 edge-rate guarantee", edge_rate_guarantee),
        ("8 EE monotone in sectors", ee_monotone_in_sectors),
        ("9 reproducibility", reproducibility),
    ];
    // write past the test harness capture so the report always shows
    let mut stdout = std::io::stdout();
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let line = match check() {
            Ok(detail) => format!("[PASS] {name}: {detail}\n"),
            Err(detail) => {
                failed.push(name);
                format!("[FAIL] {name}: {detail}\n")
            }
        };
        stdout.write_all(line.as_bytes()).unwrap();
    }
    stdout.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
