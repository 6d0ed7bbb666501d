mod common;

use common::mean_std;
use pnp_core::experiment::{run_experiment, sweep, ExperimentSpec, InitSpec, SweepParam, Task};
use pnp_core::imagecore::mse;
use pnp_core::solver::{analyze_trace, RhoRule, SolverTrace};

fn spec(task: Task, image: &str) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(task, format!("synth:{image}:32").parse().unwrap());
    if task != Task::Qis {
        s.noise = 5.0 / 255.0;
    }
    s
}

#[test]
fn random_initializations_agree() {
    let seeds: Vec<String> = (0..10).map(|i| (1000 + i).to_string()).collect();
    for task in [Task::Interp, Task::SuperRes] {
        let mut s = spec(task, "disks");
        s.init = InitSpec::Random(0);
        let rows = sweep(&s, SweepParam::Seed, &seeds, 1).unwrap();
        let psnrs: Vec<f64> = rows.iter().map(|r| r.final_psnr).collect();
        let (_, sd) = mean_std(&psnrs);
        assert!(sd < 0.1, "{task}: std {sd}");
    }
}

#[test]
fn monotone_runs_close_the_primal_gap() {
    for task in [Task::Deblur, Task::Interp, Task::SuperRes] {
        let mut s = spec(task, "waves");
        s.config = s.config.to_builder().rule(RhoRule::Monotone).build().unwrap();
        let out = run_experiment(&s).unwrap();
        let tol = s.config.tol();
        assert!(out.solution.stopped, "{task}");
        assert!(out.solution.state.primal_gap() <= 2.0 * tol, "{task}");
        let fit = analyze_trace(&out.solution.trace, tol).unwrap();
        assert!(fit.converged && fit.rate < 1.0, "{task}: {fit:?}");
    }
}

#[test]
fn restoration_beats_measurements() {
    for task in [Task::Deblur, Task::Interp, Task::SuperRes, Task::Qis] {
        let out = run_experiment(&spec(task, "blocks")).unwrap();
        assert!(
            out.final_psnr > out.baseline_psnr + 1.0,
            "{task}: {} vs {}",
            out.final_psnr,
            out.baseline_psnr
        );
    }
}

#[test]
fn trace_and_summary_are_consistent() {
    let out = run_experiment(&spec(Task::SuperRes, "mixed")).unwrap();
    let parsed = SolverTrace::from_csv(&out.solution.trace.to_csv()).unwrap();
    assert_eq!(parsed.len(), out.iterations());
    for (a, b) in parsed.rows.iter().zip(&out.solution.trace.rows) {
        assert_eq!(a.k, b.k);
        assert!((a.delta - b.delta).abs() <= 1e-12 * b.delta.abs());
    }
    let recomputed = -10.0 * mse(out.restored(), &out.truth).unwrap().log10();
    assert!((recomputed - out.final_psnr).abs() < 1e-12);
    let last = out.solution.trace.last().unwrap().psnr.unwrap();
    assert!((last - out.final_psnr).abs() < 1e-12);
    let line = out.summary_line();
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(fields.len(), 3);
    assert!((fields[0].parse::<f64>().unwrap() - out.final_psnr).abs() < 1e-4);
    assert_eq!(fields[1].parse::<usize>().unwrap(), out.iterations());
}

#[test]
fn qis_lookup_tracks_root_finding() {
    let mut s = spec(Task::Qis, "disks");
    let direct = run_experiment(&s).unwrap();
    s.lookup_step = Some(1e-3);
    let table = run_experiment(&s).unwrap();
    assert!((direct.final_psnr - table.final_psnr).abs() < 0.05);
}

#[test]
fn different_seeds_change_the_measurements() {
    let a = run_experiment(&spec(Task::Interp, "waves")).unwrap();
    let mut s = spec(Task::Interp, "waves");
    s.seed = 1;
    let b = run_experiment(&s).unwrap();
    assert_ne!(a.baseline, b.baseline);
}
