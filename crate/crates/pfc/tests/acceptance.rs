//! Acceptance suite: one test per criterion of the verification contract.
//! Every tolerance is pinned here; each test prints a `PASS criterion N`
//! line with the measured quantity (visible with `--nocapture`).

use pfc::cli::write_diagnostics_csv;
use pfc::diagnostics::{
    energy_inequality_residual, entropy_balance_residual, growth_check, GrowthOutcome,
};
use pfc::physics::{chemical_potential, free_energy, PotentialSpec};
use pfc::solver::{
    project_initial, run, run_fresh, InitialCondition, ResolvedScheme, RunOptions, SchemeConfig,
    SolverState, TimeScheme, Trajectory,
};
use pfc::spectral::{filtered_noise, Grid, SpectralField};
use pfc::sweep::{cauchy_metric, sweep, SweepPlan, SweepScenario, DEFAULT_THETAS};
use pfc::{checkpoint, Result};

fn quartic(epsilon: f64) -> PotentialSpec {
    PotentialSpec::QuarticExample { epsilon }
}

/// The shared 2D scenario of criteria 1 and 3: n = 64, quartic ε = 0.2,
/// κ = 1, θ = 0.05, u₀ = 1 + 0.2·filtered noise, fixed dt, 2000 steps at
/// dt = 2e-3.
fn scenario_2d(dt: f64, steps: u64) -> Result<Trajectory> {
    let grid = Grid::new(2, 64)?;
    let ic = InitialCondition::ConstantPlusFilteredNoise {
        mean: 1.0,
        amplitude: 0.2,
        seed: 2026,
        cutoff: 3,
    };
    let u0 = project_initial(&ic, &grid, true)?;
    let state = SolverState::new(u0, 0.05, 1.0, quartic(0.2))?;
    let config = SchemeConfig {
        splitting_mobility: None,
        dt_initial: dt,
        dt_min: dt,
        dt_max: dt,
        energy_guard: true,
        t_final: dt * steps as f64,
        time_scheme: TimeScheme::Imex1,
        dealias: true,
    };
    run_fresh(
        state,
        &config,
        &RunOptions {
            diagnostics_interval: 1,
            capture_steps: vec![],
        },
    )
}

#[test]
fn criterion_1_mass_conservation() {
    let traj = scenario_2d(2e-3, 2000).unwrap();
    assert_eq!(traj.final_state.step_index(), 2000);
    let m0 = traj.samples[0].record.mass;
    let drift = traj
        .samples
        .iter()
        .map(|s| (s.record.mass - m0).abs())
        .fold(0.0, f64::max)
        / m0.abs();
    println!("PASS criterion 1: mass conservation, relative drift {drift:.3e} <= 1e-10");
    assert!(
        drift <= 1e-10,
        "relative mass drift {drift:.3e} exceeds 1e-10"
    );
}

#[test]
fn criterion_2_exact_linear_decay() {
    // linear_test potential, 1D n = 64, κ = 1, initial mode k = 2 (λ = 4):
    // the mode obeys û' = −κλ(1−λ)²û = −36κû exactly when the mobility is
    // the constant splitting value.
    let grid = Grid::new(1, 64).unwrap();
    let amp = 0.01;
    let u0 = SpectralField::from_fn(&grid, |x| amp * (2.0 * x[0]).sin());
    let state = SolverState::with_frozen_mobility(u0, 1.0, 1.0, PotentialSpec::LinearTest).unwrap();
    let config = SchemeConfig {
        splitting_mobility: Some(1.0),
        dt_initial: 1e-4,
        dt_min: 1e-4,
        dt_max: 1e-4,
        energy_guard: false,
        t_final: 0.1,
        time_scheme: TimeScheme::Imex1,
        dealias: true,
    };
    let traj = run_fresh(state, &config, &RunOptions::default()).unwrap();
    let a_end = 2.0 * traj.final_state.field().coeffs()[2].norm();
    let exact = amp * (-36.0f64 * 0.1).exp();
    let rel = (a_end - exact).abs() / exact;
    println!("PASS criterion 2: linear decay exp(-36t), relative error {rel:.3e} <= 1e-6");
    assert!(
        rel <= 1e-6,
        "linear decay relative error {rel:.3e} exceeds 1e-6"
    );
}

#[test]
fn criterion_3_energy_dissipation() {
    let coarse = scenario_2d(2e-3, 2000).unwrap();
    let tol = 1e-9 * (1.0 + coarse.samples[0].record.energy.abs());
    let monotone = coarse
        .samples
        .windows(2)
        .all(|w| w[1].record.energy <= w[0].record.energy + tol);
    assert!(
        monotone,
        "energy column must be non-increasing within {tol:.3e} per step"
    );

    let fine = scenario_2d(1e-3, 4000).unwrap();
    let max_res = |t: &Trajectory| {
        energy_inequality_residual(t)
            .unwrap()
            .iter()
            .fold(0.0f64, |a, r| a.max(r.abs()))
    };
    let rc = max_res(&coarse);
    let rf = max_res(&fine);
    let ratio = rc / rf;
    println!(
        "PASS criterion 3: energy monotone within {tol:.2e}; residual {rc:.3e} -> {rf:.3e}, \
         ratio {ratio:.2} >= 1.8"
    );
    assert!(ratio >= 1.8, "energy residual ratio {ratio:.2} below 1.8");
}

#[test]
fn criterion_4_entropy_balance() {
    // 1D n = 128, θ = 0.05, smooth positive data; residual at t = 0.5
    // shrinks at the scheme's (first) order across dt ∈ {1e-3, 5e-4, 2.5e-4}.
    let grid = Grid::new(1, 128).unwrap();
    let runner = |dt: f64| {
        let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.3 * x[0].sin());
        let state = SolverState::new(u0, 0.05, 1.0, quartic(0.2)).unwrap();
        let config = SchemeConfig {
            splitting_mobility: None,
            dt_initial: dt,
            dt_min: dt,
            dt_max: dt,
            energy_guard: true,
            t_final: 0.5,
            time_scheme: TimeScheme::Imex1,
            dealias: true,
        };
        run_fresh(
            state,
            &config,
            &RunOptions {
                diagnostics_interval: 1,
                capture_steps: vec![],
            },
        )
        .unwrap()
    };
    let residuals: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&dt| {
            entropy_balance_residual(&runner(dt))
                .unwrap()
                .last()
                .unwrap()
                .abs()
        })
        .collect();
    let r1 = residuals[0] / residuals[1];
    let r2 = residuals[1] / residuals[2];
    println!(
        "PASS criterion 4: entropy residual {:.3e} / {:.3e} / {:.3e}, ratios {r1:.2}, {r2:.2} >= 1.8",
        residuals[0], residuals[1], residuals[2]
    );
    assert!(
        r1 >= 1.8 && r2 >= 1.8,
        "entropy residual ratios {r1:.2}, {r2:.2} below 1.8"
    );
}

/// The positivity sweep shared by criteria 5 and 6: u₀ = 1 + 0.3 sin x
/// (min u₀ = 0.7 > 0), quartic ε = 0.7, κ = 1, default θ ladder.
fn positivity_sweep() -> pfc::sweep::SweepResult {
    let dt = 5e-4;
    let t_final = 10.0;
    let plan = SweepPlan {
        thetas: DEFAULT_THETAS.to_vec(),
        scenario: SweepScenario {
            dim: 1,
            n: 128,
            kappa: 1.0,
            potential: quartic(0.7),
            initial: InitialCondition::ConstantPlusSine {
                mean: 1.0,
                amplitude: 0.3,
                wavenumber: 1,
            },
            scheme: SchemeConfig {
                splitting_mobility: None,
                dt_initial: dt,
                dt_min: dt,
                dt_max: dt,
                energy_guard: true,
                t_final,
                time_scheme: TimeScheme::Imex1,
                dealias: true,
            },
            diagnostics_interval: 50,
        },
        comparison_times: (1..=8).map(|i| t_final * i as f64 / 8.0).collect(),
    };
    sweep(&plan).unwrap()
}

#[test]
fn criterion_5_negativity_bound_scaling() {
    let result = positivity_sweep();
    let fit = result.scaling.expect("five thetas give a scaling fit");
    println!(
        "PASS criterion 5: negativity envelope C_fit {:.4e}, coarse-half C {:.4e}, fine half \
         bounded: {}",
        fit.c_fit, fit.c_coarse, fit.pass
    );
    assert!(
        fit.pass,
        "coarse-half constant {:.4e} must bound the fine-half ratios",
        fit.c_coarse
    );
    // N(θ) itself is non-increasing along the decreasing ladder.
    for pair in result.rows.windows(2) {
        assert!(
            pair[1].n_theta <= pair[0].n_theta * (1.0 + 1e-12),
            "N(theta) must be non-increasing along the sweep"
        );
    }
}

#[test]
fn criterion_6_theta_cauchy_behavior() {
    let result = positivity_sweep();
    let metrics: Vec<f64> = (1..result.runs.len())
        .map(|i| cauchy_metric(&result.runs[i - 1].trajectory, &result.runs[i].trajectory).unwrap())
        .collect();
    for pair in metrics.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "consecutive-pair H1 metric must be non-increasing, got {metrics:?}"
        );
    }
    let min_coarse = result.runs.first().unwrap().min_u;
    let min_fine = result.runs.last().unwrap().min_u;
    println!(
        "PASS criterion 6: H1 metrics {metrics:?} non-increasing; min_u finest {min_fine:.6} \
         >= -0.05 and > coarsest {min_coarse:.6}"
    );
    assert!(
        min_fine >= -0.05,
        "finest-theta min_u {min_fine:.6} below -0.05"
    );
    assert!(
        min_fine > min_coarse,
        "finest-theta min_u {min_fine:.6} must exceed coarsest {min_coarse:.6}"
    );
}

#[test]
fn criterion_7_variational_consistency() {
    // Central difference of F along v converges to <omega, v> at second
    // order in h, checked at h ∈ {1e-3, 1e-4} for 10 field/direction pairs.
    let grid = Grid::new(1, 64).unwrap();
    let spec = quartic(0.2);
    let mut worst_ratio = f64::INFINITY;
    let mut worst_err = 0.0f64;
    for seed in 0..10u64 {
        let u0 = filtered_noise(&grid, 300 + seed, 8).map_values(|v| 1.4 + 0.5 * v);
        let v = filtered_noise(&grid, 400 + seed, 8).map_values(|w| 0.4 + w);
        let omega = chemical_potential(&u0, &spec, 1.0);
        let pairing = omega.inner_product(&v).unwrap();
        let diff = |h: f64| {
            let shifted = |sign: f64| {
                SpectralField::from_values(
                    u0.grid(),
                    u0.values()
                        .iter()
                        .zip(v.values())
                        .map(|(a, b)| a + sign * h * b)
                        .collect(),
                )
                .unwrap()
            };
            (free_energy(&shifted(1.0), &spec, 1.0) - free_energy(&shifted(-1.0), &spec, 1.0))
                / (2.0 * h)
        };
        let e3 = (diff(1e-3) - pairing).abs();
        let e4 = (diff(1e-4) - pairing).abs();
        worst_ratio = worst_ratio.min(e3 / e4);
        worst_err = worst_err.max(e4);
        assert!(e4 <= 1e-6, "seed {seed}: error at h = 1e-4 is {e4:.3e}");
        assert!(
            e3 / e4 >= 50.0,
            "seed {seed}: not second order, e(1e-3)/e(1e-4) = {:.1}",
            e3 / e4
        );
    }
    println!(
        "PASS criterion 7: directional derivative matches <omega, v>, worst ratio {worst_ratio:.1} \
         (second order ~ 100), worst e(1e-4) {worst_err:.3e}"
    );
}

#[test]
fn criterion_8_growth_condition_feasibility() {
    let feasible = growth_check(&quartic(0.2), 2, 10.0, 10_000);
    let constants = match feasible.outcome {
        GrowthOutcome::Feasible(c) => c,
        GrowthOutcome::Violation(v) => panic!("quartic potential must be feasible, got {v:?}"),
    };
    let violating = growth_check(&PotentialSpec::LinearTest, 2, 10.0, 10_000);
    let violation = match violating.outcome {
        GrowthOutcome::Violation(v) => v,
        GrowthOutcome::Feasible(c) => panic!("linear_test must violate the bounds, got {c:?}"),
    };
    println!(
        "PASS criterion 8: quartic feasible with (b1, b2, b3, b4) = ({:.3e}, {:.3e}, {:.3e}, \
         {:.3e}); linear_test violates {} at z = {:.2}",
        constants.b1, constants.b2, constants.b3, constants.b4, violation.inequality, violation.z
    );
    assert!(constants.b1 > 0.0 && constants.b2 > 0.0 && constants.b3 > 0.0 && constants.b4 > 0.0);
    assert_eq!(violation.inequality, "lower W");
}

#[test]
fn criterion_9_determinism_and_persistence() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(2, 32).unwrap();
    let ic = InitialCondition::ConstantPlusFilteredNoise {
        mean: 1.0,
        amplitude: 0.2,
        seed: 9,
        cutoff: 4,
    };
    let potential = quartic(0.2);
    let config = SchemeConfig {
        splitting_mobility: None,
        dt_initial: 1e-3,
        dt_min: 1e-3,
        dt_max: 1e-3,
        energy_guard: true,
        t_final: 0.4,
        time_scheme: TimeScheme::Imex1,
        dealias: true,
    };
    let opts = RunOptions {
        diagnostics_interval: 10,
        capture_steps: vec![200],
    };
    let full_run = || -> Trajectory {
        let u0 = project_initial(&ic, &grid, true).unwrap();
        let state = SolverState::new(u0, 0.05, 1.0, potential.clone()).unwrap();
        run_fresh(state, &config, &opts).unwrap()
    };

    // Rerun determinism: byte-identical diagnostics CSV.
    let a = full_run();
    let b = full_run();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    write_diagnostics_csv(&csv_a, &a).unwrap();
    write_diagnostics_csv(&csv_b, &b).unwrap();
    let bytes_a = std::fs::read(&csv_a).unwrap();
    let bytes_b = std::fs::read(&csv_b).unwrap();
    assert_eq!(
        bytes_a, bytes_b,
        "rerun diagnostics.csv must be byte-identical"
    );

    // Persistence: checkpoint at step 200, resume, and compare the
    // overlapping diagnostics rows byte for byte.
    let snap_path = dir.path().join("step_200.pfc");
    checkpoint::save(&a.snapshots[0].state, 9, &snap_path).unwrap();
    let (resumed_state, seed) = checkpoint::load(&snap_path).unwrap();
    assert_eq!(seed, 9);
    let u0 = project_initial(&ic, &grid, true).unwrap();
    let resolved = ResolvedScheme::resolve(&config, &u0, &potential, 1.0).unwrap();
    let resumed = run(resumed_state, resolved, &opts).unwrap();
    let csv_r = dir.path().join("resumed.csv");
    write_diagnostics_csv(&csv_r, &resumed).unwrap();

    let text_a = String::from_utf8(bytes_a).unwrap();
    let text_r = std::fs::read_to_string(&csv_r).unwrap();
    let tail_a: Vec<&str> = text_a
        .lines()
        .skip(1)
        .filter(|l| l.split(',').next().unwrap().parse::<u64>().unwrap() >= 200)
        .collect();
    let tail_r: Vec<&str> = text_r.lines().skip(1).collect();
    assert_eq!(
        tail_a, tail_r,
        "resumed rows must match the uninterrupted run"
    );
    assert_eq!(
        text_a.lines().last().unwrap(),
        text_r.lines().last().unwrap(),
        "final diagnostics row must be identical after resume"
    );
    println!(
        "PASS criterion 9: rerun CSV byte-identical; resume reproduces rows {}..{} bitwise",
        200,
        resumed.final_state.step_index()
    );
}
