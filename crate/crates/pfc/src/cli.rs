//! Command-line entry points and on-disk output layout.
//!
//! Subcommands: `run`, `sweep`, `verify`, `linear-test`, `growth-check`.
//! A run writes `output_dir/{diagnostics.csv, config.echo, snapshots/}`;
//! a sweep writes one `theta_<value>/` subdirectory per member plus
//! `sweep_summary.csv`. All CSV floats carry 17 significant digits, so files
//! from identical configurations are byte-identical across reruns.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{fmt_csv_float, parse_config, RunConfig};
use crate::diagnostics::GrowthOutcome;
use crate::error::{Error, Result};
use crate::physics::PotentialSpec;
use crate::solver::{
    project_initial, run, ResolvedScheme, RunOptions, SchemeConfig, SolverState, TimeScheme,
    Trajectory,
};
use crate::spectral::{Grid, SpectralField};
use crate::sweep::SummaryRow;
use crate::{checkpoint, diagnostics, sweep, verify};

#[derive(Parser, Debug)]
#[command(
    name = "pfc",
    version,
    about = "Phase field crystal solver with degenerate mobility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one θ-regularized trajectory and write diagnostics.
    Run {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Resume from a snapshot written by an earlier run of the same
        /// configuration.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run the θ → 0 continuation study.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Execute the built-in invariant battery and print a pass/fail table.
    Verify,
    /// Validate the stepper against the exactly solvable linear dynamics.
    LinearTest {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 0.1)]
        t_final: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Search for growth-bound constants of a potential.
    GrowthCheck {
        #[arg(long, default_value = "quartic_example")]
        potential: String,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Half-width R of the sampled range [-R, R].
        #[arg(long, default_value_t = 10.0)]
        range: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

/// Parse `argv` and dispatch. Returns the process exit code: 0 on success,
/// 1 on failed checks or runtime errors, 2 on usage errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run { config, resume } => cmd_run(&config, resume.as_deref()),
        Command::Sweep { config } => cmd_sweep(&config),
        Command::Verify => cmd_verify(),
        Command::LinearTest {
            n,
            dt,
            t_final,
            kappa,
        } => cmd_linear_test(n, dt, t_final, kappa),
        Command::GrowthCheck {
            potential,
            epsilon,
            gamma,
            kappa,
            range,
            samples,
        } => cmd_growth_check(&potential, epsilon, gamma, kappa, range, samples),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::DtUnderflow { last_record, .. } = &e {
                eprintln!("last diagnostics before abort: {last_record:?}");
            }
            1
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        key: "<config>".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    parse_config(&text)
}

/// Write a trajectory's samples in the standard diagnostics CSV layout.
pub fn write_diagnostics_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = fs::File::create(path)?;
    writeln!(
        w,
        "step,t,dt,mass,energy,dissipation,entropy,min_u,negativity"
    )?;
    for s in &traj.samples {
        let r = &s.record;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.step,
            fmt_csv_float(r.t),
            fmt_csv_float(s.dt),
            fmt_csv_float(r.mass),
            fmt_csv_float(r.energy),
            fmt_csv_float(r.dissipation),
            fmt_csv_float(r.entropy),
            fmt_csv_float(r.min_u),
            fmt_csv_float(r.negativity)
        )?;
    }
    Ok(())
}

fn write_sweep_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = fs::File::create(path)?;
    writeln!(
        w,
        "theta,N_theta,C_ratio,min_u,max_cauchy_to_prev,wall_time_s"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_csv_float(r.theta),
            fmt_csv_float(r.n_theta),
            fmt_csv_float(r.c_ratio),
            fmt_csv_float(r.min_u),
            fmt_csv_float(r.max_cauchy_to_prev),
            fmt_csv_float(r.wall_time_s)
        )?;
    }
    Ok(())
}

fn snapshot_steps(cfg: &RunConfig) -> Vec<u64> {
    if cfg.snapshot_interval == 0 {
        return Vec::new();
    }
    let total = (cfg.t_final / cfg.dt_initial).round() as u64;
    (1..=total / cfg.snapshot_interval.max(1))
        .map(|k| k * cfg.snapshot_interval)
        .collect()
}

/// Shared by `run` and the sweep member writer: emit the standard output
/// layout for one trajectory.
fn write_run_outputs(dir: &Path, cfg: &RunConfig, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.echo"), cfg.echo())?;
    write_diagnostics_csv(&dir.join("diagnostics.csv"), traj)?;
    if !traj.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        fs::create_dir_all(&snap_dir)?;
        for snap in &traj.snapshots {
            let path = snap_dir.join(format!("step_{}.pfc", snap.step_index));
            checkpoint::save(&snap.state, cfg.seed, &path)?;
        }
    }
    Ok(())
}

fn cmd_run(config_path: &Path, resume: Option<&Path>) -> Result<i32> {
    let cfg = load_config(config_path)?;
    let grid = Grid::new(cfg.dim, cfg.n)?;
    let potential = cfg.potential_spec()?;

    if matches!(potential, PotentialSpec::DerivationForm { .. }) {
        // The derivation-form potential has no a-priori growth guarantee for
        // arbitrary (kappa, gamma): check at configuration time and report.
        let report = diagnostics::growth_check(&potential, potential.growth_exponent(), 10.0, 4001);
        match &report.outcome {
            GrowthOutcome::Feasible(c) => println!(
                "growth check: feasible with b1 = {:.3e}, b2 = {:.3e}, b3 = {:.3e}, b4 = {:.3e}",
                c.b1, c.b2, c.b3, c.b4
            ),
            GrowthOutcome::Violation(v) => println!(
                "growth check: WARNING, {} violated at z = {:.3} (lhs {:.3e}, rhs {:.3e})",
                v.inequality, v.z, v.lhs, v.rhs
            ),
        }
    }

    // The run's initial data; also needed on resume to reproduce the
    // auto-resolved splitting mobility and the energy-guard tolerance.
    let u0 = project_initial(&cfg.initial_condition(), &grid, cfg.positivity_study)?;
    let scheme = cfg.scheme_config();
    let resolved = ResolvedScheme::resolve(&scheme, &u0, &potential, cfg.kappa)?;

    let state = match resume {
        None => SolverState::new(u0, cfg.theta, cfg.kappa, potential.clone())?,
        Some(path) => {
            let (state, _seed) = checkpoint::load(path)?;
            if state.grid().dim() != cfg.dim || state.grid().modes_per_axis() != cfg.n {
                return Err(Error::Checkpoint(format!(
                    "snapshot grid {}^{} does not match config {}^{}",
                    state.grid().modes_per_axis(),
                    state.grid().dim(),
                    cfg.n,
                    cfg.dim
                )));
            }
            if state.potential() != &potential
                || state.theta() != cfg.theta
                || state.kappa() != cfg.kappa
            {
                return Err(Error::Checkpoint(
                    "snapshot physics parameters do not match the configuration".into(),
                ));
            }
            state
        }
    };

    let opts = RunOptions {
        diagnostics_interval: cfg.diagnostics_interval,
        capture_steps: snapshot_steps(&cfg),
    };
    let traj = run(state, resolved, &opts)?;
    let out_dir = PathBuf::from(&cfg.output_dir);
    write_run_outputs(&out_dir, &cfg, &traj)?;

    let last = traj.final_sample();
    println!(
        "run complete: {} steps to t = {:.6}, energy {:.6e}, min_u {:.6e}",
        traj.final_state.step_index(),
        traj.final_state.t(),
        last.record.energy,
        last.record.min_u
    );
    println!("outputs in {}", out_dir.display());
    Ok(0)
}

fn theta_dir_name(theta: f64) -> String {
    format!("theta_{theta}")
}

fn cmd_sweep(config_path: &Path) -> Result<i32> {
    let cfg = load_config(config_path)?;
    let plan = cfg.sweep_plan()?;
    let out_dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out_dir)?;

    let result = install_thread_cap(|| sweep::sweep(&plan));
    let result = match result {
        Ok(r) => r,
        Err(Error::SweepAborted {
            theta,
            source,
            completed,
        }) => {
            write_sweep_summary(&out_dir.join("sweep_summary.csv"), &completed)?;
            eprintln!("sweep aborted at theta = {theta}: {source}");
            eprintln!("partial summary written to {}", out_dir.display());
            return Ok(1);
        }
        Err(e) => return Err(e),
    };

    for run_out in &result.runs {
        let member_cfg = RunConfig {
            theta: run_out.theta,
            ..cfg.clone()
        };
        let dir = out_dir.join(theta_dir_name(run_out.theta));
        write_run_outputs(&dir, &member_cfg, &run_out.trajectory)?;
    }
    write_sweep_summary(&out_dir.join("sweep_summary.csv"), &result.rows)?;

    println!("theta       N_theta      C_ratio      min_u        cauchy_prev");
    for r in &result.rows {
        println!(
            "{:<10.4e} {:<12.4e} {:<12.4e} {:<12.4e} {:<12.4e}",
            r.theta, r.n_theta, r.c_ratio, r.min_u, r.max_cauchy_to_prev
        );
    }
    if let Some(fit) = result.scaling {
        println!(
            "negativity envelope: C_fit = {:.4e}, coarse-half C = {:.4e} -> {}",
            fit.c_fit,
            fit.c_coarse,
            if fit.pass { "PASS" } else { "FAIL" }
        );
        return Ok(if fit.pass { 0 } else { 1 });
    }
    Ok(0)
}

/// Honor `PFC_THREADS` as a cap on sweep parallelism.
fn install_thread_cap<T>(f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    if let Ok(v) = std::env::var("PFC_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                    return pool.install(f);
                }
            }
        }
    }
    f()
}

fn cmd_verify() -> Result<i32> {
    let checks = verify::run_all();
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("[{status}] {}", c.name);
        } else {
            println!("[{status}] {} ({})", c.name, c.detail);
        }
        if !c.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { 0 } else { 1 })
}

fn cmd_linear_test(n: usize, dt: f64, t_final: f64, kappa: f64) -> Result<i32> {
    let grid = Grid::new(1, n)?;
    let amp = 0.01;
    let u0 = SpectralField::from_fn(&grid, |x| amp * (2.0 * x[0]).sin());
    let state = SolverState::with_frozen_mobility(u0, 1.0, kappa, PotentialSpec::LinearTest)?;
    let config = SchemeConfig {
        splitting_mobility: Some(1.0),
        dt_initial: dt,
        dt_min: dt,
        dt_max: dt,
        energy_guard: false,
        t_final,
        time_scheme: TimeScheme::Imex1,
        dealias: true,
    };
    let traj = crate::solver::run_fresh(state, &config, &RunOptions::default())?;
    let t = traj.final_state.t();
    let a_end = 2.0 * traj.final_state.field().coeffs()[2].norm();
    // Mode k = 2: lambda = 4, symbol rate kappa*lambda*(1-lambda)^2 = 36*kappa.
    let rate = 36.0 * kappa;
    let expected = amp * (-rate * t).exp();
    let rel = (a_end - expected).abs() / expected;
    println!("linear decay validation: mode k = 2, rate {rate}");
    println!("  amplitude at t = {t}: computed {a_end:.12e}, exact {expected:.12e}");
    println!("  max relative decay error: {rel:.3e}");
    let pass = rel <= 1e-6;
    println!(
        "  {}",
        if pass {
            "PASS (<= 1e-6)"
        } else {
            "FAIL (> 1e-6)"
        }
    );
    Ok(if pass { 0 } else { 1 })
}

fn cmd_growth_check(
    potential: &str,
    epsilon: f64,
    gamma: Option<f64>,
    kappa: f64,
    range: f64,
    samples: usize,
) -> Result<i32> {
    let spec = match potential {
        "quartic_example" => PotentialSpec::QuarticExample { epsilon },
        "derivation_form" => PotentialSpec::DerivationForm {
            gamma: gamma.ok_or_else(|| Error::config("gamma", "required for derivation_form"))?,
            kappa,
            epsilon,
        },
        "linear_test" => PotentialSpec::LinearTest,
        other => {
            return Err(Error::config(
                "potential",
                format!("unknown potential \"{other}\""),
            ))
        }
    };
    let report = diagnostics::growth_check(&spec, spec.growth_exponent(), range, samples);
    println!(
        "growth check for {} (m = {}, range [-{range}, {range}], {} samples)",
        spec.kind_name(),
        report.m,
        report.samples
    );
    match &report.outcome {
        GrowthOutcome::Feasible(c) => {
            println!(
                "  feasible: b1 = {:.6e}, b2 = {:.6e}, b3 = {:.6e}, b4 = {:.6e}",
                c.b1, c.b2, c.b3, c.b4
            );
            Ok(0)
        }
        GrowthOutcome::Violation(v) => {
            println!(
                "  violation of {} at z = {:.6}: lhs {:.6e} vs rhs {:.6e}",
                v.inequality, v.z, v.lhs, v.rhs
            );
            Ok(1)
        }
    }
}
