//! θ → 0 continuation: run one scenario across a decreasing sequence of
//! mobility regularizations, measure how the solutions approach each other
//! in `C([0,T]; H¹)`, and test the negativity functional against its
//! `C(θ² + θ + θ^{1/2})` envelope.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::physics::PotentialSpec;
use crate::solver::{
    project_initial, run, InitialCondition, ResolvedScheme, RunOptions, SchemeConfig, SolverState,
    Trajectory,
};
use crate::spectral::Grid;

/// The scenario shared by all member runs of a sweep.
#[derive(Clone, Debug)]
pub struct SweepScenario {
    pub dim: usize,
    pub n: usize,
    pub kappa: f64,
    pub potential: PotentialSpec,
    pub initial: InitialCondition,
    pub scheme: SchemeConfig,
    pub diagnostics_interval: u64,
}

/// A continuation plan: strictly decreasing positive θ values, the shared
/// scenario (with `min u₀ > 0` enforced), and the times at which member
/// solutions are compared.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub thetas: Vec<f64>,
    pub scenario: SweepScenario,
    pub comparison_times: Vec<f64>,
}

/// Default θ sequence: two decades, geometric-ish.
pub const DEFAULT_THETAS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(Error::Sweep("theta sequence is empty".into()));
        }
        for pair in self.thetas.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::Sweep(format!(
                    "theta sequence must be strictly decreasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if self.thetas.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::Sweep("every theta must lie in (0, 1)".into()));
        }
        let s = &self.scenario;
        s.scheme.validate()?;
        if s.scheme.dt_min != s.scheme.dt_max || s.scheme.dt_initial != s.scheme.dt_min {
            return Err(Error::Sweep(
                "sweep members need a fixed dt (dt_min == dt_initial == dt_max) so their \
                 sample times line up"
                    .into(),
            ));
        }
        if s.diagnostics_interval == 0 {
            return Err(Error::Sweep("diagnostics_interval must be >= 1".into()));
        }
        let steps = (s.scheme.t_final / s.scheme.dt_initial).round() as u64;
        if steps / s.diagnostics_interval < 100 {
            return Err(Error::Sweep(format!(
                "cadence too coarse: {} samples per run, need at least 100 for the \
                 ess-sup-in-time maxima",
                steps / s.diagnostics_interval
            )));
        }
        Ok(())
    }

    fn capture_steps(&self) -> Vec<u64> {
        let dt = self.scenario.scheme.dt_initial;
        let total = (self.scenario.scheme.t_final / dt).round() as u64;
        let mut steps: Vec<u64> = self
            .comparison_times
            .iter()
            .map(|&t| ((t / dt).round() as u64).min(total))
            .collect();
        steps.push(total);
        steps.sort_unstable();
        steps.dedup();
        steps
    }
}

/// One member run's reduced outputs.
#[derive(Clone, Debug)]
pub struct ThetaRun {
    pub theta: f64,
    pub trajectory: Trajectory,
    /// `max_t ∫|min(u,0)+θ|² dx` over the recorded samples.
    pub negativity_sup: f64,
    /// `min_t min_x u` over the recorded samples.
    pub min_u: f64,
    pub wall_time_s: f64,
}

/// One row of the sweep summary CSV.
#[derive(Clone, Copy, Debug)]
pub struct SummaryRow {
    pub theta: f64,
    pub n_theta: f64,
    /// `N(θ) / (θ² + θ + θ^{1/2})`.
    pub c_ratio: f64,
    pub min_u: f64,
    /// Cauchy metric against the previous (coarser) θ run; NaN for the first.
    pub max_cauchy_to_prev: f64,
    pub wall_time_s: f64,
}

/// Result of the envelope fit `N(θ) ≤ C(θ² + θ + θ^{1/2})`.
#[derive(Clone, Copy, Debug)]
pub struct ScalingFit {
    /// `max_i N(θ_i)/(θ_i² + θ_i + θ_i^{1/2})` over the whole sequence.
    pub c_fit: f64,
    /// Same maximum over the coarsest half of the sequence.
    pub c_coarse: f64,
    /// True when the coarse-half constant also bounds every fine-half ratio,
    /// i.e. the envelope constant does not blow up as θ → 0.
    pub pass: bool,
}

/// Everything a sweep produces.
#[derive(Debug)]
pub struct SweepResult {
    pub runs: Vec<ThetaRun>,
    pub rows: Vec<SummaryRow>,
    /// Present when the sequence has at least 3 members.
    pub scaling: Option<ScalingFit>,
}

fn envelope(theta: f64) -> f64 {
    theta * theta + theta + theta.sqrt()
}

/// Fit the negativity envelope. Requires at least 3 distinct θ values.
pub fn scaling_fit(thetas: &[f64], n_values: &[f64]) -> Result<ScalingFit> {
    if thetas.len() < 3 || n_values.len() != thetas.len() {
        return Err(Error::Sweep(format!(
            "scaling fit needs at least 3 (theta, N) pairs, got {}",
            thetas.len().min(n_values.len())
        )));
    }
    for pair in thetas.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::Sweep("theta values must be distinct".into()));
        }
    }
    let ratios: Vec<f64> = thetas
        .iter()
        .zip(n_values)
        .map(|(&t, &n)| n / envelope(t))
        .collect();
    let split = thetas.len().div_ceil(2);
    let c_coarse = ratios[..split].iter().copied().fold(0.0, f64::max);
    let c_fit = ratios.iter().copied().fold(0.0, f64::max);
    let pass = ratios[split..]
        .iter()
        .all(|&r| r <= c_coarse * (1.0 + 1e-12));
    Ok(ScalingFit {
        c_fit,
        c_coarse,
        pass,
    })
}

/// Max-over-sample-times discrete `H¹` distance
/// `‖u_a−u_b‖_{L²} + ‖∇u_a−∇u_b‖_{L²}` between two member runs, compared at
/// their captured snapshots (which must sit at the same step indices).
pub fn cauchy_metric(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.snapshots.len() != b.snapshots.len() || a.snapshots.is_empty() {
        return Err(Error::Sweep(format!(
            "mismatched sampling: {} vs {} captured snapshots",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    let mut worst = 0.0f64;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if sa.step_index != sb.step_index {
            return Err(Error::Sweep(format!(
                "mismatched sampling: steps {} vs {}",
                sa.step_index, sb.step_index
            )));
        }
        let ua = sa.state.field();
        let ub = sb.state.field();
        if ua.grid() != ub.grid() {
            return Err(Error::Sweep("mismatched grids between member runs".into()));
        }
        let grid = ua.grid();
        let lam = grid.eigenvalues();
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for ((ca, cb), lam_m) in ua.coeffs().iter().zip(ub.coeffs()).zip(lam) {
            let d2 = (ca - cb).norm_sqr();
            l2 += d2;
            h1 += lam_m * d2;
        }
        let vol = grid.volume();
        worst = worst.max((vol * l2).sqrt() + (vol * h1).sqrt());
    }
    Ok(worst)
}

fn run_one(plan: &SweepPlan, grid: &Arc<Grid>, theta: f64) -> Result<ThetaRun> {
    let s = &plan.scenario;
    let start = Instant::now();
    let u0 = project_initial(&s.initial, grid, true)?;
    let state = SolverState::new(u0, theta, s.kappa, s.potential.clone())?;
    let resolved = ResolvedScheme::resolve(&s.scheme, state.field(), &s.potential, s.kappa)?;
    let opts = RunOptions {
        diagnostics_interval: s.diagnostics_interval,
        capture_steps: plan.capture_steps(),
    };
    let trajectory = run(state, resolved, &opts)?;
    let negativity_sup = trajectory
        .samples
        .iter()
        .map(|s| s.record.negativity)
        .fold(0.0, f64::max);
    let min_u = trajectory
        .samples
        .iter()
        .map(|s| s.record.min_u)
        .fold(f64::INFINITY, f64::min);
    Ok(ThetaRun {
        theta,
        trajectory,
        negativity_sup,
        min_u,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Run every member of the plan (in parallel; per-θ outputs do not depend on
/// scheduling) and aggregate the summary. A member failure aborts the sweep,
/// reporting the rows completed so far.
pub fn sweep(plan: &SweepPlan) -> Result<SweepResult> {
    plan.validate()?;
    let grid = Grid::new(plan.scenario.dim, plan.scenario.n)?;
    let outcomes: Vec<(f64, Result<ThetaRun>)> = plan
        .thetas
        .par_iter()
        .map(|&theta| (theta, run_one(plan, &grid, theta)))
        .collect();

    let mut runs = Vec::with_capacity(outcomes.len());
    let mut failure: Option<(f64, Error)> = None;
    for (theta, outcome) in outcomes {
        match outcome {
            Ok(r) => runs.push(r),
            Err(e) => {
                failure = Some((theta, e));
                break;
            }
        }
    }
    let rows = summarize(&runs)?;
    if let Some((theta, source)) = failure {
        return Err(Error::SweepAborted {
            theta,
            source: Box::new(source),
            completed: rows,
        });
    }
    let scaling = if runs.len() >= 3 {
        let thetas: Vec<f64> = runs.iter().map(|r| r.theta).collect();
        let ns: Vec<f64> = runs.iter().map(|r| r.negativity_sup).collect();
        Some(scaling_fit(&thetas, &ns)?)
    } else {
        None
    };
    Ok(SweepResult {
        runs,
        rows,
        scaling,
    })
}

fn summarize(runs: &[ThetaRun]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::with_capacity(runs.len());
    for (i, r) in runs.iter().enumerate() {
        let max_cauchy_to_prev = if i == 0 {
            f64::NAN
        } else {
            cauchy_metric(&runs[i - 1].trajectory, &r.trajectory)?
        };
        rows.push(SummaryRow {
            theta: r.theta,
            n_theta: r.negativity_sup,
            c_ratio: r.negativity_sup / envelope(r.theta),
            min_u: r.min_u,
            max_cauchy_to_prev,
            wall_time_s: r.wall_time_s,
        });
    }
    Ok(rows)
}
