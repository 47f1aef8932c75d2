//! Time integration of the pseudospectral semidiscretization
//! `∂_t u = ∇·(M_θ(u)∇ω)`, `ω = W'(u) + κ(u + 2Δu + Δ²u)`.
//!
//! The stiff constant-coefficient part `M̄κΔ(1+Δ)²u` (Fourier symbol
//! `g(λ) = −M̄κλ(1−λ)²`) is split off and integrated exactly with an
//! exponential integrating factor; the variable-mobility remainder is
//! explicit. Two steppers are provided:
//!
//! * `Imex1` — first-order exponential Euler. Memoryless, so a run resumed
//!   from a values-only snapshot is bit-identical to an uninterrupted one.
//! * `Imex2` — second-order two-step scheme (BDF2-style extrapolation of the
//!   remainder on top of the same splitting). Restarts with a one-step
//!   bootstrap whenever `dt` changes or a run resumes.
//!
//! Time-step control is energy-guarded: a step that raises the free energy
//! by more than the tolerance is retried with `dt/2` down to `dt_min`, and
//! `dt` doubles back (capped by `dt_max`) every eight accepted steps. The
//! doubling rule depends only on the checkpointed `(step_index, dt)` pair,
//! which keeps adaptation reproducible across resume.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::diagnostics::{self, TrajectorySample};
use crate::error::{Error, Result};
use crate::physics::{self, PotentialSpec};
use crate::spectral::{filtered_noise, Grid, SpectralField};

/// How the mobility entering the flux is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MobilityKind {
    /// Cutoff mobility `M_θ(u)`; the standard mode, requires `θ > 0`.
    Regularized,
    /// Mobility frozen to a constant. Validation mode in which the dynamics
    /// is exactly linear for the `linear_test` potential; not checkpointable.
    Frozen(f64),
}

/// Initial-condition generators. All produce fields on the grid by spectral
/// truncation of the target profile.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Constant {
        mean: f64,
    },
    ConstantPlusSine {
        mean: f64,
        amplitude: f64,
        wavenumber: u32,
    },
    ConstantPlusFilteredNoise {
        mean: f64,
        amplitude: f64,
        seed: u64,
        cutoff: u32,
    },
}

/// Project an initial profile onto the grid. With `require_positive` the
/// projected field must satisfy `min u₀ > 0` (positivity studies).
pub fn project_initial(
    ic: &InitialCondition,
    grid: &Arc<Grid>,
    require_positive: bool,
) -> Result<SpectralField> {
    let field = match *ic {
        InitialCondition::Constant { mean } => SpectralField::constant(grid, mean),
        InitialCondition::ConstantPlusSine {
            mean,
            amplitude,
            wavenumber,
        } => {
            if wavenumber as usize > grid.modes_per_axis() / 2 {
                return Err(Error::Solver(format!(
                    "sine wavenumber {wavenumber} exceeds the grid Nyquist {}",
                    grid.modes_per_axis() / 2
                )));
            }
            SpectralField::from_fn(grid, |x| {
                mean + amplitude * (wavenumber as f64 * x[0]).sin()
            })
        }
        InitialCondition::ConstantPlusFilteredNoise {
            mean,
            amplitude,
            seed,
            cutoff,
        } => {
            let noise = filtered_noise(grid, seed, cutoff as usize);
            noise.map_values(|v| mean + amplitude * v)
        }
    };
    if require_positive {
        let min = field.min_value();
        if min <= 0.0 {
            return Err(Error::Solver(format!(
                "positivity study requires min u0 > 0, got min u0 = {min}"
            )));
        }
    }
    Ok(field)
}

/// Time-stepper selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScheme {
    Imex1,
    Imex2,
}

/// Stepping parameters shared by a whole run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    /// Constant splitting mobility `M̄`; `None` resolves to
    /// `max(1, max u₀)` at run start.
    pub splitting_mobility: Option<f64>,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Reject steps that raise the free energy beyond
    /// `1e-9·(1 + |F(u₀)|)` and retry with `dt/2`.
    pub energy_guard: bool,
    pub t_final: f64,
    pub time_scheme: TimeScheme,
    /// 2/3-rule dealiasing of pointwise products inside the right-hand side.
    pub dealias: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            splitting_mobility: None,
            dt_initial: 1e-3,
            dt_min: 1e-6,
            dt_max: 1e-2,
            energy_guard: true,
            t_final: 1.0,
            time_scheme: TimeScheme::Imex1,
            dealias: true,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("dt_initial", self.dt_initial),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.dt_min <= self.dt_initial && self.dt_initial <= self.dt_max) {
            return Err(Error::config(
                "dt_initial",
                format!(
                    "dt bounds must satisfy dt_min <= dt_initial <= dt_max, got {} / {} / {}",
                    self.dt_min, self.dt_initial, self.dt_max
                ),
            ));
        }
        if let Some(m) = self.splitting_mobility {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::config(
                    "splitting_mobility",
                    format!("must be positive, got {m}"),
                ));
            }
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::config(
                "t_final",
                format!("must be nonnegative, got {}", self.t_final),
            ));
        }
        Ok(())
    }
}

/// State of one time-stepped solution.
#[derive(Clone, Debug)]
pub struct SolverState {
    u: SpectralField,
    t: f64,
    dt: f64,
    step_index: u64,
    theta: f64,
    kappa: f64,
    potential: PotentialSpec,
    mobility: MobilityKind,
}

impl SolverState {
    /// Standard state with the cutoff mobility `M_θ`, `θ ∈ (0, 1)`.
    pub fn new(
        u0: SpectralField,
        theta: f64,
        kappa: f64,
        potential: PotentialSpec,
    ) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0 && theta < 1.0) {
            return Err(Error::Solver(format!(
                "time stepping requires theta in (0, 1), got {theta}; the degenerate \
                 limit is reached only through a theta sweep"
            )));
        }
        potential.validate(kappa)?;
        Ok(SolverState {
            u: u0,
            t: 0.0,
            dt: 0.0,
            step_index: 0,
            theta,
            kappa,
            potential,
            mobility: MobilityKind::Regularized,
        })
    }

    /// Constant-mobility validation state (exactly solvable for
    /// `linear_test`). `theta` only enters diagnostics.
    pub fn with_frozen_mobility(
        u0: SpectralField,
        mobility: f64,
        kappa: f64,
        potential: PotentialSpec,
    ) -> Result<Self> {
        if !(mobility.is_finite() && mobility > 0.0) {
            return Err(Error::Solver(format!(
                "frozen mobility must be positive, got {mobility}"
            )));
        }
        potential.validate(kappa)?;
        Ok(SolverState {
            u: u0,
            t: 0.0,
            dt: 0.0,
            step_index: 0,
            theta: 0.5,
            kappa,
            potential,
            mobility: MobilityKind::Frozen(mobility),
        })
    }

    pub(crate) fn restore(
        u: SpectralField,
        t: f64,
        dt: f64,
        step_index: u64,
        theta: f64,
        kappa: f64,
        potential: PotentialSpec,
    ) -> Result<Self> {
        let mut state = SolverState::new(u, theta, kappa, potential)?;
        state.t = t;
        state.dt = dt;
        state.step_index = step_index;
        Ok(state)
    }

    pub fn field(&self) -> &SpectralField {
        &self.u
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn mobility_kind(&self) -> MobilityKind {
        self.mobility
    }

    /// Pointwise mobility at a collocation value.
    pub(crate) fn mobility_at(&self, z: f64) -> f64 {
        match self.mobility {
            MobilityKind::Regularized => physics::mobility_cutoff(self.theta, z),
            MobilityKind::Frozen(m) => m,
        }
    }

    pub fn free_energy(&self) -> f64 {
        physics::free_energy(&self.u, &self.potential, self.kappa)
    }
}

fn mobility_value(kind: MobilityKind, theta: f64, z: f64) -> f64 {
    match kind {
        MobilityKind::Regularized => physics::mobility_cutoff(theta, z),
        MobilityKind::Frozen(m) => m,
    }
}

/// Spectral coefficients of `∇·(M(u)∇ω)` for the given mobility model.
#[allow(clippy::needless_range_loop)]
fn flux_divergence_coeffs(
    u: &SpectralField,
    mobility: MobilityKind,
    theta: f64,
    potential: &PotentialSpec,
    kappa: f64,
    dealias: bool,
) -> Vec<Complex64> {
    let grid = u.grid();
    let omega_hat = physics::chemical_potential_coeffs(grid, u, potential, kappa, dealias);
    let kd = grid.k_deriv();
    let keep = grid.dealias_keep();
    let total = grid.total_modes();
    let mut div_hat = vec![Complex64::default(); total];
    for a in 0..grid.dim() {
        let grad_a: Vec<Complex64> = omega_hat
            .iter()
            .enumerate()
            .map(|(m, c)| c * Complex64::new(0.0, kd[m][a]))
            .collect();
        let grad_vals = grid.inverse(&grad_a);
        let flux: Vec<f64> = u
            .values()
            .iter()
            .zip(&grad_vals)
            .map(|(&z, &g)| mobility_value(mobility, theta, z) * g)
            .collect();
        let mut flux_hat = grid.forward(&flux);
        if dealias {
            for (m, c) in flux_hat.iter_mut().enumerate() {
                if !keep[m] {
                    *c = Complex64::default();
                }
            }
        }
        for (m, c) in flux_hat.iter().enumerate() {
            div_hat[m] += c * Complex64::new(0.0, kd[m][a]);
        }
    }
    div_hat
}

/// Right-hand side `∇·(M_θ(u)∇ω)` with the 2/3-rule applied to the products.
/// The constant mode of the result vanishes identically (conservation form).
pub fn rhs(state: &SolverState) -> SpectralField {
    let coeffs = flux_divergence_coeffs(
        &state.u,
        state.mobility,
        state.theta,
        &state.potential,
        state.kappa,
        true,
    );
    SpectralField::from_coeffs(state.u.grid(), &coeffs)
}

/// Stiff-split symbol `g(λ) = −M̄ κ λ (1−λ)²` per mode.
fn stiff_symbol(grid: &Grid, mbar: f64, kappa: f64) -> Vec<f64> {
    grid.eigenvalues()
        .iter()
        .map(|&lam| {
            let s = 1.0 - lam;
            -mbar * kappa * lam * s * s
        })
        .collect()
}

/// `φ₁(x) = (e^x − 1)/x`, the exponential-Euler weight.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// `φ₂(x) = (e^x − 1 − x)/x²`, the second exponential weight.
fn phi2(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        0.5 + x / 6.0
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

/// Run-resolved stepping constants.
#[derive(Clone, Debug)]
pub struct ResolvedScheme {
    pub config: SchemeConfig,
    /// Splitting mobility actually used.
    pub mbar: f64,
    /// Energy-guard tolerance `1e-9·(1 + |F(u₀)|)`.
    pub tol_energy: f64,
}

impl ResolvedScheme {
    /// Resolve the auto knobs against the run's initial data `u₀` (for a
    /// resumed run, the regenerated initial data of the original run).
    pub fn resolve(
        config: &SchemeConfig,
        u0: &SpectralField,
        potential: &PotentialSpec,
        kappa: f64,
    ) -> Result<ResolvedScheme> {
        config.validate()?;
        let mbar = match config.splitting_mobility {
            Some(m) => m,
            None => u0.max_value().max(1.0),
        };
        let e0 = physics::free_energy(u0, potential, kappa);
        Ok(ResolvedScheme {
            config: config.clone(),
            mbar,
            tol_energy: 1e-9 * (1.0 + e0.abs()),
        })
    }
}

/// Two-step history for the second-order scheme.
#[derive(Clone)]
struct SchemeHistory {
    dt: f64,
    u_hat: Vec<Complex64>,
    n_hat: Vec<Complex64>,
}

/// Drives `step` across a whole run; owns the scheme history.
pub struct Stepper {
    resolved: ResolvedScheme,
    symbol: Vec<f64>,
    history: Option<SchemeHistory>,
}

/// What one accepted step did.
#[derive(Clone, Copy, Debug)]
pub struct StepOutcome {
    pub dt_taken: f64,
    pub retries: u32,
}

impl Stepper {
    pub fn new(state: &SolverState, resolved: ResolvedScheme) -> Stepper {
        let symbol = stiff_symbol(state.grid(), resolved.mbar, state.kappa);
        Stepper {
            resolved,
            symbol,
            history: None,
        }
    }

    pub fn resolved(&self) -> &ResolvedScheme {
        &self.resolved
    }

    /// Explicit remainder `N(u) = R(u) − g∘u` in spectral space.
    fn remainder_hat(&self, state: &SolverState, u: &SpectralField) -> Vec<Complex64> {
        let mut n_hat = flux_divergence_coeffs(
            u,
            state.mobility,
            state.theta,
            &state.potential,
            state.kappa,
            self.resolved.config.dealias,
        );
        for (m, c) in n_hat.iter_mut().enumerate() {
            *c -= u.coeffs()[m] * self.symbol[m];
        }
        n_hat
    }

    /// First-order exponential Euler step, exact on the split linear part.
    fn etd1(&self, u_hat: &[Complex64], n_hat: &[Complex64], dt: f64) -> Vec<Complex64> {
        (0..u_hat.len())
            .map(|m| {
                let x = dt * self.symbol[m];
                u_hat[m] * x.exp() + n_hat[m] * (dt * phi1(x))
            })
            .collect()
    }

    fn candidate(
        &self,
        state: &SolverState,
        dt: f64,
        n_hat: &[Complex64],
    ) -> (SpectralField, Option<SchemeHistory>) {
        let grid = state.grid();
        let u_hat = state.u.coeffs();
        let second_order = self.resolved.config.time_scheme == TimeScheme::Imex2;
        let usable_history = match (&self.history, second_order) {
            (Some(h), true) if h.dt == dt => Some(h),
            _ => None,
        };
        let new_hat: Vec<Complex64> = match (usable_history, second_order) {
            // Two-step extrapolated scheme.
            (Some(h), _) => (0..grid.total_modes())
                .map(|m| {
                    let num =
                        u_hat[m] * 4.0 - h.u_hat[m] + (n_hat[m] * 2.0 - h.n_hat[m]) * (2.0 * dt);
                    num / (3.0 - 2.0 * dt * self.symbol[m])
                })
                .collect(),
            // No history but second order requested: one-step exponential
            // RK2 so bootstrap/restart steps keep the global order.
            (None, true) => {
                let predictor = SpectralField::from_coeffs(grid, &self.etd1(u_hat, n_hat, dt));
                let n_pred = self.remainder_hat(state, &predictor);
                (0..grid.total_modes())
                    .map(|m| {
                        let x = dt * self.symbol[m];
                        predictor.coeffs()[m] + (n_pred[m] - n_hat[m]) * (dt * phi2(x))
                    })
                    .collect()
            }
            (None, false) => self.etd1(u_hat, n_hat, dt),
        };
        let next_history = second_order.then(|| SchemeHistory {
            dt,
            u_hat: u_hat.to_vec(),
            n_hat: n_hat.to_vec(),
        });
        (SpectralField::from_coeffs(grid, &new_hat), next_history)
    }

    /// Advance the state by one accepted step (retrying with halved `dt`
    /// under the energy guard). Returns the accepted step size.
    pub fn step(&mut self, state: &mut SolverState, remaining: Option<f64>) -> Result<StepOutcome> {
        if state.dt == 0.0 {
            state.dt = self.resolved.config.dt_initial;
        }
        let guard = self.resolved.config.energy_guard;
        let energy_before = if guard { state.free_energy() } else { 0.0 };
        let n_hat = self.remainder_hat(state, &state.u);
        let mut retries = 0u32;
        loop {
            let dt_eff = match remaining {
                Some(r) => state.dt.min(r),
                None => state.dt,
            };
            let (u_new, next_history) = self.candidate(state, dt_eff, &n_hat);
            let accept = if guard {
                physics::free_energy(&u_new, &state.potential, state.kappa)
                    <= energy_before + self.resolved.tol_energy
            } else {
                true
            };
            if accept {
                state.u = u_new;
                state.t += dt_eff;
                state.step_index += 1;
                self.history = next_history;
                // Recover dt after a streak of clean steps; the rule is a
                // pure function of (step_index, retries) so a resumed run
                // adapts identically.
                if retries == 0
                    && state.step_index.is_multiple_of(8)
                    && state.dt < self.resolved.config.dt_max
                {
                    state.dt = (state.dt * 2.0).min(self.resolved.config.dt_max);
                    self.history = None;
                }
                return Ok(StepOutcome {
                    dt_taken: dt_eff,
                    retries,
                });
            }
            // Halve from the step actually attempted so a rejected clamped
            // final step shrinks too.
            let halved = dt_eff * 0.5;
            if halved < self.resolved.config.dt_min {
                return Err(Error::DtUnderflow {
                    t: state.t,
                    dt: halved,
                    dt_min: self.resolved.config.dt_min,
                    last_record: Box::new(diagnostics::record(state)),
                });
            }
            state.dt = halved;
            self.history = None;
            retries += 1;
        }
    }
}

/// One-shot step with a fresh stepper; `state.dt` must already be set or the
/// configured `dt_initial` is used.
pub fn step(state: &mut SolverState, config: &SchemeConfig) -> Result<StepOutcome> {
    let resolved = ResolvedScheme::resolve(config, state.field(), &state.potential, state.kappa)?;
    let mut stepper = Stepper::new(state, resolved);
    stepper.step(state, None)
}

/// Sampling and capture cadence of a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record diagnostics every this many steps (0 disables interior
    /// samples; the initial and final states are always recorded).
    pub diagnostics_interval: u64,
    /// Step indices at which to capture full state snapshots.
    pub capture_steps: Vec<u64>,
}

/// A captured mid-run state (source of checkpoint files and of cross-run
/// comparison samples).
#[derive(Clone, Debug)]
pub struct SnapshotCapture {
    pub step_index: u64,
    pub state: SolverState,
}

/// Product of a run: diagnostics samples, snapshot captures, final state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub snapshots: Vec<SnapshotCapture>,
    pub final_state: SolverState,
}

impl Trajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }
}

/// Integrate to `t_final`, recording diagnostics at the configured cadence.
/// `resolved` must have been resolved against the run's original initial
/// data (see [`ResolvedScheme::resolve`]); for a fresh run that is simply
/// the state's own field.
pub fn run(
    mut state: SolverState,
    resolved: ResolvedScheme,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let t_final = resolved.config.t_final;
    if state.dt == 0.0 {
        state.dt = resolved.config.dt_initial;
    }
    let mut stepper = Stepper::new(&state, resolved);
    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut last_sampled = u64::MAX;
    let interval = opts.diagnostics_interval;

    let observe = |state: &SolverState,
                   samples: &mut Vec<TrajectorySample>,
                   snapshots: &mut Vec<SnapshotCapture>,
                   last: &mut u64,
                   force: bool| {
        let idx = state.step_index;
        if *last != idx {
            let due = idx == 0 || (interval > 0 && idx.is_multiple_of(interval));
            if due || force {
                samples.push(diagnostics::sample(state));
                *last = idx;
            }
        }
        if opts.capture_steps.contains(&idx)
            && snapshots.last().map(|s: &SnapshotCapture| s.step_index) != Some(idx)
        {
            snapshots.push(SnapshotCapture {
                step_index: idx,
                state: state.clone(),
            });
        }
    };

    observe(
        &state,
        &mut samples,
        &mut snapshots,
        &mut last_sampled,
        true,
    );
    loop {
        let remaining = t_final - state.t;
        if remaining <= state.dt * 1e-6 {
            break;
        }
        stepper.step(&mut state, Some(remaining))?;
        // Any non-finite value poisons the constant mode of the canonical
        // coefficients, so this one scalar detects a blown-up run.
        if !state.u.mean().is_finite() {
            return Err(Error::Solver(format!(
                "solution lost finiteness at t = {:.6e} (step {}); \
                 enable the energy guard or reduce dt",
                state.t, state.step_index
            )));
        }
        observe(
            &state,
            &mut samples,
            &mut snapshots,
            &mut last_sampled,
            false,
        );
    }
    observe(
        &state,
        &mut samples,
        &mut snapshots,
        &mut last_sampled,
        true,
    );
    Ok(Trajectory {
        samples,
        snapshots,
        final_state: state,
    })
}

/// Convenience wrapper: resolve the scheme against the state's own field
/// (fresh runs only) and integrate.
pub fn run_fresh(
    state: SolverState,
    config: &SchemeConfig,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let resolved =
        ResolvedScheme::resolve(config, state.field(), state.potential(), state.kappa())?;
    run(state, resolved, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::PotentialSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quartic() -> PotentialSpec {
        PotentialSpec::QuarticExample { epsilon: 0.2 }
    }

    fn max_abs(values: &[f64]) -> f64 {
        values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn project_constant() {
        let grid = Grid::new(1, 32).unwrap();
        let u = project_initial(&InitialCondition::Constant { mean: 1.0 }, &grid, true).unwrap();
        assert_relative_eq!(u.mean(), 1.0, max_relative = 1e-14);
        assert!(u.values().iter().all(|&v| (v - 1.0).abs() <= 1e-14));
    }

    #[test]
    fn project_sine_has_three_modes() {
        let grid = Grid::new(1, 64).unwrap();
        let ic = InitialCondition::ConstantPlusSine {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 1,
        };
        let u = project_initial(&ic, &grid, true).unwrap();
        let nonzero = u.coeffs().iter().filter(|c| c.norm() > 1e-12).count();
        assert_eq!(nonzero, 3);
    }

    #[test]
    fn project_noise_is_reproducible() {
        let grid = Grid::new(2, 32).unwrap();
        let ic = InitialCondition::ConstantPlusFilteredNoise {
            mean: 1.0,
            amplitude: 0.2,
            seed: 7,
            cutoff: 8,
        };
        let a = project_initial(&ic, &grid, true).unwrap();
        let b = project_initial(&ic, &grid, true).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.min_value() >= 0.8 - 1e-12);
    }

    #[test]
    fn project_rejects_nonpositive_for_positivity_study() {
        let grid = Grid::new(1, 32).unwrap();
        let ic = InitialCondition::ConstantPlusSine {
            mean: 0.5,
            amplitude: 1.0,
            wavenumber: 1,
        };
        assert!(project_initial(&ic, &grid, true).is_err());
        assert!(project_initial(&ic, &grid, false).is_ok());
    }

    #[test]
    fn state_rejects_degenerate_theta() {
        let grid = Grid::new(1, 32).unwrap();
        let u = SpectralField::constant(&grid, 1.0);
        assert!(SolverState::new(u.clone(), 0.0, 1.0, quartic()).is_err());
        assert!(SolverState::new(u, 1.0, 1.0, quartic()).is_err());
    }

    #[test]
    fn rhs_of_uniform_state_vanishes() {
        let grid = Grid::new(1, 64).unwrap();
        let u = SpectralField::constant(&grid, 0.9);
        let state = SolverState::new(u, 0.05, 1.0, quartic()).unwrap();
        assert!(max_abs(rhs(&state).values()) <= 1e-13);
    }

    #[test]
    fn rhs_matches_finite_difference_oracle() {
        // Independent check: second-order conservative finite differences of
        // ∇·(M_θ(u)∇ω) on a 4096-point grid, sampled at the coarse points.
        // For u = 1 + a sin x the chemical potential has the closed form
        // ω = κ + (3a³/4 − εa) sin x − (a³/4) sin 3x (the linear symbol
        // annihilates the |k| = 1 mode), so only the outer conservative
        // divergence is differenced; nesting FD derivatives up to fifth
        // order on a grid this fine would drown in rounding noise.
        let nf = 4096usize;
        let h = crate::spectral::BOX_LENGTH / nf as f64;
        let (a, eps, theta, kappa) = (0.1f64, 0.2f64, 0.01f64, 1.0f64);
        let uf: Vec<f64> = (0..nf).map(|i| 1.0 + a * (i as f64 * h).sin()).collect();
        let c1 = 0.75 * a * a * a - eps * a;
        let c3 = -0.25 * a * a * a;
        let om: Vec<f64> = (0..nf)
            .map(|i| {
                let x = i as f64 * h;
                kappa + c1 * x.sin() + c3 * (3.0 * x).sin()
            })
            .collect();
        let flux: Vec<f64> = (0..nf)
            .map(|i| {
                let um = 0.5 * (uf[i] + uf[(i + 1) % nf]);
                physics::mobility_cutoff(theta, um) * (om[(i + 1) % nf] - om[i]) / h
            })
            .collect();
        let rhs_fd: Vec<f64> = (0..nf)
            .map(|i| (flux[i] - flux[(i + nf - 1) % nf]) / h)
            .collect();

        let n = 64usize;
        let grid = Grid::new(1, n).unwrap();
        let u = SpectralField::from_fn(&grid, |x| 1.0 + a * x[0].sin());
        let state = SolverState::new(u, theta, kappa, quartic()).unwrap();
        let r = rhs(&state);
        let stride = nf / n;
        let err = (0..n)
            .map(|j| (r.values()[j] - rhs_fd[j * stride]).abs())
            .fold(0.0f64, f64::max);
        assert!(err <= 1e-4, "finite-difference oracle max error {err}");
    }

    #[test]
    fn uniform_state_is_a_fixed_point_of_step() {
        let grid = Grid::new(1, 64).unwrap();
        let u = SpectralField::constant(&grid, 1.3);
        let mut state = SolverState::new(u.clone(), 0.05, 1.0, quartic()).unwrap();
        let config = SchemeConfig {
            dt_initial: 1e-3,
            ..Default::default()
        };
        step(&mut state, &config).unwrap();
        let drift = state
            .field()
            .values()
            .iter()
            .zip(u.values())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(drift <= 1e-14, "fixed point drift {drift}");
    }

    #[test]
    fn linear_test_mode_decays_at_exact_rate() {
        // Frozen unit mobility + linear_test potential: the k = 2 mode obeys
        // û' = −κλ(1−λ)²û with λ = 4, so û(t) = û(0)·exp(−36κt).
        let grid = Grid::new(1, 64).unwrap();
        let amp = 0.01;
        let u0 = SpectralField::from_fn(&grid, |x| amp * (2.0 * x[0]).sin());
        let state =
            SolverState::with_frozen_mobility(u0, 1.0, 1.0, PotentialSpec::LinearTest).unwrap();
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
        let expected = amp * (-36.0f64 * 0.1).exp();
        let rel = (a_end - expected).abs() / expected;
        assert!(rel <= 1e-6, "linear decay relative error {rel}");
    }

    #[test]
    fn sub_threshold_state_decays_at_cutoff_rate() {
        // With u below θ everywhere the cutoff mobility is exactly θ;
        // choosing the splitting constant M̄ = θ makes the explicit
        // remainder vanish, so the k = 2 mode of the regularized dynamics
        // decays by exp(−θκλ(1−λ)²t) exactly.
        let grid = Grid::new(1, 64).unwrap();
        let (theta, kappa, amp) = (0.5, 1.0, 0.2);
        let u0 = SpectralField::from_fn(&grid, |x| amp * (2.0 * x[0]).sin());
        let state = SolverState::new(u0, theta, kappa, PotentialSpec::LinearTest).unwrap();
        let config = SchemeConfig {
            splitting_mobility: Some(theta),
            dt_initial: 1e-4,
            dt_min: 1e-4,
            dt_max: 1e-4,
            energy_guard: false,
            t_final: 0.2,
            time_scheme: TimeScheme::Imex1,
            dealias: true,
        };
        let traj = run_fresh(state, &config, &RunOptions::default()).unwrap();
        let a_end = 2.0 * traj.final_state.field().coeffs()[2].norm();
        let expected = amp * (-theta * 36.0f64 * 0.2).exp();
        let rel = (a_end - expected).abs() / expected;
        assert!(rel <= 1e-6, "cutoff-mobility decay relative error {rel}");
    }

    #[test]
    fn imex2_is_second_order_self_convergent() {
        let grid = Grid::new(1, 64).unwrap();
        let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.3 * x[0].sin());
        let sol = |dt: f64| {
            let state = SolverState::new(u0.clone(), 0.05, 1.0, quartic()).unwrap();
            let config = SchemeConfig {
                splitting_mobility: Some(1.3),
                dt_initial: dt,
                dt_min: dt,
                dt_max: dt,
                energy_guard: false,
                t_final: 0.1,
                time_scheme: TimeScheme::Imex2,
                dealias: true,
            };
            run_fresh(state, &config, &RunOptions::default())
                .unwrap()
                .final_state
        };
        let coarse = sol(2.5e-4);
        let mid = sol(1.25e-4);
        let fine = sol(6.25e-5);
        let diff = |a: &SolverState, b: &SolverState| {
            a.field()
                .values()
                .iter()
                .zip(b.field().values())
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
        };
        let e1 = diff(&coarse, &mid);
        let e2 = diff(&mid, &fine);
        let order = (e1 / e2).log2();
        assert!(
            order >= 1.9,
            "self-convergence order {order} (errors {e1}, {e2})"
        );
    }

    #[test]
    fn imex1_is_at_least_first_order_self_convergent() {
        let grid = Grid::new(1, 64).unwrap();
        let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.3 * x[0].sin());
        let sol = |dt: f64| {
            let state = SolverState::new(u0.clone(), 0.05, 1.0, quartic()).unwrap();
            let config = SchemeConfig {
                splitting_mobility: Some(1.3),
                dt_initial: dt,
                dt_min: dt,
                dt_max: dt,
                energy_guard: false,
                t_final: 0.1,
                time_scheme: TimeScheme::Imex1,
                dealias: true,
            };
            run_fresh(state, &config, &RunOptions::default())
                .unwrap()
                .final_state
        };
        let e1 = sol(1e-3)
            .field()
            .values()
            .iter()
            .zip(sol(5e-4).field().values())
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        let e2 = sol(5e-4)
            .field()
            .values()
            .iter()
            .zip(sol(2.5e-4).field().values())
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        let order = (e1 / e2).log2();
        assert!(order >= 0.9, "self-convergence order {order}");
    }

    #[test]
    fn dt_underflow_aborts_with_diagnostic_dump() {
        // A grossly oversized fixed step makes the explicit remainder blow
        // the energy up; with no room to halve, the guard must abort and
        // surface the last diagnostics record.
        let grid = Grid::new(1, 64).unwrap();
        let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.5 * x[0].sin());
        let state = SolverState::new(u0, 0.05, 1.0, quartic()).unwrap();
        let config = SchemeConfig {
            splitting_mobility: Some(1.5),
            dt_initial: 10.0,
            dt_min: 10.0,
            dt_max: 10.0,
            energy_guard: true,
            t_final: 100.0,
            time_scheme: TimeScheme::Imex1,
            dealias: true,
        };
        match run_fresh(
            state,
            &config,
            &RunOptions {
                diagnostics_interval: 1,
                capture_steps: vec![],
            },
        ) {
            Err(Error::DtUnderflow {
                dt,
                dt_min,
                last_record,
                ..
            }) => {
                assert!(dt < dt_min);
                assert!(last_record.energy.is_finite());
            }
            other => panic!("expected dt underflow, got {other:?}"),
        }
    }

    #[test]
    fn unguarded_blowup_is_reported() {
        let grid = Grid::new(1, 64).unwrap();
        let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.5 * x[0].sin());
        let state = SolverState::new(u0, 0.05, 1.0, quartic()).unwrap();
        let config = SchemeConfig {
            splitting_mobility: Some(1.5),
            dt_initial: 10.0,
            dt_min: 10.0,
            dt_max: 10.0,
            energy_guard: false,
            t_final: 1000.0,
            time_scheme: TimeScheme::Imex1,
            dealias: true,
        };
        match run_fresh(
            state,
            &config,
            &RunOptions {
                diagnostics_interval: 0,
                capture_steps: vec![],
            },
        ) {
            Err(Error::Solver(msg)) => assert!(msg.contains("finiteness"), "{msg}"),
            other => panic!("expected a finiteness error, got {other:?}"),
        }
    }

    #[test]
    fn three_dimensional_run_conserves_mass_and_dissipates() {
        let grid = Grid::new(3, 8).unwrap();
        let ic = InitialCondition::ConstantPlusFilteredNoise {
            mean: 1.0,
            amplitude: 0.2,
            seed: 13,
            cutoff: 2,
        };
        let u0 = project_initial(&ic, &grid, true).unwrap();
        let m0 = u0.mean();
        let e_tol = 1e-9 * (1.0 + physics::free_energy(&u0, &quartic(), 1.0).abs());
        let state = SolverState::new(u0, 0.05, 1.0, quartic()).unwrap();
        let config = SchemeConfig {
            dt_initial: 2e-3,
            dt_min: 2e-3,
            dt_max: 2e-3,
            t_final: 0.2,
            ..Default::default()
        };
        let traj = run_fresh(
            state,
            &config,
            &RunOptions {
                diagnostics_interval: 10,
                capture_steps: vec![],
            },
        )
        .unwrap();
        for s in &traj.samples {
            let mean = s.record.mass / grid.volume();
            assert!((mean - m0).abs() <= 1e-10 * m0.abs());
        }
        for w in traj.samples.windows(2) {
            assert!(w[1].record.energy <= w[0].record.energy + e_tol);
        }
    }

    #[test]
    fn zero_t_final_yields_single_record() {
        let grid = Grid::new(1, 32).unwrap();
        let u0 = SpectralField::constant(&grid, 1.0);
        let state = SolverState::new(u0, 0.1, 1.0, quartic()).unwrap();
        let config = SchemeConfig {
            t_final: 0.0,
            ..Default::default()
        };
        let traj = run_fresh(
            state,
            &config,
            &RunOptions {
                diagnostics_interval: 1,
                capture_steps: vec![],
            },
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.samples[0].step, 0);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let grid = Grid::new(2, 16).unwrap();
        let ic = InitialCondition::ConstantPlusFilteredNoise {
            mean: 1.0,
            amplitude: 0.2,
            seed: 11,
            cutoff: 4,
        };
        let go = || {
            let u0 = project_initial(&ic, &grid, true).unwrap();
            let state = SolverState::new(u0, 0.05, 1.0, quartic()).unwrap();
            let config = SchemeConfig {
                dt_initial: 1e-3,
                dt_min: 1e-3,
                dt_max: 1e-3,
                t_final: 0.05,
                ..Default::default()
            };
            run_fresh(
                state,
                &config,
                &RunOptions {
                    diagnostics_interval: 5,
                    capture_steps: vec![],
                },
            )
            .unwrap()
        };
        let a = go();
        let b = go();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.record.energy.to_bits(), y.record.energy.to_bits());
            assert_eq!(x.record.mass.to_bits(), y.record.mass.to_bits());
        }
        assert_eq!(
            a.final_state.field().values(),
            b.final_state.field().values()
        );
    }

    #[test]
    fn mass_is_conserved_along_a_run() {
        let grid = Grid::new(2, 16).unwrap();
        let ic = InitialCondition::ConstantPlusFilteredNoise {
            mean: 1.0,
            amplitude: 0.2,
            seed: 3,
            cutoff: 4,
        };
        let u0 = project_initial(&ic, &grid, true).unwrap();
        let m0 = u0.mean();
        let state = SolverState::new(u0, 0.05, 1.0, quartic()).unwrap();
        let config = SchemeConfig {
            dt_initial: 2e-3,
            dt_min: 2e-3,
            dt_max: 2e-3,
            t_final: 0.4,
            ..Default::default()
        };
        let traj = run_fresh(
            state,
            &config,
            &RunOptions {
                diagnostics_interval: 10,
                capture_steps: vec![],
            },
        )
        .unwrap();
        for s in &traj.samples {
            let mean = s.record.mass / grid.volume();
            assert!(
                (mean - m0).abs() <= 1e-10 * m0.abs(),
                "mean drift {}",
                (mean - m0).abs()
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn rhs_mean_is_zero(seed in 0u64..1_000_000) {
            let grid = Grid::new(1, 32).unwrap();
            let u = filtered_noise(&grid, seed, 8).map_values(|v| 1.0 + 0.5 * v);
            let state = SolverState::new(u, 0.05, 1.0, PotentialSpec::QuarticExample { epsilon: 0.2 }).unwrap();
            let r = rhs(&state);
            let scale = r.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
            prop_assert!(r.mean().abs() <= 1e-14 * scale);
        }
    }
}
