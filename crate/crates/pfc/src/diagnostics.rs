//! Observables and residuals of the model's conservation/dissipation
//! structure: mass, free energy, dissipation rate, regularized entropy, and
//! the negativity functional `∫|min(u,0) + θ|² dx`, plus residual series for
//! the energy identity and the entropy balance, and a feasibility search for
//! the polynomial growth bounds on `W`.

use crate::error::{Error, Result};
use crate::physics::{self, PotentialSpec};
use crate::solver::{SolverState, Trajectory};

/// One time sample of every scalar the estimates control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `∫ u dx`.
    pub mass: f64,
    /// Free energy `F(u)`.
    pub energy: f64,
    /// `∫ M(u) |∇ω|² dx` for the state's mobility model; nonnegative.
    pub dissipation: f64,
    /// `∫ Φ_θ(u) dx`; nonnegative.
    pub entropy: f64,
    /// Pointwise minimum over collocation values.
    pub min_u: f64,
    /// `∫ |min(u,0) + θ|² dx`.
    pub negativity: f64,
}

/// A diagnostics record extended with the bookkeeping a trajectory needs:
/// the step index, the step size in effect, and the entropy-balance flux
/// `∫ ∇ω·∇u dx` at the sample time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub step: u64,
    pub dt: f64,
    pub record: DiagnosticsRecord,
    pub entropy_flux: f64,
}

/// Evaluate all record fields for the current state with spectral quadrature.
pub fn record(state: &SolverState) -> DiagnosticsRecord {
    sample(state).record
}

/// Like [`record`] but also returns the entropy-balance flux, sharing the
/// chemical-potential evaluation between the two.
pub fn sample(state: &SolverState) -> TrajectorySample {
    let u = state.field();
    let grid = u.grid();
    let theta = state.theta();
    let w = grid.quad_weight();

    let omega = physics::chemical_potential(u, state.potential(), state.kappa());
    let grad_omega = omega.gradient();
    let grad_u = u.gradient();

    let mut dissipation = 0.0;
    let mut entropy_flux = 0.0;
    for j in 0..grid.total_modes() {
        let mut go2 = 0.0;
        let mut gogu = 0.0;
        for a in 0..grid.dim() {
            let go = grad_omega[a].values()[j];
            go2 += go * go;
            gogu += go * grad_u[a].values()[j];
        }
        dissipation += state.mobility_at(u.values()[j]) * go2;
        entropy_flux += gogu;
    }
    dissipation *= w;
    entropy_flux *= w;

    let mut entropy = 0.0;
    let mut negativity = 0.0;
    let mut min_u = f64::INFINITY;
    for &z in u.values() {
        entropy += physics::entropy_density_cutoff(theta, z);
        let neg = z.min(0.0) + theta;
        negativity += neg * neg;
        min_u = min_u.min(z);
    }
    entropy *= w;
    negativity *= w;

    TrajectorySample {
        step: state.step_index(),
        dt: state.dt(),
        record: DiagnosticsRecord {
            t: state.t(),
            mass: u.mean() * grid.volume(),
            energy: state.free_energy(),
            dissipation,
            entropy,
            min_u,
            negativity,
        },
        entropy_flux,
    }
}

/// Cumulative trapezoid integral of `f` over the sample times.
fn cumulative_trapezoid(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (f[i] + f[i - 1]) * (times[i] - times[i - 1]);
        out.push(acc);
    }
    out
}

/// Per-sample residual of the energy identity:
/// `residual(t) = F(u(t)) + ∫₀ᵗ ∫ M(u)|∇ω|² dx dτ − F(u₀)`,
/// with the time integral by trapezoid over the recorded samples. Shrinks at
/// the scheme's order under `dt` refinement.
pub fn energy_inequality_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.samples.len() < 2 {
        return Err(Error::Diagnostics(
            "energy residual needs at least 2 samples".into(),
        ));
    }
    let times: Vec<f64> = traj.samples.iter().map(|s| s.record.t).collect();
    let diss: Vec<f64> = traj.samples.iter().map(|s| s.record.dissipation).collect();
    let integral = cumulative_trapezoid(&times, &diss);
    let e0 = traj.samples[0].record.energy;
    Ok(traj
        .samples
        .iter()
        .zip(&integral)
        .map(|(s, q)| s.record.energy + q - e0)
        .collect())
}

/// Per-sample residual of the entropy balance:
/// `residual(t) = ∫Φ_θ(u(t)) − ∫Φ_θ(u₀) + ∫₀ᵗ ∫ ∇ω·∇u dx dτ`.
pub fn entropy_balance_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.samples.len() < 2 {
        return Err(Error::Diagnostics(
            "entropy residual needs at least 2 samples".into(),
        ));
    }
    let times: Vec<f64> = traj.samples.iter().map(|s| s.record.t).collect();
    let flux: Vec<f64> = traj.samples.iter().map(|s| s.entropy_flux).collect();
    let integral = cumulative_trapezoid(&times, &flux);
    let s0 = traj.samples[0].record.entropy;
    Ok(traj
        .samples
        .iter()
        .zip(&integral)
        .map(|(s, q)| s.record.entropy - s0 + q)
        .collect())
}

/// Feasibility witness for the polynomial growth bounds.
#[derive(Clone, Copy, Debug)]
pub struct GrowthConstants {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

/// The worst offending sample when no constants exist.
#[derive(Clone, Copy, Debug)]
pub struct GrowthViolation {
    /// Which bound failed: "lower W", "lower W''", "upper W", "upper |W'|",
    /// "upper W''".
    pub inequality: &'static str,
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub enum GrowthOutcome {
    Feasible(GrowthConstants),
    Violation(GrowthViolation),
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub outcome: GrowthOutcome,
    pub m: u32,
    pub radius: f64,
    pub samples: usize,
}

impl GrowthReport {
    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, GrowthOutcome::Feasible(_))
    }
}

/// Search for positive constants `b₁..b₄` such that, at every sample of
/// `[-R, R]`,
///
/// * `b₁z^{2m} − b₂ ≤ W(z) + (ε/2)z² ≤ b₃z^{2m} + b₄`
/// * `|W'(z)| ≤ b₃|z|^{2m−1} + b₄`
/// * `b₁z^{2m−2} − b₂ ≤ W''(z) ≤ b₃z^{2m−2} + b₄`
///
/// Constants are fitted on the inner half-range `|z| ≤ R/2` and then
/// verified on the full sample set; a potential that only satisfies the
/// bounds thanks to a compact range (no genuine `z^{2m}` growth) fails the
/// outer verification and is reported with its worst witness.
pub fn growth_check(spec: &PotentialSpec, m: u32, radius: f64, samples: usize) -> GrowthReport {
    assert!(m > 1, "growth exponent m must exceed 1");
    assert!(radius >= 0.0 && radius.is_finite());
    let count = samples.max(1);
    let zs: Vec<f64> = if count == 1 || radius == 0.0 {
        vec![0.0]
    } else {
        (0..count)
            .map(|i| -radius + 2.0 * radius * i as f64 / (count - 1) as f64)
            .collect()
    };
    let eps = spec.growth_epsilon();
    let p = 2 * m as i32;
    let q = p - 1;
    let r = p - 2;
    let g1 = |z: f64| spec.value(z) + 0.5 * eps * z * z;
    let g2 = |z: f64| spec.deriv(z).abs();
    let g3 = |z: f64| spec.second_deriv(z);
    let inner: Vec<f64> = zs
        .iter()
        .copied()
        .filter(|z| z.abs() <= 0.5 * radius)
        .collect();
    let inner = if inner.is_empty() { zs.clone() } else { inner };

    const FLOOR: f64 = 1e-9;
    let log_grid = |lo: f64, hi: f64, steps: usize, descending: bool| -> Vec<f64> {
        let mut g: Vec<f64> = (0..steps)
            .map(|i| lo * (hi / lo).powf(i as f64 / (steps - 1) as f64))
            .collect();
        if descending {
            g.reverse();
        }
        g
    };

    // Lower bounds: largest feasible b1 wins.
    let mut lower: Option<(f64, f64)> = None;
    let mut last_lower_fail: Option<GrowthViolation> = None;
    for b1 in log_grid(1e-6, 10.0, 60, true) {
        let b2 = inner
            .iter()
            .map(|&z| (b1 * z.powi(p) - g1(z)).max(b1 * z.powi(r) - g3(z)))
            .fold(FLOOR, f64::max);
        let mut worst: Option<GrowthViolation> = None;
        for &z in &zs {
            for (name, lhs, rhs) in [
                ("lower W", b1 * z.powi(p) - b2, g1(z)),
                ("lower W''", b1 * z.powi(r) - b2, g3(z)),
            ] {
                let slack = rhs - lhs;
                if slack < -1e-9 * rhs.abs().max(1.0)
                    && worst.map(|w| lhs - rhs > w.lhs - w.rhs).unwrap_or(true)
                {
                    worst = Some(GrowthViolation {
                        inequality: name,
                        z,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        match worst {
            None => {
                lower = Some((b1, b2));
                break;
            }
            Some(w) => last_lower_fail = Some(w),
        }
    }

    // Upper bounds: smallest feasible b3 wins.
    let mut upper: Option<(f64, f64)> = None;
    let mut last_upper_fail: Option<GrowthViolation> = None;
    for b3 in log_grid(1e-3, 1e6, 60, false) {
        let b4 = inner
            .iter()
            .map(|&z| {
                (g1(z) - b3 * z.powi(p))
                    .max(g2(z) - b3 * z.abs().powi(q))
                    .max(g3(z) - b3 * z.powi(r))
            })
            .fold(FLOOR, f64::max);
        let mut worst: Option<GrowthViolation> = None;
        for &z in &zs {
            for (name, lhs, rhs) in [
                ("upper W", g1(z), b3 * z.powi(p) + b4),
                ("upper |W'|", g2(z), b3 * z.abs().powi(q) + b4),
                ("upper W''", g3(z), b3 * z.powi(r) + b4),
            ] {
                if lhs - rhs > 1e-9 * rhs.abs().max(1.0)
                    && worst.map(|w| lhs - rhs > w.lhs - w.rhs).unwrap_or(true)
                {
                    worst = Some(GrowthViolation {
                        inequality: name,
                        z,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        match worst {
            None => {
                upper = Some((b3, b4));
                break;
            }
            Some(w) => last_upper_fail = Some(w),
        }
    }

    let outcome = match (lower, upper) {
        (Some((b1, b2)), Some((b3, b4))) => {
            GrowthOutcome::Feasible(GrowthConstants { b1, b2, b3, b4 })
        }
        (None, _) => GrowthOutcome::Violation(last_lower_fail.expect("lower sweep ran")),
        (_, None) => GrowthOutcome::Violation(last_upper_fail.expect("upper sweep ran")),
    };
    GrowthReport {
        outcome,
        m,
        radius,
        samples: zs.len(),
    }
}
