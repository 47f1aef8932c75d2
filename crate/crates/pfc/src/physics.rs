//! Constitutive ingredients: homogeneous free energy densities, mobilities,
//! entropy densities, and the energy/chemical-potential functionals built
//! from them.
//!
//! The free energy of a state `u` is
//! `F(u) = ∫ W(u) + κ(½u² − |∇u|² + ½|Δu|²) dx`
//! and its variational derivative (the chemical potential) is
//! `ω = W'(u) + κ(u + 2Δu + Δ²u)`.
//!
//! The mobility `M(u) = max(u, 0)` degenerates for `u ≤ 0`; time stepping
//! always runs on the cutoff regularization `M_θ(u) = max(u, θ)` with
//! `θ ∈ (0, 1)`, and the degenerate dynamics is reached only as the `θ → 0`
//! limit of a sweep.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Homogeneous free energy density `W` with its first two derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    /// `W(z) = ¼(z−1)⁴ − (ε/2)(z−1)²` with `0 < ε < κ`; grows like `z⁴`.
    QuarticExample { epsilon: f64 },
    /// `W(z) = f₀(z) + (κγ/2)(z−1)² − (κ/2)z²` where `f₀` is the quartic
    /// expansion of the ideal-gas density about the reference state. The
    /// `κ` here must match the run's gradient-energy coefficient; `epsilon`
    /// is the growth-analysis parameter carried for feasibility checks.
    DerivationForm {
        gamma: f64,
        kappa: f64,
        epsilon: f64,
    },
    /// `W ≡ 0`. Test fixture exposing the exactly solvable linear dynamics;
    /// deliberately violates the quartic growth bound from below.
    LinearTest,
}

/// Quartic expansion of `z ln z − z` about the reference state `z = 1`.
pub fn ideal_gas_expansion(z: f64) -> f64 {
    let s = z - 1.0;
    -1.0 + 0.5 * s * s - s * s * s / 6.0 + s * s * s * s / 12.0
}

fn ideal_gas_expansion_d1(z: f64) -> f64 {
    let s = z - 1.0;
    s - 0.5 * s * s + s * s * s / 3.0
}

fn ideal_gas_expansion_d2(z: f64) -> f64 {
    let s = z - 1.0;
    1.0 - s + s * s
}

impl PotentialSpec {
    /// `W(z)`.
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            PotentialSpec::QuarticExample { epsilon } => {
                let s = z - 1.0;
                0.25 * s.powi(4) - 0.5 * epsilon * s * s
            }
            PotentialSpec::DerivationForm { gamma, kappa, .. } => {
                let s = z - 1.0;
                ideal_gas_expansion(z) + 0.5 * kappa * gamma * s * s - 0.5 * kappa * z * z
            }
            PotentialSpec::LinearTest => 0.0,
        }
    }

    /// `W'(z)`.
    pub fn deriv(&self, z: f64) -> f64 {
        match *self {
            PotentialSpec::QuarticExample { epsilon } => {
                let s = z - 1.0;
                s * s * s - epsilon * s
            }
            PotentialSpec::DerivationForm { gamma, kappa, .. } => {
                ideal_gas_expansion_d1(z) + kappa * gamma * (z - 1.0) - kappa * z
            }
            PotentialSpec::LinearTest => 0.0,
        }
    }

    /// `W''(z)`.
    pub fn second_deriv(&self, z: f64) -> f64 {
        match *self {
            PotentialSpec::QuarticExample { epsilon } => 3.0 * (z - 1.0) * (z - 1.0) - epsilon,
            PotentialSpec::DerivationForm { gamma, kappa, .. } => {
                ideal_gas_expansion_d2(z) + kappa * gamma - kappa
            }
            PotentialSpec::LinearTest => 0.0,
        }
    }

    /// `W`, `W'` or `W''` at `z` for `order ∈ {0, 1, 2}`.
    pub fn eval(&self, z: f64, order: u8) -> Result<f64> {
        match order {
            0 => Ok(self.value(z)),
            1 => Ok(self.deriv(z)),
            2 => Ok(self.second_deriv(z)),
            _ => Err(Error::Physics(format!(
                "potential derivative order must be 0, 1 or 2, got {order}"
            ))),
        }
    }

    /// The `ε` entering the growth bound `b₁z^{2m} − b₂ ≤ W(z) + (ε/2)z²`.
    pub fn growth_epsilon(&self) -> f64 {
        match *self {
            PotentialSpec::QuarticExample { epsilon } => epsilon,
            PotentialSpec::DerivationForm { epsilon, .. } => epsilon,
            PotentialSpec::LinearTest => 0.0,
        }
    }

    /// Growth exponent `m`; the built-in potentials are quartic, `m = 2`.
    pub fn growth_exponent(&self) -> u32 {
        2
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PotentialSpec::QuarticExample { .. } => "quartic_example",
            PotentialSpec::DerivationForm { .. } => "derivation_form",
            PotentialSpec::LinearTest => "linear_test",
        }
    }

    /// Validate the potential parameters against the run's `κ`.
    pub fn validate(&self, run_kappa: f64) -> Result<()> {
        if !(run_kappa.is_finite() && run_kappa > 0.0) {
            return Err(Error::config("kappa", "must be a positive finite number"));
        }
        match *self {
            PotentialSpec::QuarticExample { epsilon } => {
                if !(epsilon > 0.0 && epsilon < run_kappa) {
                    return Err(Error::config(
                        "epsilon",
                        format!(
                            "must satisfy 0 < epsilon < kappa (epsilon = {epsilon}, kappa = {run_kappa})"
                        ),
                    ));
                }
            }
            PotentialSpec::DerivationForm {
                kappa,
                epsilon,
                gamma,
            } => {
                if kappa != run_kappa {
                    return Err(Error::config(
                        "kappa",
                        format!(
                            "derivation_form couples W to kappa; potential kappa {kappa} != run kappa {run_kappa}"
                        ),
                    ));
                }
                if !gamma.is_finite() {
                    return Err(Error::config("gamma", "must be finite"));
                }
                if !(epsilon > 0.0 && epsilon < run_kappa) {
                    return Err(Error::config(
                        "epsilon",
                        format!(
                            "must satisfy 0 < epsilon < kappa (epsilon = {epsilon}, kappa = {run_kappa})"
                        ),
                    ));
                }
            }
            PotentialSpec::LinearTest => {}
        }
        Ok(())
    }
}

/// Degenerate mobility `M(z) = z` for `z > 0`, `0` otherwise.
#[inline]
pub(crate) fn mobility_degenerate(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// Cutoff mobility `M_θ(z) = z` for `z > θ`, `θ` otherwise.
#[inline]
pub(crate) fn mobility_cutoff(theta: f64, z: f64) -> f64 {
    if z > theta {
        z
    } else {
        theta
    }
}

/// Entropy density `Φ(z) = z ln z − z + 1` for `z > 0`; `Φ'' = 1/M`.
#[inline]
pub(crate) fn entropy_density(z: f64) -> f64 {
    z * z.ln() - z + 1.0
}

/// Regularized entropy density with `Φ_θ'' = 1/M_θ`, matched in value and
/// slope at the junction `z = θ`:
/// `Φ_θ(z) = z ln z − z + 1` for `z > θ`,
/// `z²/(2θ) + (ln θ − 1)z + 1 − θ/2` for `z ≤ θ`.
#[inline]
pub(crate) fn entropy_density_cutoff(theta: f64, z: f64) -> f64 {
    if z > theta {
        entropy_density(z)
    } else {
        0.5 * z * z / theta + (theta.ln() - 1.0) * z + 1.0 - 0.5 * theta
    }
}

/// Mobility/entropy evaluator pair at one regularization level `θ ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobilityModel {
    theta: f64,
}

impl MobilityModel {
    pub fn new(theta: f64) -> Result<MobilityModel> {
        if !(theta.is_finite() && (0.0..1.0).contains(&theta)) {
            return Err(Error::config(
                "theta",
                format!("must lie in [0, 1), got {theta}"),
            ));
        }
        Ok(MobilityModel { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `M(z)` or `M_θ(z)`. Regularized evaluation requires `θ > 0`.
    pub fn mobility(&self, z: f64, regularized: bool) -> Result<f64> {
        if regularized {
            if self.theta == 0.0 {
                return Err(Error::Physics(
                    "regularized mobility evaluation requires theta > 0".into(),
                ));
            }
            Ok(mobility_cutoff(self.theta, z))
        } else {
            Ok(mobility_degenerate(z))
        }
    }

    /// `Φ(z)` (requires `z > 0`) or `Φ_θ(z)` (requires `θ > 0`).
    pub fn entropy(&self, z: f64, regularized: bool) -> Result<f64> {
        if regularized {
            if self.theta == 0.0 {
                return Err(Error::Physics(
                    "regularized entropy evaluation requires theta > 0".into(),
                ));
            }
            Ok(entropy_density_cutoff(self.theta, z))
        } else {
            if z <= 0.0 {
                return Err(Error::Physics(format!(
                    "entropy density is defined for z > 0 only, got z = {z}"
                )));
            }
            Ok(entropy_density(z))
        }
    }
}

/// Chemical potential `ω = dealias(W'(u)) + κ(u + 2Δu + Δ²u)`, with the
/// nonlinearity evaluated pointwise in collocation space.
pub fn chemical_potential(u: &SpectralField, spec: &PotentialSpec, kappa: f64) -> SpectralField {
    let grid = u.grid();
    let coeffs = chemical_potential_coeffs(grid, u, spec, kappa, true);
    SpectralField::from_coeffs(grid, &coeffs)
}

pub(crate) fn chemical_potential_coeffs(
    grid: &Arc<Grid>,
    u: &SpectralField,
    spec: &PotentialSpec,
    kappa: f64,
    dealias: bool,
) -> Vec<rustfft::num_complex::Complex64> {
    let wprime: Vec<f64> = u.values().iter().map(|&z| spec.deriv(z)).collect();
    let mut omega = grid.forward(&wprime);
    if dealias {
        let keep = grid.dealias_keep();
        for (m, c) in omega.iter_mut().enumerate() {
            if !keep[m] {
                *c = Default::default();
            }
        }
    }
    let lam = grid.eigenvalues();
    for (m, c) in omega.iter_mut().enumerate() {
        let s = 1.0 - lam[m];
        *c += u.coeffs()[m] * (kappa * s * s);
    }
    omega
}

/// Free energy `F(u) = ∫ W(u) dx + (κ/2) Σ (1−λ)² |û|² (2π)^d`. The
/// quadratic terms `½u² − |∇u|² + ½|Δu|²` are summed spectrally in the
/// combined form `(1−λ)²/2` so the discrete energy is exactly the one whose
/// variational derivative is the discrete chemical potential.
pub fn free_energy(u: &SpectralField, spec: &PotentialSpec, kappa: f64) -> f64 {
    let grid = u.grid();
    let bulk: f64 = u.values().iter().map(|&z| spec.value(z)).sum::<f64>() * grid.quad_weight();
    let lam = grid.eigenvalues();
    let quad: f64 = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let s = 1.0 - lam[m];
            s * s * c.norm_sqr()
        })
        .sum::<f64>()
        * grid.volume();
    bulk + 0.5 * kappa * quad
}
