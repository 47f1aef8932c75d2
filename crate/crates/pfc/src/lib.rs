//! Pseudospectral solver and verification harness for a phase field crystal
//! (PFC) equation with the degenerate mobility `M(u) = max(u, 0)`.
//!
//! The conserved gradient flow
//!
//! ```text
//! ∂_t u = ∇·(M(u) ∇ω),    ω = W'(u) + κ(u + 2Δu + Δ²u)
//! ```
//!
//! on the periodic box `[0, 2π]^d` (`d ≤ 3`) dissipates the free energy
//! `F(u) = ∫ W(u) + κ(½u² − |∇u|² + ½|Δu|²) dx` while conserving `∫u`.
//! Because the mobility degenerates for `u ≤ 0`, time stepping always runs
//! on the cutoff regularization `M_θ(u) = max(u, θ)` with `θ ∈ (0, 1)`; the
//! degenerate dynamics is studied as the `θ → 0` limit of a sweep, exactly
//! the regime in which solutions with positive initial data stay (nearly)
//! nonnegative.
//!
//! Everything the analysis controls is measurable here: mass conservation,
//! the energy identity and its dissipation integral, the regularized entropy
//! balance, and the negativity functional `∫|min(u,0)+θ|²dx` against its
//! `C(θ² + θ + θ^{1/2})` envelope. The `verify` CLI subcommand and the
//! `acceptance` test suite run the full battery.
//!
//! Modules:
//! * [`spectral`] — grids, fields, FFT-backed operators on the periodic box.
//! * [`physics`] — potentials `W`, mobilities `M`/`M_θ`, entropies `Φ`/`Φ_θ`,
//!   free energy and chemical potential.
//! * [`solver`] — exponential/IMEX split time steppers, runs, trajectories.
//! * [`diagnostics`] — records, identity residuals, growth-bound feasibility.
//! * [`sweep`] — θ-continuation, Cauchy metrics, negativity-envelope fit.
//! * [`checkpoint`] — binary snapshot files.
//! * [`config`] / [`cli`] — TOML run configuration and the `pfc` binary.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod physics;
pub mod solver;
pub mod spectral;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use physics::{MobilityModel, PotentialSpec};
pub use solver::{InitialCondition, SchemeConfig, SolverState, TimeScheme};
pub use spectral::{Grid, SpectralField};
