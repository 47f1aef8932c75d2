//! Built-in invariant battery behind `pfc verify`: fast, self-contained
//! checks of every contract the solver relies on. Each check reports one
//! pass/fail line; the battery is a smoke-level version of the long-running
//! acceptance suite.

use crate::diagnostics::{self, GrowthOutcome};
use crate::physics::{self, PotentialSpec};
use crate::solver::{
    self, project_initial, run_fresh, InitialCondition, RunOptions, SchemeConfig, SolverState,
    TimeScheme,
};
use crate::spectral::{divergence, filtered_noise, Grid, SpectralField, BOX_LENGTH};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn quartic() -> PotentialSpec {
    PotentialSpec::QuarticExample { epsilon: 0.2 }
}

/// Run the whole battery. All checks execute even if early ones fail.
pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();

    // Eigenvalue table of the 1D n = 8 grid, transform ordering.
    {
        let grid = Grid::new(1, 8).unwrap();
        let expected = [0.0, 1.0, 4.0, 9.0, 16.0, 9.0, 4.0, 1.0];
        let ok = grid.eigenvalues() == expected;
        out.push(check(
            "grid eigenvalue table (d=1, n=8)",
            ok,
            format!("{:?}", grid.eigenvalues()),
        ));
    }

    // Transform round trip on 2D noise.
    {
        let grid = Grid::new(2, 32).unwrap();
        let u = filtered_noise(&grid, 1, 15);
        let back = grid.inverse(&grid.forward(u.values()));
        let err = u
            .values()
            .iter()
            .zip(&back)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        out.push(check(
            "transform round trip <= 1e-12",
            err <= 1e-12,
            format!("max error {err:.3e}"),
        ));
    }

    // Parseval.
    {
        let grid = Grid::new(2, 16).unwrap();
        let u = filtered_noise(&grid, 2, 7);
        let direct = u.inner_product(&u).unwrap();
        let spectral: f64 = u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.volume();
        let rel = (direct - spectral).abs() / direct.max(1e-30);
        out.push(check(
            "Parseval identity <= 1e-10",
            rel <= 1e-10,
            format!("relative error {rel:.3e}"),
        ));
    }

    // Gradient/divergence adjointness.
    {
        let grid = Grid::new(2, 16).unwrap();
        let u = filtered_noise(&grid, 3, 7);
        let v = [filtered_noise(&grid, 4, 7), filtered_noise(&grid, 5, 7)];
        let lhs: f64 = u
            .gradient()
            .iter()
            .zip(v.iter())
            .map(|(g, w)| g.inner_product(w).unwrap())
            .sum();
        let rhs = -u.inner_product(&divergence(&v).unwrap()).unwrap();
        let err = (lhs - rhs).abs() / lhs.abs().max(1.0);
        out.push(check(
            "gradient/divergence adjointness <= 1e-10",
            err <= 1e-10,
            format!("relative error {err:.3e}"),
        ));
    }

    // Dealiasing: projection below the 2/3 cutoff, idempotent.
    {
        let grid = Grid::new(1, 16).unwrap();
        let high = SpectralField::from_fn(&grid, |x| (7.0 * x[0]).sin());
        let zeroed = max_abs(high.dealias().values()) <= 1e-13;
        let mixed = filtered_noise(&grid, 6, 7);
        let once = mixed.dealias();
        let twice = once.dealias();
        let idem = once
            .values()
            .iter()
            .zip(twice.values())
            .all(|(a, b)| (a - b).abs() <= 1e-14);
        out.push(check(
            "2/3-rule dealiasing cuts high modes, idempotent",
            zeroed && idem,
            format!("high-mode zeroed: {zeroed}, idempotent: {idem}"),
        ));
    }

    // Linear symbol κ(1-λ)² matches the operator combination.
    {
        let grid = Grid::new(1, 32).unwrap();
        let u = filtered_noise(&grid, 7, 9);
        let direct = u.apply_pfc_symbol(1.3);
        let lap = u.laplacian();
        let bih = u.biharmonic();
        let err = (0..grid.total_modes())
            .map(|j| {
                let combo = 1.3 * (u.values()[j] + 2.0 * lap.values()[j] + bih.values()[j]);
                (direct.values()[j] - combo).abs()
            })
            .fold(0.0f64, f64::max);
        out.push(check(
            "kappa(1-lambda)^2 symbol = kappa(u + 2*lap u + bih u)",
            err <= 1e-10,
            format!("max error {err:.3e}"),
        ));
    }

    // Potential reference values.
    {
        let w = quartic();
        let ok = w.value(1.0) == 0.0
            && w.deriv(1.0) == 0.0
            && (w.value(0.0) - 0.15).abs() <= 1e-15
            && physics::ideal_gas_expansion(1.0) == -1.0;
        out.push(check(
            "potential reference values (W(1), W'(1), W(0), f0(1))",
            ok,
            format!("W(0) = {}", w.value(0.0)),
        ));
    }

    // Mobility and entropy piecewise structure.
    {
        let model = physics::MobilityModel::new(0.1).unwrap();
        let ok = model.mobility(-1.0, false).unwrap() == 0.0
            && model.mobility(2.0, false).unwrap() == 2.0
            && model.mobility(0.05, true).unwrap() == 0.1
            && model.mobility(0.2, true).unwrap() == 0.2
            && model.entropy(1.0, false).unwrap() == 0.0
            && (model.entropy(0.0, true).unwrap() - 0.95).abs() <= 1e-14
            && model.entropy(-1.0, false).is_err();
        out.push(check(
            "mobility/entropy piecewise values",
            ok,
            String::new(),
        ));
    }

    // Chemical potential against the mode-expansion oracle.
    {
        let grid = Grid::new(1, 64).unwrap();
        let (a, eps, kappa) = (0.1f64, 0.2f64, 1.0f64);
        let u = SpectralField::from_fn(&grid, |x| 1.0 + a * (2.0 * x[0]).sin());
        let omega = physics::chemical_potential(&u, &quartic(), kappa);
        let c2 = 0.75 * a * a * a - eps * a + kappa * 9.0 * a;
        let c6 = -0.25 * a * a * a;
        let err = (0..grid.total_modes())
            .map(|j| {
                let x = grid.point(j)[0];
                let exact = kappa + c2 * (2.0 * x).sin() + c6 * (6.0 * x).sin();
                (omega.values()[j] - exact).abs()
            })
            .fold(0.0f64, f64::max);
        out.push(check(
            "chemical potential matches mode-expansion oracle <= 1e-8",
            err <= 1e-8,
            format!("max error {err:.3e}"),
        ));
    }

    // Free energy against the trigonometric-moment oracle.
    {
        let grid = Grid::new(1, 64).unwrap();
        let (a, eps, kappa) = (0.3f64, 0.2f64, 1.0f64);
        let u = SpectralField::from_fn(&grid, |x| 1.0 + a * x[0].sin());
        let oracle = 3.0 * std::f64::consts::PI / 16.0 * a.powi(4)
            - 0.5 * eps * std::f64::consts::PI * a * a
            + kappa * std::f64::consts::PI;
        let err = (physics::free_energy(&u, &quartic(), kappa) - oracle).abs();
        out.push(check(
            "free energy matches trig-moment oracle <= 1e-10",
            err <= 1e-10,
            format!("error {err:.3e}"),
        ));
    }

    // Variational consistency of (F, ω).
    {
        let grid = Grid::new(1, 64).unwrap();
        let u = filtered_noise(&grid, 8, 8).map_values(|v| 1.0 + 0.4 * v);
        let v = filtered_noise(&grid, 9, 8);
        let omega = physics::chemical_potential(&u, &quartic(), 1.0);
        let pairing = omega.inner_product(&v).unwrap();
        let diff = |h: f64| {
            let up = u
                .values()
                .iter()
                .zip(v.values())
                .map(|(a, b)| a + h * b)
                .collect();
            let dn = u
                .values()
                .iter()
                .zip(v.values())
                .map(|(a, b)| a - h * b)
                .collect();
            let up = SpectralField::from_values(u.grid(), up).unwrap();
            let dn = SpectralField::from_values(u.grid(), dn).unwrap();
            (physics::free_energy(&up, &quartic(), 1.0)
                - physics::free_energy(&dn, &quartic(), 1.0))
                / (2.0 * h)
        };
        let e3 = (diff(1e-3) - pairing).abs();
        let e4 = (diff(1e-4) - pairing).abs();
        let ok = e4 <= 1e-5 && (e3 >= 30.0 * e4 || e3 <= 1e-10);
        out.push(check(
            "variational consistency dF = <omega, v> at 2nd order",
            ok,
            format!("e(1e-3) = {e3:.3e}, e(1e-4) = {e4:.3e}"),
        ));
    }

    // Constant states are stationary.
    {
        let grid = Grid::new(1, 64).unwrap();
        let u = SpectralField::constant(&grid, 1.3);
        let mut state = SolverState::new(u.clone(), 0.05, 1.0, quartic()).unwrap();
        let config = SchemeConfig::default();
        solver::step(&mut state, &config).unwrap();
        let drift = state
            .field()
            .values()
            .iter()
            .zip(u.values())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        out.push(check(
            "constant state is a fixed point <= 1e-14",
            drift <= 1e-14,
            format!("drift {drift:.3e}"),
        ));
    }

    // Conservation form: rhs has zero mean.
    {
        let grid = Grid::new(1, 64).unwrap();
        let u = filtered_noise(&grid, 10, 10).map_values(|v| 1.0 + 0.5 * v);
        let state = SolverState::new(u, 0.05, 1.0, quartic()).unwrap();
        let r = solver::rhs(&state);
        let scale = max_abs(r.values()).max(1.0);
        let ok = r.mean().abs() <= 1e-14 * scale;
        out.push(check(
            "rhs mean vanishes (conservation form)",
            ok,
            format!("mean {:.3e}", r.mean()),
        ));
    }

    // Exact linear decay in the frozen-mobility validation mode.
    {
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
        let expected = amp * (-3.6f64).exp();
        let rel = (a_end - expected).abs() / expected;
        out.push(check(
            "linear decay rate kappa*lambda*(1-lambda)^2 <= 1e-6",
            rel <= 1e-6,
            format!("relative error {rel:.3e}"),
        ));
    }

    // Short 2D run: mass conserved, energy non-increasing.
    {
        let grid = Grid::new(2, 32).unwrap();
        let ic = InitialCondition::ConstantPlusFilteredNoise {
            mean: 1.0,
            amplitude: 0.2,
            seed: 7,
            cutoff: 8,
        };
        let u0 = project_initial(&ic, &grid, true).unwrap();
        let m0 = u0.mean();
        let e_tol = 1e-9 * (1.0 + physics::free_energy(&u0, &quartic(), 1.0).abs());
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
                diagnostics_interval: 5,
                capture_steps: vec![],
            },
        )
        .unwrap();
        let drift = traj
            .samples
            .iter()
            .map(|s| (s.record.mass / grid.volume() - m0).abs())
            .fold(0.0, f64::max);
        let monotone = traj
            .samples
            .windows(2)
            .all(|w| w[1].record.energy <= w[0].record.energy + e_tol);
        out.push(check(
            "2D run conserves mass and dissipates energy",
            drift <= 1e-10 * m0.abs() && monotone,
            format!("mass drift {drift:.3e}, energy monotone: {monotone}"),
        ));
    }

    // Entropy balance residual shrinks under dt refinement.
    {
        let grid = Grid::new(1, 64).unwrap();
        let runner = |dt: f64| {
            let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.3 * x[0].sin());
            let state = SolverState::new(u0, 0.05, 1.0, quartic()).unwrap();
            let config = SchemeConfig {
                splitting_mobility: Some(1.3),
                dt_initial: dt,
                dt_min: dt,
                dt_max: dt,
                energy_guard: false,
                t_final: 0.25,
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
        let coarse = diagnostics::entropy_balance_residual(&runner(1e-3)).unwrap();
        let fine = diagnostics::entropy_balance_residual(&runner(5e-4)).unwrap();
        let ratio = coarse.last().unwrap().abs() / fine.last().unwrap().abs().max(1e-300);
        out.push(check(
            "entropy balance residual shrinks >= 1.5x under dt halving",
            ratio >= 1.5,
            format!("ratio {ratio:.2}"),
        ));
    }

    // Growth bounds: quartic feasible, linear test violating.
    {
        let quartic_report = diagnostics::growth_check(&quartic(), 2, 10.0, 4001);
        let linear_report = diagnostics::growth_check(&PotentialSpec::LinearTest, 2, 10.0, 2001);
        let ok = quartic_report.is_feasible()
            && matches!(
                &linear_report.outcome,
                GrowthOutcome::Violation(v) if v.inequality == "lower W"
            );
        let detail = match (&quartic_report.outcome, &linear_report.outcome) {
            (GrowthOutcome::Feasible(c), GrowthOutcome::Violation(v)) => format!(
                "quartic b = ({:.3}, {:.3}, {:.3}, {:.3}); linear violates {} at z = {:.2}",
                c.b1, c.b2, c.b3, c.b4, v.inequality, v.z
            ),
            _ => "unexpected outcome".into(),
        };
        out.push(check(
            "growth bounds: quartic feasible, linear_test violation",
            ok,
            detail,
        ));
    }

    // Negativity functional of signed states.
    {
        let grid = Grid::new(1, 32).unwrap();
        let theta = 0.1;
        let pos =
            SolverState::new(SpectralField::constant(&grid, 1.0), theta, 1.0, quartic()).unwrap();
        let neg =
            SolverState::new(SpectralField::constant(&grid, -1.0), theta, 1.0, quartic()).unwrap();
        let rp = diagnostics::record(&pos);
        let rn = diagnostics::record(&neg);
        let ok = (rp.negativity - theta * theta * BOX_LENGTH).abs() <= 1e-12
            && (rn.negativity - (1.0 - theta) * (1.0 - theta) * BOX_LENGTH).abs() <= 1e-12
            && rp.entropy >= 0.0
            && rn.entropy >= 0.0;
        out.push(check(
            "negativity functional piecewise values",
            ok,
            format!("N(+1) = {:.6}, N(-1) = {:.6}", rp.negativity, rn.negativity),
        ));
    }

    // Determinism: identical in-memory reruns.
    {
        let grid = Grid::new(2, 16).unwrap();
        let go = || {
            let ic = InitialCondition::ConstantPlusFilteredNoise {
                mean: 1.0,
                amplitude: 0.2,
                seed: 11,
                cutoff: 4,
            };
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
                    diagnostics_interval: 10,
                    capture_steps: vec![],
                },
            )
            .unwrap()
        };
        let a = go();
        let b = go();
        let ok = a.final_state.field().values() == b.final_state.field().values();
        out.push(check("rerun determinism (bitwise)", ok, String::new()));
    }

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn battery_is_green() {
        let checks = super::run_all();
        let failures: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failures.is_empty(), "failed checks: {failures:?}");
    }
}
