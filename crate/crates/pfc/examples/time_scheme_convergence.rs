//! Self-convergence of the two time steppers on a smooth 1D run: Richardson
//! differences between solutions at dt, dt/2, dt/4, ... The first-order
//! exponential splitting halves its error per refinement; the two-step
//! variant quarters it.
//!
//! ```bash
//! cargo run --release --example time_scheme_convergence
//! ```

use pfc::physics::PotentialSpec;
use pfc::solver::{run_fresh, RunOptions, SchemeConfig, TimeScheme};
use pfc::spectral::{Grid, SpectralField};
use pfc::SolverState;

fn main() -> pfc::Result<()> {
    let grid = Grid::new(1, 64)?;
    let u0 = SpectralField::from_fn(&grid, |x| 1.0 + 0.3 * x[0].sin());
    let solve = |dt: f64, scheme: TimeScheme| -> pfc::Result<SpectralField> {
        let state = SolverState::new(
            u0.clone(),
            0.05,
            1.0,
            PotentialSpec::QuarticExample { epsilon: 0.2 },
        )?;
        let config = SchemeConfig {
            splitting_mobility: Some(1.3),
            dt_initial: dt,
            dt_min: dt,
            dt_max: dt,
            energy_guard: false,
            t_final: 0.1,
            time_scheme: scheme,
            dealias: true,
        };
        Ok(run_fresh(state, &config, &RunOptions::default())?
            .final_state
            .field()
            .clone())
    };

    for (name, scheme) in [("imex1", TimeScheme::Imex1), ("imex2", TimeScheme::Imex2)] {
        println!("{name}:");
        let dts = [1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5];
        let sols: Vec<SpectralField> = dts
            .iter()
            .map(|&dt| solve(dt, scheme))
            .collect::<pfc::Result<_>>()?;
        let mut prev: Option<f64> = None;
        for i in 0..dts.len() - 1 {
            let err = sols[i]
                .values()
                .iter()
                .zip(sols[i + 1].values())
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            match prev {
                Some(p) => println!(
                    "  dt {:>8.2e}: diff {err:>10.3e}  (order {:.2})",
                    dts[i],
                    (p / err).log2()
                ),
                None => println!("  dt {:>8.2e}: diff {err:>10.3e}", dts[i]),
            }
            prev = Some(err);
        }
    }
    Ok(())
}
