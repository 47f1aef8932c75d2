//! Checkpoint/resume determinism: snapshot a run mid-flight, reload the
//! state from disk, continue, and compare against the uninterrupted
//! trajectory. With the memoryless first-order stepper the resumed run is
//! bit-identical.
//!
//! ```bash
//! cargo run --release --example checkpoint_resume
//! ```

use pfc::checkpoint;
use pfc::physics::PotentialSpec;
use pfc::solver::{
    project_initial, run, run_fresh, InitialCondition, ResolvedScheme, RunOptions, SchemeConfig,
};
use pfc::spectral::Grid;
use pfc::SolverState;

fn main() -> pfc::Result<()> {
    let grid = Grid::new(2, 32)?;
    let ic = InitialCondition::ConstantPlusFilteredNoise {
        mean: 1.0,
        amplitude: 0.2,
        seed: 11,
        cutoff: 4,
    };
    let potential = PotentialSpec::QuarticExample { epsilon: 0.2 };
    let config = SchemeConfig {
        dt_initial: 1e-3,
        dt_min: 1e-3,
        dt_max: 1e-3,
        t_final: 0.5,
        ..Default::default()
    };
    let opts = RunOptions {
        diagnostics_interval: 25,
        capture_steps: vec![250],
    };

    // Uninterrupted reference run, capturing the state at step 250.
    let u0 = project_initial(&ic, &grid, true)?;
    let state = SolverState::new(u0.clone(), 0.05, 1.0, potential.clone())?;
    let reference = run_fresh(state, &config, &opts)?;

    let dir = std::env::temp_dir().join("pfc_checkpoint_resume");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("step_250.pfc");
    checkpoint::save(&reference.snapshots[0].state, 11, &path)?;
    println!("snapshot written to {}", path.display());

    // Reload and continue to t_final. The scheme is re-resolved against the
    // regenerated initial data, exactly as the CLI resume path does.
    let (loaded, seed) = checkpoint::load(&path)?;
    println!(
        "loaded snapshot: t = {}, step = {}, seed = {seed}",
        loaded.t(),
        loaded.step_index()
    );
    let resolved = ResolvedScheme::resolve(&config, &u0, &potential, 1.0)?;
    let resumed = run(loaded, resolved, &opts)?;

    let a = reference.final_state.field().values();
    let b = resumed.final_state.field().values();
    let identical = a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
    println!(
        "final state after resume is {} the uninterrupted run",
        if identical {
            "bit-identical to"
        } else {
            "DIFFERENT from"
        }
    );
    let ra = reference.final_sample().record;
    let rb = resumed.final_sample().record;
    println!("final energy: {:.12e} vs {:.12e}", ra.energy, rb.energy);
    Ok(())
}
