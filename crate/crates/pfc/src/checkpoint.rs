//! Binary snapshot files.
//!
//! Layout: the magic string `PFCCKPT1`, a fixed-order little-endian header
//! `(dim: u32, n: u32, t: f64, dt: f64, theta: f64, kappa: f64,
//! epsilon: f64, gamma: f64, potential_kind: u32, step_index: u64,
//! seed: u64)`, then the field's collocation values as row-major little-
//! endian `f64`. Potentials without an `epsilon`/`gamma` parameter store a
//! quiet NaN in the unused slot.
//!
//! Collocation values are the canonical field representation, so loading a
//! snapshot reconstructs the in-memory state bit-exactly and a resumed run
//! (with the memoryless first-order stepper) continues identically to an
//! uninterrupted one.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::physics::PotentialSpec;
use crate::solver::{MobilityKind, SolverState};
use crate::spectral::{Grid, SpectralField};

const MAGIC: &[u8; 8] = b"PFCCKPT1";

const KIND_QUARTIC: u32 = 0;
const KIND_DERIVATION: u32 = 1;
const KIND_LINEAR: u32 = 2;

fn kind_tag(spec: &PotentialSpec) -> u32 {
    match spec {
        PotentialSpec::QuarticExample { .. } => KIND_QUARTIC,
        PotentialSpec::DerivationForm { .. } => KIND_DERIVATION,
        PotentialSpec::LinearTest => KIND_LINEAR,
    }
}

/// Write the state and the run's generator seed to `path`.
pub fn save(state: &SolverState, seed: u64, path: &Path) -> Result<()> {
    if matches!(state.mobility_kind(), MobilityKind::Frozen(_)) {
        return Err(Error::Checkpoint(
            "frozen-mobility validation states are not checkpointable".into(),
        ));
    }
    let (epsilon, gamma) = match *state.potential() {
        PotentialSpec::QuarticExample { epsilon } => (epsilon, f64::NAN),
        PotentialSpec::DerivationForm { gamma, epsilon, .. } => (epsilon, gamma),
        PotentialSpec::LinearTest => (f64::NAN, f64::NAN),
    };
    let grid = state.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.modes_per_axis() as u32).to_le_bytes())?;
    w.write_all(&state.t().to_le_bytes())?;
    w.write_all(&state.dt().to_le_bytes())?;
    w.write_all(&state.theta().to_le_bytes())?;
    w.write_all(&state.kappa().to_le_bytes())?;
    w.write_all(&epsilon.to_le_bytes())?;
    w.write_all(&gamma.to_le_bytes())?;
    w.write_all(&kind_tag(state.potential()).to_le_bytes())?;
    w.write_all(&state.step_index().to_le_bytes())?;
    w.write_all(&seed.to_le_bytes())?;
    for v in state.field().values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    Ok(f64::from_le_bytes(b))
}

/// Load a snapshot. Returns the reconstructed state and the stored seed.
pub fn load(path: &Path) -> Result<(SolverState, u64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file too short for magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(MAGIC)
        )));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let t = read_f64(&mut r)?;
    let dt = read_f64(&mut r)?;
    let theta = read_f64(&mut r)?;
    let kappa = read_f64(&mut r)?;
    let epsilon = read_f64(&mut r)?;
    let gamma = read_f64(&mut r)?;
    let kind = read_u32(&mut r)?;
    let step_index = read_u64(&mut r)?;
    let seed = read_u64(&mut r)?;

    for (name, v) in [("t", t), ("dt", dt), ("theta", theta), ("kappa", kappa)] {
        if !v.is_finite() {
            return Err(Error::Checkpoint(format!("non-finite header field {name}")));
        }
    }
    let potential = match kind {
        KIND_QUARTIC => {
            if !epsilon.is_finite() {
                return Err(Error::Checkpoint(
                    "quartic potential needs finite epsilon".into(),
                ));
            }
            PotentialSpec::QuarticExample { epsilon }
        }
        KIND_DERIVATION => {
            if !(epsilon.is_finite() && gamma.is_finite()) {
                return Err(Error::Checkpoint(
                    "derivation potential needs finite epsilon and gamma".into(),
                ));
            }
            PotentialSpec::DerivationForm {
                gamma,
                kappa,
                epsilon,
            }
        }
        KIND_LINEAR => PotentialSpec::LinearTest,
        other => {
            return Err(Error::Checkpoint(format!(
                "unknown potential kind tag {other}"
            )));
        }
    };

    let grid =
        Grid::new(dim, n).map_err(|e| Error::Checkpoint(format!("header grid invalid: {e}")))?;
    let total = grid.total_modes();
    let mut values = vec![0.0f64; total];
    let mut buf = [0u8; 8];
    for v in values.iter_mut() {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Checkpoint(format!("payload shorter than {total} values")))?;
        *v = f64::from_le_bytes(buf);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint(
            "trailing bytes after field payload".into(),
        ));
    }
    let u = SpectralField::from_values(&grid, values)
        .map_err(|e| Error::Checkpoint(format!("payload invalid: {e}")))?;
    let state = SolverState::restore(u, t, dt, step_index, theta, kappa, potential)
        .map_err(|e| Error::Checkpoint(format!("state invalid: {e}")))?;
    Ok((state, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{project_initial, InitialCondition};

    fn sample_state() -> SolverState {
        let grid = Grid::new(2, 16).unwrap();
        let ic = InitialCondition::ConstantPlusFilteredNoise {
            mean: 1.0,
            amplitude: 0.2,
            seed: 5,
            cutoff: 4,
        };
        let u = project_initial(&ic, &grid, true).unwrap();
        SolverState::new(u, 0.05, 1.0, PotentialSpec::QuarticExample { epsilon: 0.2 }).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.pfc");
        let state = sample_state();
        save(&state, 5, &path).unwrap();
        let (loaded, seed) = load(&path).unwrap();
        assert_eq!(seed, 5);
        assert_eq!(loaded.t(), state.t());
        assert_eq!(loaded.theta(), state.theta());
        assert_eq!(loaded.kappa(), state.kappa());
        assert_eq!(loaded.potential(), state.potential());
        let a: Vec<u64> = state.field().values().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = loaded
            .field()
            .values()
            .iter()
            .map(|v| v.to_bits())
            .collect();
        assert_eq!(a, b);
        // Canonical coefficients are reproduced exactly as well.
        for (x, y) in state.field().coeffs().iter().zip(loaded.field().coeffs()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.pfc");
        save(&sample_state(), 0, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.pfc");
        save(&sample_state(), 0, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.pfc");
        save(&sample_state(), 0, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn bad_kind_tag_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.pfc");
        save(&sample_state(), 0, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        // kind tag sits after magic (8) + 2×u32 + 6×f64 = 64 bytes.
        bytes[64] = 9;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }
}
