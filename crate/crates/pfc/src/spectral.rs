//! Periodic spectral discretization on `[0, 2π]^d`.
//!
//! A [`Grid`] holds the wavenumber and eigenvalue tables of the Laplacian
//! eigenbasis on the periodic box (realized as complex exponentials) together
//! with shared FFT plans. A [`SpectralField`] is one real scalar field stored
//! as collocation values with its spectral coefficients kept in sync; the
//! physical values are the canonical representation, so every field satisfies
//! `coeffs == forward(values)` bitwise. That convention is what makes
//! checkpoint/resume from a values-only snapshot reproduce a run exactly.
//!
//! Differential operators act diagonally in spectral space: the Laplacian and
//! biharmonic multiply by `-λ` and `λ²` with the true `λ = |k|²`, while first
//! derivatives use `i·k` with the axis Nyquist wavenumber treated as zero so
//! that derivatives of real fields stay real.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Domain period per axis.
pub const BOX_LENGTH: f64 = std::f64::consts::TAU;

/// Spectral discretization of the periodic box `[0, 2π]^d`.
pub struct Grid {
    dim: usize,
    n: usize,
    total: usize,
    /// Integer wavevector per mode, transform ordering, axes padded with 0.
    wavevectors: Vec<[i64; 3]>,
    /// `λ = |k|²` per mode.
    eigenvalues: Vec<f64>,
    /// First-derivative wavenumbers per mode and axis (Nyquist zeroed).
    k_deriv: Vec<[f64; 3]>,
    /// 2/3-rule mask: true when every `|k_axis| ≤ ⌊n/3⌋`.
    dealias_keep: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl Grid {
    /// Build a grid with `dim ∈ {1,2,3}` and an even number of modes per
    /// axis, `8 ≤ n ≤ 1024`.
    pub fn new(dim: usize, n: usize) -> Result<Arc<Grid>> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Grid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::Grid(format!("n must be even, got {n}")));
        }
        if !(8..=1024).contains(&n) {
            return Err(Error::Grid(format!("n must lie in [8, 1024], got {n}")));
        }
        let total = n.pow(dim as u32);
        let cutoff = (n / 3) as i64;
        let mut wavevectors = vec![[0i64; 3]; total];
        let mut eigenvalues = vec![0.0; total];
        let mut k_deriv = vec![[0.0f64; 3]; total];
        let mut dealias_keep = vec![true; total];
        for m in 0..total {
            let mut rem = m;
            let mut kv = [0i64; 3];
            // Row-major: axis 0 is slowest, axis dim-1 fastest.
            for a in (0..dim).rev() {
                let j = rem % n;
                rem /= n;
                let k = if j <= n / 2 {
                    j as i64
                } else {
                    j as i64 - n as i64
                };
                kv[a] = k;
            }
            let lambda: i64 = kv.iter().map(|k| k * k).sum();
            wavevectors[m] = kv;
            eigenvalues[m] = lambda as f64;
            for a in 0..dim {
                k_deriv[m][a] = if kv[a].unsigned_abs() as usize == n / 2 {
                    0.0
                } else {
                    kv[a] as f64
                };
            }
            dealias_keep[m] = kv[..dim].iter().all(|k| k.abs() <= cutoff);
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid {
            dim,
            n,
            total,
            wavevectors,
            eigenvalues,
            k_deriv,
            dealias_keep,
            fwd,
            inv,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Modes (and collocation points) per axis.
    pub fn modes_per_axis(&self) -> usize {
        self.n
    }

    /// Total number of modes, `n^d`.
    pub fn total_modes(&self) -> usize {
        self.total
    }

    /// Box volume `(2π)^d`.
    pub fn volume(&self) -> f64 {
        BOX_LENGTH.powi(self.dim as i32)
    }

    /// Quadrature weight of one collocation point, `(2π/n)^d`.
    pub fn quad_weight(&self) -> f64 {
        (BOX_LENGTH / self.n as f64).powi(self.dim as i32)
    }

    /// Eigenvalue table `λ = |k|²` in transform ordering.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Integer wavevector of mode `m` (axes beyond `dim` are zero).
    pub fn wavevector(&self, m: usize) -> [i64; 3] {
        self.wavevectors[m]
    }

    /// Flat index of the mode with wavevector `-k` (mod n).
    pub fn conjugate_index(&self, m: usize) -> usize {
        let mut rem = m;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.dim {
            let j = rem % self.n;
            rem /= self.n;
            let jc = (self.n - j) % self.n;
            idx += jc * stride;
            stride *= self.n;
        }
        idx
    }

    pub(crate) fn k_deriv(&self) -> &[[f64; 3]] {
        &self.k_deriv
    }

    pub(crate) fn dealias_keep(&self) -> &[bool] {
        &self.dealias_keep
    }

    /// Collocation coordinates of flat point index `m`.
    pub fn point(&self, m: usize) -> [f64; 3] {
        let h = BOX_LENGTH / self.n as f64;
        let mut rem = m;
        let mut x = [0.0; 3];
        for a in (0..self.dim).rev() {
            x[a] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
        x
    }

    fn fft_axes(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.total);
        let n = self.n;
        let mut scratch = vec![Complex64::default(); n];
        // Fastest axis is contiguous; process rows in place.
        for row in data.chunks_exact_mut(n) {
            plan.process(row);
        }
        // Remaining axes: gather a strided line, transform, scatter back.
        let mut stride = n;
        for _ in 1..self.dim {
            let block = stride * n;
            for base in (0..self.total).step_by(block) {
                for inner in 0..stride {
                    let start = base + inner;
                    for t in 0..n {
                        scratch[t] = data[start + t * stride];
                    }
                    plan.process(&mut scratch);
                    for t in 0..n {
                        data[start + t * stride] = scratch[t];
                    }
                }
            }
            stride *= n;
        }
    }

    /// Forward transform of real collocation values; normalized so the
    /// constant-mode coefficient equals the mean of `values`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.total, "value buffer length mismatch");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_axes(&mut buf, &self.fwd);
        let scale = 1.0 / self.total as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform back to real collocation values (imaginary residue
    /// of conjugate-symmetric input is discarded).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(
            coeffs.len(),
            self.total,
            "coefficient buffer length mismatch"
        );
        let mut buf = coeffs.to_vec();
        self.fft_axes(&mut buf, &self.inv);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// One real scalar Ω-periodic field: collocation values plus spectral
/// coefficients, always synchronized (`coeffs == forward(values)`).
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Field from collocation values. Rejects wrong-sized or non-finite data.
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<SpectralField> {
        if values.len() != grid.total_modes() {
            return Err(Error::Field(format!(
                "expected {} values for the grid, got {}",
                grid.total_modes(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Field(format!("non-finite value {v} in field data")));
        }
        let coeffs = grid.forward(&values);
        Ok(SpectralField {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    /// Field from spectral coefficients. The data is projected onto real
    /// fields and re-canonicalized (values are authoritative afterwards).
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: &[Complex64]) -> SpectralField {
        let values = grid.inverse(coeffs);
        let coeffs = grid.forward(&values);
        SpectralField {
            grid: grid.clone(),
            values,
            coeffs,
        }
    }

    /// Constant field `u ≡ c`.
    pub fn constant(grid: &Arc<Grid>, c: f64) -> SpectralField {
        SpectralField::from_values(grid, vec![c; grid.total_modes()])
            .expect("constant field is always valid")
    }

    /// Field sampled from a function of the collocation coordinates.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> f64) -> SpectralField {
        let values: Vec<f64> = (0..grid.total_modes()).map(|m| f(grid.point(m))).collect();
        SpectralField::from_values(grid, values).expect("sampled field must be finite")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mean over the box, read from the constant-mode coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise map in collocation space.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        SpectralField::from_values(&self.grid, values).expect("mapped field must be finite")
    }

    fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> SpectralField {
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| f(m, c))
            .collect();
        SpectralField::from_coeffs(&self.grid, &coeffs)
    }

    /// `Δu`: multiply each coefficient by `-λ`.
    pub fn laplacian(&self) -> SpectralField {
        let lam = self.grid.eigenvalues();
        self.map_coeffs(|m, c| c * -lam[m])
    }

    /// `Δ²u`: multiply each coefficient by `λ²`.
    pub fn biharmonic(&self) -> SpectralField {
        let lam = self.grid.eigenvalues();
        self.map_coeffs(|m, c| c * (lam[m] * lam[m]))
    }

    /// `∇u` as one field per axis, via `i·k` (Nyquist treated as zero).
    pub fn gradient(&self) -> Vec<SpectralField> {
        let kd = self.grid.k_deriv();
        (0..self.grid.dim())
            .map(|a| self.map_coeffs(|m, c| c * Complex64::new(0.0, kd[m][a])))
            .collect()
    }

    /// 2/3-rule dealiasing: zero every mode with an axis wavenumber above
    /// `⌊n/3⌋`. Idempotent by construction.
    pub fn dealias(&self) -> SpectralField {
        let keep = self.grid.dealias_keep();
        self.map_coeffs(|m, c| if keep[m] { c } else { Complex64::default() })
    }

    /// Linear part of the chemical potential, `κ(u + 2Δu + Δ²u)`, whose
    /// Fourier symbol is `κ(1-λ)²`.
    pub fn apply_pfc_symbol(&self, kappa: f64) -> SpectralField {
        assert!(kappa > 0.0, "kappa must be positive");
        let lam = self.grid.eigenvalues();
        self.map_coeffs(|m, c| {
            let s = 1.0 - lam[m];
            c * (kappa * s * s)
        })
    }

    /// Discrete `L²(Ω)` pairing `(2π/n)^d Σ u·v`; exact for trigonometric
    /// polynomials resolvable on the grid.
    pub fn inner_product(&self, other: &SpectralField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Grid("inner product across mismatched grids".into()));
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(sum * self.grid.quad_weight())
    }
}

/// `∇·v` of a vector of per-axis component fields.
pub fn divergence(components: &[SpectralField]) -> Result<SpectralField> {
    let first = components
        .first()
        .ok_or_else(|| Error::Field("divergence of an empty component list".into()))?;
    let grid = first.grid().clone();
    if components.len() != grid.dim() {
        return Err(Error::Grid(format!(
            "divergence needs {} components, got {}",
            grid.dim(),
            components.len()
        )));
    }
    if components.iter().any(|c| *c.grid() != grid) {
        return Err(Error::Grid("divergence across mismatched grids".into()));
    }
    let kd = grid.k_deriv();
    let mut coeffs = vec![Complex64::default(); grid.total_modes()];
    for (a, comp) in components.iter().enumerate() {
        for (m, c) in comp.coeffs().iter().enumerate() {
            coeffs[m] += c * Complex64::new(0.0, kd[m][a]);
        }
    }
    Ok(SpectralField::from_coeffs(&grid, &coeffs))
}

/// Deterministic band-limited noise in `[-1, 1]`-ish range: iid uniform
/// samples filtered to `max_axis |k| ≤ cutoff` and rescaled to unit sup norm.
/// Used by initial-condition generators and randomized tests.
pub fn filtered_noise(grid: &Arc<Grid>, seed: u64, cutoff: usize) -> SpectralField {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..grid.total_modes())
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            2.0 * u - 1.0
        })
        .collect();
    let field = SpectralField::from_values(grid, raw).expect("noise is finite");
    let cut = cutoff as i64;
    let filtered = field.map_coeffs(|m, c| {
        let kv = grid.wavevector(m);
        if kv[..grid.dim()].iter().all(|k| k.abs() <= cut) && m != 0 {
            c
        } else {
            Complex64::default()
        }
    });
    let sup = filtered
        .values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if sup > 0.0 {
        filtered.map_values(|v| v / sup)
    } else {
        filtered
    }
}
