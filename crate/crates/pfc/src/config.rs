//! Run configuration: TOML parsing with strict validation, defaults, and a
//! canonical echo written next to every run's outputs.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::physics::PotentialSpec;
use crate::solver::{InitialCondition, SchemeConfig, TimeScheme};
use crate::sweep::{SweepPlan, SweepScenario, DEFAULT_THETAS};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dim: Option<usize>,
    n: Option<usize>,
    kappa: Option<f64>,
    epsilon: Option<f64>,
    gamma: Option<f64>,
    theta: Option<f64>,
    potential: Option<String>,
    t_final: Option<f64>,
    dt_initial: Option<f64>,
    dt_min: Option<f64>,
    dt_max: Option<f64>,
    energy_guard: Option<bool>,
    dealias: Option<bool>,
    snapshot_interval: Option<u64>,
    diagnostics_interval: Option<u64>,
    output_dir: Option<String>,
    time_scheme: Option<String>,
    splitting_mobility: Option<f64>,
    positivity_study: Option<bool>,
    initial: Option<RawInitial>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    mean: Option<f64>,
    amplitude: Option<f64>,
    wavenumber: Option<u32>,
    seed: Option<u64>,
    cutoff: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    thetas: Option<Vec<f64>>,
    comparison_times: Option<Vec<f64>>,
}

/// Fully validated run configuration with all defaults resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub kappa: f64,
    pub epsilon: f64,
    pub gamma: Option<f64>,
    pub theta: f64,
    pub potential: String,
    pub t_final: f64,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub energy_guard: bool,
    pub dealias: bool,
    /// Snapshot every this many steps; 0 disables snapshots.
    pub snapshot_interval: u64,
    pub diagnostics_interval: u64,
    pub output_dir: String,
    pub time_scheme: TimeScheme,
    /// `None` resolves to `max(1, max u₀)` at run start.
    pub splitting_mobility: Option<f64>,
    pub positivity_study: bool,
    pub initial_kind: String,
    pub initial_mean: f64,
    pub initial_amplitude: f64,
    pub initial_wavenumber: u32,
    pub initial_cutoff: u32,
    pub seed: u64,
    pub sweep_thetas: Vec<f64>,
    pub sweep_comparison_times: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            n: 128,
            kappa: 1.0,
            epsilon: 0.2,
            gamma: None,
            theta: 0.05,
            potential: "quartic_example".into(),
            t_final: 1.0,
            dt_initial: 1e-3,
            dt_min: 1e-6,
            dt_max: 1e-2,
            energy_guard: true,
            dealias: true,
            snapshot_interval: 0,
            diagnostics_interval: 10,
            output_dir: "pfc_out".into(),
            time_scheme: TimeScheme::Imex1,
            splitting_mobility: None,
            positivity_study: false,
            initial_kind: "constant_plus_sine".into(),
            initial_mean: 1.0,
            initial_amplitude: 0.3,
            initial_wavenumber: 1,
            initial_cutoff: 8,
            seed: 0,
            sweep_thetas: DEFAULT_THETAS.to_vec(),
            sweep_comparison_times: Vec::new(),
        }
    }
}

/// Parse and validate a TOML run configuration. Unknown keys are rejected;
/// every violated invariant is reported with the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
        key: "<config>".into(),
        message: e.to_string(),
    })?;
    let mut cfg = RunConfig::default();
    if let Some(v) = raw.dim {
        cfg.dim = v;
    }
    if let Some(v) = raw.n {
        cfg.n = v;
    }
    if let Some(v) = raw.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = raw.epsilon {
        cfg.epsilon = v;
    }
    cfg.gamma = raw.gamma;
    if let Some(v) = raw.theta {
        cfg.theta = v;
    }
    if let Some(v) = raw.potential {
        cfg.potential = v;
    }
    if let Some(v) = raw.t_final {
        cfg.t_final = v;
    }
    if let Some(v) = raw.dt_initial {
        cfg.dt_initial = v;
    }
    if let Some(v) = raw.dt_min {
        cfg.dt_min = v;
    }
    if let Some(v) = raw.dt_max {
        cfg.dt_max = v;
    }
    if let Some(v) = raw.energy_guard {
        cfg.energy_guard = v;
    }
    if let Some(v) = raw.dealias {
        cfg.dealias = v;
    }
    if let Some(v) = raw.snapshot_interval {
        cfg.snapshot_interval = v;
    }
    if let Some(v) = raw.diagnostics_interval {
        cfg.diagnostics_interval = v;
    }
    if let Some(v) = raw.output_dir {
        cfg.output_dir = v;
    }
    if let Some(v) = raw.time_scheme {
        cfg.time_scheme = match v.as_str() {
            "imex1" => TimeScheme::Imex1,
            "imex2" => TimeScheme::Imex2,
            other => {
                return Err(Error::config(
                    "time_scheme",
                    format!("must be \"imex1\" or \"imex2\", got \"{other}\""),
                ))
            }
        };
    }
    cfg.splitting_mobility = raw.splitting_mobility;
    if let Some(v) = raw.positivity_study {
        cfg.positivity_study = v;
    }
    if let Some(init) = raw.initial {
        if let Some(v) = init.kind {
            cfg.initial_kind = v;
        }
        if let Some(v) = init.mean {
            cfg.initial_mean = v;
        }
        if let Some(v) = init.amplitude {
            cfg.initial_amplitude = v;
        }
        if let Some(v) = init.wavenumber {
            cfg.initial_wavenumber = v;
        }
        if let Some(v) = init.seed {
            cfg.seed = v;
        }
        if let Some(v) = init.cutoff {
            cfg.initial_cutoff = v;
        }
    }
    if let Some(sw) = raw.sweep {
        if let Some(v) = sw.thetas {
            cfg.sweep_thetas = v;
        }
        if let Some(v) = sw.comparison_times {
            cfg.sweep_comparison_times = v;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::config(
                "dim",
                format!("must be 1, 2 or 3, got {}", self.dim),
            ));
        }
        if !self.n.is_multiple_of(2) || !(8..=1024).contains(&self.n) {
            return Err(Error::config(
                "n",
                format!("must be even and in [8, 1024], got {}", self.n),
            ));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::config(
                "kappa",
                format!("must be positive, got {}", self.kappa),
            ));
        }
        match self.potential.as_str() {
            "quartic_example" | "derivation_form" | "linear_test" => {}
            other => {
                return Err(Error::config(
                    "potential",
                    format!(
                        "must be \"quartic_example\", \"derivation_form\" or \"linear_test\", got \"{other}\""
                    ),
                ))
            }
        }
        if self.potential == "quartic_example" && !(self.epsilon > 0.0 && self.epsilon < self.kappa)
        {
            return Err(Error::config(
                "epsilon",
                format!(
                    "epsilon must be < kappa and positive for the quartic potential \
                     (epsilon = {}, kappa = {})",
                    self.epsilon, self.kappa
                ),
            ));
        }
        if self.potential == "derivation_form" && self.gamma.is_none() {
            return Err(Error::config(
                "gamma",
                "required for potential = \"derivation_form\"",
            ));
        }
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(Error::config(
                "theta",
                "theta must be positive; use sweep for the degenerate limit",
            ));
        }
        if self.theta >= 1.0 {
            return Err(Error::config(
                "theta",
                format!("must lie in (0, 1), got {}", self.theta),
            ));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::config(
                "t_final",
                format!("must be nonnegative, got {}", self.t_final),
            ));
        }
        self.scheme_config().validate()?;
        if self.diagnostics_interval == 0 {
            return Err(Error::config("diagnostics_interval", "must be at least 1"));
        }
        match self.initial_kind.as_str() {
            "constant" | "constant_plus_sine" | "constant_plus_filtered_noise" => {}
            other => {
                return Err(Error::config(
                    "initial.kind",
                    format!(
                        "must be \"constant\", \"constant_plus_sine\" or \
                         \"constant_plus_filtered_noise\", got \"{other}\""
                    ),
                ))
            }
        }
        if !self.initial_mean.is_finite() || !self.initial_amplitude.is_finite() {
            return Err(Error::config(
                "initial",
                "mean and amplitude must be finite",
            ));
        }
        if self.initial_cutoff as usize > self.n / 2 {
            return Err(Error::config(
                "initial.cutoff",
                format!(
                    "cutoff {} exceeds the grid Nyquist {}",
                    self.initial_cutoff,
                    self.n / 2
                ),
            ));
        }
        self.potential_spec()?.validate(self.kappa)?;
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        Ok(match self.potential.as_str() {
            "quartic_example" => PotentialSpec::QuarticExample {
                epsilon: self.epsilon,
            },
            "derivation_form" => PotentialSpec::DerivationForm {
                gamma: self.gamma.ok_or_else(|| {
                    Error::config("gamma", "required for potential = \"derivation_form\"")
                })?,
                kappa: self.kappa,
                epsilon: self.epsilon,
            },
            "linear_test" => PotentialSpec::LinearTest,
            other => {
                return Err(Error::config(
                    "potential",
                    format!("unknown kind \"{other}\""),
                ))
            }
        })
    }

    pub fn initial_condition(&self) -> InitialCondition {
        match self.initial_kind.as_str() {
            "constant" => InitialCondition::Constant {
                mean: self.initial_mean,
            },
            "constant_plus_sine" => InitialCondition::ConstantPlusSine {
                mean: self.initial_mean,
                amplitude: self.initial_amplitude,
                wavenumber: self.initial_wavenumber,
            },
            _ => InitialCondition::ConstantPlusFilteredNoise {
                mean: self.initial_mean,
                amplitude: self.initial_amplitude,
                seed: self.seed,
                cutoff: self.initial_cutoff,
            },
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        SchemeConfig {
            splitting_mobility: self.splitting_mobility,
            dt_initial: self.dt_initial,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            energy_guard: self.energy_guard,
            t_final: self.t_final,
            time_scheme: self.time_scheme,
            dealias: self.dealias,
        }
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        let mut scheme = self.scheme_config();
        // Members need a fixed dt so sample steps coincide across θ.
        scheme.dt_min = scheme.dt_initial;
        scheme.dt_max = scheme.dt_initial;
        let comparison_times = if self.sweep_comparison_times.is_empty() {
            (1..=4).map(|i| self.t_final * i as f64 / 4.0).collect()
        } else {
            self.sweep_comparison_times.clone()
        };
        Ok(SweepPlan {
            thetas: self.sweep_thetas.clone(),
            scenario: SweepScenario {
                dim: self.dim,
                n: self.n,
                kappa: self.kappa,
                potential: self.potential_spec()?,
                initial: self.initial_condition(),
                scheme,
                diagnostics_interval: self.diagnostics_interval,
            },
            comparison_times,
        })
    }

    /// Canonical echo of the resolved configuration: fixed key order,
    /// shortest-roundtrip float formatting, deterministic byte-for-byte.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let push = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push(&mut s, "dim", self.dim.to_string());
        push(&mut s, "n", self.n.to_string());
        push(&mut s, "kappa", fmt_float(self.kappa));
        push(&mut s, "epsilon", fmt_float(self.epsilon));
        if let Some(g) = self.gamma {
            push(&mut s, "gamma", fmt_float(g));
        }
        push(&mut s, "theta", fmt_float(self.theta));
        push(&mut s, "potential", format!("\"{}\"", self.potential));
        push(&mut s, "t_final", fmt_float(self.t_final));
        push(&mut s, "dt_initial", fmt_float(self.dt_initial));
        push(&mut s, "dt_min", fmt_float(self.dt_min));
        push(&mut s, "dt_max", fmt_float(self.dt_max));
        push(&mut s, "energy_guard", self.energy_guard.to_string());
        push(&mut s, "dealias", self.dealias.to_string());
        push(
            &mut s,
            "snapshot_interval",
            self.snapshot_interval.to_string(),
        );
        push(
            &mut s,
            "diagnostics_interval",
            self.diagnostics_interval.to_string(),
        );
        push(&mut s, "output_dir", format!("\"{}\"", self.output_dir));
        let scheme = match self.time_scheme {
            TimeScheme::Imex1 => "imex1",
            TimeScheme::Imex2 => "imex2",
        };
        push(&mut s, "time_scheme", format!("\"{scheme}\""));
        if let Some(m) = self.splitting_mobility {
            push(&mut s, "splitting_mobility", fmt_float(m));
        }
        push(
            &mut s,
            "positivity_study",
            self.positivity_study.to_string(),
        );
        s.push_str("\n[initial]\n");
        push(&mut s, "kind", format!("\"{}\"", self.initial_kind));
        push(&mut s, "mean", fmt_float(self.initial_mean));
        push(&mut s, "amplitude", fmt_float(self.initial_amplitude));
        push(&mut s, "wavenumber", self.initial_wavenumber.to_string());
        push(&mut s, "seed", self.seed.to_string());
        push(&mut s, "cutoff", self.initial_cutoff.to_string());
        s.push_str("\n[sweep]\n");
        let thetas: Vec<String> = self.sweep_thetas.iter().map(|t| fmt_float(*t)).collect();
        push(&mut s, "thetas", format!("[{}]", thetas.join(", ")));
        let times: Vec<String> = self
            .sweep_comparison_times
            .iter()
            .map(|t| fmt_float(*t))
            .collect();
        push(
            &mut s,
            "comparison_times",
            format!("[{}]", times.join(", ")),
        );
        s
    }
}

fn fmt_float(v: f64) -> String {
    // Shortest decimal that round-trips; force a float-looking literal.
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("nan") {
        s
    } else {
        format!("{s}.0")
    }
}

/// 17-significant-digit scientific formatting used in every CSV: lossless
/// for IEEE-754 binary64.
pub fn fmt_csv_float(v: f64) -> String {
    format!("{v:.16e}")
}
