//! The experiment runner behind the `qlab` binary: one named experiment per
//! tag, config-driven, seed-reproducible, emitting a primary CSV plus a JSON
//! sidecar with the fully resolved parameters.
//!
//! The determinism contract: identical config and seed produce a
//! byte-identical CSV. The sidecar repeats the resolved inputs and adds
//! provenance (library version, wall-clock duration); the duration field is
//! the one thing excluded from the contract.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::born::{
    empirical_vs_born, reconstruct_frequencies_with, MomentConvention, MomentSystem,
};
use crate::entangle::{
    chsh_optimal_settings, chsh_value, ghz_incompatibility_demo, ghz_run, ghz_state,
    hv_baseline_analytic, hv_baseline_correlation, hv_chsh_analytic, sigma_correlation,
    sigma_correlation_mc, spin_correlation, DetectorSetting, MerminOperator,
};
use crate::error::{Error, Result};
use crate::measure::{decohere, sample_decay_time, MetastableSpec};
use crate::numfmt::f64_repr;
use crate::observables::{Axis, SpinSystem};
use crate::rng::CounterRng;
use crate::states::{expectation, to_density, PureState};
use crate::wavepacket::{double_slit, scatter_barrier, BarrierSpec, Grid1D, Histogram};

/// One catalog entry: the tag the CLI dispatches on, a one-line summary,
/// and a pointer into the README's numbered documentation sections.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentInfo {
    pub tag: &'static str,
    pub summary: &'static str,
    pub reference: &'static str,
}

/// Every runnable experiment.
pub fn catalog() -> &'static [ExperimentInfo] {
    &[
        ExperimentInfo {
            tag: "spin-frequencies",
            summary: "projector vs moment-reconstructed outcome frequencies for a spin component",
            reference: "docs §1",
        },
        ExperimentInfo {
            tag: "born-reconstruct",
            summary: "moment reconstruction, Born weights, and sampled frequencies side by side",
            reference: "docs §2",
        },
        ExperimentInfo {
            tag: "decoherence",
            summary: "pointer-basis decoherence of a pure state: weights, purity drop, preserved average",
            reference: "docs §3",
        },
        ExperimentInfo {
            tag: "epr-correlation",
            summary: "singlet spin-spin correlation across analyzer angles, analytic and sampled",
            reference: "docs §4",
        },
        ExperimentInfo {
            tag: "chsh-sweep",
            summary: "CHSH combination across analyzer angles for the singlet and the local baseline",
            reference: "docs §4",
        },
        ExperimentInfo {
            tag: "hv-baseline",
            summary: "shared-unit-vector local model vs the quantum correlation",
            reference: "docs §4",
        },
        ExperimentInfo {
            tag: "ghz-mermin",
            summary: "three-spin parity runs: every triple satisfies its operator's product rule",
            reference: "docs §4",
        },
        ExperimentInfo {
            tag: "barrier",
            summary: "wave packet against a square barrier: transmission, reflection, overlap",
            reference: "docs §5",
        },
        ExperimentInfo {
            tag: "double-slit",
            summary: "two-path interference build-up: screen density and sampled arrivals",
            reference: "docs §5",
        },
        ExperimentInfo {
            tag: "decay-times",
            summary: "exponential decay-time draws from a metastable level",
            reference: "docs §6",
        },
    ]
}

pub fn find_experiment(tag: &str) -> Result<&'static ExperimentInfo> {
    catalog()
        .iter()
        .find(|e| e.tag == tag)
        .ok_or_else(|| Error::UnknownExperiment { tag: tag.into() })
}

/// Fully parsed run request. `shots` and `output_path` stay optional here;
/// each experiment applies its own defaults and the resolved values land in
/// the sidecar.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub shots: Option<u64>,
    pub params: BTreeMap<String, Value>,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            seed: 1,
            shots: None,
            params: BTreeMap::new(),
            output_path: None,
        }
    }

    /// Loads the flat JSON config file and lays the explicit overrides on
    /// top (flags win).
    pub fn with_file(mut self, path: &Path, overrides: &ConfigOverrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Config {
            message: format!("{} is not valid JSON: {e}", path.display()),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Config {
            message: format!("{} must hold a JSON object", path.display()),
        })?;
        for (key, val) in obj {
            match key.as_str() {
                "experiment" => {
                    let tag = val.as_str().ok_or_else(|| Error::Config {
                        message: "config field 'experiment' must be a string".into(),
                    })?;
                    if tag != self.experiment {
                        return Err(Error::Config {
                            message: format!(
                                "config is for experiment '{tag}' but '{}' was requested",
                                self.experiment
                            ),
                        });
                    }
                }
                "seed" => {
                    self.seed = val.as_u64().ok_or_else(|| Error::Config {
                        message: "config field 'seed' must be a nonnegative integer".into(),
                    })?;
                }
                "shots" => {
                    self.shots = Some(val.as_u64().ok_or_else(|| Error::Config {
                        message: "config field 'shots' must be a positive integer".into(),
                    })?);
                }
                "output" => {
                    let out = val.as_str().ok_or_else(|| Error::Config {
                        message: "config field 'output' must be a path string".into(),
                    })?;
                    self.output_path = Some(PathBuf::from(out));
                }
                "params" => {
                    let map = val.as_object().ok_or_else(|| Error::Config {
                        message: "config field 'params' must be an object".into(),
                    })?;
                    for (k, v) in map {
                        self.params.insert(k.clone(), v.clone());
                    }
                }
                other => {
                    return Err(Error::Config {
                        message: format!("unknown config field '{other}'"),
                    });
                }
            }
        }
        overrides.apply(&mut self);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        find_experiment(&self.experiment)?;
        if let Some(0) = self.shots {
            return Err(Error::Config {
                message: "shots must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn param_value(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    /// Numeric parameter; accepts JSON numbers and strings, including
    /// half-integer fractions like `"3/2"`.
    pub fn f64_param(&self, key: &str, default: f64) -> Result<f64> {
        match self.param_value(key) {
            None => Ok(default),
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| Error::Config {
                message: format!("parameter '{key}' is out of range"),
            }),
            Some(Value::String(s)) => parse_fraction(s).ok_or_else(|| Error::Config {
                message: format!("parameter '{key}' = '{s}' is not a number"),
            }),
            Some(other) => Err(Error::Config {
                message: format!("parameter '{key}' has unsupported type: {other}"),
            }),
        }
    }

    pub fn u64_param(&self, key: &str, default: u64) -> Result<u64> {
        let v = self.f64_param(key, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
            return Err(Error::Config {
                message: format!("parameter '{key}' = {v} must be a nonnegative integer"),
            });
        }
        Ok(v as u64)
    }

    pub fn usize_param(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_param(key, default as u64)? as usize)
    }

    pub fn str_param(&self, key: &str, default: &str) -> Result<String> {
        match self.param_value(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(other) => Err(Error::Config {
                message: format!("parameter '{key}' must be a string, got {other}"),
            }),
        }
    }

    pub fn shots_or(&self, default: u64) -> u64 {
        self.shots.unwrap_or(default)
    }

    pub fn output_or(&self, default: &str) -> PathBuf {
        self.output_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(default))
    }
}

/// CLI flag overrides, applied after any config file so flags win.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub output: Option<PathBuf>,
    pub params: Vec<(String, String)>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(shots) = self.shots {
            cfg.shots = Some(shots);
        }
        if let Some(out) = &self.output {
            cfg.output_path = Some(out.clone());
        }
        for (k, v) in &self.params {
            cfg.params.insert(k.clone(), Value::String(v.clone()));
        }
    }
}

/// `"3/2"` and `"-1/2"` style fractions, or any plain float.
pub fn parse_fraction(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().ok()?;
        let d: f64 = den.trim().parse().ok()?;
        if d == 0.0 {
            return None;
        }
        return Some(n / d);
    }
    s.trim().parse().ok()
}

/// Where the run landed.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub csv_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub rows: usize,
}

struct RunOutput {
    header: &'static str,
    rows: Vec<String>,
    default_output: &'static str,
    resolved: Map<String, Value>,
    extras: Map<String, Value>,
}

/// Runs the configured experiment, writing the primary CSV and a JSON
/// sidecar next to it.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let output = match cfg.experiment.as_str() {
        "spin-frequencies" => run_spin_frequencies(cfg)?,
        "born-reconstruct" => run_born_reconstruct(cfg)?,
        "decoherence" => run_decoherence(cfg)?,
        "epr-correlation" => run_epr_correlation(cfg)?,
        "chsh-sweep" => run_chsh_sweep(cfg)?,
        "hv-baseline" => run_hv_baseline(cfg)?,
        "ghz-mermin" => run_ghz_mermin(cfg)?,
        "barrier" => run_barrier(cfg)?,
        "double-slit" => run_double_slit(cfg)?,
        "decay-times" => run_decay_times(cfg)?,
        tag => return Err(Error::UnknownExperiment { tag: tag.into() }),
    };

    let csv_path = cfg.output_or(output.default_output);
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut csv = String::with_capacity(output.rows.len() * 64 + 64);
    csv.push_str(output.header);
    csv.push('\n');
    for row in &output.rows {
        csv.push_str(row);
        csv.push('\n');
    }
    fs::write(&csv_path, csv.as_bytes())?;

    let sidecar_path = csv_path.with_extension("json");
    let sidecar = json!({
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "params": Value::Object(output.resolved.clone()),
        "output": csv_path.display().to_string(),
        "rows": output.rows.len(),
        "library_version": env!("CARGO_PKG_VERSION"),
        "duration_seconds": start.elapsed().as_secs_f64(),
        "results": Value::Object(output.extras.clone()),
    });
    fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;

    Ok(RunSummary {
        csv_path,
        sidecar_path,
        rows: output.rows.len(),
    })
}

fn spin_setup(
    cfg: &ExperimentConfig,
) -> Result<(SpinSystem, Axis, PureState, Map<String, Value>)> {
    let j = cfg.f64_param("j", 1.5)?;
    let axis_name = cfg.str_param("axis", "x")?;
    let axis = Axis::parse(&axis_name).map_err(|e| Error::Config {
        message: e.to_string(),
    })?;
    let spin = crate::observables::make_spin(j).map_err(|e| Error::Config {
        message: e.to_string(),
    })?;
    let state_spec = cfg.str_param("state", "highest-weight")?;
    let psi = parse_state(&state_spec, &spin)?;
    let mut resolved = Map::new();
    resolved.insert("j".into(), json!(j));
    resolved.insert("axis".into(), json!(axis_name));
    resolved.insert("state".into(), json!(state_spec));
    Ok((spin, axis, psi, resolved))
}

fn parse_state(spec: &str, spin: &SpinSystem) -> Result<PureState> {
    if spec == "highest-weight" {
        return Ok(spin.highest_weight());
    }
    if let Some(m_text) = spec.strip_prefix("m=") {
        let m = parse_fraction(m_text).ok_or_else(|| Error::Config {
            message: format!("cannot parse magnetic quantum number '{m_text}'"),
        })?;
        return spin.basis_state(m).map_err(|e| Error::Config {
            message: e.to_string(),
        });
    }
    if spec.trim_start().starts_with('[') {
        let psi = PureState::from_amplitude_json(spec).map_err(|e| Error::Config {
            message: format!("bad amplitude JSON: {e}"),
        })?;
        if psi.dim() != spin.dim() {
            return Err(Error::Config {
                message: format!(
                    "state has dimension {} but the spin system needs {}",
                    psi.dim(),
                    spin.dim()
                ),
            });
        }
        return Ok(psi);
    }
    Err(Error::Config {
        message: format!(
            "unknown state '{spec}'; use 'highest-weight', 'm=<value>', or an amplitude JSON array"
        ),
    })
}

fn run_spin_frequencies(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (spin, axis, psi, resolved) = spin_setup(cfg)?;
    let obs = spin.component(axis);
    let direct = obs.frequencies(&psi)?;
    let sys = MomentSystem::from_state(&psi, obs)?;
    let table = reconstruct_frequencies_with(&sys, MomentConvention::Classical)?;
    let rows = obs
        .spectrum()
        .iter()
        .zip(direct.iter().zip(table.frequencies()))
        .map(|(&f, (&p, &m))| format!("{},{},{}", f64_repr(f), f64_repr(p), f64_repr(m)))
        .collect();
    Ok(RunOutput {
        header: "outcome,projector_frequency,moment_frequency",
        rows,
        default_output: "spin-frequencies.csv",
        resolved,
        extras: Map::new(),
    })
}

fn run_born_reconstruct(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (spin, axis, psi, mut resolved) = spin_setup(cfg)?;
    let shots = cfg.shots_or(100_000);
    let mode_name = cfg.str_param("mode", "classical")?;
    let convention = match mode_name.as_str() {
        "classical" => MomentConvention::Classical,
        "powers-from-1" => MomentConvention::PowersFrom1,
        other => {
            return Err(Error::Config {
                message: format!("unknown mode '{other}'; use 'classical' or 'powers-from-1'"),
            })
        }
    };
    resolved.insert("mode".into(), json!(mode_name));
    resolved.insert("shots".into(), json!(shots));

    let obs = spin.component(axis);
    let sys = MomentSystem::from_state(&psi, obs)?;
    let table = reconstruct_frequencies_with(&sys, convention)?;
    let report = empirical_vs_born(&psi, obs, shots, cfg.seed)?;
    let rows = report
        .rows
        .iter()
        .zip(table.frequencies())
        .map(|(r, &m)| {
            format!(
                "{},{},{},{},{},{}",
                f64_repr(r.outcome),
                f64_repr(r.theoretical),
                f64_repr(m),
                f64_repr(r.empirical),
                f64_repr(r.stderr),
                f64_repr(r.z_score)
            )
        })
        .collect();
    let mut extras = Map::new();
    extras.insert("max_abs_z".into(), json!(report.max_abs_z()));
    Ok(RunOutput {
        header: "outcome,theoretical,moment_reconstructed,empirical,stderr,z_score",
        rows,
        default_output: "born-reconstruct.csv",
        resolved,
        extras,
    })
}

fn run_decoherence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (spin, axis, psi, resolved) = spin_setup(cfg)?;
    let obs = spin.component(axis);
    let rho = to_density(&psi);
    let pointer = obs.eigen();
    let decohered = decohere(&rho, pointer)?;

    let fbar_before = expectation(&rho, obs.matrix())?;
    let dim = rho.dim();
    let pointer_diag = crate::hilbert::ComplexMatrix::from_fn(dim, dim, |i, k| {
        if i == k {
            Complex64::new(pointer.eigenvalues[i], 0.0)
        } else {
            Complex64::ZERO
        }
    });
    let fbar_after = expectation(&decohered, &pointer_diag)?;

    let rows = pointer
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            format!(
                "{},{},{}",
                i,
                f64_repr(f),
                f64_repr(decohered.matrix()[(i, i)].re)
            )
        })
        .collect();
    let mut extras = Map::new();
    extras.insert("purity_before".into(), json!(rho.purity()));
    extras.insert("purity_after".into(), json!(decohered.purity()));
    extras.insert("pointer_average_before".into(), json!(fbar_before));
    extras.insert("pointer_average_after".into(), json!(fbar_after));
    Ok(RunOutput {
        header: "index,outcome,weight",
        rows,
        default_output: "decoherence.csv",
        resolved,
        extras,
    })
}

fn run_epr_correlation(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n_angles = cfg.usize_param("n_angles", 13)?.max(2);
    let shots = cfg.shots_or(20_000);
    let mut resolved = Map::new();
    resolved.insert("n_angles".into(), json!(n_angles));
    resolved.insert("shots".into(), json!(shots));

    let a = DetectorSetting::in_plane(0.0);
    let mut rng = CounterRng::new(cfg.seed);
    let mut rows = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let theta = std::f64::consts::PI * k as f64 / (n_angles - 1) as f64;
        let b = DetectorSetting::in_plane(theta);
        let spin_corr = spin_correlation(&a, &b);
        let sigma_corr = sigma_correlation(&a, &b);
        let (mc, stderr) = sigma_correlation_mc(&a, &b, shots, &mut rng)?;
        let z = if stderr > 0.0 {
            (mc - sigma_corr) / stderr
        } else {
            0.0
        };
        rows.push(format!(
            "{},{},{},{},{},{}",
            f64_repr(theta),
            f64_repr(spin_corr),
            f64_repr(sigma_corr),
            f64_repr(mc),
            f64_repr(stderr),
            f64_repr(z)
        ));
    }
    Ok(RunOutput {
        header: "theta,corr_spin_analytic,corr_sigma_analytic,corr_sigma_mc,stderr,z_score",
        rows,
        default_output: "epr-correlation.csv",
        resolved,
        extras: Map::new(),
    })
}

fn run_chsh_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n_angles = cfg.usize_param("n_angles", 25)?.max(2);
    let mut resolved = Map::new();
    resolved.insert("n_angles".into(), json!(n_angles));

    let mut rows = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let theta = std::f64::consts::PI * k as f64 / (n_angles - 1) as f64;
        let a = DetectorSetting::in_plane(0.0);
        let a_p = DetectorSetting::in_plane(std::f64::consts::FRAC_PI_2);
        let b = DetectorSetting::in_plane(theta);
        let b_p = DetectorSetting::in_plane(theta + std::f64::consts::FRAC_PI_2);
        let e_qm = sigma_correlation(&a, &b);
        let e_hv = hv_baseline_analytic(&a, &b);
        let s_qm = chsh_value(&a, &a_p, &b, &b_p);
        let s_hv = hv_chsh_analytic(&a, &a_p, &b, &b_p);
        rows.push(format!(
            "{},{},{},{},{},{},{},{}",
            f64_repr(theta),
            f64_repr(0.0),
            f64_repr(std::f64::consts::FRAC_PI_2),
            f64_repr(theta + std::f64::consts::FRAC_PI_2),
            f64_repr(e_qm),
            f64_repr(e_hv),
            f64_repr(s_qm),
            f64_repr(s_hv)
        ));
    }
    let [a, ap, b, bp] = chsh_optimal_settings();
    let mut extras = Map::new();
    extras.insert("s_qm_optimal".into(), json!(chsh_value(&a, &ap, &b, &bp)));
    extras.insert(
        "s_hv_optimal".into(),
        json!(hv_chsh_analytic(&a, &ap, &b, &bp)),
    );
    Ok(RunOutput {
        header: "theta_b,theta_a,theta_a_prime,theta_b_prime,e_qm,e_hv,s_qm,s_hv",
        rows,
        default_output: "chsh-sweep.csv",
        resolved,
        extras,
    })
}

fn run_hv_baseline(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n_angles = cfg.usize_param("n_angles", 13)?.max(2);
    let shots = cfg.shots_or(50_000);
    let mut resolved = Map::new();
    resolved.insert("n_angles".into(), json!(n_angles));
    resolved.insert("shots".into(), json!(shots));

    let a = DetectorSetting::in_plane(0.0);
    let mut rng = CounterRng::new(cfg.seed);
    let mut rows = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let theta = std::f64::consts::PI * k as f64 / (n_angles - 1) as f64;
        let b = DetectorSetting::in_plane(theta);
        let e_qm = sigma_correlation(&a, &b);
        let analytic = hv_baseline_analytic(&a, &b);
        let mc = hv_baseline_correlation(&a, &b, shots, &mut rng)?;
        let stderr = ((1.0 - analytic * analytic).max(0.0) / shots as f64)
            .sqrt()
            .max(1.0 / shots as f64);
        rows.push(format!(
            "{},{},{},{},{}",
            f64_repr(theta),
            f64_repr(e_qm),
            f64_repr(analytic),
            f64_repr(mc),
            f64_repr(stderr)
        ));
    }
    Ok(RunOutput {
        header: "theta,e_qm,e_hv_analytic,e_hv_mc,stderr",
        rows,
        default_output: "hv-baseline.csv",
        resolved,
        extras: Map::new(),
    })
}

fn run_ghz_mermin(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let runs_per_operator = cfg.shots_or(4_000);
    let mut resolved = Map::new();
    resolved.insert("runs_per_operator".into(), json!(runs_per_operator));

    let mut rng = CounterRng::new(cfg.seed);
    let mut rows = Vec::with_capacity(runs_per_operator as usize * 4);
    for which in MerminOperator::ALL {
        for _ in 0..runs_per_operator {
            let run = ghz_run(which, &mut rng);
            rows.push(format!(
                "{},{},{},{},{},{}",
                run.event_counter,
                which.label(),
                run.m1,
                run.m2,
                run.m3,
                run.product()
            ));
        }
    }

    // eigenrelation residuals of the four parity operators on the state
    let psi = ghz_state();
    let mut extras = Map::new();
    for which in MerminOperator::ALL {
        let mv = which.matrix().apply(psi.amplitudes())?;
        let sign = which.expected_product() as f64;
        let residual = mv
            .iter()
            .zip(psi.amplitudes())
            .map(|(got, want)| (got - want * sign).norm())
            .fold(0.0, f64::max);
        extras.insert(
            format!("eigenrelation_residual_{}", which.label()),
            json!(residual),
        );
    }
    let report = ghz_incompatibility_demo()?;
    extras.insert(
        "classical_assignments".into(),
        json!(report.classical_assignments),
    );
    extras.insert(
        "single_site_commutator_norm".into(),
        json!(report.single_site_commutator_norm),
    );
    Ok(RunOutput {
        header: "event_counter,operator,m1,m2,m3,product",
        rows,
        default_output: "ghz-mermin.csv",
        resolved,
        extras,
    })
}

fn run_barrier(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let v0 = cfg.f64_param("v0", 2.0)?;
    let width = cfg.f64_param("width", 1.0)?;
    let energy = cfg.f64_param("energy", 1.0)?;
    if !(energy > 0.0) {
        return Err(Error::Config {
            message: format!("energy {energy} must be positive"),
        });
    }
    let k0 = (2.0 * energy).sqrt();
    let sigma = cfg.f64_param("sigma", 8.0)?;
    let center = cfg.f64_param("center", -50.0)?;
    let half_extent = cfg.f64_param("half_extent", 160.0)?;
    let n_points = cfg.usize_param("n_points", 4096)?;
    let t_total = cfg.f64_param("t_total", 75.0)?;

    let grid = Grid1D::with_default_step(-half_extent, half_extent, n_points)?;
    let barrier = BarrierSpec::new(v0, width, 0.0)?;
    let result = scatter_barrier(&grid, center, k0, sigma, &barrier, t_total)?;

    let mut resolved = Map::new();
    for (k, v) in [
        ("v0", v0),
        ("width", width),
        ("energy", energy),
        ("k0", k0),
        ("sigma", sigma),
        ("center", center),
        ("half_extent", half_extent),
        ("t_total", t_total),
    ] {
        resolved.insert(k.into(), json!(v));
    }
    resolved.insert("n_points".into(), json!(n_points));

    let rows = vec![format!(
        "{},{},{},{},{},{},{},{}",
        f64_repr(v0),
        f64_repr(width),
        f64_repr(energy),
        f64_repr(sigma),
        f64_repr(result.transmission),
        f64_repr(result.reflection),
        f64_repr(result.interior),
        f64_repr(result.overlap)
    )];
    let mut extras = Map::new();
    extras.insert("transmission".into(), json!(result.transmission));
    extras.insert("reflection".into(), json!(result.reflection));
    extras.insert(
        "d_plus_r".into(),
        json!(result.transmission + result.reflection),
    );
    Ok(RunOutput {
        header: "v0,width,energy,sigma,transmission,reflection,interior,overlap",
        rows,
        default_output: "barrier.csv",
        resolved,
        extras,
    })
}

fn run_double_slit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let separation = cfg.f64_param("separation", 60.0)?;
    let sigma = cfg.f64_param("sigma", 2.0)?;
    let screen_time = cfg.f64_param("screen_time", 120.0)?;
    let half_extent = cfg.f64_param("half_extent", 160.0)?;
    let n_points = cfg.usize_param("n_points", 4096)?;
    let bins = cfg.usize_param("bins", 160)?;
    let shots = cfg.shots_or(70_000);
    let inv_sqrt2 = 0.5_f64.sqrt();
    let a1 = Complex64::new(
        cfg.f64_param("amp1_re", inv_sqrt2)?,
        cfg.f64_param("amp1_im", 0.0)?,
    );
    let a2 = Complex64::new(
        cfg.f64_param("amp2_re", inv_sqrt2)?,
        cfg.f64_param("amp2_im", 0.0)?,
    );
    if (a1.norm_sqr() + a2.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::Config {
            message: format!(
                "|amp1|^2 + |amp2|^2 = {} must be 1",
                a1.norm_sqr() + a2.norm_sqr()
            ),
        });
    }

    let grid = Grid1D::with_default_step(-half_extent, half_extent, n_points)?;
    let mut rng = CounterRng::new(cfg.seed);
    let result = double_slit(
        a1,
        a2,
        separation,
        sigma,
        &grid,
        screen_time,
        shots,
        &mut rng,
    )?;
    let hist = Histogram::from_samples(&result.arrivals, -half_extent, half_extent, bins)?;

    // bin-averaged screen density next to the arrival counts
    let density = result.screen.density();
    let centers = hist.centers();
    let width = hist.bin_width();
    let mut masses = vec![0.0; bins];
    for (i, &d) in density.iter().enumerate() {
        let xi = grid.x(i);
        if xi < hist.lo || xi >= hist.hi {
            continue;
        }
        let b = ((xi - hist.lo) / width) as usize;
        masses[b.min(bins - 1)] += d * grid.dx();
    }
    let rows = hist
        .counts
        .iter()
        .zip(centers.iter().zip(&masses))
        .map(|(&count, (&x, &mass))| {
            format!("{},{},{}", f64_repr(x), f64_repr(mass / width), count)
        })
        .collect();

    let mut resolved = Map::new();
    for (k, v) in [
        ("separation", separation),
        ("sigma", sigma),
        ("screen_time", screen_time),
        ("half_extent", half_extent),
        ("amp1_re", a1.re),
        ("amp1_im", a1.im),
        ("amp2_re", a2.re),
        ("amp2_im", a2.im),
    ] {
        resolved.insert(k.into(), json!(v));
    }
    resolved.insert("n_points".into(), json!(n_points));
    resolved.insert("bins".into(), json!(bins));
    resolved.insert("shots".into(), json!(shots));

    let mut extras = Map::new();
    extras.insert(
        "predicted_fringe_spacing".into(),
        json!(result.predicted_fringe_spacing),
    );
    if let Some(measured) = result.measured_fringe_spacing(40.0) {
        extras.insert("measured_fringe_spacing".into(), json!(measured));
    }
    Ok(RunOutput {
        header: "x,density,counts",
        rows,
        default_output: "double-slit.csv",
        resolved,
        extras,
    })
}

fn run_decay_times(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let gamma = cfg.f64_param("gamma", 1.0)?;
    let e_r = cfg.f64_param("e_r", 0.0)?;
    let shots = cfg.shots_or(100_000);
    let spec = MetastableSpec::new(gamma, e_r).map_err(|e| Error::Config {
        message: e.to_string(),
    })?;

    let mut rng = CounterRng::new(cfg.seed);
    let mut rows = Vec::with_capacity(shots as usize);
    let mut sum = 0.0;
    let mut past_tau = 0u64;
    for _ in 0..shots {
        let counter = rng.counter();
        let t = sample_decay_time(&spec, &mut rng);
        sum += t;
        if t > spec.lifetime() {
            past_tau += 1;
        }
        rows.push(format!("{},{}", counter, f64_repr(t)));
    }

    let mut resolved = Map::new();
    resolved.insert("gamma".into(), json!(gamma));
    resolved.insert("e_r".into(), json!(e_r));
    resolved.insert("shots".into(), json!(shots));
    let mut extras = Map::new();
    extras.insert("mean_time".into(), json!(sum / shots as f64));
    extras.insert("lifetime".into(), json!(spec.lifetime()));
    extras.insert(
        "survival_past_lifetime".into(),
        json!(past_tau as f64 / shots as f64),
    );
    Ok(RunOutput {
        header: "event_counter,time",
        rows,
        default_output: "decay-times.csv",
        resolved,
        extras,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn cfg_with_out(tag: &str, dir: &TempDir) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(tag);
        cfg.output_path = Some(dir.path().join(format!("{tag}.csv")));
        cfg
    }

    #[test]
    fn catalog_contains_every_contracted_tag() {
        let tags: Vec<&str> = catalog().iter().map(|e| e.tag).collect();
        for want in [
            "spin-frequencies",
            "born-reconstruct",
            "decoherence",
            "epr-correlation",
            "chsh-sweep",
            "hv-baseline",
            "ghz-mermin",
            "barrier",
            "double-slit",
            "decay-times",
        ] {
            assert!(tags.contains(&want), "missing {want}");
        }
        for entry in catalog() {
            assert!(entry.reference.contains('§'), "{} lacks a § pointer", entry.tag);
            assert!(!entry.summary.is_empty());
        }
    }

    #[test]
    fn unknown_tag_is_a_usage_error() {
        let err = run(&ExperimentConfig::new("no-such-thing")).unwrap_err();
        assert!(matches!(err, Error::UnknownExperiment { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn spin_frequencies_reproduce_the_octave_weights() {
        let dir = TempDir::new().unwrap();
        let summary = run(&cfg_with_out("spin-frequencies", &dir)).unwrap();
        let text = fs::read_to_string(&summary.csv_path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "outcome,projector_frequency,moment_frequency"
        );
        let freqs: Vec<f64> = lines
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        let expect = [0.125, 0.375, 0.375, 0.125];
        for (got, want) in freqs.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_seed_and_config_give_byte_identical_csv() {
        let dir = TempDir::new().unwrap();
        let mut cfg = ExperimentConfig::new("born-reconstruct");
        cfg.seed = 42;
        cfg.shots = Some(5_000);
        cfg.output_path = Some(dir.path().join("a.csv"));
        run(&cfg).unwrap();
        let first = fs::read(dir.path().join("a.csv")).unwrap();
        cfg.output_path = Some(dir.path().join("b.csv"));
        run(&cfg).unwrap();
        let second = fs::read(dir.path().join("b.csv")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn different_seeds_change_sampled_output() {
        let dir = TempDir::new().unwrap();
        let mut cfg = ExperimentConfig::new("decay-times");
        cfg.shots = Some(50);
        cfg.seed = 1;
        cfg.output_path = Some(dir.path().join("a.csv"));
        run(&cfg).unwrap();
        cfg.seed = 2;
        cfg.output_path = Some(dir.path().join("b.csv"));
        run(&cfg).unwrap();
        assert_ne!(
            fs::read(dir.path().join("a.csv")).unwrap(),
            fs::read(dir.path().join("b.csv")).unwrap()
        );
    }

    #[test]
    fn sidecar_carries_resolved_params_and_version() {
        let dir = TempDir::new().unwrap();
        let mut cfg = cfg_with_out("decay-times", &dir);
        cfg.shots = Some(100);
        let summary = run(&cfg).unwrap();
        let sidecar: Value =
            serde_json::from_str(&fs::read_to_string(&summary.sidecar_path).unwrap()).unwrap();
        assert_eq!(sidecar["experiment"], "decay-times");
        assert_eq!(sidecar["params"]["shots"], 100);
        assert_eq!(sidecar["params"]["gamma"], 1.0);
        assert_eq!(sidecar["library_version"], env!("CARGO_PKG_VERSION"));
        assert!(sidecar["duration_seconds"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn config_file_merges_and_flags_win() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(
            &path,
            r#"{"experiment": "decay-times", "seed": 7, "shots": 123, "params": {"gamma": 2.0}}"#,
        )
        .unwrap();
        let overrides = ConfigOverrides {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = ExperimentConfig::new("decay-times")
            .with_file(&path, &overrides)
            .unwrap();
        assert_eq!(cfg.seed, 9); // flag wins
        assert_eq!(cfg.shots, Some(123));
        assert_eq!(cfg.f64_param("gamma", 1.0).unwrap(), 2.0);
    }

    #[test]
    fn config_file_for_wrong_experiment_is_rejected() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"experiment": "barrier"}"#).unwrap();
        let err = ExperimentConfig::new("decay-times")
            .with_file(&path, &ConfigOverrides::default())
            .unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"sheed": 7}"#).unwrap();
        assert!(ExperimentConfig::new("decay-times")
            .with_file(&path, &ConfigOverrides::default())
            .is_err());
    }

    #[test]
    fn fraction_params_parse() {
        assert_eq!(parse_fraction("3/2"), Some(1.5));
        assert_eq!(parse_fraction("-1/2"), Some(-0.5));
        assert_eq!(parse_fraction("2.5"), Some(2.5));
        assert_eq!(parse_fraction("1/0"), None);
        assert_eq!(parse_fraction("x"), None);
    }

    #[test]
    fn amplitude_json_state_param_is_accepted() {
        let dir = TempDir::new().unwrap();
        let mut cfg = cfg_with_out("decoherence", &dir);
        cfg.params.insert("j".into(), json!("1/2"));
        let s = 0.5_f64.sqrt();
        cfg.params
            .insert("state".into(), json!(format!("[[{s},0.0],[{s},0.0]]")));
        let summary = run(&cfg).unwrap();
        let text = fs::read_to_string(&summary.csv_path).unwrap();
        // the plus state is an eigenstate of the x pointer: all weight on +1/2
        let weights: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((weights[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ghz_rows_satisfy_parity_in_the_csv() {
        let dir = TempDir::new().unwrap();
        let mut cfg = cfg_with_out("ghz-mermin", &dir);
        cfg.shots = Some(50);
        let summary = run(&cfg).unwrap();
        let text = fs::read_to_string(&summary.csv_path).unwrap();
        assert_eq!(summary.rows, 200);
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let product: i64 = fields[5].parse().unwrap();
            let expect = if fields[1] == "M4" { -1 } else { 1 };
            assert_eq!(product, expect, "{line}");
        }
    }

    #[test]
    fn barrier_row_balances_transmission_and_reflection() {
        let dir = TempDir::new().unwrap();
        let summary = run(&cfg_with_out("barrier", &dir)).unwrap();
        let text = fs::read_to_string(&summary.csv_path).unwrap();
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let (d, r) = (fields[4], fields[5]);
        assert!((d + r - 1.0).abs() < 1e-4, "d + r = {}", d + r);
    }

    #[test]
    fn bad_param_type_is_a_config_error() {
        let mut cfg = ExperimentConfig::new("decay-times");
        cfg.params.insert("gamma".into(), json!("not-a-number"));
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
