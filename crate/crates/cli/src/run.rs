//! Experiment orchestration and file output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use quench_thermo::ensemble::{entropy, mean_energy};
use quench_thermo::io::csv_table;
use quench_thermo::jarzynski::{
    build_profile, profile_from_distributions, FreeEnergyProfile, LatticeModel, OscillatorModel,
};
use quench_thermo::lattice::{
    evolve_center_of_mass, lattice_temperature, time_average_distribution, EnsembleOptions,
    EvolutionSettings,
};
use quench_thermo::oscillator::{compare_with_boson, poisson_ensemble, temperature_closed_form};
use quench_thermo::{Error, Exec, Lattice};

use crate::config::{Experiment, RunConfig, Violation};

const WORK_BINS: usize = 60;

#[derive(Debug)]
pub enum CliError {
    Validation(Vec<Violation>),
    Convergence(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Convergence(_) => 3,
            Self::Runtime(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Validation(v) => {
                json!({ "status": "error", "kind": "validation", "violations": v })
            }
            Self::Convergence(m) => {
                json!({ "status": "error", "kind": "convergence", "message": m })
            }
            Self::Runtime(m) => json!({ "status": "error", "kind": "runtime", "message": m }),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence(_) | Error::GridTooNarrow { .. } | Error::Eigensolver(_) => {
                Self::Convergence(e.to_string())
            }
            Error::InvalidParameter { name, reason } => Self::Validation(vec![Violation {
                field: name.to_string(),
                constraint: reason,
            }]),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub files: Vec<String>,
    pub captured_mass: BTreeMap<String, f64>,
    pub temperatures: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, Value>,
    pub wall_time_s: f64,
    pub version: String,
}

struct Output {
    dir: PathBuf,
    comments: Vec<String>,
    files: Vec<String>,
}

impl Output {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn comments(&self, extra: &[String]) -> Vec<String> {
        self.comments.iter().chain(extra).cloned().collect()
    }
}

/// Validates, runs the experiment, writes every output and the manifest.
pub fn run(config: &RunConfig) -> Result<Manifest, CliError> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }
    let start = Instant::now();
    let hash = config.hash();
    let mut out = Output {
        dir: config.output_dir.clone(),
        comments: vec![
            format!("experiment: {}", config.experiment.name()),
            format!("config_hash: {hash}"),
        ],
        files: Vec::new(),
    };
    let mut manifest = Manifest {
        experiment: config.experiment.name().to_string(),
        config_hash: hash,
        seed: config.sampler.seed.filter(|_| config.experiment.samples()),
        files: Vec::new(),
        captured_mass: BTreeMap::new(),
        temperatures: BTreeMap::new(),
        diagnostics: BTreeMap::new(),
        wall_time_s: 0.0,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    match config.experiment {
        Experiment::OscillatorSweep => oscillator_sweep(config, &mut out, &mut manifest)?,
        Experiment::OscillatorJe => oscillator_je(config, &mut out, &mut manifest)?,
        Experiment::LatticeRun => lattice_run(config, &mut out, &mut manifest)?,
        Experiment::LatticeJe => lattice_je(config, &mut out, &mut manifest)?,
        Experiment::Temperature => temperature_sweep(config, &mut out, &mut manifest)?,
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    out.files.push("manifest.json".into());
    manifest.files = out.files.clone();
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(out.dir.join("manifest.json"), text + "\n")?;
    Ok(manifest)
}

fn oscillator_sweep(c: &RunConfig, out: &mut Output, _m: &mut Manifest) -> Result<(), CliError> {
    let params = c.oscillator_params()?;
    let s = &c.sweep;
    let (lo, hi) = (s.y_min.ln(), s.y_max.ln());
    let mut rows = Vec::with_capacity(s.points);
    for i in 0..s.points {
        let y = (lo + (hi - lo) * i as f64 / (s.points - 1) as f64).exp();
        let r = compare_with_boson(&params, y)?;
        rows.push(vec![
            y,
            r.temperature,
            r.boson_temperature,
            r.entropy,
            r.boson_entropy,
        ]);
    }
    let csv = csv_table(&out.comments(&[]), &["y", "T", "T_B", "S", "S_B"], &rows);
    out.write("fig2.csv", &csv)
}

fn write_profile(
    out: &mut Output,
    name: &str,
    profile: &FreeEnergyProfile,
    beta: f64,
    m: &mut Manifest,
) -> Result<(), CliError> {
    let comments = out.comments(&[format!("beta: {}", quench_thermo::io::fmt_sig(beta))]);
    out.write(name, &profile.to_csv(&comments))?;
    out.write(
        "work_histogram.csv",
        &profile.works.histogram_csv(WORK_BINS, &comments),
    )?;
    let min_ess = profile
        .effective_samples
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    m.diagnostics
        .insert("min_effective_samples".into(), json!(min_ess));
    m.diagnostics
        .insert("undersampled".into(), json!(profile.undersampled));
    let last = profile.lambdas.len() - 1;
    m.diagnostics
        .insert("delta_f_final".into(), json!(profile.delta_f[last]));
    m.diagnostics
        .insert("delta_f_target_final".into(), json!(profile.target[last]));
    Ok(())
}

fn oscillator_je(c: &RunConfig, out: &mut Output, m: &mut Manifest) -> Result<(), CliError> {
    let params = c.oscillator_params()?;
    let protocol = c.protocol()?;
    let temperature = c.temperature.expect("validated");
    let beta = 1.0 / temperature;
    let dl = protocol.step();
    let y = params.quench_strength(dl);
    m.temperatures.insert("beta_inverse".into(), temperature);
    m.temperatures.insert(
        "diagonal_ensemble".into(),
        temperature_closed_form(&params, y)?,
    );
    m.diagnostics.insert("y".into(), json!(y));

    let ens = poisson_ensemble(&params, protocol.lambda(1), dl, c.tolerances.tail_tol)?;
    m.captured_mass
        .insert("ensemble".into(), ens.captured_mass());
    out.write("ensemble.csv", &ens.to_csv())?;

    let model = OscillatorModel::new(params);
    let base = model.reference_distribution(dl)?;
    let name = c
        .outputs
        .distribution
        .as_deref()
        .unwrap_or("distribution.csv");
    out.write(name, &base.to_csv(&out.comments(&["lambda: 0".into()])))?;
    for i in 0..protocol.stations() - 1 {
        let l = protocol.lambda(i);
        let d = base.shifted(l / 2.0);
        let comments = out.comments(&[format!("lambda: {}", quench_thermo::io::fmt_sig(l))]);
        out.write(
            &format!("stations/distribution_{i:02}.csv"),
            &d.to_csv(&comments),
        )?;
    }

    let seed = c.sampler.seed.expect("validated");
    let profile = build_profile(&model, &protocol, beta, c.sampler.n_paths, seed)?;
    let name = c.outputs.profile.as_deref().unwrap_or("profile.csv");
    write_profile(out, name, &profile, beta, m)
}

fn ensemble_options(c: &RunConfig) -> EnsembleOptions {
    EnsembleOptions {
        prob_cutoff: c.tolerances.prob_cutoff,
        max_states: c.tolerances.max_states,
        exec: Exec::default(),
    }
}

fn evolution_settings(c: &RunConfig) -> EvolutionSettings {
    EvolutionSettings {
        tau: c.tau(),
        dt: c.evolution.dt,
        allow_short: false,
    }
}

fn lattice_run(c: &RunConfig, out: &mut Output, m: &mut Manifest) -> Result<(), CliError> {
    let lattice = Lattice::new(c.lattice_params())?;
    let (lambda, dl) = (c.quench.lambda, c.quench.delta_lambda);
    let opts = ensemble_options(c);
    let t = lattice_temperature(
        &lattice,
        lambda,
        dl,
        Some(c.tolerances.eps_fraction * dl),
        &opts,
    )?;
    m.captured_mass
        .insert("ensemble".into(), t.lower.captured_mass);
    m.captured_mass
        .insert("ensemble_eps".into(), t.upper.captured_mass);
    m.temperatures
        .insert("diagonal_ensemble".into(), t.estimate.temperature);
    m.diagnostics
        .insert("energy".into(), json!(mean_energy(&t.lower.ensemble)?));
    m.diagnostics
        .insert("entropy".into(), json!(entropy(&t.lower.ensemble)?));
    m.diagnostics
        .insert("states".into(), json!(t.lower.ensemble.len()));
    out.write("ensemble.csv", &t.lower.ensemble.to_csv())?;

    let initial = lattice.ground_state(lambda - dl)?;
    let h = lattice.hamiltonian(lambda)?;
    let series = evolve_center_of_mass(&initial, &h, &evolution_settings(c))?;
    record_conservation(m, &[&series]);
    let comments = out.comments(&[format!("lambda: {}", quench_thermo::io::fmt_sig(lambda))]);
    out.write("series.csv", &series.to_csv(&comments))?;
    let hist = time_average_distribution(&series, c.evolution.bins)?;
    out.write("histogram.csv", &hist.to_csv(&comments))
}

fn record_conservation(m: &mut Manifest, series: &[&quench_thermo::lattice::TimeSeries]) {
    let fold = |f: fn(&quench_thermo::lattice::TimeSeries) -> f64| {
        series.iter().map(|s| f(s)).fold(0.0, f64::max)
    };
    m.diagnostics.insert(
        "max_particle_error".into(),
        json!(fold(|s| s.max_particle_error)),
    );
    m.diagnostics.insert(
        "max_energy_drift".into(),
        json!(fold(|s| s.max_energy_drift)),
    );
    m.diagnostics.insert(
        "max_edge_occupancy".into(),
        json!(fold(|s| s.max_edge_occupancy)),
    );
}

fn lattice_je(c: &RunConfig, out: &mut Output, m: &mut Manifest) -> Result<(), CliError> {
    let lattice = Lattice::new(c.lattice_params())?;
    let protocol = c.protocol()?;
    let temperature = match c.temperature {
        Some(t) => t,
        None => {
            let dl = protocol.step();
            let t = lattice_temperature(
                &lattice,
                c.quench.lambda,
                dl,
                Some(c.tolerances.eps_fraction * dl),
                &ensemble_options(c),
            )?;
            m.captured_mass
                .insert("temperature_ensemble".into(), t.lower.captured_mass);
            m.captured_mass
                .insert("temperature_ensemble_eps".into(), t.upper.captured_mass);
            t.estimate.temperature
        }
    };
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(CliError::Convergence(format!(
            "characteristic temperature {temperature} is not usable for the estimator"
        )));
    }
    m.temperatures.insert("beta_inverse".into(), temperature);
    let beta = 1.0 / temperature;

    let mut model = LatticeModel::new(&lattice);
    model.evolution = evolution_settings(c);
    model.bins = c.evolution.bins;
    let runs = model.station_runs(&protocol)?;
    for (i, r) in runs.iter().enumerate() {
        let comments = out.comments(&[format!("lambda: {}", quench_thermo::io::fmt_sig(r.lambda))]);
        out.write(
            &format!("stations/series_{i:02}.csv"),
            &r.series.to_csv(&comments),
        )?;
        out.write(
            &format!("stations/histogram_{i:02}.csv"),
            &r.histogram.to_csv(&comments),
        )?;
    }
    let series: Vec<_> = runs.iter().map(|r| &r.series).collect();
    record_conservation(m, &series);

    let wanted = c
        .evolution
        .histogram_lambda
        .unwrap_or(protocol.lambda(1.min(runs.len() - 1)));
    let shown = runs
        .iter()
        .min_by(|a, b| {
            (a.lambda - wanted)
                .abs()
                .total_cmp(&(b.lambda - wanted).abs())
        })
        .expect("at least one station");
    let comments = out.comments(&[format!(
        "lambda: {}",
        quench_thermo::io::fmt_sig(shown.lambda)
    )]);
    let name = c.outputs.distribution.as_deref().unwrap_or("histogram.csv");
    out.write(name, &shown.histogram.to_csv(&comments))?;
    m.diagnostics.insert(
        "histogram_modes".into(),
        json!(shown.histogram.count_modes(0.1)),
    );

    let dists: Vec<_> = runs.into_iter().map(|r| r.histogram).collect();
    let seed = c.sampler.seed.expect("validated");
    let profile = profile_from_distributions(
        &model,
        &dists,
        &protocol,
        beta,
        c.sampler.n_paths,
        seed,
        Exec::default(),
    )?;
    let name = c.outputs.profile.as_deref().unwrap_or("profile.csv");
    write_profile(out, name, &profile, beta, m)
}

fn temperature_sweep(c: &RunConfig, out: &mut Output, m: &mut Manifest) -> Result<(), CliError> {
    let lattice = Lattice::new(c.lattice_params())?;
    let opts = ensemble_options(c);
    let mut rows = Vec::new();
    let mut min_mass: f64 = 1.0;
    for &lambda in &c.sweep.lambdas {
        for &dl2 in &c.sweep.delta_lambda_squared {
            let dl = dl2.sqrt();
            let t = lattice_temperature(
                &lattice,
                lambda,
                dl,
                Some(c.tolerances.eps_fraction * dl),
                &opts,
            )?;
            let e = mean_energy(&t.lower.ensemble)?;
            let s = entropy(&t.lower.ensemble)?;
            min_mass = min_mass
                .min(t.lower.captured_mass)
                .min(t.upper.captured_mass);
            m.temperatures.insert(
                format!(
                    "lambda={} dl2={}",
                    quench_thermo::io::fmt_sig(lambda),
                    quench_thermo::io::fmt_sig(dl2)
                ),
                t.estimate.temperature,
            );
            rows.push(vec![
                lambda,
                dl,
                dl2,
                e,
                s,
                t.estimate.temperature,
                t.lower.captured_mass,
            ]);
        }
    }
    m.captured_mass.insert("minimum".into(), min_mass);
    let csv = csv_table(
        &out.comments(&[]),
        &[
            "lambda",
            "delta_lambda",
            "delta_lambda_sq",
            "E",
            "S",
            "T",
            "captured_mass",
        ],
        &rows,
    );
    out.write("fig4a.csv", &csv)
}

/// Reads a config from a file or a named preset and applies overrides.
pub fn load(
    config: Option<&Path>,
    preset: Option<&str>,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunConfig, CliError> {
    let violation = |field: &str, constraint: String| {
        CliError::Validation(vec![Violation {
            field: field.into(),
            constraint,
        }])
    };
    let text = match (config, preset) {
        (Some(_), Some(_)) => {
            return Err(violation(
                "preset",
                "give either --config or --preset, not both".into(),
            ))
        }
        (None, None) => {
            return Err(violation(
                "config",
                "one of --config or --preset is required".into(),
            ))
        }
        (Some(path), None) => fs::read_to_string(path)
            .map_err(|e| violation("config", format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => crate::config::preset(name)
            .ok_or_else(|| {
                let names: Vec<&str> = crate::config::PRESETS.iter().map(|(n, _)| *n).collect();
                violation(
                    "preset",
                    format!(
                        "unknown preset {name:?}; expected one of {}",
                        names.join(", ")
                    ),
                )
            })?
            .to_string(),
    };
    let mut cfg = RunConfig::from_json(&text).map_err(|v| CliError::Validation(vec![v]))?;
    if let Some(dir) = out {
        cfg.output_dir = dir.to_path_buf();
    }
    if seed.is_some() {
        cfg.sampler.seed = seed;
    }
    Ok(cfg)
}
