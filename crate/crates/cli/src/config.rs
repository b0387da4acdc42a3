//! Run configuration: JSON schema, defaults, validation and hashing.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use quench_thermo::lattice::MAX_SITES;
use quench_thermo::{LatticeParams, OscillatorParams, QuenchProtocol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[default]
    OscillatorSweep,
    OscillatorJe,
    LatticeRun,
    LatticeJe,
    Temperature,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::OscillatorSweep => "oscillator-sweep",
            Self::OscillatorJe => "oscillator-je",
            Self::LatticeRun => "lattice-run",
            Self::LatticeJe => "lattice-je",
            Self::Temperature => "temperature",
        }
    }

    pub fn samples(self) -> bool {
        matches!(self, Self::OscillatorJe | Self::LatticeJe)
    }

    fn uses_lattice(self) -> bool {
        matches!(self, Self::LatticeRun | Self::LatticeJe | Self::Temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorSection {
    pub mass: f64,
    pub stiffness: f64,
    pub hbar: f64,
}

impl Default for OscillatorSection {
    fn default() -> Self {
        Self {
            mass: 1.0,
            stiffness: 0.5,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub sites: usize,
    pub particles: usize,
    pub hopping: f64,
    pub trap: f64,
    pub center: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        let p = LatticeParams::default();
        Self {
            sites: p.sites,
            particles: p.particles,
            hopping: p.hopping,
            trap: p.trap,
            center: p.center,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub lambda_start: f64,
    pub step: f64,
    pub stations: usize,
}

/// Single quench for `lattice-run`, and the reference point for the
/// characteristic temperature of `lattice-je`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuenchSection {
    pub lambda: f64,
    pub delta_lambda: f64,
}

impl Default for QuenchSection {
    fn default() -> Self {
        Self {
            lambda: 15.0,
            delta_lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
    /// `Δλ²` values for the `temperature` experiment.
    pub delta_lambda_squared: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            y_min: 0.01,
            y_max: 10.0,
            points: 61,
            delta_lambda_squared: (1..=16).map(|i| 0.25 * i as f64).collect(),
            lambdas: vec![15.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub n_paths: usize,
    pub seed: Option<u64>,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub prob_cutoff: f64,
    pub max_states: usize,
    pub tail_tol: f64,
    /// Temperature finite-difference step as a fraction of `Δλ`.
    pub eps_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            prob_cutoff: quench_thermo::lattice::DEFAULT_PROB_CUTOFF,
            max_states: quench_thermo::lattice::DEFAULT_MAX_STATES,
            tail_tol: quench_thermo::oscillator::DEFAULT_TAIL_TOL,
            eps_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    /// Defaults to `2N²`.
    pub tau: Option<f64>,
    pub dt: f64,
    pub bins: usize,
    /// Station whose histogram is written as the headline figure file.
    /// Defaults to the second station.
    pub histogram_lambda: Option<f64>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            tau: None,
            dt: 0.1,
            bins: 50,
            histogram_lambda: None,
        }
    }
}

/// File names of the headline outputs; not part of the config hash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputNames {
    pub distribution: Option<String>,
    pub profile: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub oscillator: OscillatorSection,
    pub lattice: LatticeSection,
    /// Defaults depend on the experiment.
    pub protocol: Option<ProtocolSection>,
    pub quench: QuenchSection,
    /// Inverse of the `β` used by the estimator. `lattice-je` computes it
    /// when absent.
    pub temperature: Option<f64>,
    pub sweep: SweepSection,
    pub sampler: SamplerSection,
    pub tolerances: Tolerances,
    pub evolution: EvolutionSection,
    pub outputs: OutputNames,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::default(),
            oscillator: OscillatorSection::default(),
            lattice: LatticeSection::default(),
            protocol: None,
            quench: QuenchSection::default(),
            temperature: None,
            sweep: SweepSection::default(),
            sampler: SamplerSection::default(),
            tolerances: Tolerances::default(),
            evolution: EvolutionSection::default(),
            outputs: OutputNames::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// One failed constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

pub const PRESETS: [(&str, &str); 5] = [
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig3-low", include_str!("../presets/fig3-low.json")),
    ("fig3-high", include_str!("../presets/fig3-high.json")),
    ("fig4", include_str!("../presets/fig4.json")),
    ("fig4a", include_str!("../presets/fig4a.json")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Violation> {
        serde_json::from_str(text).map_err(|e| Violation {
            field: "config".into(),
            constraint: format!("invalid JSON document: {e}"),
        })
    }

    pub fn protocol_section(&self) -> ProtocolSection {
        self.protocol.unwrap_or(match self.experiment {
            Experiment::LatticeJe => ProtocolSection {
                lambda_start: 13.0,
                step: 1.0,
                stations: 8,
            },
            _ => ProtocolSection {
                lambda_start: 0.0,
                step: 0.6935,
                stations: 11,
            },
        })
    }

    pub fn protocol(&self) -> quench_thermo::Result<QuenchProtocol> {
        let p = self.protocol_section();
        QuenchProtocol::new(p.lambda_start, p.step, p.stations)
    }

    pub fn oscillator_params(&self) -> quench_thermo::Result<OscillatorParams> {
        let o = self.oscillator;
        OscillatorParams::new(o.mass, o.stiffness, o.hbar)
    }

    pub fn lattice_params(&self) -> LatticeParams {
        let l = self.lattice;
        LatticeParams {
            sites: l.sites,
            particles: l.particles,
            hopping: l.hopping,
            trap: l.trap,
            center: l.center,
        }
    }

    pub fn tau(&self) -> f64 {
        self.evolution
            .tau
            .unwrap_or(2.0 * (self.lattice.sites * self.lattice.sites) as f64)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut bad = |field: &str, constraint: &str| {
            v.push(Violation {
                field: field.to_string(),
                constraint: constraint.to_string(),
            })
        };
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let kind = self.experiment;

        if kind.samples() {
            if self.sampler.seed.is_none() {
                bad("sampler.seed", "required for sampling experiments");
            }
            if self.sampler.n_paths == 0 {
                bad("sampler.n_paths", "must be at least 1");
            }
        }
        if let Some(t) = self.temperature {
            if !positive(t) {
                bad("temperature", "must be positive and finite");
            }
        } else if kind == Experiment::OscillatorJe {
            bad("temperature", "required for oscillator-je");
        }

        let t = self.tolerances;
        if !(t.prob_cutoff > 0.0 && t.prob_cutoff <= 1e-6) {
            bad("tolerances.prob_cutoff", "must lie in (0, 1e-6]");
        }
        if t.max_states == 0 {
            bad("tolerances.max_states", "must be at least 1");
        }
        if !(t.tail_tol > 0.0 && t.tail_tol <= 1e-6) {
            bad("tolerances.tail_tol", "must lie in (0, 1e-6]");
        }
        if !positive(t.eps_fraction) {
            bad("tolerances.eps_fraction", "must be positive");
        }

        if matches!(kind, Experiment::OscillatorSweep | Experiment::OscillatorJe) {
            let o = self.oscillator;
            for (name, x) in [
                ("oscillator.mass", o.mass),
                ("oscillator.stiffness", o.stiffness),
                ("oscillator.hbar", o.hbar),
            ] {
                if !positive(x) {
                    bad(name, "must be positive and finite");
                }
            }
        }
        if kind == Experiment::OscillatorSweep {
            let s = &self.sweep;
            if !positive(s.y_min) || !(s.y_max > s.y_min) || !s.y_max.is_finite() {
                bad("sweep.y_min", "need 0 < y_min < y_max");
            }
            if s.points < 2 {
                bad("sweep.points", "must be at least 2");
            }
        }

        if kind.uses_lattice() {
            let l = self.lattice;
            if l.sites == 0 || l.sites > MAX_SITES {
                bad("lattice.sites", &format!("must lie in 1..={MAX_SITES}"));
            }
            if l.particles == 0 || l.particles > l.sites {
                bad("lattice.particles", "need 1 <= N_b <= N");
            }
            if !positive(l.hopping) {
                bad("lattice.hopping", "must be positive");
            }
            if !(l.trap >= 0.0 && l.trap.is_finite()) {
                bad("lattice.trap", "must be non-negative");
            }
            if !l.center.is_finite() {
                bad("lattice.center", "must be finite");
            }
        }
        if matches!(kind, Experiment::LatticeRun | Experiment::LatticeJe) {
            let e = self.evolution;
            if !positive(e.dt) {
                bad("evolution.dt", "must be positive");
            }
            if let Some(tau) = e.tau {
                let n2 = (self.lattice.sites * self.lattice.sites) as f64;
                if !(tau >= n2) || !tau.is_finite() {
                    bad("evolution.tau", "must be at least N²");
                }
            }
            if e.bins == 0 {
                bad("evolution.bins", "must be at least 1");
            }
        }
        if kind == Experiment::LatticeRun
            || (kind == Experiment::LatticeJe && self.temperature.is_none())
        {
            if !self.quench.lambda.is_finite() {
                bad("quench.lambda", "must be finite");
            }
            if !positive(self.quench.delta_lambda) {
                bad("quench.delta_lambda", "must be positive");
            }
        }
        if kind == Experiment::Temperature {
            let s = &self.sweep;
            if s.delta_lambda_squared.is_empty()
                || !s.delta_lambda_squared.iter().all(|x| positive(*x))
            {
                bad(
                    "sweep.delta_lambda_squared",
                    "must be a non-empty list of positive values",
                );
            }
            if s.lambdas.is_empty() || !s.lambdas.iter().all(|x| x.is_finite()) {
                bad("sweep.lambdas", "must be a non-empty list of finite values");
            }
        }

        if kind.samples() {
            let p = self.protocol_section();
            if p.stations < 2 {
                bad("protocol.stations", "must be at least 2");
            }
            if !positive(p.step) {
                bad("protocol.step", "must be positive");
            }
            if !p.lambda_start.is_finite() {
                bad("protocol.lambda_start", "must be finite");
            }
        }
        v
    }

    /// Only the fields that affect the numbers this experiment produces,
    /// with defaults resolved.
    pub fn semantic_value(&self) -> Value {
        let mut doc = json!({ "experiment": self.experiment.name() });
        let map = doc.as_object_mut().unwrap();
        let mut put = |k: &str, v: Value| {
            map.insert(k.to_string(), v);
        };
        let t = self.tolerances;
        let evolution = json!({
            "tau": self.tau(),
            "dt": self.evolution.dt,
            "bins": self.evolution.bins,
        });
        match self.experiment {
            Experiment::OscillatorSweep => {
                put("oscillator", json!(self.oscillator));
                put(
                    "sweep",
                    json!({
                        "y_min": self.sweep.y_min,
                        "y_max": self.sweep.y_max,
                        "points": self.sweep.points,
                    }),
                );
            }
            Experiment::OscillatorJe => {
                put("oscillator", json!(self.oscillator));
                put("protocol", json!(self.protocol_section()));
                put("temperature", json!(self.temperature));
                put("sampler", json!(self.sampler));
                put("tail_tol", json!(t.tail_tol));
            }
            Experiment::LatticeRun => {
                put("lattice", json!(self.lattice));
                put("quench", json!(self.quench));
                put("tolerances", json!(t));
                put("evolution", evolution);
            }
            Experiment::LatticeJe => {
                put("lattice", json!(self.lattice));
                put("protocol", json!(self.protocol_section()));
                put("sampler", json!(self.sampler));
                put("evolution", evolution);
                put("histogram_lambda", json!(self.evolution.histogram_lambda));
                match self.temperature {
                    Some(temp) => put("temperature", json!(temp)),
                    None => {
                        put("quench", json!(self.quench));
                        put("tolerances", json!(t));
                    }
                }
            }
            Experiment::Temperature => {
                put("lattice", json!(self.lattice));
                put(
                    "sweep",
                    json!({
                        "delta_lambda_squared": self.sweep.delta_lambda_squared,
                        "lambdas": self.sweep.lambdas,
                    }),
                );
                put("tolerances", json!(t));
            }
        }
        doc
    }

    /// SHA-256 of [`Self::semantic_value`], hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.semantic_value()).unwrap();
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
