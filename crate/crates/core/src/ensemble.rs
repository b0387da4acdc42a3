//! Diagonal ensembles: the spectrum-side representation of a time-averaged
//! quenched state, with the entropy, energy and temperature calculus built on
//! top of it.

use crate::error::{Error, Result};
use crate::io::{csv_table, fmt_sig};

/// Tolerance on `Σ p_n − 1` accepted by [`entropy`] and [`mean_energy`].
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// `|dE|` and `|dS|` below this are treated as zero by
/// [`temperature_from_pair`].
pub const DEGENERATE_TOL: f64 = 1e-14;

/// Eigen-energies `E_n` of the post-quench Hamiltonian paired with their
/// occupation probabilities `p_n = |<E_n|ψ0>|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEnsemble {
    energies: Vec<f64>,
    probs: Vec<f64>,
    label: String,
    lambda: Option<f64>,
    delta_lambda: Option<f64>,
    tail_mass: f64,
}

impl DiagonalEnsemble {
    pub fn new(energies: Vec<f64>, probs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidEnsemble("no states".into()));
        }
        if energies.len() != probs.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} energies but {} probabilities",
                energies.len(),
                probs.len()
            )));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidEnsemble(format!("non-finite energy {e}")));
        }
        if let Some(p) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0 + 1e-12)
        {
            return Err(Error::InvalidEnsemble(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            energies,
            probs,
            label: label.into(),
            lambda: None,
            delta_lambda: None,
            tail_mass: 0.0,
        })
    }

    /// Attaches the quench coordinates written into the CSV header.
    pub fn with_quench(mut self, lambda: f64, delta_lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self.delta_lambda = Some(delta_lambda);
        self
    }

    pub fn with_tail_mass(mut self, tail: f64) -> Self {
        self.tail_mass = tail;
        self
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn delta_lambda(&self) -> Option<f64> {
        self.delta_lambda
    }

    /// Probability mass discarded by truncation before renormalization.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `1 − tail_mass`.
    pub fn captured_mass(&self) -> f64 {
        1.0 - self.tail_mass
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let sum = self.total_probability();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                sum,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(())
    }

    /// Serializes as `energy,probability` rows under a `#` comment header.
    pub fn to_csv(&self) -> String {
        let mut comments = vec![format!("label: {}", self.label)];
        if let Some(l) = self.lambda {
            comments.push(format!("lambda: {}", fmt_sig(l)));
        }
        if let Some(d) = self.delta_lambda {
            comments.push(format!("delta_lambda: {}", fmt_sig(d)));
        }
        comments.push(format!("tail_mass: {}", fmt_sig(self.tail_mass)));
        let rows: Vec<Vec<f64>> = self
            .energies
            .iter()
            .zip(&self.probs)
            .map(|(e, p)| vec![*e, *p])
            .collect();
        csv_table(&comments, &["energy", "probability"], &rows)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut label = String::new();
        let mut lambda = None;
        let mut delta_lambda = None;
        let mut tail = 0.0;
        let mut energies = Vec::new();
        let mut probs = Vec::new();
        let num = |s: &str, line: usize| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("`{}`: {e}", s.trim()),
            })
        };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    match key.trim() {
                        "label" => label = value.trim().to_string(),
                        "lambda" => lambda = Some(num(value, line_no)?),
                        "delta_lambda" => delta_lambda = Some(num(value, line_no)?),
                        "tail_mass" => tail = num(value, line_no)?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.starts_with("energy") {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(e), Some(p), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected two columns".into(),
                });
            };
            energies.push(num(e, line_no)?);
            probs.push(num(p, line_no)?);
        }
        let mut ens = DiagonalEnsemble::new(energies, probs, label)?.with_tail_mass(tail);
        ens.lambda = lambda;
        ens.delta_lambda = delta_lambda;
        Ok(ens)
    }
}

/// Diagonal entropy `−Σ p_n ln p_n`; zero-probability states contribute 0.
pub fn entropy(ens: &DiagonalEnsemble) -> Result<f64> {
    ens.check_normalized()?;
    Ok(ens
        .probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Ensemble-averaged energy `Σ E_n p_n`.
pub fn mean_energy(ens: &DiagonalEnsemble) -> Result<f64> {
    ens.check_normalized()?;
    Ok(ens
        .energies
        .iter()
        .zip(&ens.probs)
        .map(|(e, p)| e * p)
        .sum())
}

/// Inverse temperature from a finite difference of entropy over energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureEstimate {
    pub beta: f64,
    pub temperature: f64,
    pub d_entropy: f64,
    pub d_energy: f64,
}

impl TemperatureEstimate {
    /// True when the pair preserved purity (no entropy change), in which case
    /// the temperature is reported as zero and `beta` is infinite.
    pub fn is_purity_preserving(&self) -> bool {
        self.temperature == 0.0
    }
}

/// `β = [S(b) − S(a)] / [E(b) − E(a)]` for two ensembles of the same
/// Hamiltonian, `b` produced by the slightly larger quench.
///
/// A pair whose entropies agree to [`DEGENERATE_TOL`] is reported as `T = 0`
/// (`β = +∞`). An energy difference below the same tolerance with a non-zero
/// entropy change is an error.
pub fn temperature_from_pair(
    ens_a: &DiagonalEnsemble,
    ens_b: &DiagonalEnsemble,
) -> Result<TemperatureEstimate> {
    let ds = entropy(ens_b)? - entropy(ens_a)?;
    let de = mean_energy(ens_b)? - mean_energy(ens_a)?;
    if !ds.is_finite() || !de.is_finite() {
        return Err(Error::InvalidEnsemble(
            "non-finite entropy or energy".into(),
        ));
    }
    if ds.abs() <= DEGENERATE_TOL {
        return Ok(TemperatureEstimate {
            beta: f64::INFINITY,
            temperature: 0.0,
            d_entropy: ds,
            d_energy: de,
        });
    }
    if de.abs() < DEGENERATE_TOL {
        return Err(Error::DegenerateEnergy { de, ds });
    }
    let beta = ds / de;
    Ok(TemperatureEstimate {
        beta,
        temperature: 1.0 / beta,
        d_entropy: ds,
        d_energy: de,
    })
}

/// Rescales the probabilities to sum to one, folding the missing mass into
/// `tail_mass`.
pub fn renormalize(ens: &DiagonalEnsemble) -> Result<DiagonalEnsemble> {
    let sum = ens.total_probability();
    if !(sum > 0.0) {
        return Err(Error::ZeroMass);
    }
    let probs = ens.probs.iter().map(|p| p / sum).collect();
    let captured = (1.0 - ens.tail_mass) * sum;
    Ok(DiagonalEnsemble {
        energies: ens.energies.clone(),
        probs,
        label: ens.label.clone(),
        lambda: ens.lambda,
        delta_lambda: ens.delta_lambda,
        tail_mass: (1.0 - captured).max(0.0),
    })
}
