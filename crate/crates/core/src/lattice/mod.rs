//! Hard-core bosons in a pair of harmonic traps, solved through the
//! Jordan-Wigner mapping to free fermions on an open chain.
//!
//! The one-body Hamiltonian on sites `k = 1..=N` is
//! `h_kk = V(k − a)² + V(k − λ)²`, `h_k,k+1 = −J`. Many-body states are
//! Slater determinants of its orbitals.

mod enumerate;
mod evolve;
mod slater;
mod tridiag;

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use crate::ensemble::{temperature_from_pair, DiagonalEnsemble, TemperatureEstimate};
use crate::error::{invalid, Error, Result};

pub use enumerate::{
    diagonal_ensemble, diagonal_ensemble_with, EnsembleOptions, LatticeEnsemble,
    DEFAULT_MAX_STATES, DEFAULT_PROB_CUTOFF,
};
pub use evolve::{
    evolve_center_of_mass, evolve_center_of_mass_with, time_average_distribution,
    EvolutionSettings, TimeSeries, MIN_HISTOGRAM_SAMPLES,
};
pub use slater::{energy_expectation, overlap_probability, SlaterState, ORTHONORMAL_TOL};
pub use tridiag::{eigh_tridiagonal, SingleParticleSpectrum};

/// Largest supported chain; occupations are stored as 128-bit masks.
pub const MAX_SITES: usize = 128;

/// Minimum single-particle gap at the Fermi level.
pub const FERMI_GAP_TOL: f64 = 1e-12;

/// Occupation above which an edge site triggers a warning.
pub const EDGE_OCCUPANCY_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub sites: usize,
    pub particles: usize,
    pub hopping: f64,
    pub trap: f64,
    pub center: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            sites: 40,
            particles: 10,
            hopping: 1.0,
            trap: 0.0225,
            center: 13.0,
        }
    }
}

impl LatticeParams {
    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 || self.sites > MAX_SITES {
            return Err(invalid("sites", format!("must lie in 1..={MAX_SITES}")));
        }
        if self.particles == 0 || self.particles > self.sites {
            return Err(invalid(
                "particles",
                format!(
                    "need 1 <= N_b <= N, got N_b={} N={}",
                    self.particles, self.sites
                ),
            ));
        }
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(invalid("hopping", "must be positive"));
        }
        if !(self.trap >= 0.0) || !self.trap.is_finite() {
            return Err(invalid("trap", "must be non-negative"));
        }
        if !self.center.is_finite() {
            return Err(invalid("center", "must be finite"));
        }
        Ok(())
    }

    /// Site potential `V(k − a)² + V(k − λ)²` for `k = 1..=N`.
    pub fn potential(&self, lambda: f64) -> Vec<f64> {
        (1..=self.sites)
            .map(|k| {
                let k = k as f64;
                self.trap * ((k - self.center).powi(2) + (k - lambda).powi(2))
            })
            .collect()
    }

    /// Exact equilibrium free-energy change `V N_b [(λ − a)² − (λ₁ − a)²] / 2`
    /// of a rigid `N_b`-particle cloud dragged by the movable trap.
    pub fn target_free_energy(&self, lambda_start: f64, lambda: f64) -> f64 {
        let vn = self.trap * self.particles as f64;
        0.5 * vn * ((lambda - self.center).powi(2) - (lambda_start - self.center).powi(2))
    }
}

/// Tridiagonal one-body Hamiltonian at fixed `λ`, with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyHamiltonian {
    lambda: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
    spectrum: SingleParticleSpectrum,
}

impl OneBodyHamiltonian {
    pub fn new(params: &LatticeParams, lambda: f64) -> Result<Self> {
        params.validate()?;
        let diag = params.potential(lambda);
        let off = vec![-params.hopping; params.sites - 1];
        let spectrum = eigh_tridiagonal(&diag, &off)?;
        Ok(Self {
            lambda,
            diag,
            off,
            spectrum,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    pub fn spectrum(&self) -> &SingleParticleSpectrum {
        &self.spectrum
    }

    pub fn sites(&self) -> usize {
        self.diag.len()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.sites();
        let mut h = DMatrix::zeros(n, n);
        for k in 0..n {
            h[(k, k)] = self.diag[k];
            if k + 1 < n {
                h[(k, k + 1)] = self.off[k];
                h[(k + 1, k)] = self.off[k];
            }
        }
        h
    }
}

/// Dense symmetric `N × N` one-body matrix at `λ`.
pub fn one_body_hamiltonian(params: &LatticeParams, lambda: f64) -> Result<DMatrix<f64>> {
    Ok(OneBodyHamiltonian::new(params, lambda)?.dense())
}

/// A lattice with a per-`λ` cache of diagonalized one-body Hamiltonians.
#[derive(Debug)]
pub struct Lattice {
    params: LatticeParams,
    cache: Mutex<HashMap<u64, Arc<OneBodyHamiltonian>>>,
    warned: Mutex<HashSet<u64>>,
}

impl Lattice {
    pub fn new(params: LatticeParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            cache: Mutex::new(HashMap::new()),
            warned: Mutex::new(HashSet::new()),
        })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn hamiltonian(&self, lambda: f64) -> Result<Arc<OneBodyHamiltonian>> {
        let key = lambda.to_bits();
        if let Some(h) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(h.clone());
        }
        let h = Arc::new(OneBodyHamiltonian::new(&self.params, lambda)?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, h.clone());
        Ok(h)
    }

    /// Fermi sea of `H(λ)`: the `N_b` lowest orbitals.
    pub fn ground_state(&self, lambda: f64) -> Result<SlaterState> {
        let h = self.hamiltonian(lambda)?;
        let nb = self.params.particles;
        let eps = h.spectrum().values();
        if nb < eps.len() {
            let gap = eps[nb] - eps[nb - 1];
            if gap <= FERMI_GAP_TOL {
                return Err(Error::DegenerateFermiLevel {
                    lower: nb - 1,
                    upper: nb,
                    gap,
                });
            }
        }
        let levels: Vec<usize> = (0..nb).collect();
        let state = SlaterState::from_levels(h.spectrum().vectors(), &levels)?;
        if self
            .warned
            .lock()
            .expect("cache poisoned")
            .insert(lambda.to_bits())
        {
            warn_on_edge_occupancy(&state.densities(), lambda);
        }
        Ok(state)
    }

    /// `Σ_{α < N_b} ε_α` of `H(λ)`.
    pub fn ground_energy(&self, lambda: f64) -> Result<f64> {
        let h = self.hamiltonian(lambda)?;
        Ok(h.spectrum().values()[..self.params.particles].iter().sum())
    }

    /// `⟨ψ0(λ − Δλ)|H(λ)|ψ0(λ − Δλ)⟩`.
    pub fn quench_energy(&self, lambda: f64, delta_lambda: f64) -> Result<f64> {
        let initial = self.ground_state(lambda - delta_lambda)?;
        energy_expectation(&initial, &self.hamiltonian(lambda)?.dense())
    }
}

pub(crate) fn warn_on_edge_occupancy(densities: &[f64], lambda: f64) {
    let edge = densities[0].max(densities[densities.len() - 1]);
    if edge > EDGE_OCCUPANCY_WARN {
        log::warn!("edge occupancy {edge:e} at λ={lambda} exceeds {EDGE_OCCUPANCY_WARN:e}; open boundaries affect the result");
    }
}

/// Characteristic temperature from quenches of size `Δλ` and `Δλ + ε`
/// ending at the same `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTemperature {
    pub estimate: TemperatureEstimate,
    pub lower: LatticeEnsemble,
    pub upper: LatticeEnsemble,
}

impl LatticeTemperature {
    pub fn entropy(&self) -> Result<f64> {
        crate::ensemble::entropy(&self.lower.ensemble)
    }
}

/// Default `ε = 0.1 Δλ` when `eps` is `None`.
pub fn lattice_temperature(
    lattice: &Lattice,
    lambda: f64,
    delta_lambda: f64,
    eps: Option<f64>,
    options: &EnsembleOptions,
) -> Result<LatticeTemperature> {
    if !(delta_lambda > 0.0) {
        return Err(invalid(
            "delta_lambda",
            format!("must be positive, got {delta_lambda}"),
        ));
    }
    let eps = eps.unwrap_or(0.1 * delta_lambda);
    if !(eps > 0.0) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    let lower = diagonal_ensemble_with(lattice, lambda, delta_lambda, options)?;
    let upper = diagonal_ensemble_with(lattice, lambda, delta_lambda + eps, options)?;
    let estimate = temperature_from_pair(&lower.ensemble, &upper.ensemble)?;
    Ok(LatticeTemperature {
        estimate,
        lower,
        upper,
    })
}

/// Borrowed view used by callers that only need the ensemble.
impl AsRef<DiagonalEnsemble> for LatticeEnsemble {
    fn as_ref(&self) -> &DiagonalEnsemble {
        &self.ensemble
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_layout() {
        let p = LatticeParams::default();
        let h = one_body_hamiltonian(&p, 13.0).unwrap();
        assert_eq!(h[(12, 12)], 0.0);
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 0)], -1.0);
        assert_eq!(h[(0, 2)], 0.0);
        assert!((h[(0, 0)] - 0.0225 * 288.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_free_chain() {
        let p = LatticeParams {
            sites: 2,
            particles: 1,
            hopping: 1.0,
            trap: 0.0,
            center: 1.0,
        };
        let h = OneBodyHamiltonian::new(&p, 0.0).unwrap();
        assert!((h.spectrum().values()[0] + 1.0).abs() < 1e-15);
        assert!((h.spectrum().values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut p = LatticeParams {
            particles: 41,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p.particles = 0;
        assert!(p.validate().is_err());
        let mut p = LatticeParams {
            hopping: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p.hopping = 1.0;
        p.trap = -1.0;
        assert!(p.validate().is_err());
        p.trap = 0.0;
        p.sites = 200;
        p.particles = 1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_particle_sits_at_combined_minimum() {
        let p = LatticeParams {
            particles: 1,
            ..LatticeParams::default()
        };
        let lat = Lattice::new(p).unwrap();
        let g = lat.ground_state(17.0).unwrap();
        let dens = g.densities();
        let peak = dens
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0
            + 1;
        assert_eq!(peak, 15);
        assert!((g.center_of_mass() - 15.0).abs() < 1e-6);
    }

    #[test]
    fn strong_trap_pins_particles() {
        let p = LatticeParams {
            sites: 8,
            particles: 2,
            hopping: 1.0,
            trap: 1e6,
            center: 4.0,
        };
        let lat = Lattice::new(p).unwrap();
        // combined minimum between sites 4 and 5
        let d = lat.ground_state(5.0).unwrap().densities();
        assert!(d[3] > 0.999_999 && d[4] > 0.999_999);
    }

    #[test]
    fn degenerate_fermi_level() {
        // two decoupled identical sites with one particle each side of λ
        let p = LatticeParams {
            sites: 2,
            particles: 1,
            hopping: 1e-300,
            trap: 1.0,
            center: 1.5,
        };
        let lat = Lattice::new(p).unwrap();
        assert!(matches!(
            lat.ground_state(1.5),
            Err(Error::DegenerateFermiLevel {
                lower: 0,
                upper: 1,
                ..
            })
        ));
    }

    #[test]
    fn ground_state_energy_is_level_sum() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let e = lat.quench_energy(13.0, 0.0).unwrap();
        assert!((e - lat.ground_energy(13.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quench_energy_anchor() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let e = lat.quench_energy(15.0, 1.0).unwrap();
        assert!((e - -0.383).abs() <= 0.05 * 0.383, "{e}");
    }

    #[test]
    fn cache_reuses_spectra() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let a = lat.hamiltonian(14.0).unwrap();
        let b = lat.hamiltonian(14.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
