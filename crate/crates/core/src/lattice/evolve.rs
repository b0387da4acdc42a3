//! Exact free-fermion time evolution and the time-averaged center-of-mass
//! distribution.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::distribution::PositionDistribution;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;

use super::slater::{center_of_mass, orthonormalize, SlaterState};
use super::{OneBodyHamiltonian, EDGE_OCCUPANCY_WARN};

pub const MIN_HISTOGRAM_SAMPLES: usize = 1000;

/// Orbital drift above which a sample is re-orthonormalized.
pub const DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSettings {
    /// Horizon `τ` in units of `ħ/J`.
    pub tau: f64,
    pub dt: f64,
    /// Permits `τ < N²`.
    pub allow_short: bool,
}

impl EvolutionSettings {
    /// `τ = 2N²`, `dt = 0.1`.
    pub fn for_sites(sites: usize) -> Self {
        Self {
            tau: 2.0 * (sites * sites) as f64,
            dt: 0.1,
            allow_short: false,
        }
    }

    pub fn samples(&self) -> usize {
        (self.tau / self.dt).floor() as usize + 1
    }
}

/// Sampled center-of-mass trajectory with conservation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub center_of_mass: Vec<f64>,
    /// Largest `|Σ_k n_k(t) − N_b|`.
    pub max_particle_error: f64,
    /// Largest `|⟨H⟩(t) − ⟨H⟩(0)|` evaluated in the site basis.
    pub max_energy_drift: f64,
    /// Largest edge-site occupation seen.
    pub max_edge_occupancy: f64,
    /// Samples whose orbitals were re-orthonormalized.
    pub reorthonormalized: usize,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.center_of_mass.iter().sum::<f64>() / self.len() as f64
    }

    /// `(t, x(t))` rows.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let rows: Vec<Vec<f64>> = self
            .times
            .iter()
            .zip(&self.center_of_mass)
            .map(|(t, x)| vec![*t, *x])
            .collect();
        crate::io::csv_table(comments, &["t", "x"], &rows)
    }
}

#[derive(Clone, Copy, Default)]
struct Sample {
    com: f64,
    number: f64,
    energy: f64,
    edge: f64,
    fixed: bool,
}

pub fn evolve_center_of_mass(
    initial: &SlaterState,
    h: &OneBodyHamiltonian,
    settings: &EvolutionSettings,
) -> Result<TimeSeries> {
    evolve_center_of_mass_with(initial, h, settings, Exec::default())
}

/// `P(t) = U e^{−iεt} Uᵀ P(0)` evaluated directly at every `t = j·dt`.
pub fn evolve_center_of_mass_with(
    initial: &SlaterState,
    h: &OneBodyHamiltonian,
    settings: &EvolutionSettings,
    exec: Exec,
) -> Result<TimeSeries> {
    let n = h.sites();
    let nb = initial.particles();
    if initial.sites() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}-site state on {n}-site Hamiltonian",
            initial.sites()
        )));
    }
    if !(settings.dt > 0.0) || !settings.dt.is_finite() {
        return Err(invalid("dt", "must be positive"));
    }
    if !(settings.tau >= 0.0) || !settings.tau.is_finite() {
        return Err(invalid("tau", "must be non-negative"));
    }
    let min_tau = (n * n) as f64;
    if settings.tau < min_tau && !settings.allow_short {
        return Err(invalid(
            "tau",
            format!("horizon {} is shorter than N² = {min_tau}", settings.tau),
        ));
    }

    let eps = h.spectrum().values();
    let u = h.spectrum().vectors();
    // coefficients of the initial orbitals in the eigenbasis, row-major N × N_b
    let coeff: Vec<Complex64> = {
        let uc = u.map(|v| Complex64::new(v, 0.0));
        let c: DMatrix<Complex64> = uc.transpose() * initial.orbitals();
        (0..n)
            .flat_map(|a| (0..nb).map(move |b| (a, b)))
            .map(|(a, b)| c[(a, b)])
            .collect()
    };
    let u_rows: Vec<f64> = (0..n)
        .flat_map(|k| (0..n).map(move |a| (k, a)))
        .map(|(k, a)| u[(k, a)])
        .collect();
    let diag = h.diagonal();
    let off = h.off_diagonal();

    let count = settings.samples();
    let mut samples = vec![Sample::default(); count];
    exec.fill_chunks(&mut samples, 256, |start, chunk| {
        let mut phased = vec![Complex64::new(0.0, 0.0); n * nb];
        let mut p = DMatrix::<Complex64>::zeros(n, nb);
        for (j, slot) in chunk.iter_mut().enumerate() {
            let t = (start + j) as f64 * settings.dt;
            for a in 0..n {
                let phase = Complex64::from_polar(1.0, -eps[a] * t);
                for b in 0..nb {
                    phased[a * nb + b] = coeff[a * nb + b] * phase;
                }
            }
            for k in 0..n {
                let row = &u_rows[k * n..(k + 1) * n];
                for b in 0..nb {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..n {
                        acc += phased[a * nb + b] * row[a];
                    }
                    p[(k, b)] = acc;
                }
            }
            let gram = p.adjoint() * &p;
            let drift = (gram - DMatrix::<Complex64>::identity(nb, nb))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let fixed = drift > DRIFT_TOL;
            if fixed {
                orthonormalize(&mut p);
            }
            let dens: Vec<f64> = p
                .row_iter()
                .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
                .collect();
            let mut energy: f64 = dens.iter().zip(diag).map(|(d, v)| d * v).sum();
            for k in 0..n - 1 {
                let hop: Complex64 = (0..nb).map(|b| p[(k, b)].conj() * p[(k + 1, b)]).sum();
                energy += 2.0 * off[k] * hop.re;
            }
            *slot = Sample {
                com: center_of_mass(&dens, nb),
                number: dens.iter().sum(),
                energy,
                edge: dens[0].max(dens[n - 1]),
                fixed,
            };
        }
    });

    let reorthonormalized = samples.iter().filter(|s| s.fixed).count();
    if reorthonormalized > 0 {
        log::warn!(
            "re-orthonormalized orbitals at {reorthonormalized} samples (drift > {DRIFT_TOL:e})"
        );
    }
    let e0 = samples[0].energy;
    let max_edge_occupancy = samples.iter().map(|s| s.edge).fold(0.0, f64::max);
    if max_edge_occupancy > EDGE_OCCUPANCY_WARN {
        log::warn!(
            "edge occupancy reached {max_edge_occupancy:e} during evolution at λ={}; open boundaries affect the result",
            h.lambda()
        );
    }
    Ok(TimeSeries {
        times: (0..count).map(|j| j as f64 * settings.dt).collect(),
        center_of_mass: samples.iter().map(|s| s.com).collect(),
        max_particle_error: samples
            .iter()
            .map(|s| (s.number - nb as f64).abs())
            .fold(0.0, f64::max),
        max_energy_drift: samples
            .iter()
            .map(|s| (s.energy - e0).abs())
            .fold(0.0, f64::max),
        max_edge_occupancy,
        reorthonormalized,
    })
}

/// Normalized histogram of `x(t)` over `bins` equal-width bins spanning the
/// observed range padded by 5% on each side.
pub fn time_average_distribution(series: &TimeSeries, bins: usize) -> Result<PositionDistribution> {
    if series.len() < MIN_HISTOGRAM_SAMPLES {
        return Err(Error::TooFewSamples {
            got: series.len(),
            required: MIN_HISTOGRAM_SAMPLES,
        });
    }
    if bins == 0 {
        return Err(invalid("bins", "must be at least 1"));
    }
    let (lo, hi) = series
        .center_of_mass
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        });
    let span = hi - lo;
    let pad = if span > 0.0 {
        0.05 * span
    } else {
        1e-6 * lo.abs().max(1.0)
    };
    let lower = lo - pad;
    let width = (span + 2.0 * pad) / bins as f64;
    let mut counts = vec![0u64; bins];
    for x in &series.center_of_mass {
        let i = (((x - lower) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    PositionDistribution::from_counts(lower, width, &counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, LatticeParams};

    fn short(tau: f64) -> EvolutionSettings {
        EvolutionSettings {
            tau,
            dt: 0.1,
            allow_short: true,
        }
    }

    #[test]
    fn stationary_state_has_constant_com() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let g = lat.ground_state(14.0).unwrap();
        let h = lat.hamiltonian(14.0).unwrap();
        let s = evolve_center_of_mass(&g, &h, &short(200.0)).unwrap();
        let x0 = s.center_of_mass[0];
        assert!(s.center_of_mass.iter().all(|x| (x - x0).abs() < 1e-10));
        assert!((x0 - 13.5).abs() < 1e-3);
    }

    #[test]
    fn quench_oscillates_about_new_minimum() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let g = lat.ground_state(13.0).unwrap();
        let h = lat.hamiltonian(14.0).unwrap();
        let s = evolve_center_of_mass(&g, &h, &short(200.0)).unwrap();
        assert!((s.center_of_mass[0] - 13.0).abs() < 1e-3);
        let max = s.center_of_mass.iter().cloned().fold(f64::MIN, f64::max);
        assert!(max > 13.8);
        assert!(s.max_particle_error < 1e-10);
        assert!(s.max_energy_drift < 1e-8);
        assert!(s.center_of_mass.iter().all(|x| (1.0..=40.0).contains(x)));
    }

    #[test]
    fn horizon_guard() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let g = lat.ground_state(13.0).unwrap();
        let h = lat.hamiltonian(14.0).unwrap();
        let s = EvolutionSettings {
            tau: 100.0,
            dt: 0.1,
            allow_short: false,
        };
        assert!(evolve_center_of_mass(&g, &h, &s).is_err());
    }

    #[test]
    fn constant_series_fills_one_bin() {
        let series = TimeSeries {
            times: (0..2000).map(|i| i as f64).collect(),
            center_of_mass: vec![13.0; 2000],
            max_particle_error: 0.0,
            max_energy_drift: 0.0,
            max_edge_occupancy: 0.0,
            reorthonormalized: 0,
        };
        let d = time_average_distribution(&series, 20).unwrap();
        assert_eq!(d.density().iter().filter(|f| **f > 0.0).count(), 1);
        assert!((d.mass() - 1.0).abs() < 1e-12);
        let few = TimeSeries {
            times: vec![0.0; 10],
            center_of_mass: vec![1.0; 10],
            ..series
        };
        assert!(matches!(
            time_average_distribution(&few, 20),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn parallel_matches_sequential() {
        let lat = Lattice::new(LatticeParams::default()).unwrap();
        let g = lat.ground_state(15.0).unwrap();
        let h = lat.hamiltonian(16.0).unwrap();
        let a = evolve_center_of_mass_with(&g, &h, &short(300.0), Exec::Sequential).unwrap();
        let b = evolve_center_of_mass_with(&g, &h, &short(300.0), Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
