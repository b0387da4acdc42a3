//! Work-path Monte Carlo over per-station reaction-coordinate distributions
//! and the exponential-average free-energy estimator.
//!
//! A path draws `x_i ~ f_i` independently at each of the `s − 1` stations and
//! accumulates `W = Σ_i [U(x_i, λ_{i+1}) − U(x_i, λ_i)]`. The free-energy
//! change follows from `e^{−βΔF} = ⟨e^{−βW}⟩`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::PositionDistribution;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::io::csv_table;
use crate::lattice::{
    evolve_center_of_mass_with, time_average_distribution, EvolutionSettings, Lattice, TimeSeries,
};
use crate::oscillator::{position_distribution_with, Grid, OscillatorParams};
use crate::protocol::QuenchProtocol;

/// Profiles with any station below this effective sample size are flagged.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 10.0;

pub const DEFAULT_PATHS: usize = 100_000;

/// Work samples with their first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    samples: Vec<f64>,
    mean: f64,
    std: f64,
}

impl WorkDistribution {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("samples", "need at least one work sample"));
        }
        let m = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / m;
        let var = samples.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / m;
        Ok(Self {
            samples,
            mean,
            std: var.sqrt(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        self.std
    }

    /// `(W, count)` rows over `bins` equal-width bins.
    pub fn histogram_csv(&self, bins: usize, comments: &[String]) -> String {
        let bins = bins.max(1);
        let lo = self.samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self
            .samples
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo {
            (hi - lo) / bins as f64
        } else {
            1.0
        };
        let mut counts = vec![0u64; bins];
        for w in &self.samples {
            let i = (((w - lo) / width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        let rows: Vec<Vec<f64>> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![lo + (i as f64 + 0.5) * width, *c as f64])
            .collect();
        csv_table(comments, &["W", "count"], &rows)
    }
}

/// `k/2 [(x − λ_{i+1})² − (x − λ_i)²]`.
pub fn oscillator_increment(x: f64, lambda: f64, next: f64, stiffness: f64) -> f64 {
    0.5 * stiffness * ((x - next).powi(2) - (x - lambda).powi(2))
}

/// `V N_b Δλ Σ_i (2λ_i + Δλ − 2x_i)` over the first `s − 1` stations.
pub fn lattice_work(
    xs: &[f64],
    protocol: &QuenchProtocol,
    trap: f64,
    particles: usize,
) -> Result<f64> {
    let steps = protocol.stations() - 1;
    if xs.len() != steps {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinates for {steps} quench steps",
            xs.len()
        )));
    }
    let dl = protocol.step();
    let sum: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, x)| 2.0 * protocol.lambda(i) + dl - 2.0 * x)
        .sum();
    Ok(trap * particles as f64 * dl * sum)
}

/// Exponential-average estimate with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarzynskiEstimate {
    pub delta_f: f64,
    /// `(Σ w)² / Σ w²` with `w = e^{−βW}`.
    pub effective_samples: f64,
    /// Delete-one jackknife standard error of `delta_f`.
    pub jackknife_error: f64,
}

/// `ΔF = −β⁻¹ ln[(1/M) Σ e^{−βW_m}]`, evaluated with the largest exponent
/// factored out.
pub fn free_energy_estimate(works: &WorkDistribution, beta: f64) -> Result<f64> {
    Ok(estimate(works.samples(), beta)?.delta_f)
}

pub fn estimate(samples: &[f64], beta: f64) -> Result<JarzynskiEstimate> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(
            "beta",
            format!("must be positive and finite, got {beta}"),
        ));
    }
    if samples.is_empty() {
        return Err(invalid("samples", "need at least one work sample"));
    }
    let m = samples.len() as f64;
    let shift = samples
        .iter()
        .map(|w| -beta * w)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = samples.iter().map(|w| (-beta * w - shift).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let delta_f = -((sum / m).ln() + shift) / beta;

    let jackknife_error = if samples.len() < 2 {
        0.0
    } else {
        let loo: Vec<f64> = weights
            .iter()
            .map(|w| -(((sum - w).max(f64::MIN_POSITIVE) / (m - 1.0)).ln() + shift) / beta)
            .collect();
        let mean = loo.iter().sum::<f64>() / m;
        let ss: f64 = loo.iter().map(|f| (f - mean) * (f - mean)).sum();
        ((m - 1.0) / m * ss).sqrt()
    };
    Ok(JarzynskiEstimate {
        delta_f,
        effective_samples: sum * sum / sum_sq,
        jackknife_error,
    })
}

/// Cumulative work after each station for every path, row-major
/// `n_paths × (s − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialWorks {
    values: Vec<f64>,
    steps: usize,
}

impl PartialWorks {
    pub fn paths(&self) -> usize {
        self.values.len() / self.steps
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Work accumulated over the first `step + 1` quenches on every path.
    pub fn after(&self, step: usize) -> Vec<f64> {
        self.values
            .chunks(self.steps)
            .map(|row| row[step])
            .collect()
    }
}

/// Draws `n_paths` independent paths. Path `p` uses ChaCha stream `p` of
/// `seed`, so results do not depend on the execution policy.
pub fn sample_partial_works<F>(
    dists: &[PositionDistribution],
    protocol: &QuenchProtocol,
    increment: F,
    n_paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<PartialWorks>
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let steps = protocol.stations() - 1;
    if dists.len() != steps {
        return Err(Error::DimensionMismatch(format!(
            "{} distributions for {steps} quench steps",
            dists.len()
        )));
    }
    if n_paths == 0 {
        return Err(invalid("n_paths", "must be at least 1"));
    }
    let samplers = dists
        .iter()
        .map(|d| d.sampler())
        .collect::<Result<Vec<_>>>()?;
    let lambdas = protocol.lambdas();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n_paths * steps];
    exec.fill_chunks(&mut values, steps * 1024, |start, chunk| {
        for (row_idx, row) in chunk.chunks_mut(steps).enumerate() {
            let path = (start / steps + row_idx) as u64;
            let mut rng = base.clone();
            rng.set_stream(path);
            let mut acc = 0.0;
            for (i, slot) in row.iter_mut().enumerate() {
                let x = samplers[i].sample(rng.random::<f64>());
                acc += increment(x, lambdas[i], lambdas[i + 1]);
                *slot = acc;
            }
        }
    });
    Ok(PartialWorks { values, steps })
}

pub fn sample_work_paths<F>(
    dists: &[PositionDistribution],
    protocol: &QuenchProtocol,
    increment: F,
    n_paths: usize,
    seed: u64,
) -> Result<WorkDistribution>
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let partial = sample_partial_works(dists, protocol, increment, n_paths, seed, Exec::default())?;
    WorkDistribution::new(partial.after(partial.steps() - 1))
}

/// A quench model that supplies per-station distributions, the work rule and
/// the exact free-energy change to compare against.
pub trait QuenchModel: Sync {
    /// `f_i` for stations `i = 1..s−1`.
    fn station_distributions(&self, protocol: &QuenchProtocol)
        -> Result<Vec<PositionDistribution>>;

    fn work_increment(&self, x: f64, lambda: f64, next: f64) -> f64;

    fn target_free_energy(&self, lambda_start: f64, lambda: f64) -> f64;
}

/// Harmonic oscillator driven through the external spring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorModel {
    pub params: OscillatorParams,
    pub exec: Exec,
}

impl OscillatorModel {
    pub fn new(params: OscillatorParams) -> Self {
        Self {
            params,
            exec: Exec::default(),
        }
    }

    /// The station density at `λ = 0`; every other station is this shape
    /// translated to `λ_i/2`.
    pub fn reference_distribution(&self, delta_lambda: f64) -> Result<PositionDistribution> {
        let y = self.params.quench_strength(delta_lambda);
        let grid = Grid::around(&self.params, 0.0, y);
        position_distribution_with(&self.params, 0.0, y, &grid, self.exec)
    }
}

impl QuenchModel for OscillatorModel {
    fn station_distributions(
        &self,
        protocol: &QuenchProtocol,
    ) -> Result<Vec<PositionDistribution>> {
        let base = self.reference_distribution(protocol.step())?;
        Ok((0..protocol.stations() - 1)
            .map(|i| base.shifted(protocol.lambda(i) / 2.0))
            .collect())
    }

    fn work_increment(&self, x: f64, lambda: f64, next: f64) -> f64 {
        oscillator_increment(x, lambda, next, self.params.stiffness())
    }

    /// `k(λ² − λ₁²)/4`.
    fn target_free_energy(&self, lambda_start: f64, lambda: f64) -> f64 {
        self.params.stiffness() * (lambda * lambda - lambda_start * lambda_start) / 4.0
    }
}

/// One station of the lattice protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct StationRun {
    pub lambda: f64,
    pub series: TimeSeries,
    pub histogram: PositionDistribution,
}

/// Hard-core boson lattice driven through the movable trap.
#[derive(Debug)]
pub struct LatticeModel<'a> {
    pub lattice: &'a Lattice,
    pub evolution: EvolutionSettings,
    pub bins: usize,
    pub exec: Exec,
}

impl<'a> LatticeModel<'a> {
    pub fn new(lattice: &'a Lattice) -> Self {
        Self {
            lattice,
            evolution: EvolutionSettings::for_sites(lattice.params().sites),
            bins: 50,
            exec: Exec::default(),
        }
    }

    /// Quench into `λ` from the ground state at `λ − Δλ` and histogram the
    /// center-of-mass trajectory.
    pub fn station(&self, lambda: f64, delta_lambda: f64) -> Result<StationRun> {
        let initial = self.lattice.ground_state(lambda - delta_lambda)?;
        let h = self.lattice.hamiltonian(lambda)?;
        let series = evolve_center_of_mass_with(&initial, &h, &self.evolution, self.exec)?;
        let histogram = time_average_distribution(&series, self.bins)?;
        Ok(StationRun {
            lambda,
            series,
            histogram,
        })
    }

    pub fn station_runs(&self, protocol: &QuenchProtocol) -> Result<Vec<StationRun>> {
        (0..protocol.stations() - 1)
            .map(|i| self.station(protocol.lambda(i), protocol.step()))
            .collect()
    }
}

impl QuenchModel for LatticeModel<'_> {
    fn station_distributions(
        &self,
        protocol: &QuenchProtocol,
    ) -> Result<Vec<PositionDistribution>> {
        Ok(self
            .station_runs(protocol)?
            .into_iter()
            .map(|r| r.histogram)
            .collect())
    }

    /// `V N_b [(x − λ_{i+1})² − (x − λ_i)²]`.
    fn work_increment(&self, x: f64, lambda: f64, next: f64) -> f64 {
        let p = self.lattice.params();
        oscillator_increment(x, lambda, next, 2.0 * p.trap * p.particles as f64)
    }

    fn target_free_energy(&self, lambda_start: f64, lambda: f64) -> f64 {
        self.lattice
            .params()
            .target_free_energy(lambda_start, lambda)
    }
}

/// Cumulative free-energy profile along a protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyProfile {
    pub lambdas: Vec<f64>,
    pub delta_f: Vec<f64>,
    pub target: Vec<f64>,
    pub work_mean: Vec<f64>,
    /// Error bar: standard deviation of the partial work sums.
    pub work_std: Vec<f64>,
    pub effective_samples: Vec<f64>,
    pub jackknife_error: Vec<f64>,
    /// Set when any station has fewer than [`MIN_EFFECTIVE_SAMPLES`].
    pub undersampled: bool,
    /// Total work over the full protocol.
    pub works: WorkDistribution,
}

impl FreeEnergyProfile {
    pub fn to_csv(&self, comments: &[String]) -> String {
        let rows: Vec<Vec<f64>> = (0..self.lambdas.len())
            .map(|i| {
                vec![
                    self.lambdas[i],
                    self.delta_f[i],
                    self.target[i],
                    self.work_std[i],
                    self.effective_samples[i],
                    self.jackknife_error[i],
                ]
            })
            .collect();
        csv_table(
            comments,
            &[
                "lambda",
                "dF_JE",
                "dF_target",
                "work_std",
                "ESS",
                "jackknife_err",
            ],
            &rows,
        )
    }
}

pub fn build_profile<M: QuenchModel>(
    model: &M,
    protocol: &QuenchProtocol,
    beta: f64,
    n_paths: usize,
    seed: u64,
) -> Result<FreeEnergyProfile> {
    let dists = model.station_distributions(protocol)?;
    profile_from_distributions(
        model,
        &dists,
        protocol,
        beta,
        n_paths,
        seed,
        Exec::default(),
    )
}

/// Profile from precomputed station distributions.
pub fn profile_from_distributions<M: QuenchModel>(
    model: &M,
    dists: &[PositionDistribution],
    protocol: &QuenchProtocol,
    beta: f64,
    n_paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<FreeEnergyProfile> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(
            "beta",
            format!("must be positive and finite, got {beta}"),
        ));
    }
    let partial = sample_partial_works(
        dists,
        protocol,
        |x, l, n| model.work_increment(x, l, n),
        n_paths,
        seed,
        exec,
    )?;
    let start = protocol.lambda_start();
    let s = protocol.stations();
    let mut profile = FreeEnergyProfile {
        lambdas: protocol.lambdas(),
        delta_f: vec![0.0; s],
        target: vec![0.0; s],
        work_mean: vec![0.0; s],
        work_std: vec![0.0; s],
        effective_samples: vec![n_paths as f64; s],
        jackknife_error: vec![0.0; s],
        undersampled: false,
        works: WorkDistribution::new(vec![0.0])?,
    };
    for i in 1..s {
        let works = WorkDistribution::new(partial.after(i - 1))?;
        let est = estimate(works.samples(), beta)?;
        profile.delta_f[i] = est.delta_f;
        profile.target[i] = model.target_free_energy(start, protocol.lambda(i));
        profile.work_mean[i] = works.mean();
        profile.work_std[i] = works.std();
        profile.effective_samples[i] = est.effective_samples;
        profile.jackknife_error[i] = est.jackknife_error;
        if i == s - 1 {
            profile.works = works;
        }
    }
    profile.undersampled = profile
        .effective_samples
        .iter()
        .any(|e| *e < MIN_EFFECTIVE_SAMPLES);
    if profile.undersampled {
        log::warn!("free-energy profile has stations with effective sample size below {MIN_EFFECTIVE_SAMPLES}");
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn point_mass(x: f64) -> PositionDistribution {
        PositionDistribution::from_counts(x - 0.5e-9, 1e-9, &[1]).unwrap()
    }

    #[test]
    fn increment_examples() {
        assert_eq!(oscillator_increment(1.3, 2.0, 2.0, 0.5), 0.0);
        assert_eq!(oscillator_increment(1.5, 1.0, 2.0, 0.7), 0.0);
        assert_relative_eq!(oscillator_increment(0.0, 0.0, 0.8, 0.5), 0.8 * 0.8 / 4.0);
    }

    #[test]
    fn lattice_work_examples() {
        let p = QuenchProtocol::new(13.0, 1.0, 2).unwrap();
        assert_relative_eq!(
            lattice_work(&[13.0], &p, 0.0225, 10).unwrap(),
            0.225,
            epsilon = 1e-14
        );
        assert_eq!(lattice_work(&[13.5], &p, 0.0225, 10).unwrap(), 0.0);
        assert!(lattice_work(&[13.0, 14.0], &p, 0.0225, 10).is_err());
        let p = QuenchProtocol::new(13.0, 1.0, 8).unwrap();
        let xs: Vec<f64> = (0..7).map(|i| p.lambda(i) + 0.5).collect();
        assert_eq!(lattice_work(&xs, &p, 0.0225, 10).unwrap(), 0.0);
    }

    #[test]
    fn lattice_work_matches_potential_difference() {
        // U(x, λ) = V N_b (x − λ)² summed per step, same draws
        let p = QuenchProtocol::new(13.0, 1.0, 8).unwrap();
        let xs = [13.1, 13.9, 14.2, 15.3, 15.6, 16.4, 16.1];
        let (v, nb) = (0.0225, 10usize);
        let direct: f64 = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                oscillator_increment(*x, p.lambda(i), p.lambda(i + 1), 2.0 * v * nb as f64)
            })
            .sum();
        assert_relative_eq!(
            lattice_work(&xs, &p, v, nb).unwrap(),
            direct,
            epsilon = 1e-12
        );
    }

    #[test]
    fn estimator_examples() {
        let zeros = WorkDistribution::new(vec![0.0; 10]).unwrap();
        assert_eq!(free_energy_estimate(&zeros, 2.0).unwrap(), 0.0);
        let c = WorkDistribution::new(vec![3.25; 10]).unwrap();
        assert_relative_eq!(
            free_energy_estimate(&c, 0.7).unwrap(),
            3.25,
            epsilon = 1e-14
        );
        assert!(free_energy_estimate(&c, 0.0).is_err());
        assert!(WorkDistribution::new(vec![]).is_err());
    }

    #[test]
    fn estimator_survives_extreme_exponents() {
        let w = WorkDistribution::new(vec![-5000.0, -4990.0, 2000.0]).unwrap();
        let f = free_energy_estimate(&w, 1.0).unwrap();
        assert!(f.is_finite());
        assert_relative_eq!(f, -5000.0 + 3f64.ln(), epsilon = 1e-3);
    }

    #[test]
    fn zero_increment_gives_zero_work() {
        let p = QuenchProtocol::new(0.0, 1.0, 4).unwrap();
        let d = PositionDistribution::from_counts(0.0, 1.0, &[1, 2, 1]).unwrap();
        let w = sample_work_paths(&[d.clone(), d.clone(), d], &p, |_, _, _| 0.0, 100, 1).unwrap();
        assert!(w.samples().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn point_mass_single_station() {
        let p = QuenchProtocol::new(0.0, 0.8, 2).unwrap();
        let w = sample_work_paths(
            &[point_mass(0.3)],
            &p,
            |x, l, n| oscillator_increment(x, l, n, 0.5),
            50,
            9,
        )
        .unwrap();
        let want = oscillator_increment(0.3, 0.0, 0.8, 0.5);
        assert!(w.samples().iter().all(|x| (x - want).abs() < 1e-9));
    }

    #[test]
    fn dimension_and_normalization_errors() {
        let p = QuenchProtocol::new(0.0, 1.0, 3).unwrap();
        let d = PositionDistribution::from_counts(0.0, 1.0, &[1]).unwrap();
        assert!(sample_work_paths(std::slice::from_ref(&d), &p, |_, _, _| 0.0, 10, 0).is_err());
        let bad = PositionDistribution::from_samples(0.0, 1.0, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            sample_work_paths(&[d, bad], &p, |_, _, _| 0.0, 10, 0),
            Err(Error::UnnormalizedDistribution { .. })
        ));
    }

    #[test]
    fn deterministic_and_policy_independent() {
        let model = OscillatorModel::new(OscillatorParams::default());
        let p = QuenchProtocol::new(0.0, 0.6935, 6).unwrap();
        let dists = model.station_distributions(&p).unwrap();
        let inc = |x, l, n| model.work_increment(x, l, n);
        let a = sample_partial_works(&dists, &p, inc, 5000, 42, Exec::Sequential).unwrap();
        let b = sample_partial_works(&dists, &p, inc, 5000, 42, Exec::Parallel).unwrap();
        let c = sample_partial_works(&dists, &p, inc, 5000, 43, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // prefixes agree: path p does not depend on the path count
        let d = sample_partial_works(&dists, &p, inc, 1234, 42, Exec::Parallel).unwrap();
        assert_eq!(d.after(2)[..], a.after(2)[..1234]);
    }

    #[test]
    fn oscillator_jensen_and_trend() {
        let params = OscillatorParams::default();
        let model = OscillatorModel::new(params);
        let dl = 0.6935;
        let p = QuenchProtocol::new(0.0, dl, 11).unwrap();
        let beta = 1.0 / 0.35;
        let profile = build_profile(&model, &p, beta, 20_000, 7).unwrap();
        assert_eq!(profile.delta_f[0], 0.0);
        for i in 1..11 {
            assert!(profile.delta_f[i] <= profile.work_mean[i]);
            assert!(profile.work_std[i] > 0.0);
        }
        // independent draws: ⟨e^{−βW}⟩ factorizes into one moment generating
        // function per station, M(t) = ∫ f₀(x) e^{tx} dx shifted by λ_j/2
        let k = params.stiffness();
        let t = beta * k * dl;
        let f0 = model.reference_distribution(dl).unwrap();
        let ln_m = f0.expectation(|x| (t * x).exp()).ln();
        for i in [1, 5, 10] {
            let exact: f64 = (0..i)
                .map(|j| {
                    let (l, n) = (p.lambda(j), p.lambda(j + 1));
                    0.5 * k * (n * n - l * l) - k * dl * l / 2.0 - ln_m / beta
                })
                .sum();
            let tol = 4.0 * profile.jackknife_error[i] + 1e-4;
            assert!(
                (profile.delta_f[i] - exact).abs() < tol,
                "{i}: {} vs {exact}",
                profile.delta_f[i]
            );
        }
        assert!(!profile.undersampled);
        let csv = profile.to_csv(&[]);
        assert!(csv.starts_with("lambda,dF_JE,dF_target,work_std,ESS,jackknife_err\n"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn high_temperature_profile_sits_above_target() {
        let model = OscillatorModel::new(OscillatorParams::default());
        let p = QuenchProtocol::new(0.0, 4.0, 6).unwrap();
        let profile = build_profile(&model, &p, 1.0 / 3.52, 20_000, 3).unwrap();
        for i in 1..6 {
            assert!(profile.delta_f[i] > profile.target[i], "{i}");
        }
    }

    #[test]
    fn histogram_output() {
        let w = WorkDistribution::new(vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let csv = w.histogram_csv(2, &[]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "W,count");
        assert_eq!(lines.len(), 3);
    }

    proptest! {
        #[test]
        fn estimator_invariants(ws in prop::collection::vec(-20.0f64..20.0, 1..200), c in -50.0f64..50.0, beta in 0.05f64..5.0) {
            let w = WorkDistribution::new(ws.clone()).unwrap();
            let f = free_energy_estimate(&w, beta).unwrap();
            prop_assert!(f <= w.mean() + 1e-9);
            let shifted = WorkDistribution::new(ws.iter().map(|x| x + c).collect()).unwrap();
            let fs = free_energy_estimate(&shifted, beta).unwrap();
            prop_assert!((fs - f - c).abs() < 1e-9);
            let est = estimate(&ws, beta).unwrap();
            prop_assert!(est.effective_samples >= 1.0 - 1e-9 && est.effective_samples <= ws.len() as f64 + 1e-9);
            prop_assert!(est.jackknife_error >= 0.0);
        }
    }
}
