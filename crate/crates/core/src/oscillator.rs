//! Sudden displacement quench of a harmonic oscillator held between a fixed
//! spring at the origin and a movable spring at `λ`.
//!
//! `H(λ) = p²/2m + k x²/2 + k(x − λ)²/2 = ħω(a†a + 1/2) + kλ²/4` with
//! `ω = √(2k/m)` and minimum at `λ/2`. Starting from the ground state of
//! `H(λ − Δλ)`, the post-quench occupations are Poisson with mean
//! `y = mωΔλ²/(8ħ)`.

use crate::distribution::PositionDistribution;
use crate::ensemble::DiagonalEnsemble;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::protocol::QuenchProtocol;

/// Hard cap on retained Poisson levels.
pub const MAX_LEVELS: usize = 200;

/// Default truncation tail for [`poisson_ensemble`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    mass: f64,
    stiffness: f64,
    hbar: f64,
}

impl Default for OscillatorParams {
    /// `m = ħ = 1`, `k = 1/2`, so `ω = 1`.
    fn default() -> Self {
        Self {
            mass: 1.0,
            stiffness: 0.5,
            hbar: 1.0,
        }
    }
}

impl OscillatorParams {
    pub fn new(mass: f64, stiffness: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("stiffness", stiffness), ("hbar", hbar)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(Self {
            mass,
            stiffness,
            hbar,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Stiffness `k` of each of the two springs.
    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega(&self) -> f64 {
        (2.0 * self.stiffness / self.mass).sqrt()
    }

    /// `ħω`.
    pub fn quantum(&self) -> f64 {
        self.hbar * self.omega()
    }

    /// Ground-state length `√(ħ/mω)`.
    pub fn length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega())).sqrt()
    }

    /// Poisson mean `y = mωΔλ²/(8ħ)` of a quench by `delta_lambda`.
    pub fn quench_strength(&self, delta_lambda: f64) -> f64 {
        self.mass * self.omega() * delta_lambda * delta_lambda / (8.0 * self.hbar)
    }

    /// Inverse of [`quench_strength`](Self::quench_strength), non-negative branch.
    pub fn delta_lambda_for(&self, y: f64) -> f64 {
        (8.0 * self.hbar * y / (self.mass * self.omega())).sqrt()
    }

    /// `E_n(λ) = ħω(n + 1/2) + kλ²/4`.
    pub fn level(&self, n: usize, lambda: f64) -> f64 {
        self.quantum() * (n as f64 + 0.5) + self.stiffness * lambda * lambda / 4.0
    }

    /// External spring energy `U(x, λ) = k(x − λ)²/2`.
    pub fn coupling(&self, x: f64, lambda: f64) -> f64 {
        0.5 * self.stiffness * (x - lambda) * (x - lambda)
    }
}

/// Poisson weights `e^{−y} yⁿ/n!` for `n = 0..=n_max`, where `n_max` is the
/// first level past which the remaining mass is below `tail_tol` (or
/// [`MAX_LEVELS`]). Returns the weights and the discarded tail.
pub fn poisson_weights(y: f64, tail_tol: f64) -> (Vec<f64>, f64) {
    if y == 0.0 {
        return (vec![1.0], 0.0);
    }
    let ln_y = y.ln();
    let mut probs = Vec::new();
    let mut ln_fact = 0.0;
    let mut acc = 0.0;
    for n in 0..MAX_LEVELS {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let p = (-y + n as f64 * ln_y - ln_fact).exp();
        probs.push(p);
        acc += p;
        if n as f64 >= y && 1.0 - acc < tail_tol {
            break;
        }
    }
    (probs, (1.0 - acc).max(0.0))
}

/// Diagonal ensemble of `H(λ)` after a quench of size `delta_lambda` from the
/// ground state of `H(λ − Δλ)`.
pub fn poisson_ensemble(
    params: &OscillatorParams,
    lambda: f64,
    delta_lambda: f64,
    tail_tol: f64,
) -> Result<DiagonalEnsemble> {
    if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
        return Err(invalid(
            "tail_tol",
            format!("must lie in (0, 1e-6], got {tail_tol}"),
        ));
    }
    let y = params.quench_strength(delta_lambda);
    let (probs, tail) = poisson_weights(y, tail_tol);
    let energies = (0..probs.len()).map(|n| params.level(n, lambda)).collect();
    Ok(DiagonalEnsemble::new(
        energies,
        probs,
        format!("oscillator λ={lambda}, Δλ={delta_lambda}, y={y}"),
    )?
    .with_quench(lambda, delta_lambda)
    .with_tail_mass(tail))
}

/// `S(y) = y − y ln y + e^{−y} Σ_n yⁿ ln(n!)/n!`.
pub fn entropy_closed_form(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let ln_y = y.ln();
    let mut ln_fact = 0.0;
    let mut series = 0.0;
    let mut n = 0usize;
    loop {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let term = (-y + n as f64 * ln_y - ln_fact).exp() * ln_fact;
        series += term;
        if n >= 2 && n as f64 > y && term < SERIES_TOL {
            break;
        }
        n += 1;
        if n > 100_000 {
            break;
        }
    }
    y - y * ln_y + series
}

/// `dS/dy = e^{−y} Σ_{n≥0} yⁿ [ln(n+1) − ln y]/n!`.
pub fn entropy_derivative(y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(invalid("y", format!("must be positive, got {y}")));
    }
    let ln_y = y.ln();
    let mut ln_fact = 0.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let weight = (-y + n as f64 * ln_y - ln_fact).exp();
        let term = weight * (((n + 1) as f64).ln() - ln_y);
        sum += term;
        if n as f64 > y && weight < SERIES_TOL {
            break;
        }
        n += 1;
        if n > 100_000 {
            break;
        }
    }
    Ok(sum)
}

/// Characteristic temperature `T = ħω / (dS/dy)` of the Poisson ensemble.
pub fn temperature_closed_form(params: &OscillatorParams, y: f64) -> Result<f64> {
    Ok(params.quantum() / entropy_derivative(y)?)
}

/// Temperature and entropy of an oscillator in a heat bath with mean
/// occupation `n̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonReference {
    pub temperature: f64,
    pub entropy: f64,
}

pub fn boson_reference(params: &OscillatorParams, n_bar: f64) -> Result<BosonReference> {
    if !(n_bar > 0.0) || !n_bar.is_finite() {
        return Err(invalid("n_bar", format!("must be positive, got {n_bar}")));
    }
    Ok(BosonReference {
        temperature: params.quantum() / (1.0 / n_bar).ln_1p(),
        entropy: (1.0 + n_bar) * n_bar.ln_1p() - n_bar * n_bar.ln(),
    })
}

/// One row of the diagonal-versus-canonical comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumComparison {
    pub y: f64,
    pub temperature: f64,
    pub boson_temperature: f64,
    pub entropy: f64,
    pub boson_entropy: f64,
}

pub fn compare_with_boson(params: &OscillatorParams, y: f64) -> Result<EquilibriumComparison> {
    let reference = boson_reference(params, y)?;
    Ok(EquilibriumComparison {
        y,
        temperature: temperature_closed_form(params, y)?,
        boson_temperature: reference.temperature,
        entropy: entropy_closed_form(y),
        boson_entropy: reference.entropy,
    })
}

/// Uniform grid for [`position_distribution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if points < 2 || !(end > start) {
            return Err(invalid("grid", "need end > start and at least two points"));
        }
        Ok(Self { start, end, points })
    }

    /// A grid centred on `λ/2` that covers the classical turning point of the
    /// highest retained level plus eight ground-state widths, with 100 points
    /// per width.
    pub fn around(params: &OscillatorParams, lambda: f64, y: f64) -> Self {
        let (probs, _) = poisson_weights(y, DEFAULT_TAIL_TOL);
        let n_max = probs.len() as f64;
        let ell = params.length();
        let half = ell * (8.0 + (2.0 * n_max + 1.0).sqrt());
        let points = (2.0 * half / (ell / 100.0)).ceil() as usize + 1;
        Self {
            start: lambda / 2.0 - half,
            end: lambda / 2.0 + half,
            points,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.points - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing()
    }
}

/// Normalized Hermite functions `φ_0(ξ)..=φ_{n_max}(ξ)` written into `out`
/// via the three-term recurrence
/// `φ_n = √(2/n) ξ φ_{n−1} − √((n−1)/n) φ_{n−2}`.
pub fn hermite_functions(xi: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * xi * out[0];
    }
    for n in 2..out.len() {
        let nf = n as f64;
        out[n] = (2.0 / nf).sqrt() * xi * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
    }
}

/// Time-averaged position density `f(x) = Σ_n p_n |⟨x|n_λ⟩|²`.
pub fn position_distribution(
    params: &OscillatorParams,
    lambda: f64,
    y: f64,
    grid: &Grid,
) -> Result<PositionDistribution> {
    position_distribution_with(params, lambda, y, grid, Exec::default())
}

pub fn position_distribution_with(
    params: &OscillatorParams,
    lambda: f64,
    y: f64,
    grid: &Grid,
    exec: Exec,
) -> Result<PositionDistribution> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(invalid("y", format!("must be non-negative, got {y}")));
    }
    let (probs, _) = poisson_weights(y, DEFAULT_TAIL_TOL);
    let ell = params.length();
    let center = lambda / 2.0;
    let h = grid.spacing();
    let mut density = vec![0.0; grid.points];
    exec.fill_chunks(&mut density, 512, |start, chunk| {
        let mut phi = vec![0.0; probs.len()];
        for (j, f) in chunk.iter_mut().enumerate() {
            let xi = (grid.x(start + j) - center) / ell;
            hermite_functions(xi, &mut phi);
            *f = probs.iter().zip(&phi).map(|(p, v)| p * v * v).sum::<f64>() / ell;
        }
    });
    let dist = PositionDistribution::from_samples(grid.start, h, density)?;
    let mass = dist.mass();
    let required = 1.0 - 1e-4;
    if mass < required {
        return Err(Error::GridTooNarrow { mass, required });
    }
    // absorb the truncated Poisson tail and quadrature error
    let scaled: Vec<f64> = dist.density().iter().map(|f| f / mass).collect();
    PositionDistribution::from_samples(grid.start, h, scaled)
}

/// Small-`y` expansion of the free-energy change over a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowTemperatureFreeEnergy {
    /// `ΔF_target + ΔF_can + k(s−1)Δλ²/4 · T/ħω`.
    pub full: f64,
    /// `k(s−1)²Δλ²/4`.
    pub target: f64,
    /// `ΔF_target + k(s−1)Δλ²/4 · (1 − ħω/2T)`.
    pub canonical: f64,
}

pub fn free_energy_low_temperature(
    params: &OscillatorParams,
    protocol: &QuenchProtocol,
    temperature: f64,
) -> Result<LowTemperatureFreeEnergy> {
    if !(temperature > 0.0) {
        return Err(invalid(
            "temperature",
            format!("must be positive, got {temperature}"),
        ));
    }
    let steps = (protocol.stations() - 1) as f64;
    let dl2 = protocol.step() * protocol.step();
    let k = params.stiffness();
    let hw = params.quantum();
    let target = k * steps * steps * dl2 / 4.0;
    let linear = k * steps * dl2 / 4.0;
    let canonical = target + linear * (1.0 - hw / (2.0 * temperature));
    let full = canonical + linear * temperature / hw;
    Ok(LowTemperatureFreeEnergy {
        full,
        target,
        canonical,
    })
}

/// `T/ħω = (√3 − 1)/2`, where the last two terms of the expansion cancel.
pub fn cancellation_temperature(params: &OscillatorParams) -> f64 {
    params.quantum() * (3f64.sqrt() - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{entropy, mean_energy, temperature_from_pair};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> OscillatorParams {
        OscillatorParams::default()
    }

    /// Plain `−Σ p ln p` over Poisson weights built with independent
    /// factorials (f64 Γ via iterated product), truncated far out.
    fn direct_entropy(y: f64) -> f64 {
        let mut s = 0.0;
        let mut p = (-y).exp();
        for n in 0..400 {
            if n > 0 {
                p *= y / n as f64;
            }
            if p > 0.0 {
                s -= p * p.ln();
            }
        }
        s
    }

    #[test]
    fn unit_system() {
        let p = unit();
        assert_eq!(p.omega(), 1.0);
        assert_eq!(p.quantum(), 1.0);
        assert_eq!(p.length(), 1.0);
        assert!(OscillatorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn no_quench_is_pure() {
        let e = poisson_ensemble(&unit(), 3.0, 0.0, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(e.probs(), &[1.0]);
        assert_eq!(entropy(&e).unwrap(), 0.0);
        assert_eq!(entropy_closed_form(0.0), 0.0);
    }

    #[test]
    fn small_quench_ground_weight() {
        let y = unit().quench_strength(0.6935);
        assert_relative_eq!(y, 0.06011778125, epsilon = 1e-12);
        let e = poisson_ensemble(&unit(), 0.0, 0.6935, DEFAULT_TAIL_TOL).unwrap();
        assert_relative_eq!(e.probs()[0], (-y).exp(), epsilon = 1e-15);
        assert!((e.probs()[0] - 0.94165).abs() < 5e-5);
    }

    #[test]
    fn poisson_mean_is_y() {
        let e = poisson_ensemble(&unit(), 0.0, 4.0, DEFAULT_TAIL_TOL).unwrap();
        let mean: f64 = e
            .probs()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum();
        assert_relative_eq!(mean, 2.0, epsilon = 1e-10);
        assert!(e.tail_mass() < DEFAULT_TAIL_TOL);
    }

    #[test]
    fn tail_tolerance_bounds() {
        assert!(poisson_ensemble(&unit(), 0.0, 1.0, 0.0).is_err());
        assert!(poisson_ensemble(&unit(), 0.0, 1.0, 1e-5).is_err());
    }

    #[test]
    fn mean_energy_closed_form() {
        let p = OscillatorParams::new(1.3, 0.7, 0.9).unwrap();
        for (lambda, dl) in [(0.0, 1.0), (2.0, 0.5), (-1.0, 3.0)] {
            let e = poisson_ensemble(&p, lambda, dl, DEFAULT_TAIL_TOL).unwrap();
            let y = p.quench_strength(dl);
            let expect = p.quantum() * (y + 0.5) + p.stiffness() * lambda * lambda / 4.0;
            assert_relative_eq!(mean_energy(&e).unwrap(), expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn closed_form_entropy_matches_direct_sum() {
        for y in [0.01, 0.06, 0.5, 2.0, 7.5] {
            assert_relative_eq!(entropy_closed_form(y), direct_entropy(y), epsilon = 1e-10);
        }
        let e =
            poisson_ensemble(&unit(), 0.0, unit().delta_lambda_for(2.0), DEFAULT_TAIL_TOL).unwrap();
        assert_relative_eq!(
            entropy(&e).unwrap(),
            entropy_closed_form(2.0),
            epsilon = 1e-10
        );
    }

    #[test]
    fn truncation_changes_entropy_negligibly() {
        let y = 3.0;
        let (short, tail) = poisson_weights(y, 1e-12);
        assert!(tail < 1e-12);
        let e = DiagonalEnsemble::new(vec![0.0; short.len()], short.clone(), "").unwrap();
        let s_short = entropy(&crate::ensemble::renormalize(&e).unwrap()).unwrap();
        let mut long = short;
        let mut p = *long.last().unwrap();
        let n0 = long.len();
        for n in n0..n0 + 20 {
            p *= y / n as f64;
            long.push(p);
        }
        let e = DiagonalEnsemble::new(vec![0.0; long.len()], long, "").unwrap();
        let s_long = entropy(&crate::ensemble::renormalize(&e).unwrap()).unwrap();
        assert!((s_short - s_long).abs() < 1e-10);
    }

    #[test]
    fn derivative_matches_finite_difference_of_entropy() {
        for y in [0.01, 0.06, 0.5, 2.0, 6.0] {
            let h = 1e-5 * y;
            let fd = (entropy_closed_form(y + h) - entropy_closed_form(y - h)) / (2.0 * h);
            assert_relative_eq!(entropy_derivative(y).unwrap(), fd, max_relative = 1e-7);
        }
        assert!(entropy_derivative(0.0).is_err());
        assert!(temperature_closed_form(&unit(), -1.0).is_err());
    }

    #[test]
    fn temperature_anchor_values() {
        let t = temperature_closed_form(&unit(), 0.06).unwrap();
        assert!((t - 0.35).abs() <= 0.005, "{t}");
        let t = temperature_closed_form(&unit(), 2.0).unwrap();
        assert!((t - 3.52).abs() <= 0.01, "{t}");
    }

    fn pair_temperature(y: f64, eps: f64) -> f64 {
        let p = unit();
        let a = poisson_ensemble(&p, 0.0, p.delta_lambda_for(y), DEFAULT_TAIL_TOL).unwrap();
        let b = poisson_ensemble(&p, 0.0, p.delta_lambda_for(y + eps), DEFAULT_TAIL_TOL).unwrap();
        temperature_from_pair(&a, &b).unwrap().temperature
    }

    #[test]
    fn pair_temperature_near_closed_form() {
        let t = pair_temperature(0.06, 0.006);
        assert!((t - 0.35).abs() / 0.35 < 0.03, "{t}");
    }

    #[test]
    fn richardson_extrapolated_pair_matches_closed_form() {
        let y = 0.01;
        let eps = 1e-3;
        let t1 = pair_temperature(y, eps);
        let t2 = pair_temperature(y, eps / 2.0);
        let extrapolated = 2.0 * t2 - t1;
        let exact = temperature_closed_form(&unit(), y).unwrap();
        assert!((extrapolated - exact).abs() / exact < 0.01);
    }

    #[test]
    fn pair_error_shrinks_at_least_linearly() {
        for y in [0.06, 0.5, 2.0] {
            let exact = temperature_closed_form(&unit(), y).unwrap();
            let mut eps = 0.1 * y;
            let mut prev = (pair_temperature(y, eps) - exact).abs();
            for _ in 0..4 {
                eps /= 2.0;
                let err = (pair_temperature(y, eps) - exact).abs();
                assert!(err <= 0.55 * prev, "y={y} eps={eps}: {err} vs {prev}");
                prev = err;
            }
        }
    }

    #[test]
    fn boson_reference_values() {
        let r = boson_reference(&unit(), 1.0).unwrap();
        assert_relative_eq!(r.temperature, 1.0 / std::f64::consts::LN_2, epsilon = 1e-14);
        assert_relative_eq!(r.entropy, 2.0 * std::f64::consts::LN_2, epsilon = 1e-14);
        let r = boson_reference(&unit(), 0.06).unwrap();
        assert!((r.temperature - 0.348).abs() < 5e-4);
        let r = boson_reference(&unit(), 1e-12).unwrap();
        assert!(r.temperature < 0.04 && r.entropy < 1e-10);
        assert!(boson_reference(&unit(), 0.0).is_err());
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 60;
        let h = 0.005;
        let mut gram = vec![0.0; n * n];
        let mut phi = vec![0.0; n];
        let mut x = -16.0;
        while x <= 16.0 {
            hermite_functions(x, &mut phi);
            for a in 0..n {
                for b in 0..n {
                    gram[a * n + b] += phi[a] * phi[b] * h;
                }
            }
            x += h;
        }
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * n + b] - want).abs() < 1e-9, "{a},{b}");
            }
        }
        // stays finite far past n = 50
        let mut big = vec![0.0; 201];
        hermite_functions(12.0, &mut big);
        assert!(big.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ground_state_density() {
        let p = unit();
        let grid = Grid::around(&p, 0.0, 0.0);
        let d = position_distribution(&p, 0.0, 0.0, &grid).unwrap();
        for (x, f) in d.grid().iter().zip(d.density()).step_by(97) {
            let g = (-x * x).exp() / std::f64::consts::PI.sqrt();
            assert!((f - g).abs() < 1e-12);
        }
        assert_eq!(d.local_maxima(), 1);
    }

    #[test]
    fn density_moments() {
        let p = OscillatorParams::new(2.0, 0.8, 0.5).unwrap();
        for (lambda, y) in [(0.0, 0.06), (1.5, 0.5), (-2.0, 2.0)] {
            let grid = Grid::around(&p, lambda, y);
            let d = position_distribution(&p, lambda, y, &grid).unwrap();
            assert!((d.mass() - 1.0).abs() < 1e-6);
            assert!((d.mean() - lambda / 2.0).abs() < 1e-6);
            // dephased coherent state: <(x − λ/2)²> = ℓ²(1 + 2y)/2
            let ell2 = p.length() * p.length();
            assert_relative_eq!(
                d.variance(),
                ell2 * (1.0 + 2.0 * y) / 2.0,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn peak_count_changes_with_quench() {
        let p = unit();
        let d = position_distribution(&p, 0.0, 0.06, &Grid::around(&p, 0.0, 0.06)).unwrap();
        assert_eq!(d.local_maxima(), 1);
        let d = position_distribution(&p, 0.0, 2.0, &Grid::around(&p, 0.0, 2.0)).unwrap();
        assert_eq!(d.local_maxima(), 2);
    }

    #[test]
    fn narrow_grid_rejected() {
        let p = unit();
        let grid = Grid::new(-1.0, 1.0, 201).unwrap();
        assert!(matches!(
            position_distribution(&p, 0.0, 0.06, &grid),
            Err(Error::GridTooNarrow { .. })
        ));
    }

    #[test]
    fn parallel_and_sequential_densities_identical() {
        let p = unit();
        let grid = Grid::around(&p, 1.0, 2.0);
        let a = position_distribution_with(&p, 1.0, 2.0, &grid, Exec::Sequential).unwrap();
        let b = position_distribution_with(&p, 1.0, 2.0, &grid, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn low_temperature_expansion() {
        let p = unit();
        let flat = QuenchProtocol::new(0.0, 0.0, 2).unwrap();
        let f = free_energy_low_temperature(&p, &flat, 0.35).unwrap();
        assert_eq!((f.full, f.target, f.canonical), (0.0, 0.0, 0.0));
        let proto = QuenchProtocol::new(0.0, 0.6935, 11).unwrap();
        let f = free_energy_low_temperature(&p, &proto, cancellation_temperature(&p)).unwrap();
        assert_relative_eq!(f.full, f.target, epsilon = 1e-12);
        assert!(free_energy_low_temperature(&p, &proto, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn entropy_below_canonical(y in 0.001f64..10.0) {
            let s = entropy_closed_form(y);
            let b = boson_reference(&unit(), y).unwrap();
            prop_assert!(s <= b.entropy + 1e-12);
        }

        #[test]
        fn temperature_above_canonical(y in 0.001f64..10.0) {
            let t = temperature_closed_form(&unit(), y).unwrap();
            let b = boson_reference(&unit(), y).unwrap();
            prop_assert!(t >= b.temperature);
        }

        #[test]
        fn temperature_monotone(y in 0.001f64..10.0, dy in 1e-4f64..1.0) {
            let p = unit();
            prop_assert!(temperature_closed_form(&p, y + dy).unwrap() > temperature_closed_form(&p, y).unwrap());
        }

        #[test]
        fn cancellation_for_any_protocol(s in 2usize..50, dl in 0.0f64..5.0) {
            let p = unit();
            let proto = QuenchProtocol::new(0.0, dl, s).unwrap();
            let f = free_energy_low_temperature(&p, &proto, cancellation_temperature(&p)).unwrap();
            prop_assert!((f.full - f.target).abs() <= 1e-12 * f.target.max(1.0));
        }
    }

    #[test]
    fn ratio_limits() {
        let p = unit();
        let small = temperature_closed_form(&p, 1e-3).unwrap()
            / boson_reference(&p, 1e-3).unwrap().temperature;
        assert!((small - 1.0).abs() < 1e-3);
        // large-y growth T ~ 2y
        let t = temperature_closed_form(&p, 50.0).unwrap();
        assert!((t / (2.0 * 50.0) - 1.0).abs() < 0.05, "{t}");
    }
}
