//! Diagonal ensembles of the lattice by particle-hole enumeration.
//!
//! Many-body eigenstates of `H(λ)` are `N_b`-subsets of its orbitals. They are
//! generated rank by rank (number of holes in the Fermi sea), sorted by energy
//! within a rank, and kept until the captured probability reaches
//! `1 − prob_cutoff` or `max_states` states are held.

use crate::ensemble::DiagonalEnsemble;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;

use super::slater::det_in_place;
use super::{Lattice, SingleParticleSpectrum};

pub const DEFAULT_PROB_CUTOFF: f64 = 1e-8;
pub const DEFAULT_MAX_STATES: usize = 2_000_000;

/// Captured mass below this at `max_states` is a convergence failure.
pub const MIN_CAPTURED_MASS: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub prob_cutoff: f64,
    pub max_states: usize,
    pub exec: Exec,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            prob_cutoff: DEFAULT_PROB_CUTOFF,
            max_states: DEFAULT_MAX_STATES,
            exec: Exec::default(),
        }
    }
}

/// A lattice diagonal ensemble with the occupations of each retained state.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEnsemble {
    pub ensemble: DiagonalEnsemble,
    /// Bit `α` set when orbital `α` of `H(λ)` is occupied.
    pub occupations: Vec<u128>,
    /// Probability captured before renormalization.
    pub captured_mass: f64,
    /// Highest particle-hole rank visited.
    pub max_rank: usize,
}

impl LatticeEnsemble {
    /// `⟨E_n| x̂ |E_n⟩` for every retained state, `x̂ = Σ_k k n̂_k / N_b`.
    pub fn center_of_mass_expectations(&self, spectrum: &SingleParticleSpectrum) -> Vec<f64> {
        let u = spectrum.vectors();
        let n = u.nrows();
        let orbital_com: Vec<f64> = (0..n)
            .map(|a| (0..n).map(|k| (k + 1) as f64 * u[(k, a)] * u[(k, a)]).sum())
            .collect();
        self.occupations
            .iter()
            .map(|mask| {
                let (sum, count) = (0..n)
                    .filter(|a| mask >> a & 1 == 1)
                    .fold((0.0, 0usize), |(s, c), a| (s + orbital_com[a], c + 1));
                sum / count as f64
            })
            .collect()
    }
}

pub fn diagonal_ensemble(
    lattice: &Lattice,
    lambda: f64,
    delta_lambda: f64,
    prob_cutoff: f64,
    max_states: usize,
) -> Result<LatticeEnsemble> {
    diagonal_ensemble_with(
        lattice,
        lambda,
        delta_lambda,
        &EnsembleOptions {
            prob_cutoff,
            max_states,
            exec: Exec::default(),
        },
    )
}

pub fn diagonal_ensemble_with(
    lattice: &Lattice,
    lambda: f64,
    delta_lambda: f64,
    options: &EnsembleOptions,
) -> Result<LatticeEnsemble> {
    let cutoff = options.prob_cutoff;
    if !(0.0..=1e-6).contains(&cutoff) {
        return Err(invalid(
            "prob_cutoff",
            format!("must lie in [0, 1e-6], got {cutoff}"),
        ));
    }
    if options.max_states == 0 {
        return Err(invalid("max_states", "must be at least 1"));
    }
    let params = lattice.params();
    let n = params.sites;
    let nb = params.particles;
    let target = 1.0 - cutoff;

    let initial = lattice.ground_state(lambda - delta_lambda)?;
    let h = lattice.hamiltonian(lambda)?;
    let eps = h.spectrum().values();
    let u = h.spectrum().vectors();

    // overlap[α][b] = ⟨orbital α of H(λ) | initial orbital b⟩, row-major N × N_b
    let p0 = initial.orbitals();
    let mut overlap = vec![0.0; n * nb];
    for a in 0..n {
        for b in 0..nb {
            overlap[a * nb + b] = (0..n).map(|k| u[(k, a)] * p0[(k, b)].re).sum();
        }
    }
    let ground_energy: f64 = eps[..nb].iter().sum();
    let ground_mask: u128 = (0..nb).fold(0, |m, a| m | 1u128 << a);

    let mut energies = Vec::new();
    let mut probs = Vec::new();
    let mut occupations = Vec::new();
    let mut cumulative = 0.0;
    let mut max_rank = 0;
    let max_rank_possible = nb.min(n - nb);

    'ranks: for rank in 0..=max_rank_possible {
        let holes = combinations(nb, rank);
        let particles: Vec<Vec<usize>> = combinations(n - nb, rank)
            .into_iter()
            .map(|c| c.into_iter().map(|i| i + nb).collect())
            .collect();
        let size = holes.len().saturating_mul(particles.len());
        if size > options.max_states.saturating_mul(4) {
            log::warn!(
                "rank {rank} has {size} states, beyond the enumeration budget; stopping at captured mass {cumulative}"
            );
            break;
        }
        max_rank = rank;
        let np = particles.len();
        let mut states = vec![(0u128, 0.0f64, 0.0f64); size];
        options.exec.fill_chunks(&mut states, 2048, |start, chunk| {
            let mut buf = vec![0.0; nb * nb];
            let mut occ = Vec::with_capacity(nb);
            for (j, slot) in chunk.iter_mut().enumerate() {
                let idx = start + j;
                let (hole, part) = (&holes[idx / np], &particles[idx % np]);
                let mut mask = ground_mask;
                let mut energy = ground_energy;
                for &a in hole {
                    mask &= !(1u128 << a);
                    energy -= eps[a];
                }
                for &a in part {
                    mask |= 1u128 << a;
                    energy += eps[a];
                }
                occ.clear();
                occ.extend((0..n).filter(|a| mask >> a & 1 == 1));
                for (r, &a) in occ.iter().enumerate() {
                    buf[r * nb..(r + 1) * nb].copy_from_slice(&overlap[a * nb..(a + 1) * nb]);
                }
                let det = det_in_place(&mut buf, nb);
                *slot = (mask, energy, det * det);
            }
        });
        states.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        for (mask, energy, p) in states {
            occupations.push(mask);
            energies.push(energy);
            probs.push(p);
            cumulative += p;
            if cumulative >= target || occupations.len() >= options.max_states {
                break 'ranks;
            }
        }
    }

    if cumulative < MIN_CAPTURED_MASS {
        return Err(Error::Convergence(format!(
            "diagonal ensemble at λ={lambda}, Δλ={delta_lambda} captured {cumulative} after {} states (max rank {max_rank})",
            occupations.len()
        )));
    }
    if cumulative < target {
        log::warn!(
            "diagonal ensemble at λ={lambda}, Δλ={delta_lambda} stopped at captured mass {cumulative} < {target}"
        );
    }
    let probs: Vec<f64> = probs.iter().map(|p| (p / cumulative).min(1.0)).collect();
    let ensemble = DiagonalEnsemble::new(
        energies,
        probs,
        format!("lattice λ={lambda}, Δλ={delta_lambda}"),
    )?
    .with_quench(lambda, delta_lambda)
    .with_tail_mass((1.0 - cumulative).max(0.0));
    Ok(LatticeEnsemble {
        ensemble,
        occupations,
        captured_mass: cumulative,
        max_rank,
    })
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still advance
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
