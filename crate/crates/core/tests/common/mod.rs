//! Dense hard-core boson reference: occupation-number basis, exact
//! diagonalization, no fermion mapping.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use quench_thermo::LatticeParams;

pub struct Fock {
    pub sites: usize,
    /// Occupied sites of each basis configuration, 0-based.
    pub basis: Vec<Vec<usize>>,
}

impl Fock {
    pub fn new(sites: usize, particles: usize) -> Self {
        let mut basis = Vec::new();
        for mask in 0u32..(1 << sites) {
            if mask.count_ones() as usize == particles {
                basis.push((0..sites).filter(|k| mask >> k & 1 == 1).collect());
            }
        }
        Self { sites, basis }
    }

    fn index(&self, occ: &[usize]) -> usize {
        self.basis.iter().position(|b| b == occ).unwrap()
    }

    pub fn hamiltonian(&self, p: &LatticeParams, lambda: f64) -> DMatrix<f64> {
        let d = self.basis.len();
        let mut h = DMatrix::zeros(d, d);
        for (i, occ) in self.basis.iter().enumerate() {
            h[(i, i)] = occ
                .iter()
                .map(|&k| {
                    let site = (k + 1) as f64;
                    p.trap * ((site - p.center).powi(2) + (site - lambda).powi(2))
                })
                .sum();
            // nearest-neighbour hops between distinct configurations
            for &k in occ {
                for nk in [k.wrapping_sub(1), k + 1] {
                    if nk >= self.sites || occ.contains(&nk) {
                        continue;
                    }
                    let mut next: Vec<usize> =
                        occ.iter().map(|&s| if s == k { nk } else { s }).collect();
                    next.sort_unstable();
                    h[(self.index(&next), i)] = -p.hopping;
                }
            }
        }
        h
    }

    /// Eigenvalues ascending with matching eigenvector columns.
    pub fn eigen(&self, p: &LatticeParams, lambda: f64) -> (Vec<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.hamiltonian(p, lambda));
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        (values, vectors)
    }

    /// Diagonal `x̂ = Σ_k k n̂_k / N_b` in the configuration basis.
    pub fn center_of_mass(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.basis.len(),
            self.basis
                .iter()
                .map(|occ| occ.iter().map(|&k| (k + 1) as f64).sum::<f64>() / occ.len() as f64),
        )
    }
}

pub struct FockQuench {
    pub energies: Vec<f64>,
    pub probs: Vec<f64>,
    /// `⟨E_n|x̂|E_n⟩`.
    pub com_diagonal: Vec<f64>,
}

impl FockQuench {
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    pub fn time_averaged_com(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.com_diagonal)
            .map(|(p, x)| p * x)
            .sum()
    }
}

pub fn fock_quench(p: &LatticeParams, lambda: f64, delta_lambda: f64) -> FockQuench {
    let fock = Fock::new(p.sites, p.particles);
    let (_, v0) = fock.eigen(p, lambda - delta_lambda);
    let psi0 = v0.column(0);
    let (energies, v) = fock.eigen(p, lambda);
    let x = fock.center_of_mass();
    let probs = (0..energies.len())
        .map(|n| v.column(n).dot(&psi0).powi(2))
        .collect();
    let com_diagonal = (0..energies.len())
        .map(|n| v.column(n).component_mul(&v.column(n)).dot(&x))
        .collect();
    FockQuench {
        energies,
        probs,
        com_diagonal,
    }
}

/// A generic small chain with no accidental symmetry.
pub fn small_params() -> LatticeParams {
    LatticeParams {
        sites: 6,
        particles: 2,
        hopping: 1.0,
        trap: 0.2,
        center: 3.0,
    }
}
