//! Many-fermion states as matrices of occupied orbitals.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|P†P − I|` for a valid Slater state.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// `N × N_b` orbital matrix; the many-body state is the determinant of its
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterState {
    orbitals: DMatrix<Complex64>,
    occupied: Option<Vec<usize>>,
}

impl SlaterState {
    pub fn new(orbitals: DMatrix<Complex64>) -> Result<Self> {
        let state = Self {
            orbitals,
            occupied: None,
        };
        let err = state.orthonormality_error();
        if err > ORTHONORMAL_TOL {
            return Err(Error::InvalidParameter {
                name: "orbitals",
                reason: format!("columns not orthonormal (error {err:e})"),
            });
        }
        Ok(state)
    }

    /// The state occupying the listed columns of a real orbital basis.
    pub fn from_levels(basis: &DMatrix<f64>, levels: &[usize]) -> Result<Self> {
        if let Some(bad) = levels.iter().find(|l| **l >= basis.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "level {bad} outside basis of {}",
                basis.ncols()
            )));
        }
        let orbitals = DMatrix::from_fn(basis.nrows(), levels.len(), |k, b| {
            Complex64::new(basis[(k, levels[b])], 0.0)
        });
        let mut s = Self::new(orbitals)?;
        s.occupied = Some(levels.to_vec());
        Ok(s)
    }

    pub fn orbitals(&self) -> &DMatrix<Complex64> {
        &self.orbitals
    }

    /// Occupied level indices when the state is labelled by levels.
    pub fn occupied(&self) -> Option<&[usize]> {
        self.occupied.as_deref()
    }

    pub fn sites(&self) -> usize {
        self.orbitals.nrows()
    }

    pub fn particles(&self) -> usize {
        self.orbitals.ncols()
    }

    pub fn orthonormality_error(&self) -> f64 {
        let n = self.particles();
        let g = self.orbitals.adjoint() * &self.orbitals;
        (g - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Site occupations `n_k = Σ_b |P_kb|²`.
    pub fn densities(&self) -> Vec<f64> {
        self.orbitals
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// `Σ_k k n_k / N_b` with sites numbered from 1.
    pub fn center_of_mass(&self) -> f64 {
        center_of_mass(&self.densities(), self.particles())
    }
}

pub(crate) fn center_of_mass(densities: &[f64], particles: usize) -> f64 {
    densities
        .iter()
        .enumerate()
        .map(|(k, n)| (k + 1) as f64 * n)
        .sum::<f64>()
        / particles as f64
}

/// `|⟨eigenstate|initial⟩|² = |det(E† P)|²`.
pub fn overlap_probability(initial: &SlaterState, eigenstate: &SlaterState) -> Result<f64> {
    if initial.sites() != eigenstate.sites() || initial.particles() != eigenstate.particles() {
        return Err(Error::DimensionMismatch(format!(
            "states are {}x{} and {}x{}",
            initial.sites(),
            initial.particles(),
            eigenstate.sites(),
            eigenstate.particles()
        )));
    }
    let m = eigenstate.orbitals.adjoint() * &initial.orbitals;
    Ok(m.determinant().norm_sqr())
}

/// `Tr(P† h P)` for a one-body Hamiltonian `h` in the site basis.
pub fn energy_expectation(initial: &SlaterState, h: &DMatrix<f64>) -> Result<f64> {
    if h.nrows() != initial.sites() || h.ncols() != initial.sites() {
        return Err(Error::DimensionMismatch(format!(
            "{}-site state against {}x{} Hamiltonian",
            initial.sites(),
            h.nrows(),
            h.ncols()
        )));
    }
    let hc = h.map(|v| Complex64::new(v, 0.0));
    Ok((initial.orbitals.adjoint() * hc * &initial.orbitals)
        .trace()
        .re)
}

/// Determinant of the `n × n` row-major matrix in `a` by LU with partial
/// pivoting. Destroys `a`.
pub(crate) fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor != 0.0 {
                for c in col + 1..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
            }
        }
    }
    det
}

/// Modified Gram-Schmidt on the columns of `p`.
pub(crate) fn orthonormalize(p: &mut DMatrix<Complex64>) {
    for j in 0..p.ncols() {
        for i in 0..j {
            let proj: Complex64 = p.column(i).dotc(&p.column(j));
            let ci = p.column(i).clone_owned();
            let mut cj = p.column_mut(j);
            cj -= ci * proj;
        }
        let norm = p.column(j).norm();
        let mut cj = p.column_mut(j);
        cj /= Complex64::new(norm, 0.0);
    }
}
