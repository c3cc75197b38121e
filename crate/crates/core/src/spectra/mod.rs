//! Windowed Hermitian eigensolves, clean edge dispersion tables, the Fermi
//! velocity and the lower bound on the spectral flow rate.

mod band_ldl;
mod branches;
mod lanczos;
mod tridiag;

pub use band_ldl::{count_below, BandLdl};
pub use branches::{
    alpha_bound, branch_grid, edge_branches, edge_branches_with, fermi_velocity,
    min_fermi_velocity, AlphaBound, BranchTable, FermiVelocity,
};
pub use tridiag::{kth_eigenvalue, lowest_eigenvalues, sturm_count};

pub(crate) use lanczos::{dot, norm};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianMatrix;
use crate::model::EnergyWindow;

/// Matrices up to this dimension are diagonalized densely under [`Solver::Auto`].
pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Dense for `n ≤ DENSE_LIMIT`, shift-invert Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Eigenpairs of a Hermitian matrix inside an open window, ascending.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Unit eigenvectors, `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
    pub window: EnergyWindow,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `‖Av − λv‖` over the pairs.
    pub fn max_residual(&self, a: &HermitianMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&lam, v)| {
                let av = a.apply(v);
                av.iter()
                    .zip(v)
                    .map(|(x, y)| (x - y * lam).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|VᴴV − I|`.
    pub fn gram_deviation(&self) -> f64 {
        let k = self.vectors.len();
        let mut dev = 0.0f64;
        for i in 0..k {
            for j in 0..=i {
                let g = dot(&self.vectors[i], &self.vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g - target).norm());
            }
        }
        dev
    }
}

/// All eigenvalues of `h` in `window` with eigenvectors.
pub fn eigen_window(h: &HermitianMatrix, window: &EnergyWindow) -> Result<EigenPairs> {
    eigen_window_with(h, window, Solver::Auto)
}

pub fn eigen_window_with(
    h: &HermitianMatrix,
    window: &EnergyWindow,
    solver: Solver,
) -> Result<EigenPairs> {
    let dense = match solver {
        Solver::Auto => h.dim() <= DENSE_LIMIT,
        Solver::Dense => true,
        Solver::Lanczos => false,
    };
    let expected = count_below(h, window.hi)? - count_below(h, window.lo)?;
    let (values, vectors) = if dense {
        let (vals, vecs) = dense_eigen(h);
        let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = vals
            .into_iter()
            .zip(vecs)
            .filter(|(v, _)| window.contains(*v))
            .unzip();
        if values.len() != expected {
            return Err(Error::NoConvergence {
                found: values.len(),
                expected,
                lo: window.lo,
                hi: window.hi,
            });
        }
        (values, vectors)
    } else {
        lanczos::window_eigenpairs(h, window, expected, 0x5eed_0f_1a_c705)?
    };
    Ok(EigenPairs {
        values,
        vectors,
        window: *window,
    })
}

/// Full dense eigendecomposition, ascending.
pub fn dense_eigen(h: &HermitianMatrix) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}
