//! Shift-invert Lanczos for the eigenpairs of a banded Hermitian matrix in an
//! open energy window, with full reorthogonalization and locking.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::band_ldl::BandLdl;
use crate::error::{Error, Result};
use crate::hamiltonian::HermitianMatrix;
use crate::model::EnergyWindow;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(v: &mut [Complex64], s: f64) {
    v.iter_mut().for_each(|z| *z *= s);
}

/// Classical Gram–Schmidt against `basis`, applied twice.
fn orthogonalize<'a, I>(w: &mut [Complex64], basis: I)
where
    I: Iterator<Item = &'a Vec<Complex64>> + Clone,
{
    for _ in 0..2 {
        for q in basis.clone() {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Rayleigh–Ritz of `a` on the span of the orthonormal `basis`.
fn rayleigh_ritz(a: &HermitianMatrix, basis: &[Vec<Complex64>]) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let k = basis.len();
    let n = a.dim();
    let ab: Vec<Vec<Complex64>> = basis.iter().map(|v| a.apply(v)).collect();
    let mut g = DMatrix::from_element(k, k, ZERO);
    for i in 0..k {
        for j in 0..=i {
            let v = dot(&basis[i], &ab[j]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut y = vec![ZERO; n];
            for (j, b) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(j, i)], b, &mut y);
            }
            let nrm = norm(&y);
            scale(&mut y, 1.0 / nrm);
            y
        })
        .collect();
    (values, vectors)
}

fn residual(a: &HermitianMatrix, lambda: f64, v: &[Complex64]) -> f64 {
    let mut r = a.apply(v);
    axpy(Complex64::new(-lambda, 0.0), v, &mut r);
    norm(&r)
}

/// All eigenpairs of `a` in `window`; `expected` is the exact count from inertia.
pub(crate) fn window_eigenpairs(
    a: &HermitianMatrix,
    window: &EnergyWindow,
    expected: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let n = a.dim();
    if expected == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let anorm = a.norm_inf().max(f64::MIN_POSITIVE);
    let target = 1e-11 * anorm;
    let accept = 1e-9 * anorm;
    let sigma = window.center();
    let half = 0.5 * window.width();
    let fac = BandLdl::factor_nudged(a, sigma)?;
    let sigma = fac.shift();
    let in_window = |lam: f64| (lam - sigma).abs() < half + 1e-12 * anorm;

    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let mut kmax = (2 * expected + 40).max(60);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..8 {
        let room = n - locked.len();
        if room == 0 {
            break;
        }
        let kcap = kmax.min(room);
        let mut q0: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        orthogonalize(&mut q0, locked.iter());
        let nq = norm(&q0);
        scale(&mut q0, 1.0 / nq);
        let mut qs: Vec<Vec<Complex64>> = vec![q0];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut fresh: Vec<Vec<Complex64>> = Vec::new();
        for j in 0..kcap {
            let mut w = qs[j].clone();
            fac.solve_in_place(&mut w);
            if j > 0 {
                axpy(Complex64::new(-beta[j - 1], 0.0), &qs[j - 1], &mut w);
            }
            let aj = dot(&qs[j], &w).re;
            axpy(Complex64::new(-aj, 0.0), &qs[j], &mut w);
            orthogonalize(&mut w, locked.iter().chain(qs.iter()));
            let bj = norm(&w);
            alpha.push(aj);
            beta.push(bj);
            let m = j + 1;
            let breakdown = bj <= 1e-13 * aj.abs().max(1.0) || m == room;
            let due = m >= expected.saturating_sub(locked.len())
                && (m % 4 == 0 || m == kcap || breakdown);
            if due {
                let t = DMatrix::from_fn(m, m, |r, c| {
                    if r == c {
                        alpha[r]
                    } else if r.abs_diff(c) == 1 {
                        beta[r.min(c)]
                    } else {
                        0.0
                    }
                });
                let eig = SymmetricEigen::new(t);
                let wanted: Vec<usize> = (0..m)
                    .filter(|&i| {
                        let theta = eig.eigenvalues[i];
                        theta != 0.0 && in_window(sigma + 1.0 / theta)
                    })
                    .collect();
                let settled = wanted.iter().all(|&i| {
                    bj * eig.eigenvectors[(m - 1, i)].abs() <= 1e-10 * eig.eigenvalues[i].abs()
                });
                let last = breakdown || m == kcap;
                if !(settled && wanted.len() + locked.len() >= expected) && !last {
                    scale(&mut w, 1.0 / bj);
                    qs.push(w);
                    continue;
                }
                let mut candidates = Vec::new();
                let mut all_converged = true;
                for &i in &wanted {
                    let mut y = vec![ZERO; n];
                    for (r, q) in qs.iter().enumerate() {
                        axpy(Complex64::new(eig.eigenvectors[(r, i)], 0.0), q, &mut y);
                    }
                    let ny = norm(&y);
                    scale(&mut y, 1.0 / ny);
                    let lam = a.expectation(&y);
                    if residual(a, lam, &y) <= target {
                        candidates.push(y);
                    } else {
                        all_converged = false;
                    }
                }
                let enough = candidates.len() + locked.len() >= expected;
                if (all_converged && enough) || breakdown || m == kcap {
                    fresh = candidates;
                    break;
                }
            }
            if breakdown {
                break;
            }
            scale(&mut w, 1.0 / bj);
            qs.push(w);
        }
        let before = locked.len();
        for mut y in fresh {
            orthogonalize(&mut y, locked.iter());
            let ny = norm(&y);
            if ny > 0.5 {
                scale(&mut y, 1.0 / ny);
                locked.push(y);
            }
        }
        if locked.len() >= expected {
            break;
        }
        if locked.len() == before {
            kmax *= 2;
        }
    }

    let (values, vectors) = rayleigh_ritz(a, &locked);
    let mut picked: Vec<(f64, Vec<Complex64>)> = values
        .into_iter()
        .zip(vectors)
        .filter(|(lam, _)| in_window(*lam))
        .collect();
    if picked.len() > expected {
        picked.sort_by(|x, y| (x.0 - sigma).abs().total_cmp(&(y.0 - sigma).abs()));
        picked.truncate(expected);
        picked.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
    let ok =
        picked.len() == expected && picked.iter().all(|(lam, v)| residual(a, *lam, v) <= accept);
    if !ok {
        return Err(Error::NoConvergence {
            found: picked.len(),
            expected,
            lo: window.lo,
            hi: window.hi,
        });
    }
    Ok(picked.into_iter().unzip())
}
