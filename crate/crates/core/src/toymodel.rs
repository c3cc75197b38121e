//! The chiral edge model `h(Φ) = (−i∂_y + Φ/L) + v(y)` on a circle of length
//! `L`, whose levels `e_m(Φ) = 2πm/L + Φ/L + v̄` are known in closed form.
//!
//! It is used as an exact oracle for the flow, spacing, winding, index and
//! conductance machinery, which runs on it unchanged through
//! [`toy_branchset`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{
    edge_conductance, relabel, spacing_stats, verify_spectral_shift, Branch, BranchSet, LevelFrame,
    SpacingStats,
};
use crate::index::{crossing_vs_index, fermi_levels};
use crate::model::EnergyWindow;

/// Sites of the circle on which the endpoint eigenvectors of [`toy_branchset`] live.
pub const TOY_FRAME_SITES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToySpectrum {
    pub m_lo: i64,
    pub m_hi: i64,
    pub l: f64,
    /// Mean `(1/L)∫v dy` of the potential; nothing else about `v` matters.
    pub vbar: f64,
    pub phi: f64,
    /// `e_m(Φ)` for `m = m_lo..=m_hi`.
    pub levels: Vec<f64>,
}

impl ToySpectrum {
    pub fn level(&self, m: i64) -> Option<f64> {
        (self.m_lo..=self.m_hi)
            .contains(&m)
            .then(|| toy_level(m, self.l, self.vbar, self.phi))
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.l
    }
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParams {
            field: "l",
            reason: format!("circumference must be positive and finite, got {l}"),
        });
    }
    Ok(())
}

pub fn toy_level(m: i64, l: f64, vbar: f64, phi: f64) -> f64 {
    (2.0 * PI * m as f64 + phi) / l + vbar
}

pub fn toy_spectrum(m_lo: i64, m_hi: i64, l: f64, vbar: f64, phi: f64) -> Result<ToySpectrum> {
    check_l(l)?;
    if m_lo > m_hi {
        return Err(Error::InvalidParams {
            field: "m_lo",
            reason: format!("need m_lo <= m_hi, got {m_lo} > {m_hi}"),
        });
    }
    Ok(ToySpectrum {
        m_lo,
        m_hi,
        l,
        vbar,
        phi,
        levels: (m_lo..=m_hi).map(|m| toy_level(m, l, vbar, phi)).collect(),
    })
}

fn plane_wave(m: i64, n: usize) -> Vec<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|j| Complex64::from_polar(s, 2.0 * PI * (m as f64) * j as f64 / n as f64))
        .collect()
}

/// The toy levels `m_lo..=m_hi` as a [`BranchSet`] over `phi_steps` flux steps.
///
/// `Δ` runs from half a spacing below `e_{m_lo+1}(0)` to half a spacing above
/// `e_{m_hi−1}(0)`, so every branch that touches it is followed by a tracked
/// level. Currents are the exact `1/L`.
pub fn toy_branchset(
    m_lo: i64,
    m_hi: i64,
    l: f64,
    vbar: f64,
    phi_steps: usize,
) -> Result<BranchSet> {
    check_l(l)?;
    if m_hi - m_lo < 2 {
        return Err(Error::InvalidParams {
            field: "m_hi",
            reason: format!("need at least three levels, got m = {m_lo}..={m_hi}"),
        });
    }
    if phi_steps < 2 {
        return Err(Error::InvalidParams {
            field: "phi_steps",
            reason: format!("need at least two flux steps, got {phi_steps}"),
        });
    }
    let phis: Vec<f64> = (0..=phi_steps)
        .map(|p| 2.0 * PI * p as f64 / phi_steps as f64)
        .collect();
    let half = PI / l;
    let delta = EnergyWindow::new(
        toy_level(m_lo + 1, l, vbar, 0.0) - half,
        toy_level(m_hi - 1, l, vbar, 0.0) + half,
    )?;
    let tracking = EnergyWindow::new(
        toy_level(m_lo, l, vbar, 0.0) - half,
        toy_level(m_hi + 1, l, vbar, 0.0) + half,
    )?;
    let branches = (m_lo..=m_hi)
        .map(|m| Branch {
            label: 0,
            start: 0,
            energies: phis.iter().map(|&f| toy_level(m, l, vbar, f)).collect(),
            currents: vec![1.0 / l; phis.len()],
        })
        .collect();
    let n = TOY_FRAME_SITES.max(2 * (m_hi - m_lo + 1) as usize);
    let frame = |phi: f64| LevelFrame {
        energies: (m_lo..=m_hi).map(|m| toy_level(m, l, vbar, phi)).collect(),
        vectors: (m_lo..=m_hi).map(|m| plane_wave(m, n)).collect(),
    };
    Ok(relabel(BranchSet {
        phis,
        l,
        b: 1.0,
        delta,
        tracking,
        branches,
        near_degeneracies: Vec::new(),
        min_overlap: 1.0,
        endpoints: Some((frame(0.0), frame(2.0 * PI))),
    }))
}

/// Numerical levels against the closed form for one discretization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyCheck {
    pub n_sites: usize,
    /// Closed-form `e_m(Φ)` for the compared modes.
    pub exact: Vec<f64>,
    /// Nearest numerical level (real part) to each entry of `exact`.
    pub numeric: Vec<f64>,
    pub max_error: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn compare(exact: Vec<f64>, found: &[f64], n: usize) -> ToyCheck {
    let numeric: Vec<f64> = exact
        .iter()
        .map(|e| {
            *found
                .iter()
                .min_by(|a, b| (*a - e).abs().total_cmp(&(*b - e).abs()))
                .expect("nonempty")
        })
        .collect();
    let max_error = exact
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ToyCheck {
        n_sites: n,
        exact,
        numeric,
        max_error,
    }
}

/// Upwind discretization of the chiral operator on `v.len()` sites with the
/// flux carried by the wrap-around bond, `ψ_{−1} = e^{−iΦ}·ψ_{N−1}`.
///
/// Compares the real parts of the eigenvalues with `e_m(Φ)` for
/// `m = m_lo..=m_hi`, using the sample mean of `v` as `v̄`. The agreement is
/// first order in the site spacing.
pub fn toy_numeric_check(l: f64, v: &[f64], phi: f64, m_lo: i64, m_hi: i64) -> Result<ToyCheck> {
    check_l(l)?;
    let n = v.len();
    if n < 32 {
        return Err(Error::InvalidParams {
            field: "n_sites",
            reason: format!("need at least 32 sites, got {n}"),
        });
    }
    let h = l / n as f64;
    let c = Complex64::new(0.0, -1.0 / h);
    let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        a[(j, j)] = c + v[j];
        let prev = (j + n - 1) % n;
        let wrap = if j == 0 {
            Complex64::from_polar(1.0, -phi)
        } else {
            Complex64::new(1.0, 0.0)
        };
        a[(j, prev)] = -c * wrap;
    }
    let eig = a
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Config("complex Schur form did not converge".into()))?;
    let found: Vec<f64> = eig.iter().map(|z| z.re).collect();
    let spec = toy_spectrum(m_lo, m_hi, l, mean(v), phi)?;
    Ok(compare(spec.levels, &found, n))
}

/// Fourier-Galerkin discretization on the `v.len()` lowest plane waves.
///
/// The matrix `(k_n + Φ/L)δ_{nn'} + v̂_{n−n'}` is Hermitian, and for smooth
/// `v` its levels away from the truncation edges converge exponentially, so
/// this check reaches round-off.
pub fn toy_fourier_check(l: f64, v: &[f64], phi: f64, m_lo: i64, m_hi: i64) -> Result<ToyCheck> {
    check_l(l)?;
    let n = v.len();
    let half = (n / 2) as i64;
    if m_lo < -half / 2 || m_hi > half / 2 {
        return Err(Error::InvalidParams {
            field: "n_sites",
            reason: format!(
                "modes {m_lo}..={m_hi} need at least {} samples",
                4 * m_lo.abs().max(m_hi.abs())
            ),
        });
    }
    // v̂_q = (1/N) Σ_j v_j e^{−2πi q j/N}
    let vhat = |q: i64| -> Complex64 {
        v.iter()
            .enumerate()
            .map(|(j, &x)| Complex64::from_polar(x, -2.0 * PI * (q * j as i64) as f64 / n as f64))
            .sum::<Complex64>()
            / n as f64
    };
    let modes: Vec<i64> = (-half..half).collect();
    let k = modes.len();
    let table: Vec<Complex64> = (-(k as i64) + 1..k as i64).map(vhat).collect();
    let a = DMatrix::from_fn(k, k, |r, c| {
        let q = modes[r] - modes[c];
        let mut z = table[(q + k as i64 - 1) as usize];
        if r == c {
            z += (2.0 * PI * modes[r] as f64 + phi) / l;
        }
        z
    });
    let found: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    let spec = toy_spectrum(m_lo, m_hi, l, mean(v), phi)?;
    Ok(compare(spec.levels, &found, n))
}

/// Everything the toy model is checked for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyReport {
    pub l: f64,
    pub levels: usize,
    /// `max_m |e_m(2π) − e_{m+1}(0)|` from the tracked branches.
    pub shift_residual: f64,
    /// `max |spacing − 2π/L|` at `Φ = 0`.
    pub spacing_error: f64,
    /// `max |s − 1|`.
    pub s_error: f64,
    pub histogram: Vec<usize>,
    pub q_f: Vec<i64>,
    pub q_index: Vec<i64>,
    pub sigma_e: f64,
    pub sigma_e_error: f64,
    /// Fourier-Galerkin levels with `v = cos(2πy/L)` against the closed form.
    pub fourier_error: f64,
    /// Upwind levels for `v = 0`, `cos(2πy/L)` and `0.3` against the closed form.
    pub upwind_errors: [f64; 3],
}

/// Tolerance of the exact toy identities.
pub const TOY_TOL: f64 = 1e-12;

impl ToyReport {
    /// The closed-form identities hold to [`TOY_TOL`], the winding is one at
    /// every Fermi level, and the upwind scheme agrees to `10·2π/n_sites`.
    pub fn pass(&self, n_sites: usize) -> bool {
        let upwind_tol = 10.0 * 2.0 * PI / n_sites as f64;
        self.shift_residual <= TOY_TOL
            && self.spacing_error <= TOY_TOL
            && self.s_error <= TOY_TOL
            && self.q_f.iter().all(|&q| q == 1)
            && self.q_index == self.q_f
            && self.sigma_e_error <= TOY_TOL
            && self.fourier_error <= TOY_TOL
            && self.upwind_errors.iter().all(|&e| e <= upwind_tol)
    }
}

/// Runs the flow, spacing, winding, index and conductance machinery on the
/// toy model, plus both discretizations of the chiral operator.
pub fn toy_suite(
    l: f64,
    m_lo: i64,
    m_hi: i64,
    vbar: f64,
    phi_steps: usize,
    n_sites: usize,
) -> Result<(ToyReport, BranchSet, SpacingStats)> {
    let bs = toy_branchset(m_lo, m_hi, l, vbar, phi_steps)?;
    let shift = verify_spectral_shift(&bs)?;
    let stats = spacing_stats(&bs, None, 0.0)?;
    let spacing = 2.0 * PI / l;
    let spacing_error = stats
        .rows
        .iter()
        .map(|r| (r.spacing - spacing).abs())
        .fold(0.0, f64::max);
    let s_error = stats
        .rows
        .iter()
        .map(|r| (r.s - 1.0).abs())
        .fold(0.0, f64::max);
    let mut q_f = Vec::new();
    let mut q_index = Vec::new();
    for f in fermi_levels(&bs, 5) {
        let c = crossing_vs_index(&bs, f)?;
        q_f.push(c.q_branches);
        q_index.push(c.q_index);
    }
    let sigma_e = edge_conductance(&bs, &bs.delta);
    let y = |j: usize| j as f64 * l / n_sites as f64;
    let cosine: Vec<f64> = (0..n_sites)
        .map(|j| vbar + (2.0 * PI * y(j) / l).cos())
        .collect();
    let modes = (n_sites as i64 / 8).clamp(1, 4);
    let fourier_error = toy_fourier_check(l, &cosine, 0.3, -modes, modes)?.max_error;
    let mut upwind_errors = [0.0; 3];
    let potentials = [vec![vbar; n_sites], cosine, vec![vbar + 0.3; n_sites]];
    for (e, v) in upwind_errors.iter_mut().zip(&potentials) {
        *e = toy_numeric_check(l, v, 0.3, -2, 2)?.max_error;
    }
    let report = ToyReport {
        l,
        levels: bs.branches.len(),
        shift_residual: shift.residual,
        spacing_error,
        s_error,
        histogram: stats.histogram.clone(),
        q_f,
        q_index,
        sigma_e,
        sigma_e_error: (sigma_e - 1.0 / (2.0 * PI)).abs(),
        fourier_error,
        upwind_errors,
    };
    Ok((report, bs, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::crossing_count;

    fn samples(n: usize, l: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|j| f(j as f64 * l / n as f64)).collect()
    }

    #[test]
    fn closed_form_levels() {
        let s = toy_spectrum(0, 3, 2.0 * PI, 0.0, 0.0).unwrap();
        assert_eq!(s.levels, vec![0.0, 1.0, 2.0, 3.0]);
        let t = toy_spectrum(0, 3, 2.0 * PI, 0.0, 2.0 * PI).unwrap();
        for m in 0..3 {
            assert!((t.level(m).unwrap() - s.level(m + 1).unwrap()).abs() < 1e-15);
        }
        assert!(toy_spectrum(2, 1, 1.0, 0.0, 0.0).is_err());
        assert!(toy_spectrum(0, 1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn branchset_is_exact() {
        let l = 7.0;
        let bs = toy_branchset(-4, 4, l, 0.25, 64).unwrap();
        assert!(verify_spectral_shift(&bs).unwrap().residual < 1e-14);
        let f = 0.5 * (toy_level(0, l, 0.25, 0.0) + toy_level(1, l, 0.25, 0.0));
        assert_eq!(crossing_count(&bs, f).unwrap(), 1);
        assert!((edge_conductance(&bs, &bs.delta) - 1.0 / (2.0 * PI)).abs() < 1e-13);
        let st = spacing_stats(&bs, Some(1.0), 0.0).unwrap();
        for r in &st.rows {
            assert!((r.spacing - 2.0 * PI / l).abs() < 1e-14);
            assert!((r.s - 1.0).abs() < 1e-12);
        }
        assert_eq!(st.histogram[10], st.rows.len());
    }

    #[test]
    fn upwind_converges_first_order() {
        let l = 2.0 * PI;
        let e64 = toy_numeric_check(l, &samples(64, l, |_| 0.0), 0.7, -2, 2)
            .unwrap()
            .max_error;
        let e128 = toy_numeric_check(l, &samples(128, l, |_| 0.0), 0.7, -2, 2)
            .unwrap()
            .max_error;
        assert!(e64 < 0.05);
        assert!(e128 < 0.6 * e64);
    }

    #[test]
    fn only_the_mean_of_v_matters() {
        let l = 2.0 * PI;
        let n = 256;
        let zero = toy_numeric_check(l, &samples(n, l, |_| 0.0), 0.3, -2, 2).unwrap();
        let cosine =
            toy_numeric_check(l, &samples(n, l, |y| (2.0 * PI * y / l).cos()), 0.3, -2, 2).unwrap();
        let flat = toy_numeric_check(l, &samples(n, l, |_| 0.3), 0.3, -2, 2).unwrap();
        for i in 0..5 {
            assert!((cosine.numeric[i] - zero.numeric[i]).abs() < 0.05);
            assert!((flat.numeric[i] - zero.numeric[i] - 0.3).abs() < 1e-9);
        }
        let fourier =
            toy_fourier_check(l, &samples(64, l, |y| (2.0 * PI * y / l).cos()), 0.3, -4, 4)
                .unwrap();
        assert!(fourier.max_error < 1e-12, "{}", fourier.max_error);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        assert!(toy_numeric_check(1.0, &[0.0; 16], 0.0, 0, 1).is_err());
        assert!(toy_fourier_check(1.0, &[0.0; 16], 0.0, -8, 8).is_err());
    }

    #[test]
    fn suite_passes_with_defaults() {
        let (r, bs, _) = toy_suite(2.0 * PI, -8, 8, 0.0, 128, 128).unwrap();
        assert!(r.pass(128), "{r:?}");
        assert_eq!(r.histogram.iter().sum::<usize>(), r.histogram[10]);
        assert_eq!(bs.branches.len(), 17);
    }
}
