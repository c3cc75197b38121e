//! Finite-difference discretization of the cylinder Hamiltonian
//! `H(Φ) = ½p_x² + ½(p_y − Bx + Φ/L)² + W(x) + V(x,y)`, its flux derivative,
//! the truncated-disorder operator `H_D`, and the one-dimensional fibre
//! operators `h_k` of the clean edge Hamiltonian.
//!
//! The y kinetic term uses Peierls phases in the Landau gauge: the `+y` bond
//! out of a site in column `x_i` carries `−(1/2hy²)·exp(−i·hy·(B·x_i − Φ/L))`.
//! The x kinetic term is the plain second difference with Dirichlet walls.

mod edge1d;
mod matrix;

pub use edge1d::{build_edge_1d, Tridiagonal1D, YDispersion};
pub use matrix::{HermitianMatrix, SiteLayout, SiteOrder};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{wall_potential, DisorderField, GridSpec, PhysicalParams};

fn y_bond_phase(b: f64, x: f64, phi: f64, l: f64, hy: f64) -> Complex64 {
    Complex64::from_polar(1.0, -hy * (b * x - phi / l))
}

/// Discretized `H(Φ)` on `grid` with impurity field `disorder`.
pub fn build_hamiltonian(
    params: &PhysicalParams,
    grid: &GridSpec,
    disorder: &DisorderField,
    phi: f64,
) -> Result<HermitianMatrix> {
    if !disorder.matches(grid) {
        return Err(Error::ShapeMismatch(format!(
            "disorder is {}x{}, grid is {}x{}",
            disorder.nx,
            disorder.ny,
            grid.nx(),
            grid.ny
        )));
    }
    let (nx, ny) = (grid.nx(), grid.ny);
    let layout = SiteLayout::best(nx, ny);
    let mut h = HermitianMatrix::with_layout(layout);
    let hx = grid.hx;
    let hy = grid.hy(params.l);
    let tx = 0.5 / (hx * hx);
    let ty = 0.5 / (hy * hy);
    for i in 0..nx {
        let x = grid.x(i);
        let onsite = 2.0 * tx + 2.0 * ty + wall_potential(params, x);
        let bond = -ty * y_bond_phase(params.b, x, phi, params.l, hy);
        for j in 0..ny {
            let s = layout.index(i, j);
            h.set(s, s, Complex64::new(onsite + disorder.get(i, j), 0.0));
            if i + 1 < nx {
                h.set(layout.index(i + 1, j), s, Complex64::new(-tx, 0.0));
            }
            // ⟨j| H |j+1⟩ carries the Peierls phase
            h.set(s, layout.index(i, (j + 1) % ny), bond);
        }
    }
    Ok(h)
}

/// Clean edge Hamiltonian `H_e(Φ)` (no impurities).
pub fn build_edge_hamiltonian(
    params: &PhysicalParams,
    grid: &GridSpec,
    phi: f64,
) -> Result<HermitianMatrix> {
    build_hamiltonian(params, grid, &DisorderField::zeros(grid), phi)
}

/// Analytic `∂H/∂Φ`: only the y bonds depend on the flux, through
/// `d/dΦ exp(i·hy·Φ/L) = (i·hy/L)·exp(i·hy·Φ/L)`.
pub fn build_flux_derivative(
    params: &PhysicalParams,
    grid: &GridSpec,
    phi: f64,
) -> HermitianMatrix {
    let (nx, ny) = (grid.nx(), grid.ny);
    let layout = SiteLayout::best(nx, ny);
    let mut d = HermitianMatrix::with_layout(layout);
    let hy = grid.hy(params.l);
    let ty = 0.5 / (hy * hy);
    let dphase = Complex64::new(0.0, hy / params.l);
    for i in 0..nx {
        let bond = -ty * y_bond_phase(params.b, grid.x(i), phi, params.l, hy) * dphase;
        for j in 0..ny {
            d.set(layout.index(i, j), layout.index(i, (j + 1) % ny), bond);
        }
    }
    d
}

/// Max entrywise deviation of `U·H(Φ+2π·winding)·U†` from `H(Φ)` where
/// `U = diag(exp(2πi·winding·y_j/L))`.
pub fn gauge_deviation(
    shifted: &HermitianMatrix,
    reference: &HermitianMatrix,
    grid: &GridSpec,
    l: f64,
    winding: i32,
) -> Result<f64> {
    let layout = match (shifted.layout(), reference.layout()) {
        (Some(a), Some(b)) if a == b && shifted.dim() == reference.dim() => *a,
        _ => {
            return Err(Error::ShapeMismatch(
                "gauge check needs two grid matrices with the same layout".into(),
            ))
        }
    };
    if layout.nx != grid.nx() || layout.ny != grid.ny {
        return Err(Error::ShapeMismatch(
            "matrix layout does not match grid".into(),
        ));
    }
    let k = 2.0 * PI * winding as f64 / l;
    let phase: Vec<Complex64> = (0..shifted.dim())
        .map(|s| {
            let (_, j) = layout.site(s);
            Complex64::from_polar(1.0, k * grid.y(j, l))
        })
        .collect();
    let bw = shifted.bandwidth().max(reference.bandwidth());
    let n = shifted.dim();
    let mut dev = 0.0f64;
    for c in 0..n {
        for r in c..=(c + bw).min(n - 1) {
            let conj = phase[r] * shifted.get(r, c) * phase[c].conj();
            dev = dev.max((conj - reference.get(r, c)).norm());
        }
    }
    Ok(dev)
}

/// Checks the gauge identity `U·H(Φ+2π)·U† = H(Φ)` with `U = exp(2πi·y/L)`.
pub fn gauge_shift_check(
    h_shifted: &HermitianMatrix,
    h: &HermitianMatrix,
    grid: &GridSpec,
    l: f64,
) -> Result<f64> {
    gauge_deviation(h_shifted, h, grid, l, 1)
}

/// `V_D`: keeps the impurity field for `x ≤ −D` and removes it for `x > −D`.
pub fn truncate_disorder(disorder: &DisorderField, grid: &GridSpec, d: f64) -> DisorderField {
    assert!(d >= 0.0, "truncation distance must be non-negative");
    let mut out = disorder.clone();
    // a column sitting on x = −D up to round-off counts as x ≤ −D
    let tol = 1e-9 * grid.hx;
    for i in 0..disorder.nx {
        if grid.x(i) > -d + tol {
            out.values[i * disorder.ny..(i + 1) * disorder.ny]
                .iter_mut()
                .for_each(|v| *v = 0.0);
        }
    }
    out
}

/// Mean weight `Σ|ψ|²` on sites in the right half `x > x_min/2` of the cylinder.
pub fn right_weight(grid: &GridSpec, layout: &SiteLayout, psi: &[Complex64]) -> f64 {
    let cut = 0.5 * grid.x_min;
    psi.iter()
        .enumerate()
        .filter(|(s, _)| grid.x(layout.site(*s).0) > cut)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_disorder;

    fn setup(l: f64) -> (PhysicalParams, GridSpec) {
        let params = PhysicalParams {
            l,
            ..Default::default()
        };
        let grid = GridSpec::default_for(&params);
        (params, grid)
    }

    #[test]
    fn hermitian_by_construction() {
        let (params, grid) = setup(4.0);
        let v = sample_disorder(3, &grid, params.w);
        let h = build_hamiltonian(&params, &grid, &v, 0.7).unwrap();
        assert_eq!(h.hermiticity_deviation(), 0.0);
        assert!(h.diagonal().iter().all(|d| d.is_finite()));
    }

    #[test]
    fn rejects_mismatched_disorder() {
        let (params, grid) = setup(4.0);
        let mut other = grid;
        other.ny += 1;
        let v = sample_disorder(3, &other, params.w);
        assert!(matches!(
            build_hamiltonian(&params, &grid, &v, 0.0),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn flux_derivative_matches_centered_difference() {
        let (params, grid) = setup(4.0);
        let v = sample_disorder(5, &grid, params.w);
        let phi = 1.3;
        let h = 1e-4;
        let hp = build_hamiltonian(&params, &grid, &v, phi + h).unwrap();
        let hm = build_hamiltonian(&params, &grid, &v, phi - h).unwrap();
        let d = build_flux_derivative(&params, &grid, phi);
        let n = d.dim();
        let mut dev = 0.0f64;
        for c in 0..n {
            for r in c..=(c + d.bandwidth()).min(n - 1) {
                let fd = (hp.get(r, c) - hm.get(r, c)) / (2.0 * h);
                dev = dev.max((fd - d.get(r, c)).norm());
            }
        }
        assert!(dev < 1e-8, "dev = {dev}");
    }

    #[test]
    fn gauge_identity_and_negative_control() {
        let (params, grid) = setup(6.0);
        let clean = DisorderField::zeros(&grid);
        let dirty = sample_disorder(8, &grid, params.w);
        for (v, phi) in [(&clean, 0.0), (&dirty, PI)] {
            let h0 = build_hamiltonian(&params, &grid, v, phi).unwrap();
            let h1 = build_hamiltonian(&params, &grid, v, phi + 2.0 * PI).unwrap();
            assert!(gauge_shift_check(&h1, &h0, &grid, params.l).unwrap() <= 1e-12);
            let wrong = gauge_deviation(&h1, &h0, &grid, params.l, 2).unwrap();
            assert!(wrong > 0.1, "wrong unitary deviation {wrong}");
        }
    }

    #[test]
    fn truncation_examples() {
        let (params, grid) = setup(4.0);
        let v = sample_disorder(1, &grid, params.w);
        assert_eq!(truncate_disorder(&v, &grid, 0.0).values, v.values);
        let gone = truncate_disorder(&v, &grid, -grid.x_min);
        assert!(gone.values.iter().all(|&x| x == 0.0));
        let vd = truncate_disorder(&v, &grid, 5.0);
        for i in 0..grid.nx() {
            let x = grid.x(i);
            for j in 0..grid.ny {
                if (x + 4.0).abs() < 1e-9 {
                    assert_eq!(vd.get(i, j), 0.0);
                }
                if (x + 6.0).abs() < 1e-9 {
                    assert_eq!(vd.get(i, j), v.get(i, j));
                }
                if x > -5.0 + 1e-9 {
                    assert_eq!(vd.get(i, j), 0.0);
                } else {
                    assert_eq!(vd.get(i, j), v.get(i, j));
                }
            }
        }
    }

    #[test]
    fn triplet_export_lists_both_triangles() {
        let (params, grid) = setup(2.0);
        let h = build_edge_hamiltonian(&params, &grid, 0.3).unwrap();
        let mut buf = Vec::new();
        h.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with(&format!("# n {}", h.dim())));
        let entries: Vec<(usize, usize, f64, f64)> = lines
            .map(|l| {
                let f: Vec<&str> = l.split_whitespace().collect();
                (
                    f[0].parse().unwrap(),
                    f[1].parse().unwrap(),
                    f[2].parse().unwrap(),
                    f[3].parse().unwrap(),
                )
            })
            .collect();
        // five-point stencil: diagonal + 2 y bonds + up to 2 x bonds per site
        let n = h.dim();
        assert!(entries.len() <= 5 * n && entries.len() >= 3 * n);
        for &(r, c, re, im) in &entries {
            let mirror = entries.iter().find(|e| e.0 == c && e.1 == r).unwrap();
            assert_eq!((mirror.2, mirror.3), (re, -im));
        }
    }
}
