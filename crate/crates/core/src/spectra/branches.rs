use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use super::tridiag::lowest_eigenvalues;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_edge_1d, YDispersion};
use crate::io::fmt_f64;
use crate::model::{EnergyWindow, GridSpec, PhysicalParams};

/// Clean edge dispersion `ε_n(k)` sampled on a k grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTable {
    pub k: Vec<f64>,
    /// `eps[n][i] = ε_n(k[i])`.
    pub eps: Vec<Vec<f64>>,
    /// `ε_0′(k[i])` by centred differences (one-sided at the ends).
    pub d_eps0: Vec<f64>,
}

fn derivative(k: &[f64], f: &[f64]) -> Vec<f64> {
    let n = k.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (f[b] - f[a]) / (k[b] - k[a])
        })
        .collect()
}

/// Locates `x` in the ascending grid: `(i, t)` with `x = (1−t)·k[i] + t·k[i+1]`.
fn bracket(k: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = k.len();
    if n < 2 || !(x >= k[0] && x <= k[n - 1]) {
        return None;
    }
    let i = k.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    Some((i, (x - k[i]) / (k[i + 1] - k[i])))
}

impl BranchTable {
    pub fn n_branches(&self) -> usize {
        self.eps.len()
    }

    fn interp(&self, f: &[f64], x: f64) -> Option<f64> {
        bracket(&self.k, x).map(|(i, t)| (1.0 - t) * f[i] + t * f[i + 1])
    }

    /// `ε_0(k)` by linear interpolation; `None` outside the table.
    pub fn eps0_at(&self, k: f64) -> Option<f64> {
        self.interp(&self.eps[0], k)
    }

    pub fn d_eps0_at(&self, k: f64) -> Option<f64> {
        self.interp(&self.d_eps0, k)
    }

    /// Count of `(n, i)` with `ε_n(k[i+1]) < ε_n(k[i]) − tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> usize {
        self.eps
            .iter()
            .map(|row| row.windows(2).filter(|p| p[1] < p[0] - tol).count())
            .sum()
    }

    /// Count of samples with `ε_n(k) < (n+½)B − tol`.
    /// Per branch, `max_k ((n + ½)B − ε_n(k))`; positive values are discretization error.
    pub fn landau_floor_deficits(&self, b: f64) -> Vec<f64> {
        self.eps
            .iter()
            .enumerate()
            .map(|(n, row)| {
                row.iter()
                    .map(|&e| (n as f64 + 0.5) * b - e)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    pub fn landau_floor_violations(&self, b: f64, tol: f64) -> usize {
        self.eps
            .iter()
            .enumerate()
            .map(|(n, row)| {
                row.iter()
                    .filter(|&&e| e < (n as f64 + 0.5) * b - tol)
                    .count()
            })
            .sum()
    }

    /// Columns `k, eps_0, …, eps_N, deps_0`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["k".to_string()];
        header.extend((0..self.eps.len()).map(|n| format!("eps_{n}")));
        header.push("deps_0".into());
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.k.len() {
            let mut row = vec![fmt_f64(self.k[i])];
            row.extend(self.eps.iter().map(|e| fmt_f64(e[i])));
            row.push(fmt_f64(self.d_eps0[i]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Grid for dispersion tables: 8 points per magnetic length and the left wall
/// at `−20/√B`, far enough that it does not bend the branches on `k ≥ −8/√B`.
pub fn branch_grid(params: &PhysicalParams) -> GridSpec {
    let g = GridSpec::with_resolution(params, 8.0);
    GridSpec {
        x_min: g.x_min - 8.0 * params.magnetic_length(),
        ..g
    }
}

/// `ε_0 … ε_{n_max}` of the fibre operators `h_k` with the continuum parabola.
pub fn edge_branches(
    params: &PhysicalParams,
    grid: &GridSpec,
    k_grid: &[f64],
    n_max: usize,
) -> Result<BranchTable> {
    edge_branches_with(params, grid, k_grid, n_max, YDispersion::Continuum)
}

pub fn edge_branches_with(
    params: &PhysicalParams,
    grid: &GridSpec,
    k_grid: &[f64],
    n_max: usize,
    y: YDispersion,
) -> Result<BranchTable> {
    if k_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Config("k grid must be strictly increasing".into()));
    }
    if grid.nx() <= n_max {
        return Err(Error::Config(format!(
            "{} x nodes cannot resolve {} branches",
            grid.nx(),
            n_max + 1
        )));
    }
    let cols: Vec<Vec<f64>> = k_grid
        .par_iter()
        .map(|&k| lowest_eigenvalues(&build_edge_1d(params, grid, k, y), n_max + 1, 1e-13))
        .collect();
    let eps: Vec<Vec<f64>> = (0..=n_max)
        .map(|n| cols.iter().map(|c| c[n]).collect())
        .collect();
    let d_eps0 = derivative(k_grid, &eps[0]);
    Ok(BranchTable {
        k: k_grid.to_vec(),
        eps,
        d_eps0,
    })
}

/// Band centre `M`, half-width `m̄` and `v_F = min_{|m−M|≤m̄} ε_0′(2πm/L + Φ/L)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FermiVelocity {
    pub m_center: i64,
    pub m_bar: i64,
    pub v_f: f64,
}

/// Picks `M` with `ε_0(k_M)` in `delta` and nearest its centre, then the
/// smallest `m̄` for which every level of `delta` is at least `B/2 − 2δ` away
/// from both `ε_0(k_{M±m̄})`; here `B` and `δ` are read off `delta` as its
/// centre and half-width.
pub fn fermi_velocity(
    table: &BranchTable,
    delta: &EnergyWindow,
    l: f64,
    phi: f64,
) -> Result<FermiVelocity> {
    let b = delta.center();
    let half = 0.5 * delta.width();
    let gap = 0.5 * b - 2.0 * half;
    if gap <= 0.0 {
        return Err(Error::InvalidParams {
            field: "delta",
            reason: format!("B/2 − 2δ = {gap} must be positive"),
        });
    }
    let km = |m: i64| (2.0 * PI * m as f64 + phi) / l;
    let (k0, k1) = (table.k[0], *table.k.last().unwrap());
    let m_lo = ((k0 * l - phi) / (2.0 * PI)).ceil() as i64;
    let m_hi = ((k1 * l - phi) / (2.0 * PI)).floor() as i64;
    let m_center = (m_lo..=m_hi)
        .filter_map(|m| table.eps0_at(km(m)).map(|e| (m, e)))
        .filter(|(_, e)| delta.contains(*e))
        .min_by(|x, y| (x.1 - b).abs().total_cmp(&(y.1 - b).abs()))
        .map(|(m, _)| m)
        .ok_or(Error::NoBranchInWindow {
            lo: delta.lo,
            hi: delta.hi,
        })?;
    let mut m_bar = 1;
    loop {
        let (Some(up), Some(down)) = (
            table.eps0_at(km(m_center + m_bar)),
            table.eps0_at(km(m_center - m_bar)),
        ) else {
            return Err(Error::Config(format!(
                "k grid [{k0}, {k1}] too short to separate ε_0 from the window by B/2 − 2δ = {gap}"
            )));
        };
        if up - delta.hi >= gap && delta.lo - down >= gap {
            break;
        }
        m_bar += 1;
    }
    let v_f = (m_center - m_bar..=m_center + m_bar)
        .map(|m| table.d_eps0_at(km(m)).expect("band lies inside the table"))
        .fold(f64::INFINITY, f64::min);
    Ok(FermiVelocity {
        m_center,
        m_bar,
        v_f,
    })
}

/// The smallest [`fermi_velocity`] over the flux values `phis`; flux values
/// at which no `ε_0(k_m)` falls in `delta` are skipped.
pub fn min_fermi_velocity(
    table: &BranchTable,
    delta: &EnergyWindow,
    l: f64,
    phis: &[f64],
) -> Result<FermiVelocity> {
    let mut best: Option<FermiVelocity> = None;
    for &phi in phis {
        let f = match fermi_velocity(table, delta, l, phi) {
            Ok(f) => f,
            Err(Error::NoBranchInWindow { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|b| f.v_f < b.v_f) {
            best = Some(f);
        }
    }
    best.ok_or(Error::NoBranchInWindow {
        lo: delta.lo,
        hi: delta.hi,
    })
}

/// Lower bound on `L·dE/dΦ`, or the marker that the bound is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaBound {
    Bound(f64),
    /// The bracket `1 − 2(1 + √(3B)/v_F)·w²/(B/2 − 2δ)²` is not positive.
    Vacuous {
        bracket: f64,
    },
}

impl AlphaBound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            AlphaBound::Bound(a) => Some(a),
            AlphaBound::Vacuous { .. } => None,
        }
    }
}

/// `α = v_F·[1 − 2(1 + √(3B)/v_F)·w²/(B/2 − 2δ)²]`.
pub fn alpha_bound(v_f: f64, b: f64, w: f64, delta: f64) -> Result<AlphaBound> {
    if !(v_f > 0.0) {
        return Err(Error::InvalidParams {
            field: "v_f",
            reason: format!("Fermi velocity must be positive, got {v_f}"),
        });
    }
    let gap = 0.5 * b - 2.0 * delta;
    if !(gap > 0.0) {
        return Err(Error::InvalidParams {
            field: "delta",
            reason: format!("B/2 − 2δ = {gap} must be positive"),
        });
    }
    let bracket = 1.0 - 2.0 * (1.0 + (3.0 * b).sqrt() / v_f) * w * w / (gap * gap);
    Ok(if bracket > 0.0 {
        AlphaBound::Bound(v_f * bracket)
    } else {
        AlphaBound::Vacuous { bracket }
    })
}
