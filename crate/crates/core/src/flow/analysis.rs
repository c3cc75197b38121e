use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{Branch, BranchSet, NearDegeneracy};
use crate::error::{Error, Result};
use crate::hamiltonian::build_flux_derivative;
use crate::model::{EnergyWindow, GridSpec, PhysicalParams};

/// Feynman–Hellmann edge current `j = ⟨ψ|∂H/∂Φ|ψ⟩` for a unit vector `psi` of `H(Φ)`.
pub fn branch_current(
    params: &PhysicalParams,
    grid: &GridSpec,
    phi: f64,
    psi: &[Complex64],
) -> f64 {
    build_flux_derivative(params, grid, phi).expectation(psi)
}

/// `dE/dΦ` along a branch: centred where both neighbours exist, one-sided at its ends.
pub fn finite_difference_slopes(branch: &Branch, dphi: f64) -> Vec<f64> {
    let e = &branch.energies;
    let n = e.len();
    if n < 2 {
        return vec![f64::NAN; n];
    }
    (0..n)
        .map(|i| match i {
            0 => (e[1] - e[0]) / dphi,
            _ if i == n - 1 => (e[n - 1] - e[n - 2]) / dphi,
            _ => (e[i + 1] - e[i - 1]) / (2.0 * dphi),
        })
        .collect()
}

/// Extremes of `L·dE/dΦ` over branch samples inside `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowBound {
    pub min_l_slope: f64,
    pub max_l_slope: f64,
    pub samples: usize,
    /// Lower bound compared against, if not vacuous.
    pub alpha: Option<f64>,
    pub positive: bool,
    /// `min ≥ α·(1 − rel_tol)`; `None` when there is no bound.
    pub above_alpha: Option<bool>,
}

impl FlowBound {
    pub fn pass(&self) -> bool {
        self.positive && self.above_alpha.unwrap_or(true)
    }
}

pub fn verify_flow_bound(bs: &BranchSet, alpha: Option<f64>, rel_tol: f64) -> FlowBound {
    let dphi = bs.dphi();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut samples = 0;
    for b in &bs.branches {
        if b.energies.len() < 2 {
            continue;
        }
        for (e, s) in b.energies.iter().zip(finite_difference_slopes(b, dphi)) {
            if bs.delta.contains(*e) {
                lo = lo.min(bs.l * s);
                hi = hi.max(bs.l * s);
                samples += 1;
            }
        }
    }
    FlowBound {
        min_l_slope: lo,
        max_l_slope: hi,
        samples,
        alpha,
        positive: samples > 0 && lo > 0.0,
        above_alpha: alpha.map(|a| samples > 0 && lo >= a * (1.0 - rel_tol)),
    }
}

/// Result of comparing `E_k(2π)` with the next level `E_{k+1}(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftCheck {
    /// `max_k |E_k(2π) − E_{k+1}(0)|` over full-period branches touching `Δ`.
    pub residual: f64,
    pub checked: usize,
    pub levels_start: usize,
    pub levels_end: usize,
}

pub fn verify_spectral_shift(bs: &BranchSet) -> Result<ShiftCheck> {
    let last = bs.last_index();
    let start = bs.levels_at(0);
    let end = bs.levels_at(last);
    let mut residual = 0.0f64;
    let mut checked = 0;
    for b in bs.branches.iter().filter(|b| b.spans(last)) {
        if !b.energies.iter().any(|e| bs.delta.contains(*e)) {
            continue;
        }
        let e0 = b.energies[0];
        let e1 = *b.energies.last().unwrap();
        let i = start
            .iter()
            .position(|&x| x == e0)
            .expect("branch start is a level");
        let r = start
            .get(i + 1)
            .map_or(f64::INFINITY, |next| (e1 - next).abs());
        residual = residual.max(r);
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::TooFewLevels {
            found: 0,
            needed: 1,
        });
    }
    if start.len() != end.len() {
        residual = f64::INFINITY;
    }
    Ok(ShiftCheck {
        residual,
        checked,
        levels_start: start.len(),
        levels_end: end.len(),
    })
}

/// Signed number of crossings of `fermi` by the tracked branches over the period.
pub fn crossing_count(bs: &BranchSet, fermi: f64) -> Result<i64> {
    let tol = 1e-8 * bs.b.max(1.0);
    for e in bs
        .levels_at(0)
        .into_iter()
        .chain(bs.levels_at(bs.last_index()))
    {
        if (e - fermi).abs() < tol {
            return Err(Error::FermiCollision {
                fermi,
                level: e,
                distance: (e - fermi).abs(),
            });
        }
    }
    let mut q = 0i64;
    for b in &bs.branches {
        for w in b.energies.windows(2) {
            let (a, c) = (w[0] >= fermi, w[1] >= fermi);
            if !a && c {
                q += 1;
            } else if a && !c {
                q -= 1;
            }
        }
    }
    Ok(q)
}

/// Consecutive Φ = 0 levels `(E_k, E_{k+1})` whose interval meets `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingRow {
    pub lower: f64,
    pub upper: f64,
    pub spacing: f64,
    /// Local density of edge levels per unit energy and length.
    pub density: f64,
    /// `s = L·ρ·|E_{k+1} − E_k|`.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingStats {
    pub rows: Vec<SpacingRow>,
    /// Counts of `s` in 30 bins of width 0.1 on `[0, 3]`.
    pub histogram: Vec<usize>,
    pub lower_bound: Option<f64>,
    pub upper_bound: f64,
    pub violations: usize,
}

pub const HIST_BINS: usize = 30;
pub const HIST_MAX: f64 = 3.0;

/// Level spacings at `Φ = 0`, rescaled by a five-level sliding mean, and the
/// check `2πα/L ≤ spacing ≤ 2π√(3B)/L` (each bound relaxed by `rel_tol`).
pub fn spacing_stats(bs: &BranchSet, alpha: Option<f64>, rel_tol: f64) -> Result<SpacingStats> {
    spacing_stats_from_levels(&bs.levels_at(0), &bs.delta, bs.l, bs.b, alpha, rel_tol)
}

/// [`spacing_stats`] on an ascending list of edge levels.
pub fn spacing_stats_from_levels(
    levels: &[f64],
    delta: &EnergyWindow,
    l: f64,
    b: f64,
    alpha: Option<f64>,
    rel_tol: f64,
) -> Result<SpacingStats> {
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let picked: Vec<usize> = (0..gaps.len())
        .filter(|&i| levels[i] < delta.hi && levels[i + 1] > delta.lo)
        .collect();
    if picked.is_empty() {
        return Err(Error::TooFewLevels {
            found: levels.iter().filter(|e| delta.contains(**e)).count(),
            needed: 2,
        });
    }
    let rows: Vec<SpacingRow> = picked
        .iter()
        .map(|&i| {
            // levels i−2 ..= i+2 around the pair (i, i+1)
            let a = i.saturating_sub(2);
            let b = (i + 2).min(gaps.len() - 1);
            let mean = gaps[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
            SpacingRow {
                lower: levels[i],
                upper: levels[i + 1],
                spacing: gaps[i],
                density: 1.0 / (l * mean),
                s: gaps[i] / mean,
            }
        })
        .collect();
    let mut histogram = vec![0; HIST_BINS];
    let width = HIST_MAX / HIST_BINS as f64;
    for r in &rows {
        // values within 1e-9 of a bin edge count in the upper bin
        let k = (r.s / width + 1e-9).floor();
        if k >= 0.0 && (k as usize) < HIST_BINS {
            histogram[k as usize] += 1;
        }
    }
    let lower_bound = alpha.map(|a| 2.0 * PI * a / l * (1.0 - rel_tol));
    let upper_bound = 2.0 * PI * (3.0 * b).sqrt() / l * (1.0 + rel_tol);
    let violations = rows
        .iter()
        .filter(|r| r.spacing > upper_bound || lower_bound.is_some_and(|lb| r.spacing < lb))
        .count();
    Ok(SpacingStats {
        rows,
        histogram,
        lower_bound,
        upper_bound,
        violations,
    })
}

/// `σ_e = (1/(2π|W|)) Σ_k ∫ dΦ χ_W(E_k(Φ))·j_k(Φ)`.
///
/// Within each flux cell the energy is interpolated linearly to find the
/// sub-interval spent inside `window`, and the current is integrated over it
/// by the trapezoidal rule.
pub fn edge_conductance(bs: &BranchSet, window: &EnergyWindow) -> f64 {
    let dphi = bs.dphi();
    let mut total = 0.0;
    for b in &bs.branches {
        for i in 0..b.energies.len().saturating_sub(1) {
            let (e0, e1) = (b.energies[i], b.energies[i + 1]);
            let (j0, j1) = (b.currents[i], b.currents[i + 1]);
            let (t0, t1) = if e1 == e0 {
                if window.contains(e0) {
                    (0.0, 1.0)
                } else {
                    continue;
                }
            } else {
                let ta = (window.lo - e0) / (e1 - e0);
                let tb = (window.hi - e0) / (e1 - e0);
                (ta.min(tb).max(0.0), ta.max(tb).min(1.0))
            };
            if t1 <= t0 {
                continue;
            }
            let ja = j0 + (j1 - j0) * t0;
            let jb = j0 + (j1 - j0) * t1;
            total += 0.5 * (ja + jb) * (t1 - t0) * dphi;
        }
    }
    total / (2.0 * PI * window.width())
}

/// Everything measured on one sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub l: f64,
    pub phi_steps: usize,
    pub branches: usize,
    pub min_overlap: f64,
    pub v_f: Option<f64>,
    pub flow: FlowBound,
    pub velocity_limit: f64,
    pub velocity_pass: bool,
    pub shift: ShiftCheck,
    pub fermi_energy: f64,
    pub q_f: i64,
    pub spacings: Vec<f64>,
    pub spacing_violations: usize,
    pub sigma_e: f64,
    pub sigma_e_error: f64,
    /// Largest `|⟨ψ|∂H/∂Φ|ψ⟩ − ΔE/ΔΦ|` over interior branch samples.
    pub fh_max_deviation: f64,
    pub near_degeneracies: Vec<NearDegeneracy>,
}

impl FlowReport {
    /// Flow positivity (and α when present), velocity bound, label shift and unit winding.
    pub fn invariants_hold(&self, shift_tol: f64) -> bool {
        self.flow.pass() && self.velocity_pass && self.shift.residual <= shift_tol && self.q_f == 1
    }
}

/// A Fermi level in `Δ`: its centre, moved by half the local spacing if it
/// sits on an endpoint level.
pub fn admissible_fermi(bs: &BranchSet, target: f64) -> f64 {
    let levels = bs.levels_at(0);
    let tol = 1e-8 * bs.b.max(1.0);
    let hit = levels
        .iter()
        .chain(bs.levels_at(bs.last_index()).iter())
        .any(|e| (e - target).abs() < tol);
    if !hit {
        return target;
    }
    let mean = if levels.len() >= 2 {
        (levels[levels.len() - 1] - levels[0]) / (levels.len() - 1) as f64
    } else {
        bs.delta.width()
    };
    target + 0.5 * mean
}

pub fn flow_report(
    bs: &BranchSet,
    v_f: Option<f64>,
    alpha: Option<f64>,
    rel_tol: f64,
) -> Result<FlowReport> {
    let flow = verify_flow_bound(bs, alpha, rel_tol);
    let velocity_limit = (3.0 * bs.b).sqrt();
    let shift = verify_spectral_shift(bs)?;
    let fermi_energy = admissible_fermi(bs, bs.delta.center());
    let q_f = crossing_count(bs, fermi_energy)?;
    let (spacings, spacing_violations) = match spacing_stats(bs, alpha, rel_tol) {
        Ok(s) => (s.rows.iter().map(|r| r.spacing).collect(), s.violations),
        Err(Error::TooFewLevels { .. }) => (Vec::new(), 0),
        Err(e) => return Err(e),
    };
    let sigma_e = edge_conductance(bs, &bs.delta);
    let dphi = bs.dphi();
    let mut fh = 0.0f64;
    for b in &bs.branches {
        let fd = finite_difference_slopes(b, dphi);
        for i in 1..b.energies.len().saturating_sub(1) {
            fh = fh.max((b.currents[i] - fd[i]).abs());
        }
    }
    Ok(FlowReport {
        l: bs.l,
        phi_steps: bs.last_index(),
        branches: bs.branches.len(),
        min_overlap: bs.min_overlap,
        v_f,
        velocity_pass: flow.max_l_slope <= velocity_limit * (1.0 + rel_tol),
        flow,
        velocity_limit,
        shift,
        fermi_energy,
        q_f,
        spacings,
        spacing_violations,
        sigma_e,
        sigma_e_error: (sigma_e - 1.0 / (2.0 * PI)).abs(),
        fh_max_deviation: fh,
        near_degeneracies: bs.near_degeneracies.clone(),
    })
}
