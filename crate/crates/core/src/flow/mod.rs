//! Flux sweeps over one flux quantum, branch tracking and the spectral-flow
//! diagnostics built on them.
//!
//! Only states localized at the confining wall are tracked: the finite left
//! boundary of the cylinder carries a second, counter-propagating edge whose
//! levels also fall into the gap window. A state belongs to the wall edge when
//! at least half of its weight lies at `x > x_min/2`.

mod analysis;
mod output;

pub use analysis::{
    admissible_fermi, branch_current, crossing_count, edge_conductance, finite_difference_slopes,
    flow_report, spacing_stats, spacing_stats_from_levels, verify_flow_bound,
    verify_spectral_shift, FlowBound, FlowReport, ShiftCheck, SpacingRow, SpacingStats, HIST_BINS,
    HIST_MAX,
};
pub use output::{write_branches_csv, write_histogram_csv, write_spacings_csv};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_flux_derivative, build_hamiltonian, right_weight};
use crate::model::{gap_window, DisorderField, EnergyWindow, GridSpec, PhysicalParams};
use crate::spectra::{dot, eigen_window_with, Solver};

/// Smallest admissible number of flux steps per period.
pub const MIN_PHI_STEPS: usize = 64;
/// Minimum `|⟨ψ(Φ_p)|ψ(Φ_{p+1})⟩|` for two states to be the same branch.
pub const OVERLAP_THRESHOLD: f64 = 0.9;
/// Level gaps below this are reported as near-degeneracies.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Minimum weight at `x > x_min/2` for a state to count as a wall edge state.
pub const EDGE_WEIGHT: f64 = 0.5;

/// `Δ⁺`: `Δ` widened on both sides by the largest flow `2π√(3B)/L` over one
/// period, clipped to the isolated-spectrum window.
pub fn tracking_window(params: &PhysicalParams) -> Result<EnergyWindow> {
    let (g0, delta) = gap_window(params)?;
    delta
        .widened(2.0 * PI * params.max_flow_rate() / params.l)
        .intersect(&g0)
}

/// A tracked eigenvalue branch `E_k(Φ)` on a contiguous run of flux points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub label: usize,
    /// Flux index of the first sample.
    pub start: usize,
    pub energies: Vec<f64>,
    /// Feynman–Hellmann `⟨ψ|∂H/∂Φ|ψ⟩` at each sample.
    pub currents: Vec<f64>,
}

impl Branch {
    pub fn end(&self) -> usize {
        self.start + self.energies.len() - 1
    }

    pub fn energy_at(&self, p: usize) -> Option<f64> {
        p.checked_sub(self.start)
            .and_then(|i| self.energies.get(i).copied())
    }

    pub fn current_at(&self, p: usize) -> Option<f64> {
        p.checked_sub(self.start)
            .and_then(|i| self.currents.get(i).copied())
    }

    pub fn spans(&self, last: usize) -> bool {
        self.start == 0 && self.end() == last
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearDegeneracy {
    pub phi_index: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Eigenvectors of the tracked levels at one flux point, ordered by energy.
#[derive(Debug, Clone)]
pub struct LevelFrame {
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Branches `E_k(Φ)` over the flux grid `Φ_p = 2πp/P`, `p = 0..=P`.
#[derive(Debug, Clone)]
pub struct BranchSet {
    pub phis: Vec<f64>,
    pub l: f64,
    pub b: f64,
    /// Window in which the flow statements are checked.
    pub delta: EnergyWindow,
    /// Window in which levels are tracked.
    pub tracking: EnergyWindow,
    pub branches: Vec<Branch>,
    pub near_degeneracies: Vec<NearDegeneracy>,
    /// Smallest overlap accepted while matching.
    pub min_overlap: f64,
    /// Levels and eigenvectors at `Φ = 0` and `Φ = 2π`.
    pub endpoints: Option<(LevelFrame, LevelFrame)>,
}

impl BranchSet {
    pub fn last_index(&self) -> usize {
        self.phis.len() - 1
    }

    pub fn dphi(&self) -> f64 {
        self.phis[1] - self.phis[0]
    }

    /// Tracked energies at flux index `p`, ascending.
    pub fn levels_at(&self, p: usize) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .branches
            .iter()
            .filter_map(|b| b.energy_at(p))
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub phi_steps: usize,
    pub solver: Solver,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            phi_steps: 128,
            solver: Solver::Auto,
        }
    }
}

struct PointSolve {
    energies: Vec<f64>,
    currents: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
}

fn solve_point(
    params: &PhysicalParams,
    grid: &GridSpec,
    disorder: &DisorderField,
    phi: f64,
    window: &EnergyWindow,
    solver: Solver,
) -> Result<PointSolve> {
    let h = build_hamiltonian(params, grid, disorder, phi)?;
    let dh = build_flux_derivative(params, grid, phi);
    let layout = *h.layout().expect("grid matrix carries its layout");
    let pairs = eigen_window_with(&h, window, solver)?;
    let mut out = PointSolve {
        energies: Vec::new(),
        currents: Vec::new(),
        vectors: Vec::new(),
    };
    for (e, v) in pairs.values.into_iter().zip(pairs.vectors) {
        if right_weight(grid, &layout, &v) >= EDGE_WEIGHT {
            out.currents.push(dh.expectation(&v));
            out.energies.push(e);
            out.vectors.push(v);
        }
    }
    Ok(out)
}

/// Wall edge levels of `H(Φ)` in the tracking window, ascending.
pub fn edge_levels_at(
    params: &PhysicalParams,
    grid: &GridSpec,
    disorder: &DisorderField,
    phi: f64,
    solver: Solver,
) -> Result<Vec<f64>> {
    params.validate()?;
    grid.validate(params)?;
    Ok(solve_point(
        params,
        grid,
        disorder,
        phi,
        &tracking_window(params)?,
        solver,
    )?
    .energies)
}

/// Greedy overlap matching; returns `match_of[a] = Some(b)`.
fn match_levels(prev: &PointSolve, next: &PointSolve) -> (Vec<Option<usize>>, Vec<f64>) {
    let mut pairs = Vec::new();
    let mut best = vec![0.0f64; prev.vectors.len()];
    for (a, va) in prev.vectors.iter().enumerate() {
        for (b, vb) in next.vectors.iter().enumerate() {
            let o = dot(va, vb).norm();
            best[a] = best[a].max(o);
            if o >= OVERLAP_THRESHOLD {
                pairs.push((o, (prev.energies[a] - next.energies[b]).abs(), a, b));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    let mut taken_a = vec![None; prev.vectors.len()];
    let mut taken_b = vec![false; next.vectors.len()];
    for (_, _, a, b) in pairs {
        if taken_a[a].is_none() && !taken_b[b] {
            taken_a[a] = Some(b);
            taken_b[b] = true;
        }
    }
    (taken_a, best)
}

/// Tracks the wall edge levels of `H(Φ)` in `Δ⁺` over one flux period.
///
/// Eigensolves run in parallel over chunks of flux points; matching is a
/// sequential pass in flux order, so the result does not depend on the
/// thread count.
pub fn sweep_flux(
    params: &PhysicalParams,
    grid: &GridSpec,
    disorder: &DisorderField,
    opts: &SweepOptions,
) -> Result<BranchSet> {
    params.validate()?;
    grid.validate(params)?;
    if opts.phi_steps < MIN_PHI_STEPS {
        return Err(Error::InvalidParams {
            field: "phi_steps",
            reason: format!(
                "need at least {MIN_PHI_STEPS} flux steps, got {}",
                opts.phi_steps
            ),
        });
    }
    let (_, delta) = gap_window(params)?;
    let tracking = tracking_window(params)?;
    let steps = opts.phi_steps;
    let phis: Vec<f64> = (0..=steps)
        .map(|p| 2.0 * PI * p as f64 / steps as f64)
        .collect();

    let mut branches: Vec<Branch> = Vec::new();
    let mut near_degeneracies = Vec::new();
    let mut min_overlap = 1.0f64;
    let mut open: Vec<usize> = Vec::new();
    let mut prev: Option<PointSolve> = None;
    let mut first_frame = None;
    let chunk = (2 * rayon::current_num_threads()).max(4);
    for block in (0..=steps).collect::<Vec<_>>().chunks(chunk) {
        let solved: Vec<Result<PointSolve>> = block
            .par_iter()
            .map(|&p| solve_point(params, grid, disorder, phis[p], &tracking, opts.solver))
            .collect();
        for (&p, point) in block.iter().zip(solved) {
            let point = point?;
            for w in point.energies.windows(2) {
                if w[1] - w[0] < DEGENERACY_GAP {
                    near_degeneracies.push(NearDegeneracy {
                        phi_index: p,
                        lower: w[0],
                        upper: w[1],
                    });
                }
            }
            let mut now_open = vec![usize::MAX; point.energies.len()];
            match &prev {
                None => {
                    first_frame = Some(LevelFrame {
                        energies: point.energies.clone(),
                        vectors: point.vectors.clone(),
                    });
                }
                Some(before) => {
                    let (matched, best) = match_levels(before, &point);
                    for (a, m) in matched.iter().enumerate() {
                        match m {
                            Some(b) => {
                                let id = open[a];
                                let br = &mut branches[id];
                                br.energies.push(point.energies[*b]);
                                br.currents.push(point.currents[*b]);
                                now_open[*b] = id;
                                let o = dot(&before.vectors[a], &point.vectors[*b]).norm();
                                min_overlap = min_overlap.min(o);
                            }
                            None if delta.contains(before.energies[a]) => {
                                return Err(Error::TrackingFailure {
                                    phi_index: p - 1,
                                    energy: before.energies[a],
                                    overlap: best[a],
                                });
                            }
                            None => {}
                        }
                    }
                }
            }
            for (b, slot) in now_open.iter_mut().enumerate() {
                if *slot == usize::MAX {
                    *slot = branches.len();
                    branches.push(Branch {
                        label: branches.len(),
                        start: p,
                        energies: vec![point.energies[b]],
                        currents: vec![point.currents[b]],
                    });
                }
            }
            open = now_open;
            prev = Some(point);
        }
    }
    let last = prev.expect("at least one flux point");
    let endpoints = first_frame.map(|f| {
        (
            f,
            LevelFrame {
                energies: last.energies,
                vectors: last.vectors,
            },
        )
    });
    Ok(relabel(BranchSet {
        phis,
        l: params.l,
        b: params.b,
        delta,
        tracking,
        branches,
        near_degeneracies,
        min_overlap,
        endpoints,
    }))
}

/// Orders branches by `(start, first energy)` and renumbers them.
pub(crate) fn relabel(mut bs: BranchSet) -> BranchSet {
    bs.branches.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then(a.energies[0].total_cmp(&b.energies[0]))
    });
    for (i, b) in bs.branches.iter_mut().enumerate() {
        b.label = i;
    }
    bs
}
