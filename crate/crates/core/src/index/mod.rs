//! Relative index of pairs of projections, the crossing-count/index
//! comparison on a flux sweep, and the decoupling of the edge from disorder
//! far inside the bulk.
//!
//! In finite dimension every pair of projections has a trace-class
//! difference, so `Ind(P; Q) = Tr(P − Q)` throughout.

mod decouple;
mod projection;

pub use decouple::{decoupling_compare, write_decoupling_csv, DecouplingRow, DecouplingTable};
pub use projection::{
    index_identities_check, random_projection, random_unitary, relative_index, spectral_projection,
    IdentityReport, Projection, ProjectionCheck, FERMI_CLEARANCE, HERMITICITY_TOL, IDEMPOTENCY_TOL,
    SPECTRUM_TOL, TRACE_TOL,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{crossing_count, BranchSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingIndex {
    pub fermi: f64,
    /// Signed crossing count of the tracked branches.
    pub q_branches: i64,
    /// `Ind(P_F; P_F^nc) = Tr P_F^c`.
    pub q_index: i64,
    pub equal: bool,
}

/// Compares the crossing count at `fermi` with the trace of `P_F^c`, the
/// projection onto the `Φ = 0` eigenvectors of branches that start below
/// `fermi` and later reach it.
///
/// `P_F` and `P_F^nc = P_F − P_F^c` share every level below the tracking
/// window, so both are restricted to the tracked levels; the difference, and
/// hence the index, is unchanged.
pub fn crossing_vs_index(bs: &BranchSet, fermi: f64) -> Result<CrossingIndex> {
    let q_branches = crossing_count(bs, fermi)?;
    let (start, _) = bs.endpoints.as_ref().ok_or_else(|| {
        Error::InvalidProjection("branch set carries no Φ = 0 eigenvectors".into())
    })?;
    let dim = start.vectors.first().map_or(0, Vec::len);
    let crosses = |e0: f64| {
        bs.branches
            .iter()
            .filter(|b| b.start == 0 && b.energies[0] == e0)
            .any(|b| b.energies.iter().any(|&e| e >= fermi))
    };
    let mut below = Vec::new();
    let mut non_crossing = Vec::new();
    for (&e, v) in start.energies.iter().zip(&start.vectors) {
        if e <= fermi {
            below.push(v.clone());
            if !crosses(e) {
                non_crossing.push(v.clone());
            }
        }
    }
    let p = Projection::from_frame(
        dim,
        below,
        format!("tracked levels of H(0) below E_F = {fermi}"),
    )?;
    let pnc = Projection::from_frame(
        dim,
        non_crossing,
        format!("non-crossing levels below E_F = {fermi}"),
    )?;
    let q_index = relative_index(&p, &pnc)?;
    Ok(CrossingIndex {
        fermi,
        q_branches,
        q_index,
        equal: q_branches == q_index,
    })
}

/// `count` Fermi levels spread over the interior of `Δ`, each moved off the
/// endpoint spectrum if needed.
pub fn fermi_levels(bs: &BranchSet, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let t = bs.delta.lo + bs.delta.width() * (i as f64 + 0.5) / count as f64;
            crate::flow::admissible_fermi(bs, t)
        })
        .collect()
}
