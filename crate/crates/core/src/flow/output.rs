use std::io::Write;

use super::analysis::{finite_difference_slopes, SpacingStats, HIST_BINS, HIST_MAX};
use super::BranchSet;
use crate::error::Result;
use crate::io::fmt_f64;

/// `phi,k,E,dE_dphi,j_k`: one row per branch sample, flux-major.
pub fn write_branches_csv<W: Write>(bs: &BranchSet, mut w: W) -> Result<()> {
    writeln!(w, "phi,k,E,dE_dphi,j_k")?;
    let slopes: Vec<Vec<f64>> = bs
        .branches
        .iter()
        .map(|b| finite_difference_slopes(b, bs.dphi()))
        .collect();
    for (p, phi) in bs.phis.iter().enumerate() {
        for (b, s) in bs.branches.iter().zip(&slopes) {
            if let (Some(e), Some(j)) = (b.energy_at(p), b.current_at(p)) {
                let d = s[p - b.start];
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_f64(*phi),
                    b.label,
                    fmt_f64(e),
                    fmt_f64(d),
                    fmt_f64(j)
                )?;
            }
        }
    }
    Ok(())
}

/// `E_lower,E_upper,spacing,density,s`.
pub fn write_spacings_csv<W: Write>(stats: &SpacingStats, mut w: W) -> Result<()> {
    writeln!(w, "E_lower,E_upper,spacing,density,s")?;
    for r in &stats.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.lower),
            fmt_f64(r.upper),
            fmt_f64(r.spacing),
            fmt_f64(r.density),
            fmt_f64(r.s)
        )?;
    }
    Ok(())
}

/// `s_lo,s_hi,count`.
pub fn write_histogram_csv<W: Write>(stats: &SpacingStats, mut w: W) -> Result<()> {
    writeln!(w, "s_lo,s_hi,count")?;
    let width = HIST_MAX / HIST_BINS as f64;
    for (k, c) in stats.histogram.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(k as f64 * width),
            fmt_f64((k + 1) as f64 * width),
            c
        )?;
    }
    Ok(())
}
