// Tabulates the clean edge branches ε_n(k) of the fibre operators h_k, then
// the Fermi velocity over one flux period and the flow lower bound α.

use qhedge::cli::{branch_table, velocity_bound, VelocityBound};
use qhedge::model::PhysicalParams;
use qhedge::spectra::BranchTable;
use qhedge::Result;

pub fn run_example() -> Result<(BranchTable, VelocityBound)> {
    let params = PhysicalParams::default();
    let table = branch_table(&params, -6.0, 4.0, 201, 2)?;
    let phis: Vec<f64> = (0..=64)
        .map(|p| 2.0 * std::f64::consts::PI * p as f64 / 64.0)
        .collect();
    let bound = velocity_bound(&params, &table, &phis)?;
    Ok((table, bound))
}

fn main() -> Result<()> {
    let (table, bound) = run_example()?;
    for i in (0..table.k.len()).step_by(20) {
        println!(
            "k = {:6.2}   ε_0 = {:.6}   ε_1 = {:.6}   ε_0' = {:.4}",
            table.k[i], table.eps[0][i], table.eps[1][i], table.d_eps0[i]
        );
    }
    println!(
        "monotonicity violations: {}",
        table.monotonicity_violations(1e-12)
    );
    println!(
        "v_F = {:.5} (M = {}, m̄ = {}), α = {:?}",
        bound.fermi.v_f, bound.fermi.m_center, bound.fermi.m_bar, bound.alpha
    );
    Ok(())
}
