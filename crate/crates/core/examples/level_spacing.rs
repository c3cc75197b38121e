// Level spacings of the wall edge states at Φ = 0, rescaled by the local
// mean spacing, with the bounds 2πα/L ≤ spacing ≤ 2π√(3B)/L.

use qhedge::cli::{branch_table, velocity_bound};
use qhedge::flow::{edge_levels_at, spacing_stats_from_levels, write_histogram_csv, SpacingStats};
use qhedge::model::{gap_window, sample_disorder, GridSpec, PhysicalParams};
use qhedge::spectra::Solver;
use qhedge::Result;

pub fn run_example() -> Result<SpacingStats> {
    let params = PhysicalParams {
        l: 30.0,
        w: 0.02,
        ..Default::default()
    };
    let grid = GridSpec::default_for(&params);
    let v = sample_disorder(4, &grid, params.w);
    let levels = edge_levels_at(&params, &grid, &v, 0.0, Solver::Auto)?;
    let table = branch_table(&params, -6.0, 4.0, 201, 1)?;
    let alpha = velocity_bound(&params, &table, &[0.0])
        .ok()
        .and_then(|b| b.alpha);
    let (_, delta) = gap_window(&params)?;
    spacing_stats_from_levels(&levels, &delta, params.l, params.b, alpha, 0.05)
}

fn main() -> Result<()> {
    let s = run_example()?;
    for r in &s.rows {
        println!(
            "[{:.5}, {:.5}]  spacing {:.5}  s {:.4}",
            r.lower, r.upper, r.spacing, r.s
        );
    }
    println!(
        "bounds [{:?}, {:.5}], violations {}",
        s.lower_bound, s.upper_bound, s.violations
    );
    write_histogram_csv(&s, std::io::stdout())
}
