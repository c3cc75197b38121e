// Removes the impurities within a distance D of the wall and measures how
// the edge levels and eigenprojections approach those of the clean edge.

use qhedge::index::{decoupling_compare, write_decoupling_csv, DecouplingTable};
use qhedge::model::{sample_disorder, EnergyWindow, GridSpec, PhysicalParams};
use qhedge::Result;

pub fn run_example() -> Result<DecouplingTable> {
    let params = PhysicalParams {
        l: 6.0,
        w: 0.05,
        ..Default::default()
    };
    let grid = GridSpec::default_for(&params);
    let v = sample_disorder(3, &grid, params.w);
    let window = EnergyWindow::new(0.6, 1.4)?;
    decoupling_compare(&params, &grid, &v, &[2.0, 4.0, 6.0, 8.0], 0.0, &window)
}

fn main() -> Result<()> {
    let t = run_example()?;
    write_decoupling_csv(&t, std::io::stdout())?;
    println!("fitted slope of ln max|ΔE|: {:?}", t.fitted_slope);
    Ok(())
}
