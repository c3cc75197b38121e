// The exact chiral model: closed-form levels, the flow machinery run on
// them, and the upwind and Fourier discretizations of the operator.

use qhedge::toymodel::{toy_spectrum, toy_suite, ToyReport};
use qhedge::Result;

pub fn run_example() -> Result<ToyReport> {
    let s = toy_spectrum(0, 3, 2.0 * std::f64::consts::PI, 0.0, 0.0)?;
    assert_eq!(s.levels, vec![0.0, 1.0, 2.0, 3.0]);
    let (report, _, _) = toy_suite(2.0 * std::f64::consts::PI, -8, 8, 0.0, 128, 128)?;
    Ok(report)
}

fn main() -> Result<()> {
    let r = run_example()?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    println!("pass: {}", r.pass(128));
    Ok(())
}
