// Drives the batch front end from a JSON configuration, as the `qhedge`
// binary does, and lists the artifacts it writes.

use qhedge::cli::{run, Command, Outcome};
use qhedge::config::RunConfig;
use qhedge::Result;

pub fn run_example() -> Result<Outcome> {
    let out = std::env::temp_dir().join("qhedge_batch_run");
    let text = format!(
        r#"{{ "toy": {{ "l": 12.0, "m_lo": -6, "m_hi": 6, "n_sites": 64 }}, "out": {} }}"#,
        serde_json::to_string(&out)?
    );
    let cfg = RunConfig::from_json(&text)?;
    run(Command::Toy, &cfg)
}

fn main() -> Result<()> {
    let o = run_example()?;
    println!("pass: {} ({})", o.pass, o.summary);
    for a in o.artifacts {
        println!("  {}", a.display());
    }
    Ok(())
}
