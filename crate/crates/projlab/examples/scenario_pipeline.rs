//! The scenario JSON surface end to end: write a scenario file, load and
//! validate it, then produce the same artifacts the `projlab` binary
//! emits (angles.csv, criteria.json/csv, trace.csv).
//!
//! Run with: cargo run --example scenario_pipeline

use std::fs;

use projlab::commands::{cmd_angles, cmd_criteria, cmd_run};
use projlab::scenario::{load_scenario, save_scenario};

fn main() -> projlab::Result<()> {
    let dir = std::env::temp_dir().join("projlab_scenario_example");
    fs::create_dir_all(&dir)?;
    let scenario_path = dir.join("scenario.json");

    fs::write(
        &scenario_path,
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [
    {"range": [[1.0, 0.0]]},
    {"range": [[0.0, 1.0]]}
  ],
  "alphas": [0.5, 0.5],
  "schedule": {"kind": "random", "mu": [0.5, 0.5], "seed": 42, "steps": 400},
  "criteria": ["averaged", "cyclic", "random"]
}
"#,
    )?;

    let scenario = load_scenario(&scenario_path)?;
    println!("loaded scenario: {} projectors, dim {}", scenario.projectors.len(), scenario.space.dim);

    // Round trip: saving and reloading yields the same scenario value.
    let copy_path = dir.join("scenario_copy.json");
    save_scenario(&scenario, &copy_path)?;
    assert_eq!(scenario, load_scenario(&copy_path)?);
    println!("round trip load -> save -> load is the identity");

    let angles = cmd_angles(&scenario, &dir)?;
    println!("\n{}:\n{}", angles.display(), fs::read_to_string(&angles)?);

    let outcome = cmd_criteria(&scenario, &dir)?;
    println!("{}:\n{}", outcome.csv_path.display(), fs::read_to_string(&outcome.csv_path)?);
    println!("all criteria pass: {}", outcome.all_pass());

    let summary = cmd_run(&scenario, &dir, false, None)?;
    println!(
        "run: {} steps, final deviation {:.3e}, violations {}, k_tau {:?}",
        summary.steps, summary.final_deviation, summary.violations, summary.k_tau
    );
    println!("trace written to {}", summary.trace_path.display());
    Ok(())
}
