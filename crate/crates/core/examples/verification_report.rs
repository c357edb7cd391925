//! Runs the two-mode quantum suite and prints the JSON report.

use ghostfree::report::{run_suite, RunConfig, Suite};

fn main() -> ghostfree::Result<()> {
    let mut config = RunConfig { suite: Suite::PuQuantum, seed: 1, ..Default::default() };
    config.parameters.insert("omega1".into(), 3.0);
    config.parameters.insert("omega2".into(), 0.5);
    let reports = run_suite(&config)?;
    for r in &reports {
        println!("{:<28} {:>10.3e} <= {:.0e}: {}", r.check_name, r.residual, r.tolerance, r.passed);
    }
    println!("{}", serde_json::to_string_pretty(&reports[0]).expect("report serializes"));
    Ok(())
}
