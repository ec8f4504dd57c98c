//! Peak versus final worst-group accuracy for every balancing strategy, using the
//! checked-in collapse configuration. Takes a minute or two in release mode.
//!
//! cargo run --release --example train_collapse [-- configs/collapse_celeba.json]

use groupforge::experiment::{run_collapse, ExperimentConfig, RunContext};

fn main() -> groupforge::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/collapse_waterbirds.json"
        )
        .into()
    });
    let config = ExperimentConfig::load(&path)?;
    let out = run_collapse(
        &config,
        &RunContext::new(std::env::temp_dir().join("groupforge-collapse")),
    )?;

    println!(
        "{:<12} {:>9} {:>9} {:>9}  per-seed peak-final",
        "strategy", "peak", "final", "gap"
    );
    for row in out.summary.iter().filter(|r| r.stat == "mean") {
        let gaps: Vec<String> = out
            .cells_for(&row.label)
            .map(|c| format!("{:.3}", c.peak_minus_final()))
            .collect();
        println!(
            "{:<12} {:>9.4} {:>9.4} {:>9.4}  {}",
            row.label,
            row.peak_wga,
            row.final_wga,
            row.peak_wga - row.final_wga,
            gaps.join(" ")
        );
    }
    println!(
        "best balanced strategy: {}",
        out.report["best_balanced_strategy"]
    );
    println!("outputs in {}", out.dir.display());
    Ok(())
}
