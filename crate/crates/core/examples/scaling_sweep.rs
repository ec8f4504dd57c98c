//! Worst-group accuracy, training accuracy and interpolation epoch as the hidden
//! width grows, for each balancing strategy.

use groupforge::experiment::{run_scaling_sweep, ExperimentConfig, RunContext};

fn main() -> groupforge::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/scaling_sweep_waterbirds.json"
        )
        .into()
    });
    let config = ExperimentConfig::load(&path)?;
    let out = run_scaling_sweep(
        &config,
        &RunContext::new(std::env::temp_dir().join("groupforge-sweep")),
    )?;
    println!(
        "{:<12} {:>6} {:>8} {:>10} {:>10} {:>8}",
        "strategy", "width", "params", "final WGA", "train acc", "interp"
    );
    for row in out.summary.iter().filter(|r| r.stat == "mean") {
        let interp = row
            .interpolation_epoch
            .map_or("-".into(), |e| format!("{e:.1}"));
        println!(
            "{:<12} {:>6} {:>8} {:>10.4} {:>10.4} {:>8}",
            row.strategy, row.width, row.param_count, row.final_wga, row.final_train_acc, interp
        );
    }
    Ok(())
}
