//! Final worst-group accuracy across mixture ratios, from subsetting (1:1) to
//! upsampling (the original ratio), with validation-based selection.

use groupforge::experiment::{run_mixture_ablation, ExperimentConfig, RunContext};

fn main() -> groupforge::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/mixture_ablation_waterbirds.json"
        )
        .into()
    });
    let config = ExperimentConfig::load(&path)?;
    let out = run_mixture_ablation(
        &config,
        &RunContext::new(std::env::temp_dir().join("groupforge-ablation")),
    )?;
    println!(
        "original ratio {:.3}",
        out.report["original_ratio"].as_f64().unwrap_or(f64::NAN)
    );
    for row in out.summary.iter().filter(|r| r.stat == "mean") {
        let std = out
            .summary
            .iter()
            .find(|r| r.label == row.label && r.stat == "std")
            .map_or(f64::NAN, |r| r.final_wga);
        println!(
            "{:<16} final WGA {:.4} ± {:.4}  peak {:.4}  val WGA {:.4}  {}",
            row.label,
            row.final_wga,
            std,
            row.peak_wga,
            row.val_wga.unwrap_or(f64::NAN),
            row.note
        );
    }
    println!("selected: {}", out.report["selection"]);
    Ok(())
}
