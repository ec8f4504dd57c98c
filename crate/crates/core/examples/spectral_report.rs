//! Trains one network per seed and reports the top group eigenvalues of its
//! penultimate features, `ρ(y)` per class, and the `(argmax ρ, argmax disparity)` tuples.

use groupforge::experiment::{run_spectral_report, ExperimentConfig, RunContext};
use groupforge::spectral::SpectralReport;

fn main() -> groupforge::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/spectral_report_waterbirds.json"
        )
        .into()
    });
    let config = ExperimentConfig::load(&path)?;
    let out = run_spectral_report(
        &config,
        &RunContext::new(std::env::temp_dir().join("groupforge-spectral")),
    )?;
    let report: SpectralReport = serde_json::from_value(out.report["spectral"].clone())?;

    for (g, top) in report.mean_group_top_k.iter().enumerate() {
        if let Some(top) = top {
            let head: Vec<String> = top.iter().take(5).map(|v| format!("{v:.3}")).collect();
            println!("group {g}: mean top eigenvalues {}", head.join(" "));
        }
    }
    for s in &report.rho_summary {
        println!(
            "class {}: rho {:.3} ± {:.3}",
            s.class,
            s.mean.unwrap_or(f64::NAN),
            s.std.unwrap_or(f64::NAN)
        );
    }
    for (t, c) in report.trials.iter().zip(&report.correspondences) {
        println!("{}: {c}", t.label);
    }
    Ok(())
}
