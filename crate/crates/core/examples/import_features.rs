//! Spectral analysis of features produced elsewhere. The input is a CSV with a
//! `class,spurious,z_0,...` header; without an argument a small bank is generated.

use groupforge::rng::seeded;
use groupforge::spectral::{FeatureBank, SpectralTrial};
use groupforge::synthetic::{generate, preset};

fn main() -> groupforge::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let path = std::env::temp_dir().join("groupforge-features.csv");
            let spec = preset("celeba-like")?.with_size(2000);
            generate(&spec, &mut seeded(3))?.write_csv(&path, "z")?;
            path
        }
    };
    let bank = FeatureBank::from_csv(&path, None)?;
    let trial = SpectralTrial::analyze("imported", &bank, 5, None)?;
    for g in &trial.groups {
        let top: Vec<String> = g
            .top_k
            .iter()
            .flatten()
            .map(|v| format!("{v:.3}"))
            .collect();
        println!(
            "group {} (class {}, spurious {}, n={}{}): {}",
            g.group,
            g.class,
            g.spurious,
            g.size,
            if g.minority { ", minority" } else { "" },
            top.join(" ")
        );
    }
    for (y, rho) in trial.rho.iter().enumerate() {
        println!(
            "rho({y}) = {}",
            rho.map_or("undefined".into(), |r| format!("{r:.4}"))
        );
    }
    Ok(())
}
