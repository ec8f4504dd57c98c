//! Draws each preset and compares realized group counts with the preset table.
//! Pass a path to also write the waterbirds-like draw as CSV.

use groupforge::build_partition;
use groupforge::rng::seeded;
use groupforge::synthetic::{generate, preset, PRESET_NAMES};

fn main() -> groupforge::Result<()> {
    for name in PRESET_NAMES {
        let spec = preset(name)?;
        let data = generate(&spec, &mut seeded(0))?;
        let p = build_partition(&data, spec.schema)?;
        let expected: Vec<String> = spec
            .normalized_proportions()
            .iter()
            .map(|q| format!("{:.0}", q * spec.m as f64))
            .collect();
        println!(
            "{name:<20} dim {:>2}  groups {:?}  expected [{}]  class ratio {:.2}",
            data.dim(),
            p.group_sizes(),
            expected.join(", "),
            p.class_imbalance_ratio()?
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let spec = preset("waterbirds-like")?;
        generate(&spec, &mut seeded(0))?.write_csv(&path, "x")?;
        println!("wrote {path}");
    }
    Ok(())
}
