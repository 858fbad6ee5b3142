//! Runs every stage from a JSON config and prints the artifact manifest.
//!
//! ```bash
//! cargo run --release -p reef-sonify --example full_pipeline -- crates/core/examples/data/pipeline.json
//! ```

use reef_sonify::pipeline::{run_pipeline, PipelineConfig, SyntheticSource};

fn main() -> reef_sonify::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(p) => PipelineConfig::from_file(p.as_ref())?,
        None => PipelineConfig {
            synthetic: Some(SyntheticSource::default()),
            ..Default::default()
        },
    };
    let set = run_pipeline(&cfg)?;
    println!("config {}", set.config_digest);
    for (name, digest) in &set.files {
        println!("{}  {name}", &digest[..16]);
    }
    for r in &set.reports {
        println!(
            "{}: {} voices, {:.0} s, {} muted, gain {:.2}",
            r.config.mode.tag(),
            r.voices,
            r.duration_s,
            r.muted_voices,
            r.norm_gain
        );
    }
    Ok(())
}
