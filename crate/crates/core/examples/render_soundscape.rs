//! Full offline render of a synthetic reef with the default timing
//! (78 one-second days plus a 5 s fade) in either rendition.
//!
//! ```bash
//! cargo run --release -p reef-sonify --example render_soundscape -- ad1 out/ad1
//! cargo run --release -p reef-sonify --example render_soundscape -- ad2 out/ad2
//! ```

use std::path::PathBuf;
use std::time::Instant;

use reef_sonify::clustering::{cluster_observations, ClusterParams};
use reef_sonify::ingest::{compute_bbox, generate_synthetic_dataset, BBox};
use reef_sonify::mapping::{build_timeline, MappingParams};
use reef_sonify::renderer::{render, write_render_outputs, Mode, RenderConfig};

fn main() -> reef_sonify::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode = match args.next().as_deref() {
        Some("ad2") => Mode::Ad2,
        _ => Mode::Ad1,
    };
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| format!("render_{}", mode.tag())));

    let obs = generate_synthetic_dataset(7, 517, &BBox::hawaii());
    let params = ClusterParams {
        target_sources: Some(176),
        ..Default::default()
    };
    let (_, eps, clusters) = cluster_observations(&obs, &params)?;
    let timeline = build_timeline(&clusters, &compute_bbox(&obs)?, &MappingParams::default())?;
    println!("{} voices (eps {eps:.4} deg)", timeline.len());

    let cfg = RenderConfig {
        mode,
        master_seed: 2019,
        ..Default::default()
    };
    let t0 = Instant::now();
    let (block, mut report) = render(&cfg, &timeline)?;
    println!(
        "rendered {} frames x {} channels in {:.1} s",
        block.frames(),
        block.channels.len(),
        t0.elapsed().as_secs_f64()
    );
    let art = write_render_outputs(&out_dir, &block, &mut report)?;
    println!(
        "peak before normalization {:.4}, gain {:.3}",
        report.peak_before_norm, report.norm_gain
    );
    println!(
        "crackle layer {:?} dBFS, bubble layer {:?} dBFS",
        report.layer_rms.crackles_db, report.layer_rms.bubbles_db
    );
    println!("wrote {} and {}", art.ambix.display(), art.stereo.display());
    println!("digest {}", report.content_digest);
    Ok(())
}
