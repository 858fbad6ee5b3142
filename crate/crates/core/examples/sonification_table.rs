//! Builds the per-cluster sonification table and follows a few voices across
//! the days: the crackle density thins out as bleaching rises.
//!
//! ```bash
//! cargo run -p reef-sonify --example sonification_table
//! ```

use reef_sonify::clustering::{cluster_observations, ClusterParams};
use reef_sonify::ingest::{compute_bbox, generate_synthetic_dataset, BBox};
use reef_sonify::mapping::{build_timeline, write_timeline_csv, MappingParams};

fn main() -> reef_sonify::Result<()> {
    let obs = generate_synthetic_dataset(7, 517, &BBox::hawaii());
    let (_, _, clusters) = cluster_observations(&obs, &ClusterParams::default())?;
    let timeline = build_timeline(&clusters, &compute_bbox(&obs)?, &MappingParams::default())?;

    let csv = write_timeline_csv(&timeline)?;
    for line in csv.lines().take(6) {
        println!("{line}");
    }
    println!("... {} voices\n", timeline.len());

    let mut by_bleach: Vec<usize> = (0..timeline.len()).collect();
    by_bleach.sort_by(|&a, &b| {
        timeline.voices[a]
            .bleach_frac
            .total_cmp(&timeline.voices[b].bleach_frac)
    });
    let picks = [
        by_bleach[0],
        by_bleach[by_bleach.len() / 2],
        by_bleach[by_bleach.len() - 1],
    ];

    print!("day ");
    for &v in &picks {
        print!("  voice {:>3} Hz", timeline.voices[v].cluster_id);
    }
    println!();
    let mut days: Vec<usize> = (0..timeline.n_days).step_by(11).collect();
    if days.last() != Some(&(timeline.n_days - 1)) {
        days.push(timeline.n_days - 1);
    }
    for day in days {
        print!("{day:>3} ");
        for &v in &picks {
            print!("  {:>12.4}", timeline.voice_params(v, day)?.density_hz);
        }
        println!();
    }
    Ok(())
}
