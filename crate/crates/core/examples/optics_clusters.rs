//! OPTICS with two samples per neighbourhood over synthetic sites. Prints a
//! coarse reachability plot and how the source count falls as eps grows.
//!
//! ```bash
//! cargo run -p reef-sonify --example optics_clusters
//! ```

use reef_sonify::clustering::{aggregate, eps_for_source_count, extract_clusters, optics_run};
use reef_sonify::ingest::{generate_synthetic_dataset, BBox};

fn main() -> reef_sonify::Result<()> {
    let obs = generate_synthetic_dataset(7, 517, &BBox::hawaii());
    let points: Vec<(f64, f64)> = obs.iter().map(|o| (o.lat_deg, o.lon_deg)).collect();
    let ordering = optics_run(&points, 2, f64::INFINITY)?;

    // one bar per 8 ordered points, height = max reachability in the bucket
    let reach: Vec<f64> = ordering
        .reachability_plot()
        .map(|(_, _, r)| if r.is_finite() { r } else { 0.0 })
        .collect();
    for chunk in reach.chunks(8).take(40) {
        let r = chunk.iter().cloned().fold(0.0, f64::max);
        println!("{:>7.4} {}", r, "#".repeat((r * 400.0).min(70.0) as usize));
    }

    println!("\n   eps  clusters  noise  sources");
    for eps in [0.01, 0.02, 0.05, 0.1, 0.2, 0.5] {
        let l = extract_clusters(&ordering, eps);
        println!(
            "{eps:>6}  {:>8}  {:>5}  {:>7}",
            l.n_clusters(),
            l.n_noise(),
            l.n_sources()
        );
    }

    let eps = eps_for_source_count(&ordering, 176);
    let labels = extract_clusters(&ordering, eps);
    let clusters = aggregate(&obs, &labels)?;
    let biggest = clusters.iter().max_by_key(|c| c.member_count).unwrap();
    println!(
        "\neps {eps:.4} gives {} sources; largest holds {} sites around ({:.3}, {:.3})",
        clusters.len(),
        biggest.member_count,
        biggest.lat_deg,
        biggest.lon_deg
    );
    Ok(())
}
