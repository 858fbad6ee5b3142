//! Generates a synthetic observation table, writes it as CSV, reads it back
//! through the validating parser and prints the dataset stats.
//!
//! ```bash
//! cargo run -p reef-sonify --example ingest_synthetic -- 7 517
//! ```

use reef_sonify::ingest::{
    generate_synthetic_dataset, parse_observations_with, write_observations_csv, BBox, ColumnMap, DatasetStats,
    ParseOptions,
};

fn main() -> reef_sonify::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(517);

    let obs = generate_synthetic_dataset(seed, n, &BBox::hawaii());
    let mut text = write_observations_csv(&obs)?;
    // one broken row to show the skip path
    text.push_str("20.5,-157.0,-3.0,12.0,20.0\n");

    let parsed = parse_observations_with(&text, &ColumnMap::default(), ParseOptions { skip_bad_rows: true })?;
    for (row, why) in &parsed.skipped {
        println!("skipped row {row}: {why}");
    }
    assert_eq!(parsed.observations, obs);

    let stats = DatasetStats::from_observations(&parsed.observations)?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
