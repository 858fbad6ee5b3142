//! Command-line surface. Each subcommand runs one pipeline stage from files
//! on disk; `pipeline` runs them all from a JSON config.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::clustering::{
    cluster_observations, read_clusters_csv, write_clusters_csv, write_reachability_csv, ClusterParams,
};
use crate::error::{Error, Result};
use crate::ingest::{
    generate_synthetic_blobs, parse_observations_with, write_observations_csv, BBox, ColumnMap, DatasetStats,
    ParseOptions, DEFAULT_SYNTHETIC_BLOBS,
};
use crate::mapping::{build_timeline, read_timeline_csv, write_timeline_csv, MappingParams};
use crate::pipeline::{run_pipeline, ModeSelection, PipelineConfig};
use crate::renderer::{render, write_render_outputs, Layer, Mode, RenderConfig};

#[derive(Debug, Parser)]
#[command(
    name = "reef-sonify",
    version,
    about = "Sonify reef observations as third-order ambisonic audio"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an observation CSV (or generate a synthetic one) and write stats.
    Ingest(IngestArgs),
    /// OPTICS-cluster validated observations and aggregate cluster means.
    Cluster(ClusterArgs),
    /// Build the sonification dataframe from clusters and dataset stats.
    Map(MapArgs),
    /// Render a sonification dataframe to AmbiX and stereo WAV files.
    Render(RenderArgs),
    /// Run every stage from a JSON config.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Source CSV.
    #[arg(long, required_unless_present = "synthetic_seed")]
    pub input: Option<PathBuf>,
    /// JSON column map `{lat, lon, depth, bleach, par}`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Drop rows with bad values instead of failing.
    #[arg(long)]
    pub skip_bad_rows: bool,
    /// Generate a synthetic dataset with this seed instead of reading a CSV.
    #[arg(long, conflicts_with = "input")]
    pub synthetic_seed: Option<u64>,
    #[arg(long, default_value_t = 517)]
    pub synthetic_n: usize,
    #[arg(long, default_value_t = DEFAULT_SYNTHETIC_BLOBS)]
    pub synthetic_blobs: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Validated observations CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub min_samples: usize,
    /// Extraction threshold in degrees.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Neighbourhood radius bound; unbounded when omitted.
    #[arg(long)]
    pub max_eps: Option<f64>,
    /// Pick eps to get as close as possible to this many sources.
    #[arg(long)]
    pub target_sources: Option<usize>,
    /// Also write reachability.csv.
    #[arg(long)]
    pub reachability: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub clusters: PathBuf,
    /// Stats sidecar written by `ingest`.
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long, default_value_t = 78)]
    pub n_days: usize,
    #[arg(long, default_value_t = 6.0)]
    pub depth_boost_db: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Sonification dataframe written by `map`.
    #[arg(long)]
    pub timeline: PathBuf,
    /// RenderConfig JSON; defaults apply to absent keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub solo: Option<Layer>,
    /// Speaker layout JSON to decode to (repeatable).
    #[arg(long)]
    pub layout: Vec<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<ModeSelection>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Override the work directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn json_config<T: serde::de::DeserializeOwned>(path: &Path, field: &str) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::config(field, e.to_string()))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Cluster(a) => cluster(a),
        Command::Map(a) => map(a),
        Command::Render(a) => render_cmd(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let obs = match (&a.input, a.synthetic_seed) {
        (Some(path), _) => {
            let schema: ColumnMap = match &a.schema {
                Some(p) => json_config(p, "schema")?,
                None => ColumnMap::default(),
            };
            let parsed = parse_observations_with(
                &read(path)?,
                &schema,
                ParseOptions {
                    skip_bad_rows: a.skip_bad_rows,
                },
            )?;
            if !parsed.skipped.is_empty() {
                log::warn!("skipped {} bad rows", parsed.skipped.len());
            }
            parsed.observations
        }
        (None, Some(seed)) => {
            if a.synthetic_n == 0 {
                return Err(Error::config("synthetic-n", "must be >= 1"));
            }
            generate_synthetic_blobs(seed, a.synthetic_n, &BBox::hawaii(), a.synthetic_blobs)
        }
        (None, None) => return Err(Error::config("input", "missing")),
    };
    mkdir(&a.out_dir)?;
    write(&a.out_dir.join("observations.csv"), write_observations_csv(&obs)?)?;
    let stats = DatasetStats::from_observations(&obs)?;
    write(&a.out_dir.join("stats.json"), serde_json::to_string_pretty(&stats)?)?;
    println!("{} observations", obs.len());
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let obs = parse_observations_with(&read(&a.input)?, &ColumnMap::default(), ParseOptions::default())?.observations;
    let params = ClusterParams {
        min_samples: a.min_samples,
        eps: a.eps,
        max_eps: a.max_eps,
        target_sources: a.target_sources,
    };
    let (ordering, eps, clusters) = cluster_observations(&obs, &params)?;
    mkdir(&a.out_dir)?;
    write(&a.out_dir.join("clusters.csv"), write_clusters_csv(&clusters)?)?;
    if a.reachability {
        write(&a.out_dir.join("reachability.csv"), write_reachability_csv(&ordering)?)?;
    }
    println!("{} sources at eps {eps}", clusters.len());
    Ok(())
}

fn map(a: MapArgs) -> Result<()> {
    let clusters = read_clusters_csv(&read(&a.clusters)?)?;
    let stats: DatasetStats = json_config(&a.stats, "stats")?;
    let params = MappingParams {
        n_days: a.n_days,
        depth_boost_db: a.depth_boost_db,
    };
    let timeline = build_timeline(&clusters, &stats.bbox, &params)?;
    mkdir(&a.out_dir)?;
    write(&a.out_dir.join("sonification.csv"), write_timeline_csv(&timeline)?)?;
    println!("{} voices over {} days", timeline.len(), timeline.n_days);
    Ok(())
}

fn render_cmd(a: RenderArgs) -> Result<()> {
    let mut cfg: RenderConfig = match &a.config {
        Some(p) => json_config(p, "config")?,
        None => RenderConfig::default(),
    };
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if a.solo.is_some() {
        cfg.solo = a.solo;
    }
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    cfg.outputs.layouts.extend(a.layout);
    cfg.validate()?;
    let timeline = read_timeline_csv(&read(&a.timeline)?, cfg.n_days)?;
    let (block, mut report) = render(&cfg, &timeline)?;
    let art = write_render_outputs(&a.out_dir, &block, &mut report)?;
    println!(
        "{} ({:.1} s, digest {})",
        art.ambix.display(),
        report.duration_s,
        report.content_digest
    );
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = PipelineConfig::from_file(&a.config)?;
    if let Some(m) = a.mode {
        cfg.modes = m;
    }
    if let Some(s) = a.seed {
        cfg.render.master_seed = s;
    }
    if a.workers.is_some() {
        cfg.render.workers = a.workers;
    }
    if let Some(d) = a.out_dir {
        cfg.workdir = d;
    }
    let set = run_pipeline(&cfg)?;
    for (name, digest) in &set.files {
        println!("{digest}  {name}");
    }
    Ok(())
}
