//! Staged pipeline: ingest, cluster, map and render, with every
//! intermediate artifact written to the work directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::{
    cluster_observations, write_clusters_csv, write_reachability_csv, ClusterParams, ClusterPoint,
};
use crate::error::{Error, Result};
use crate::ingest::{
    generate_synthetic_blobs, parse_observations_with, write_observations_csv, BBox, ColumnMap, DatasetStats,
    Observation, ParseOptions, DEFAULT_SYNTHETIC_BLOBS,
};
use crate::mapping::{build_timeline, write_timeline_csv, MappingParams, Timeline};
use crate::renderer::{render, write_render_outputs, Mode, RenderConfig, RenderReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSource {
    pub seed: u64,
    pub n: usize,
    pub blobs: usize,
    /// Box to draw from; the Hawaiian default when absent.
    pub bbox: Option<BBox>,
}

impl Default for SyntheticSource {
    fn default() -> Self {
        SyntheticSource {
            seed: 7,
            n: 517,
            blobs: DEFAULT_SYNTHETIC_BLOBS,
            bbox: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Ad1,
    Ad2,
    Both,
}

impl ModeSelection {
    pub fn modes(&self) -> Vec<Mode> {
        match self {
            ModeSelection::Ad1 => vec![Mode::Ad1],
            ModeSelection::Ad2 => vec![Mode::Ad2],
            ModeSelection::Both => vec![Mode::Ad1, Mode::Ad2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub input_csv: Option<PathBuf>,
    /// Used when `input_csv` is absent.
    pub synthetic: Option<SyntheticSource>,
    pub workdir: PathBuf,
    pub schema: ColumnMap,
    pub skip_bad_rows: bool,
    pub clustering: ClusterParams,
    pub render: RenderConfig,
    pub modes: ModeSelection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input_csv: None,
            synthetic: None,
            workdir: "reef_out".into(),
            schema: ColumnMap::default(),
            skip_bad_rows: false,
            clustering: ClusterParams::default(),
            render: RenderConfig::default(),
            modes: ModeSelection::Both,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn mapping(&self) -> MappingParams {
        MappingParams {
            n_days: self.render.n_days,
            depth_boost_db: self.render.depth_boost_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input_csv, &self.synthetic) {
            (None, None) => return Err(Error::config("input_csv", "missing (or provide `synthetic`)")),
            (Some(p), _) if !p.is_file() => {
                return Err(Error::config("input_csv", format!("{} not found", p.display())));
            }
            (None, Some(s)) if s.n == 0 => return Err(Error::config("synthetic.n", "must be >= 1")),
            _ => {}
        }
        if self.clustering.min_samples < 2 {
            return Err(Error::config("clustering.min_samples", "must be >= 2"));
        }
        if self.clustering.target_sources.is_none() && !(self.clustering.eps > 0.0) {
            return Err(Error::config("clustering.eps", "must be > 0"));
        }
        if let Some(dir) = &self.render.grain_dir {
            if !dir.is_dir() {
                return Err(Error::config(
                    "render.grain_dir",
                    format!("{} is not a directory", dir.display()),
                ));
            }
        }
        for l in &self.render.outputs.layouts {
            if !l.is_file() {
                return Err(Error::config(
                    "render.outputs.layouts",
                    format!("{} not found", l.display()),
                ));
            }
        }
        self.render.validate()
    }

    /// SHA-256 of the canonical JSON form, leaving out the worker count and
    /// the work directory since neither can change any output.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.render.workers = None;
        c.workdir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

/// Every file written by a run, with its SHA-256.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactSet {
    pub config_digest: String,
    pub files: BTreeMap<String, String>,
    pub reports: Vec<RenderReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSidecar {
    pub eps: f64,
    pub min_samples: usize,
    pub n_sources: usize,
    pub member_total: usize,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSidecar {
    pub n_days: usize,
    pub voices: usize,
    pub clamped: usize,
    pub depth_boost_db: f64,
    pub config_digest: String,
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn load_observations(cfg: &PipelineConfig) -> Result<(Vec<Observation>, usize)> {
    match &cfg.input_csv {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let parsed = parse_observations_with(
                &text,
                &cfg.schema,
                ParseOptions {
                    skip_bad_rows: cfg.skip_bad_rows,
                },
            )?;
            for (row, why) in &parsed.skipped {
                log::warn!("skipped row {row}: {why}");
            }
            Ok((parsed.observations, parsed.skipped.len()))
        }
        None => {
            let s = cfg.synthetic.unwrap_or_default();
            let bbox = s.bbox.unwrap_or_else(BBox::hawaii);
            Ok((generate_synthetic_blobs(s.seed, s.n, &bbox, s.blobs), 0))
        }
    }
}

/// Runs every stage and writes its artifacts under `cfg.workdir`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ArtifactSet> {
    cfg.validate()?;
    let digest = cfg.digest();
    let dir = &cfg.workdir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = BTreeMap::new();
    let mut record = |name: &str, path: &Path| -> Result<()> {
        files.insert(name.to_owned(), file_digest(path)?);
        Ok(())
    };

    // ingest
    let (obs, _skipped) = load_observations(cfg).map_err(|e| e.in_stage("ingest"))?;
    let mut stats = DatasetStats::from_observations(&obs).map_err(|e| e.in_stage("ingest"))?;
    stats.config_digest = Some(digest.clone());
    let p = dir.join("observations.csv");
    write(&p, write_observations_csv(&obs)?)?;
    record("observations.csv", &p)?;
    let p = dir.join("stats.json");
    write(&p, serde_json::to_string_pretty(&stats)?)?;
    record("stats.json", &p)?;

    // cluster
    let (ordering, eps, clusters) = cluster_observations(&obs, &cfg.clustering).map_err(|e| e.in_stage("cluster"))?;
    let p = dir.join("clusters.csv");
    write(&p, write_clusters_csv(&clusters)?)?;
    record("clusters.csv", &p)?;
    let p = dir.join("reachability.csv");
    write(&p, write_reachability_csv(&ordering)?)?;
    record("reachability.csv", &p)?;
    let side = ClusterSidecar {
        eps,
        min_samples: cfg.clustering.min_samples,
        n_sources: clusters.len(),
        member_total: clusters.iter().map(|c| c.member_count).sum(),
        config_digest: digest.clone(),
    };
    let p = dir.join("clusters.json");
    write(&p, serde_json::to_string_pretty(&side)?)?;
    record("clusters.json", &p)?;

    // map
    let timeline = map_stage(&clusters, &stats.bbox, &cfg.mapping()).map_err(|e| e.in_stage("map"))?;
    let p = dir.join("sonification.csv");
    write(&p, write_timeline_csv(&timeline)?)?;
    record("sonification.csv", &p)?;
    let side = MapSidecar {
        n_days: timeline.n_days,
        voices: timeline.len(),
        clamped: timeline.clamped,
        depth_boost_db: cfg.render.depth_boost_db,
        config_digest: digest.clone(),
    };
    let p = dir.join("sonification.json");
    write(&p, serde_json::to_string_pretty(&side)?)?;
    record("sonification.json", &p)?;

    // render
    let mut reports = Vec::new();
    for mode in cfg.modes.modes() {
        let rcfg = RenderConfig {
            mode,
            ..cfg.render.clone()
        };
        let (block, mut report) = render(&rcfg, &timeline).map_err(|e| e.in_stage("render"))?;
        report.config_digest = Some(digest.clone());
        let out = dir.join(mode.tag());
        let art = write_render_outputs(&out, &block, &mut report).map_err(|e| e.in_stage("render"))?;
        drop(block);
        let tag = mode.tag();
        record(&format!("{tag}/{}", rcfg.outputs.ambix.display()), &art.ambix)?;
        record(&format!("{tag}/{}", rcfg.outputs.stereo.display()), &art.stereo)?;
        for d in &art.decodes {
            let name = d
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            record(&format!("{tag}/{name}"), d)?;
        }
        reports.push(report);
    }

    let set = ArtifactSet {
        config_digest: digest,
        files,
        reports,
    };
    let manifest = serde_json::json!({
        "config_digest": set.config_digest,
        "files": set.files,
    });
    write(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(set)
}

fn map_stage(clusters: &[ClusterPoint], bbox: &BBox, params: &MappingParams) -> Result<Timeline> {
    let t = build_timeline(clusters, bbox, params)?;
    if t.clamped > 0 {
        log::warn!("{} cluster positions clamped onto the bounding box", t.clamped);
    }
    Ok(t)
}
