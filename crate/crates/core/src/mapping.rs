//! The sonification dataframe: normalized fields, sphere angles and per-day
//! control values for every cluster.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterPoint;
use crate::error::{Error, Result};
use crate::ingest::BBox;

/// Impulse density for a healthy reef, impulses per second.
pub const DENSITY_HEALTHY_HZ: f64 = 0.471;
/// Impulse density for a fully bleached reef, impulses per second.
pub const DENSITY_BLEACHED_HZ: f64 = 0.023;
pub const DEFAULT_N_DAYS: usize = 78;
pub const DEFAULT_DEPTH_BOOST_DB: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingParams {
    pub n_days: usize,
    pub depth_boost_db: f64,
}

impl Default for MappingParams {
    fn default() -> Self {
        MappingParams {
            n_days: DEFAULT_N_DAYS,
            depth_boost_db: DEFAULT_DEPTH_BOOST_DB,
        }
    }
}

/// `(x - lo) / (hi - lo)` clamped to [0, 1].
pub fn unit_normalize(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::DegenerateRange { lo, hi });
    }
    Ok(((x - lo) / (hi - lo)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    /// Input lay outside the box and was clamped onto it.
    pub clamped: bool,
}

/// Stretches the box over the full sphere: longitude onto [-π, π],
/// latitude onto [-π/2, π/2]. Degenerate axes are widened first.
pub fn geo_to_angles(lat: f64, lon: f64, bbox: &BBox) -> Angles {
    let b = bbox.widened();
    let clamped = lat < b.lat_min || lat > b.lat_max || lon < b.lon_min || lon > b.lon_max;
    let u = ((lon - b.lon_min) / (b.lon_max - b.lon_min)).clamp(0.0, 1.0);
    let v = ((lat - b.lat_min) / (b.lat_max - b.lat_min)).clamp(0.0, 1.0);
    Angles {
        azimuth_rad: (-PI + u * 2.0 * PI).clamp(-PI, PI),
        elevation_rad: (-FRAC_PI_2 + v * PI).clamp(-FRAC_PI_2, FRAC_PI_2),
        clamped,
    }
}

/// Exponential interpolation from the healthy density at 0 to the bleached
/// density at 1.
pub fn bleach_to_density(bleach_frac: f64) -> f64 {
    let b = bleach_frac.clamp(0.0, 1.0);
    match b {
        0.0 => DENSITY_HEALTHY_HZ,
        1.0 => DENSITY_BLEACHED_HZ,
        _ => DENSITY_HEALTHY_HZ * (DENSITY_BLEACHED_HZ / DENSITY_HEALTHY_HZ).powf(b),
    }
}

/// Linear-in-dB boost, 0 dB at the shallowest depth.
pub fn depth_gain(depth_norm: f64) -> f64 {
    depth_gain_db(depth_norm, DEFAULT_DEPTH_BOOST_DB)
}

pub fn depth_gain_db(depth_norm: f64, boost_db: f64) -> f64 {
    10f64.powf(boost_db * depth_norm.clamp(0.0, 1.0) / 20.0)
}

/// Linear ramp reaching `target` on the last day.
pub fn daily_value(target: f64, day: usize, n_days: usize) -> Result<f64> {
    if day >= n_days {
        return Err(Error::IndexOutOfRange { day, n_days });
    }
    if day + 1 == n_days {
        return Ok(target);
    }
    Ok(target * (day + 1) as f64 / n_days as f64)
}

/// Static, per-cluster part of the voice parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoiceBase {
    pub cluster_id: usize,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    pub depth_norm: f64,
    pub par_norm: f64,
    /// Final-day bleached fraction.
    pub bleach_frac: f64,
    pub depth_gain: f64,
    /// 1-based rank; the FM carrier sits at this multiple of the fundamental.
    pub partial_index: usize,
}

/// Control values of one voice on one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceParams {
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    pub depth_norm: f64,
    pub par_norm: f64,
    pub bleach_frac: f64,
    pub density_hz: f64,
    pub depth_gain: f64,
    pub partial_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub n_days: usize,
    pub voices: Vec<VoiceBase>,
    /// Cluster positions that fell outside the box.
    pub clamped: usize,
}

impl Timeline {
    pub fn len(&self) -> usize {
        self.voices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voices.is_empty()
    }

    /// Daily bleach fraction drives the density; daily PAR lands in
    /// `par_norm`.
    pub fn voice_params(&self, voice: usize, day: usize) -> Result<VoiceParams> {
        let v = &self.voices[voice];
        let bleach = daily_value(v.bleach_frac, day, self.n_days)?;
        let par = daily_value(v.par_norm, day, self.n_days)?;
        Ok(VoiceParams {
            azimuth_rad: v.azimuth_rad,
            elevation_rad: v.elevation_rad,
            depth_norm: v.depth_norm,
            par_norm: par,
            bleach_frac: bleach,
            density_hz: bleach_to_density(bleach),
            depth_gain: v.depth_gain,
            partial_index: v.partial_index,
        })
    }

    pub fn with_n_days(mut self, n_days: usize) -> Self {
        self.n_days = n_days;
        self
    }
}

/// Normalization ranges come from the observation-level box, not from the
/// cluster means.
pub fn build_timeline(clusters: &[ClusterPoint], bbox: &BBox, params: &MappingParams) -> Result<Timeline> {
    if clusters.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.n_days == 0 {
        return Err(Error::config("mapping.n_days", "must be >= 1"));
    }
    let b = bbox.widened();
    let mut clamped = 0;
    let mut voices = Vec::with_capacity(clusters.len());
    for (rank, c) in clusters.iter().enumerate() {
        let a = geo_to_angles(c.lat_deg, c.lon_deg, bbox);
        clamped += a.clamped as usize;
        let depth_norm = unit_normalize(c.depth_m, b.depth_min, b.depth_max)?;
        voices.push(VoiceBase {
            cluster_id: c.cluster_id,
            azimuth_rad: a.azimuth_rad,
            elevation_rad: a.elevation_rad,
            depth_norm,
            par_norm: unit_normalize(c.par, b.par_min, b.par_max)?,
            bleach_frac: (c.bleach_pct / 100.0).clamp(0.0, 1.0),
            depth_gain: depth_gain_db(depth_norm, params.depth_boost_db),
            partial_index: rank + 1,
        });
    }
    Ok(Timeline {
        n_days: params.n_days,
        voices,
        clamped,
    })
}

pub fn write_timeline_csv(timeline: &Timeline) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "cluster_id",
        "azimuth_rad",
        "elevation_rad",
        "depth_norm",
        "par_norm",
        "bleach_frac_target",
        "density_hz_day0",
        "density_hz_final",
        "depth_gain",
        "partial_index",
    ])?;
    for (i, v) in timeline.voices.iter().enumerate() {
        let day0 = timeline.voice_params(i, 0)?.density_hz;
        w.write_record(&[
            v.cluster_id.to_string(),
            v.azimuth_rad.to_string(),
            v.elevation_rad.to_string(),
            v.depth_norm.to_string(),
            v.par_norm.to_string(),
            v.bleach_frac.to_string(),
            day0.to_string(),
            bleach_to_density(v.bleach_frac).to_string(),
            v.depth_gain.to_string(),
            v.partial_index.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rebuilds a timeline from the dataframe CSV; the day count is not part of
/// the file and comes from the caller.
pub fn read_timeline_csv(text: &str, n_days: usize) -> Result<Timeline> {
    #[derive(Deserialize)]
    struct Row {
        cluster_id: usize,
        azimuth_rad: f64,
        elevation_rad: f64,
        depth_norm: f64,
        par_norm: f64,
        bleach_frac_target: f64,
        depth_gain: f64,
        partial_index: usize,
    }
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut voices = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        voices.push(VoiceBase {
            cluster_id: row.cluster_id,
            azimuth_rad: row.azimuth_rad,
            elevation_rad: row.elevation_rad,
            depth_norm: row.depth_norm,
            par_norm: row.par_norm,
            bleach_frac: row.bleach_frac_target,
            depth_gain: row.depth_gain,
            partial_index: row.partial_index,
        });
    }
    if voices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_days == 0 {
        return Err(Error::config("n_days", "must be >= 1"));
    }
    Ok(Timeline {
        n_days,
        voices,
        clamped: 0,
    })
}
