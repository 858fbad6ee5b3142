//! Observation datasets: CSV parsing with a column map, bounding boxes and
//! field ranges, and seeded synthetic datasets for hermetic runs.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One retained row of the source table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub depth_m: f64,
    pub bleach_pct: f64,
    pub par: f64,
}

impl Observation {
    /// Checks the geographic and physical bounds of every field, naming the
    /// first offending field.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let check = |name, v: f64, ok: bool, why: &str| {
            if !v.is_finite() {
                Err((name, format!("{v} is not finite")))
            } else if !ok {
                Err((name, format!("{v} {why}")))
            } else {
                Ok(())
            }
        };
        check(
            "lat",
            self.lat_deg,
            (-90.0..=90.0).contains(&self.lat_deg),
            "outside [-90, 90]",
        )?;
        check(
            "lon",
            self.lon_deg,
            (-180.0..=180.0).contains(&self.lon_deg),
            "outside [-180, 180]",
        )?;
        check("depth", self.depth_m, self.depth_m > 0.0, "is not > 0")?;
        check(
            "bleach",
            self.bleach_pct,
            (0.0..=100.0).contains(&self.bleach_pct),
            "outside [0, 100]",
        )?;
        check("par", self.par, self.par >= 0.0, "is negative")?;
        Ok(())
    }
}

/// Axis-aligned box over position plus the depth and PAR spans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub depth_min: f64,
    pub depth_max: f64,
    pub par_min: f64,
    pub par_max: f64,
}

impl BBox {
    /// Main Hawaiian islands, with the depth span of the reference survey
    /// and a nominal PAR span.
    pub fn hawaii() -> Self {
        BBox {
            lat_min: 18.9,
            lat_max: 22.3,
            lon_min: -160.3,
            lon_max: -154.8,
            depth_min: 0.6,
            depth_max: 29.8,
            par_min: 0.0,
            par_max: 60.0,
        }
    }

    pub fn contains(&self, o: &Observation) -> bool {
        (self.lat_min..=self.lat_max).contains(&o.lat_deg)
            && (self.lon_min..=self.lon_max).contains(&o.lon_deg)
            && (self.depth_min..=self.depth_max).contains(&o.depth_m)
            && (self.par_min..=self.par_max).contains(&o.par)
    }

    /// Copy with every zero-width dimension widened by ±0.5 of its unit so
    /// downstream rescaling never divides by zero.
    pub fn widened(&self) -> Self {
        fn widen(lo: f64, hi: f64) -> (f64, f64) {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
        let (lat_min, lat_max) = widen(self.lat_min, self.lat_max);
        let (lon_min, lon_max) = widen(self.lon_min, self.lon_max);
        let (depth_min, depth_max) = widen(self.depth_min, self.depth_max);
        let (par_min, par_max) = widen(self.par_min, self.par_max);
        BBox {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
            depth_min,
            depth_max,
            par_min,
            par_max,
        }
    }
}

/// `[min, max]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRanges {
    pub lat: Range,
    pub lon: Range,
    pub depth: Range,
    pub bleach: Range,
    pub par: Range,
}

/// Contents of the JSON sidecar written next to a validated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub count: usize,
    pub bbox: BBox,
    pub field_ranges: FieldRanges,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
}

impl DatasetStats {
    pub fn from_observations(obs: &[Observation]) -> Result<Self> {
        let bbox = compute_bbox(obs)?;
        let (bmin, bmax) = obs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
            (lo.min(o.bleach_pct), hi.max(o.bleach_pct))
        });
        let r = |min, max| Range { min, max };
        Ok(DatasetStats {
            count: obs.len(),
            bbox,
            field_ranges: FieldRanges {
                lat: r(bbox.lat_min, bbox.lat_max),
                lon: r(bbox.lon_min, bbox.lon_max),
                depth: r(bbox.depth_min, bbox.depth_max),
                bleach: r(bmin, bmax),
                par: r(bbox.par_min, bbox.par_max),
            },
            config_digest: None,
        })
    }
}

/// Maps the five semantic fields onto CSV header names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub lat: String,
    pub lon: String,
    pub depth: String,
    pub bleach: String,
    pub par: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            lat: "lat".into(),
            lon: "lon".into(),
            depth: "depth".into(),
            bleach: "bleach".into(),
            par: "par".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Count and drop rows with bad values instead of failing.
    pub skip_bad_rows: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDataset {
    pub observations: Vec<Observation>,
    /// `(row, message)` for every dropped row; empty unless skipping.
    pub skipped: Vec<(usize, String)>,
}

/// Strict parse: the first bad row is an error.
pub fn parse_observations(csv_text: &str, schema: &ColumnMap) -> Result<Vec<Observation>> {
    parse_observations_with(csv_text, schema, ParseOptions::default()).map(|p| p.observations)
}

pub fn parse_observations_with(csv_text: &str, schema: &ColumnMap, opts: ParseOptions) -> Result<ParsedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let col = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let cols = [
        ("lat", col(&schema.lat)?),
        ("lon", col(&schema.lon)?),
        ("depth", col(&schema.depth)?),
        ("bleach", col(&schema.bleach)?),
        ("par", col(&schema.par)?),
    ];

    let mut observations = Vec::new();
    let mut skipped = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        match parse_row(&record, &cols, row) {
            Ok(o) => observations.push(o),
            Err(Error::BadValue { row, field, reason }) if opts.skip_bad_rows => {
                skipped.push((row, format!("{field}: {reason}")));
            }
            Err(e) => return Err(e),
        }
    }
    if observations.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(ParsedDataset { observations, skipped })
}

fn parse_row(record: &csv::StringRecord, cols: &[(&'static str, usize); 5], row: usize) -> Result<Observation> {
    let mut vals = [0.0; 5];
    for (slot, &(field, idx)) in vals.iter_mut().zip(cols) {
        let raw = record.get(idx).unwrap_or("");
        if raw.is_empty() {
            return Err(Error::BadValue {
                row,
                field,
                reason: "missing".into(),
            });
        }
        *slot = raw.parse::<f64>().map_err(|_| Error::BadValue {
            row,
            field,
            reason: format!("`{raw}` is not a number"),
        })?;
    }
    let o = Observation {
        lat_deg: vals[0],
        lon_deg: vals[1],
        depth_m: vals[2],
        bleach_pct: vals[3],
        par: vals[4],
    };
    o.validate()
        .map_err(|(field, reason)| Error::BadValue { row, field, reason })?;
    Ok(o)
}

/// Serializes observations with the default column names. Values use the
/// shortest round-tripping decimal form, so re-parsing is exact.
pub fn write_observations_csv(obs: &[Observation]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lat", "lon", "depth", "bleach", "par"])?;
    for o in obs {
        w.write_record(&[
            o.lat_deg.to_string(),
            o.lon_deg.to_string(),
            o.depth_m.to_string(),
            o.bleach_pct.to_string(),
            o.par.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn compute_bbox(obs: &[Observation]) -> Result<BBox> {
    let first = obs.first().ok_or(Error::EmptyDataset)?;
    let init = BBox {
        lat_min: first.lat_deg,
        lat_max: first.lat_deg,
        lon_min: first.lon_deg,
        lon_max: first.lon_deg,
        depth_min: first.depth_m,
        depth_max: first.depth_m,
        par_min: first.par,
        par_max: first.par,
    };
    Ok(obs.iter().skip(1).fold(init, |b, o| BBox {
        lat_min: b.lat_min.min(o.lat_deg),
        lat_max: b.lat_max.max(o.lat_deg),
        lon_min: b.lon_min.min(o.lon_deg),
        lon_max: b.lon_max.max(o.lon_deg),
        depth_min: b.depth_min.min(o.depth_m),
        depth_max: b.depth_max.max(o.depth_m),
        par_min: b.par_min.min(o.par),
        par_max: b.par_max.max(o.par),
    }))
}

pub const DEFAULT_SYNTHETIC_BLOBS: usize = 24;

/// Seeded synthetic dataset with [`DEFAULT_SYNTHETIC_BLOBS`] spatial groups.
pub fn generate_synthetic_dataset(seed: u64, n: usize, bbox: &BBox) -> Vec<Observation> {
    generate_synthetic_blobs(seed, n, bbox, DEFAULT_SYNTHETIC_BLOBS)
}

/// Positions come from `blobs` Gaussian groups whose centers are uniform in
/// the box (spread 2% of the box extent, clamped to the box). Depth and PAR
/// are uniform over the box spans, bleaching uniform over [0, 100].
pub fn generate_synthetic_blobs(seed: u64, n: usize, bbox: &BBox, blobs: usize) -> Vec<Observation> {
    assert!(n >= 1, "synthetic dataset needs n >= 1");
    let blobs = blobs.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat_span = bbox.lat_max - bbox.lat_min;
    let lon_span = bbox.lon_max - bbox.lon_min;
    let centers: Vec<(f64, f64)> = (0..blobs)
        .map(|_| {
            (
                bbox.lat_min + rng.random::<f64>() * lat_span,
                bbox.lon_min + rng.random::<f64>() * lon_span,
            )
        })
        .collect();
    let lat_noise = Normal::new(0.0, (0.02 * lat_span).max(f64::MIN_POSITIVE)).expect("finite sd");
    let lon_noise = Normal::new(0.0, (0.02 * lon_span).max(f64::MIN_POSITIVE)).expect("finite sd");
    let uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + rng.random::<f64>() * (hi - lo);

    (0..n)
        .map(|_| {
            let (clat, clon) = centers[rng.random_range(0..blobs)];
            let lat = (clat + lat_noise.sample(&mut rng)).clamp(bbox.lat_min, bbox.lat_max);
            let lon = (clon + lon_noise.sample(&mut rng)).clamp(bbox.lon_min, bbox.lon_max);
            Observation {
                lat_deg: lat,
                lon_deg: lon,
                depth_m: uniform(&mut rng, bbox.depth_min, bbox.depth_max),
                bleach_pct: uniform(&mut rng, 0.0, 100.0),
                par: uniform(&mut rng, bbox.par_min, bbox.par_max),
            }
        })
        .collect()
}
