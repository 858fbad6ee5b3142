//! Third-order ambisonics in the AmbiX convention (ACN channel order, SN3D
//! normalization, no Condon-Shortley phase).
//!
//! Azimuth θ is counter-clockwise from the front in [-π, π]; elevation φ is
//! up from the horizon in [-π/2, π/2].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::MonoBlock;

pub const ORDER: usize = 3;
pub const CHANNELS: usize = (ORDER + 1) * (ORDER + 1);

/// ACN index for degree `l` and order `m`.
pub const fn acn(l: usize, m: isize) -> usize {
    ((l * l + l) as isize + m) as usize
}

/// Degree of an ACN channel.
pub fn degree(acn: usize) -> usize {
    (acn as f64).sqrt().floor() as usize
}

/// SN3D to N3D factor `sqrt(2l + 1)` of an ACN channel.
pub fn n3d_factor(acn: usize) -> f64 {
    ((2 * degree(acn) + 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShCoeffs(pub [f64; CHANNELS]);

impl ShCoeffs {
    pub fn to_n3d(&self) -> [f64; CHANNELS] {
        let mut out = self.0;
        for (c, v) in out.iter_mut().enumerate() {
            *v *= n3d_factor(c);
        }
        out
    }
}

impl std::ops::Index<usize> for ShCoeffs {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Associated Legendre `P_l^m(x)` for `m >= 0`, without the Condon-Shortley
/// phase, by the standard upward recurrences.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    debug_assert!(m <= l);
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P_m^m = (2m-1)!! s^m
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= (2 * k + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1m = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1m;
    }
    let mut out = 0.0;
    for ll in (m + 2)..=l {
        out = ((2 * ll - 1) as f64 * x * pm1m - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1m;
        pm1m = out;
    }
    out
}

/// Clamps elevation to the poles and wraps azimuth into [-π, π].
pub fn canonical_direction(azimuth: f64, elevation: f64) -> (f64, f64) {
    let az = if (-PI..=PI).contains(&azimuth) {
        azimuth
    } else {
        (azimuth + PI).rem_euclid(2.0 * PI) - PI
    };
    (az, elevation.clamp(-FRAC_PI_2, FRAC_PI_2))
}

/// Real SN3D spherical harmonics up to degree 3 in ACN order.
pub fn sh_coeffs(azimuth: f64, elevation: f64) -> ShCoeffs {
    let (az, el) = canonical_direction(azimuth, elevation);
    let z = el.sin();
    let mut out = [0.0; CHANNELS];
    for l in 0..=ORDER {
        for m in 0..=l {
            let norm = ((if m == 0 { 1.0 } else { 2.0 }) * factorial(l - m) / factorial(l + m)).sqrt();
            let p = norm * assoc_legendre(l, m, z);
            if m == 0 {
                out[acn(l, 0)] = p;
            } else {
                let mf = m as f64;
                out[acn(l, m as isize)] = p * (mf * az).cos();
                out[acn(l, -(m as isize))] = p * (mf * az).sin();
            }
        }
    }
    ShCoeffs(out)
}

/// Sixteen equal-length channels in ACN order.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicBlock {
    pub channels: Vec<Vec<f32>>,
    pub sample_rate: u32,
}

impl AmbisonicBlock {
    pub fn zeros(frames: usize, sample_rate: u32) -> Self {
        AmbisonicBlock {
            channels: vec![vec![0.0; frames]; CHANNELS],
            sample_rate,
        }
    }

    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn peak(&self) -> f32 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f32, |m, s| m.max(s.abs()))
    }

    pub fn scale(&mut self, k: f32) {
        for c in &mut self.channels {
            for s in c.iter_mut() {
                *s *= k;
            }
        }
    }
}

pub fn encode(block: &MonoBlock, coeffs: &ShCoeffs) -> AmbisonicBlock {
    let channels = coeffs
        .0
        .iter()
        .map(|&g| {
            let g = g as f32;
            block.samples.iter().map(|s| s * g).collect()
        })
        .collect();
    AmbisonicBlock {
        channels,
        sample_rate: block.sample_rate,
    }
}

/// Accumulates `gain * mono` into `acc`.
#[inline]
pub fn mix_into(acc: &mut [f32], mono: &[f32], gain: f32) {
    for (a, s) in acc.iter_mut().zip(mono) {
        *a += gain * s;
    }
}

/// Channelwise sum in slice order.
pub fn mix(blocks: &[AmbisonicBlock]) -> Result<AmbisonicBlock> {
    let first = blocks.first().ok_or(Error::EmptyInput)?;
    let mut out = AmbisonicBlock::zeros(first.frames(), first.sample_rate);
    for b in blocks {
        if b.frames() != first.frames() || b.sample_rate != first.sample_rate {
            return Err(Error::LengthMismatch {
                what: "ambisonic block frames",
                left: first.frames(),
                right: b.frames(),
            });
        }
        for (acc, ch) in out.channels.iter_mut().zip(&b.channels) {
            mix_into(acc, ch, 1.0);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speaker {
    pub name: String,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

/// Loudspeaker directions in radians with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerLayout {
    pub directions: Vec<(f64, f64)>,
    pub names: Vec<String>,
}

impl SpeakerLayout {
    pub fn new(speakers: &[(String, f64, f64)]) -> Result<Self> {
        if speakers.is_empty() {
            return Err(Error::config("layout", "needs at least one speaker"));
        }
        let mut directions = Vec::with_capacity(speakers.len());
        let mut names = Vec::with_capacity(speakers.len());
        for (name, az, el) in speakers {
            if !(-PI..=PI).contains(az) || !(-FRAC_PI_2..=FRAC_PI_2).contains(el) {
                return Err(Error::config(format!("layout.{name}"), "direction out of range"));
            }
            directions.push((*az, *el));
            names.push(name.clone());
        }
        Ok(SpeakerLayout { directions, names })
    }

    /// Parses `[{name, azimuth_deg, elevation_deg}, ...]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let speakers: Vec<Speaker> = serde_json::from_str(text).map_err(|e| Error::config("layout", e.to_string()))?;
        let rad: Vec<(String, f64, f64)> = speakers
            .into_iter()
            .map(|s| (s.name, s.azimuth_deg.to_radians(), s.elevation_deg.to_radians()))
            .collect();
        Self::new(&rad)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Eight speakers on the corners of a cube.
    pub fn cube() -> Self {
        let el = (1.0f64 / 3.0f64.sqrt()).asin();
        let mut spk = Vec::new();
        for (tag, e) in [("U", el), ("D", -el)] {
            for (i, az) in [FRAC_PI_4, 3.0 * FRAC_PI_4, -3.0 * FRAC_PI_4, -FRAC_PI_4]
                .into_iter()
                .enumerate()
            {
                spk.push((format!("{tag}{i}"), az, e));
            }
        }
        Self::new(&spk).expect("cube layout is valid")
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Per-speaker, per-channel gains of the projection decoder.
    pub fn decoder_matrix(&self) -> Vec<[f64; CHANNELS]> {
        let norm = 1.0 / self.len() as f64;
        self.directions
            .iter()
            .map(|&(az, el)| {
                let y = sh_coeffs(az, el);
                let mut row = [0.0; CHANNELS];
                for (c, r) in row.iter_mut().enumerate() {
                    let w = (2 * degree(c) + 1) as f64;
                    *r = norm * w * y[c];
                }
                row
            })
            .collect()
    }
}

/// Sampling decoder: each speaker receives the N3D projection of the field onto
/// its direction, scaled by 1 / number of speakers.
pub fn decode_project(block: &AmbisonicBlock, layout: &SpeakerLayout) -> Vec<Vec<f32>> {
    layout
        .decoder_matrix()
        .iter()
        .map(|row| {
            let mut out = vec![0.0f32; block.frames()];
            for (ch, &g) in block.channels.iter().zip(row) {
                mix_into(&mut out, ch, g as f32);
            }
            out
        })
        .collect()
}

/// Two horizontal first-order cardioids at ±45°.
pub fn stereo_downmix(block: &AmbisonicBlock) -> [Vec<f32>; 2] {
    let (w, y, x) = (&block.channels[0], &block.channels[1], &block.channels[3]);
    let (c, s) = (FRAC_PI_4.cos() as f32, FRAC_PI_4.sin() as f32);
    let side = |sign: f32| -> Vec<f32> {
        w.iter()
            .zip(x)
            .zip(y)
            .map(|((w, x), y)| 0.5 * (w + x * c + sign * y * s))
            .collect()
    };
    [side(1.0), side(-1.0)]
}
