//! Offline render: per-day control updates, per-voice synthesis, encoding,
//! fixed-order mixing, fade-out and peak normalization.
//!
//! Voices are synthesized on a rayon pool. Each voice owns its generators
//! and random streams, and the mixer always sums voices in cluster order, so
//! the output is bitwise independent of the worker count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ambisonics::{decode_project, mix_into, sh_coeffs, stereo_downmix, AmbisonicBlock, SpeakerLayout, CHANNELS};
use crate::error::{Error, Result};
use crate::mapping::{depth_gain_db, Timeline, VoiceParams};
use crate::synthesis::{
    frames_for, load_grain_dir, make_synthetic_grains, voice_rng, CrackleVoice, FmParams, FmVoice, GrainBank,
    GrainKind, GrainVoice, PingVoice, Ramp, StepEvents,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Impulse crackles and FM bubbles.
    Ad1,
    /// Granular crackles and sample pings.
    Ad2,
}

impl Mode {
    pub fn tag(&self) -> &'static str {
        match self {
            Mode::Ad1 => "ad1",
            Mode::Ad2 => "ad2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Crackles,
    Bubbles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub ambix: PathBuf,
    pub stereo: PathBuf,
    /// Speaker layout JSON files; each is decoded to `decode_<stem>.wav`.
    pub layouts: Vec<PathBuf>,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            ambix: "ambix.wav".into(),
            stereo: "stereo.wav".into(),
            layouts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub sample_rate: u32,
    pub step_seconds: f64,
    pub n_days: usize,
    pub fade_seconds: f64,
    pub mode: Mode,
    pub master_seed: u64,
    pub fm: FmParams,
    pub depth_boost_db: f64,
    pub peak_target_dbfs: f64,
    /// Directory of WAV grains for AD2; synthetic banks when absent.
    pub grain_dir: Option<PathBuf>,
    pub crackle_level: f64,
    pub bubble_level: f64,
    /// Render only this layer.
    pub solo: Option<Layer>,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    pub outputs: OutputPaths,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            sample_rate: 48_000,
            step_seconds: 1.0,
            n_days: 78,
            fade_seconds: 5.0,
            mode: Mode::Ad1,
            master_seed: 0,
            fm: FmParams::default(),
            depth_boost_db: 6.0,
            peak_target_dbfs: -1.0,
            grain_dir: None,
            crackle_level: 1.0,
            bubble_level: 0.25,
            solo: None,
            workers: None,
            outputs: OutputPaths::default(),
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if ![44_100, 48_000, 96_000].contains(&self.sample_rate) {
            return Err(Error::config("sample_rate", "must be 44100, 48000 or 96000"));
        }
        if !(self.step_seconds > 0.0) || !self.step_seconds.is_finite() {
            return Err(Error::config("step_seconds", "must be > 0"));
        }
        if !(self.fade_seconds >= 0.0) || !self.fade_seconds.is_finite() {
            return Err(Error::config("fade_seconds", "must be >= 0"));
        }
        if self.n_days == 0 {
            return Err(Error::config("n_days", "must be >= 1"));
        }
        if !(self.fm.f0_hz > 0.0) {
            return Err(Error::config("fm.f0_hz", "must be > 0"));
        }
        if !self.peak_target_dbfs.is_finite() || self.peak_target_dbfs > 0.0 {
            return Err(Error::config("peak_target_dbfs", "must be finite and <= 0"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be >= 1"));
        }
        Ok(())
    }

    pub fn total_seconds(&self) -> f64 {
        self.n_days as f64 * self.step_seconds + self.fade_seconds
    }

    pub fn total_frames(&self) -> usize {
        frames_for(self.total_seconds(), self.sample_rate)
    }

    /// First frame of `day`; `day == n_days` gives the start of the fade.
    pub fn day_start(&self, day: usize) -> usize {
        frames_for(day as f64 * self.step_seconds, self.sample_rate)
    }

    fn layer_on(&self, layer: Layer) -> bool {
        self.solo.is_none_or(|s| s == layer)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DayTelemetry {
    pub day: usize,
    /// Accumulated crackle hazard over all voices.
    pub crackle_expected: f64,
    pub crackle_events: u64,
    pub bubble_events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRms {
    /// `None` for a silent layer.
    pub crackles_db: Option<f64>,
    pub bubbles_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderReport {
    pub duration_s: f64,
    pub total_frames: usize,
    pub sample_rate: u32,
    pub channels: usize,
    pub voices: usize,
    pub peak_before_norm: f64,
    pub norm_gain: f64,
    pub muted_voices: usize,
    /// RMS of each layer's omni mix after normalization, dBFS.
    pub layer_rms: LayerRms,
    pub days: Vec<DayTelemetry>,
    pub config: RenderConfig,
    /// SHA-256 of the interleaved little-endian f32 AmbiX samples.
    pub content_digest: String,
    #[serde(default)]
    pub stereo_digest: Option<String>,
    #[serde(default)]
    pub config_digest: Option<String>,
}

enum Crackles {
    Impulses(CrackleVoice),
    Grains(GrainVoice),
}

#[allow(clippy::large_enum_variant)]
enum Bubbles {
    Fm(FmVoice),
    Pings(PingVoice),
    Muted,
}

struct Voice {
    coeffs: [f32; CHANNELS],
    depth_gain: f64,
    crackles: Crackles,
    bubbles: Bubbles,
    crackle_buf: Vec<f32>,
    bubble_buf: Vec<f32>,
}

struct Banks {
    snaps: GrainBank,
    pings: GrainBank,
}

impl Voice {
    #[allow(clippy::too_many_arguments)]
    fn render(
        &mut self,
        n: usize,
        prev: &VoiceParams,
        cur: &VoiceParams,
        cfg: &RenderConfig,
        scale: f64,
        banks: Option<&Banks>,
        fade: Option<(usize, usize)>,
    ) -> (StepEvents, StepEvents) {
        self.crackle_buf.resize(n, 0.0);
        self.bubble_buf.resize(n, 0.0);
        let mut ce = StepEvents::default();
        let mut be = StepEvents::default();
        if cfg.layer_on(Layer::Crackles) {
            let density = Ramp::new(prev.density_hz, cur.density_hz);
            let gain = Ramp::constant(cfg.crackle_level * self.depth_gain * scale);
            ce = match &mut self.crackles {
                Crackles::Impulses(v) => v.render(&mut self.crackle_buf, density, gain),
                Crackles::Grains(v) => v.render(&mut self.crackle_buf, density, gain, &banks.expect("ad2 banks").snaps),
            };
        } else {
            self.crackle_buf.fill(0.0);
        }
        if cfg.layer_on(Layer::Bubbles) {
            let par = Ramp::new(prev.par_norm, cur.par_norm);
            let amp = Ramp::constant(cfg.bubble_level * self.depth_gain * scale);
            match &mut self.bubbles {
                Bubbles::Fm(v) => v.render(&mut self.bubble_buf, par, amp),
                Bubbles::Pings(v) => be = v.render(&mut self.bubble_buf, par, amp, &banks.expect("ad2 banks").pings),
                Bubbles::Muted => self.bubble_buf.fill(0.0),
            }
        } else {
            self.bubble_buf.fill(0.0);
        }
        if let Some((offset, len)) = fade {
            for (i, (c, b)) in self.crackle_buf.iter_mut().zip(self.bubble_buf.iter_mut()).enumerate() {
                let g = fade_gain(offset + i, len);
                *c *= g;
                *b *= g;
            }
        }
        (ce, be)
    }
}

/// Linear fade from 1 at the first tail frame to exactly 0 at the last.
pub fn fade_gain(i: usize, len: usize) -> f32 {
    if len <= 1 {
        0.0
    } else {
        (1.0 - i as f64 / (len - 1) as f64) as f32
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::config("workers", e.to_string()))
}

fn load_banks(cfg: &RenderConfig) -> Result<Banks> {
    match &cfg.grain_dir {
        Some(dir) => {
            let bank = load_grain_dir(dir, cfg.sample_rate)?;
            Ok(Banks {
                snaps: bank.clone(),
                pings: bank,
            })
        }
        None => Ok(Banks {
            snaps: make_synthetic_grains(cfg.master_seed ^ 0x5A, GrainKind::Snap, cfg.sample_rate),
            pings: make_synthetic_grains(cfg.master_seed ^ 0xA5, GrainKind::Ping, cfg.sample_rate),
        }),
    }
}

pub fn render(config: &RenderConfig, timeline: &Timeline) -> Result<(AmbisonicBlock, RenderReport)> {
    config.validate()?;
    if timeline.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if timeline.n_days != config.n_days {
        return Err(Error::config(
            "n_days",
            format!("timeline has {} days, config {}", timeline.n_days, config.n_days),
        ));
    }
    let sr = config.sample_rate;
    let banks = match config.mode {
        Mode::Ad1 => None,
        Mode::Ad2 => Some(load_banks(config)?),
    };

    let mut muted = 0;
    let mut voices: Vec<Voice> = timeline
        .voices
        .iter()
        .map(|v| {
            let c = sh_coeffs(v.azimuth_rad, v.elevation_rad);
            let mut coeffs = [0.0f32; CHANNELS];
            for (o, x) in coeffs.iter_mut().zip(c.0) {
                *o = x as f32;
            }
            let crackle_rng = voice_rng(config.master_seed, v.cluster_id, 0);
            let bubble_rng = voice_rng(config.master_seed, v.cluster_id, 1);
            let (crackles, bubbles) = match config.mode {
                Mode::Ad1 => {
                    let fm = FmVoice::new(v.partial_index, config.fm, sr);
                    let bubbles = if fm.violates_nyquist() {
                        muted += 1;
                        Bubbles::Muted
                    } else {
                        Bubbles::Fm(fm)
                    };
                    (Crackles::Impulses(CrackleVoice::new(crackle_rng, sr)), bubbles)
                }
                Mode::Ad2 => (
                    Crackles::Grains(GrainVoice::new(crackle_rng, sr)),
                    Bubbles::Pings(PingVoice::new(bubble_rng, sr)),
                ),
            };
            Voice {
                coeffs,
                depth_gain: depth_gain_db(v.depth_norm, config.depth_boost_db),
                crackles,
                bubbles,
                crackle_buf: Vec::new(),
                bubble_buf: Vec::new(),
            }
        })
        .collect();
    if muted > 0 {
        log::warn!("{muted} voices muted: FM carrier at or above Nyquist");
    }

    let pool = build_pool(config.workers)?;
    let total = config.total_frames();
    let fade_start = config.day_start(config.n_days).min(total);
    let fade_len = total - fade_start;
    let chunk = frames_for(config.step_seconds, sr).max(1);
    let scale = 1.0 / (voices.len() as f64).sqrt();

    let params: Vec<Vec<VoiceParams>> = (0..config.n_days)
        .map(|d| {
            (0..timeline.len())
                .map(|v| timeline.voice_params(v, d))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // (start frame, frames, day index for telemetry, previous params, current params, in fade)
    let mut segments = Vec::new();
    for d in 0..config.n_days {
        let (a, b) = (config.day_start(d), config.day_start(d + 1).min(total));
        segments.push((a, b - a, d, d.saturating_sub(1), d, false));
    }
    let last = config.n_days - 1;
    let mut at = fade_start;
    while at < total {
        let n = chunk.min(total - at);
        segments.push((at, n, last, last, last, true));
        at += n;
    }

    let mut out = AmbisonicBlock::zeros(total, sr);
    let mut days: Vec<DayTelemetry> = (0..config.n_days)
        .map(|day| DayTelemetry {
            day,
            ..Default::default()
        })
        .collect();
    let (mut crackle_sq, mut bubble_sq) = (0.0f64, 0.0f64);
    let mut omni_c = Vec::new();
    let mut omni_b = Vec::new();

    pool.install(|| {
        for &(start, n, day, prev, cur, in_fade) in &segments {
            if n == 0 {
                continue;
            }
            let fade = in_fade.then(|| (start - fade_start, fade_len));
            let events: Vec<(StepEvents, StepEvents)> = voices
                .par_iter_mut()
                .enumerate()
                .map(|(i, v)| {
                    v.render(
                        n,
                        &params[prev][i],
                        &params[cur][i],
                        config,
                        scale,
                        banks.as_ref(),
                        fade,
                    )
                })
                .collect();
            if !in_fade {
                let t = &mut days[day];
                for (ce, be) in &events {
                    t.crackle_expected += ce.expected;
                    t.crackle_events += ce.events;
                    t.bubble_events += be.events;
                }
            }

            omni_c.clear();
            omni_c.resize(n, 0.0f32);
            omni_b.clear();
            omni_b.resize(n, 0.0f32);
            for v in &voices {
                mix_into(&mut omni_c, &v.crackle_buf, 1.0);
                mix_into(&mut omni_b, &v.bubble_buf, 1.0);
            }
            crackle_sq += omni_c.iter().map(|&s| (s as f64) * (s as f64)).sum::<f64>();
            bubble_sq += omni_b.iter().map(|&s| (s as f64) * (s as f64)).sum::<f64>();

            for v in voices.iter_mut() {
                let (c, b) = (&mut v.crackle_buf, &v.bubble_buf);
                for (x, y) in c.iter_mut().zip(b) {
                    *x += y;
                }
            }
            out.channels.par_iter_mut().enumerate().for_each(|(ch, acc)| {
                let acc = &mut acc[start..start + n];
                for v in &voices {
                    mix_into(acc, &v.crackle_buf, v.coeffs[ch]);
                }
            });
        }
    });

    let peak_before = out.peak() as f64;
    let norm_gain = peak_normalize(&mut out, config.peak_target_dbfs);
    let rms_db = |sq: f64| {
        let ms = sq / total.max(1) as f64;
        (ms > 0.0).then(|| 10.0 * ms.log10() + 20.0 * norm_gain.log10())
    };
    let report = RenderReport {
        duration_s: config.total_seconds(),
        total_frames: total,
        sample_rate: sr,
        channels: CHANNELS,
        voices: voices.len(),
        peak_before_norm: peak_before,
        norm_gain,
        muted_voices: muted,
        layer_rms: LayerRms {
            crackles_db: rms_db(crackle_sq),
            bubbles_db: rms_db(bubble_sq),
        },
        days,
        config: config.clone(),
        content_digest: digest_interleaved(&out.channels),
        stereo_digest: None,
        config_digest: None,
    };
    Ok((out, report))
}

/// Scales every channel so the overall peak sits at `target_dbfs`; silent
/// blocks pass through. Returns the applied gain.
pub fn peak_normalize(block: &mut AmbisonicBlock, target_dbfs: f64) -> f64 {
    normalize_channels(&mut block.channels, target_dbfs)
}

pub fn normalize_channels(channels: &mut [Vec<f32>], target_dbfs: f64) -> f64 {
    let peak = channels
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f32, |m, s| m.max(s.abs())) as f64;
    if peak == 0.0 {
        return 1.0;
    }
    let target = 10f64.powf(target_dbfs / 20.0);
    // already at target up to f32 resolution
    if (peak - target).abs() <= f32::EPSILON as f64 * target {
        return 1.0;
    }
    let gain = target / peak;
    let limit = target as f32;
    for c in channels.iter_mut() {
        for s in c.iter_mut() {
            *s = (((*s as f64) * gain) as f32).clamp(-limit, limit);
        }
    }
    gain
}

/// SHA-256 hex digest of the interleaved little-endian f32 samples.
pub fn digest_interleaved(channels: &[Vec<f32>]) -> String {
    let mut h = Sha256::new();
    let frames = channels.first().map_or(0, Vec::len);
    let mut buf = Vec::with_capacity(channels.len() * 4 * 4096);
    for start in (0..frames).step_by(4096) {
        buf.clear();
        for i in start..(start + 4096).min(frames) {
            for c in channels {
                buf.extend_from_slice(&c[i].to_le_bytes());
            }
        }
        h.update(&buf);
    }
    hex::encode(h.finalize())
}

/// Writes an interleaved IEEE-float 32-bit WAV.
pub fn write_wav(path: &Path, channels: &[Vec<f32>], sample_rate: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = hound::WavWriter::new(std::io::BufWriter::with_capacity(1 << 20, file), spec)?;
    let frames = channels.first().map_or(0, Vec::len);
    for i in 0..frames {
        for c in channels {
            w.write_sample(c[i])?;
        }
    }
    w.finalize()?;
    Ok(())
}

/// Reads a float WAV back into per-channel vectors.
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f32>>, u32)> {
    let r = hound::WavReader::open(path)?;
    let spec = r.spec();
    let ch = spec.channels as usize;
    let mut channels = vec![Vec::with_capacity(r.duration() as usize); ch];
    for (i, s) in r.into_samples::<f32>().enumerate() {
        channels[i % ch].push(s?);
    }
    Ok((channels, spec.sample_rate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderArtifacts {
    pub ambix: PathBuf,
    pub stereo: PathBuf,
    pub decodes: Vec<PathBuf>,
    pub report: PathBuf,
}

/// Writes the AmbiX file, the stereo preview, any layout decodes and the
/// JSON report into `out_dir`. Derived files are normalized to the same
/// peak target as the AmbiX file.
pub fn write_render_outputs(
    out_dir: &Path,
    block: &AmbisonicBlock,
    report: &mut RenderReport,
) -> Result<RenderArtifacts> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let cfg = report.config.clone();
    let ambix = out_dir.join(&cfg.outputs.ambix);
    write_wav(&ambix, &block.channels, block.sample_rate)?;

    let mut stereo_ch = stereo_downmix(block).to_vec();
    normalize_channels(&mut stereo_ch, cfg.peak_target_dbfs);
    let stereo = out_dir.join(&cfg.outputs.stereo);
    write_wav(&stereo, &stereo_ch, block.sample_rate)?;
    report.stereo_digest = Some(digest_interleaved(&stereo_ch));
    drop(stereo_ch);

    let mut decodes = Vec::new();
    for layout_path in &cfg.outputs.layouts {
        let layout = SpeakerLayout::from_file(layout_path)?;
        let mut feeds = decode_project(block, &layout);
        normalize_channels(&mut feeds, cfg.peak_target_dbfs);
        let stem = layout_path.file_stem().and_then(|s| s.to_str()).unwrap_or("layout");
        let path = out_dir.join(format!("decode_{stem}.wav"));
        write_wav(&path, &feeds, block.sample_rate)?;
        decodes.push(path);
    }

    let report_path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(&report_path, json).map_err(|e| Error::io(&report_path, e))?;
    Ok(RenderArtifacts {
        ambix,
        stereo,
        decodes,
        report: report_path,
    })
}
