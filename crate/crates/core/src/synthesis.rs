//! Mono generators for the two layers of every voice.
//!
//! Crackles are a per-sample Bernoulli impulse process (impulse synthesis)
//! or the same trigger law driving grain playback. Bubbles are a
//! phase-continuous FM partial or jittered sample pings. Every generator
//! owns its random stream, so a voice renders identically no matter which
//! thread runs it.
//!
//! Control values arrive as [`Ramp`]s: the value at the start of a block
//! and the value it approaches by the end. A constant ramp reproduces the
//! fixed-parameter operations exactly.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VoiceRng = ChaCha8Rng;

/// Golden ratio, the fully inharmonic modulator ratio.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;
pub const MAX_GRAIN_SECONDS: f64 = 0.25;
pub const CRACKLE_CENTER_HZ: f64 = 6300.0;
pub const CRACKLE_Q: f64 = 0.7;
pub const PING_RATE_HZ: f64 = 2.0;
pub const PING_JITTER: f64 = 0.5;

const STREAM_MULTIPLIER: u64 = 0x9E37_79B9_7F4A_7C15;

/// Random stream for one layer of one voice.
pub fn voice_rng(master_seed: u64, cluster_id: usize, layer: u64) -> VoiceRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ (cluster_id as u64).wrapping_mul(STREAM_MULTIPLIER));
    rng.set_stream(layer);
    rng
}

pub fn frames_for(duration_s: f64, sample_rate: u32) -> usize {
    (duration_s * sample_rate as f64).round() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoBlock {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl MonoBlock {
    pub fn zeros(frames: usize, sample_rate: u32) -> Self {
        MonoBlock {
            samples: vec![0.0; frames],
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }
}

/// Linear control ramp across one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub start: f64,
    pub end: f64,
}

impl Ramp {
    pub fn new(start: f64, end: f64) -> Self {
        Ramp { start, end }
    }

    pub fn constant(v: f64) -> Self {
        Ramp { start: v, end: v }
    }

    pub fn is_constant(&self) -> bool {
        self.start == self.end
    }

    #[inline]
    pub fn at(&self, i: usize, n: usize) -> f64 {
        if self.start == self.end {
            self.start
        } else {
            self.start + (self.end - self.start) * (i as f64 / n as f64)
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Ramp::new(self.start * k, self.end * k)
    }
}

/// Event counts of one rendered block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepEvents {
    pub events: u64,
    /// Accumulated hazard over the block: the expected event count.
    pub expected: f64,
}

impl std::ops::AddAssign for StepEvents {
    fn add_assign(&mut self, rhs: Self) {
        self.events += rhs.events;
        self.expected += rhs.expected;
    }
}

/// Per-sample hazard for a rate in events/s.
fn hazard(rate_hz: f64, sample_rate: u32) -> f64 {
    let p = rate_hz.max(0.0) / sample_rate as f64;
    if p >= 1.0 {
        f64::INFINITY
    } else {
        -(-p).ln_1p()
    }
}

fn exp1(rng: &mut VoiceRng) -> f64 {
    -(-rng.random::<f64>()).ln_1p()
}

/// Bernoulli trigger law with per-sample probability `rate / sample_rate`.
///
/// Implemented as a countdown of an Exp(1) threshold against the
/// accumulated per-sample hazard `-ln(1 - p)`, so the probability of an
/// event at sample `n` given none since the last one is exactly `p_n`, while
/// randomness is only drawn at events. Inside a block the hazard moves
/// linearly between the ramp endpoints.
#[derive(Debug, Clone)]
pub struct PoissonTrigger {
    remaining: f64,
}

impl PoissonTrigger {
    pub fn new(rng: &mut VoiceRng) -> Self {
        PoissonTrigger { remaining: exp1(rng) }
    }

    /// Runs `n` samples, calling `on_event(offset, rng)` at every trigger.
    pub fn run(
        &mut self,
        n: usize,
        rate: Ramp,
        sample_rate: u32,
        rng: &mut VoiceRng,
        mut on_event: impl FnMut(usize, &mut VoiceRng),
    ) -> StepEvents {
        let h0 = hazard(rate.start, sample_rate);
        let h1 = hazard(rate.end, sample_rate);
        let mut out = StepEvents::default();
        if n == 0 {
            return out;
        }
        // Same value as n*h0 + (h1-h0)(n-1)/2, written so it rounds monotonically in h0 and h1.
        out.expected = h0 * (n + 1) as f64 / 2.0 + h1 * (n - 1) as f64 / 2.0;
        if h0 == h1 {
            if h0 == 0.0 {
                return out;
            }
            let mut pos = 0usize;
            loop {
                let k = (self.remaining / h0).ceil().max(1.0);
                if k > (n - pos) as f64 {
                    self.remaining -= (n - pos) as f64 * h0;
                    break;
                }
                pos += k as usize;
                on_event(pos - 1, rng);
                out.events += 1;
                self.remaining = exp1(rng);
            }
        } else {
            let step = (h1 - h0) / n as f64;
            for i in 0..n {
                self.remaining -= h0 + step * i as f64;
                if self.remaining <= 0.0 {
                    on_event(i, rng);
                    out.events += 1;
                    self.remaining = exp1(rng);
                }
            }
        }
        out
    }
}

/// Second-order band-pass, constant 0 dB peak gain, transposed direct form II.
#[derive(Debug, Clone, Copy)]
pub struct BandPass {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    s1: f64,
    s2: f64,
}

impl BandPass {
    pub fn new(center_hz: f64, q: f64, sample_rate: u32) -> Self {
        let w0 = TAU * center_hz / sample_rate as f64;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        BandPass {
            b0: alpha / a0,
            b2: -alpha / a0,
            a1: -2.0 * w0.cos() / a0,
            a2: (1.0 - alpha) / a0,
            s1: 0.0,
            s2: 0.0,
        }
    }

    pub fn crackle(sample_rate: u32) -> Self {
        BandPass::new(CRACKLE_CENTER_HZ, CRACKLE_Q, sample_rate)
    }

    #[inline]
    pub fn tick(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = -self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    fn is_quiet(&self) -> bool {
        self.s1.abs() < 1e-24 && self.s2.abs() < 1e-24
    }

    /// Filters in place; stretches of zero input after the state has decayed
    /// are left at zero.
    pub fn process(&mut self, buf: &mut [f32]) {
        for s in buf.iter_mut() {
            if *s == 0.0 && self.is_quiet() {
                self.s1 = 0.0;
                self.s2 = 0.0;
                continue;
            }
            *s = self.tick(*s as f64) as f32;
        }
    }
}

/// Impulse crackles: random-sign impulses with amplitude uniform in
/// [0.25, 1], spread over a two-tap kernel and band-passed.
#[derive(Debug, Clone)]
pub struct CrackleVoice {
    rng: VoiceRng,
    trigger: PoissonTrigger,
    filter: BandPass,
    carry: f32,
    sample_rate: u32,
    onsets: Vec<usize>,
}

impl CrackleVoice {
    pub fn new(mut rng: VoiceRng, sample_rate: u32) -> Self {
        let trigger = PoissonTrigger::new(&mut rng);
        CrackleVoice {
            rng,
            trigger,
            filter: BandPass::crackle(sample_rate),
            carry: 0.0,
            sample_rate,
            onsets: Vec::new(),
        }
    }

    /// Offsets of the impulses placed by the last `render` call.
    pub fn onsets(&self) -> &[usize] {
        &self.onsets
    }

    pub fn render(&mut self, out: &mut [f32], density_hz: Ramp, gain: Ramp) -> StepEvents {
        let n = out.len();
        out.fill(0.0);
        self.onsets.clear();
        if n == 0 {
            return StepEvents::default();
        }
        out[0] = self.carry;
        self.carry = 0.0;
        let onsets = &mut self.onsets;
        let mut carry = 0.0f32;
        let events = self
            .trigger
            .run(n, density_hz, self.sample_rate, &mut self.rng, |i, rng| {
                let mag: f64 = rng.random_range(0.25..=1.0);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let a = (0.5 * sign * mag * gain.at(i, n)) as f32;
                out[i] += a;
                if i + 1 < n {
                    out[i + 1] += a;
                } else {
                    carry += a;
                }
                onsets.push(i);
            });
        self.carry = carry;
        self.filter.process(out);
        for s in out.iter_mut() {
            *s = s.clamp(-1.0, 1.0);
        }
        events
    }
}

/// Constant-parameter crackle block.
pub fn crackle_step(voice: &mut CrackleVoice, density_hz: f64, gain: f64, duration_s: f64) -> MonoBlock {
    let mut block = MonoBlock::zeros(frames_for(duration_s, voice.sample_rate), voice.sample_rate);
    voice.render(&mut block.samples, Ramp::constant(density_hz), Ramp::constant(gain));
    block
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankSource {
    File,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrainKind {
    Snap,
    Ping,
}

/// Short peak-normalized grains sharing one sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GrainBank {
    grains: Vec<MonoBlock>,
    source: BankSource,
}

impl GrainBank {
    /// Truncates grains to 250 ms and peak-normalizes them; all-zero grains
    /// are dropped.
    pub fn new(grains: Vec<MonoBlock>, source: BankSource) -> Result<Self> {
        let grains: Vec<MonoBlock> = grains
            .into_iter()
            .filter_map(|mut g| {
                g.samples.truncate(frames_for(MAX_GRAIN_SECONDS, g.sample_rate));
                let peak = g.peak();
                if !(peak > 0.0) || !peak.is_finite() {
                    return None;
                }
                for s in &mut g.samples {
                    *s /= peak;
                }
                Some(g)
            })
            .collect();
        if grains.is_empty() {
            return Err(Error::EmptyBank);
        }
        Ok(GrainBank { grains, source })
    }

    pub fn grains(&self) -> &[MonoBlock] {
        &self.grains
    }

    pub fn source(&self) -> BankSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.grains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.grains[0].sample_rate
    }
}

type GrainSignal = Box<dyn FnMut(&mut ChaCha8Rng, f64) -> f64>;

/// Eight deterministic grains: "snap" is band-passed decaying noise of
/// 3-10 ms, "ping" decaying sines of 30-80 ms between 1 and 4 kHz.
pub fn make_synthetic_grains(seed: u64, kind: GrainKind, sample_rate: u32) -> GrainBank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grains = (0..8)
        .map(|_| {
            let (len_s, mut sig): (f64, GrainSignal) = match kind {
                GrainKind::Snap => {
                    let len = rng.random_range(0.003..=0.010);
                    let mut bp = BandPass::crackle(sample_rate);
                    (
                        len,
                        Box::new(move |r: &mut ChaCha8Rng, _t| bp.tick(r.random_range(-1.0..=1.0))),
                    )
                }
                GrainKind::Ping => {
                    let len = rng.random_range(0.030..=0.080);
                    let f = rng.random_range(1000.0..=4000.0);
                    (len, Box::new(move |_r: &mut ChaCha8Rng, t: f64| (TAU * f * t).sin()))
                }
            };
            let n = frames_for(len_s, sample_rate).max(1);
            // decays by 60 dB over the grain
            let decay = 6.9 / n as f64;
            let samples = (0..n)
                .map(|i| {
                    let t = i as f64 / sample_rate as f64;
                    (sig(&mut rng, t) * (-decay * i as f64).exp()) as f32
                })
                .collect();
            MonoBlock { samples, sample_rate }
        })
        .collect();
    GrainBank::new(grains, BankSource::Synthetic).expect("synthetic grains are non-silent")
}

/// Linear-interpolation resampling.
pub fn resample_linear(samples: &[f32], from: u32, to: u32) -> Vec<f32> {
    if from == to || samples.len() < 2 {
        return samples.to_vec();
    }
    let ratio = from as f64 / to as f64;
    let n_out = ((samples.len() as f64) / ratio).round().max(1.0) as usize;
    (0..n_out)
        .map(|i| {
            let x = i as f64 * ratio;
            let j = (x.floor() as usize).min(samples.len() - 1);
            let k = (j + 1).min(samples.len() - 1);
            let f = (x - j as f64) as f32;
            samples[j] + (samples[k] - samples[j]) * f
        })
        .collect()
}

/// Loads every `.wav` in `dir` (sorted by name), taking the first channel
/// and resampling to `sample_rate`.
pub fn load_grain_dir(dir: &Path, sample_rate: u32) -> Result<GrainBank> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    let mut grains = Vec::with_capacity(paths.len());
    for p in paths {
        let reader = hound::WavReader::open(&p)?;
        let spec = reader.spec();
        let ch = spec.channels.max(1) as usize;
        let raw: Vec<f32> = match spec.sample_format {
            hound::SampleFormat::Float => reader.into_samples::<f32>().collect::<std::result::Result<_, _>>()?,
            hound::SampleFormat::Int => {
                let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
                reader
                    .into_samples::<i32>()
                    .map(|s| s.map(|v| v as f32 * scale))
                    .collect::<std::result::Result<_, _>>()?
            }
        };
        let mono: Vec<f32> = raw.iter().step_by(ch).copied().collect();
        grains.push(MonoBlock {
            samples: resample_linear(&mono, spec.sample_rate, sample_rate),
            sample_rate,
        });
    }
    GrainBank::new(grains, BankSource::File)
}

#[derive(Debug, Clone, Copy)]
struct ActiveGrain {
    grain: usize,
    pos: usize,
}

/// Adds active grains into `out` (which starts at zero), clamping the sum.
fn play_grains(active: &mut Vec<ActiveGrain>, bank: &GrainBank, out: &mut [f32], from: usize, to: usize) {
    for g in active.iter_mut() {
        let src = &bank.grains[g.grain].samples;
        let take = (src.len() - g.pos).min(to - from);
        for (o, s) in out[from..from + take].iter_mut().zip(&src[g.pos..g.pos + take]) {
            *o += *s;
        }
        g.pos += take;
    }
    active.retain(|g| g.pos < bank.grains[g.grain].samples.len());
}

/// Granular crackles: the impulse trigger law starts uniformly chosen grains.
#[derive(Debug, Clone)]
pub struct GrainVoice {
    rng: VoiceRng,
    trigger: PoissonTrigger,
    active: Vec<ActiveGrain>,
    sample_rate: u32,
    onsets: Vec<(usize, usize)>,
}

impl GrainVoice {
    pub fn new(mut rng: VoiceRng, sample_rate: u32) -> Self {
        let trigger = PoissonTrigger::new(&mut rng);
        GrainVoice {
            rng,
            trigger,
            active: Vec::new(),
            sample_rate,
            onsets: Vec::new(),
        }
    }

    /// `(offset, grain index)` of every trigger in the last block.
    pub fn onsets(&self) -> &[(usize, usize)] {
        &self.onsets
    }

    pub fn render(&mut self, out: &mut [f32], rate_hz: Ramp, gain: Ramp, bank: &GrainBank) -> StepEvents {
        let n = out.len();
        out.fill(0.0);
        self.onsets.clear();
        let n_grains = bank.len();
        let onsets = &mut self.onsets;
        let events = self.trigger.run(n, rate_hz, self.sample_rate, &mut self.rng, |i, rng| {
            onsets.push((i, rng.random_range(0..n_grains)));
        });
        let mut cursor = 0;
        for &(at, grain) in &self.onsets {
            play_grains(&mut self.active, bank, out, cursor, at);
            self.active.push(ActiveGrain { grain, pos: 0 });
            cursor = at;
        }
        play_grains(&mut self.active, bank, out, cursor, n);
        for (i, s) in out.iter_mut().enumerate() {
            *s = (s.clamp(-1.0, 1.0) as f64 * gain.at(i, n)).clamp(-1.0, 1.0) as f32;
        }
        events
    }
}

pub fn grain_step(voice: &mut GrainVoice, rate_hz: f64, bank: &GrainBank, gain: f64, duration_s: f64) -> MonoBlock {
    let mut block = MonoBlock::zeros(frames_for(duration_s, voice.sample_rate), voice.sample_rate);
    voice.render(&mut block.samples, Ramp::constant(rate_hz), Ramp::constant(gain), bank);
    block
}

/// Oscillator phases carried between blocks, each in [0, 2π).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FmState {
    pub carrier_phase: f64,
    pub modulator_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FmParams {
    pub f0_hz: f64,
    /// Modulator/carrier ratio reached at full PAR.
    pub ratio_at_full: f64,
    /// Modulation index reached at full PAR.
    pub index_at_full: f64,
}

impl Default for FmParams {
    fn default() -> Self {
        FmParams {
            f0_hz: 55.0,
            ratio_at_full: GOLDEN_RATIO,
            index_at_full: 4.0,
        }
    }
}

impl FmParams {
    pub fn carrier_hz(&self, partial_index: usize) -> f64 {
        partial_index as f64 * self.f0_hz
    }

    pub fn modulator_hz(&self, partial_index: usize, par: f64) -> f64 {
        self.carrier_hz(partial_index) * (1.0 + par * (self.ratio_at_full - 1.0))
    }

    pub fn index(&self, par: f64) -> f64 {
        self.index_at_full * par
    }
}

const SINE_BITS: u32 = 14;
const SINE_LEN: usize = 1 << SINE_BITS;

fn sine_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=SINE_LEN)
            .map(|i| (TAU * i as f64 / SINE_LEN as f64).sin())
            .collect()
    })
}

/// Table sine with linear interpolation; absolute error below 2e-8.
#[inline]
pub fn fast_sin(x: f64) -> f64 {
    let t = sine_table();
    let u = x.rem_euclid(TAU) * (SINE_LEN as f64 / TAU);
    let i = (u as usize).min(SINE_LEN - 1);
    let f = u - i as f64;
    t[i] + (t[i + 1] - t[i]) * f
}

#[inline]
fn wrap(p: f64) -> f64 {
    if p >= TAU {
        p - TAU
    } else {
        p
    }
}

/// One FM partial: carrier at `partial_index * f0`, modulator ratio and
/// index rising with PAR, amplitude `amp * par`.
#[derive(Debug, Clone)]
pub struct FmVoice {
    pub state: FmState,
    pub partial_index: usize,
    pub params: FmParams,
    sample_rate: u32,
}

impl FmVoice {
    pub fn new(partial_index: usize, params: FmParams, sample_rate: u32) -> Self {
        FmVoice {
            state: FmState::default(),
            partial_index,
            params,
            sample_rate,
        }
    }

    pub fn with_state(mut self, state: FmState) -> Self {
        self.state = state;
        self
    }

    /// Carrier at or above Nyquist.
    pub fn violates_nyquist(&self) -> bool {
        self.params.carrier_hz(self.partial_index) >= self.sample_rate as f64 / 2.0
    }

    pub fn render(&mut self, out: &mut [f32], par: Ramp, amp: Ramp) {
        let n = out.len();
        let fc = self.params.carrier_hz(self.partial_index);
        let dt = TAU / self.sample_rate as f64;
        let inc_c = fc * dt;
        let FmState {
            mut carrier_phase,
            mut modulator_phase,
        } = self.state;
        for (i, o) in out.iter_mut().enumerate() {
            let p = par.at(i, n);
            let index = self.params.index(p);
            let y = amp.at(i, n) * p * fast_sin(carrier_phase + index * fast_sin(modulator_phase));
            *o = y.clamp(-1.0, 1.0) as f32;
            carrier_phase = wrap(carrier_phase + inc_c);
            modulator_phase = wrap(modulator_phase + self.params.modulator_hz(self.partial_index, p) * dt);
        }
        self.state = FmState {
            carrier_phase,
            modulator_phase,
        };
    }
}

/// Constant-parameter FM block; `state` carries the phases forward.
pub fn bubble_fm_step(
    state: &mut FmState,
    partial_index: usize,
    par_daily: f64,
    params: &FmParams,
    amp: f64,
    duration_s: f64,
    sample_rate: u32,
) -> MonoBlock {
    let mut voice = FmVoice::new(partial_index, *params, sample_rate).with_state(*state);
    let mut block = MonoBlock::zeros(frames_for(duration_s, sample_rate), sample_rate);
    voice.render(&mut block.samples, Ramp::constant(par_daily), Ramp::constant(amp));
    *state = voice.state;
    block
}

/// Sample-based bubbles: pings at a mean of 2 per second, each inter-onset
/// interval jittered by ±50% uniformly.
#[derive(Debug, Clone)]
pub struct PingVoice {
    rng: VoiceRng,
    next_onset: f64,
    active: Vec<ActiveGrain>,
    sample_rate: u32,
    onsets: Vec<(usize, usize)>,
}

impl PingVoice {
    pub fn new(mut rng: VoiceRng, sample_rate: u32) -> Self {
        let next_onset = Self::interval(&mut rng, sample_rate);
        PingVoice {
            rng,
            next_onset,
            active: Vec::new(),
            sample_rate,
            onsets: Vec::new(),
        }
    }

    fn interval(rng: &mut VoiceRng, sample_rate: u32) -> f64 {
        let jitter: f64 = rng.random_range(-PING_JITTER..PING_JITTER);
        sample_rate as f64 / PING_RATE_HZ * (1.0 + jitter)
    }

    pub fn onsets(&self) -> &[(usize, usize)] {
        &self.onsets
    }

    pub fn render(&mut self, out: &mut [f32], par: Ramp, amp: Ramp, bank: &GrainBank) -> StepEvents {
        let n = out.len();
        out.fill(0.0);
        self.onsets.clear();
        while self.next_onset < n as f64 {
            let g = self.rng.random_range(0..bank.len());
            self.onsets.push((self.next_onset.floor() as usize, g));
            self.next_onset += Self::interval(&mut self.rng, self.sample_rate);
        }
        self.next_onset -= n as f64;
        let mut cursor = 0;
        for &(at, grain) in &self.onsets {
            play_grains(&mut self.active, bank, out, cursor, at);
            self.active.push(ActiveGrain { grain, pos: 0 });
            cursor = at;
        }
        play_grains(&mut self.active, bank, out, cursor, n);
        for (i, s) in out.iter_mut().enumerate() {
            let g = amp.at(i, n) * par.at(i, n);
            *s = (s.clamp(-1.0, 1.0) as f64 * g).clamp(-1.0, 1.0) as f32;
        }
        StepEvents {
            events: self.onsets.len() as u64,
            expected: n as f64 / self.sample_rate as f64 * PING_RATE_HZ,
        }
    }
}

pub fn bubble_sample_step(
    voice: &mut PingVoice,
    bank: &GrainBank,
    par_daily: f64,
    amp: f64,
    duration_s: f64,
) -> MonoBlock {
    let mut block = MonoBlock::zeros(frames_for(duration_s, voice.sample_rate), voice.sample_rate);
    voice.render(&mut block.samples, Ramp::constant(par_daily), Ramp::constant(amp), bank);
    block
}
