//! Renders each sound generator on its own to mono WAV files: impulse
//! crackles, granular snaps, an FM bubble partial and sample pings.
//!
//! ```bash
//! cargo run -p reef-sonify --example crackles_and_bubbles -- layers
//! ```

use std::path::PathBuf;

use reef_sonify::renderer::write_wav;
use reef_sonify::synthesis::{
    bubble_fm_step, bubble_sample_step, crackle_step, grain_step, make_synthetic_grains, voice_rng, CrackleVoice,
    FmParams, FmState, GrainKind, GrainVoice, PingVoice,
};

const SR: u32 = 48_000;

fn main() -> reef_sonify::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "layers".into()));
    std::fs::create_dir_all(&dir).map_err(|e| reef_sonify::Error::io(&dir, e))?;

    // a busy healthy reef: far denser than one cluster would be
    let mut crackles = CrackleVoice::new(voice_rng(1, 0, 0), SR);
    let block = crackle_step(&mut crackles, 30.0, 1.0, 4.0);
    println!("crackles: {} impulses in 4 s", crackles.onsets().len());
    write_wav(&dir.join("crackles.wav"), &[block.samples], SR)?;

    let snaps = make_synthetic_grains(1, GrainKind::Snap, SR);
    let mut grains = GrainVoice::new(voice_rng(1, 0, 0), SR);
    let block = grain_step(&mut grains, 30.0, &snaps, 1.0, 4.0);
    println!("snaps: {} grains from a bank of {}", grains.onsets().len(), snaps.len());
    write_wav(&dir.join("snaps.wav"), &[block.samples], SR)?;

    // PAR sweeps up over four one-second steps; phases carry across steps
    let params = FmParams::default();
    let mut state = FmState::default();
    let mut fm = Vec::new();
    for par in [0.25, 0.5, 0.75, 1.0] {
        println!(
            "fm: par {par:.2} carrier {:.1} Hz modulator {:.2} Hz index {:.1}",
            params.carrier_hz(2),
            params.modulator_hz(2, par),
            params.index(par)
        );
        fm.extend(bubble_fm_step(&mut state, 2, par, &params, 0.8, 1.0, SR).samples);
    }
    write_wav(&dir.join("fm_bubble.wav"), &[fm], SR)?;

    let pings = make_synthetic_grains(1, GrainKind::Ping, SR);
    let mut voice = PingVoice::new(voice_rng(1, 0, 1), SR);
    let block = bubble_sample_step(&mut voice, &pings, 0.8, 1.0, 4.0);
    println!("pings: {} in 4 s (mean 2 per second)", voice.onsets().len());
    write_wav(&dir.join("pings.wav"), &[block.samples], SR)?;

    println!("wrote {}", dir.display());
    Ok(())
}
