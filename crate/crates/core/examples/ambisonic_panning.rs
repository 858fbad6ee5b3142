//! Encodes a short tone at a ring of directions into third-order AmbiX,
//! then decodes it to a speaker layout and to stereo.
//!
//! ```bash
//! cargo run -p reef-sonify --example ambisonic_panning -- crates/core/examples/data/hexagon.json
//! ```

use std::f64::consts::TAU;

use reef_sonify::ambisonics::{decode_project, encode, mix, sh_coeffs, stereo_downmix, SpeakerLayout};
use reef_sonify::synthesis::MonoBlock;

fn rms(x: &[f32]) -> f64 {
    (x.iter().map(|&v| v as f64 * v as f64).sum::<f64>() / x.len() as f64).sqrt()
}

fn main() -> reef_sonify::Result<()> {
    let layout = match std::env::args().nth(1) {
        Some(p) => SpeakerLayout::from_file(p.as_ref())?,
        None => SpeakerLayout::cube(),
    };
    let tone = MonoBlock {
        samples: (0..4800)
            .map(|i| (TAU * 440.0 * i as f64 / 48_000.0).sin() as f32)
            .collect(),
        sample_rate: 48_000,
    };

    println!(
        "{:>6} {:>6}  {}  {:>6} {:>6}",
        "az",
        "el",
        layout.names.join(" "),
        "L",
        "R"
    );
    for step in 0..8 {
        let az = -std::f64::consts::PI + TAU * step as f64 / 8.0;
        let el = 0.3 * (step as f64).sin();
        let block = encode(&tone, &sh_coeffs(az, el));
        let feeds = decode_project(&block, &layout);
        let [l, r] = stereo_downmix(&block);
        let levels: Vec<String> = feeds.iter().map(|f| format!("{:.2}", rms(f))).collect();
        println!(
            "{:>6.1} {:>6.1}  {}  {:>6.2} {:>6.2}",
            az.to_degrees(),
            el.to_degrees(),
            levels.join(" "),
            rms(&l),
            rms(&r)
        );
    }

    // two sources summed channel by channel
    let a = encode(&tone, &sh_coeffs(1.0, 0.0));
    let b = encode(&tone, &sh_coeffs(-1.0, 0.0));
    let both = mix(&[a, b])?;
    println!(
        "\nmixed W rms {:.3}, Y rms {:.3} (cancels for mirrored sources)",
        rms(&both.channels[0]),
        rms(&both.channels[1])
    );
    Ok(())
}
