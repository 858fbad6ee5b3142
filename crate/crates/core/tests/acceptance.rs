//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reef_sonify::ambisonics::{sh_coeffs, CHANNELS};
use reef_sonify::clustering::{cluster_observations, extract_clusters, optics_run, ClusterParams};
use reef_sonify::ingest::{compute_bbox, generate_synthetic_dataset, BBox};
use reef_sonify::mapping::{bleach_to_density, build_timeline, MappingParams, Timeline, VoiceBase};
use reef_sonify::pipeline::{run_pipeline, PipelineConfig, SyntheticSource};
use reef_sonify::renderer::{render, write_render_outputs, Layer, RenderConfig};
use reef_sonify::synthesis::{voice_rng, FmParams, FmVoice, PoissonTrigger, Ramp};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn default_timeline() -> Timeline {
    let obs = generate_synthetic_dataset(7, 517, &BBox::hawaii());
    let (_, _, clusters) = cluster_observations(
        &obs,
        &ClusterParams {
            target_sources: Some(176),
            ..Default::default()
        },
    )
    .unwrap();
    build_timeline(&clusters, &compute_bbox(&obs).unwrap(), &MappingParams::default()).unwrap()
}

fn channel_count() -> Outcome {
    let mut timeline = default_timeline().with_n_days(2);
    timeline.voices.truncate(24);
    let cfg = RenderConfig {
        n_days: 2,
        fade_seconds: 0.5,
        ..Default::default()
    };
    let t0 = Instant::now();
    let (block, mut report) = render(&cfg, &timeline).map_err(|e| e.to_string())?;
    let took = t0.elapsed().as_secs_f64();
    ensure(block.channels.len() == 16 && CHANNELS == 16, || {
        format!("{} channels", block.channels.len())
    })?;
    ensure(took < 1.0, || format!("render took {took:.2} s"))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let art = write_render_outputs(dir.path(), &block, &mut report).map_err(|e| e.to_string())?;
    let spec = hound::WavReader::open(&art.ambix).map_err(|e| e.to_string())?.spec();
    ensure(spec.channels == 16, || {
        format!("wav header says {} channels", spec.channels)
    })?;
    Ok(format!("{} channels in memory and in the AmbiX header", spec.channels))
}

fn duration() -> Outcome {
    let timeline = default_timeline();
    let cfg = RenderConfig::default();
    let t0 = Instant::now();
    let (block, report) = render(&cfg, &timeline).map_err(|e| e.to_string())?;
    let took = t0.elapsed().as_secs_f64();
    ensure(took < 60.0, || format!("full render took {took:.1} s"))?;
    ensure(block.frames() == 3_984_000, || format!("{} frames", block.frames()))?;
    ensure(report.duration_s == 83.0, || format!("{} s", report.duration_s))?;
    ensure(block.channels.iter().all(|c| c.len() == 3_984_000), || {
        "ragged channels".into()
    })?;
    Ok(format!(
        "{} frames = {} s, {} voices rendered in {took:.1} s",
        block.frames(),
        report.duration_s,
        timeline.len()
    ))
}

fn density_endpoints() -> Outcome {
    let (d0, d1) = (bleach_to_density(0.0), bleach_to_density(1.0));
    ensure((d0 - 0.471).abs() <= 1e-12, || format!("density(0) = {d0}"))?;
    ensure((d1 - 0.023).abs() <= 1e-12, || format!("density(1) = {d1}"))?;
    let grid: Vec<f64> = (0..1000).map(|i| bleach_to_density(i as f64 / 999.0)).collect();
    for (i, w) in grid.windows(2).enumerate() {
        ensure(w[1] < w[0], || format!("not strictly decreasing at grid point {i}"))?;
    }
    Ok(format!(
        "density(0) = {d0}, density(1) = {d1}, strictly decreasing on 1000 points"
    ))
}

fn optics_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut clusters_seen = 0;
    for inst in 0..100 {
        let n = rng.random_range(2..=200);
        let blobs = rng.random_range(1..=8);
        let centers: Vec<(f64, f64)> = (0..blobs)
            .map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let spread = rng.random_range(0.05..1.5);
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let c = centers[rng.random_range(0..blobs)];
                (
                    c.0 + rng.random_range(-spread..spread),
                    c.1 + rng.random_range(-spread..spread),
                )
            })
            .collect();
        let eps = rng.random_range(0.01..1.0);
        let ord = optics_run(&points, 2, f64::INFINITY).map_err(|e| e.to_string())?;
        let labels = extract_clusters(&ord, eps);
        let oracle = common::union_find_labels(&points, eps);
        ensure(common::same_partition(&labels, &oracle), || {
            format!("instance {inst} (n {n}, eps {eps}) differs")
        })?;
        clusters_seen += labels.n_clusters();
    }
    let took = t0.elapsed().as_secs_f64();
    ensure(took < 10.0, || format!("took {took:.1} s"))?;
    Ok(format!(
        "100 instances match, {clusters_seen} clusters in total, {took:.2} s"
    ))
}

fn sh_orthonormality() -> Outcome {
    let t0 = Instant::now();
    let quad = common::sphere_quadrature(40, 60);
    ensure(quad.len() == 2400, || format!("{} points", quad.len()))?;
    let mut gram = [[0.0f64; CHANNELS]; CHANNELS];
    for &(az, el, w) in &quad {
        let y = sh_coeffs(az, el).to_n3d();
        for a in 0..CHANNELS {
            for b in 0..CHANNELS {
                gram[a][b] += w * y[a] * y[b] / (4.0 * std::f64::consts::PI);
            }
        }
    }
    let mut worst = 0.0f64;
    for (a, row) in gram.iter().enumerate() {
        for (b, &g) in row.iter().enumerate() {
            worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("max deviation {worst:e}"))?;
    ensure(t0.elapsed().as_secs_f64() < 5.0, || "too slow".into())?;
    Ok(format!(
        "2400-point Gram within {worst:.1e} of identity, {:.3} s",
        t0.elapsed().as_secs_f64()
    ))
}

fn poisson_rate() -> Outcome {
    let t0 = Instant::now();
    let sr = 48_000u32;
    let n = 10_000 * sr as usize;
    let mut outliers = Vec::new();
    let mut counts = Vec::new();
    for seed in 0..20u64 {
        let mut rng = voice_rng(seed, 0, 0);
        let mut trig = PoissonTrigger::new(&mut rng);
        let ev = trig.run(n, Ramp::constant(0.471), sr, &mut rng, |_, _| {});
        counts.push(ev.events);
        if (ev.events as f64 - 4710.0).abs() > 0.05 * 4710.0 {
            outliers.push(seed);
        }
    }
    ensure(outliers.len() <= 1, || {
        format!("outlier seeds {outliers:?}, counts {counts:?}")
    })?;
    ensure(t0.elapsed().as_secs_f64() < 10.0, || "too slow".into())?;
    let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
    Ok(format!(
        "counts in [{lo}, {hi}], {} outliers, {:.2} s",
        outliers.len(),
        t0.elapsed().as_secs_f64()
    ))
}

fn determinism() -> Outcome {
    let base = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |workers: usize| {
        let mut cfg = PipelineConfig {
            synthetic: Some(SyntheticSource::default()),
            workdir: base.path().join(format!("w{workers}")),
            ..Default::default()
        };
        cfg.render.master_seed = 78;
        cfg.render.workers = Some(workers);
        run_pipeline(&cfg).map_err(|e| e.to_string())
    };
    let a = run(1)?;
    let b = run(4)?;
    for key in [
        "ad1/ambix.wav",
        "ad1/stereo.wav",
        "ad2/ambix.wav",
        "ad2/stereo.wav",
        "observations.csv",
        "clusters.csv",
        "reachability.csv",
        "sonification.csv",
    ] {
        ensure(a.files.contains_key(key), || format!("{key} missing from artifacts"))?;
    }
    for (name, d) in &a.files {
        ensure(b.files.get(name) == Some(d), || {
            format!("{name} differs between 1 and 4 workers")
        })?;
    }
    ensure(a.files.len() == b.files.len(), || "artifact sets differ".into())?;
    let contents = a
        .reports
        .iter()
        .map(|r| &r.content_digest)
        .zip(b.reports.iter().map(|r| &r.content_digest));
    for (x, y) in contents {
        ensure(x == y, || "content digest differs".into())?;
    }
    Ok(format!("{} artifacts identical across 1 and 4 workers", a.files.len()))
}

fn fm_sidebands() -> Outcome {
    let t0 = Instant::now();
    let sr = 48_000u32;
    let params = FmParams::default();
    let (fc, fm, index) = (params.carrier_hz(2), params.modulator_hz(2, 1.0), params.index(1.0));
    ensure(
        (fc - 110.0).abs() < 1e-12 && (fm - 177.98).abs() < 0.01 && index == 4.0,
        || format!("fc {fc} fm {fm} I {index}"),
    )?;
    let mut voice = FmVoice::new(2, params, sr);
    let mut buf = vec![0.0f32; 4 * sr as usize];
    voice.render(&mut buf, Ramp::constant(1.0), Ramp::constant(1.0));
    let spec = common::magnitude_spectrum(&buf);
    let bin = sr as f64 / buf.len() as f64;
    let mut sorted = spec.clone();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    let mut found = Vec::new();
    for m in 1..=2 {
        for f in [fc + m as f64 * fm, (fc - m as f64 * fm).abs()] {
            let k = (f / bin).round() as usize;
            let (peak, mag) = (k - 4..=k + 4)
                .map(|i| (i, spec[i]))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let off = (peak as f64 * bin - f).abs();
            ensure(off <= bin, || {
                format!("peak for {f:.2} Hz at {:.2} Hz", peak as f64 * bin)
            })?;
            ensure(mag > 100.0 * floor, || format!("no clear peak at {f:.2} Hz"))?;
            found.push(format!("{f:.2}"));
        }
    }
    ensure(t0.elapsed().as_secs_f64() < 5.0, || "too slow".into())?;
    Ok(format!(
        "peaks at {} Hz within one 0.25 Hz bin, {:.2} s",
        found.join(", "),
        t0.elapsed().as_secs_f64()
    ))
}

fn random_timeline(rng: &mut ChaCha8Rng, voices: usize) -> Timeline {
    Timeline {
        n_days: 78,
        voices: (0..voices)
            .map(|i| {
                let bleach = if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random_range(0.0..=1.0)
                };
                VoiceBase {
                    cluster_id: i,
                    azimuth_rad: rng.random_range(-3.1..3.1),
                    elevation_rad: rng.random_range(-1.5..1.5),
                    depth_norm: rng.random_range(0.0..=1.0),
                    par_norm: rng.random_range(0.0..=1.0),
                    bleach_frac: bleach,
                    depth_gain: 1.0,
                    partial_index: i + 1,
                }
            })
            .collect(),
        clamped: 0,
    }
}

fn crackle_quieting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut timelines = vec![default_timeline()];
    for _ in 0..4 {
        let n = rng.random_range(1..=12);
        timelines.push(random_timeline(&mut rng, n));
    }
    let mut checked = 0;
    for (t, timeline) in timelines.iter().enumerate() {
        let cfg = RenderConfig {
            solo: Some(Layer::Crackles),
            master_seed: t as u64,
            ..Default::default()
        };
        let (_, report) = render(&cfg, timeline).map_err(|e| e.to_string())?;
        ensure(report.days.len() == 78, || {
            format!("{} days of telemetry", report.days.len())
        })?;
        ensure(report.days.iter().all(|d| d.bubble_events == 0), || {
            "bubbles were not soloed off".into()
        })?;
        for w in report.days.windows(2) {
            ensure(w[1].crackle_expected <= w[0].crackle_expected, || {
                format!(
                    "timeline {t}: day {} expected {} > day {} expected {}",
                    w[1].day, w[1].crackle_expected, w[0].day, w[0].crackle_expected
                )
            })?;
        }
        checked += 1;
    }
    Ok(format!(
        "expected crackle events nonincreasing over 78 days on {checked} timelines"
    ))
}

fn cardinalities() -> Outcome {
    let obs = generate_synthetic_dataset(7, 517, &BBox::hawaii());
    ensure(obs.len() == 517, || format!("{} observations", obs.len()))?;
    let bbox = compute_bbox(&obs).map_err(|e| e.to_string())?;
    let params = ClusterParams::default();
    let (ordering, eps, clusters) = cluster_observations(&obs, &params).map_err(|e| e.to_string())?;
    let total: usize = clusters.iter().map(|c| c.member_count).sum();
    ensure(total == 517, || format!("member total {total}"))?;
    let labels = extract_clusters(&ordering, eps);
    ensure(labels.n_sources() == clusters.len(), || {
        "source count disagrees with labels".into()
    })?;
    let mut ids: Vec<usize> = clusters.iter().map(|c| c.cluster_id).collect();
    ids.sort_unstable();
    ensure(ids == (0..clusters.len()).collect::<Vec<_>>(), || {
        "cluster ids are not 0..k".into()
    })?;
    for c in &clusters {
        ensure(c.member_count >= 1, || format!("cluster {} is empty", c.cluster_id))?;
        let inside = (bbox.lat_min..=bbox.lat_max).contains(&c.lat_deg)
            && (bbox.lon_min..=bbox.lon_max).contains(&c.lon_deg)
            && (bbox.depth_min..=bbox.depth_max).contains(&c.depth_m)
            && (bbox.par_min..=bbox.par_max).contains(&c.par)
            && (0.0..=100.0).contains(&c.bleach_pct);
        ensure(inside, || {
            format!("cluster {} mean lies outside the data box", c.cluster_id)
        })?;
    }
    let timeline = build_timeline(&clusters, &bbox, &MappingParams::default()).map_err(|e| e.to_string())?;
    ensure(timeline.len() == clusters.len() && timeline.clamped == 0, || {
        "timeline cardinality".into()
    })?;

    let mut extra = String::new();
    if let Ok(path) = std::env::var("REEF_REAL_CSV") {
        let cfg = PipelineConfig {
            input_csv: Some(path.into()),
            ..Default::default()
        };
        let (real, _) = reef_sonify::pipeline::load_observations(&cfg).map_err(|e| e.to_string())?;
        let (_, _, rc) = cluster_observations(&real, &params).map_err(|e| e.to_string())?;
        extra = format!("; supplied table gives {} sources (reference 176)", rc.len());
    }
    Ok(format!(
        "517 observations -> {} sources at eps {eps}, member total {total}{extra}",
        clusters.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("channel count", channel_count),
        ("duration", duration),
        ("density endpoints", density_endpoints),
        ("optics oracle", optics_oracle),
        ("sh orthonormality", sh_orthonormality),
        ("poisson rate", poisson_rate),
        ("determinism", determinism),
        ("fm sidebands", fm_sidebands),
        ("crackle quieting", crackle_quieting),
        ("cardinalities", cardinalities),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
