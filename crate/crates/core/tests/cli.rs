use std::path::Path;
use std::process::{Command, Output};

use reef_sonify::renderer::read_wav;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reef-sonify"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

const SHORT_RENDER: &str = r#"{"n_days": 3, "fade_seconds": 0.5, "master_seed": 11}"#;

const LAYOUT: &str = r#"[
  {"name": "L", "azimuth_deg": 30, "elevation_deg": 0},
  {"name": "R", "azimuth_deg": -30, "elevation_deg": 0},
  {"name": "C", "azimuth_deg": 0, "elevation_deg": 0},
  {"name": "Top", "azimuth_deg": 0, "elevation_deg": 90}
]"#;

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("render.json"), SHORT_RENDER).unwrap();
    std::fs::write(d.join("layout.json"), LAYOUT).unwrap();

    ok(&bin(
        &[
            "ingest",
            "--synthetic-seed",
            "3",
            "--synthetic-n",
            "150",
            "--out-dir",
            "s1",
        ],
        d,
    ));
    assert!(d.join("s1/observations.csv").is_file() && d.join("s1/stats.json").is_file());

    ok(&bin(
        &[
            "cluster",
            "--input",
            "s1/observations.csv",
            "--eps",
            "0.1",
            "--reachability",
            "--out-dir",
            "s2",
        ],
        d,
    ));
    let clusters = std::fs::read_to_string(d.join("s2/clusters.csv")).unwrap();
    assert!(clusters.starts_with("cluster_id,lat,lon,depth,bleach,par,member_count"));
    let members: usize = clusters
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(members, 150);
    let reach = std::fs::read_to_string(d.join("s2/reachability.csv")).unwrap();
    assert_eq!(reach.lines().count(), 151);

    ok(&bin(
        &[
            "map",
            "--clusters",
            "s2/clusters.csv",
            "--stats",
            "s1/stats.json",
            "--n-days",
            "3",
            "--out-dir",
            "s3",
        ],
        d,
    ));
    let sonif = std::fs::read_to_string(d.join("s3/sonification.csv")).unwrap();
    assert!(sonif.starts_with("cluster_id,azimuth_rad,elevation_rad,depth_norm,par_norm"));

    let out = bin(
        &[
            "render",
            "--timeline",
            "s3/sonification.csv",
            "--config",
            "render.json",
            "--mode",
            "ad2",
            "--layout",
            "layout.json",
            "--out-dir",
            "s4",
        ],
        d,
    );
    ok(&out);
    let (ambix, sr) = read_wav(&d.join("s4/ambix.wav")).unwrap();
    assert_eq!((ambix.len(), sr), (16, 48_000));
    assert_eq!(ambix[0].len(), 3 * 48_000 + 24_000);
    let (stereo, _) = read_wav(&d.join("s4/stereo.wav")).unwrap();
    assert_eq!(stereo.len(), 2);
    let (decoded, _) = read_wav(&d.join("s4/decode_layout.wav")).unwrap();
    assert_eq!(decoded.len(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("s4/report.json")).unwrap()).unwrap();
    assert_eq!(report["channels"], 16);
    assert_eq!(report["days"].as_array().unwrap().len(), 3);
}

#[test]
fn pipeline_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = r#"{
        "synthetic": {"seed": 2, "n": 120},
        "clustering": {"eps": 0.08},
        "render": {"n_days": 2, "fade_seconds": 0.25},
        "modes": "ad1"
    }"#;
    std::fs::write(d.join("cfg.json"), cfg).unwrap();
    let out = bin(
        &["pipeline", "--config", "cfg.json", "--seed", "4", "--out-dir", "run"],
        d,
    );
    ok(&out);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("run/manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_object().unwrap();
    for name in [
        "observations.csv",
        "clusters.csv",
        "sonification.csv",
        "ad1/ambix.wav",
        "ad1/stereo.wav",
    ] {
        assert!(files.contains_key(name), "{name} missing");
    }
    assert!(!d.join("run/ad2").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ad1/ambix.wav"));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let missing = bin(&["cluster", "--input", "nope.csv"], d);
    assert_eq!(missing.status.code(), Some(3));

    std::fs::write(
        d.join("bad.csv"),
        "lat,lon,depth,bleach,par\n20.0,-157.0,5.0,140.0,10.0\n",
    )
    .unwrap();
    let bad = bin(&["ingest", "--input", "bad.csv"], d);
    assert_eq!(bad.status.code(), Some(4));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("bleach"), "{msg}");

    let skipped = bin(&["ingest", "--input", "bad.csv", "--skip-bad-rows"], d);
    assert_eq!(
        skipped.status.code(),
        Some(4),
        "all rows dropped leaves an empty dataset"
    );

    std::fs::write(d.join("cfg.json"), r#"{"synthetic": {}, "render": {"n_days": 0}}"#).unwrap();
    let cfg = bin(&["pipeline", "--config", "cfg.json"], d);
    assert_eq!(cfg.status.code(), Some(2));

    std::fs::write(d.join("none.json"), "{}").unwrap();
    let none = bin(&["pipeline", "--config", "none.json"], d);
    assert_eq!(none.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&none.stderr).contains("input_csv"));
}

#[test]
fn custom_schema_renames_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("obs.csv"),
        "Latitude,Longitude,Depth_m,Pct_Bleached,PAR\n20.1,-157.2,4.0,10,30\n20.2,-157.1,6.5,55,12\n",
    )
    .unwrap();
    std::fs::write(
        d.join("schema.json"),
        r#"{"lat":"Latitude","lon":"Longitude","depth":"Depth_m","bleach":"Pct_Bleached","par":"PAR"}"#,
    )
    .unwrap();
    ok(&bin(
        &[
            "ingest",
            "--input",
            "obs.csv",
            "--schema",
            "schema.json",
            "--out-dir",
            "o",
        ],
        d,
    ));
    let text = std::fs::read_to_string(d.join("o/observations.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    let missing = bin(&["ingest", "--input", "obs.csv"], d);
    assert_eq!(missing.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("lat"));
}
