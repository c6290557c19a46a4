use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn romp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_romp")).args(args).env_remove("ROMP_TABLES").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

/// A table set trained once for the whole test binary.
fn tables() -> &'static Path {
    static T: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &T.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tables.rmpt");
        let corpus = repo().join("corpus/photos");
        let o = romp(&["train", "--corpus", corpus.to_str().unwrap(), "--out", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (dir, path)
    })
    .1
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_decode_roundtrip_with_verification() {
    let dir = tempfile::tempdir().unwrap();
    let input = repo().join("corpus/extra/restart.jpg");
    let (c, j) = (dir.path().join("a.romp"), dir.path().join("a.jpg"));
    let o = romp(&["encode", "--tables", s(tables()), "--threads", "3", "--verify-bitexact", s(&input), s(&c)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = romp(&["decode", "--tables", s(tables()), s(&c), s(&j), "--verify-against", s(&input)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(&j).unwrap(), std::fs::read(&input).unwrap());

    // A different reference is a verification failure.
    let other = repo().join("corpus/photos/coffee.jpg");
    let o = romp(&["decode", "--tables", s(tables()), s(&c), s(&j), "--verify-against", s(&other)]);
    assert_eq!(code(&o), 4);
}

#[test]
fn tables_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = repo().join("corpus/photos/coins.jpg");
    let c = dir.path().join("c.romp");
    let o = Command::new(env!("CARGO_BIN_EXE_romp"))
        .args(["encode", s(&input), s(&c)])
        .env("ROMP_TABLES", tables())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(c.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.romp");

    let progressive = repo().join("corpus/extra/progressive.jpg");
    let o = romp(&["encode", "--tables", s(tables()), s(&progressive), s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unsupported mode"));

    let input = repo().join("corpus/photos/moon.jpg");
    assert_eq!(code(&romp(&["encode", "--tables", s(tables()), s(&input), s(&out)])), 0);
    let bytes = std::fs::read(&out).unwrap();
    let cut = dir.path().join("cut.romp");
    std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
    let o = romp(&["decode", "--tables", s(tables()), s(&cut), s(&dir.path().join("y.jpg"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let mut damaged = std::fs::read(tables()).unwrap();
    damaged[100] ^= 0x40;
    let bad_tables = dir.path().join("bad.rmpt");
    std::fs::write(&bad_tables, damaged).unwrap();
    assert_eq!(code(&romp(&["decode", "--tables", s(&bad_tables), s(&out), s(&dir.path().join("z.jpg"))])), 3);

    assert_eq!(code(&romp(&["encode", "--frobnicate"])), 1);
    assert_eq!(code(&romp(&["encode", "--tables", s(tables()), "--lossy", "--verify-bitexact", s(&input), s(&out)])), 1);
    assert_eq!(code(&romp(&["encode", "--tables", s(tables()), s(&dir.path().join("missing.jpg")), s(&out)])), 1);
    assert_eq!(code(&romp(&["--help"])), 0);
}

#[test]
fn lossy_encode_writes_report_and_decodes() {
    let dir = tempfile::tempdir().unwrap();
    let input = repo().join("corpus/photos/chelsea.jpg");
    let (c, j, r) = (dir.path().join("l.romp"), dir.path().join("l.jpg"), dir.path().join("r.json"));
    let o = romp(&[
        "--format", "json", "encode", "--tables", s(tables()), "--lossy", "--perceptual-threshold", "0.2",
        "--report", s(&r), s(&input), s(&c),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = json(&o);
    assert_eq!(summary["schema"], 1);
    assert!(summary["output_bytes"].as_u64().unwrap() < summary["input_bytes"].as_u64().unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert!((report["ssim_floor"].as_f64().unwrap() - (1.0 - 0.2 / 1.8)).abs() < 1e-12);
    assert!(report["total"]["zeroed"].as_u64().unwrap() > 0);

    let o = romp(&["decode", "--tables", s(tables()), s(&c), s(&j)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(jpeg_is_readable(&j));
}

fn jpeg_is_readable(p: &Path) -> bool {
    let bytes = std::fs::read(p).unwrap();
    romp_core::jpeg::parse_jpeg(&bytes).and_then(|f| romp_core::jpeg::entropy_decode(&f)).is_ok()
}

#[test]
fn bench_reports_aggregate_ratio() {
    let corpus = repo().join("corpus/extra");
    let o = romp(&["--format", "json", "bench", "--tables", s(tables()), "--corpus", s(&corpus), "--lossy"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert!(v["aggregate"]["mean_ratio"].as_f64().unwrap() > 0.0);
    let files = v["files"].as_array().unwrap();
    assert_eq!(files.len(), 4);
    let progressive = files.iter().find(|f| f["file"] == "progressive.jpg").unwrap();
    assert_eq!(progressive["status"], "unsupported");
    assert!(files.iter().filter(|f| f["status"] == "ok").all(|f| f["lossy"]["min_block_ssim"].as_f64().unwrap() >= 0.75));
}

#[test]
fn estimate_example_model() {
    let o = romp(&["--format", "json", "estimate", "--config", s(&repo().join("models/example.toml"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!((v["effective_cache_size"].as_f64().unwrap() - 1.149).abs() < 1e-3);
    assert!((v["replication"][0]["after"].as_f64().unwrap() - 3.132).abs() < 1e-12);
    assert_eq!(v["reductions"]["external"], 0.0);
    assert!(v["reductions"]["bytes_to_edge"].as_f64().unwrap() >= 0.13);
    let (b, a) = (&v["latency_before"], &v["latency_after"]);
    assert!(a["p50_ms"].as_u64() >= b["p50_ms"].as_u64());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "edge_hit_rate = 0.5\norigin_hit_rate = 0.5\nx = 0.1\nbogus = 1\n").unwrap();
    assert_eq!(code(&romp(&["estimate", "--config", s(&bad)])), 1);
}
