use romp_core::jpeg::{entropy_decode, entropy_encode, entropy_encode_parallel, parse_jpeg};
use romp_core::Error;
use std::path::PathBuf;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn jpegs(sub: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "jpg"))
        .collect();
    v.sort();
    v
}

#[test]
fn corpus_reserializes_byte_identically() {
    for path in jpegs("photos") {
        let bytes = std::fs::read(&path).unwrap();
        let file = parse_jpeg(&bytes).unwrap();
        assert_eq!(file.to_bytes(), bytes, "{}", path.display());
        let img = entropy_decode(&file).unwrap();
        assert_eq!(entropy_encode(&img, &file).unwrap(), bytes, "{}", path.display());
    }
}

#[test]
fn restart_markers_and_custom_tables_roundtrip() {
    for name in ["restart.jpg", "optimized.jpg", "large_2048x1536.jpg"] {
        let bytes = std::fs::read(corpus_dir().join("extra").join(name)).unwrap();
        let file = parse_jpeg(&bytes).unwrap();
        let img = entropy_decode(&file).unwrap();
        assert_eq!(entropy_encode(&img, &file).unwrap(), bytes, "{name}");
    }
    let file = parse_jpeg(&std::fs::read(corpus_dir().join("extra/restart.jpg")).unwrap()).unwrap();
    assert!(file.restart_interval > 0);
}

#[test]
fn parallel_reencoding_is_identical() {
    let extra = ["restart.jpg", "optimized.jpg", "large_2048x1536.jpg"].map(|n| corpus_dir().join("extra").join(n));
    for path in jpegs("photos").into_iter().take(3).chain(extra) {
        let bytes = std::fs::read(&path).unwrap();
        let file = parse_jpeg(&bytes).unwrap();
        let img = entropy_decode(&file).unwrap();
        for threads in [2, 3, 4, 7] {
            assert_eq!(entropy_encode_parallel(&img, &file, threads).unwrap(), bytes, "{} x{threads}", path.display());
        }
    }
}

#[test]
fn progressive_is_unsupported() {
    let bytes = std::fs::read(corpus_dir().join("extra/progressive.jpg")).unwrap();
    assert!(matches!(parse_jpeg(&bytes), Err(Error::UnsupportedMode(_))));
}

#[test]
fn truncated_file_is_malformed() {
    let bytes = std::fs::read(corpus_dir().join("photos/camera.jpg")).unwrap();
    for cut in [1usize, 3, 100, 400, bytes.len() / 2, bytes.len() - 2] {
        let r = parse_jpeg(&bytes[..cut]).and_then(|f| entropy_decode(&f).map(|_| ()));
        assert!(matches!(r, Err(Error::MalformedStream(_))), "cut at {cut}: {r:?}");
    }
}
