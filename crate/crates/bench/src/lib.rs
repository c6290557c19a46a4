//! Fixtures shared by the benchmarks: the bundled corpus and a table set
//! trained on it.

use std::path::PathBuf;

use romp_core::{train, ContextTableSet, TrainConfig};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// `(name, bytes)` for every photo in the bundled corpus.
pub fn photos() -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(corpus_dir().join("photos"))
        .expect("corpus/photos")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jpg"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

pub fn large_photo() -> Vec<u8> {
    std::fs::read(corpus_dir().join("extra/large_2048x1536.jpg")).expect("large corpus image")
}

pub fn trained_tables(photos: &[(String, Vec<u8>)]) -> ContextTableSet {
    let files: Vec<&[u8]> = photos.iter().map(|(_, b)| b.as_slice()).collect();
    train(&files, &TrainConfig::default()).expect("corpus trains").tables
}
