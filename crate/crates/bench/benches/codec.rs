use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use romp_bench::{large_photo, photos, trained_tables};
use romp_core::codec::{compress, compress_lossy, romp_decode};
use romp_core::jpeg::{entropy_decode, parse_jpeg};
use romp_core::threshold::ThresholdParams;

fn codec(c: &mut Criterion) {
    let photos = photos();
    let tables = trained_tables(&photos);
    let large = large_photo();

    let mut g = c.benchmark_group("large");
    g.sample_size(20);
    g.throughput(Throughput::Bytes(large.len() as u64));
    g.bench_function("jpeg_decode", |b| {
        b.iter(|| entropy_decode(&parse_jpeg(&large).unwrap()).unwrap());
    });
    for threads in [1, 4] {
        let container = compress(&large, &tables, threads).unwrap();
        g.bench_with_input(BenchmarkId::new("encode", threads), &threads, |b, &t| {
            b.iter(|| compress(&large, &tables, t).unwrap());
        });
        g.bench_with_input(BenchmarkId::new("decode", threads), &threads, |b, &t| {
            b.iter(|| romp_decode(&container, &tables, t).unwrap());
        });
    }
    g.bench_function("encode_lossy", |b| {
        b.iter(|| compress_lossy(&large, &tables, 1, &ThresholdParams::default()).unwrap());
    });
    g.finish();

    let mut g = c.benchmark_group("corpus");
    g.sample_size(10);
    let (name, bytes) = &photos[0];
    g.throughput(Throughput::Bytes(bytes.len() as u64));
    g.bench_function(BenchmarkId::new("roundtrip", name), |b| {
        b.iter(|| romp_decode(&compress(bytes, &tables, 1).unwrap(), &tables, 1).unwrap());
    });
    g.finish();
}

criterion_group!(benches, codec);
criterion_main!(benches);
