use criterion::{criterion_group, criterion_main, Criterion};
use romp_bench::photos;
use romp_core::context::{BlockHistory, ContextParams};
use romp_core::huffman::code_lengths;
use romp_core::jpeg::{entropy_decode, parse_jpeg};
use romp_core::{train, TrainConfig};

fn model(c: &mut Criterion) {
    let photos = photos();
    let files: Vec<&[u8]> = photos.iter().map(|(_, b)| b.as_slice()).collect();

    let mut g = c.benchmark_group("training");
    g.sample_size(10);
    g.bench_function("train_corpus", |b| b.iter(|| train(&files, &TrainConfig::default()).unwrap()));
    g.finish();

    let weights: Vec<u64> = (0..257u64).map(|i| (i * 7919) % 1000 + 1).collect();
    c.bench_function("code_lengths_257", |b| b.iter(|| code_lengths(&weights, 24)));

    let file = parse_jpeg(&photos[0].1).unwrap();
    let img = entropy_decode(&file).unwrap();
    let params = ContextParams::uniform(5, 3, 20);
    let w = params.weights();
    c.bench_function("history_push_component", |b| {
        b.iter(|| {
            let mut h = BlockHistory::new(params.prior_blocks);
            let mut acc = 0u64;
            for blk in &img.components[0].blocks {
                acc += h.window_sum(10, params.window);
                h.push(&romp_core::context::block_ratios(blk, &w));
            }
            acc
        })
    });
}

criterion_group!(benches, model);
criterion_main!(benches);
