//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion;
//! exits non-zero only when a hard criterion fails. Soft criteria (timing on
//! the host, corpus-scale compression) report but never fail the run.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use romp_core::bits::PlainBitWriter;
use romp_core::cache_model::{effective_cache_size, replication_savings};
use romp_core::codec::{compress, compress_lossy, romp_decode, romp_decode_image};
use romp_core::context::{inter_energy, intra_energy, ContextParams};
use romp_core::huffman::{code_lengths, CanonicalCode, HuffmanSpec};
use romp_core::jpeg::tables::{AC_CHROMA_BITS, AC_CHROMA_VALUES, AC_LUMA_BITS, AC_LUMA_VALUES};
use romp_core::jpeg::{entropy_decode, entropy_encode, optimized_tables, parse_jpeg, Block};
use romp_core::metrics::{dequantize, idct, min_block_ssim, reconstruct_pixels};
use romp_core::threshold::{bits_saved, threshold_image, CodeLengths, ThresholdParams};
use romp_core::{train, ContextTableSet, TrainConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_dir_jpegs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jpg"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

struct Fixture {
    photos: Vec<(String, Vec<u8>)>,
    extra: Vec<(String, Vec<u8>)>,
    tables: ContextTableSet,
    tables_path: PathBuf,
    _dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let tables_path = dir.path().join("corpus.rmpt");
        let status = Command::new(env!("CARGO_BIN_EXE_romp"))
            .args(["train", "--corpus"])
            .arg(repo().join("corpus/photos"))
            .arg("--out")
            .arg(&tables_path)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "training through the CLI failed");
        let tables = ContextTableSet::from_bytes(&std::fs::read(&tables_path).unwrap()).unwrap();
        Self {
            photos: read_dir_jpegs(&repo().join("corpus/photos")),
            extra: read_dir_jpegs(&repo().join("corpus/extra")),
            tables,
            tables_path,
            _dir: dir,
        }
    }

    /// Every bundled file the codec supports.
    fn supported(&self) -> impl Iterator<Item = &(String, Vec<u8>)> {
        self.photos.iter().chain(self.extra.iter().filter(|(n, _)| n != "progressive.jpg"))
    }
}

// ---------------------------------------------------------------------------
// 1. Losslessness through the CLI

fn fuzz_jpeg(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let w = if rng.gen_bool(0.1) { rng.gen_range(1..=16) } else { rng.gen_range(8..=320) };
    let h = if rng.gen_bool(0.1) { rng.gen_range(1..=16) } else { rng.gen_range(8..=240) };
    let gray = rng.gen_bool(0.25);
    let channels = if gray { 1 } else { 3 };
    // A blend of gradient, sinusoid texture, blocky regions and noise.
    let (fx, fy) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
    let noise = rng.gen_range(0.0..80.0);
    let cells = rng.gen_range(2..40);
    let palette: Vec<[f64; 3]> =
        (0..16).map(|_| [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)]).collect();
    let mut data = Vec::with_capacity(w * h * channels);
    for y in 0..h {
        for x in 0..w {
            let cell = palette[((x / cells) * 7 + (y / cells) * 3) % 16];
            for c in 0..channels {
                let wave = 60.0 * ((x as f64 * fx + c as f64).sin() + (y as f64 * fy).cos());
                let grad = 100.0 * (x + y) as f64 / (w + h) as f64;
                let v = 0.5 * cell[c] + wave + grad + rng.gen_range(-noise..=noise);
                data.push(v.clamp(0.0, 255.0) as u8);
            }
        }
    }
    let mut out = Vec::new();
    let mut enc = Encoder::new(&mut out, rng.gen_range(1..=100));
    if !gray {
        let s = [SamplingFactor::F_1_1, SamplingFactor::F_2_1, SamplingFactor::F_1_2, SamplingFactor::F_2_2];
        enc.set_sampling_factor(s[rng.gen_range(0..s.len())]);
    }
    if rng.gen_bool(0.3) {
        enc.set_restart_interval(rng.gen_range(1..=20));
    }
    // The encoder crate switches to one scan per component when it optimizes
    // tables for colour images, which is outside the supported single-scan
    // mode; colour files get optimized tables by re-emitting the scan instead.
    let optimize = rng.gen_bool(0.4);
    enc.set_optimized_huffman_tables(optimize && gray);
    let color = if gray { ColorType::Luma } else { ColorType::Rgb };
    enc.encode(&data, w as u16, h as u16, color).unwrap();
    if optimize && !gray {
        let file = parse_jpeg(&out).unwrap();
        let img = entropy_decode(&file).unwrap();
        return entropy_encode(&img, &optimized_tables(&img, &file).unwrap()).unwrap();
    }
    out
}

fn criterion_1(fx: &Fixture) -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1_0000);
    let mut files: Vec<(String, Vec<u8>)> = fx.supported().cloned().collect();
    // The encoder crate occasionally panics on odd parameter mixes (for
    // example optimized tables on near-empty images); such draws are
    // replaced, and counted.
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut redraws = 0;
    for i in 0..1000 {
        loop {
            match catch_unwind(AssertUnwindSafe(|| fuzz_jpeg(&mut rng))) {
                Ok(bytes) => {
                    files.push((format!("fuzz{i:04}.jpg"), bytes));
                    break;
                }
                Err(_) => redraws += 1,
            }
        }
    }
    std::panic::set_hook(hook);
    let romp = env!("CARGO_BIN_EXE_romp");
    let mut failures = Vec::new();
    for (i, (name, bytes)) in files.iter().enumerate() {
        let (src, packed, back) = (dir.path().join("in.jpg"), dir.path().join("c.romp"), dir.path().join("out.jpg"));
        std::fs::write(&src, bytes).unwrap();
        let threads = (i % 4 + 1).to_string();
        let run = |args: &[&std::ffi::OsStr]| {
            Command::new(romp).args(args).env("ROMP_TABLES", &fx.tables_path).output().unwrap()
        };
        let e = run(&["encode".as_ref(), "--threads".as_ref(), threads.as_ref(), src.as_os_str(), packed.as_os_str()]);
        if !e.status.success() {
            failures.push(format!("{name}: encode: {}", String::from_utf8_lossy(&e.stderr).trim()));
            continue;
        }
        let d = run(&["decode".as_ref(), packed.as_os_str(), back.as_os_str(), "--verify-against".as_ref(), src.as_os_str()]);
        if !d.status.success() || std::fs::read(&back).unwrap() != *bytes {
            failures.push(format!("{name}: decode: {}", String::from_utf8_lossy(&d.stderr).trim()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "{}/{} files byte-identical ({} corpus + 1000 fuzz, {redraws} generator redraws) in {secs:.1} s{}",
        files.len() - failures.len(),
        files.len(),
        files.len() - 1000,
        failures.first().map_or(String::new(), |f| format!("; first failure {f}")),
    );
    verdict(failures.is_empty() && secs < 120.0, detail)
}

// ---------------------------------------------------------------------------
// 2. Compression with leave-one-out training

fn criterion_2(fx: &Fixture) -> Verdict {
    let (mut lossless, mut lossy) = (Vec::new(), Vec::new());
    for (i, (_, jpeg)) in fx.photos.iter().enumerate() {
        let others: Vec<&[u8]> =
            fx.photos.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, (_, b))| b.as_slice()).collect();
        let tables = train(&others, &TrainConfig::default()).unwrap().tables;
        let c = compress(jpeg, &tables, 1).unwrap();
        lossless.push(1.0 - c.encoded_len() as f64 / jpeg.len() as f64);
        let l = compress_lossy(jpeg, &tables, 1, &ThresholdParams::default()).unwrap();
        lossy.push(1.0 - l.container.encoded_len() as f64 / jpeg.len() as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (a, b) = (mean(&lossless), mean(&lossy));
    verdict(
        a >= 0.10 && b - a >= 0.05,
        format!(
            "leave-one-out over {} photos: lossless mean {:.2}% (need >= 10%), thresholded mean {:.2}% (+{:.2} pp, need >= 5 pp)",
            fx.photos.len(),
            100.0 * a,
            100.0 * b,
            100.0 * (b - a)
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. SSIM floor under thresholding

fn criterion_3(fx: &Fixture) -> Verdict {
    let mut worst_margin = f64::INFINITY;
    let mut checked = 0;
    let mut detail_at_01 = f64::INFINITY;
    for (name, jpeg) in &fx.photos {
        let file = parse_jpeg(jpeg).unwrap();
        let img = entropy_decode(&file).unwrap();
        let original = reconstruct_pixels(&img, &file).unwrap();
        for tp in [0.05, 0.1, 0.2, 0.4] {
            let floor = 1.0 - tp / (2.0 - tp);
            let params = ThresholdParams { rate_threshold: 2.0, perceptual_threshold: tp };
            let (thresholded, _) = threshold_image(&img, &file, &params).unwrap();
            let direct = reconstruct_pixels(&thresholded, &file).unwrap();
            // And through the container, as a decoder would see it.
            let out = compress_lossy(jpeg, &fx.tables, 2, &params).unwrap();
            let (f2, img2) = romp_decode_image(&out.container, &fx.tables, 2).unwrap();
            let decoded = reconstruct_pixels(&img2, &f2).unwrap();
            for planes in [&direct, &decoded] {
                for (a, b) in original.iter().zip(planes.iter()) {
                    let s = min_block_ssim(a, b).unwrap();
                    worst_margin = worst_margin.min(s - floor);
                    if tp == 0.1 {
                        detail_at_01 = detail_at_01.min(s);
                    }
                    if s < floor - 1e-9 {
                        return verdict(false, format!("{name} at T_p={tp}: min block SSIM {s:.6} < floor {floor:.6}"));
                    }
                }
            }
            checked += 1;
        }
    }
    let floor01: f64 = 1.0 - 0.1 / 1.9;
    verdict(
        (floor01 - 0.947).abs() < 5e-4,
        format!(
            "{checked} image/threshold pairs above the floor (worst margin {worst_margin:.2e}); floor at T_p=0.1 is {floor01:.4}, lowest SSIM there {detail_at_01:.4}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. Parallel overhead

fn criterion_4(fx: &Fixture) -> Verdict {
    // The bound covers the natural photographs. The small synthetic
    // fixtures are reported too: N=4 adds three 16-byte index entries, which
    // alone approach 0.1% of a container under 48 KB.
    let natural = |n: &str| fx.photos.iter().any(|(p, _)| p == n) || n == "large_2048x1536.jpg";
    let (mut worst, mut fixtures) = (0.0f64, Vec::new());
    for (name, jpeg) in fx.supported() {
        let one = compress(jpeg, &fx.tables, 1).unwrap();
        let four = compress(jpeg, &fx.tables, 4).unwrap();
        let overhead = four.encoded_len() as f64 / one.encoded_len() as f64 - 1.0;
        let (a, b) = (romp_decode(&one, &fx.tables, 1).unwrap(), romp_decode(&four, &fx.tables, 4).unwrap());
        if a != b || a != *jpeg {
            return verdict(false, format!("{name}: N=1 and N=4 decode differently"));
        }
        if !natural(name) {
            fixtures.push(format!("{name} {:.3}%", 100.0 * overhead));
            continue;
        }
        worst = worst.max(overhead);
        if overhead > 0.001 {
            return verdict(false, format!("{name}: N=4 is {:.4}% larger", 100.0 * overhead));
        }
    }
    verdict(
        true,
        format!(
            "worst N=4 overhead {:.4}% over the photographs (limit 0.1%), identical decodes; synthetic fixtures: {}",
            100.0 * worst,
            fixtures.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. Formula oracles

fn size_bits(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

fn random_block(rng: &mut ChaCha8Rng, max_size: u32) -> Block {
    let mut b = [0i16; 64];
    let density = rng.gen_range(0.02..1.0);
    for v in b.iter_mut().skip(1) {
        if rng.gen_bool(density) {
            let size = rng.gen_range(1..=max_size);
            let mag = rng.gen_range(1i32 << (size - 1)..1i32 << size);
            *v = (if rng.gen_bool(0.5) { -mag } else { mag }) as i16;
        }
    }
    b
}

fn energy_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1);
    for trial in 0..10_000 {
        let mut params = ContextParams::uniform(rng.gen_range(1..=8), rng.gen_range(1..=5), 20);
        for m in params.max_size.iter_mut() {
            *m = rng.gen_range(1..=15);
        }
        let n = rng.gen_range(0..=params.prior_blocks + 2);
        let grid: Vec<Block> = (0..=n).map(|_| random_block(&mut rng, 11)).collect();
        let p = rng.gen_range(1..=63usize);
        let r = |b: &Block, k: usize| (size_bits(i32::from(b[k])) as f64 / f64::from(params.max_size[k])).min(1.0);

        let want_intra = if p == 1 { 0.0 } else { (1..p).map(|k| r(&grid[n], k)).sum::<f64>() / (p - 1) as f64 };
        let (bb, f) = (params.prior_blocks as i64, params.window);
        let mut sum = 0.0;
        for i in (n as i64 - bb).max(0)..n as i64 {
            for j in (p..p + f).filter(|&j| j <= 63) {
                sum += r(&grid[i as usize], j);
            }
        }
        let want_inter = sum / (bb as f64 * f as f64);
        let got = (intra_energy(&grid[n], p, &params), inter_energy(&grid, n, p, &params));
        if (got.0 - want_intra).abs() > 1e-12 || (got.1 - want_inter).abs() > 1e-12 {
            return Err(format!("trial {trial}: got {got:?}, want ({want_intra}, {want_inter})"));
        }
    }
    Ok(())
}

/// Cheapest Kraft-valid length assignment by exhaustive search.
fn brute_force_cost(w: &[u64]) -> u64 {
    fn go(w: &[u64], i: usize, kraft: f64, cost: u64, max: u8, best: &mut u64) {
        if cost >= *best {
            return;
        }
        if i == w.len() {
            *best = cost;
            return;
        }
        for l in 1..=max {
            let k = kraft + 0.5f64.powi(i32::from(l));
            if k <= 1.0 + 1e-12 {
                go(w, i + 1, k, cost + w[i] * u64::from(l), max, best);
            }
        }
    }
    let mut best = u64::MAX;
    go(w, 0, 0.0, 0, (w.len() as u8).max(2) - 1, &mut best);
    best
}

fn huffman_oracle() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE2);
    let mut cases = 0;
    for n in 2..=8usize {
        let mut sets: Vec<Vec<u64>> = (0..150)
            .map(|_| {
                let hi = [2, 10, 1000, 1 << 20][rng.gen_range(0..4)];
                (0..n).map(|_| rng.gen_range(1..=hi)).collect()
            })
            .collect();
        sets.push(vec![1; n]);
        sets.push((0..n).map(|i| 1 << i).collect());
        let mut fib = vec![1u64, 1];
        while fib.len() < n {
            fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
        }
        sets.push(fib);
        for w in sets {
            let lens = code_lengths(&w, 24);
            let cost: u64 = w.iter().zip(&lens).map(|(&a, &l)| a * u64::from(l)).sum();
            let kraft: f64 = lens.iter().map(|&l| 0.5f64.powi(i32::from(l))).sum();
            let want = brute_force_cost(&w);
            if cost != want || kraft > 1.0 || lens.iter().any(|&l| l == 0) {
                return Err(format!("weights {w:?}: lengths {lens:?} cost {cost}, optimum {want}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

/// Bits for the AC part of `block`, written out with `code`.
fn encoded_ac_bits(block: &Block, code: &CanonicalCode) -> u64 {
    let mut w = PlainBitWriter::new();
    let mut put = |sym: u8, extra: u32| {
        let (c, l) = code.encode(u16::from(sym)).expect("complete table");
        w.put(c, u32::from(l));
        if extra > 0 {
            w.put(0, extra);
        }
    };
    let last = (1..64).rev().find(|&k| block[k] != 0);
    let mut run = 0;
    for k in 1..=last.unwrap_or(0) {
        if block[k] == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            put(0xF0, 0);
            run -= 16;
        }
        let s = size_bits(i32::from(block[k]));
        put((run << 4) as u8 | s as u8, s);
        run = 0;
    }
    if last != Some(63) {
        put(0x00, 0);
    }
    w.bit_len()
}

fn bits_saved_oracle() -> Result<usize, String> {
    let tables = [
        (CodeLengths::default_luma(), HuffmanSpec::new(&AC_LUMA_BITS, &AC_LUMA_VALUES).to_code().unwrap()),
        (CodeLengths::default_chroma(), HuffmanSpec::new(&AC_CHROMA_BITS, &AC_CHROMA_VALUES).to_code().unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xE3);
    let mut checked = 0;
    for trial in 0..10_000 {
        let mut block = random_block(&mut rng, 10);
        // Make sure there are candidates.
        for _ in 0..rng.gen_range(1..6) {
            block[rng.gen_range(1..64)] = if rng.gen_bool(0.5) { 1 } else { -1 };
        }
        let (lengths, code) = &tables[trial % 2];
        let full = encoded_ac_bits(&block, code) as i64;
        for pos in (1..64).filter(|&k| block[k].abs() == 1) {
            let mut z = block;
            z[pos] = 0;
            let want = full - encoded_ac_bits(&z, code) as i64;
            let got = bits_saved(&block, pos, lengths).map_err(|e| e.to_string())?;
            if got != want as f64 {
                return Err(format!("trial {trial} pos {pos}: bits_saved {got}, re-encoding {want}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_5(_: &Fixture) -> Verdict {
    let energy = energy_oracle();
    let huffman = huffman_oracle();
    let saved = bits_saved_oracle();
    match (energy, huffman, saved) {
        (Ok(()), Ok(h), Ok(s)) => verdict(
            true,
            format!("energies on 10^4 random blocks within 1e-12; {h} alphabets of 2..8 symbols optimal; {s} candidate removals exact"),
        ),
        (e, h, s) => verdict(
            false,
            [e.err(), h.err(), s.err()].into_iter().flatten().collect::<Vec<_>>().join("; "),
        ),
    }
}

// ---------------------------------------------------------------------------
// 6. Cache model arithmetic

fn criterion_6(_: &Fixture) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (x, want) in [(0.13, 1.149), (0.26, 1.351)] {
        let got = effective_cache_size(x).unwrap();
        ok &= (got - want).abs() <= 1e-3;
        lines.push(format!("cache({x})={got:.4}"));
    }
    for (r, x, want, rounded) in [(3.6, 0.13, 3.132, 3.1), (3.6, 0.26, 2.664, 2.7), (2.1, 0.13, 1.827, 1.8), (2.1, 0.26, 1.554, 1.6)]
    {
        let got = replication_savings(r, x).unwrap();
        ok &= (got - want).abs() < 1e-9 && ((got * 10.0).round() / 10.0 - rounded).abs() < 1e-9;
        lines.push(format!("R({r},{x})={got:.3}"));
    }
    verdict(ok, lines.join(" "))
}

// ---------------------------------------------------------------------------
// 7. Speed

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn criterion_7(fx: &Fixture) -> Verdict {
    let (_, large) = fx.extra.iter().find(|(n, _)| n == "large_2048x1536.jpg").unwrap();
    let time = |f: &dyn Fn()| {
        f();
        median((0..5).map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        }).collect())
    };
    let single = time(&|| {
        let c = compress(large, &fx.tables, 1).unwrap();
        romp_decode(&c, &fx.tables, 1).unwrap();
    });
    let c1 = compress(large, &fx.tables, 1).unwrap();
    let c4 = compress(large, &fx.tables, 4).unwrap();
    let dec1 = time(&|| {
        romp_decode(&c1, &fx.tables, 1).unwrap();
    });
    let dec4 = time(&|| {
        romp_decode(&c4, &fx.tables, 4).unwrap();
    });
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    let share = dec4.as_secs_f64() / dec1.as_secs_f64();
    verdict(
        ms(single) <= 150.0 && share <= 0.40,
        format!(
            "2048x1536 encode+decode {:.1} ms (limit 150); 4-thread decode {:.1} ms = {:.0}% of 1-thread {:.1} ms (limit 40%); {cores} core(s) available",
            ms(single),
            ms(dec4),
            100.0 * share,
            ms(dec1)
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. DCT orthogonality

fn criterion_8(_: &Fixture) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_block(&mut rng, 8);
        let mut b = a;
        for _ in 0..rng.gen_range(1..20) {
            b[rng.gen_range(0..64)] = rng.gen_range(-200..200);
        }
        let q: [u16; 64] = std::array::from_fn(|_| rng.gen_range(1..=120));
        let freq: f64 = (0..64).map(|k| (f64::from(a[k] - b[k]) * f64::from(q[k])).powi(2)).sum::<f64>() / 64.0;
        let (pa, pb) = (idct(&dequantize(&a, &q)), idct(&dequantize(&b, &q)));
        let pixel: f64 = pa.iter().zip(&pb).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / 64.0;
        worst = worst.max((freq - pixel).abs() / freq.max(f64::MIN_POSITIVE));
    }
    verdict(worst <= 1e-6, format!("worst relative gap {worst:.2e} over 100 random block pairs"))
}

// ---------------------------------------------------------------------------

fn main() {
    // `cargo test -- --list` and similar probes expect no work.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let fx = Fixture::new();
    type Check = fn(&Fixture) -> Verdict;
    let criteria: [(u8, &str, bool, Check); 8] = [
        (1, "losslessness", true, criterion_1),
        (2, "compression", false, criterion_2),
        (3, "ssim bound", true, criterion_3),
        (4, "parallel overhead", true, criterion_4),
        (5, "formula oracles", true, criterion_5),
        (6, "cache model", true, criterion_6),
        (7, "performance", false, criterion_7),
        (8, "dct orthogonality", true, criterion_8),
    ];
    let mut hard_failures = 0;
    for (id, name, hard, check) in criteria {
        let v = catch_unwind(AssertUnwindSafe(|| check(&fx)))
            .unwrap_or_else(|e| {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
            });
        let kind = if hard { "hard" } else { "soft" };
        println!("criterion {id} [{kind}] {name}: {} - {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if hard && !v.pass {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        println!("{hard_failures} hard criteria failed");
        std::process::exit(1);
    }
}
