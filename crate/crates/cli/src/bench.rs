use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use romp_core::codec::{compress, compress_lossy, romp_decode, romp_decode_image};
use romp_core::jpeg::{entropy_decode, parse_jpeg};
use romp_core::metrics::{compression_ratio, min_block_ssim, psnr, reconstruct_pixels};
use romp_core::threshold::ThresholdParams;
use romp_core::{ContextTableSet, Error};
use serde::Serialize;

use crate::output::{finite, percent, Output, Report};
use crate::{default_threads, jpeg_files, load_tables, read, CmdResult, Failure, TablesArg};

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub tables: TablesArg,
    /// Directory of JPEG files to measure.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Segments and threads per file.
    #[arg(long, default_value_t = default_threads())]
    pub threads: usize,
    /// Also measure thresholded output and its quality.
    #[arg(long)]
    pub lossy: bool,
    #[arg(long, default_value_t = 2.0, requires = "lossy")]
    pub rate_threshold: f64,
    #[arg(long, default_value_t = 0.4, requires = "lossy")]
    pub perceptual_threshold: f64,
}

#[derive(Serialize)]
struct FileRow {
    file: String,
    status: String,
    jpeg_bytes: usize,
    romp_bytes: Option<usize>,
    ratio: Option<f64>,
    encode_ms: Option<f64>,
    decode_ms: Option<f64>,
    lossy: Option<LossyRow>,
}

#[derive(Serialize)]
struct LossyRow {
    bytes: usize,
    ratio: f64,
    kept_lossless: bool,
    /// Luma PSNR against the input; null when identical.
    psnr_db: Option<f64>,
    min_block_ssim: f64,
    coefficients_zeroed: u64,
}

#[derive(Serialize, Default)]
struct Aggregate {
    files: usize,
    supported: usize,
    mean_ratio: Option<f64>,
    /// Ratio of summed sizes.
    total_ratio: Option<f64>,
    mean_encode_ms: Option<f64>,
    mean_decode_ms: Option<f64>,
    lossy_mean_ratio: Option<f64>,
    lossy_mean_psnr_db: Option<f64>,
    lossy_min_block_ssim: Option<f64>,
}

#[derive(Serialize)]
struct BenchReport {
    threads: usize,
    files: Vec<FileRow>,
    aggregate: Aggregate,
}

impl Report for BenchReport {
    fn text(&self) -> String {
        let lossy = self.files.iter().any(|f| f.lossy.is_some());
        let mut s = format!("{:<28} {:>10} {:>10} {:>8} {:>9} {:>9}", "file", "jpeg", "romp", "ratio", "enc ms", "dec ms");
        if lossy {
            s += &format!(" {:>10} {:>8} {:>8} {:>8}", "lossy", "ratio", "psnr", "min ssim");
        }
        s.push('\n');
        let opt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        for f in &self.files {
            s += &format!(
                "{:<28} {:>10} {:>10} {:>8} {:>9} {:>9}",
                f.file,
                f.jpeg_bytes,
                f.romp_bytes.map_or(f.status.clone(), |b| b.to_string()),
                f.ratio.map_or("-".into(), percent),
                opt(f.encode_ms, 1),
                opt(f.decode_ms, 1),
            );
            if let Some(l) = &f.lossy {
                s += &format!(
                    " {:>10} {:>8} {:>8} {:>8.4}",
                    l.bytes,
                    percent(l.ratio),
                    l.psnr_db.map_or("inf".into(), |p| format!("{p:.2}")),
                    l.min_block_ssim
                );
            }
            s.push('\n');
        }
        let a = &self.aggregate;
        s += &format!(
            "\n{} of {} files supported; mean ratio {}, total ratio {}, mean encode {} ms, mean decode {} ms\n",
            a.supported,
            a.files,
            a.mean_ratio.map_or("-".into(), percent),
            a.total_ratio.map_or("-".into(), percent),
            opt(a.mean_encode_ms, 1),
            opt(a.mean_decode_ms, 1),
        );
        if lossy {
            s += &format!(
                "thresholded: mean ratio {}, mean luma psnr {} dB, min block ssim {}\n",
                a.lossy_mean_ratio.map_or("-".into(), percent),
                opt(a.lossy_mean_psnr_db, 2),
                opt(a.lossy_min_block_ssim, 4),
            );
        }
        s
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn lossy_row(jpeg: &[u8], tables: &ContextTableSet, threads: usize, params: &ThresholdParams) -> Result<LossyRow, Error> {
    let outcome = compress_lossy(jpeg, tables, threads, params)?;
    let file = parse_jpeg(jpeg)?;
    let original = reconstruct_pixels(&entropy_decode(&file)?, &file)?;
    let (f2, img2) = romp_decode_image(&outcome.container, tables, threads)?;
    let restored = reconstruct_pixels(&img2, &f2)?;
    let (w, h) = (file.width as usize, file.height as usize);
    let luma_psnr = psnr(&original[0].crop(w, h), &restored[0].crop(w, h))?;
    let mut ssim = 1.0f64;
    for (a, b) in original.iter().zip(&restored) {
        ssim = ssim.min(min_block_ssim(a, b)?);
    }
    let bytes = outcome.container.encoded_len();
    Ok(LossyRow {
        bytes,
        ratio: compression_ratio(jpeg.len() as u64, bytes as u64)?,
        kept_lossless: outcome.kept_lossless,
        psnr_db: finite(luma_psnr),
        min_block_ssim: ssim,
        coefficients_zeroed: if outcome.kept_lossless { 0 } else { outcome.report.total.zeroed },
    })
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

pub fn run(args: &BenchArgs, out: &Output) -> CmdResult {
    let tables = load_tables(&args.tables.tables)?;
    let files = jpeg_files(&args.corpus)?;
    if files.is_empty() {
        return Err(Failure::usage(format!("no .jpg files in {}", args.corpus.display())));
    }
    let threads = args.threads.max(1);
    let params = ThresholdParams { rate_threshold: args.rate_threshold, perceptual_threshold: args.perceptual_threshold };
    params.validate()?;

    let mut rows = Vec::new();
    for path in &files {
        let jpeg = read(path)?;
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        out.note(format!("bench {name}"));
        let mut row = FileRow {
            file: name,
            status: "ok".into(),
            jpeg_bytes: jpeg.len(),
            romp_bytes: None,
            ratio: None,
            encode_ms: None,
            decode_ms: None,
            lossy: None,
        };
        let t = Instant::now();
        let container = match compress(&jpeg, &tables, threads) {
            Ok(c) => c,
            Err(e) => {
                row.status = if matches!(e, Error::UnsupportedMode(_)) { "unsupported" } else { "error" }.into();
                out.note(format!("  {e}"));
                rows.push(row);
                continue;
            }
        };
        row.encode_ms = Some(ms(t));
        let t = Instant::now();
        let restored = romp_decode(&container, &tables, threads)?;
        row.decode_ms = Some(ms(t));
        if restored != jpeg {
            row.status = "mismatch".into();
        }
        let bytes = container.encoded_len();
        row.romp_bytes = Some(bytes);
        row.ratio = Some(compression_ratio(jpeg.len() as u64, bytes as u64)?);
        if args.lossy {
            row.lossy = Some(lossy_row(&jpeg, &tables, threads, &params)?);
        }
        rows.push(row);
    }

    let ok: Vec<&FileRow> = rows.iter().filter(|r| r.romp_bytes.is_some()).collect();
    let sum_in: usize = ok.iter().map(|r| r.jpeg_bytes).sum();
    let sum_out: usize = ok.iter().filter_map(|r| r.romp_bytes).sum();
    let lossy: Vec<&LossyRow> = ok.iter().filter_map(|r| r.lossy.as_ref()).collect();
    let aggregate = Aggregate {
        files: rows.len(),
        supported: ok.len(),
        mean_ratio: mean(ok.iter().filter_map(|r| r.ratio)),
        total_ratio: (sum_in > 0).then(|| 1.0 - sum_out as f64 / sum_in as f64),
        mean_encode_ms: mean(ok.iter().filter_map(|r| r.encode_ms)),
        mean_decode_ms: mean(ok.iter().filter_map(|r| r.decode_ms)),
        lossy_mean_ratio: mean(lossy.iter().map(|l| l.ratio)),
        lossy_mean_psnr_db: mean(lossy.iter().filter_map(|l| l.psnr_db)),
        lossy_min_block_ssim: lossy.iter().map(|l| l.min_block_ssim).reduce(f64::min),
    };
    let mismatched = rows.iter().filter(|r| r.status == "mismatch").count();
    out.emit("bench", &BenchReport { threads, files: rows, aggregate })?;
    if mismatched > 0 {
        return Err(Failure::new(crate::exit::VERIFICATION, format!("{mismatched} files did not round-trip")));
    }
    Ok(())
}
