use std::path::PathBuf;

use clap::Args;
use romp_core::codec::{compress, compress_lossy, romp_decode, RompContainer};
use romp_core::metrics::compression_ratio;
use romp_core::threshold::{ThresholdParams, ThresholdReport};
use serde::Serialize;

use crate::output::{percent, Output, Report};
use crate::{default_threads, exit, load_tables, read, write, CmdResult, Failure, TablesArg};

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub tables: TablesArg,
    /// Independently coded segments (and encoder threads).
    #[arg(long, default_value_t = default_threads())]
    pub threads: usize,
    /// Zero expensive ±1 coefficients before coding.
    #[arg(long)]
    pub lossy: bool,
    /// Minimum bits a zeroed coefficient must save.
    #[arg(long, default_value_t = 2.0, requires = "lossy")]
    pub rate_threshold: f64,
    /// Largest fraction of a block's nonzero coefficients that may be zeroed.
    #[arg(long, default_value_t = 0.4, requires = "lossy")]
    pub perceptual_threshold: f64,
    /// Write the thresholding report here.
    #[arg(long, requires = "lossy")]
    pub report: Option<PathBuf>,
    /// Decode the result and check it reproduces the input exactly.
    #[arg(long, conflicts_with = "lossy")]
    pub verify_bitexact: bool,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub tables: TablesArg,
    /// Decoder threads.
    #[arg(long, default_value_t = default_threads())]
    pub threads: usize,
    /// Compare the restored file with this one; exit 4 on any difference.
    #[arg(long)]
    pub verify_against: Option<PathBuf>,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Serialize)]
struct EncodeSummary {
    input: String,
    output: String,
    input_bytes: usize,
    output_bytes: usize,
    ratio: f64,
    segments: usize,
    lossy: bool,
    kept_lossless: bool,
    verified: bool,
}

impl Report for EncodeSummary {
    fn text(&self) -> String {
        let mode = match (self.lossy, self.kept_lossless) {
            (false, _) => "lossless",
            (true, false) => "thresholded",
            (true, true) => "lossless (thresholding did not help)",
        };
        format!(
            "{} -> {}: {} -> {} bytes ({} smaller, {} segments, {mode}{})\n",
            self.input,
            self.output,
            self.input_bytes,
            self.output_bytes,
            percent(self.ratio),
            self.segments,
            if self.verified { ", verified" } else { "" },
        )
    }
}

impl Report for ThresholdReport {
    fn text(&self) -> String {
        let mut s = format!(
            "rate threshold {}  perceptual threshold {}  ssim floor {:.4}\n",
            self.params.rate_threshold, self.params.perceptual_threshold, self.ssim_floor
        );
        s += "component      blocks     nonzero  candidates      zeroed  guard-veto  max-frac\n";
        let rows = self.components.iter().enumerate().map(|(i, c)| (i.to_string(), c));
        for (name, c) in rows.chain(std::iter::once(("total".to_string(), &self.total))) {
            s += &format!(
                "{name:<9} {:>10} {:>11} {:>11} {:>11} {:>11} {:>9.3}\n",
                c.blocks, c.nonzero, c.candidates, c.zeroed, c.guard_rejections, c.max_fraction_zeroed
            );
        }
        s
    }
}

pub fn encode(args: &EncodeArgs, out: &Output) -> CmdResult {
    let tables = load_tables(&args.tables.tables)?;
    let jpeg = read(&args.input)?;
    let segments = args.threads.max(1);
    let (container, kept_lossless) = if args.lossy {
        let params =
            ThresholdParams { rate_threshold: args.rate_threshold, perceptual_threshold: args.perceptual_threshold };
        params.validate()?;
        let outcome = compress_lossy(&jpeg, &tables, segments, &params)?;
        if let Some(path) = &args.report {
            write(path, out.render("threshold-report", &outcome.report)?.as_bytes())?;
        }
        (outcome.container, outcome.kept_lossless)
    } else {
        (compress(&jpeg, &tables, segments)?, false)
    };
    let bytes = container.to_bytes();
    if args.verify_bitexact && romp_decode(&container, &tables, segments)? != jpeg {
        return Err(Failure::new(exit::VERIFICATION, "verification failed: decoded file differs from the input"));
    }
    write(&args.output, &bytes)?;
    let summary = EncodeSummary {
        input: args.input.display().to_string(),
        output: args.output.display().to_string(),
        input_bytes: jpeg.len(),
        output_bytes: bytes.len(),
        ratio: compression_ratio(jpeg.len() as u64, bytes.len() as u64)?,
        segments: container.segments.len(),
        lossy: args.lossy,
        kept_lossless,
        verified: args.verify_bitexact,
    };
    out.emit("encode", &summary)
}

#[derive(Serialize)]
struct DecodeSummary {
    input: String,
    output: String,
    bytes: usize,
    thresholded: bool,
    verified: Option<bool>,
}

impl Report for DecodeSummary {
    fn text(&self) -> String {
        let verified = match self.verified {
            Some(true) => ", matches reference",
            _ => "",
        };
        format!("{} -> {}: {} bytes{verified}\n", self.input, self.output, self.bytes)
    }
}

pub fn decode(args: &DecodeArgs, out: &Output) -> CmdResult {
    let tables = load_tables(&args.tables.tables)?;
    let container = RompContainer::from_bytes(&read(&args.input)?)?;
    let jpeg = romp_decode(&container, &tables, args.threads.max(1))?;
    write(&args.output, &jpeg)?;
    let verified = match &args.verify_against {
        None => None,
        Some(reference) => {
            let want = read(reference)?;
            if want != jpeg {
                let at = want.iter().zip(&jpeg).position(|(a, b)| a != b).unwrap_or(want.len().min(jpeg.len()));
                return Err(Failure::new(
                    exit::VERIFICATION,
                    format!("verification failed: output differs from {} at byte {at}", reference.display()),
                ));
            }
            Some(true)
        }
    };
    let summary = DecodeSummary {
        input: args.input.display().to_string(),
        output: args.output.display().to_string(),
        bytes: jpeg.len(),
        thresholded: container.is_thresholded(),
        verified,
    };
    out.emit("decode", &summary)
}
