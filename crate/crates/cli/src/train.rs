use std::path::PathBuf;

use clap::Args;
use romp_core::context::{DEFAULT_BUCKETS, DEFAULT_PRIOR_BLOCKS, DEFAULT_WINDOW};
use romp_core::{train, TrainConfig};
use serde::Serialize;

use crate::output::{Output, Report};
use crate::{jpeg_files, read, write, CmdResult, Failure};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of training JPEG files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output table set file.
    #[arg(long)]
    pub out: PathBuf,
    /// Energy buckets per axis.
    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    pub buckets: usize,
    /// Zigzag positions per prior block in the inter-block energy.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Prior blocks in the inter-block energy.
    #[arg(long, default_value_t = DEFAULT_PRIOR_BLOCKS)]
    pub prior_blocks: usize,
    /// Seed for the energy sample reservoir.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pseudo-counts borrowed from the per-position distribution (1/1024
    /// units); 0 trains every context on its own counts only.
    #[arg(long, default_value_t = 0)]
    pub smoothing: u32,
}

#[derive(Serialize)]
struct TrainSummary {
    out: String,
    set_id: String,
    bytes: usize,
    files_used: usize,
    files_skipped: Vec<Skipped>,
    trained_contexts: [usize; 2],
    uniform_bucket_classes: Vec<usize>,
}

#[derive(Serialize)]
struct Skipped {
    file: String,
    reason: String,
}

impl Report for TrainSummary {
    fn text(&self) -> String {
        let mut s = format!(
            "wrote {} ({} bytes)\nset id    {}\nfiles     {} used, {} skipped\ncontexts  {} luma, {} chroma\n",
            self.out,
            self.bytes,
            self.set_id,
            self.files_used,
            self.files_skipped.len(),
            self.trained_contexts[0],
            self.trained_contexts[1],
        );
        for k in &self.files_skipped {
            s += &format!("skipped   {}: {}\n", k.file, k.reason);
        }
        for c in &self.uniform_bucket_classes {
            s += &format!("warning   class {c} had too few samples; using even bucket boundaries\n");
        }
        s
    }
}

pub fn run(args: &TrainArgs, out: &Output) -> CmdResult {
    let files = jpeg_files(&args.corpus)?;
    if files.is_empty() {
        return Err(Failure::usage(format!("no .jpg files in {}", args.corpus.display())));
    }
    let data = files.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
    let corpus: Vec<&[u8]> = data.iter().map(Vec::as_slice).collect();
    let config = TrainConfig {
        window: args.window,
        prior_blocks: args.prior_blocks,
        buckets: args.buckets,
        seed: args.seed,
        smoothing: args.smoothing,
        ..TrainConfig::default()
    };
    out.note(format!("training on {} files", files.len()));
    let report = train(&corpus, &config)?;
    let bytes = report.tables.to_bytes();
    write(&args.out, &bytes)?;
    let summary = TrainSummary {
        out: args.out.display().to_string(),
        set_id: report.tables.set_id_hex(),
        bytes: bytes.len(),
        files_used: report.used,
        files_skipped: report
            .skipped
            .iter()
            .map(|(i, e)| Skipped { file: files[*i].display().to_string(), reason: e.to_string() })
            .collect(),
        trained_contexts: [report.tables.classes[0].trained_contexts(), report.tables.classes[1].trained_contexts()],
        uniform_bucket_classes: report.uniform_classes,
    };
    out.emit("train", &summary)
}
