use std::path::{Path, PathBuf};

use clap::Args;
use romp_core::cache_model::{
    bandwidth_reductions, combined_latency, effective_cache_size, replication_savings, request_shares,
    BandwidthReport, DecodeAt, HitCurve, LatencyHistogram, RequestShares, DEFAULT_HORIZON_MS,
};
use serde::{Deserialize, Serialize};

use crate::output::{percent, Output, Report};
use crate::{read, CmdResult, Failure};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Model description (TOML).
    #[arg(long)]
    pub config: PathBuf,
}

/// `model.toml`. Relative latency file paths resolve against the config's
/// directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Edge cache hit rate before deployment.
    #[serde(alias = "H_e")]
    pub edge_hit_rate: f64,
    /// Origin cache hit rate before deployment.
    #[serde(alias = "H_o")]
    pub origin_hit_rate: f64,
    /// Lossless compression ratio.
    pub x: f64,
    /// Ratio delivered to clients; nonzero only with lossy output.
    #[serde(default)]
    pub lossy_x: f64,
    /// Effective replication factors of the storage tiers.
    #[serde(default, alias = "R")]
    pub replication: Vec<f64>,
    pub hit_curve: Option<HitCurves>,
    pub latency: Option<LatencyFiles>,
    #[serde(default)]
    pub decode_shift_ms: usize,
    #[serde(default)]
    pub decode_at: DecodeAt,
    #[serde(default = "default_horizon")]
    pub horizon_ms: usize,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON_MS
}

/// `[relative cache size, hit rate]` points per layer.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HitCurves {
    pub edge: Option<Vec<[f64; 2]>>,
    pub origin: Option<Vec<[f64; 2]>>,
}

/// CSV files of `bucket_ms,probability` rows.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyFiles {
    pub edge: PathBuf,
    pub origin: PathBuf,
    pub backend: PathBuf,
}

#[derive(Serialize)]
struct LatencySummary {
    p50_ms: usize,
    p90_ms: usize,
    p99_ms: usize,
    mean_ms: f64,
}

impl LatencySummary {
    fn of(h: &LatencyHistogram) -> Self {
        Self { p50_ms: h.percentile(0.5), p90_ms: h.percentile(0.9), p99_ms: h.percentile(0.99), mean_ms: h.mean() }
    }
}

#[derive(Serialize)]
struct Replication {
    before: f64,
    after: f64,
}

#[derive(Serialize)]
struct Estimate {
    x: f64,
    effective_cache_size: f64,
    edge_hit_rate: [f64; 2],
    origin_hit_rate: [f64; 2],
    shares_before: RequestShares,
    shares_after: RequestShares,
    reductions: BandwidthReport,
    replication: Vec<Replication>,
    decode_at: DecodeAt,
    decode_shift_ms: usize,
    latency_before: Option<LatencySummary>,
    latency_after: Option<LatencySummary>,
}

impl Report for Estimate {
    fn text(&self) -> String {
        let r = &self.reductions;
        let mut s = format!(
            "compression ratio                 {}\n\
             effective cache size              {:.3}x\n\
             edge hit rate                     {} -> {}\n\
             origin hit rate                   {} -> {}\n\
             request shares edge/origin/backend {:.4}/{:.4}/{:.4} -> {:.4}/{:.4}/{:.4}\n\
             reduction in backend requests     {}\n\
             reduction in bytes sent to edge   {} (misses {}, object size {})\n\
             reduction in external bandwidth   {}\n",
            percent(self.x),
            self.effective_cache_size,
            percent(self.edge_hit_rate[0]),
            percent(self.edge_hit_rate[1]),
            percent(self.origin_hit_rate[0]),
            percent(self.origin_hit_rate[1]),
            self.shares_before.edge,
            self.shares_before.origin,
            self.shares_before.backend,
            self.shares_after.edge,
            self.shares_after.origin,
            self.shares_after.backend,
            percent(r.backend_requests),
            percent(r.bytes_to_edge),
            percent(r.edge_miss_reduction),
            percent(r.edge_size_reduction),
            percent(r.external),
        );
        for rep in &self.replication {
            s += &format!("replication factor                {:.3}x -> {:.3}x\n", rep.before, rep.after);
        }
        if let (Some(b), Some(a)) = (&self.latency_before, &self.latency_after) {
            s += &format!(
                "latency p50/p90/p99 (ms)          {}/{}/{} -> {}/{}/{}  (mean {:.1} -> {:.1}, decode +{} ms at {})\n",
                b.p50_ms,
                b.p90_ms,
                b.p99_ms,
                a.p50_ms,
                a.p90_ms,
                a.p99_ms,
                b.mean_ms,
                a.mean_ms,
                self.decode_shift_ms,
                match self.decode_at {
                    DecodeAt::Edge => "edge",
                    DecodeAt::Backend => "backend",
                },
            );
        }
        s
    }
}

fn read_histogram(path: &Path, horizon: usize) -> Result<LatencyHistogram, Failure> {
    let bytes = read(path)?;
    let bad = |m: String| Failure::usage(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(bytes.as_slice());
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let parsed = (rec.get(0).map(str::parse::<f64>), rec.get(1).map(str::parse::<f64>));
        match parsed {
            (Some(Ok(ms)), Some(Ok(p))) if rec.len() == 2 => points.push((ms, p)),
            // A header line is allowed.
            _ if i == 0 => {}
            _ => return Err(bad(format!("line {}: expected bucket_ms,probability", i + 1))),
        }
    }
    LatencyHistogram::from_points(&points, horizon).map_err(|e| bad(e.to_string()))
}

fn curve(points: &Option<Vec<[f64; 2]>>) -> Result<Option<HitCurve>, Failure> {
    match points {
        None => Ok(None),
        Some(p) => Ok(Some(HitCurve::new(p.iter().map(|&[s, h]| (s, h)).collect())?)),
    }
}

/// The hit rate after the cache effectively grows to `size`: the base rate
/// plus the curve's uplift from size 1 to `size`.
fn uplifted(base: f64, curve: &Option<HitCurve>, size: f64) -> f64 {
    curve.as_ref().map_or(base, |c| (base + c.hit_rate(size) - c.hit_rate(1.0)).clamp(0.0, 1.0))
}

fn estimate(cfg: &ModelConfig, base_dir: &Path) -> Result<Estimate, Failure> {
    let size = effective_cache_size(cfg.x)?;
    let before = request_shares(cfg.edge_hit_rate, cfg.origin_hit_rate)?;
    let (edge_curve, origin_curve) = match &cfg.hit_curve {
        Some(c) => (curve(&c.edge)?, curve(&c.origin)?),
        None => (None, None),
    };
    let he = uplifted(cfg.edge_hit_rate, &edge_curve, size);
    let ho = uplifted(cfg.origin_hit_rate, &origin_curve, size);
    let after = request_shares(he, ho)?;
    let reductions = bandwidth_reductions(&before, &after, cfg.x, cfg.lossy_x)?;
    let replication = cfg
        .replication
        .iter()
        .map(|&r| Ok(Replication { before: r, after: replication_savings(r, cfg.x)? }))
        .collect::<Result<Vec<_>, Failure>>()?;
    let (latency_before, latency_after) = match &cfg.latency {
        None => (None, None),
        Some(files) => {
            let load = |p: &PathBuf| read_histogram(&base_dir.join(p), cfg.horizon_ms);
            let (e, o, b) = (load(&files.edge)?, load(&files.origin)?, load(&files.backend)?);
            let old = combined_latency(&before, &e, &o, &b, 0, cfg.decode_at)?;
            let new = combined_latency(&after, &e, &o, &b, cfg.decode_shift_ms, cfg.decode_at)?;
            (Some(LatencySummary::of(&old)), Some(LatencySummary::of(&new)))
        }
    };
    Ok(Estimate {
        x: cfg.x,
        effective_cache_size: size,
        edge_hit_rate: [cfg.edge_hit_rate, he],
        origin_hit_rate: [cfg.origin_hit_rate, ho],
        shares_before: before,
        shares_after: after,
        reductions,
        replication,
        decode_at: cfg.decode_at,
        decode_shift_ms: cfg.decode_shift_ms,
        latency_before,
        latency_after,
    })
}

pub fn run(args: &EstimateArgs, out: &Output) -> CmdResult {
    let text = String::from_utf8(read(&args.config)?)
        .map_err(|_| Failure::usage(format!("{}: not UTF-8", args.config.display())))?;
    let cfg: ModelConfig =
        toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    out.emit("estimate", &estimate(&cfg, base)?)
}
