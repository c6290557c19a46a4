//! Back-of-envelope model of what a smaller photo format buys a
//! storage/cache stack: bigger effective caches, shifted request shares,
//! less backend and edge traffic, lower replication cost, and the latency
//! mixture across edge, origin and backend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default latency horizon in 1 ms buckets.
pub const DEFAULT_HORIZON_MS: usize = 5000;

/// `1 / (1 − x)`: how much more a cache of fixed bytes holds after
/// compression by ratio `x`.
pub fn effective_cache_size(x: f64) -> Result<f64> {
    check_ratio(x)?;
    Ok(1.0 / (1.0 - x))
}

fn check_ratio(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidParams(format!("compression ratio {x} outside [0, 1)")));
    }
    Ok(())
}

fn check_rate(r: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParams(format!("{name} {r} outside [0, 1]")));
    }
    Ok(())
}

/// Fractions of requests served by edge, origin and backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RequestShares {
    pub edge: f64,
    pub origin: f64,
    pub backend: f64,
}

/// `S_e = H_e`, `S_o = (1 − H_e)·H_o`, `S_b = (1 − H_e)(1 − H_o)`.
pub fn request_shares(h_edge: f64, h_origin: f64) -> Result<RequestShares> {
    check_rate(h_edge, "edge hit rate")?;
    check_rate(h_origin, "origin hit rate")?;
    let miss = 1.0 - h_edge;
    Ok(RequestShares { edge: h_edge, origin: miss * h_origin, backend: miss * (1.0 - h_origin) })
}

/// `R · (1 − x)`.
pub fn replication_savings(r: f64, x: f64) -> Result<f64> {
    check_ratio(x)?;
    if !(r > 0.0) {
        return Err(Error::InvalidParams("replication factor must be positive".into()));
    }
    Ok(r * (1.0 - x))
}

/// Piecewise-linear, non-decreasing map from relative cache size to hit
/// rate. Clamped outside the given points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitCurve {
    pub points: Vec<(f64, f64)>,
}

impl HitCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParams("hit curve needs at least one point".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[1].1 < w[0].1 || w[1].0 == w[0].0) {
            return Err(Error::InvalidParams("hit curve must be non-decreasing with distinct sizes".into()));
        }
        if points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(Error::InvalidParams("hit rates must lie in [0, 1]".into()));
        }
        Ok(Self { points })
    }

    pub fn hit_rate(&self, size: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|q| q.0 <= size);
        if i == 0 {
            return p[0].1;
        }
        if i == p.len() {
            return p[p.len() - 1].1;
        }
        let ((x0, y0), (x1, y1)) = (p[i - 1], p[i]);
        y0 + (y1 - y0) * (size - x0) / (x1 - x0)
    }
}

/// Probability mass per 1 ms bucket; the last bucket holds everything at or
/// beyond the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyHistogram {
    pub mass: Vec<f64>,
}

impl LatencyHistogram {
    /// From `(bucket_ms, probability)` pairs. Masses must sum to 1 ± 1e-9.
    pub fn from_points(points: &[(f64, f64)], horizon_ms: usize) -> Result<Self> {
        if horizon_ms == 0 {
            return Err(Error::InvalidParams("horizon must be at least 1 ms".into()));
        }
        let mut mass = vec![0.0; horizon_ms];
        for &(ms, p) in points {
            if !(ms >= 0.0) || !(p >= 0.0) {
                return Err(Error::InvalidParams(format!("bad histogram entry ({ms}, {p})")));
            }
            let b = (ms.floor() as usize).min(horizon_ms - 1);
            mass[b] += p;
        }
        let h = Self { mass };
        h.check_total()?;
        Ok(h)
    }

    pub fn point(ms: usize, horizon_ms: usize) -> Self {
        let mut mass = vec![0.0; horizon_ms];
        mass[ms.min(horizon_ms - 1)] = 1.0;
        Self { mass }
    }

    fn check_total(&self) -> Result<()> {
        let total: f64 = self.mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("histogram sums to {total}, not 1")));
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.mass.len()
    }

    /// Moves all mass `shift_ms` later, piling overflow into the last bucket.
    pub fn shifted(&self, shift_ms: usize) -> Self {
        let n = self.mass.len();
        let mut mass = vec![0.0; n];
        for (i, &m) in self.mass.iter().enumerate() {
            mass[(i + shift_ms).min(n - 1)] += m;
        }
        Self { mass }
    }

    /// Smallest bucket whose cumulative mass reaches `q` (0 < q ≤ 1).
    pub fn percentile(&self, q: f64) -> usize {
        let mut acc = 0.0;
        for (i, &m) in self.mass.iter().enumerate() {
            acc += m;
            if acc >= q - 1e-12 {
                return i;
            }
        }
        self.mass.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(i, &m)| i as f64 * m).sum()
    }
}

/// Where decompression happens, and so which layers pay `decode_shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecodeAt {
    /// Caches hold the compressed form; every response is decoded.
    #[default]
    Edge,
    /// Only backend reads are decoded.
    Backend,
}

/// `L = S_e·L_e + S_o·L_o + S_b·L_b`, after shifting the layers that decode.
pub fn combined_latency(
    shares: &RequestShares,
    edge: &LatencyHistogram,
    origin: &LatencyHistogram,
    backend: &LatencyHistogram,
    decode_shift_ms: usize,
    decode_at: DecodeAt,
) -> Result<LatencyHistogram> {
    let n = edge.horizon();
    if origin.horizon() != n || backend.horizon() != n {
        return Err(Error::DimensionMismatch("latency histograms use different horizons".into()));
    }
    let (se, so) = match decode_at {
        DecodeAt::Edge => (decode_shift_ms, decode_shift_ms),
        DecodeAt::Backend => (0, 0),
    };
    let (e, o, b) = (edge.shifted(se), origin.shifted(so), backend.shifted(decode_shift_ms));
    let mass = (0..n).map(|i| shares.edge * e.mass[i] + shares.origin * o.mass[i] + shares.backend * b.mass[i]).collect();
    Ok(LatencyHistogram { mass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthReport {
    /// `1 − S_b_after / S_b_before`.
    pub backend_requests: f64,
    /// Reduction in edge misses alone: `1 − (1 − H_e_after)/(1 − H_e_before)`.
    pub edge_miss_reduction: f64,
    /// Reduction from smaller objects alone: `x`.
    pub edge_size_reduction: f64,
    /// Both effects: `1 − (1 − miss reduction)(1 − x)`.
    pub bytes_to_edge: f64,
    /// Bytes to clients shrink only with lossy output: `lossy_x`.
    pub external: f64,
}

pub fn bandwidth_reductions(before: &RequestShares, after: &RequestShares, x: f64, lossy_x: f64) -> Result<BandwidthReport> {
    check_ratio(x)?;
    check_ratio(lossy_x)?;
    let ratio = |a: f64, b: f64| if b > 0.0 { 1.0 - a / b } else { 0.0 };
    let edge_miss_reduction = ratio(1.0 - after.edge, 1.0 - before.edge);
    Ok(BandwidthReport {
        backend_requests: ratio(after.backend, before.backend),
        edge_miss_reduction,
        edge_size_reduction: x,
        bytes_to_edge: 1.0 - (1.0 - edge_miss_reduction) * (1.0 - x),
        external: lossy_x,
    })
}
