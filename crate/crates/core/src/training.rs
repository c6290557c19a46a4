//! Learning a [`ContextTableSet`] from a corpus of baseline JPEGs.
//!
//! Training makes three sweeps over the corpus, since each quantity depends
//! on the previous one: per-position size maxima, then energy samples for
//! the bucket boundaries, then symbol counts per context.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::{block_ratios, for_each_ac_symbol, BlockHistory, ContextParams};
use crate::error::{Error, Result};
use crate::jpeg::runsize::EOB;
use crate::jpeg::{entropy_decode, parse_jpeg, size_of, Block, QuantizedImage, ScanLayout};
use crate::table_set::{
    class_of, code_from_weights, default_dc_code, ClassTables, ContextTableSet, CLASS_COUNT, ESCAPE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub window: usize,
    pub prior_blocks: usize,
    pub buckets: usize,
    /// Energy samples kept per class for quantile fitting.
    pub reservoir: usize,
    pub seed: u64,
    /// Pseudo-observations each context borrows from its position's overall
    /// distribution; 0 builds every table from its own counts alone.
    pub smoothing: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            window: crate::context::DEFAULT_WINDOW,
            prior_blocks: crate::context::DEFAULT_PRIOR_BLOCKS,
            buckets: crate::context::DEFAULT_BUCKETS,
            reservoir: 1 << 20,
            seed: 0,
            smoothing: 0,
        }
    }
}

/// Pseudo-count given to the escape symbol in every table.
pub const ESCAPE_COUNT: u64 = 1;

/// Calls `f(component, block)` for every block in coding order.
pub fn for_each_coded_block(img: &QuantizedImage, layout: &ScanLayout, mut f: impl FnMut(usize, &Block)) {
    for m in 0..layout.mcu_count() {
        layout.for_each_block(m, |ci, idx| f(ci, &img.components[ci].blocks[idx]));
    }
}

/// Largest SIZE seen at each zigzag position, per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeMaxima(pub [[u8; 64]; CLASS_COUNT]);

impl Default for SizeMaxima {
    fn default() -> Self {
        Self([[0; 64]; CLASS_COUNT])
    }
}

impl SizeMaxima {
    pub fn observe(&mut self, img: &QuantizedImage, layout: &ScanLayout) {
        for_each_coded_block(img, layout, |ci, b| {
            let m = &mut self.0[class_of(ci)];
            for i in 1..64 {
                m[i] = m[i].max(size_of(i32::from(b[i])));
            }
        });
    }

    /// Normalizers for one class; positions never seen get 1.
    pub fn normalizers(&self, class: usize) -> [u8; 64] {
        let mut out = self.0[class];
        out.iter_mut().for_each(|m| *m = (*m).clamp(1, 15));
        out
    }
}

/// Uniform reservoir of `(intra, inter)` energy pairs.
#[derive(Debug, Clone)]
pub struct EnergyReservoir {
    pub intra: Vec<f64>,
    pub inter: Vec<f64>,
    capacity: usize,
    seen: u64,
}

impl EnergyReservoir {
    pub fn new(capacity: usize) -> Self {
        Self { intra: Vec::new(), inter: Vec::new(), capacity, seen: 0 }
    }

    pub fn push(&mut self, intra: f64, inter: f64, rng: &mut impl Rng) {
        self.seen += 1;
        if self.intra.len() < self.capacity {
            self.intra.push(intra);
            self.inter.push(inter);
        } else {
            let j = rng.gen_range(0..self.seen);
            if (j as usize) < self.capacity {
                self.intra[j as usize] = intra;
                self.inter[j as usize] = inter;
            }
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }
}

/// Bucket boundaries at the `k/U` empirical quantiles of `samples`.
///
/// Repeated quantile values are nudged up by one ulp at a time to keep the
/// boundaries strictly ascending (and back down if that overshoots 1).
pub fn fit_buckets(samples: &[f64], buckets: usize) -> Result<Vec<f64>> {
    let n = samples.len();
    if buckets < 2 || n < buckets {
        return Err(Error::InsufficientSamples(format!("{n} samples for {buckets} buckets")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    if sorted[0] == sorted[n - 1] {
        return Err(Error::InsufficientSamples("all samples identical".into()));
    }
    let mut bounds: Vec<f64> = (1..buckets).map(|k| sorted[k * n / buckets].clamp(0.0, 1.0)).collect();
    for k in 1..bounds.len() {
        if bounds[k] <= bounds[k - 1] {
            bounds[k] = bounds[k - 1].next_up();
        }
    }
    let last = bounds.len() - 1;
    if bounds[last] > 1.0 {
        bounds[last] = 1.0;
        for k in (0..last).rev() {
            if bounds[k] >= bounds[k + 1] {
                bounds[k] = bounds[k + 1].next_down();
            }
        }
        if bounds[0] < 0.0 {
            return Err(Error::InsufficientSamples("cannot separate boundaries".into()));
        }
    }
    Ok(bounds)
}

/// Symbol counts for one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassHistogram {
    /// Per context index, runsize counts (allocated on first use).
    pub ac: Vec<Option<Box<[u64; 256]>>>,
    pub dc: [u64; 16],
}

impl ClassHistogram {
    pub fn new(slots: usize) -> Self {
        Self { ac: vec![None; slots], dc: [0; 16] }
    }

    #[inline]
    fn bump(&mut self, context: usize, symbol: u8) {
        self.ac[context].get_or_insert_with(|| Box::new([0; 256]))[usize::from(symbol)] += 1;
    }

    pub fn total_ac(&self) -> u64 {
        self.ac.iter().flatten().map(|c| c.iter().sum::<u64>()).sum()
    }
}

/// Runsize counts keyed by context, and DC size-category counts, per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolHistogram {
    pub classes: Vec<ClassHistogram>,
}

impl SymbolHistogram {
    pub fn new(params: &[ContextParams; CLASS_COUNT]) -> Self {
        Self { classes: params.iter().map(|p| ClassHistogram::new(p.table_slots())).collect() }
    }

    /// Adds every symbol of `img`, contexted with `params`.
    pub fn accumulate(&mut self, img: &QuantizedImage, layout: &ScanLayout, params: &[ContextParams; CLASS_COUNT]) {
        let weights = [params[0].weights(), params[1].weights()];
        let mut hist: Vec<BlockHistory> =
            (0..img.components.len()).map(|ci| BlockHistory::new(params[class_of(ci)].prior_blocks)).collect();
        let mut pred = vec![0i32; img.components.len()];
        for_each_coded_block(img, layout, |ci, block| {
            let class = class_of(ci);
            let p = &params[class];
            let h = &mut self.classes[class];
            let diff = i32::from(block[0]) - pred[ci];
            pred[ci] = i32::from(block[0]);
            h.dc[usize::from(size_of(diff).min(15))] += 1;
            let buckets = p.buckets;
            for_each_ac_symbol(block, p, &weights[class], &hist[ci], |_, ctx, _, _, sym, _| {
                h.bump(ctx.index(buckets), sym);
            });
            hist[ci].push(&block_ratios(block, &weights[class]));
        });
    }

    /// Adds another histogram's counts (the merge is commutative).
    pub fn merge(&mut self, other: &SymbolHistogram) {
        for (a, b) in self.classes.iter_mut().zip(&other.classes) {
            for (x, y) in a.dc.iter_mut().zip(&b.dc) {
                *x += y;
            }
            for (slot, theirs) in a.ac.iter_mut().zip(&b.ac) {
                if let Some(t) = theirs {
                    let mine = slot.get_or_insert_with(|| Box::new([0; 256]));
                    for (x, y) in mine.iter_mut().zip(t.iter()) {
                        *x += y;
                    }
                }
            }
        }
    }
}

/// Table for an observed symbol distribution: observed symbols, EOB (at
/// least pseudo-count 1) and the escape.
pub fn table_for_counts(counts: &[u64]) -> crate::huffman::CanonicalCode {
    let mut syms: Vec<(u16, u64)> = counts
        .iter()
        .enumerate()
        .filter(|&(s, &c)| c > 0 || s == usize::from(EOB))
        .map(|(s, &c)| (s as u16, c.max(1)))
        .collect();
    syms.push((ESCAPE, ESCAPE_COUNT));
    code_from_weights(&syms)
}

fn position_totals(contexts: &[Option<Box<[u64; 256]>>]) -> [u64; 256] {
    let mut out = [0u64; 256];
    for c in contexts.iter().flatten() {
        for (a, b) in out.iter_mut().zip(c.iter()) {
            *a += b;
        }
    }
    out
}

/// Weight units per observation when mixing in the position prior.
const SMOOTHING_SCALE: u64 = 1024;

/// Like [`table_for_counts`], with `smoothing` pseudo-observations
/// distributed in proportion to `prior`. Symbols seen only in the prior get
/// their own (long) codes instead of going through the escape.
pub fn smoothed_table(counts: &[u64], prior: &[u64; 256], smoothing: u32) -> crate::huffman::CanonicalCode {
    let total: u64 = prior.iter().sum();
    if smoothing == 0 || total == 0 {
        return table_for_counts(counts);
    }
    let mass = u128::from(smoothing) * u128::from(SMOOTHING_SCALE);
    let mut syms: Vec<(u16, u64)> = (0..256usize)
        .filter_map(|s| {
            let borrowed = (mass * u128::from(prior[s]) + u128::from(total / 2)) / u128::from(total);
            let w = counts[s] * SMOOTHING_SCALE + borrowed as u64;
            (w > 0 || s == usize::from(EOB)).then(|| (s as u16, w.max(1)))
        })
        .collect();
    syms.push((ESCAPE, ESCAPE_COUNT * SMOOTHING_SCALE));
    code_from_weights(&syms)
}

/// Builds the table set from finished histograms.
///
/// With `smoothing > 0` each context borrows that many pseudo-observations,
/// spread like the counts of all contexts at the same position; see
/// [`smoothed_table`].
pub fn build_tables(hist: &SymbolHistogram, params: &[ContextParams; CLASS_COUNT], smoothing: u32) -> ContextTableSet {
    let classes: Vec<ClassTables> = (0..CLASS_COUNT)
        .map(|class| {
            let h = &hist.classes[class];
            let mut t = ClassTables::untrained(params[class].clone(), class);
            if h.dc.iter().any(|&c| c > 0) {
                t.dc = table_for_counts(&h.dc);
            } else {
                t.dc = default_dc_code(class);
            }
            let uu = params[class].buckets * params[class].buckets;
            let mut parent = [0u64; 256];
            for (ctx, counts) in h.ac.iter().enumerate() {
                if ctx % uu == 0 {
                    parent = position_totals(&h.ac[ctx..ctx + uu]);
                }
                if let Some(c) = counts {
                    if c.iter().any(|&n| n > 0) {
                        t.codes.push(smoothed_table(&c[..], &parent, smoothing));
                        t.slots[ctx] = (t.codes.len() - 1) as u32;
                    }
                }
            }
            t
        })
        .collect();
    let [luma, chroma]: [ClassTables; CLASS_COUNT] = classes.try_into().expect("two classes");
    ContextTableSet::new([luma, chroma])
}

/// Outcome of a training run.
#[derive(Debug)]
pub struct TrainReport {
    pub tables: ContextTableSet,
    pub histogram: SymbolHistogram,
    /// Files that trained.
    pub used: usize,
    /// Indices of files skipped, with the reason.
    pub skipped: Vec<(usize, Error)>,
    /// Classes whose bucket boundaries fell back to an even split.
    pub uniform_classes: Vec<usize>,
}

fn decode(bytes: &[u8]) -> Result<(QuantizedImage, ScanLayout)> {
    let file = parse_jpeg(bytes)?;
    let img = entropy_decode(&file)?;
    Ok((img, file.layout()))
}

/// Trains a table set on in-memory JPEG files. Files that fail to parse or
/// decode are skipped and listed in the report.
pub fn train(corpus: &[&[u8]], config: &TrainConfig) -> Result<TrainReport> {
    let uniform = ContextParams::uniform(config.window, config.prior_blocks, config.buckets);
    uniform.validate()?;

    let mut maxima = SizeMaxima::default();
    let mut skipped = Vec::new();
    let mut good = Vec::new();
    for (i, bytes) in corpus.iter().enumerate() {
        match decode(bytes) {
            Ok((img, layout)) => {
                maxima.observe(&img, &layout);
                good.push(i);
            }
            Err(e) => skipped.push((i, e)),
        }
    }

    let mut params: [ContextParams; CLASS_COUNT] = std::array::from_fn(|class| {
        let mut p = uniform.clone();
        p.max_size = maxima.normalizers(class);
        p
    });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reservoirs: Vec<EnergyReservoir> = (0..CLASS_COUNT).map(|_| EnergyReservoir::new(config.reservoir)).collect();
    for &i in &good {
        let (img, layout) = decode(corpus[i])?;
        let weights = [params[0].weights(), params[1].weights()];
        let mut hist: Vec<BlockHistory> =
            (0..img.components.len()).map(|ci| BlockHistory::new(params[class_of(ci)].prior_blocks)).collect();
        for_each_coded_block(&img, &layout, |ci, block| {
            let class = class_of(ci);
            let res = &mut reservoirs[class];
            for_each_ac_symbol(block, &params[class], &weights[class], &hist[ci], |_, _, ie, ee, _, _| {
                res.push(ie, ee, &mut rng);
            });
            hist[ci].push(&block_ratios(block, &weights[class]));
        });
    }

    let mut uniform_classes = Vec::new();
    for (class, res) in reservoirs.iter().enumerate() {
        match (fit_buckets(&res.intra, config.buckets), fit_buckets(&res.inter, config.buckets)) {
            (Ok(a), Ok(b)) => {
                params[class].intra_bounds = a;
                params[class].inter_bounds = b;
            }
            _ => uniform_classes.push(class),
        }
    }

    let mut histogram = SymbolHistogram::new(&params);
    for &i in &good {
        let (img, layout) = decode(corpus[i])?;
        histogram.accumulate(&img, &layout, &params);
    }
    let tables = build_tables(&histogram, &params, config.smoothing);
    Ok(TrainReport { tables, histogram, used: good.len(), skipped, uniform_classes })
}
