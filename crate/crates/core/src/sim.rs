//! Belief-propagation decoding over BPSK/AWGN with plain Monte Carlo and
//! mean-shift importance sampling.
//!
//! The all-zero codeword is sent as `+1`, so `y = 1 + sigma z` and the
//! channel LLR is `2 y / sigma^2`. Importance sampling moves the mean of the
//! target bits to `1 - s` and weights each frame by the likelihood ratio
//! `exp(sum_{i in T} (2 s (y_i - 1) + s^2) / (2 sigma^2))`.
//!
//! Every frame draws its noise from its own ChaCha stream, keyed by the
//! target index and the frame index, so results do not depend on how frames
//! are spread over threads.

use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::absorption::is_absorption_set;
use crate::de::Channel;
use crate::{Error, Result, TannerGraph};

/// Messages are clipped to this magnitude.
pub const LLR_CLIP: f64 = 50.0;
pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_STABILITY_WINDOW: usize = 5;
const BLOCK: u64 = 64;
const BLOCKS_PER_ROUND: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    #[default]
    SumProduct,
    MinSum,
}

/// Output of one decoding attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub decisions: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
    /// Bits decided as 1 after each iteration (only the most recent
    /// iterations if a limit was requested).
    pub trace: Vec<Vec<usize>>,
}

impl Decoded {
    pub fn errors(&self) -> usize {
        self.decisions.iter().filter(|&&d| d == 1).count()
    }
}

/// Flooding-schedule decoder over a fixed graph.
#[derive(Debug, Clone)]
pub struct Decoder<'g> {
    g: &'g TannerGraph,
    kind: DecoderKind,
    /// Edges are numbered check by check; `chk_ptr[c]..chk_ptr[c + 1]`.
    chk_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl<'g> Decoder<'g> {
    pub fn new(g: &'g TannerGraph, kind: DecoderKind) -> Self {
        let mut chk_ptr = Vec::with_capacity(g.n_checks() + 1);
        let mut edge_var = Vec::with_capacity(g.n_edges());
        let mut var_edges = vec![Vec::new(); g.n_vars()];
        chk_ptr.push(0);
        for c in 0..g.n_checks() {
            for &v in g.check_neighbors(c) {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            chk_ptr.push(edge_var.len());
        }
        Decoder {
            g,
            kind,
            chk_ptr,
            edge_var,
            var_edges,
        }
    }

    pub fn graph(&self) -> &TannerGraph {
        self.g
    }

    /// Decodes `llr`, keeping the last `trace_len` error snapshots.
    pub fn decode(&self, llr: &[f64], max_iters: usize, trace_len: usize) -> Decoded {
        assert_eq!(llr.len(), self.g.n_vars(), "one LLR per variable");
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| clip(llr[v])).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut decisions: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut trace = VecDeque::new();
        let mut scratch = Vec::new();
        if self.syndrome_ok(&decisions) {
            return Decoded {
                decisions,
                converged: true,
                iterations: 0,
                trace: Vec::new(),
            };
        }
        for it in 1..=max_iters {
            for c in 0..self.chk_ptr.len() - 1 {
                let r = self.chk_ptr[c]..self.chk_ptr[c + 1];
                match self.kind {
                    DecoderKind::SumProduct => {
                        tanh_rule(&v2c[r.clone()], &mut c2v[r], &mut scratch)
                    }
                    DecoderKind::MinSum => min_rule(&v2c[r.clone()], &mut c2v[r]),
                }
            }
            for (v, edges) in self.var_edges.iter().enumerate() {
                let total = llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                for &e in edges {
                    v2c[e] = clip(total - c2v[e]);
                }
                decisions[v] = u8::from(total < 0.0);
            }
            if trace_len > 0 {
                if trace.len() == trace_len {
                    trace.pop_front();
                }
                trace.push_back(ones(&decisions));
            }
            if self.syndrome_ok(&decisions) {
                return Decoded {
                    decisions,
                    converged: true,
                    iterations: it,
                    trace: trace.into(),
                };
            }
        }
        Decoded {
            decisions,
            converged: false,
            iterations: max_iters,
            trace: trace.into(),
        }
    }

    fn syndrome_ok(&self, x: &[u8]) -> bool {
        (0..self.chk_ptr.len() - 1).all(|c| {
            self.edge_var[self.chk_ptr[c]..self.chk_ptr[c + 1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ x[v])
                == 0
        })
    }
}

fn clip(x: f64) -> f64 {
    x.clamp(-LLR_CLIP, LLR_CLIP)
}

fn ones(x: &[u8]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(i, _)| i)
        .collect()
}

/// Extrinsic tanh products via prefix/suffix products, so a zero input
/// never needs to be divided out.
fn tanh_rule(input: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    let d = input.len();
    scratch.clear();
    scratch.extend(input.iter().map(|&m| (m / 2.0).tanh()));
    let mut prefix = 1.0;
    for i in 0..d {
        out[i] = prefix;
        prefix *= scratch[i];
    }
    let mut suffix = 1.0;
    for i in (0..d).rev() {
        let p = (out[i] * suffix).clamp(-1.0, 1.0);
        out[i] = clip(2.0 * p.atanh());
        suffix *= scratch[i];
    }
}

fn min_rule(input: &[f64], out: &mut [f64]) {
    let mut sign = 1.0;
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, 0);
    for (i, &m) in input.iter().enumerate() {
        if m < 0.0 {
            sign = -sign;
        }
        let a = m.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            arg = i;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (i, &m) in input.iter().enumerate() {
        let s = if m < 0.0 { -sign } else { sign };
        out[i] = s * if i == arg { min2 } else { min1 };
    }
}

/// Sum-product decoding with a full error trace.
pub fn decode_sum_product(g: &TannerGraph, llr: &[f64], max_iters: usize) -> Decoded {
    Decoder::new(g, DecoderKind::SumProduct).decode(llr, max_iters, usize::MAX)
}

/// Bits wrong in each of the last `window` iterations, with the absorption
/// verdict when that set is nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureSupport {
    pub vars: Vec<usize>,
    /// `(a, b)` if `vars` is an absorption set.
    pub class: Option<(usize, usize)>,
}

/// Intersects the last `window` trace entries. `None` for an empty
/// candidate, which is how oscillating failures show up.
pub fn identify_failure_support(
    g: &TannerGraph,
    trace: &[Vec<usize>],
    window: usize,
) -> Option<FailureSupport> {
    let window = window.max(1);
    if trace.len() < window {
        return None;
    }
    let tail = &trace[trace.len() - window..];
    let vars: Vec<usize> = tail[0]
        .iter()
        .copied()
        .filter(|v| tail[1..].iter().all(|t| t.binary_search(v).is_ok()))
        .collect();
    if vars.is_empty() {
        return None;
    }
    let class = match is_absorption_set(g, &vars) {
        Ok(Some(_)) => {
            let b = crate::absorption::check_multiplicities(g, &vars)
                .values()
                .filter(|&&m| m % 2 == 1)
                .count();
            Some((vars.len(), b))
        }
        _ => None,
    };
    Some(FailureSupport { vars, class })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    #[default]
    Mc,
    Is,
}

/// A set to bias towards, standing for `multiplicity` sets of its kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsTarget {
    pub vars: Vec<usize>,
    #[serde(default = "one")]
    pub multiplicity: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub ebno_db: f64,
    /// Code rate used for the noise level; defaults to `1 - m/n`.
    pub rate: Option<f64>,
    pub max_decoder_iters: usize,
    /// Frame budget (per target in importance-sampling mode).
    pub max_frames: u64,
    /// Stop once this many frame errors were seen (per target).
    pub target_error_events: u64,
    pub mode: SimMode,
    pub is_targets: Vec<IsTarget>,
    /// Mean shift of the target bits in units of the signal amplitude.
    pub is_shift: f64,
    pub seed: u64,
    /// Worker threads, 0 for the rayon default.
    pub workers: usize,
    pub decoder: DecoderKind,
    pub stability_window: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            ebno_db: 4.0,
            rate: None,
            max_decoder_iters: DEFAULT_MAX_ITERS,
            max_frames: 100_000,
            target_error_events: 100,
            mode: SimMode::Mc,
            is_targets: Vec::new(),
            is_shift: 1.0,
            seed: 0,
            workers: 0,
            decoder: DecoderKind::SumProduct,
            stability_window: DEFAULT_STABILITY_WINDOW,
        }
    }
}

impl SimConfig {
    fn validate(&self, g: &TannerGraph) -> Result<()> {
        if !(self.is_shift >= 0.0 && self.is_shift.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "shift {} must be finite and >= 0",
                self.is_shift
            )));
        }
        if self.mode == SimMode::Is && self.is_targets.is_empty() {
            return Err(Error::OutOfRange(
                "importance sampling needs at least one target".into(),
            ));
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::OutOfRange(format!("rate {r}")));
            }
        }
        if !self.ebno_db.is_finite() {
            return Err(Error::OutOfRange("Eb/N0 must be finite".into()));
        }
        for t in &self.is_targets {
            if is_absorption_set(g, &t.vars)?.is_none() {
                return Err(Error::InvalidSet(format!(
                    "target {:?} is not an absorption set",
                    t.vars
                )));
            }
        }
        Ok(())
    }
}

/// Running sums of a weighted indicator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightedStat {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl WeightedStat {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, o: &WeightedStat) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Variance of the mean estimate.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq / n - m * m).max(0.0) * n / (n - 1.0)) / n
    }

    pub fn std_error(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn rel_std_error(&self) -> f64 {
        let m = self.mean();
        if m > 0.0 {
            self.std_error() / m
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub vars: Vec<usize>,
    pub multiplicity: u64,
    pub frames: u64,
    pub frame_errors: u64,
    /// Weighted frame-error indicator.
    pub fer: WeightedStat,
    /// Weighted indicator of a failure with every target bit wrong.
    pub locked: WeightedStat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifiedClass {
    pub a: usize,
    pub b: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mode: SimMode,
    pub ebno_db: f64,
    pub rate: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Weighted per-frame bit error fraction.
    pub ber: WeightedStat,
    /// Weighted frame-error indicator, pooled over targets.
    pub fer: WeightedStat,
    /// Relative standard error of the pooled frame error rate.
    pub confidence: f64,
    /// Rule-of-three frame error bound when no error was seen.
    pub fer_upper_bound: Option<f64>,
    pub per_target: Vec<TargetEstimate>,
    /// `sum multiplicity * P(locked)` over targets.
    pub union_fer: f64,
    /// `sum multiplicity * P(locked) * a / k` over targets.
    pub union_ber: f64,
    pub identified: Vec<IdentifiedClass>,
    pub unclassified: u64,
    pub warnings: Vec<String>,
}

/// Per-block accumulator, merged in block order.
#[derive(Debug, Clone, Default)]
struct Acc {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    ber: WeightedStat,
    fer: WeightedStat,
    locked: Vec<WeightedStat>,
    identified: BTreeMap<(usize, usize), u64>,
    unclassified: u64,
}

impl Acc {
    fn new(targets: usize) -> Self {
        Acc {
            locked: vec![WeightedStat::default(); targets],
            ..Default::default()
        }
    }

    fn merge(&mut self, o: &Acc) {
        self.frames += o.frames;
        self.bit_errors += o.bit_errors;
        self.frame_errors += o.frame_errors;
        self.ber.merge(&o.ber);
        self.fer.merge(&o.fer);
        for (a, b) in self.locked.iter_mut().zip(&o.locked) {
            a.merge(b);
        }
        for (k, v) in &o.identified {
            *self.identified.entry(*k).or_default() += v;
        }
        self.unclassified += o.unclassified;
    }
}

struct Run<'a> {
    dec: Decoder<'a>,
    cfg: &'a SimConfig,
    sigma: f64,
    sigma2: f64,
    /// Lookup for the biased bits of the current target.
    biased: Vec<bool>,
    shift: f64,
    targets: &'a [IsTarget],
}

impl Run<'_> {
    fn frame(&self, stream: u64, acc: &mut Acc) {
        let g = self.dec.graph();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        let mut llr = Vec::with_capacity(g.n_vars());
        let mut log_w = 0.0;
        for i in 0..g.n_vars() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let noise = self.sigma * z;
            let y = if self.biased[i] {
                let y = 1.0 - self.shift + noise;
                log_w +=
                    (2.0 * self.shift * (y - 1.0) + self.shift * self.shift) / (2.0 * self.sigma2);
                y
            } else {
                1.0 + noise
            };
            llr.push(2.0 * y / self.sigma2);
        }
        let w = log_w.exp();
        let window = self.cfg.stability_window.max(1);
        let out = self.dec.decode(&llr, self.cfg.max_decoder_iters, window);
        let errors = out.errors();
        let failed = errors > 0;
        acc.frames += 1;
        acc.bit_errors += errors as u64;
        acc.ber.push(w * errors as f64 / g.n_vars() as f64);
        acc.fer.push(if failed { w } else { 0.0 });
        if failed {
            acc.frame_errors += 1;
        }
        for (stat, t) in acc.locked.iter_mut().zip(self.targets) {
            let locked = failed && t.vars.iter().all(|&v| out.decisions[v] == 1);
            stat.push(if locked { w } else { 0.0 });
        }
        if failed {
            match identify_failure_support(g, &out.trace, window) {
                Some(FailureSupport {
                    class: Some(ab), ..
                }) => *acc.identified.entry(ab).or_default() += 1,
                _ => acc.unclassified += 1,
            }
        }
    }

    /// Runs frames of one stream family in rounds of fixed size until the
    /// error or frame budget is met.
    fn campaign(&self, target_index: u64, pool: &rayon::ThreadPool) -> Acc {
        let mut total = Acc::new(self.targets.len());
        let mut next = 0u64;
        while total.frames < self.cfg.max_frames
            && total.frame_errors < self.cfg.target_error_events
        {
            let round: Vec<(u64, u64)> = (0..BLOCKS_PER_ROUND)
                .map(|k| {
                    let start = next + k * BLOCK;
                    (start, (start + BLOCK).min(self.cfg.max_frames))
                })
                .filter(|(s, e)| s < e)
                .collect();
            if round.is_empty() {
                break;
            }
            next += BLOCKS_PER_ROUND * BLOCK;
            let parts: Vec<Acc> = pool.install(|| {
                round
                    .par_iter()
                    .map(|&(s, e)| {
                        let mut acc = Acc::new(self.targets.len());
                        for f in s..e {
                            self.frame((target_index << 40) | f, &mut acc);
                        }
                        acc
                    })
                    .collect()
            });
            for p in &parts {
                total.merge(p);
            }
        }
        total
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))
}

fn simulate(g: &TannerGraph, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate(g)?;
    let rate = cfg
        .rate
        .unwrap_or(1.0 - g.n_checks() as f64 / g.n_vars() as f64);
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::OutOfRange(format!(
            "design rate {rate} outside (0, 1)"
        )));
    }
    let k_info = (rate * g.n_vars() as f64).round();
    let sigma2 = Channel::new(cfg.ebno_db, rate).sigma2();
    let threads = pool(cfg.workers)?;
    let mut warnings = Vec::new();
    let mut run = Run {
        dec: Decoder::new(g, cfg.decoder),
        cfg,
        sigma: sigma2.sqrt(),
        sigma2,
        biased: vec![false; g.n_vars()],
        shift: 0.0,
        targets: &cfg.is_targets,
    };
    let mut total = Acc::new(cfg.is_targets.len());
    let mut per_target = Vec::new();
    match cfg.mode {
        SimMode::Mc => {
            total = run.campaign(0, &threads);
            for (t, locked) in cfg.is_targets.iter().zip(&total.locked) {
                per_target.push(TargetEstimate {
                    vars: t.vars.clone(),
                    multiplicity: t.multiplicity,
                    frames: total.frames,
                    frame_errors: total.frame_errors,
                    fer: total.fer,
                    locked: *locked,
                });
            }
        }
        SimMode::Is => {
            if cfg.is_shift == 0.0 {
                warnings.push(
                    "zero shift: every weight is 1 and the estimate is plain Monte Carlo".into(),
                );
            }
            run.shift = cfg.is_shift;
            for (i, t) in cfg.is_targets.iter().enumerate() {
                run.biased.iter_mut().for_each(|b| *b = false);
                for &v in &t.vars {
                    run.biased[v] = true;
                }
                let acc = run.campaign(i as u64, &threads);
                per_target.push(TargetEstimate {
                    vars: t.vars.clone(),
                    multiplicity: t.multiplicity,
                    frames: acc.frames,
                    frame_errors: acc.frame_errors,
                    fer: acc.fer,
                    locked: acc.locked[i],
                });
                total.merge(&acc);
            }
            if per_target
                .iter()
                .all(|t| t.fer.variance() == 0.0 && t.fer.n > 1)
            {
                warnings.push(
                    "weighted estimator has zero variance; the shift may be degenerate".into(),
                );
            }
        }
    }
    let union_fer = per_target
        .iter()
        .map(|t| t.multiplicity as f64 * t.locked.mean())
        .sum();
    let union_ber = per_target
        .iter()
        .map(|t| t.multiplicity as f64 * t.locked.mean() * t.vars.len() as f64 / k_info)
        .sum();
    let fer_upper_bound =
        (total.frame_errors == 0 && total.frames > 0).then(|| 3.0 / total.frames as f64);
    Ok(SimResult {
        mode: cfg.mode,
        ebno_db: cfg.ebno_db,
        rate,
        frames: total.frames,
        bit_errors: total.bit_errors,
        frame_errors: total.frame_errors,
        ber: total.ber,
        fer: total.fer,
        confidence: total.fer.rel_std_error(),
        fer_upper_bound,
        per_target,
        union_fer,
        union_ber,
        identified: total
            .identified
            .iter()
            .map(|(&(a, b), &count)| IdentifiedClass { a, b, count })
            .collect(),
        unclassified: total.unclassified,
        warnings,
    })
}

/// Plain Monte Carlo; `mode` is ignored and targets, if any, are only
/// observed.
pub fn run_mc(g: &TannerGraph, cfg: &SimConfig) -> Result<SimResult> {
    let cfg = SimConfig {
        mode: SimMode::Mc,
        ..cfg.clone()
    };
    simulate(g, &cfg)
}

/// Mean-shift importance sampling, one biased campaign per target.
pub fn run_is(g: &TannerGraph, cfg: &SimConfig) -> Result<SimResult> {
    let cfg = SimConfig {
        mode: SimMode::Is,
        ..cfg.clone()
    };
    simulate(g, &cfg)
}
