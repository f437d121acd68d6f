//! Analytic absorption-set failure probabilities and union-bound floors.
//!
//! The decision statistic of an `(a, b)` set after `I` iterations is modelled
//! as Gaussian with
//!
//! ```text
//! P_j  = prod_{l<=j} 1 / (g_l mu)
//! mean = a m_lambda (1 + sum_j P_j) + b sum_j m_ex_j P_j
//! var  = 2 a m_lambda (1 + sum_j P_j)^2 + 2 b sum_j m_ex_j P_j^2
//! ```
//!
//! and the set fails with probability `Q(mean / sqrt(var))`. With `g = 1`
//! and `a = b = 8, mu = 4` this is the classic dominant-set expression.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::de::{polarity_reversal_prob, raw_error_prob, Channel, DEState};
use crate::qfunc::{ln_add, ln_q};
use crate::{Error, Result};

/// Mean and variance of the decision statistic plus the resulting tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PAs {
    pub mean: f64,
    pub var: f64,
    /// Natural log of the failure probability.
    pub ln_p: f64,
}

impl PAs {
    pub fn p(&self) -> f64 {
        self.ln_p.exp()
    }

    pub fn log10_p(&self) -> f64 {
        self.ln_p / std::f64::consts::LN_10
    }

    fn from_moments(mean: f64, var: f64) -> Self {
        PAs {
            mean,
            var,
            ln_p: ln_q(mean / var.sqrt()),
        }
    }
}

/// Mean/variance bookkeeping shared by every variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub intrinsic_mean: f64,
    pub extrinsic_mean: f64,
    pub intrinsic_var: f64,
    pub extrinsic_var: f64,
}

impl Moments {
    pub fn mean(&self) -> f64 {
        self.intrinsic_mean + self.extrinsic_mean
    }

    pub fn var(&self) -> f64 {
        self.intrinsic_var + self.extrinsic_var
    }
}

/// Decision-statistic moments for gains `g` (missing entries count as 1).
///
/// `consistent_variance` doubles the extrinsic variance term.
pub fn moments(
    m_lambda: f64,
    m_ex: &[f64],
    gains: &[f64],
    mu: f64,
    a: usize,
    b: usize,
    consistent_variance: bool,
) -> Moments {
    let (a, b) = (a as f64, b as f64);
    let mut p = 1.0;
    let mut sum_p = 0.0;
    let mut ex_mean = 0.0;
    let mut ex_var = 0.0;
    for (j, &m) in m_ex.iter().enumerate() {
        let g = gains.get(j).copied().unwrap_or(1.0);
        p /= g * mu;
        sum_p += p;
        ex_mean += m * p;
        ex_var += m * p * p;
    }
    let lead = 1.0 + sum_p;
    let factor = if consistent_variance { 4.0 } else { 2.0 };
    Moments {
        intrinsic_mean: a * m_lambda * lead,
        extrinsic_mean: b * ex_mean,
        intrinsic_var: 2.0 * a * m_lambda * lead * lead,
        extrinsic_var: factor * b * ex_var,
    }
}

/// Failure probability with unit check gains.
pub fn p_as_basic(m_lambda: f64, m_ex: &[f64], mu: f64, a: usize, b: usize) -> PAs {
    let m = moments(m_lambda, m_ex, &[], mu, a, b, false);
    PAs::from_moments(m.mean(), m.var())
}

/// Failure probability with check gains `g_l` attenuating each iteration.
pub fn p_as_refined(
    m_lambda: f64,
    m_ex: &[f64],
    gains: &[f64],
    mu: f64,
    a: usize,
    b: usize,
) -> PAs {
    let m = moments(m_lambda, m_ex, gains, mu, a, b, false);
    PAs::from_moments(m.mean(), m.var())
}

/// Failure probability with the gain approximated by `(d_v - 1) - b/a`.
pub fn p_as_general(
    a: usize,
    b: usize,
    d_v: usize,
    m_lambda: f64,
    m_ex: &[f64],
    gains: &[f64],
) -> Result<PAs> {
    let mu = crate::dynamics::approx_gain(a, b, d_v);
    if mu <= 1.0 {
        return Err(Error::OutOfRange(format!(
            "gain {mu} of ({a},{b}) does not exceed 1"
        )));
    }
    Ok(p_as_refined(m_lambda, m_ex, gains, mu, a, b))
}

/// How the variance of the injected corrections is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionVariance {
    /// Standard deviations add: the largest admissible bound.
    #[default]
    Correlated,
    /// Variances add.
    Independent,
}

/// Mixture over `k` reversed internal checks, each reversal pulling the
/// mean down by `2 m_lambda / mu` and adding two corrections of standard
/// deviation `sqrt(2 m_lambda) / mu` each.
pub fn polarity_corrected_pas(m: &Moments, m_lambda: f64, mu: f64, p_p: f64, k_max: usize) -> PAs {
    polarity_corrected_pas_with(m, m_lambda, mu, p_p, k_max, CorrectionVariance::Correlated)
}

pub fn polarity_corrected_pas_with(
    m: &Moments,
    m_lambda: f64,
    mu: f64,
    p_p: f64,
    k_max: usize,
    bound: CorrectionVariance,
) -> PAs {
    let sd = m.var().sqrt();
    let mean = m.mean();
    if p_p <= 0.0 {
        return PAs::from_moments(mean, m.var());
    }
    let (ln_pp, ln_keep) = (p_p.ln(), (-p_p).ln_1p());
    let mut ln_total = f64::NEG_INFINITY;
    let mut ln_binom = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            ln_binom += ((k_max - k + 1) as f64).ln() - (k as f64).ln();
        }
        let mean_k = mean - 2.0 * k as f64 * m_lambda / mu;
        let corr = 2.0 * k as f64;
        let sd_k = match bound {
            CorrectionVariance::Correlated => sd + corr * (2.0 * m_lambda).sqrt() / mu,
            CorrectionVariance::Independent => (m.var() + corr * 2.0 * m_lambda / (mu * mu)).sqrt(),
        };
        let ln_w = ln_binom + k as f64 * ln_pp + (k_max - k) as f64 * ln_keep;
        ln_total = ln_add(ln_total, ln_w + ln_q(mean_k / sd_k));
    }
    PAs {
        mean,
        var: m.var(),
        ln_p: ln_total,
    }
}

/// Where a family's gain comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum MuSource {
    /// `d_v - 2`, exact for symmetric pairwise sets (`a = b`).
    Lemma,
    /// A value computed from the set's model.
    Numeric(f64),
    /// `(d_v - 1) - b/a`.
    Approx,
}

/// One set family in the union bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u64,
    #[serde(default = "default_mu")]
    pub mu: MuSource,
    /// Internal checks that can reverse polarity; defaults to `(a d_v - b)/2`.
    #[serde(default)]
    pub internal_checks: Option<usize>,
}

fn default_mu() -> MuSource {
    MuSource::Approx
}

impl Family {
    pub fn mu_max(&self, d_v: usize) -> Result<f64> {
        match self.mu {
            MuSource::Lemma if self.a == self.b => Ok(d_v as f64 - 2.0),
            MuSource::Lemma => Err(Error::OutOfRange(format!(
                "the lemma gain only covers symmetric sets, not ({},{})",
                self.a, self.b
            ))),
            MuSource::Numeric(mu) => Ok(mu),
            MuSource::Approx => Ok(crate::dynamics::approx_gain(self.a, self.b, d_v)),
        }
    }

    fn k_max(&self, d_v: usize) -> usize {
        self.internal_checks
            .unwrap_or((self.a * d_v).saturating_sub(self.b) / 2)
    }
}

/// Optional refinements of the basic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinements {
    pub check_gains: bool,
    pub polarity_correction: bool,
    pub paper_faithful_pp: bool,
    pub consistent_variance: bool,
    #[serde(default)]
    pub correction_variance: CorrectionVariance,
}

impl Default for Refinements {
    fn default() -> Self {
        Refinements {
            check_gains: true,
            polarity_correction: false,
            paper_faithful_pp: false,
            consistent_variance: false,
            correction_variance: CorrectionVariance::Correlated,
        }
    }
}

/// Inputs of a floor sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorConfig {
    pub ebno_sweep: Vec<f64>,
    pub iters: usize,
    pub n: usize,
    pub k_info: usize,
    pub d_v: usize,
    pub d_c: usize,
    pub families: Vec<Family>,
    pub refinements: Refinements,
}

impl FloorConfig {
    /// The (2048,1723) (6,32) code with its dominant (8,8) family.
    pub fn ieee_8023an() -> Self {
        FloorConfig {
            ebno_sweep: vec![5.0],
            iters: 12,
            n: 2048,
            k_info: 1723,
            d_v: 6,
            d_c: 32,
            families: vec![Family {
                a: 8,
                b: 8,
                multiplicity: 14_272,
                mu: MuSource::Lemma,
                internal_checks: None,
            }],
            refinements: Refinements::default(),
        }
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k_info == 0 || self.k_info >= self.n {
            return Err(Error::OutOfRange(format!(
                "need 0 < k_info < n, got k={} n={}",
                self.k_info, self.n
            )));
        }
        if self.d_v < 2 || self.d_c < 3 {
            return Err(Error::OutOfRange("degrees too small".into()));
        }
        for f in &self.families {
            if f.a == 0 {
                return Err(Error::OutOfRange("family with a = 0".into()));
            }
            f.mu_max(self.d_v)?;
        }
        Ok(())
    }
}

/// Per-family result at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u64,
    pub mu_max: f64,
    pub p_as: f64,
    pub log10_p_as: f64,
    pub ber_contrib: f64,
    pub fer_contrib: f64,
    pub moments: Moments,
}

/// Aggregate result at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub ebno_db: f64,
    pub m_lambda: f64,
    pub p_e: f64,
    pub p_p: f64,
    pub families: Vec<FamilyPoint>,
    pub ber: f64,
    pub fer: f64,
    pub warnings: Vec<String>,
}

/// Floor prediction across the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorEstimate {
    pub config: FloorConfig,
    pub points: Vec<SweepPoint>,
}

/// Evaluates every family at one operating point.
pub fn evaluate_point(cfg: &FloorConfig, ebno_db: f64) -> Result<SweepPoint> {
    let ch = Channel::new(ebno_db, cfg.rate());
    let de = DEState::at(cfg.d_v, cfg.d_c, ch, cfg.iters)?;
    evaluate_with_state(cfg, ch, &de)
}

/// Evaluates every family given an already evolved DE state.
pub fn evaluate_with_state(cfg: &FloorConfig, ch: Channel, de: &DEState) -> Result<SweepPoint> {
    let r = cfg.refinements;
    let m_lambda = de.m_lambda;
    let p_e = raw_error_prob(ch.es_n0())?;
    let p_p = if r.polarity_correction {
        polarity_reversal_prob(p_e, cfg.d_c, r.paper_faithful_pp)?
    } else {
        0.0
    };
    let mut warnings = Vec::new();
    if de.m_ex.windows(2).any(|w| w[1] < w[0]) {
        warnings.push(format!(
            "density evolution below threshold at {} dB",
            ch.ebno_db
        ));
    }
    let gains: &[f64] = if r.check_gains { &de.gains } else { &[] };
    let mut families = Vec::with_capacity(cfg.families.len());
    for f in &cfg.families {
        let mu = f.mu_max(cfg.d_v)?;
        let m = moments(
            m_lambda,
            &de.m_ex,
            gains,
            mu,
            f.a,
            f.b,
            r.consistent_variance,
        );
        let pas = if r.polarity_correction {
            polarity_corrected_pas_with(
                &m,
                m_lambda,
                mu,
                p_p,
                f.k_max(cfg.d_v),
                r.correction_variance,
            )
        } else {
            PAs::from_moments(m.mean(), m.var())
        };
        let p = pas.p();
        families.push(FamilyPoint {
            a: f.a,
            b: f.b,
            multiplicity: f.multiplicity,
            mu_max: mu,
            p_as: p,
            log10_p_as: pas.log10_p(),
            ber_contrib: f.multiplicity as f64 * p * f.a as f64 / cfg.k_info as f64,
            fer_contrib: f.multiplicity as f64 * p,
            moments: m,
        });
    }
    let ber = families.iter().map(|f| f.ber_contrib).sum();
    let fer = families.iter().map(|f| f.fer_contrib).sum::<f64>().min(1.0);
    Ok(SweepPoint {
        ebno_db: ch.ebno_db,
        m_lambda,
        p_e,
        p_p,
        families,
        ber,
        fer,
        warnings,
    })
}

/// Runs the whole sweep; points are evaluated in parallel, kept in grid order.
pub fn sweep(cfg: &FloorConfig) -> Result<FloorEstimate> {
    cfg.validate()?;
    let points = cfg
        .ebno_sweep
        .par_iter()
        .map(|&e| evaluate_point(cfg, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(FloorEstimate {
        config: cfg.clone(),
        points,
    })
}

impl FloorEstimate {
    /// Per-family rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "ebno_db,family_a,family_b,multiplicity,mu_max,p_as,ber_contrib,fer_contrib\n",
        );
        for p in &self.points {
            for f in &p.families {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{:e},{:e},{:e}",
                    p.ebno_db,
                    f.a,
                    f.b,
                    f.multiplicity,
                    f.mu_max,
                    f.p_as,
                    f.ber_contrib,
                    f.fer_contrib
                );
            }
        }
        out
    }

    /// One row per operating point.
    pub fn totals_csv(&self) -> String {
        let mut out = String::from("ebno_db,ber,fer\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:e},{:e}", p.ebno_db, p.ber, p.fer);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Parses `start:stop:step` (inclusive) or a single value.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::OutOfRange(format!("'{s}' is not a number")))
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(Error::OutOfRange(format!("bad sweep {spec}")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=count)
                .map(|i| {
                    let v = start + i as f64 * step;
                    (v * 1e9).round() / 1e9
                })
                .collect())
        }
        _ => Err(Error::OutOfRange(format!(
            "sweep must be start:stop:step, got {spec}"
        ))),
    }
}
