//! Gaussian-approximation density evolution for regular ensembles.
//!
//! Messages are modelled as consistent Gaussians (variance twice the mean).
//! `phi(m) = 1 - E[tanh(u/2)]` for `u ~ N(m, 2m)` is evaluated through the
//! equivalent form `phi(m) = exp(-m/4) * I(m)` with
//! `I(m) = pi^-1/2 * integral of sech(sqrt(m) t) exp(-t^2) dt`, which has no
//! cancellation and keeps full relative precision deep into the tail.

use serde::{Deserialize, Serialize};

use crate::qfunc::q;
use crate::{Error, Result};

/// Above this mean `phi` switches from quadrature to its asymptotic series.
pub const PHI_CROSSOVER: f64 = 150.0;

/// Dirichlet beta function for `s >= 1`, by Cohen–Villegas–Zagier
/// acceleration of the alternating series.
fn dirichlet_beta(s: f64) -> f64 {
    const N: usize = 40;
    let mut d = (3.0 + 8f64.sqrt()).powi(N as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..N {
        c = b - c;
        sum += c / (2.0 * k as f64 + 1.0).powf(s);
        let (kf, nf) = (k as f64, N as f64);
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// `ln I(m)` by the trapezoid rule, which is spectrally accurate for this
/// analytic, rapidly decaying integrand.
fn ln_integral_quadrature(m: f64) -> f64 {
    let r = m.sqrt();
    let (h, span) = if r > 0.0 {
        ((0.25 / r).min(0.1), (41.0 / r).min(6.5))
    } else {
        (0.1, 6.5)
    };
    let steps = (span / h).ceil() as usize;
    let mut sum = 0.5 * 1.0; // t = 0 contributes once, halved for symmetric doubling
    for k in 1..=steps {
        let t = k as f64 * h;
        let x = r * t;
        // sech x = 2 e^-x / (1 + e^-2x)
        let sech = 2.0 * (-x).exp() / (1.0 + (-2.0 * x).exp());
        sum += sech * (-t * t).exp();
    }
    (2.0 * sum * h / std::f64::consts::PI.sqrt()).ln()
}

/// `ln I(m)` from the divergent asymptotic series, truncated at its
/// smallest term.
fn ln_integral_asymptotic(m: f64) -> f64 {
    let mut sum = 0.0;
    // (2k)!/k! * m^-k, built incrementally
    let mut coef = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let term = coef * dirichlet_beta(2.0 * k as f64 + 1.0);
        if term.abs() >= prev {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
        prev = term.abs();
        let kf = k as f64;
        coef *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0) / ((kf + 1.0) * m);
    }
    (4.0 * sum / (std::f64::consts::PI * m).sqrt()).ln()
}

fn check_mean(m: f64) -> Result<()> {
    if m.is_nan() || m < 0.0 {
        Err(Error::OutOfRange(format!(
            "phi needs a non-negative mean, got {m}"
        )))
    } else {
        Ok(())
    }
}

/// Natural log of `phi(m)`.
pub fn ln_phi(m: f64) -> Result<f64> {
    check_mean(m)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    if m == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_i = if m > PHI_CROSSOVER {
        ln_integral_asymptotic(m)
    } else {
        ln_integral_quadrature(m)
    };
    Ok(-m / 4.0 + ln_i)
}

/// Check-node mean transfer function, `phi(0) = 1`, decreasing to 0.
pub fn phi(m: f64) -> Result<f64> {
    Ok(ln_phi(m)?.exp())
}

/// `phi` from the asymptotic series alone, exposed for crossover checks.
pub fn phi_asymptotic(m: f64) -> Result<f64> {
    check_mean(m)?;
    if m == 0.0 {
        return Err(Error::OutOfRange("asymptotic series needs m > 0".into()));
    }
    Ok((-m / 4.0 + ln_integral_asymptotic(m)).exp())
}

/// `phi` by quadrature alone, exposed for crossover checks.
pub fn phi_quadrature(m: f64) -> Result<f64> {
    check_mean(m)?;
    Ok((-m / 4.0 + ln_integral_quadrature(m)).exp())
}

/// Inverse of `phi` taking `ln y`; works where `y` itself underflows.
pub fn phi_inv_ln(ln_y: f64) -> Result<f64> {
    if ln_y.is_nan() || ln_y > 0.0 {
        return Err(Error::OutOfRange(format!(
            "phi_inv needs y in (0,1], got exp({ln_y})"
        )));
    }
    if ln_y == 0.0 {
        return Ok(0.0);
    }
    if ln_y == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let f = |m: f64| ln_phi(m).map(|v| v - ln_y);
    let (mut lo, mut flo) = (0.0, -ln_y);
    let mut hi = 1.0;
    let mut fhi = f(hi)?;
    while fhi > 0.0 {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi)?;
    }
    // Illinois variant of regula falsi
    let mut side = 0i8;
    for _ in 0..200 {
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let mid = if mid.is_finite() && mid > lo && mid < hi {
            mid
        } else {
            0.5 * (lo + hi)
        };
        let fm = f(mid)?;
        if fm == 0.0 || (hi - lo) <= 1e-15 * hi {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
            flo = fm;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = mid;
            fhi = fm;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
        if (hi - lo) <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inverse of `phi` on `(0, 1]`.
pub fn phi_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "phi_inv needs y in (0,1], got {y}"
        )));
    }
    phi_inv_ln(y.ln())
}

/// `ln(1 - (1 - p)^n)` given `ln p`.
fn ln_one_minus_pow(ln_p: f64, n: f64) -> f64 {
    if ln_p < -40.0 {
        n.ln() + ln_p
    } else {
        let p = ln_p.exp();
        (-(n * (-p).ln_1p()).exp_m1()).ln()
    }
}

/// AWGN operating point for BPSK with unit symbol energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub ebno_db: f64,
    pub rate: f64,
}

impl Channel {
    pub fn new(ebno_db: f64, rate: f64) -> Self {
        Channel { ebno_db, rate }
    }

    pub fn ebno(&self) -> f64 {
        10f64.powf(self.ebno_db / 10.0)
    }

    pub fn es_n0(&self) -> f64 {
        self.rate * self.ebno()
    }

    /// Noise variance per real dimension.
    pub fn sigma2(&self) -> f64 {
        1.0 / (2.0 * self.es_n0())
    }

    /// Mean of the channel LLR, `2 / sigma^2 = 4 R Eb/N0`.
    pub fn m_lambda(&self) -> f64 {
        4.0 * self.es_n0()
    }
}

/// Evolved means of a regular ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DEState {
    pub d_v: usize,
    pub d_c: usize,
    pub m_lambda: f64,
    /// Check-to-variable means; `m_ex[j-1]` is iteration `j`.
    pub m_ex: Vec<f64>,
    /// Variable-to-check means; `m_v2c[i-1] = m_lambda + (d_v-1) m_ex[i-2]`.
    pub m_v2c: Vec<f64>,
    /// Check-node gains `(1 - phi(m_v2c))^(d_c - 2)`.
    pub gains: Vec<f64>,
    pub sigma2: Option<f64>,
    pub ebno_db: Option<f64>,
}

impl DEState {
    pub fn iters(&self) -> usize {
        self.m_ex.len()
    }

    /// Runs the recursion at a channel operating point.
    pub fn at(d_v: usize, d_c: usize, channel: Channel, iters: usize) -> Result<Self> {
        let mut st = evolve_means(d_v, d_c, channel.m_lambda(), iters)?;
        st.sigma2 = Some(channel.sigma2());
        st.ebno_db = Some(channel.ebno_db);
        Ok(st)
    }
}

/// Iterates the mean recursion `iters` times from a zero extrinsic mean.
pub fn evolve_means(d_v: usize, d_c: usize, m_lambda: f64, iters: usize) -> Result<DEState> {
    if d_v < 2 || d_c < 2 {
        return Err(Error::OutOfRange(format!(
            "degrees ({d_v},{d_c}) too small"
        )));
    }
    check_mean(m_lambda)?;
    let mut m_ex = Vec::with_capacity(iters);
    let mut m_v2c = Vec::with_capacity(iters);
    let mut gains = Vec::with_capacity(iters);
    let mut prev = 0.0;
    for _ in 0..iters {
        let mv = m_lambda + (d_v - 1) as f64 * prev;
        let lp = ln_phi(mv)?;
        let me = phi_inv_ln(ln_one_minus_pow(lp, (d_c - 1) as f64))?;
        m_v2c.push(mv);
        gains.push(gain_from_ln_phi(lp, d_c));
        m_ex.push(me);
        prev = me;
    }
    Ok(DEState {
        d_v,
        d_c,
        m_lambda,
        m_ex,
        m_v2c,
        gains,
        sigma2: None,
        ebno_db: None,
    })
}

/// Rounded down, so a check with any uncertainty never reports a gain of 1.
fn gain_from_ln_phi(ln_p: f64, d_c: usize) -> f64 {
    let p = ln_p.exp();
    let g = ((d_c - 2) as f64 * (-p).ln_1p()).exp();
    if ln_p > f64::NEG_INFINITY && d_c > 2 {
        g.min(1f64.next_down())
    } else {
        g
    }
}

/// Gain `g_i` for iteration `i` (1-based).
pub fn check_gain(state: &DEState, i: usize) -> Result<f64> {
    if i == 0 || i > state.gains.len() {
        return Err(Error::OutOfRange(format!(
            "iteration {i} outside 1..={}",
            state.gains.len()
        )));
    }
    Ok(state.gains[i - 1])
}

/// Gain of a check whose other inputs have mean `m_v2c`.
pub fn gain_at(m_v2c: f64, d_c: usize) -> Result<f64> {
    Ok(gain_from_ln_phi(ln_phi(m_v2c)?, d_c))
}

/// Hard-decision error probability `Q(sqrt(2 Es/N0))`.
pub fn raw_error_prob(es_n0: f64) -> Result<f64> {
    if es_n0.is_nan() || es_n0 < 0.0 {
        return Err(Error::OutOfRange(format!(
            "Es/N0 must be non-negative, got {es_n0}"
        )));
    }
    Ok(q((2.0 * es_n0).sqrt()))
}

/// Probability that an odd number of the `d_c - 2` outside inputs of a check
/// are in error. With `paper_faithful` the single-error term is left out.
pub fn polarity_reversal_prob(pe: f64, d_c: usize, paper_faithful: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::OutOfRange(format!(
            "P_e must lie in [0,1], got {pe}"
        )));
    }
    let n = d_c.saturating_sub(2);
    let first = if paper_faithful { 3 } else { 1 };
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    let ln_keep = (-pe).ln_1p();
    for j in 0..=n {
        if j > 0 {
            binom = binom * (n - j + 1) as f64 / j as f64;
        }
        if j % 2 == 1 && j >= first {
            sum += binom * pe.powi(j as i32) * ((n - j) as f64 * ln_keep).exp();
        }
    }
    Ok(sum)
}

/// Closed form `(1 - (1 - 2 P_e)^(d_c-2)) / 2` of the full odd sum.
pub fn polarity_reversal_closed(pe: f64, d_c: usize) -> f64 {
    let n = d_c.saturating_sub(2) as f64;
    -0.5 * (n * (-2.0 * pe).ln_1p()).exp_m1()
}
