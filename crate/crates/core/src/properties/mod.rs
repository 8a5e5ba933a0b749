//! Distributional properties by adaptive quadrature.
//!
//! Every integral runs over the half-line through the tail map in
//! [`crate::quadrature`], scaled by the median so the bulk of the mass sits
//! near `s = 1/2`. The mixture series in [`series`] is kept as a cross-check.

pub mod series;

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::family::{AphG, Baseline};
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};

pub use series::{series_cross_check, SeriesCheck, SeriesExpansion};

fn tolerance() -> Tolerance {
    Tolerance::default()
}

/// Median, or 1 when the baseline has no explicit inverse.
fn scale<B: Baseline>(d: &AphG<B>) -> f64 {
    d.quantile(0.5)
        .ok()
        .filter(|m| m.is_finite() && *m > 0.0)
        .unwrap_or(1.0)
}

fn check_order<B: Baseline>(d: &AphG<B>, r: f64) -> Result<()> {
    let limit = d.baseline.moment_limit();
    if r >= limit {
        return Err(Error::MomentNotFinite { order: r, limit });
    }
    Ok(())
}

/// `x^r f(x)`, formed in log space so that `0·∞` never appears.
#[inline]
fn weighted_density<B: Baseline>(d: &AphG<B>, r: f64, x: f64) -> f64 {
    let ln_f = d.ln_pdf_raw(x);
    if ln_f == f64::NEG_INFINITY {
        return 0.0;
    }
    if r == 0.0 {
        ln_f.exp()
    } else {
        (r * x.ln() + ln_f).exp()
    }
}

/// `∫_t^∞ x^r f(x) dx`.
fn upper_moment<B: Baseline>(d: &AphG<B>, r: f64, t: f64) -> Result<f64> {
    let s = scale(d).max(t);
    Ok(integrate_to_infinity(|x| weighted_density(d, r, x), t, s, tolerance())?.value)
}

/// `∫_0^t x^r f(x) dx`.
fn lower_moment<B: Baseline>(d: &AphG<B>, r: f64, t: f64) -> Result<f64> {
    Ok(integrate(|x| weighted_density(d, r, x), 0.0, t, tolerance())?.value)
}

/// `E[X^r]`.
pub fn raw_moment<B: Baseline>(d: &AphG<B>, r: u32) -> Result<f64> {
    if r == 0 {
        return Ok(1.0);
    }
    check_order(d, r as f64)?;
    upper_moment(d, r as f64, 0.0)
}

/// `ω_r(t) = ∫_0^t x^r f(x) dx`.
pub fn incomplete_moment<B: Baseline>(d: &AphG<B>, r: u32, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("upper limit must be >= 0, got {t}")));
    }
    check_order(d, r as f64)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t <= 4.0 * scale(d) {
        lower_moment(d, r as f64, t)
    } else {
        Ok(raw_moment(d, r)? - upper_moment(d, r as f64, t)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// `μ'_1, μ'_2, ...` for every order below `φη`, up to six.
    pub raw_moments: Vec<f64>,
    pub mean: f64,
    pub variance: Option<f64>,
    pub sd: Option<f64>,
    pub cv: Option<f64>,
    pub skewness: Option<f64>,
    /// Standardized fourth central moment (not excess).
    pub kurtosis: Option<f64>,
}

impl MomentReport {
    /// `E[(X − μ)^r]` from the raw moments, when they reach order `r`.
    pub fn central_moment(&self, r: usize) -> Option<f64> {
        if r == 0 {
            return Some(1.0);
        }
        if r > self.raw_moments.len() {
            return None;
        }
        let raw = |k: usize| if k == 0 { 1.0 } else { self.raw_moments[k - 1] };
        let mut binom = 1.0;
        let mut total = 0.0;
        for k in 0..=r {
            total += binom * raw(k) * (-self.mean).powi((r - k) as i32);
            binom *= (r - k) as f64 / (k + 1) as f64;
        }
        Some(total)
    }

    /// Cumulant `κ_r` by the moment recursion.
    pub fn cumulant(&self, r: usize) -> Option<f64> {
        if r == 0 || r > self.raw_moments.len() {
            return None;
        }
        let mut kappa = Vec::with_capacity(r);
        for n in 1..=r {
            let mut value = self.raw_moments[n - 1];
            let mut binom = 1.0; // C(n−1, m−1)
            for m in 1..n {
                value -= binom * kappa[m - 1] * self.raw_moments[n - m - 1];
                binom *= (n - m) as f64 / m as f64;
            }
            kappa.push(value);
        }
        kappa.pop()
    }
}

/// Moments up to order six (or the highest that exists) and the shape summaries.
pub fn moment_report<B: Baseline>(d: &AphG<B>) -> Result<MomentReport> {
    let limit = d.baseline.moment_limit();
    let orders = (1..=6u32).take_while(|&r| (r as f64) < limit);
    let raw_moments = orders.map(|r| raw_moment(d, r)).collect::<Result<Vec<_>>>()?;
    if raw_moments.is_empty() {
        return Err(Error::MomentNotFinite { order: 1.0, limit });
    }
    let mean = raw_moments[0];
    let mut report = MomentReport {
        raw_moments,
        mean,
        variance: None,
        sd: None,
        cv: None,
        skewness: None,
        kurtosis: None,
    };
    if let Some(variance) = report.central_moment(2) {
        let sd = variance.max(0.0).sqrt();
        report.variance = Some(variance);
        report.sd = Some(sd);
        report.cv = Some(sd / mean);
        report.skewness = report.central_moment(3).map(|m3| m3 / sd.powi(3));
        report.kurtosis = report.central_moment(4).map(|m4| m4 / (variance * variance));
    }
    Ok(report)
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1], got {p}")));
    }
    Ok(())
}

/// Lorenz curve `L(p) = ω_1(Q(p))/μ`.
pub fn lorenz<B: Baseline>(p: f64, d: &AphG<B>) -> Result<f64> {
    check_probability(p)?;
    if p == 1.0 {
        check_order(d, 1.0)?;
        return Ok(1.0);
    }
    let q = d.quantile(p)?;
    Ok(incomplete_moment(d, 1, q)? / raw_moment(d, 1)?)
}

/// Bonferroni curve `L(p)/p`.
pub fn bonferroni<B: Baseline>(p: f64, d: &AphG<B>) -> Result<f64> {
    Ok(lorenz(p, d)? / p)
}

/// `E|X − μ| = 2μF(μ) − 2ω_1(μ)`.
pub fn mean_deviation_about_mean<B: Baseline>(d: &AphG<B>) -> Result<f64> {
    let mu = raw_moment(d, 1)?;
    Ok(2.0 * mu * d.cdf(mu)? - 2.0 * incomplete_moment(d, 1, mu)?)
}

/// `E|X − M| = μ − 2ω_1(M)` with `M` the median.
pub fn mean_deviation_about_median<B: Baseline>(d: &AphG<B>) -> Result<f64> {
    let mu = raw_moment(d, 1)?;
    let m = d.quantile(0.5)?;
    Ok(mu - 2.0 * incomplete_moment(d, 1, m)?)
}

/// `E[X − t | X > t]`.
pub fn mean_residual_life<B: Baseline>(t: f64, d: &AphG<B>) -> Result<f64> {
    check_order(d, 1.0)?;
    let s = d.sf(t)?;
    if s <= 0.0 {
        return Err(Error::range(format!("survival function vanishes at t = {t}")));
    }
    Ok(upper_moment(d, 1.0, t)? / s - t)
}

/// `E[t − X | X ≤ t]`.
pub fn average_waiting_time<B: Baseline>(t: f64, d: &AphG<B>) -> Result<f64> {
    let f = d.cdf(t)?;
    if f <= 0.0 {
        return Err(Error::range(format!("CDF vanishes at t = {t}")));
    }
    Ok(t - incomplete_moment(d, 1, t)? / f)
}

/// Probability weighted moment `E[X^q F(X)^r]`.
pub fn pwm<B: Baseline>(q: u32, r: u32, d: &AphG<B>) -> Result<f64> {
    if q > 0 {
        check_order(d, q as f64)?;
    }
    let s = scale(d);
    let integrand = |x: f64| {
        let base = weighted_density(d, q as f64, x);
        if r == 0 || base == 0.0 {
            base
        } else {
            base * d.cdf_raw(x).unwrap_or(f64::NAN).powi(r as i32)
        }
    };
    Ok(integrate_to_infinity(integrand, 0.0, s, tolerance())?.value)
}

/// Density of the `r`-th order statistic of a sample of size `n`.
pub fn order_statistic_pdf<B: Baseline>(x: f64, r: usize, n: usize, d: &AphG<B>) -> Result<f64> {
    if r == 0 || r > n {
        return Err(Error::InvalidRank { rank: r, n });
    }
    let ln_f = d.ln_pdf(x)?;
    if ln_f == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(ln_f.exp());
    }
    let mut ln = ln_f - ln_beta(r as f64, (n - r + 1) as f64);
    if r > 1 {
        ln += (r - 1) as f64 * d.cdf(x)?.ln();
    }
    if n > r {
        ln += (n - r) as f64 * d.ln_sf(x)?;
    }
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub value: f64,
    /// Magnitude of the last retained term.
    pub error: f64,
}

/// Truncated moment series `Σ_{r ≤ r_max} t^r μ'_r / r!`.
///
/// A Burr XII tail makes the true MGF diverge for every `t > 0`, so this is a
/// polynomial approximation, useful for `t ≤ 0` or as a formal expansion.
pub fn mgf<B: Baseline>(t: f64, d: &AphG<B>, r_max: u32) -> Result<MgfEstimate> {
    if !t.is_finite() {
        return Err(Error::domain("t must be finite"));
    }
    check_order(d, r_max as f64)?;
    let mut value = 1.0;
    let mut last = 1.0;
    let mut factor = 1.0;
    for r in 1..=r_max {
        factor *= t / r as f64;
        last = factor * raw_moment(d, r)?;
        value += last;
    }
    Ok(MgfEstimate {
        value,
        error: if r_max == 0 { 0.0 } else { last.abs() },
    })
}

/// `∫ f^ρ`.
fn density_power_integral<B: Baseline>(rho: f64, d: &AphG<B>) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::domain(format!("rho must be positive, got {rho}")));
    }
    if !d.baseline.density_power_integrable(rho) {
        return Err(Error::Divergent(rho));
    }
    let integrand = |x: f64| {
        let ln_f = d.ln_pdf_raw(x);
        if ln_f == f64::NEG_INFINITY {
            0.0
        } else {
            (rho * ln_f).exp()
        }
    };
    integrate_to_infinity(integrand, 0.0, scale(d), tolerance())
        .map(|r| r.value)
        .map_err(|_| Error::Divergent(rho))
}

fn check_rho(rho: f64) -> Result<()> {
    if rho == 1.0 {
        return Err(Error::domain("rho = 1 is the Shannon limit; use shannon_entropy"));
    }
    Ok(())
}

pub fn renyi_entropy<B: Baseline>(rho: f64, d: &AphG<B>) -> Result<f64> {
    check_rho(rho)?;
    Ok(density_power_integral(rho, d)?.ln() / (1.0 - rho))
}

pub fn tsallis_entropy<B: Baseline>(rho: f64, d: &AphG<B>) -> Result<f64> {
    check_rho(rho)?;
    Ok((1.0 - density_power_integral(rho, d)?) / (rho - 1.0))
}

/// `−∫ f ln f`.
pub fn shannon_entropy<B: Baseline>(d: &AphG<B>) -> Result<f64> {
    let integrand = |x: f64| {
        let ln_f = d.ln_pdf_raw(x);
        if ln_f == f64::NEG_INFINITY {
            0.0
        } else {
            -ln_f * ln_f.exp()
        }
    };
    Ok(integrate_to_infinity(integrand, 0.0, scale(d), tolerance())?.value)
}
