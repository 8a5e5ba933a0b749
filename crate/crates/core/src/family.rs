//! The alpha power Harris–G family over an arbitrary baseline.
//!
//! A baseline with CDF `J` is first passed through the Harris generator
//!
//! ```text
//! H(x) = 1 − c^{1/υ} J̄(x) / (1 − c̄ J̄(x)^υ)^{1/υ},   c̄ = 1 − c,
//! ```
//!
//! and the result through the alpha power transform `(α^H − 1)/(α − 1)`.
//!
//! All evaluation goes through the Harris tail `T = 1 − H`, computed as
//!
//! ```text
//! y = −υ ln J̄,   L = ln(1 + (e^y − 1)/c),   ln T = −L/υ,
//! ln(g/j) = −ln c + (1 + 1/υ)(y − L),
//! ```
//!
//! where `g` is the Harris density. Neither expression cancels or overflows
//! for tiny `υ`, large `c`, or far tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_expm1, one_minus_exp_neg_over, softplus};

/// Below this distance from 1 the alpha power layer is the identity.
pub const ALPHA_LIMIT_THRESHOLD: f64 = 1e-8;

/// Probabilities may exceed [0, 1] by this much before it counts as an error.
const PROBABILITY_SLACK: f64 = 1e-12;

/// A baseline lifetime distribution on `(0, ∞)`.
pub trait Baseline {
    fn cdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64;

    /// `ln(1 − J(x))`. Override when a cancellation-free form exists.
    fn ln_sf(&self, x: f64) -> f64 {
        (-self.cdf(x)).ln_1p()
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    /// The point whose log survival probability is `ln_sf`, if the baseline
    /// has an explicit inverse.
    fn quantile_from_ln_sf(&self, _ln_sf: f64) -> Option<f64> {
        None
    }

    /// Baseline parameter vector Π.
    fn params(&self) -> Vec<f64>;

    /// Supremum of the orders `r` with `E[X^r] < ∞`. The Harris and alpha
    /// power layers keep the baseline's tail index, so it bounds the family too.
    fn moment_limit(&self) -> f64 {
        f64::INFINITY
    }

    /// Whether `∫ f^ρ` can be finite near the origin and in the tail.
    fn density_power_integrable(&self, _rho: f64) -> bool {
        true
    }
}

/// Shape triple `(α, c, υ)` of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub alpha: f64,
    pub c: f64,
    pub upsilon: f64,
}

impl FamilyParams {
    pub fn new(alpha: f64, c: f64, upsilon: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("c", c), ("upsilon", upsilon)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { alpha, c, upsilon })
    }

    /// The identity element: `α = c = υ = 1` leaves the baseline unchanged.
    pub fn identity() -> Self {
        Self {
            alpha: 1.0,
            c: 1.0,
            upsilon: 1.0,
        }
    }

    pub fn c_bar(&self) -> f64 {
        1.0 - self.c
    }

    pub fn is_alpha_limit(&self) -> bool {
        (self.alpha - 1.0).abs() < ALPHA_LIMIT_THRESHOLD
    }

    /// `ln α / (α − 1)`, 1 on the limit branch.
    pub(crate) fn alpha_norm(&self) -> f64 {
        if self.is_alpha_limit() {
            1.0
        } else {
            self.alpha.ln() / (self.alpha - 1.0)
        }
    }
}

/// `(ln T, ln(g/j))` for the Harris layer given `ln J̄`.
#[inline]
pub(crate) fn harris_parts(ln_jbar: f64, ln_c: f64, upsilon: f64) -> (f64, f64) {
    if ln_jbar == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let y = -upsilon * ln_jbar;
    let l = softplus(ln_expm1(y) - ln_c);
    let ln_t = -l / upsilon;
    let ln_ratio = -ln_c + (1.0 + 1.0 / upsilon) * (y - l);
    (ln_t, ln_ratio)
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::domain(format!("support point must be >= 0, got {x}")))
    } else {
        Ok(())
    }
}

fn guard_probability(raw: f64, what: &str) -> Result<f64> {
    if (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&raw) {
        Ok(raw.clamp(0.0, 1.0))
    } else {
        Err(Error::range(format!("{what} evaluated to {raw}, outside [0, 1]")))
    }
}

/// The Harris–G CDF on its own.
pub fn harris_cdf<B: Baseline + ?Sized>(x: f64, c: f64, upsilon: f64, baseline: &B) -> Result<f64> {
    check_x(x)?;
    FamilyParams::new(1.0, c, upsilon)?;
    let (ln_t, _) = harris_parts(baseline.ln_sf(x), c.ln(), upsilon);
    guard_probability(-ln_t.exp_m1(), "Harris CDF")
}

/// An APH–G distribution: family shape parameters over a baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AphG<B> {
    pub family: FamilyParams,
    pub baseline: B,
}

impl<B: Baseline> AphG<B> {
    pub fn new(family: FamilyParams, baseline: B) -> Self {
        Self { family, baseline }
    }

    #[inline]
    fn tail(&self, x: f64) -> (f64, f64) {
        harris_parts(self.baseline.ln_sf(x), self.family.c.ln(), self.family.upsilon)
    }

    /// Harris CDF `H(x)` (the exponent of α).
    pub fn harris_cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let (ln_t, _) = self.tail(x);
        guard_probability(-ln_t.exp_m1(), "Harris CDF")
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self.cdf_raw(x)?)
    }

    pub(crate) fn cdf_raw(&self, x: f64) -> Result<f64> {
        let (ln_t, _) = self.tail(x);
        let h = -ln_t.exp_m1();
        let raw = if self.family.is_alpha_limit() {
            h
        } else {
            let a = self.family.alpha;
            (h * a.ln()).exp_m1() / (a - 1.0)
        };
        guard_probability(raw, "CDF")
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let (ln_t, _) = self.tail(x);
        let t = ln_t.exp();
        let raw = if self.family.is_alpha_limit() {
            t
        } else {
            let a = self.family.alpha;
            a * (-(-t * a.ln()).exp_m1()) / (a - 1.0)
        };
        guard_probability(raw, "survival function")
    }

    pub fn ln_sf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self.ln_sf_raw(x))
    }

    pub(crate) fn ln_sf_raw(&self, x: f64) -> f64 {
        let (ln_t, _) = self.tail(x);
        if self.family.is_alpha_limit() {
            return ln_t;
        }
        let la = self.family.alpha.ln();
        let t = ln_t.exp();
        la + ln_t + self.family.alpha_norm().ln() + one_minus_exp_neg_over(t * la).ln()
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self.ln_pdf_raw(x))
    }

    /// Log density without domain checks; `-inf` where the density vanishes.
    #[inline]
    pub(crate) fn ln_pdf_raw(&self, x: f64) -> f64 {
        let ln_j = self.baseline.ln_pdf(x);
        if ln_j == f64::NEG_INFINITY {
            return ln_j;
        }
        let (ln_t, ln_ratio) = self.tail(x);
        if ln_ratio == f64::NEG_INFINITY {
            return ln_ratio;
        }
        let harris = ln_j + ln_ratio;
        if self.family.is_alpha_limit() {
            harris
        } else {
            let h = -ln_t.exp_m1();
            harris + self.family.alpha_norm().ln() + h * self.family.alpha.ln()
        }
    }

    /// Hazard rate `f/S`.
    pub fn hrf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let ln_sf = self.ln_sf_raw(x);
        if ln_sf == f64::NEG_INFINITY {
            return Err(Error::range(format!("survival function underflows at x = {x}")));
        }
        Ok((self.ln_pdf_raw(x) - ln_sf).exp())
    }

    /// Reversed hazard rate `f/F`.
    pub fn rhrf(&self, x: f64) -> Result<f64> {
        let cdf = self.cdf(x)?;
        if cdf <= 0.0 {
            return Err(Error::range(format!("CDF vanishes at x = {x}")));
        }
        Ok(self.pdf(x)? / cdf)
    }

    /// Cumulative hazard `−ln S`.
    pub fn chrf(&self, x: f64) -> Result<f64> {
        Ok(-self.ln_sf(x)?)
    }

    /// Inverse CDF. Requires a baseline with an explicit inverse survival
    /// function.
    ///
    /// With `t = 1 − ln(1 + u(α − 1))/ln α` (or `1 − u` when α = 1) the
    /// Harris relation inverts to `J̄^υ = t^υ/(c + c̄ t^υ)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if u == 1.0 {
            return Err(Error::UnboundedQuantile);
        }
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(format!("probability must lie in [0, 1), got {u}")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let FamilyParams { alpha, c, upsilon } = self.family;
        let ln_t = if self.family.is_alpha_limit() {
            (-u).ln_1p()
        } else if u < 0.5 {
            (-(u * (alpha - 1.0)).ln_1p() / alpha.ln()).ln_1p()
        } else {
            let t = -(-(1.0 - u) * (1.0 - 1.0 / alpha)).ln_1p() / alpha.ln();
            t.ln()
        };
        let e = (upsilon * ln_t).exp_m1();
        let ln_jbar = ln_t - ((1.0 - c) * e).ln_1p() / upsilon;
        self.baseline
            .quantile_from_ln_sf(ln_jbar)
            .ok_or_else(|| Error::domain("baseline has no explicit inverse"))
    }
}

pub fn aphg_cdf<B: Baseline + Clone>(x: f64, params: &FamilyParams, baseline: &B) -> Result<f64> {
    AphG::new(*params, baseline.clone()).cdf(x)
}

pub fn aphg_pdf<B: Baseline + Clone>(x: f64, params: &FamilyParams, baseline: &B) -> Result<f64> {
    AphG::new(*params, baseline.clone()).pdf(x)
}

pub fn aphg_sf<B: Baseline + Clone>(x: f64, params: &FamilyParams, baseline: &B) -> Result<f64> {
    AphG::new(*params, baseline.clone()).sf(x)
}

pub fn aphg_hrf<B: Baseline + Clone>(x: f64, params: &FamilyParams, baseline: &B) -> Result<f64> {
    AphG::new(*params, baseline.clone()).hrf(x)
}

pub fn aphg_rhrf<B: Baseline + Clone>(x: f64, params: &FamilyParams, baseline: &B) -> Result<f64> {
    AphG::new(*params, baseline.clone()).rhrf(x)
}

pub fn aphg_chrf<B: Baseline + Clone>(x: f64, params: &FamilyParams, baseline: &B) -> Result<f64> {
    AphG::new(*params, baseline.clone()).chrf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aphbxii::BurrXii;

    /// Unit exponential, used to check the family is baseline-agnostic.
    #[derive(Debug, Clone)]
    struct Exponential;

    impl Baseline for Exponential {
        fn cdf(&self, x: f64) -> f64 {
            -(-x).exp_m1()
        }
        fn pdf(&self, x: f64) -> f64 {
            (-x).exp()
        }
        fn params(&self) -> Vec<f64> {
            vec![1.0]
        }
    }

    fn burr(phi: f64, eta: f64) -> BurrXii {
        BurrXii::new(phi, eta).unwrap()
    }

    #[test]
    fn harris_with_c_one_is_the_baseline() {
        let b = burr(1.3, 0.7);
        for upsilon in [0.2, 1.0, 4.0] {
            for x in [0.0, 0.1, 1.0, 7.5] {
                let h = harris_cdf(x, 1.0, upsilon, &b).unwrap();
                assert!((h - b.cdf(x)).abs() < 1e-14, "{x} {upsilon}");
            }
        }
    }

    #[test]
    fn harris_at_zero_is_zero() {
        for (c, upsilon) in [(0.3, 0.5), (4.0, 2.0), (23.0, 0.003)] {
            assert_eq!(harris_cdf(0.0, c, upsilon, &burr(2.0, 1.0)).unwrap(), 0.0);
        }
    }

    #[test]
    fn identity_family_reproduces_the_baseline() {
        let d = AphG::new(FamilyParams::identity(), Exponential);
        for x in [0.01, 0.5, 3.0] {
            assert!((d.cdf(x).unwrap() - Exponential.cdf(x)).abs() < 1e-15);
            assert!((d.pdf(x).unwrap() - Exponential.pdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_burr_density_and_hazard() {
        let d = AphG::new(FamilyParams::identity(), burr(1.0, 1.0));
        assert!((d.pdf(1.0).unwrap() - 0.25).abs() < 1e-15);
        for (x, h) in [(0.0, 1.0), (1.0, 0.5), (4.0, 0.2)] {
            assert!((d.hrf(x).unwrap() - h).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_support_point_is_a_domain_error() {
        let d = AphG::new(FamilyParams::identity(), burr(1.0, 1.0));
        assert!(matches!(d.cdf(-0.1), Err(Error::Domain(_))));
        assert!(matches!(d.pdf(f64::NAN), Err(Error::Domain(_))));
        assert!(FamilyParams::new(0.0, 1.0, 1.0).is_err());
        assert!(FamilyParams::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn reversed_hazard_at_origin_is_a_range_error() {
        let d = AphG::new(FamilyParams::new(2.0, 0.5, 1.5).unwrap(), burr(1.0, 2.0));
        assert!(matches!(d.rhrf(0.0), Err(Error::Range(_))));
    }

    #[test]
    fn hazard_where_survival_underflows_is_a_range_error() {
        let d = AphG::new(FamilyParams::identity(), Exponential);
        assert!(matches!(d.hrf(1e6), Err(Error::Range(_))));
    }

    #[test]
    fn quantile_without_inverse_is_reported() {
        let d = AphG::new(FamilyParams::identity(), Exponential);
        assert!(d.quantile(0.5).is_err());
        assert!(matches!(d.quantile(1.0), Err(Error::UnboundedQuantile)));
    }

    #[test]
    fn tiny_upsilon_stays_finite() {
        let d = AphG::new(FamilyParams::new(10.552, 8.394, 0.003).unwrap(), burr(1.926, 1.419));
        for x in [0.01, 1.0, 7.89] {
            let lp = d.ln_pdf(x).unwrap();
            assert!(lp.is_finite(), "{x}: {lp}");
            let f = d.cdf(x).unwrap();
            assert!((0.0..=1.0).contains(&f));
        }
    }
}
