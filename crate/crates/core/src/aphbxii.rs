//! Burr XII baseline and the five-parameter APHBXII distribution.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{AphG, Baseline, FamilyParams};
use crate::numeric::{ln_expm1, softplus};

/// Burr XII with CDF `1 − (1 + x^φ)^{−η}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurrXii {
    pub phi: f64,
    pub eta: f64,
}

impl BurrXii {
    pub fn new(phi: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("phi", phi), ("eta", eta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { phi, eta })
    }

    /// `ln(1 + x^φ)`.
    #[inline]
    fn ln_a(&self, x: f64) -> f64 {
        softplus(self.phi * x.ln())
    }
}

impl Baseline for BurrXii {
    fn cdf(&self, x: f64) -> f64 {
        -(-self.eta * self.ln_a(x)).exp_m1()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn ln_sf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        -self.eta * self.ln_a(x)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return match self.phi.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => self.eta.ln(),
                _ => f64::NEG_INFINITY,
            };
        }
        if x.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let ln_x = x.ln();
        self.phi.ln() + self.eta.ln() + (self.phi - 1.0) * ln_x
            - (self.eta + 1.0) * softplus(self.phi * ln_x)
    }

    fn quantile_from_ln_sf(&self, ln_sf: f64) -> Option<f64> {
        Some((ln_expm1(-ln_sf / self.eta) / self.phi).exp())
    }

    fn params(&self) -> Vec<f64> {
        vec![self.phi, self.eta]
    }

    fn moment_limit(&self) -> f64 {
        self.phi * self.eta
    }

    fn density_power_integrable(&self, rho: f64) -> bool {
        rho * (self.phi - 1.0) > -1.0 && rho * (self.phi * self.eta + 1.0) > 1.0
    }
}

fn check_support(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("support point must be >= 0, got {x}")));
    }
    Ok(())
}

pub fn burrxii_cdf(x: f64, params: &BurrXii) -> Result<f64> {
    check_support(x)?;
    Ok(params.cdf(x))
}

pub fn burrxii_pdf(x: f64, params: &BurrXii) -> Result<f64> {
    check_support(x)?;
    Ok(params.pdf(x))
}

/// APHBXII: the family over a Burr XII baseline, parameters ℵ = (α, c, υ, φ, η).
pub type Aphbxii = AphG<BurrXii>;

impl Aphbxii {
    pub fn from_params(alpha: f64, c: f64, upsilon: f64, phi: f64, eta: f64) -> Result<Self> {
        Ok(AphG::new(
            FamilyParams::new(alpha, c, upsilon)?,
            BurrXii::new(phi, eta)?,
        ))
    }

    /// Builds from `[α, c, υ, φ, η]`.
    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        match theta {
            [alpha, c, upsilon, phi, eta] => Self::from_params(*alpha, *c, *upsilon, *phi, *eta),
            _ => Err(Error::domain(format!(
                "expected 5 parameters, got {}",
                theta.len()
            ))),
        }
    }

    /// `[α, c, υ, φ, η]`.
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.family.alpha,
            self.family.c,
            self.family.upsilon,
            self.baseline.phi,
            self.baseline.eta,
        ]
    }

    pub fn quantile_summary(&self) -> Result<QuantileSummary> {
        QuantileSummary::from_quantile(|u| self.quantile(u))
    }

    /// `n` draws by inverse transform from a ChaCha8 stream seeded with `seed`.
    ///
    /// Uniforms come from `rand_chacha` 0.9 `ChaCha8Rng::seed_from_u64` through
    /// the `Open01` distribution of `rand` 0.9; streams are stable while
    /// those versions are pinned.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            })
            .collect()
    }
}

/// Quartiles with the Galton skewness and Moors kurtosis coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub galton_s: f64,
    pub moors_k: f64,
}

impl QuantileSummary {
    pub fn from_quantile<F: Fn(f64) -> Result<f64>>(quantile: F) -> Result<Self> {
        let mut octile = [0.0; 8];
        for (i, q) in octile.iter_mut().enumerate().skip(1) {
            *q = quantile(i as f64 / 8.0)?;
        }
        let spread = octile[6] - octile[2];
        Ok(Self {
            q1: octile[2],
            q2: octile[4],
            q3: octile[6],
            galton_s: (octile[6] - 2.0 * octile[4] + octile[2]) / spread,
            moors_k: (octile[7] - octile[5] + octile[3] - octile[1]) / spread,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::harris_cdf;
    use crate::quadrature::{integrate, Tolerance};
    use proptest::prelude::*;

    /// Rows `(c, η, φ, q1, q2, q3, K, S)` at α = 0.5, υ = 1.2.
    const QUANTILE_TABLE: [[f64; 8]; 10] = [
        [0.3, 0.3, 1.2, 0.3290, 0.9550, 3.6196, 4.0068, 0.6195],
        [0.5, 0.5, 1.5, 0.4029, 0.9049, 2.2821, 2.2964, 0.4657],
        [0.8, 0.8, 2.0, 0.4951, 0.8729, 1.5771, 1.6170, 0.3017],
        [1.2, 1.2, 2.5, 0.5580, 0.8494, 1.2738, 1.3910, 0.1858],
        [2.0, 2.0, 3.5, 0.6418, 0.8373, 1.0589, 1.2880, 0.0625],
        [2.5, 2.5, 3.8, 0.6555, 0.8254, 1.0052, 1.2787, 0.0281],
        [4.0, 4.0, 5.0, 0.7059, 0.8219, 0.9298, 1.2888, -0.0361],
        [4.5, 4.5, 5.8, 0.7356, 0.8346, 0.9237, 1.2975, -0.0529],
        [5.5, 5.5, 7.0, 0.7672, 0.8462, 0.9146, 1.3117, -0.0726],
        [10.0, 10.0, 10.0, 0.8095, 0.8562, 0.8944, 1.3466, -0.1018],
    ];

    #[test]
    fn burr_unit_values() {
        let b = BurrXii::new(1.0, 1.0).unwrap();
        assert_eq!(burrxii_cdf(1.0, &b).unwrap(), 0.5);
        assert!((burrxii_pdf(1.0, &b).unwrap() - 0.25).abs() < 1e-15);
        assert!(burrxii_cdf(-1.0, &b).is_err());
    }

    #[test]
    fn burr_far_tail() {
        // φη ≈ 0.54, so the survival function decays like x^{-0.54}.
        let b = BurrXii::new(2.336, 0.232).unwrap();
        let want = 1.0 - (1.0 + 1e6f64.powf(2.336)).powf(-0.232);
        assert!((burrxii_cdf(1e6, &b).unwrap() - want).abs() < 1e-15);
        assert!(burrxii_cdf(1e30, &b).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn quantile_table_rows() {
        for row in QUANTILE_TABLE {
            let d = Aphbxii::from_params(0.5, row[0], 1.2, row[2], row[1]).unwrap();
            let s = d.quantile_summary().unwrap();
            let got = [s.q1, s.q2, s.q3, s.moors_k, s.galton_s];
            for (g, want) in got.iter().zip(&row[3..]) {
                assert!((g - want).abs() <= 5e-4, "row {row:?}: {got:?}");
            }
        }
    }

    #[test]
    fn median_of_first_quantile_row() {
        let d = Aphbxii::from_params(0.5, 0.3, 1.2, 1.2, 0.3).unwrap();
        assert!((d.cdf(0.9550).unwrap() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn quantile_at_zero_and_one() {
        let d = Aphbxii::from_params(2.0, 0.5, 1.5, 1.0, 2.0).unwrap();
        assert_eq!(d.quantile(0.0).unwrap(), 0.0);
        assert!(matches!(d.quantile(1.0), Err(Error::UnboundedQuantile)));
        assert!(matches!(d.quantile(-0.1), Err(Error::Domain(_))));
        assert!(matches!(d.quantile(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn quantile_reduces_to_burr() {
        let (phi, eta) = (1.7, 0.8);
        let d = Aphbxii::from_params(1.0, 1.0, 1.0, phi, eta).unwrap();
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let want = ((1.0 - u).powf(-1.0 / eta) - 1.0).powf(1.0 / phi);
            let got = d.quantile(u).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{u}");
        }
    }

    #[test]
    fn alpha_limit_is_continuous() {
        let b = BurrXii::new(1.2, 1.8).unwrap();
        let at = |alpha: f64| AphG::new(FamilyParams::new(alpha, 0.6, 1.5).unwrap(), b);
        for x in [0.1, 0.7, 2.0, 10.0] {
            let base_cdf = at(1.0).cdf(x).unwrap();
            let base_pdf = at(1.0).pdf(x).unwrap();
            for alpha in [1.0 - 1e-6, 1.0 + 1e-6] {
                assert!((at(alpha).cdf(x).unwrap() - base_cdf).abs() < 1e-6);
                assert!((at(alpha).pdf(x).unwrap() - base_pdf).abs() < 1e-6);
            }
            for side in [-1.0, 1.0] {
                let inside = at(1.0 + side * 0.99e-8);
                let outside = at(1.0 + side * 1.01e-8);
                assert!(inside.family.is_alpha_limit() && !outside.family.is_alpha_limit());
                assert!((inside.cdf(x).unwrap() - outside.cdf(x).unwrap()).abs() < 1e-8);
                assert!((inside.pdf(x).unwrap() - outside.pdf(x).unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn marshall_olkin_case_matches_integrated_density() {
        let (c, phi, eta) = (7.668, 0.786, 3.837);
        let b = BurrXii::new(phi, eta).unwrap();
        let mo_pdf = |x: f64| {
            let a = 1.0 + x.powf(phi);
            c * phi * eta * x.powf(phi - 1.0) * a.powf(-eta - 1.0)
                / (1.0 - (1.0 - c) * a.powf(-eta)).powi(2)
        };
        for x in [0.05, 0.3, 1.0, 2.5, 8.0] {
            let oracle = integrate(mo_pdf, 0.0, x, Tolerance::relative(1e-12)).unwrap().value;
            let got = harris_cdf(x, c, 1.0, &b).unwrap();
            assert!((got - oracle).abs() < 1e-9, "{x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn reduction_lattice_closed_forms() {
        let (phi, eta) = (1.3, 2.1);
        let b = BurrXii::new(phi, eta).unwrap();
        let (alpha, c, upsilon) = (2.7, 0.45, 1.8);
        let harris = |x: f64, c: f64, v: f64| {
            let jbar = (1.0 + x.powf(phi)).powf(-eta);
            1.0 - c.powf(1.0 / v) * jbar / (1.0 - (1.0 - c) * jbar.powf(v)).powf(1.0 / v)
        };
        let apt = |h: f64, a: f64| (a.powf(h) - 1.0) / (a - 1.0);
        for i in 1..=50 {
            let x = i as f64 * 0.1;
            let j = b.cdf(x);
            let cases = [
                (1.0, 1.0, upsilon, j),
                (1.0, c, upsilon, harris(x, c, upsilon)),
                (alpha, 1.0, upsilon, apt(j, alpha)),
                (alpha, c, upsilon, apt(harris(x, c, upsilon), alpha)),
            ];
            for (a, cc, v, want) in cases {
                let got = AphG::new(FamilyParams::new(a, cc, v).unwrap(), b).cdf(x).unwrap();
                assert!((got - want).abs() <= 1e-10, "{a} {cc} {v} {x}");
            }
        }
    }

    #[derive(Debug, Clone)]
    struct Uniform02;

    impl Baseline for Uniform02 {
        fn cdf(&self, x: f64) -> f64 {
            (x / 2.0).min(1.0)
        }
        fn pdf(&self, x: f64) -> f64 {
            if x <= 2.0 {
                0.5
            } else {
                0.0
            }
        }
        fn quantile_from_ln_sf(&self, ln_sf: f64) -> Option<f64> {
            Some(-2.0 * ln_sf.exp_m1())
        }
        fn params(&self) -> Vec<f64> {
            vec![]
        }
    }

    #[test]
    fn symmetric_distribution_has_zero_galton_skewness() {
        let d = AphG::new(FamilyParams::identity(), Uniform02);
        let s = QuantileSummary::from_quantile(|u| d.quantile(u)).unwrap();
        assert!(s.galton_s.abs() < 1e-12);
        assert!((s.q2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = Aphbxii::from_params(1.8, 0.8, 2.5, 1.0, 2.5).unwrap();
        let a = d.sample(100, 7).unwrap();
        let b = d.sample(100, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d.sample(100, 8).unwrap());
        assert!(d.sample(0, 7).is_err());
    }

    #[test]
    fn sample_median_tracks_quantile() {
        let d = Aphbxii::from_params(1.8, 0.8, 2.5, 1.0, 2.5).unwrap();
        let mut xs = d.sample(100_000, 11).unwrap();
        xs.sort_by(f64::total_cmp);
        let median = crate::numeric::quantile_sorted(&xs, 0.5);
        assert!((median - d.quantile(0.5).unwrap()).abs() < 0.02);
    }

    fn params_strategy() -> impl Strategy<Value = Aphbxii> {
        (0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64)
            .prop_map(|(a, c, v, p, e)| Aphbxii::from_params(a, c, v, p, e).unwrap())
    }

    proptest! {
        #[test]
        fn quantile_round_trip(d in params_strategy(), u in 0.0..0.999_999f64) {
            let x = d.quantile(u).unwrap();
            prop_assert!((d.cdf(x).unwrap() - u).abs() <= 1e-9);
        }

        #[test]
        fn quantile_is_monotone(d in params_strategy(), u1 in 0.0..0.999f64, du in 0.0..0.001f64) {
            prop_assert!(d.quantile(u1).unwrap() <= d.quantile(u1 + du).unwrap());
        }

        #[test]
        fn cdf_is_monotone_and_complements_sf(d in params_strategy(), x0 in 0.0..5.0f64) {
            let mut prev = 0.0;
            for i in 0..1000 {
                let x = x0 + i as f64 * 0.01;
                let f = d.cdf(x).unwrap();
                prop_assert!(f >= prev);
                prev = f;
            }
            let x = x0 + 0.5;
            prop_assert!((d.sf(x).unwrap() + d.cdf(x).unwrap() - 1.0).abs() <= 1e-12);
            let s = d.sf(x).unwrap();
            if s > 0.0 {
                prop_assert!((d.chrf(x).unwrap() + s.ln()).abs() <= 1e-12 * s.ln().abs().max(1.0));
            }
        }
    }
}
