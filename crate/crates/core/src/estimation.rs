//! Maximum likelihood for APHBXII and its nested sub-models.
//!
//! Parameters are always handled in the full order `(α, c, υ, φ, η)`; a
//! [`ModelKind`] fixes some coordinates at 1 and frees the rest. Fitting runs
//! Nelder–Mead on `ln θ` inside the box `θ ∈ [1e-4, 1e4]` from a set of
//! deterministic and seeded random starts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::aphbxii::Aphbxii;
use crate::error::{Error, Result};
use crate::family::harris_parts;
use crate::numeric::{compensated_sum, softplus};
use crate::optimize::{nelder_mead, NelderMeadConfig};

pub const PARAMETER_NAMES: [&str; 5] = ["alpha", "c", "upsilon", "phi", "eta"];

/// Box on every free parameter.
pub const LOWER_BOUND: f64 = 1e-4;
pub const UPPER_BOUND: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Aphbxii,
    Hbxii,
    Apbxii,
    Mobxii,
    Bxii,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Aphbxii,
        ModelKind::Hbxii,
        ModelKind::Apbxii,
        ModelKind::Mobxii,
        ModelKind::Bxii,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Aphbxii => "APHBXII",
            ModelKind::Hbxii => "HBXII",
            ModelKind::Apbxii => "APBXII",
            ModelKind::Mobxii => "MOBXII",
            ModelKind::Bxii => "BXII",
        }
    }

    /// Which of `(α, c, υ, φ, η)` are estimated; the others are fixed at 1.
    pub fn free(self) -> [bool; 5] {
        match self {
            ModelKind::Aphbxii => [true, true, true, true, true],
            ModelKind::Hbxii => [false, true, true, true, true],
            ModelKind::Apbxii => [true, false, false, true, true],
            ModelKind::Mobxii => [false, true, false, true, true],
            ModelKind::Bxii => [false, false, false, true, true],
        }
    }

    /// Number of free parameters.
    pub fn k(self) -> usize {
        self.free().iter().filter(|f| **f).count()
    }

    pub fn free_names(self) -> Vec<&'static str> {
        PARAMETER_NAMES
            .iter()
            .zip(self.free())
            .filter_map(|(n, f)| f.then_some(*n))
            .collect()
    }

    /// Full vector from the free coordinates.
    pub fn expand(self, free: &[f64]) -> Result<[f64; 5]> {
        if free.len() != self.k() {
            return Err(Error::domain(format!(
                "{} has {} free parameters, got {}",
                self.name(),
                self.k(),
                free.len()
            )));
        }
        let mut full = [1.0; 5];
        let mut it = free.iter();
        for (slot, is_free) in full.iter_mut().zip(self.free()) {
            if is_free {
                *slot = *it.next().expect("length checked");
            }
        }
        Ok(full)
    }

    /// Free coordinates of a full vector.
    pub fn restrict(self, full: &[f64; 5]) -> Vec<f64> {
        full.iter()
            .zip(self.free())
            .filter_map(|(v, f)| f.then_some(*v))
            .collect()
    }

    /// Whether `self` is obtained from `other` by fixing parameters.
    pub fn nested_in(self, other: ModelKind) -> bool {
        self.free().iter().zip(other.free()).all(|(a, b)| !*a || b)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data("dataset is empty".into()));
    }
    if let Some((i, x)) = data.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Row {
            row: i + 1,
            message: format!("observation {x} is not a positive number"),
        });
    }
    Ok(())
}

/// `Σ ln f(x_i; θ)` for a full parameter vector; `-inf` for invalid `θ`.
pub fn loglik_full(data: &[f64], theta: &[f64; 5]) -> f64 {
    let Ok(d) = Aphbxii::from_slice(theta) else {
        return f64::NEG_INFINITY;
    };
    let value = compensated_sum(data.iter().map(|&x| d.ln_pdf_raw(x)));
    if value.is_nan() {
        f64::NEG_INFINITY
    } else {
        value
    }
}

/// Log-likelihood of `model` at its free coordinates `theta`.
pub fn loglik(data: &[f64], model: ModelKind, theta: &[f64]) -> Result<f64> {
    check_data(data)?;
    Ok(loglik_full(data, &model.expand(theta)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    /// `∂l/∂θ` in the order `(α, c, υ, φ, η)`.
    pub gradient: [f64; 5],
    pub provenance: [Provenance; 5],
}

/// `1/(α ln α) − 1/(α − 1)`, with its Taylor form near `α = 1`.
fn alpha_norm_derivative(alpha: f64) -> f64 {
    let e = alpha - 1.0;
    if e.abs() < 1e-4 {
        -0.5 + 5.0 * e / 12.0
    } else {
        1.0 / (alpha * alpha.ln()) - 1.0 / e
    }
}

/// Central difference step for coordinate value `v`.
fn fd_step(v: f64) -> f64 {
    (1e-6 * v.abs()).max(1e-6)
}

/// Gradient of the APHBXII log-likelihood.
///
/// `α`, `c` and `η` are differentiated analytically; `φ` and `υ` by central
/// differences.
pub fn score(data: &[f64], theta: &[f64; 5]) -> Result<Score> {
    check_data(data)?;
    let d = Aphbxii::from_slice(theta)?;
    let [alpha, c, upsilon, _phi, eta] = *theta;
    let c_bar = 1.0 - c;
    let ln_alpha = alpha.ln();
    let n = data.len() as f64;

    let mut sum_h = Vec::with_capacity(data.len());
    let mut d_c = Vec::with_capacity(data.len());
    let mut d_eta = Vec::with_capacity(data.len());
    for &x in data {
        let ln_a = softplus(d.baseline.phi * x.ln());
        let b = (-eta * upsilon * ln_a).exp();
        let dd = 1.0 - c_bar * b;
        let (ln_t, _) = harris_parts(-eta * ln_a, c.ln(), upsilon);
        let t = ln_t.exp();
        let b_over_d = b / dd;
        sum_h.push(-ln_t.exp_m1());
        d_c.push(
            1.0 / (upsilon * c) - (1.0 + 1.0 / upsilon) * b_over_d
                - ln_alpha * t * (1.0 / (upsilon * c) - b_over_d / upsilon),
        );
        d_eta.push(
            1.0 / eta - ln_a - (1.0 + upsilon) * c_bar * ln_a * b_over_d
                + ln_alpha * t * ln_a * (1.0 + c_bar * b_over_d),
        );
    }
    let d_alpha = n * alpha_norm_derivative(alpha) + compensated_sum(sum_h) / alpha;

    let numeric = |j: usize| {
        let h = fd_step(theta[j]);
        let mut up = *theta;
        let mut down = *theta;
        up[j] += h;
        down[j] -= h;
        (loglik_full(data, &up) - loglik_full(data, &down)) / (2.0 * h)
    };

    Ok(Score {
        gradient: [d_alpha, compensated_sum(d_c), numeric(2), numeric(3), compensated_sum(d_eta)],
        provenance: [
            Provenance::Analytic,
            Provenance::Analytic,
            Provenance::Numeric,
            Provenance::Numeric,
            Provenance::Analytic,
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of seeded log-uniform random starts.
    pub restarts: usize,
    /// Evaluation budget for each simplex run.
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Extra starting point as a full `(α, c, υ, φ, η)` vector.
    pub start: Option<[f64; 5]>,
    /// Fit BXII first and start the larger model from its estimates.
    pub warm_start: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 20_000,
            tolerance: 1e-10,
            seed: 20_240_611,
            start: None,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub n: usize,
    /// Estimates of the free parameters by name.
    pub estimates: BTreeMap<String, f64>,
    /// Full `(α, c, υ, φ, η)` vector with fixed coordinates at 1.
    pub theta: [f64; 5],
    /// Standard errors by name; `None` when the Hessian is not positive definite.
    pub standard_errors: Option<BTreeMap<String, f64>>,
    pub loglik: f64,
    pub neg2loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    /// Some estimate lies on the optimizer box.
    pub at_bound: bool,
}

impl FitResult {
    pub fn free_theta(&self) -> Vec<f64> {
        self.model.restrict(&self.theta)
    }
}

/// Log of the box edges.
fn log_bounds() -> (f64, f64) {
    (LOWER_BOUND.ln(), UPPER_BOUND.ln())
}

fn objective(data: &[f64], model: ModelKind, z: &[f64]) -> f64 {
    let (lo, hi) = log_bounds();
    if z.iter().any(|v| !(lo..=hi).contains(v)) {
        return f64::INFINITY;
    }
    let free: Vec<f64> = z.iter().map(|v| v.exp()).collect();
    match model.expand(&free) {
        Ok(full) => -loglik_full(data, &full),
        Err(_) => f64::INFINITY,
    }
}

fn clamp_log(z: &mut [f64]) {
    let (lo, hi) = log_bounds();
    for v in z {
        *v = v.clamp(lo, hi);
    }
}

struct RunOutcome {
    z: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn run_start(data: &[f64], model: ModelKind, start: &[f64], config: &FitConfig) -> RunOutcome {
    let obj = |z: &[f64]| objective(data, model, z);
    let mut nm = NelderMeadConfig {
        step: 0.5,
        max_evaluations: config.max_iter,
        f_tolerance: config.tolerance,
        x_tolerance: 1e-7,
    };
    let first = nelder_mead(obj, start, &nm);
    // A fresh simplex around the first optimum escapes premature collapse.
    nm.step = 0.05;
    let polish = nelder_mead(obj, &first.x, &nm);
    let (best, converged) = if polish.value <= first.value {
        (polish.x, polish.converged)
    } else {
        (first.x, first.converged)
    };
    RunOutcome {
        value: obj(&best),
        z: best,
        iterations: first.iterations + polish.iterations,
        converged,
    }
}

fn median(data: &[f64]) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    crate::numeric::quantile_sorted(&sorted, 0.5)
}

fn starting_points(data: &[f64], model: ModelKind, config: &FitConfig) -> Result<Vec<Vec<f64>>> {
    let to_log = |full: &[f64; 5]| -> Vec<f64> {
        let mut z: Vec<f64> = model.restrict(full).iter().map(|v| v.ln()).collect();
        clamp_log(&mut z);
        z
    };
    let mut starts = Vec::new();
    if let Some(start) = config.start {
        starts.push(to_log(&start));
    }
    // Burr XII with φ = 1 has median 2^{1/η} − 1.
    let m = median(data).max(1e-8);
    let eta0 = std::f64::consts::LN_2 / m.ln_1p();
    starts.push(to_log(&[1.0, 1.0, 1.0, 1.0, eta0]));
    if config.warm_start && model != ModelKind::Bxii {
        let base_config = FitConfig {
            start: None,
            restarts: config.restarts.min(4),
            ..config.clone()
        };
        if let Ok(base) = fit(data, ModelKind::Bxii, &base_config) {
            starts.push(to_log(&base.theta));
        }
    }
    let (lo, hi) = ((1e-2f64).ln(), (1e2f64).ln());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.restarts {
        starts.push((0..model.k()).map(|_| rng.random_range(lo..hi)).collect());
    }
    Ok(starts)
}

/// Central-difference Hessian of `−l` in the natural free coordinates.
fn hessian(data: &[f64], model: ModelKind, theta: &[f64]) -> Option<DMatrix<f64>> {
    let k = theta.len();
    let f = |p: &[f64]| -> f64 {
        model
            .expand(p)
            .map(|full| -loglik_full(data, &full))
            .unwrap_or(f64::INFINITY)
    };
    let h: Vec<f64> = theta
        .iter()
        .map(|v| (1e-4 * v.abs().max(1.0)).min(0.5 * v.abs()))
        .collect();
    let f0 = f(theta);
    let mut m = DMatrix::zeros(k, k);
    let shifted = |moves: &[(usize, f64)]| {
        let mut p = theta.to_vec();
        for &(i, s) in moves {
            p[i] += s * h[i];
        }
        f(&p)
    };
    for i in 0..k {
        let v = (shifted(&[(i, 1.0)]) - 2.0 * f0 + shifted(&[(i, -1.0)])) / (h[i] * h[i]);
        m[(i, i)] = v;
        for j in 0..i {
            let v = (shifted(&[(i, 1.0), (j, 1.0)]) - shifted(&[(i, 1.0), (j, -1.0)])
                - shifted(&[(i, -1.0), (j, 1.0)])
                + shifted(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m.iter().all(|v| v.is_finite()).then_some(m)
}

fn standard_errors(data: &[f64], model: ModelKind, theta: &[f64]) -> Option<BTreeMap<String, f64>> {
    let h = hessian(data, model, theta)?;
    let inverse = h.cholesky()?.inverse();
    let names = model.free_names();
    let mut out = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let v = inverse[(i, i)];
        if !(v.is_finite() && v >= 0.0) {
            return None;
        }
        out.insert(name.to_string(), v.sqrt());
    }
    Some(out)
}

/// Maximum likelihood fit of `model` to `data`.
pub fn fit(data: &[f64], model: ModelKind, config: &FitConfig) -> Result<FitResult> {
    check_data(data)?;
    let starts = starting_points(data, model, config)?;
    let total = starts.len();
    let outcomes: Vec<RunOutcome> = starts
        .par_iter()
        .map(|s| run_start(data, model, s, config))
        .collect();
    let (_, best) = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value.is_finite())
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .ok_or(Error::AllStartsFailed(total))?;

    let free: Vec<f64> = best.z.iter().map(|v| v.exp()).collect();
    let theta = model.expand(&free)?;
    let (lo, hi) = log_bounds();
    let at_bound = best.z.iter().any(|v| *v - lo < 1e-3 || hi - *v < 1e-3);
    let loglik = -best.value;
    let estimates = model
        .free_names()
        .iter()
        .zip(&free)
        .map(|(n, v)| (n.to_string(), *v))
        .collect();
    Ok(FitResult {
        model,
        n: data.len(),
        estimates,
        theta,
        standard_errors: standard_errors(data, model, &free),
        loglik,
        neg2loglik: -2.0 * loglik,
        converged: best.converged,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        restarts: total,
        at_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Likelihood ratio test of `reduced` against the larger `full` model.
pub fn lr_test(full: &FitResult, reduced: &FitResult, df: usize) -> Result<LrTest> {
    if df == 0 {
        return Err(Error::domain("degrees of freedom must be positive"));
    }
    let statistic = reduced.neg2loglik - full.neg2loglik;
    if statistic < -1e-6 {
        return Err(Error::Inconsistent(format!(
            "{} fits worse than the nested {} by {:.6}",
            full.model, reduced.model, -statistic
        )));
    }
    let statistic = statistic.max(0.0);
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::domain(e.to_string()))?;
    let p_value = if statistic == 0.0 { 1.0 } else { chi.sf(statistic) };
    Ok(LrTest {
        statistic,
        df,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_masks() {
        let ks: Vec<usize> = ModelKind::ALL.iter().map(|m| m.k()).collect();
        assert_eq!(ks, vec![5, 4, 3, 3, 2]);
        assert_eq!(ModelKind::Bxii.expand(&[2.0, 3.0]).unwrap(), [1.0, 1.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            ModelKind::Mobxii.expand(&[7.0, 2.0, 3.0]).unwrap(),
            [1.0, 7.0, 1.0, 2.0, 3.0]
        );
        assert!(ModelKind::Bxii.expand(&[1.0]).is_err());
        assert!(ModelKind::Mobxii.nested_in(ModelKind::Hbxii));
        assert!(!ModelKind::Apbxii.nested_in(ModelKind::Hbxii));
        assert_eq!("mobxii".parse::<ModelKind>().unwrap(), ModelKind::Mobxii);
        assert!(matches!("weibull".parse::<ModelKind>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn unit_loglik() {
        let l = loglik(&[1.0], ModelKind::Aphbxii, &[1.0; 5]).unwrap();
        assert!((l - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_give_negative_infinity() {
        assert_eq!(loglik(&[1.0], ModelKind::Bxii, &[-1.0, 1.0]).unwrap(), f64::NEG_INFINITY);
        assert!(loglik(&[], ModelKind::Bxii, &[1.0, 1.0]).is_err());
        assert!(matches!(
            loglik(&[1.0, -2.0], ModelKind::Bxii, &[1.0, 1.0]),
            Err(Error::Row { row: 2, .. })
        ));
    }

    #[test]
    fn nested_densities_match_closed_forms() {
        let (alpha, c, upsilon, phi, eta): (f64, f64, f64, f64, f64) = (2.3, 3.1, 0.7, 1.4, 0.9);
        let burr = |x: f64, e: f64| phi * e * x.powf(phi - 1.0) * (1.0 + x.powf(phi)).powf(-e - 1.0);
        let jbar = |x: f64| (1.0f64 + x.powf(phi)).powf(-eta);
        for x in [0.2, 1.0, 3.5] {
            let bxii = loglik(&[x], ModelKind::Bxii, &[phi, eta]).unwrap();
            assert!((bxii - burr(x, eta).ln()).abs() < 1e-12);

            let mo = c * burr(x, eta) / (1.0 - (1.0 - c) * jbar(x)).powi(2);
            let got = loglik(&[x], ModelKind::Mobxii, &[c, phi, eta]).unwrap();
            assert!((got - mo.ln()).abs() < 1e-12);

            let h = c.powf(1.0 / upsilon) * burr(x, eta)
                / (1.0 - (1.0 - c) * jbar(x).powf(upsilon)).powf(1.0 + 1.0 / upsilon);
            let got = loglik(&[x], ModelKind::Hbxii, &[c, upsilon, phi, eta]).unwrap();
            assert!((got - h.ln()).abs() < 1e-12);

            let big_j = 1.0 - jbar(x);
            let ap = alpha.ln() / (alpha - 1.0) * burr(x, eta) * alpha.powf(big_j);
            let got = loglik(&[x], ModelKind::Apbxii, &[alpha, phi, eta]).unwrap();
            assert!((got - ap.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn score_matches_finite_differences() {
        let data = [0.3, 0.9, 1.4, 2.2, 5.0, 0.05];
        let theta = [2.2, 0.6, 1.5, 1.2, 1.8];
        let s = score(&data, &theta).unwrap();
        for j in [0, 1, 4] {
            // Five-point stencil for an independent estimate.
            let h = 1e-3 * theta[j];
            let at = |k: f64| {
                let mut p = theta;
                p[j] += k * h;
                loglik_full(&data, &p)
            };
            let fd = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
            assert!((s.gradient[j] - fd).abs() <= 1e-7 * fd.abs().max(1.0), "{j}: {} vs {fd}", s.gradient[j]);
        }
        assert_eq!(s.provenance[3], Provenance::Numeric);
    }

    #[test]
    fn score_near_alpha_one() {
        let data = [0.3, 0.9, 1.4];
        for alpha in [1.0, 1.0 + 1e-6, 1.0 - 5e-5] {
            let theta = [alpha, 0.8, 1.3, 1.1, 2.0];
            let s = score(&data, &theta).unwrap();
            let h = 1e-3;
            let mut up = theta;
            let mut down = theta;
            up[0] += h;
            down[0] -= h;
            let fd = (loglik_full(&data, &up) - loglik_full(&data, &down)) / (2.0 * h);
            assert!((s.gradient[0] - fd).abs() < 1e-5, "{alpha}");
        }
    }

    #[test]
    fn lr_test_cases() {
        let data = [0.5, 1.0, 2.0];
        let mut a = fit(&data, ModelKind::Bxii, &FitConfig::default()).unwrap();
        let same = lr_test(&a, &a, 1).unwrap();
        assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
        let mut b = a.clone();
        b.neg2loglik -= 1.0;
        assert!(matches!(lr_test(&a, &b, 1), Err(Error::Inconsistent(_))));
        a.neg2loglik -= 2.0;
        assert!(lr_test(&a, &b, 0).is_err());
    }

    #[test]
    fn lr_p_value_at_critical_point() {
        let base = fit(&[0.5, 1.0, 2.0], ModelKind::Bxii, &FitConfig::default()).unwrap();
        let mut full = base.clone();
        full.neg2loglik = base.neg2loglik - 3.841_458_820_694_124;
        let t = lr_test(&full, &base, 1).unwrap();
        assert!((t.p_value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn fit_is_deterministic_and_recovers_burr() {
        let truth = Aphbxii::from_params(1.0, 1.0, 1.0, 1.5, 2.0).unwrap();
        let data = truth.sample(2000, 5).unwrap();
        let cfg = FitConfig {
            restarts: 4,
            ..FitConfig::default()
        };
        let a = fit(&data, ModelKind::Bxii, &cfg).unwrap();
        let b = fit(&data, ModelKind::Bxii, &cfg).unwrap();
        assert_eq!(a, b);
        assert!((a.theta[3] - 1.5).abs() < 0.1 && (a.theta[4] - 2.0).abs() < 0.2);
        let se = a.standard_errors.as_ref().unwrap();
        assert!(se["phi"] > 0.0 && se["phi"] < 0.1);
        assert!(a.converged && !a.at_bound);
    }
}
