//! Goodness-of-fit statistics and model ranking.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::aphbxii::Aphbxii;
use crate::error::{Error, Result};
use crate::estimation::FitResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub caic: f64,
}

pub fn information_criteria(neg2loglik: f64, k: usize, n: usize) -> Result<InformationCriteria> {
    if n <= k + 1 {
        return Err(Error::domain(format!(
            "CAIC needs n > k + 1 (n = {n}, k = {k})"
        )));
    }
    let (kf, nf) = (k as f64, n as f64);
    let aic = neg2loglik + 2.0 * kf;
    Ok(InformationCriteria {
        aic,
        bic: neg2loglik + kf * nf.ln(),
        hqic: neg2loglik + 2.0 * kf * nf.ln().ln(),
        caic: aic + 2.0 * kf * (kf + 1.0) / (nf - kf - 1.0),
    })
}

/// Which Cramér–von Mises / Anderson–Darling pair a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdfVariant {
    /// `W²` and `A²` on the probability-integral transforms.
    Classical,
    /// `W²(1 + 0.5/n)` and `A²(1 + 0.75/n + 2.25/n²)`.
    Modified,
    /// The modified statistics after a normal transform of the
    /// probability-integral transforms, standardized by their sample mean and
    /// standard deviation.
    #[default]
    NormalTransformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStatistics {
    pub cvm: f64,
    pub ad: f64,
    pub cvm_modified: f64,
    pub ad_modified: f64,
    /// `None` when fewer than two observations or the transformed values are constant.
    pub cvm_normal: Option<f64>,
    pub ad_normal: Option<f64>,
}

impl EdfStatistics {
    pub fn select(&self, variant: EdfVariant) -> Option<(f64, f64)> {
        match variant {
            EdfVariant::Classical => Some((self.cvm, self.ad)),
            EdfVariant::Modified => Some((self.cvm_modified, self.ad_modified)),
            EdfVariant::NormalTransformed => self.cvm_normal.zip(self.ad_normal),
        }
    }
}

fn probability_transforms<F: Fn(f64) -> Result<f64>>(data: &[f64], cdf: F) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::Data("empty sample".into()));
    }
    let mut u = data.iter().map(|&x| cdf(x)).collect::<Result<Vec<_>>>()?;
    u.sort_by(f64::total_cmp);
    Ok(u)
}

fn classical_from_sorted(u: &[f64]) -> Result<(f64, f64)> {
    if let Some(bad) = u.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::range(format!(
            "probability integral transform {bad} is not inside (0, 1)"
        )));
    }
    let n = u.len();
    let nf = n as f64;
    let mut w2 = 1.0 / (12.0 * nf);
    let mut s = 0.0;
    for i in 0..n {
        let m = (2 * i + 1) as f64;
        w2 += (u[i] - m / (2.0 * nf)).powi(2);
        s += m * (u[i].ln() + (-u[n - 1 - i]).ln_1p());
    }
    Ok((w2, -nf - s / nf))
}

fn modify(w2: f64, a2: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    (
        w2 * (1.0 + 0.5 / nf),
        a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf)),
    )
}

/// EDF statistics of `data` against the distribution function `cdf`.
pub fn edf_statistics<F: Fn(f64) -> Result<f64>>(data: &[f64], cdf: F) -> Result<EdfStatistics> {
    let u = probability_transforms(data, cdf)?;
    let n = u.len();
    let (cvm, ad) = classical_from_sorted(&u)?;
    let (cvm_modified, ad_modified) = modify(cvm, ad, n);

    let mut normal = None;
    if n >= 2 {
        let std_normal = Normal::standard();
        let z: Vec<f64> = u.iter().map(|&v| std_normal.inverse_cdf(v)).collect();
        let nf = n as f64;
        let mean = z.iter().sum::<f64>() / nf;
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
        if sd > 0.0 && sd.is_finite() {
            let v: Vec<f64> = z.iter().map(|&zi| std_normal.cdf((zi - mean) / sd)).collect();
            let (w2, a2) = classical_from_sorted(&v)?;
            normal = Some(modify(w2, a2, n));
        }
    }
    Ok(EdfStatistics {
        cvm,
        ad,
        cvm_modified,
        ad_modified,
        cvm_normal: normal.map(|p| p.0),
        ad_normal: normal.map(|p| p.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
}

/// Asymptotic upper tail `P(K > λ)` of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.0 {
        // Theta-function form: converges in a handful of terms for small λ.
        let k = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for j in 1..100 {
            let m = (2 * j - 1) as f64;
            let term = (-m * m * k).exp();
            cdf += term;
            if term < 1e-16 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf
    } else {
        let mut sum = 0.0;
        for j in 1..100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-10 {
                break;
            }
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

pub fn ks_statistic<F: Fn(f64) -> Result<f64>>(data: &[f64], cdf: F) -> Result<KsResult> {
    let u = probability_transforms(data, cdf)?;
    let nf = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / nf - v).max(v - i as f64 / nf))
        .fold(0.0, f64::max);
    Ok(KsResult {
        d,
        p_value: kolmogorov_sf(nf.sqrt() * d),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub neg2loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub caic: f64,
    pub cvm: f64,
    pub ad: f64,
    pub ks: f64,
    pub ks_pvalue: f64,
    pub k: usize,
    pub n: usize,
    pub edf_variant: EdfVariant,
}

impl GofReport {
    pub fn new<F: Fn(f64) -> Result<f64> + Copy>(
        data: &[f64],
        neg2loglik: f64,
        k: usize,
        cdf: F,
        variant: EdfVariant,
    ) -> Result<Self> {
        let ic = information_criteria(neg2loglik, k, data.len())?;
        let edf = edf_statistics(data, cdf)?;
        let (cvm, ad) = edf
            .select(variant)
            .ok_or_else(|| Error::range("normal-transformed EDF statistics need n >= 2"))?;
        let ks = ks_statistic(data, cdf)?;
        Ok(Self {
            neg2loglik,
            aic: ic.aic,
            bic: ic.bic,
            hqic: ic.hqic,
            caic: ic.caic,
            cvm,
            ad,
            ks: ks.d,
            ks_pvalue: ks.p_value,
            k,
            n: data.len(),
            edf_variant: variant,
        })
    }

    pub fn from_fit(data: &[f64], fit: &FitResult, variant: EdfVariant) -> Result<Self> {
        let d = Aphbxii::from_slice(&fit.theta)?;
        Self::new(data, fit.neg2loglik, fit.model.k(), |x| d.cdf(x), variant)
    }

    /// The nine metrics in table order.
    pub fn metrics(&self) -> [f64; 9] {
        [
            self.neg2loglik,
            self.aic,
            self.bic,
            self.hqic,
            self.caic,
            self.cvm,
            self.ad,
            self.ks,
            self.ks_pvalue,
        ]
    }
}

pub const METRIC_NAMES: [&str; 9] = [
    "neg2loglik", "aic", "bic", "hqic", "caic", "cvm", "ad", "ks", "ks_pvalue",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeagueRow {
    pub label: String,
    /// Competition rank (1 = best) of each metric.
    pub ranks: [usize; 9],
    pub rank_sum: usize,
}

/// Ranks models on each metric (lower is better except the KS p-value) and
/// orders them by rank sum, ties kept in input order.
pub fn league_table(entries: &[(String, GofReport)]) -> Vec<LeagueRow> {
    let metrics: Vec<[f64; 9]> = entries.iter().map(|(_, r)| r.metrics()).collect();
    let mut rows: Vec<LeagueRow> = entries
        .iter()
        .enumerate()
        .map(|(i, (label, _))| {
            let mut ranks = [0; 9];
            for (m, rank) in ranks.iter_mut().enumerate() {
                let mine = metrics[i][m];
                let better = |other: f64| if m == 8 { other > mine } else { other < mine };
                *rank = 1 + metrics.iter().filter(|o| better(o[m])).count();
            }
            LeagueRow {
                label: label.clone(),
                ranks,
                rank_sum: ranks.iter().sum(),
            }
        })
        .collect();
    rows.sort_by_key(|r| r.rank_sum);
    rows
}
