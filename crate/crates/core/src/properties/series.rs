//! Mixture-series representation of the APHBXII density.
//!
//! Expanding `α^H = Σ_i (ln α)^i H^i / i!`, then `H^i = (1 − T)^i`, then the
//! Harris denominator with the generalized binomial theorem writes the density
//! as a signed mixture of Burr XII densities,
//!
//! ```text
//! f(x) = Σ_{i,j,k} w_{ijk} g(x; φ, η(1 + j + υk)),
//! w_{ijk} = (ln α/(α−1)) (ln α)^i/i! C(i,j)(−1)^j c^{(1+j)/υ} c̄^k
//!           C((1+j)/υ + k, k) / (1 + j + υk).
//! ```
//!
//! The last expansion needs `|c̄| < 1`. The weights are normalized so that
//! each `g` is a proper density; they sum to one.

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::ln_gamma;

use super::raw_moment;
use crate::aphbxii::Aphbxii;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Relative size below which a truncated tail is considered negligible.
const TAIL_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_TERM_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub weight: f64,
    /// Shape `η(1 + j + υk)` of the component Burr XII density.
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub phi: f64,
    pub terms: Vec<SeriesTerm>,
    /// Number of `i` and `k` indices retained.
    pub i_terms: usize,
    pub k_terms: usize,
    /// Both truncations met their tail bound before the caps.
    pub converged: bool,
}

/// `ln C(a + k, k)` for real `a > −1`.
fn ln_binom_real(a: f64, k: usize) -> f64 {
    ln_gamma(a + k as f64 + 1.0) - ln_gamma(a + 1.0) - ln_gamma(k as f64 + 1.0)
}

impl SeriesExpansion {
    pub fn new(d: &Aphbxii, cap: usize) -> Result<Self> {
        let [alpha, c, upsilon, phi, eta] = d.to_array();
        let c_bar = 1.0 - c;
        if c_bar.abs() >= 1.0 {
            return Err(Error::OutsideConvergenceRegion(c));
        }
        let cap = cap.max(1);
        let limit = d.family.is_alpha_limit();
        let ln_alpha = if limit { 0.0 } else { alpha.ln() };
        let norm = d.family.alpha_norm();

        let mut terms = Vec::new();
        let mut converged = true;
        let mut i_terms = 0;
        let mut k_terms = 0;
        let mut i_factor = 1.0; // (ln α)^i / i!
        let mut accumulated = 0.0;
        for i in 0..cap {
            if i > 0 {
                i_factor *= ln_alpha / i as f64;
            }
            i_terms = i + 1;
            let mut binom_ij = 1.0; // C(i, j)
            let mut i_sum = 0.0;
            for j in 0..=i {
                if j > 0 {
                    binom_ij *= (i + 1 - j) as f64 / j as f64;
                }
                let m = (1.0 + j as f64) / upsilon;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let lead = norm * i_factor * binom_ij * sign * c.powf(m);
                if lead == 0.0 {
                    continue;
                }
                let mut peak = 0.0f64;
                let mut k_done = false;
                for k in 0..cap {
                    let coeff = if c_bar == 0.0 {
                        if k == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        c_bar.powi(k as i32) * ln_binom_real(m, k).exp()
                    };
                    let spread = 1.0 + j as f64 + upsilon * k as f64;
                    let weight = lead * coeff / spread;
                    if weight != 0.0 {
                        terms.push(SeriesTerm {
                            i,
                            j,
                            k,
                            weight,
                            eta: eta * spread,
                        });
                        i_sum += weight;
                    }
                    k_terms = k_terms.max(k + 1);
                    let magnitude = coeff.abs();
                    peak = peak.max(magnitude);
                    // Ratio of consecutive coefficients tends to |c̄|; bound the
                    // remaining tail geometrically once it has dropped below 1.
                    let ratio = c_bar.abs() * (m + k as f64 + 1.0) / (k as f64 + 1.0);
                    if magnitude == 0.0
                        || (ratio < 1.0 && magnitude * ratio / (1.0 - ratio) < TAIL_TOLERANCE * peak)
                    {
                        k_done = true;
                        break;
                    }
                }
                converged &= k_done;
            }
            accumulated += i_sum;
            let next = (i_factor * ln_alpha / (i + 1) as f64).abs();
            if next < TAIL_TOLERANCE * accumulated.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            if i + 1 == cap {
                converged = false;
            }
        }
        Ok(Self {
            phi,
            terms,
            i_terms,
            k_terms,
            converged,
        })
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).collect::<CompensatedSum>().value()
    }

    /// Density as the weighted sum of Burr XII components.
    pub fn pdf(&self, x: f64) -> f64 {
        let phi = self.phi;
        self.terms
            .iter()
            .map(|t| {
                let a = 1.0 + x.powf(phi);
                t.weight * phi * t.eta * x.powf(phi - 1.0) * a.powf(-t.eta - 1.0)
            })
            .collect::<CompensatedSum>()
            .value()
    }

    /// `μ'_r = Σ w η' B(r/φ + 1, η' − r/φ)`.
    pub fn raw_moment(&self, r: u32) -> f64 {
        let a = r as f64 / self.phi + 1.0;
        self.terms
            .iter()
            .map(|t| t.weight * t.eta * ln_beta(a, t.eta - a + 1.0).exp())
            .collect::<CompensatedSum>()
            .value()
    }

    /// `ω_r(t)` through the regularized incomplete beta function.
    pub fn incomplete_moment(&self, r: u32, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let a = r as f64 / self.phi + 1.0;
        let tp = t.powf(self.phi);
        let z = tp / (1.0 + tp);
        self.terms
            .iter()
            .map(|term| {
                let b = term.eta - a + 1.0;
                term.weight * term.eta * ln_beta(a, b).exp() * beta_reg(a, b, z)
            })
            .collect::<CompensatedSum>()
            .value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheck {
    pub series: f64,
    pub quadrature: f64,
    pub discrepancy: f64,
    pub terms_used: usize,
    /// False when the term budget ran out before the tail bound was met.
    pub converged: bool,
}

/// Compares the series value of `μ'_r` with the quadrature value.
pub fn series_cross_check(d: &Aphbxii, r: u32, budget: usize) -> Result<SeriesCheck> {
    let expansion = SeriesExpansion::new(d, budget)?;
    let quadrature = raw_moment(d, r)?;
    let series = expansion.raw_moment(r);
    Ok(SeriesCheck {
        series,
        quadrature,
        discrepancy: (series - quadrature).abs(),
        terms_used: expansion.terms.len(),
        converged: expansion.converged,
    })
}
