//! Mann-Whitney effect, tie probability and the two variance estimators.
//!
//! Scales follow the usual conventions: the DeLong estimate `var_delong` is
//! the variance of √N·θ̂ (v̂²_DL), while `var_unbiased` is the variance of θ̂
//! itself (σ̂²_N). Use [`EffectEstimate::var_delong_unscaled`] and
//! [`EffectEstimate::var_unbiased_scaled`] to move between them.

use crate::error::{invalid, Error, Result};
use crate::rank_engine::{placements, PlacementMoments, PooledLayout, Sample};
use serde::{Deserialize, Serialize};

/// Point estimates and variance estimates for one two-sample dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    /// θ̂ = P̂(X₁ < X₂) + ½ P̂(X₁ = X₂).
    pub theta_hat: f64,
    /// Estimated probability of a cross-group tie.
    pub tau_hat: f64,
    /// DeLong estimate of Var(√N θ̂).
    pub var_delong: f64,
    /// Unbiased rank-based estimate of Var(θ̂).
    pub var_unbiased: f64,
    /// DeLong per-group components σ̂ᵢ² = Sᵢ²/(N − nᵢ)².
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    /// Raw placement variances Sᵢ² = Σₖ (R*ᵢₖ − R̄*ᵢ)²/(nᵢ − 1).
    pub placement_var: [f64; 2],
    pub n1: usize,
    pub n2: usize,
    /// min(n1, n2).
    pub m: usize,
    /// θ̂ ∈ {0, 1}: one sample lies entirely below the other.
    pub separated: bool,
    /// Any two pooled observations share a value.
    pub ties_present: bool,
    /// Separated, or one of the variance estimates vanished.
    pub degenerate: bool,
}

impl EffectEstimate {
    /// Computes every estimate in one O(N log N) pass. Each group needs at
    /// least two observations.
    pub fn from_samples(s1: &Sample, s2: &Sample) -> Result<Self> {
        s1.require_len(2)?;
        s2.require_len(2)?;
        let pooled: Vec<f64> = s1.values().iter().chain(s2.values()).copied().collect();
        let layout = PooledLayout::new(&pooled)?;
        let labels: Vec<bool> = (0..pooled.len()).map(|i| i >= s1.len()).collect();
        Ok(Self::from_moments(&layout.moments(&labels), layout.has_ties()))
    }

    /// Estimates from placement sums; both groups must have size ≥ 2.
    pub fn from_moments(mo: &PlacementMoments, ties_present: bool) -> Self {
        let [n1, n2] = mo.n;
        debug_assert!(n1 >= 2 && n2 >= 2);
        let (f1, f2) = (n1 as f64, n2 as f64);
        let total = f1 + f2;
        let pairs = f1 * f2;

        let theta_hat = (mo.sum[1] / pairs).clamp(0.0, 1.0);
        let tau_hat = (mo.tied_pairs / pairs).clamp(0.0, 1.0);
        let ss = [mo.centered_ss(0), mo.centered_ss(1)];
        let placement_var = [ss[0] / (f1 - 1.0), ss[1] / (f2 - 1.0)];
        let sigma1_sq = placement_var[0] / (f2 * f2);
        let sigma2_sq = placement_var[1] / (f1 * f1);
        let var_delong = total * (sigma1_sq / f1 + sigma2_sq / f2);

        let d_n = f1 * (f1 - 1.0) * f2 * (f2 - 1.0);
        let bracket = ss[0] + ss[1] - pairs * (theta_hat * (1.0 - theta_hat) - 0.25 * tau_hat);
        // non-negative in exact arithmetic; clamp rounding noise
        let var_unbiased = (bracket / d_n).max(0.0);

        let separated = theta_hat == 0.0 || theta_hat == 1.0;
        Self {
            theta_hat,
            tau_hat,
            var_delong,
            var_unbiased,
            sigma1_sq,
            sigma2_sq,
            placement_var,
            n1,
            n2,
            m: n1.min(n2),
            separated,
            ties_present,
            degenerate: separated || var_unbiased <= 0.0 || var_delong <= 0.0,
        }
    }

    pub fn total(&self) -> usize {
        self.n1 + self.n2
    }

    /// v̂²_DL / N, the DeLong estimate on the scale of θ̂.
    pub fn var_delong_unscaled(&self) -> f64 {
        self.var_delong / self.total() as f64
    }

    /// N·σ̂²_N, the unbiased estimate on the √N scale.
    pub fn var_unbiased_scaled(&self) -> f64 {
        self.var_unbiased * self.total() as f64
    }
}

/// θ̂ from the mean pooled rank of the second sample:
/// (R̄₂ − (n₂+1)/2)/n₁.
pub fn mw_effect(s1: &Sample, s2: &Sample) -> Result<f64> {
    let r = placements(s1, s2)?;
    let (n1, n2) = (r.n1() as f64, r.n2() as f64);
    let mean_r2 = r.group2.pooled_mid.iter().sum::<f64>() / n2;
    Ok(((mean_r2 - 0.5 * (n2 + 1.0)) / n1).clamp(0.0, 1.0))
}

/// τ̂ from max/min ranks of the second sample:
/// {R̄₂⁺ − R̄₂⁻ − (R̄₂^{(2)+} − R̄₂^{(2)−})}/n₁.
pub fn tie_probability(s1: &Sample, s2: &Sample) -> Result<f64> {
    let r = placements(s1, s2)?;
    let g = &r.group2;
    let n2 = r.n2() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n2;
    let pooled_spread = mean(&g.pooled_max) - mean(&g.pooled_min);
    let internal_spread = mean(&g.internal_max) - mean(&g.internal_min);
    Ok(((pooled_spread - internal_spread) / r.n1() as f64).clamp(0.0, 1.0))
}

/// DeLong variance and its per-group components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeLongVariance {
    /// v̂²_DL = N(σ̂₁²/n₁ + σ̂₂²/n₂).
    pub v_sq: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

pub fn delong_variance(s1: &Sample, s2: &Sample) -> Result<DeLongVariance> {
    let e = EffectEstimate::from_samples(s1, s2)?;
    Ok(DeLongVariance {
        v_sq: e.var_delong,
        sigma1_sq: e.sigma1_sq,
        sigma2_sq: e.sigma2_sq,
    })
}

/// Unbiased rank-based estimate σ̂²_N of Var(θ̂).
pub fn unbiased_variance(s1: &Sample, s2: &Sample) -> Result<f64> {
    EffectEstimate::from_samples(s1, s2).map(|e| e.var_unbiased)
}

/// Theoretical and empirical Birnbaum-Klose variance bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkBounds {
    /// σ²_max = θ(1−θ)/m.
    pub sigma_max_sq: f64,
    /// θ(1−θ)/(m−1).
    pub empirical: f64,
}

pub fn bk_bounds(theta: f64, m: usize) -> Result<BkBounds> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid(format!("theta {theta} outside [0, 1]")));
    }
    if m < 2 {
        return Err(invalid(format!("empirical bound needs m ≥ 2, got {m}")));
    }
    let spread = theta * (1.0 - theta);
    Ok(BkBounds {
        sigma_max_sq: spread / m as f64,
        empirical: spread / (m - 1) as f64,
    })
}

/// r̂ = θ̂(1−θ̂)/(m σ̂²_N), the estimated ratio of the maximal to the actual
/// variance.
pub fn variance_ratio(theta_hat: f64, var_unbiased: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(invalid("m must be positive"));
    }
    if !(theta_hat > 0.0 && theta_hat < 1.0) || var_unbiased.is_nan() || var_unbiased <= 0.0 {
        return Err(Error::Degenerate("variance ratio needs 0 < θ̂ < 1 and σ̂² > 0"));
    }
    Ok(theta_hat * (1.0 - theta_hat) / (m as f64 * var_unbiased))
}
