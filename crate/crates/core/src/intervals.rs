//! Confidence intervals for θ compatible with the tests in [`crate::inference`].
//!
//! Each interval is closed; the corresponding test rejects θ₀ exactly when θ₀
//! lies strictly outside it.

use crate::dist::{chi2_1_critical, t_quantile};
use crate::error::{invalid, Result};
use crate::estimators::EffectEstimate;
use crate::inference::{BmStatistic, PermutationDistribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntervalMethod {
    Bm,
    Perm,
    Ratio,
    Bk,
}

impl IntervalMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            IntervalMethod::Bm => "BM",
            IntervalMethod::Perm => "PERM",
            IntervalMethod::Ratio => "RATIO",
            IntervalMethod::Bk => "BK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    /// Confidence level 1 − α.
    pub level: f64,
    pub method: IntervalMethod,
    /// Whether the construction guarantees bounds in [0, 1].
    pub range_preserving: bool,
    /// q̂ = σ̂²_N / (θ̂(1−θ̂)) for the ratio interval.
    pub q_hat: Option<f64>,
}

impl ConfidenceInterval {
    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }

    /// True when a bound falls outside the parameter space [0, 1].
    pub fn exceeds_unit(&self) -> bool {
        self.lower < 0.0 || self.upper > 1.0
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_theta(theta_hat: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta_hat) {
        Ok(())
    } else {
        Err(invalid(format!("effect estimate must lie in [0, 1], got {theta_hat}")))
    }
}

/// θ̂ ∓ t_{f̂,1−α/2} v̂_DL/√N. Not clamped.
pub fn bm_interval(theta_hat: f64, var_dl: f64, df: f64, n_total: usize, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    check_theta(theta_hat)?;
    if !(df > 0.0) {
        return Err(invalid(format!("degrees of freedom must be positive, got {df}")));
    }
    if !(var_dl >= 0.0 && var_dl.is_finite()) {
        return Err(invalid(format!("variance must be non-negative, got {var_dl}")));
    }
    if n_total == 0 {
        return Err(invalid("total sample size must be positive"));
    }
    let half = t_quantile(1.0 - 0.5 * alpha, df)? * (var_dl / n_total as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: theta_hat - half,
        upper: theta_hat + half,
        level: 1.0 - alpha,
        method: IntervalMethod::Bm,
        range_preserving: false,
        q_hat: None,
    })
}

/// [θ̂ − q_{1−α/2} v̂_DL/√N, θ̂ − q_{α/2} v̂_DL/√N] from permutation quantiles
/// `(q_{α/2}, q_{1−α/2})`.
pub fn perm_interval(
    theta_hat: f64,
    var_dl: f64,
    n_total: usize,
    perm_quantiles: (f64, f64),
    alpha: f64,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    check_theta(theta_hat)?;
    if !(var_dl >= 0.0 && var_dl.is_finite()) {
        return Err(invalid(format!("variance must be non-negative, got {var_dl}")));
    }
    if n_total == 0 {
        return Err(invalid("total sample size must be positive"));
    }
    let (q_lo, q_hi) = perm_quantiles;
    if !(q_lo <= q_hi) {
        return Err(invalid("permutation quantiles must be ordered"));
    }
    let scale = (var_dl / n_total as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: theta_hat - q_hi * scale,
        upper: theta_hat - q_lo * scale,
        level: 1.0 - alpha,
        method: IntervalMethod::Perm,
        range_preserving: false,
        q_hat: None,
    })
}

/// Roots of a·θ² − b·θ + k = 0 with real roots in [0, 1]; the smaller root
/// comes from the product of roots to avoid cancellation.
fn quadratic_roots(a: f64, b: f64, k: f64, disc: f64) -> (f64, f64) {
    let upper = (b + disc) / (2.0 * a);
    let lower = if upper > 0.0 { k / (a * upper) } else { 0.0 };
    (lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0))
}

/// Wilson-type interval from inverting the C² test.
///
/// Falls back to [`bk_interval`] when θ̂ ∈ {0, 1} or σ̂²_N = 0, which needs
/// m; use [`c2_interval`] for that dispatch. Here such inputs are errors.
pub fn ratio_interval(theta_hat: f64, var_unbiased: f64, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    if !(theta_hat > 0.0 && theta_hat < 1.0) {
        return Err(crate::Error::Degenerate("ratio interval needs 0 < θ̂ < 1"));
    }
    if !(var_unbiased > 0.0 && var_unbiased.is_finite()) {
        return Err(crate::Error::Degenerate("ratio interval needs σ̂²_N > 0"));
    }
    let c = chi2_1_critical(alpha)?;
    let q = var_unbiased / (theta_hat * (1.0 - theta_hat));
    let qc = q * c;
    let disc = (qc * qc + 4.0 * var_unbiased * c).sqrt();
    let (lower, upper) = quadratic_roots(1.0 + qc, 2.0 * theta_hat + qc, theta_hat * theta_hat, disc);
    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - alpha,
        method: IntervalMethod::Ratio,
        range_preserving: true,
        q_hat: Some(q),
    })
}

/// Interval from the Birnbaum-Klose maximal variance θ(1−θ)/m.
pub fn bk_interval(theta_hat: f64, m: usize, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    check_theta(theta_hat)?;
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let c = chi2_1_critical(alpha)?;
    let m = m as f64;
    let (lower, upper) = if theta_hat == 1.0 {
        (m / (m + c), 1.0)
    } else if theta_hat == 0.0 {
        (0.0, c / (m + c))
    } else {
        let disc = (4.0 * m * theta_hat * (1.0 - theta_hat) * c + c * c).sqrt();
        quadratic_roots(m + c, 2.0 * m * theta_hat + c, m * theta_hat * theta_hat, disc)
    };
    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - alpha,
        method: IntervalMethod::Bk,
        range_preserving: true,
        q_hat: None,
    })
}

/// Interval compatible with the C² test: ratio interval, or the BK interval
/// whenever the test used the σ²_max statistic.
pub fn c2_interval(e: &EffectEstimate, alpha: f64) -> Result<ConfidenceInterval> {
    if e.separated || e.var_unbiased <= 0.0 {
        bk_interval(e.theta_hat, e.m, alpha)
    } else {
        ratio_interval(e.theta_hat, e.var_unbiased, alpha)
    }
}

/// Interval compatible with the BM test, centred on the estimate that entered
/// the statistic. Data tied across groups give the point interval {½}.
pub fn bm_interval_for(stat: &BmStatistic, n_total: usize, alpha: f64) -> Result<ConfidenceInterval> {
    match stat.df {
        Some(df) => bm_interval(stat.theta, stat.var_delong, df, n_total, alpha),
        None => {
            check_alpha(alpha)?;
            Ok(ConfidenceInterval {
                lower: stat.theta,
                upper: stat.theta,
                level: 1.0 - alpha,
                method: IntervalMethod::Bm,
                range_preserving: false,
                q_hat: None,
            })
        }
    }
}

pub fn perm_interval_for(dist: &PermutationDistribution, n_total: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let q = dist.quantiles(alpha)?;
    perm_interval(dist.observed.theta, dist.observed.var_delong, n_total, q, alpha)
}
