//! Brunner-Munzel, studentized permutation and C² tests of H₀: θ = θ₀.
//!
//! Decisions always come from comparing the statistic with the reference
//! quantile; p-values are derived for reporting.
//!
//! Degenerate data never produce an error:
//! * fully separated samples (θ̂ ∈ {0, 1}) take the one-step-back
//!   substitution in the Brunner-Munzel statistic and the σ²_max statistic
//!   in the C² test;
//! * data tied across both groups (θ̂ = ½ with zero variance) give statistic
//!   0 and p = 1 for every method.

use crate::dist::{
    chi2_1_critical, chi2_1_sf, sampling::mix_seed, t_quantile, t_two_sided_p, RngStream,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::EffectEstimate;
use crate::par;
use crate::rank_engine::{PooledLayout, Sample};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Brunner-Munzel t-approximation.
    Bm,
    /// Studentized permutation test of the BM statistic.
    Perm,
    /// C² test of θ = ½ with the variance-ratio correction.
    C2,
    /// C² test of θ = θ₀.
    C2Theta0,
    /// C² with the Birnbaum-Klose maximal variance (degenerate data).
    C2SigmaMax,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Bm => "BM",
            Method::Perm => "PERM",
            Method::C2 => "C2",
            Method::C2Theta0 => "C2_THETA0",
            Method::C2SigmaMax => "C2_SIGMA_MAX",
        }
    }
}

/// Substitution applied because the data were degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fallback {
    None,
    /// θ̂ ∈ {0,1}: nearest attainable θ̂ and smallest non-zero DeLong variance.
    OneStepBack,
    /// Every observation tied across groups; statistic 0, p = 1.
    AllTied,
    /// Variance replaced by θ(1−θ)/m.
    SigmaMax,
}

impl Fallback {
    pub fn tag(&self) -> &'static str {
        match self {
            Fallback::None => "none",
            Fallback::OneStepBack => "one_step_back",
            Fallback::AllTied => "all_tied",
            Fallback::SigmaMax => "sigma_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    /// Satterthwaite degrees of freedom (BM only).
    pub df: Option<f64>,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    /// Reference quantile the statistic was compared with: t_{f̂,1−α/2} for
    /// BM, c_{1−α} for the C² family.
    pub critical_value: Option<f64>,
    /// (q_{α/2}, q_{1−α/2}) of the permutation distribution.
    pub perm_quantiles: Option<(f64, f64)>,
    pub n_permutations: Option<usize>,
    pub seed: Option<u64>,
    pub fallback: Fallback,
    /// Effect estimate that entered the statistic (after any substitution).
    pub theta_used: f64,
    /// Variance that entered the statistic: v̂²_DL for BM/PERM, σ̂²_N (or
    /// σ²_max) for the C² family.
    pub variance_used: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Satterthwaite-Smith-Welch degrees of freedom for the BM statistic.
///
/// Takes the DeLong components σ̂ᵢ² = Sᵢ²/(N−nᵢ)² and weights each group by
/// Sᵢ²/(N−nᵢ) = σ̂ᵢ²(N−nᵢ), the Brunner-Munzel weighting (the result is
/// homogeneous of degree zero in the components).
pub fn satterthwaite_df(sigma1_sq: f64, sigma2_sq: f64, n1: usize, n2: usize) -> Result<f64> {
    if n1 < 2 || n2 < 2 {
        return Err(invalid("degrees of freedom need nᵢ ≥ 2"));
    }
    if !(sigma1_sq >= 0.0 && sigma2_sq >= 0.0) {
        return Err(invalid("variance components must be non-negative"));
    }
    if sigma1_sq == 0.0 && sigma2_sq == 0.0 {
        return Err(Error::Degenerate("both variance components are zero"));
    }
    let total = (n1 + n2) as f64;
    let w1 = sigma1_sq * (total - n1 as f64);
    let w2 = sigma2_sq * (total - n2 as f64);
    Ok((w1 + w2).powi(2) / (w1 * w1 / (n1 - 1) as f64 + w2 * w2 / (n2 - 1) as f64))
}

/// Replacement values for fully separated samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneStepBack {
    pub theta: f64,
    /// Smallest non-zero v̂²_DL.
    pub var_delong: f64,
    /// Degrees of freedom of the minimal-overlap configuration that yields
    /// `theta` and `var_delong` (one swapped or one tied pair at the seam).
    pub df: f64,
}

pub fn one_step_back(theta_hat: f64, n1: usize, n2: usize, ties_present: bool) -> Result<OneStepBack> {
    if theta_hat != 0.0 && theta_hat != 1.0 {
        return Err(invalid(format!("one-step-back needs θ̂ ∈ {{0, 1}}, got {theta_hat}")));
    }
    if n1 < 2 || n2 < 2 {
        return Err(invalid("one-step-back needs nᵢ ≥ 2"));
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let total = f1 + f2;
    let pairs_sq = f1 * f1 * f2 * f2;
    let (step, var_delong) = if ties_present {
        (1.0 / (2.0 * f1 * f2), total / (2.0 * pairs_sq))
    } else {
        (1.0 / (f1 * f2), 2.0 * total / pairs_sq)
    };
    let theta = if theta_hat == 1.0 { 1.0 - step } else { step };
    // minimal overlap leaves Sᵢ² ∝ 1/nᵢ, so both Satterthwaite weights match
    let df = 4.0 / (1.0 / (f1 - 1.0) + 1.0 / (f2 - 1.0));
    Ok(OneStepBack {
        theta,
        var_delong,
        df,
    })
}

/// BM statistic with degenerate-data handling applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmStatistic {
    pub statistic: f64,
    pub df: Option<f64>,
    pub theta: f64,
    pub var_delong: f64,
    pub fallback: Fallback,
}

impl BmStatistic {
    pub fn from_estimate(e: &EffectEstimate) -> Self {
        let root_n = (e.total() as f64).sqrt();
        if e.separated {
            let osb = one_step_back(e.theta_hat, e.n1, e.n2, e.ties_present)
                .expect("separated estimate has boundary θ̂ and nᵢ ≥ 2");
            return Self {
                statistic: root_n * (osb.theta - 0.5) / osb.var_delong.sqrt(),
                df: Some(osb.df),
                theta: osb.theta,
                var_delong: osb.var_delong,
                fallback: Fallback::OneStepBack,
            };
        }
        if e.var_delong <= 0.0 {
            return Self {
                statistic: 0.0,
                df: None,
                theta: e.theta_hat,
                var_delong: 0.0,
                fallback: Fallback::AllTied,
            };
        }
        Self {
            statistic: root_n * (e.theta_hat - 0.5) / e.var_delong.sqrt(),
            df: satterthwaite_df(e.sigma1_sq, e.sigma2_sq, e.n1, e.n2).ok(),
            theta: e.theta_hat,
            var_delong: e.var_delong,
            fallback: Fallback::None,
        }
    }

    /// t_{f̂,1−α/2}, or `None` when the statistic is identically zero.
    pub fn critical_value(&self, alpha: f64) -> Result<Option<f64>> {
        check_alpha(alpha)?;
        self.df.map(|df| t_quantile(1.0 - 0.5 * alpha, df)).transpose()
    }

    pub fn p_value(&self) -> f64 {
        match self.df {
            Some(df) => t_two_sided_p(self.statistic, df).unwrap_or(1.0),
            None => 1.0,
        }
    }

    pub fn rejects(&self, alpha: f64) -> Result<bool> {
        Ok(match self.critical_value(alpha)? {
            Some(t) => self.statistic.abs() > t,
            None => false,
        })
    }

    fn into_result(self, alpha: f64) -> Result<TestResult> {
        let critical = self.critical_value(alpha)?;
        Ok(TestResult {
            method: Method::Bm,
            statistic: self.statistic,
            df: self.df,
            p_value: self.p_value(),
            alpha,
            reject: critical.is_some_and(|t| self.statistic.abs() > t),
            critical_value: critical,
            perm_quantiles: None,
            n_permutations: None,
            seed: None,
            fallback: self.fallback,
            theta_used: self.theta,
            variance_used: self.var_delong,
        })
    }
}

pub fn brunner_munzel_test(s1: &Sample, s2: &Sample, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let e = EffectEstimate::from_samples(s1, s2)?;
    BmStatistic::from_estimate(&e).into_result(alpha)
}

/// C²-type statistic for H₀: θ = θ₀ with degenerate-data handling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C2Statistic {
    pub statistic: f64,
    pub theta0: f64,
    /// σ̂²_N, or σ²_max evaluated at θ₀ on the fallback path.
    pub variance: f64,
    pub fallback: Fallback,
}

impl C2Statistic {
    /// θ̂(1−θ̂)(θ̂−θ₀)² / (θ₀(1−θ₀) σ̂²_N); when θ̂ ∈ {0,1} or σ̂²_N = 0 the
    /// variance is replaced by the Birnbaum-Klose maximum, giving
    /// m(θ̂−θ₀)²/(θ₀(1−θ₀)).
    pub fn from_estimate(e: &EffectEstimate, theta0: f64) -> Self {
        let null_spread = theta0 * (1.0 - theta0);
        let diff_sq = (e.theta_hat - theta0).powi(2);
        if e.separated || e.var_unbiased <= 0.0 {
            let statistic = e.m as f64 * diff_sq / null_spread;
            let fallback = if statistic == 0.0 && !e.separated && e.var_delong <= 0.0 {
                Fallback::AllTied
            } else {
                Fallback::SigmaMax
            };
            return Self {
                statistic,
                theta0,
                variance: null_spread / e.m as f64,
                fallback,
            };
        }
        Self {
            statistic: e.theta_hat * (1.0 - e.theta_hat) * diff_sq / (null_spread * e.var_unbiased),
            theta0,
            variance: e.var_unbiased,
            fallback: Fallback::None,
        }
    }

    pub fn p_value(&self) -> f64 {
        chi2_1_sf(self.statistic).unwrap_or(1.0)
    }

    pub fn rejects(&self, alpha: f64) -> Result<bool> {
        Ok(self.statistic > chi2_1_critical(alpha)?)
    }

    fn into_result(self, e: &EffectEstimate, alpha: f64, method: Method) -> Result<TestResult> {
        let critical = chi2_1_critical(alpha)?;
        let method = match (method, self.fallback) {
            (Method::C2, Fallback::SigmaMax) => Method::C2SigmaMax,
            (m, _) => m,
        };
        Ok(TestResult {
            method,
            statistic: self.statistic,
            df: None,
            p_value: self.p_value(),
            alpha,
            reject: self.statistic > critical,
            critical_value: Some(critical),
            perm_quantiles: None,
            n_permutations: None,
            seed: None,
            fallback: self.fallback,
            theta_used: e.theta_hat,
            variance_used: self.variance,
        })
    }
}

/// C² test of θ = ½, referenced to χ²₁.
pub fn c2_test(s1: &Sample, s2: &Sample, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let e = EffectEstimate::from_samples(s1, s2)?;
    C2Statistic::from_estimate(&e, 0.5).into_result(&e, alpha, Method::C2)
}

/// C² test of θ = θ₀ for 0 < θ₀ < 1.
pub fn c2_test_theta0(s1: &Sample, s2: &Sample, theta0: f64, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(invalid(format!("theta0 must lie in (0, 1), got {theta0}")));
    }
    let e = EffectEstimate::from_samples(s1, s2)?;
    C2Statistic::from_estimate(&e, theta0).into_result(&e, alpha, Method::C2Theta0)
}

/// Largest C(N, n₁) the exhaustive permutation mode will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationScheme {
    /// `n_permutations` uniform random relabelings; relabeling h draws from
    /// stream (seed, h), so output does not depend on thread count.
    MonteCarlo { n_permutations: usize, seed: u64 },
    /// Every assignment of the pooled data to groups of sizes n₁, n₂.
    Exhaustive,
}

/// Relabelings that give the observed configuration up to rearrangement
/// reproduce T only up to summation order.
const TIE_TOLERANCE: f64 = 1e-9;

/// Observed BM statistic and its permutation distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationDistribution {
    pub observed: BmStatistic,
    pub statistics: Vec<f64>,
}

impl PermutationDistribution {
    /// p = 2·min{#(T_h < T), #(T_h > T)}/n_p, capped at 1. Values within
    /// rounding distance of the observed statistic count as ties and enter
    /// neither tail. All-tied data gives p = 1.
    pub fn p_value(&self) -> f64 {
        if self.observed.fallback == Fallback::AllTied {
            return 1.0;
        }
        let t = self.observed.statistic;
        let tol = TIE_TOLERANCE * t.abs().max(1.0);
        let n = self.statistics.len() as f64;
        let below = self.statistics.iter().filter(|&&x| x < t - tol).count() as f64;
        let above = self.statistics.iter().filter(|&&x| x > t + tol).count() as f64;
        (2.0 * (below / n).min(above / n)).min(1.0)
    }

    /// Test decision p < α; `scheme` is the one that produced the
    /// distribution and is recorded in the result.
    pub fn test_result(&self, alpha: f64, scheme: PermutationScheme) -> Result<TestResult> {
        check_alpha(alpha)?;
        let p_value = self.p_value();
        let seed = match scheme {
            PermutationScheme::MonteCarlo { seed, .. } => Some(seed),
            PermutationScheme::Exhaustive => None,
        };
        Ok(TestResult {
            method: Method::Perm,
            statistic: self.observed.statistic,
            df: None,
            p_value,
            alpha,
            reject: p_value < alpha,
            critical_value: None,
            perm_quantiles: Some(self.quantiles(alpha)?),
            n_permutations: Some(self.statistics.len()),
            seed,
            fallback: self.observed.fallback,
            theta_used: self.observed.theta,
            variance_used: self.observed.var_delong,
        })
    }

    /// Empirical (α/2, 1−α/2) quantiles with linear interpolation.
    pub fn quantiles(&self, alpha: f64) -> Result<(f64, f64)> {
        check_alpha(alpha)?;
        let mut sorted = self.statistics.clone();
        sorted.sort_by(f64::total_cmp);
        Ok((
            interpolated_quantile(&sorted, 0.5 * alpha),
            interpolated_quantile(&sorted, 1.0 - 0.5 * alpha),
        ))
    }
}

/// Type-7 sample quantile of sorted data.
pub fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Statistic of one relabeling, through the same degenerate-data rules as
/// the observed data.
fn relabeled_statistic(layout: &PooledLayout, labels: &[bool]) -> f64 {
    let e = EffectEstimate::from_moments(&layout.moments(labels), layout.has_ties());
    BmStatistic::from_estimate(&e).statistic
}

/// Marks `n2` of the `total` pooled positions as group 2, uniformly.
fn random_labels(total: usize, n2: usize, stream: &mut RngStream) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..total).collect();
    let mut labels = vec![false; total];
    for i in 0..n2 {
        let j = stream.random_range(i..total);
        idx.swap(i, j);
        labels[idx[i]] = true;
    }
    labels
}

pub fn permutation_distribution(
    s1: &Sample,
    s2: &Sample,
    scheme: PermutationScheme,
) -> Result<PermutationDistribution> {
    s1.require_len(2)?;
    s2.require_len(2)?;
    let pooled: Vec<f64> = s1.values().iter().chain(s2.values()).copied().collect();
    let layout = PooledLayout::new(&pooled)?;
    let (n1, n2) = (s1.len(), s2.len());
    let total = n1 + n2;
    let observed_labels: Vec<bool> = (0..total).map(|i| i >= n1).collect();
    let observed = BmStatistic::from_estimate(&EffectEstimate::from_moments(
        &layout.moments(&observed_labels),
        layout.has_ties(),
    ));

    let statistics = match scheme {
        PermutationScheme::MonteCarlo {
            n_permutations,
            seed,
        } => {
            if n_permutations == 0 {
                return Err(invalid("number of permutations must be at least 1"));
            }
            par::map_indexed(n_permutations, |h| {
                let mut stream = RngStream::new(seed, h as u64);
                relabeled_statistic(&layout, &random_labels(total, n2, &mut stream))
            })
        }
        PermutationScheme::Exhaustive => {
            let count = binomial(total, n2);
            if count > EXHAUSTIVE_LIMIT {
                return Err(invalid(format!(
                    "exhaustive permutation needs C({total}, {n2}) = {count} ≤ {EXHAUSTIVE_LIMIT}"
                )));
            }
            let mut out = Vec::with_capacity(count as usize);
            let mut chosen: Vec<usize> = (0..n2).collect();
            loop {
                let mut labels = vec![false; total];
                for &c in &chosen {
                    labels[c] = true;
                }
                out.push(relabeled_statistic(&layout, &labels));
                // next combination in lexicographic order
                let mut i = n2;
                while i > 0 && chosen[i - 1] == total - n2 + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                chosen[i - 1] += 1;
                for j in i..n2 {
                    chosen[j] = chosen[j - 1] + 1;
                }
            }
            out
        }
    };
    Ok(PermutationDistribution {
        observed,
        statistics,
    })
}

/// Studentized permutation test with `n_p` Monte Carlo relabelings.
pub fn permutation_test(
    s1: &Sample,
    s2: &Sample,
    alpha: f64,
    n_p: usize,
    seed: u64,
) -> Result<TestResult> {
    permutation_test_with(
        s1,
        s2,
        alpha,
        PermutationScheme::MonteCarlo {
            n_permutations: n_p,
            seed,
        },
    )
}

pub fn permutation_test_with(
    s1: &Sample,
    s2: &Sample,
    alpha: f64,
    scheme: PermutationScheme,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    permutation_distribution(s1, s2, scheme)?.test_result(alpha, scheme)
}

/// Seed for the permutation stream of simulation replication `rep`.
pub fn replication_perm_seed(master_seed: u64, rep: u64) -> u64 {
    mix_seed(master_seed ^ 0x5045_524D, rep)
}
