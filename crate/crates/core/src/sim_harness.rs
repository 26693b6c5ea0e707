//! Monte Carlo harness for type-I error, power and coverage studies.
//!
//! Replication r draws both samples from stream (master_seed, r); its
//! permutation replicates use a seed derived from (master_seed, r). Reports
//! are therefore identical for any number of worker threads.

use crate::dist::{normal_cdf, normal_quantile, Family, RngStream};
use crate::error::{invalid, Error, Result};
use crate::estimators::EffectEstimate;
use crate::inference::{
    permutation_distribution, replication_perm_seed, BmStatistic, C2Statistic, Fallback,
    PermutationScheme,
};
use crate::intervals::{bm_interval_for, c2_interval, perm_interval_for};
use crate::par;
use crate::rank_engine::Sample;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const ALPHA_GRID: [f64; 4] = [0.001, 0.005, 0.01, 0.05];

/// Type-I sample-size grids: n₁/n₂ = 1, ½ and 2.
pub const TYPE1_SIZES: [[(usize, usize); 5]; 3] = [
    [(15, 15), (30, 30), (45, 45), (60, 60), (75, 75)],
    [(15, 30), (20, 40), (30, 60), (40, 80), (50, 100)],
    [(30, 15), (40, 20), (60, 30), (80, 40), (100, 50)],
];

pub const POWER_SIZES: [(usize, usize); 3] = [(15, 15), (15, 30), (30, 15)];

pub const DEFAULT_ITERS: usize = 20_000;
pub const DEFAULT_PERMUTATIONS: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Study {
    Type1,
    Power,
    Coverage,
}

impl Study {
    pub fn tag(&self) -> &'static str {
        match self {
            Study::Type1 => "TYPE1",
            Study::Power => "POWER",
            Study::Coverage => "COVERAGE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimMethod {
    Bm,
    Perm,
    C2,
}

impl SimMethod {
    pub const ALL: [SimMethod; 3] = [SimMethod::Bm, SimMethod::Perm, SimMethod::C2];

    pub fn tag(&self) -> &'static str {
        match self {
            SimMethod::Bm => "BM",
            SimMethod::Perm => "PERM",
            SimMethod::C2 => "C2",
        }
    }
}

/// Beta variables cut into J ordered categories coded 1..J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertSpec {
    /// c₀ = 0 < c₁ < … < c_J = 1.
    pub cutoffs: Vec<f64>,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl LikertSpec {
    /// Equal-width cutoffs j/J.
    pub fn equal_width(categories: usize, alpha: [f64; 2], beta: [f64; 2]) -> Result<Self> {
        if categories == 0 {
            return Err(invalid("at least one category is required"));
        }
        let j = categories as f64;
        let spec = Self {
            cutoffs: (0..=categories).map(|i| i as f64 / j).collect(),
            alpha,
            beta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn categories(&self) -> usize {
        self.cutoffs.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cutoffs;
        if c.len() < 2 || c[0] != 0.0 || c[c.len() - 1] != 1.0 || c.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("cutoffs must increase strictly from 0 to 1"));
        }
        for g in 0..2 {
            self.family(g).validate()?;
        }
        Ok(())
    }

    fn family(&self, group: usize) -> Family {
        Family::Beta {
            alpha: self.alpha[group],
            beta: self.beta[group],
        }
    }

    /// P(X = C_j), j = 1..J, for group index 0 or 1.
    pub fn category_probs(&self, group: usize) -> Vec<f64> {
        let f = self.family(group);
        let cdf: Vec<f64> = self.cutoffs.iter().map(|&c| f.cdf(c)).collect();
        cdf.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Category of y ∈ [0, 1]: C_j when y ∈ [c_{j−1}, c_j), top interval closed.
    pub fn categorize(&self, y: f64) -> usize {
        let inner = &self.cutoffs[1..self.cutoffs.len() - 1];
        inner.partition_point(|&c| c <= y) + 1
    }
}

fn group_index(group: u8) -> Result<usize> {
    match group {
        1 => Ok(0),
        2 => Ok(1),
        _ => Err(invalid(format!("group must be 1 or 2, got {group}"))),
    }
}

pub fn likert_sample(spec: &LikertSpec, group: u8, n: usize, stream: &mut RngStream) -> Result<Sample> {
    spec.validate()?;
    let g = group_index(group)?;
    let y = spec.family(g).sample(n, stream)?;
    Sample::new(
        format!("group{group}"),
        y.into_iter().map(|v| spec.categorize(v) as f64).collect(),
    )
}

/// θ = P(X₁ < X₂) + ½P(X₁ = X₂) of the discretized pair.
pub fn likert_theta(spec: &LikertSpec) -> Result<f64> {
    spec.validate()?;
    let p1 = spec.category_probs(0);
    let p2 = spec.category_probs(1);
    let mut below = 0.0;
    let mut theta = 0.0;
    for (a, b) in p1.iter().zip(&p2) {
        theta += b * (below + 0.5 * a);
        below += a;
    }
    Ok(theta)
}

/// Families whose θ is steered by one free parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EffectFamily {
    /// F₁ = N(0, σ₁²), F₂ = N(μ, σ₂²); free parameter μ.
    Normal { var1: f64, var2: f64 },
    /// F₁ = Exp(λ), F₂ = Exp(1) (rates); free parameter λ.
    Exponential,
    /// F₁ = Beta(α₁, β₁), F₂ = Beta(α, β₂), both discretized; free parameter α.
    LikertShape {
        alpha1: f64,
        beta1: f64,
        beta2: f64,
        categories: usize,
    },
}

const LIKERT_SHAPE_RANGE: (f64, f64) = (0.01, 100.0);
const TARGET_TOL: f64 = 1e-8;

impl EffectFamily {
    fn likert(&self, shape: f64) -> Result<LikertSpec> {
        match *self {
            EffectFamily::LikertShape {
                alpha1,
                beta1,
                beta2,
                categories,
            } => LikertSpec::equal_width(categories, [alpha1, shape], [beta1, beta2]),
            _ => unreachable!(),
        }
    }

    /// θ as a function of the free parameter.
    pub fn theta(&self, param: f64) -> Result<f64> {
        match *self {
            EffectFamily::Normal { var1, var2 } => Ok(normal_cdf(param / (var1 + var2).sqrt())),
            EffectFamily::Exponential => {
                if !(param > 0.0) {
                    return Err(invalid("exponential rate must be positive"));
                }
                Ok(param / (param + 1.0))
            }
            EffectFamily::LikertShape { .. } => likert_theta(&self.likert(param)?),
        }
    }
}

/// Free parameter of `family` at which θ equals `target`.
pub fn solve_target_effect(family: &EffectFamily, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::OutOfRange {
            target,
            low: 0.0,
            high: 1.0,
        });
    }
    match *family {
        EffectFamily::Normal { var1, var2 } => {
            if !(var1 > 0.0 && var2 > 0.0) {
                return Err(invalid("normal variances must be positive"));
            }
            Ok((var1 + var2).sqrt() * normal_quantile(target)?)
        }
        EffectFamily::Exponential => Ok(target / (1.0 - target)),
        EffectFamily::LikertShape { .. } => {
            let (mut lo, mut hi) = LIKERT_SHAPE_RANGE;
            let (t_lo, t_hi) = (family.theta(lo)?, family.theta(hi)?);
            if !(t_lo < t_hi) {
                return Err(Error::Degenerate("θ is not increasing in the shape parameter"));
            }
            if target < t_lo - TARGET_TOL || target > t_hi + TARGET_TOL {
                return Err(Error::OutOfRange {
                    target,
                    low: t_lo,
                    high: t_hi,
                });
            }
            if target <= t_lo {
                return Ok(lo);
            }
            if target >= t_hi {
                return Ok(hi);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if family.theta(mid)? < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Marginal distribution of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Marginal {
    Continuous(Family),
    /// Beta(α, β) discretized at `cutoffs`.
    Likert { alpha: f64, beta: f64, cutoffs: Vec<f64> },
}

impl Marginal {
    fn likert5(alpha: f64, beta: f64) -> Self {
        Marginal::Likert {
            alpha,
            beta,
            cutoffs: (0..=5).map(|i| i as f64 / 5.0).collect(),
        }
    }

    pub fn sample(&self, n: usize, stream: &mut RngStream) -> Result<Vec<f64>> {
        match self {
            Marginal::Continuous(f) => f.sample(n, stream),
            Marginal::Likert { alpha, beta, cutoffs } => {
                let spec = LikertSpec {
                    cutoffs: cutoffs.clone(),
                    alpha: [*alpha, *alpha],
                    beta: [*beta, *beta],
                };
                Ok(likert_sample(&spec, 1, n, stream)?.values().to_vec())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Marginal::Continuous(f) => f.describe(),
            Marginal::Likert { alpha, beta, cutoffs } => {
                format!("Likert{}(B({alpha},{beta}))", cutoffs.len() - 1)
            }
        }
    }
}

/// Distribution pair of one simulation setting and its true θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub group1: Marginal,
    pub group2: Marginal,
    pub theta: f64,
}

/// Null settings 1..=14 (θ = ½).
pub fn type1_scenario(setting_id: u32) -> Result<Scenario> {
    use Family::*;
    let normal = |variance| Marginal::Continuous(Normal { mean: 0.0, variance });
    let beta = |alpha, beta| Marginal::Continuous(Beta { alpha, beta });
    let laplace = |scale| Marginal::Continuous(Laplace { location: 0.0, scale });
    let (group1, group2) = match setting_id {
        1 => (normal(1.0), normal(1.0)),
        2 => (normal(1.0), normal(9.0)),
        3 => (beta(1.0, 1.0), beta(1.0, 1.0)),
        4 => (beta(1.0, 1.0), beta(5.0, 5.0)),
        5 => (beta(2.0, 5.0), beta(2.0, 5.0)),
        6 => (beta(5.0, 5.0), beta(1.0, 1.0)),
        7 => (Marginal::likert5(1.0, 1.0), Marginal::likert5(1.0, 1.0)),
        8 => (Marginal::likert5(1.0, 1.0), Marginal::likert5(5.0, 5.0)),
        9 => (Marginal::likert5(2.0, 5.0), Marginal::likert5(2.0, 5.0)),
        10 => (Marginal::likert5(5.0, 5.0), Marginal::likert5(2.0, 2.0)),
        11 => (
            Marginal::Continuous(Poisson { lambda: 1.0 }),
            Marginal::Continuous(Poisson { lambda: 1.0 }),
        ),
        12 => (
            Marginal::Continuous(Exponential { rate: 1.0 }),
            Marginal::Continuous(Exponential { rate: 1.0 }),
        ),
        13 => (laplace(1.0), laplace(1.0)),
        14 => (laplace(1.0), laplace(3.0)),
        _ => return Err(invalid(format!("unknown type-I setting {setting_id} (expected 1-14)"))),
    };
    Ok(Scenario {
        group1,
        group2,
        theta: 0.5,
    })
}

/// Free-parameter family of alternative settings 1..=4.
pub fn power_family(setting_id: u32) -> Result<EffectFamily> {
    match setting_id {
        1 => Ok(EffectFamily::Normal { var1: 1.0, var2: 1.0 }),
        2 => Ok(EffectFamily::Normal { var1: 9.0, var2: 1.0 }),
        3 => Ok(EffectFamily::LikertShape {
            alpha1: 1.0,
            beta1: 1.0,
            beta2: 1.0,
            categories: 5,
        }),
        4 => Ok(EffectFamily::Exponential),
        _ => Err(invalid(format!("unknown power setting {setting_id} (expected 1-4)"))),
    }
}

/// Alternative setting with the free parameter solved for `target_theta`.
pub fn power_scenario(setting_id: u32, target_theta: f64) -> Result<Scenario> {
    let family = power_family(setting_id)?;
    let p = solve_target_effect(&family, target_theta)?;
    let theta = family.theta(p)?;
    let (group1, group2) = match family {
        EffectFamily::Normal { var1, var2 } => (
            Marginal::Continuous(Family::Normal { mean: 0.0, variance: var1 }),
            Marginal::Continuous(Family::Normal { mean: p, variance: var2 }),
        ),
        EffectFamily::Exponential => (
            Marginal::Continuous(Family::Exponential { rate: p }),
            Marginal::Continuous(Family::Exponential { rate: 1.0 }),
        ),
        EffectFamily::LikertShape {
            alpha1,
            beta1,
            beta2,
            ..
        } => (Marginal::likert5(alpha1, beta1), Marginal::likert5(p, beta2)),
    };
    Ok(Scenario {
        group1,
        group2,
        theta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub study: Study,
    pub setting_id: u32,
    pub n1: usize,
    pub n2: usize,
    pub alphas: Vec<f64>,
    pub n_iter: usize,
    pub n_p: usize,
    pub methods: Vec<SimMethod>,
    pub master_seed: u64,
    pub target_theta: Option<f64>,
}

impl SimConfig {
    /// Desk-scale defaults: all methods, α = 0.05, 20,000 replications,
    /// 2,000 permutations, seed 1.
    pub fn new(study: Study, setting_id: u32, n1: usize, n2: usize) -> Self {
        Self {
            study,
            setting_id,
            n1,
            n2,
            alphas: vec![0.05],
            n_iter: DEFAULT_ITERS,
            n_p: DEFAULT_PERMUTATIONS,
            methods: SimMethod::ALL.to_vec(),
            master_seed: 1,
            target_theta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(invalid("n_iter must be at least 1"));
        }
        if self.n1 < 2 || self.n2 < 2 {
            return Err(invalid("group sizes must be at least 2"));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(invalid("every alpha must lie in (0, 1)"));
        }
        if self.methods.contains(&SimMethod::Perm) && self.n_p == 0 {
            return Err(invalid("n_p must be at least 1"));
        }
        match (self.study, self.target_theta) {
            (Study::Type1, _) => Ok(()),
            (_, Some(t)) if t > 0.0 && t < 1.0 => Ok(()),
            _ => Err(invalid("power and coverage studies need 0 < target_theta < 1")),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        match self.study {
            Study::Type1 => type1_scenario(self.setting_id),
            Study::Power | Study::Coverage => {
                power_scenario(self.setting_id, self.target_theta.unwrap_or(f64::NAN))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub study: Study,
    pub setting_id: u32,
    pub dist1: String,
    pub dist2: String,
    pub n1: usize,
    pub n2: usize,
    pub alpha: f64,
    pub method: SimMethod,
    /// Rejection rate, or coverage rate for coverage studies.
    pub rate: f64,
    pub se: f64,
    pub n_iter: usize,
    /// Replications that went through a degenerate-data fallback.
    pub n_degenerate: usize,
    pub seed: u64,
    pub target_theta: Option<f64>,
    /// Coverage outside Bradley's band [1 − 1.5α, 1 − 0.5α].
    pub bradley_violation: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub elapsed_secs: f64,
}

pub fn mc_standard_error(rate: f64, n_iter: usize) -> f64 {
    (rate * (1.0 - rate) / n_iter as f64).sqrt()
}

pub fn bradley_band(alpha: f64) -> (f64, f64) {
    (1.0 - 1.5 * alpha, 1.0 - 0.5 * alpha)
}

struct Replicate {
    /// Indexed [method][alpha].
    hits: Vec<Vec<bool>>,
    degenerate: Vec<bool>,
}

fn replicate(cfg: &SimConfig, scenario: &Scenario, r: usize, coverage: bool) -> Result<Replicate> {
    let mut stream = RngStream::new(cfg.master_seed, r as u64);
    let s1 = Sample::new("group1", scenario.group1.sample(cfg.n1, &mut stream)?)?;
    let s2 = Sample::new("group2", scenario.group2.sample(cfg.n2, &mut stream)?)?;
    let e = EffectEstimate::from_samples(&s1, &s2)?;
    let total = e.total();
    let truth = scenario.theta;
    let mut hits = Vec::with_capacity(cfg.methods.len());
    let mut degenerate = Vec::with_capacity(cfg.methods.len());
    for method in &cfg.methods {
        let row = match method {
            SimMethod::Bm => {
                let st = BmStatistic::from_estimate(&e);
                degenerate.push(st.fallback != Fallback::None);
                cfg.alphas
                    .iter()
                    .map(|&a| {
                        if coverage {
                            bm_interval_for(&st, total, a).map(|ci| ci.contains(truth))
                        } else {
                            st.rejects(a)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SimMethod::Perm => {
                let scheme = PermutationScheme::MonteCarlo {
                    n_permutations: cfg.n_p,
                    seed: replication_perm_seed(cfg.master_seed, r as u64),
                };
                let dist = permutation_distribution(&s1, &s2, scheme)?;
                degenerate.push(dist.observed.fallback != Fallback::None);
                let p = dist.p_value();
                cfg.alphas
                    .iter()
                    .map(|&a| {
                        if coverage {
                            perm_interval_for(&dist, total, a).map(|ci| ci.contains(truth))
                        } else {
                            Ok(p < a)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SimMethod::C2 => {
                let st = C2Statistic::from_estimate(&e, 0.5);
                degenerate.push(st.fallback != Fallback::None);
                cfg.alphas
                    .iter()
                    .map(|&a| {
                        if coverage {
                            c2_interval(&e, a).map(|ci| ci.contains(truth))
                        } else {
                            st.rejects(a)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        hits.push(row);
    }
    Ok(Replicate { hits, degenerate })
}

fn simulate(cfg: &SimConfig, expected: Study) -> Result<SimReport> {
    if cfg.study != expected {
        return Err(invalid(format!(
            "config is for a {} study, not {}",
            cfg.study.tag(),
            expected.tag()
        )));
    }
    cfg.validate()?;
    let start = Instant::now();
    let scenario = cfg.scenario()?;
    if cfg.methods.is_empty() {
        return Ok(SimReport {
            rows: Vec::new(),
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
    }
    let coverage = cfg.study == Study::Coverage;
    let reps = par::map_indexed(cfg.n_iter, |r| replicate(cfg, &scenario, r, coverage))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let (dist1, dist2) = (scenario.group1.describe(), scenario.group2.describe());
    let mut rows = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        let n_degenerate = reps.iter().filter(|r| r.degenerate[mi]).count();
        for (ai, &alpha) in cfg.alphas.iter().enumerate() {
            let count = reps.iter().filter(|r| r.hits[mi][ai]).count();
            let rate = count as f64 / cfg.n_iter as f64;
            let bradley_violation = coverage.then(|| {
                let (lo, hi) = bradley_band(alpha);
                rate < lo || rate > hi
            });
            rows.push(SimRow {
                study: cfg.study,
                setting_id: cfg.setting_id,
                dist1: dist1.clone(),
                dist2: dist2.clone(),
                n1: cfg.n1,
                n2: cfg.n2,
                alpha,
                method,
                rate,
                se: mc_standard_error(rate, cfg.n_iter),
                n_iter: cfg.n_iter,
                n_degenerate,
                seed: cfg.master_seed,
                target_theta: cfg.target_theta,
                bradley_violation,
            });
        }
    }
    Ok(SimReport {
        rows,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Rejection rates under a null setting.
pub fn run_type1(cfg: &SimConfig) -> Result<SimReport> {
    simulate(cfg, Study::Type1)
}

/// Rejection rates of H₀: θ = ½ at θ = target_theta.
pub fn run_power(cfg: &SimConfig) -> Result<SimReport> {
    simulate(cfg, Study::Power)
}

/// Share of replications whose 1 − α interval covers target_theta.
pub fn run_coverage(cfg: &SimConfig) -> Result<SimReport> {
    simulate(cfg, Study::Coverage)
}

pub fn run(cfg: &SimConfig) -> Result<SimReport> {
    simulate(cfg, cfg.study)
}
