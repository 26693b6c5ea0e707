//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always
//! printed; exits non-zero if any criterion fails.

use npbf::dist::{
    chi2_1_quantile, normal_cdf, normal_quantile, t_cdf, t_quantile, Family, RngStream,
};
use npbf::estimators::{mw_effect, tie_probability, EffectEstimate};
use npbf::inference::{
    brunner_munzel_test, c2_test, permutation_distribution, permutation_test, BmStatistic,
    PermutationScheme,
};
use npbf::intervals::{bm_interval_for, c2_interval, perm_interval_for};
use npbf::rank_engine::Sample;
use npbf::sim_harness::{
    likert_sample, run_coverage, run_type1, LikertSpec, SimConfig, SimMethod, Study,
};
use rand::Rng;
use statrs::distribution::{
    Beta, ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Exp, Laplace, Normal, Poisson,
};
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn sample(label: &str, v: &[f64]) -> Sample {
    Sample::from_slice(label, v).unwrap()
}

fn expand(counts: &[(f64, usize)]) -> Vec<f64> {
    counts.iter().flat_map(|&(v, c)| std::iter::repeat(v).take(c)).collect()
}

/// Pain scores; suction group first.
fn shoulder() -> (Sample, Sample) {
    (
        sample("suction", &expand(&[(1.0, 16), (2.0, 5), (4.0, 1)])),
        sample("control", &expand(&[(1.0, 4), (2.0, 1), (3.0, 5), (4.0, 7), (5.0, 2)])),
    )
}

/// Artificial data in effect orientation: Group 2 first.
fn artificial() -> (Sample, Sample) {
    (
        sample("group2", &[820.0, 3364.0, 1957.0, 1851.0, 2984.0, 744.0, 2044.0]),
        sample(
            "group1",
            &[1956.0, 3828.0, 2051.0, 3721.0, 3233.0, 2000.0, 4000.0, 4428.0, 2603.0, 2370.0],
        ),
    )
}

struct Checks(Vec<String>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn abs(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() <= tol) {
            self.0.push(format!("{name}={got:.6} (want {want} ± {tol})"));
        }
    }

    fn rel(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() <= tol * want.abs()) {
            self.0.push(format!("{name}={got:.6e} (want {want:e} ± {}%)", tol * 100.0));
        }
    }

    fn that(&mut self, name: &str, ok: bool) {
        if !ok {
            self.0.push(name.to_string());
        }
    }

    fn runtime(&mut self, elapsed: Duration, limit: f64) {
        if elapsed.as_secs_f64() >= limit {
            self.0.push(format!("runtime {:.2}s ≥ {limit}s", elapsed.as_secs_f64()));
        }
    }

    fn finish(self, summary: String) -> Outcome {
        let pass = self.0.is_empty();
        Outcome {
            pass,
            detail: if pass { summary } else { self.0.join("; ") },
        }
    }
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let (a, b) = shoulder();
    let e = EffectEstimate::from_samples(&a, &b).unwrap();
    let bm = brunner_munzel_test(&a, &b, 0.05).unwrap();
    let bm_ci = bm_interval_for(&BmStatistic::from_estimate(&e), e.total(), 0.05).unwrap();
    let c2 = c2_test(&a, &b, 0.05).unwrap();
    let c2_ci = c2_interval(&e, 0.05).unwrap();
    let elapsed = start.elapsed();

    let mut c = Checks::new();
    c.abs("theta", e.theta_hat, 0.837, 5e-4);
    c.abs("tau", e.tau_hat, 0.182, 5e-4);
    c.abs("v2_DL", e.var_delong, 0.172, 5e-4);
    c.abs("N*sigma2_N", e.var_unbiased_scaled(), 0.171, 5e-4);
    c.abs("T_BM", bm.statistic, 5.20, 5e-3);
    c.rel("p_BM", bm.p_value, 1.87e-5, 0.02);
    c.abs("BM lower", bm_ci.lower, 0.704, 5e-4);
    c.abs("BM upper", bm_ci.upper, 0.970, 5e-4);
    c.abs("C2", c2.statistic, 14.9, 0.05);
    c.rel("p_C2", c2.p_value, 1.16e-4, 0.02);
    c.abs("ratio lower", c2_ci.lower, 0.677, 5e-4);
    c.abs("ratio upper", c2_ci.upper, 0.927, 5e-4);
    c.runtime(elapsed, 1.0);
    c.finish(format!(
        "θ̂={:.4} τ̂={:.4} v²={:.4} Nσ²={:.4} T={:.4} p={:.4e} CI=[{:.4},{:.4}] C²={:.3} p={:.4e} CI=[{:.4},{:.4}] ({:.0?})",
        e.theta_hat,
        e.tau_hat,
        e.var_delong,
        e.var_unbiased_scaled(),
        bm.statistic,
        bm.p_value,
        bm_ci.lower,
        bm_ci.upper,
        c2.statistic,
        c2.p_value,
        c2_ci.lower,
        c2_ci.upper,
        elapsed
    ))
}

fn artificial_goldens() -> Outcome {
    let start = Instant::now();
    let (a, b) = artificial();
    let e = EffectEstimate::from_samples(&a, &b).unwrap();
    let bm = brunner_munzel_test(&a, &b, 0.05).unwrap();
    let bm_ci = bm_interval_for(&BmStatistic::from_estimate(&e), e.total(), 0.05).unwrap();
    let c2 = c2_test(&a, &b, 0.05).unwrap();
    let c2_ci = c2_interval(&e, 0.05).unwrap();
    let elapsed = start.elapsed();

    let mut c = Checks::new();
    c.abs("p_BM", bm.p_value, 0.0239, 1e-4);
    c.abs("BM lower", bm_ci.lower, 0.55, 5e-3);
    c.abs("BM upper", bm_ci.upper, 1.05, 5e-3);
    c.that("BM upper bound > 1", bm_ci.upper > 1.0);
    c.abs("p_C2", c2.p_value, 0.0282, 1e-4);
    c.abs("ratio lower", c2_ci.lower, 0.53, 5e-3);
    c.abs("ratio upper", c2_ci.upper, 0.93, 5e-3);
    c.runtime(elapsed, 1.0);
    c.finish(format!(
        "BM p={:.6} CI=[{:.4},{:.4}]; C² p={:.6} CI=[{:.4},{:.4}] ({:.0?})",
        bm.p_value, bm_ci.lower, bm_ci.upper, c2.p_value, c2_ci.lower, c2_ci.upper, elapsed
    ))
}

fn permutation_example() -> Outcome {
    let start = Instant::now();
    let (a, b) = shoulder();
    let scheme = PermutationScheme::MonteCarlo {
        n_permutations: 10_000,
        seed: 2024,
    };
    let dist = permutation_distribution(&a, &b, scheme).unwrap();
    let ci = perm_interval_for(&dist, a.len() + b.len(), 0.05).unwrap();
    let p = dist.p_value();
    let elapsed = start.elapsed();

    let mut c = Checks::new();
    c.that(&format!("p={p} > 0.001"), p <= 0.001);
    c.abs("perm lower", ci.lower, 0.708, 0.01);
    c.abs("perm upper", ci.upper, 0.970, 0.01);
    c.runtime(elapsed, 5.0);
    c.finish(format!("p={p} CI=[{:.4},{:.4}] ({:.0?})", ci.lower, ci.upper, elapsed))
}

/// BM statistic from pairwise comparisons, independent of the rank engine.
fn naive_bm_statistic(x: &[f64], y: &[f64]) -> f64 {
    let score = |a: f64, b: f64| match a.partial_cmp(&b).unwrap() {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 0.0,
    };
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let n = n1 + n2;
    let p1: Vec<f64> = x.iter().map(|&xi| y.iter().map(|&yj| score(yj, xi)).sum()).collect();
    let p2: Vec<f64> = y.iter().map(|&yj| x.iter().map(|&xi| score(xi, yj)).sum()).collect();
    let theta = p2.iter().sum::<f64>() / (n1 * n2);
    let svar = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (v.len() - 1) as f64
    };
    let v2 = n * (svar(&p1) / (n2 * n2) / n1 + svar(&p2) / (n1 * n1) / n2);
    let (theta, v2) = if theta == 0.0 || theta == 1.0 {
        let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        pooled.sort_by(f64::total_cmp);
        let ties = pooled.windows(2).any(|w| w[0] == w[1]);
        let (step, v) = if ties {
            (1.0 / (2.0 * n1 * n2), n / (2.0 * n1 * n1 * n2 * n2))
        } else {
            (1.0 / (n1 * n2), 2.0 * n / (n1 * n1 * n2 * n2))
        };
        (if theta == 1.0 { 1.0 - step } else { step }, v)
    } else {
        (theta, v2)
    };
    if v2 == 0.0 {
        return 0.0;
    }
    n.sqrt() * (theta - 0.5) / v2.sqrt()
}

/// Two-sided permutation p-value over all 70 splits of eight values.
fn exact_p(pooled: &[f64; 8], observed: f64) -> f64 {
    let mut below = 0usize;
    let mut above = 0usize;
    let mut count = 0usize;
    for mask in 0u32..256 {
        if mask.count_ones() != 4 {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, &v) in pooled.iter().enumerate() {
            if mask & (1 << i) == 0 {
                x.push(v)
            } else {
                y.push(v)
            }
        }
        let t = naive_bm_statistic(&x, &y);
        let tol = 1e-9 * observed.abs().max(1.0);
        if t < observed - tol {
            below += 1;
        } else if t > observed + tol {
            above += 1;
        }
        count += 1;
    }
    assert_eq!(count, 70);
    (2.0 * below.min(above) as f64 / 70.0).min(1.0)
}

fn exhaustive_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(4_040, 0);
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    let mut exhaustive_mismatch = 0;
    let mut z_sq = 0.0;
    let mut z_count = 0usize;
    for d in 0..50 {
        let mut pooled = [0.0; 8];
        let tied = d % 2 == 1;
        for v in pooled.iter_mut() {
            *v = if tied {
                rng.random_range(0..5) as f64
            } else {
                (rng.random::<f64>() * 100.0).round() / 10.0
            };
        }
        // mild shift in the second group spreads p over (0, 1]
        let shift = rng.random_range(0..4) as f64 * if tied { 1.0 } else { 1.5 };
        for v in pooled[4..].iter_mut() {
            *v += shift;
        }
        let observed = naive_bm_statistic(&pooled[..4], &pooled[4..]);
        let exact = exact_p(&pooled, observed);
        let (a, b) = (sample("x", &pooled[..4]), sample("y", &pooled[4..]));
        let mc = permutation_test(&a, &b, 0.05, 5_000, 100 + d as u64).unwrap().p_value;
        let full = permutation_distribution(&a, &b, PermutationScheme::Exhaustive).unwrap();
        if (full.p_value() - exact).abs() > 1e-12 {
            exhaustive_mismatch += 1;
        }
        let diff = (mc - exact).abs();
        worst = worst.max(diff);
        // SD of 2·Binomial(n_p, q)/n_p with q the smaller exact tail
        let q = 0.5 * exact;
        if exact < 1.0 && q > 0.0 {
            let sd = 2.0 * (q * (1.0 - q) / 5_000.0).sqrt();
            z_sq += ((mc - exact) / sd).powi(2);
            z_count += 1;
        }
        if diff > 0.02 {
            misses.push(format!("#{d}: mc={mc:.4} exact={exact:.4}"));
        }
    }
    // calibration of the deviations against their binomial SDs
    let calib = 1.0 - ChiSquared::new(z_count as f64).unwrap().cdf(z_sq);
    let mut c = Checks::new();
    c.that(
        &format!(
            "{} of 50 datasets off by > 0.02 [{}]; Σz² = {z_sq:.1} on {z_count} df (p = {calib:.3})",
            misses.len(),
            misses.join(", ")
        ),
        misses.is_empty(),
    );
    c.that(
        &format!("exhaustive mode disagrees with oracle on {exhaustive_mismatch} datasets"),
        exhaustive_mismatch == 0,
    );
    c.finish(format!(
        "50 datasets, max |p_mc − p_exact| = {worst:.4}, Σz² = {z_sq:.1} on {z_count} df ({:.1?})",
        start.elapsed()
    ))
}

fn fuzz_values(rng: &mut RngStream, n: usize, levels: u32) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if levels == 0 {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                z
            } else {
                rng.random_range(0..levels) as f64
            }
        })
        .collect()
}

fn property_suite() -> Outcome {
    let start = Instant::now();
    let c = chi2_1_quantile(0.95).unwrap();
    let mut fails = [0usize; 5];
    let mut bm_compat_checked = 0usize;
    let mut rng = RngStream::new(5_005, 0);
    for _ in 0..100_000 {
        let (n1, n2) = (rng.random_range(2..=15), rng.random_range(2..=15));
        // 0 = continuous; otherwise integer data on that many levels
        let levels = [0, 0, 1, 2, 3, 5, 8][rng.random_range(0..7)];
        let x = fuzz_values(&mut rng, n1, levels);
        let y = fuzz_values(&mut rng, n2, levels);
        let (sx, sy) = (sample("x", &x), sample("y", &y));

        let mut wins = 0.0;
        let mut ties = 0.0;
        for &a in &x {
            for &b in &y {
                if a < b {
                    wins += 1.0;
                } else if a == b {
                    ties += 1.0;
                }
            }
        }
        let pairs = (n1 * n2) as f64;
        let theta = (wins + 0.5 * ties) / pairs;
        let tau = ties / pairs;
        if (mw_effect(&sx, &sy).unwrap() - theta).abs() > 1e-12
            || (tie_probability(&sx, &sy).unwrap() - tau).abs() > 1e-12
        {
            fails[0] += 1;
        }

        let e = EffectEstimate::from_samples(&sx, &sy).unwrap();
        let m = n1.min(n2) as f64;
        let bound = e.theta_hat * (1.0 - e.theta_hat) / (m - 1.0);
        if !(e.var_unbiased >= 0.0 && e.var_unbiased <= bound * (1.0 + 1e-12) + 1e-15) {
            fails[1] += 1;
        }

        let ci = c2_interval(&e, 0.05).unwrap();
        if !(0.0 <= ci.lower && ci.lower <= ci.upper && ci.upper <= 1.0) {
            fails[2] += 1;
        }

        let bm = brunner_munzel_test(&sx, &sy, 0.05).unwrap();
        let bm_ci = bm_interval_for(&BmStatistic::from_estimate(&e), e.total(), 0.05).unwrap();
        let c2 = c2_test(&sx, &sy, 0.05).unwrap();
        bm_compat_checked += 1;
        if bm.reject == bm_ci.contains(0.5) || c2.reject == ci.contains(0.5) {
            fails[3] += 1;
        }

        if let Some(q) = ci.q_hat {
            let th = e.theta_hat;
            if [ci.lower, ci.upper]
                .iter()
                .any(|&b| ((th - b).powi(2) - q * c * b * (1.0 - b)).abs() > 1e-10)
            {
                fails[4] += 1;
            }
        }
    }
    let mut checks = Checks::new();
    for (name, f) in ["(a) pairwise oracles", "(b) variance bound", "(c) range", "(d) compatibility", "(e) quadratic"]
        .iter()
        .zip(fails)
    {
        checks.that(&format!("{name}: {f} violations"), f == 0);
    }
    checks.finish(format!(
        "100000 pairs, {bm_compat_checked} compatibility checks, zero violations ({:.1?})",
        start.elapsed()
    ))
}

fn unbiasedness() -> Outcome {
    let start = Instant::now();
    let reps = 200_000usize;
    let exp = Family::Exponential { rate: 1.0 };
    let rows: Vec<(f64, f64, f64)> = npbf::par::map_indexed(reps, |r| {
        let mut s = RngStream::new(6_006, r as u64);
        let x = exp.sample(10, &mut s).unwrap();
        let y = exp.sample(10, &mut s).unwrap();
        let e = EffectEstimate::from_samples(&sample("x", &x), &sample("y", &y)).unwrap();
        (e.theta_hat, e.var_unbiased, e.var_delong_unscaled())
    });
    let rf = reps as f64;
    let mean_theta = rows.iter().map(|r| r.0).sum::<f64>() / rf;
    let corr = rf / (rf - 1.0);
    // per-replication contributions to (mean σ̂²_N − empirical Var θ̂)
    let diffs: Vec<f64> = rows.iter().map(|r| r.1 - corr * (r.0 - mean_theta).powi(2)).collect();
    let mean_diff = diffs.iter().sum::<f64>() / rf;
    let se = (diffs.iter().map(|d| (d - mean_diff).powi(2)).sum::<f64>() / (rf - 1.0) / rf).sqrt();
    let emp_var = rows.iter().map(|r| (r.0 - mean_theta).powi(2)).sum::<f64>() / (rf - 1.0);
    let mean_unbiased = rows.iter().map(|r| r.1).sum::<f64>() / rf;
    let mean_delong = rows.iter().map(|r| r.2).sum::<f64>() / rf;
    let elapsed = start.elapsed();

    let mut c = Checks::new();
    c.that(
        &format!("|mean σ̂²_N − Var θ̂| = {:.3e} > 3·SE = {:.3e}", mean_diff.abs(), 3.0 * se),
        mean_diff.abs() <= 3.0 * se,
    );
    c.that(
        &format!("DeLong mean {mean_delong:.5e} ≤ Var θ̂ {emp_var:.5e}"),
        mean_delong > emp_var,
    );
    c.runtime(elapsed, 120.0);
    c.finish(format!(
        "Var θ̂={emp_var:.5e} mean σ̂²_N={mean_unbiased:.5e} (diff {:.2} SE) mean DeLong={mean_delong:.5e} ({:.1?})",
        mean_diff / se,
        elapsed
    ))
}

fn type1_calibration() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let mut summary = Vec::new();
    for setting in [1, 7] {
        let cfg = SimConfig {
            alphas: vec![0.05, 0.005],
            methods: vec![SimMethod::C2],
            master_seed: 7_007,
            ..SimConfig::new(Study::Type1, setting, 30, 30)
        };
        for row in run_type1(&cfg).unwrap().rows {
            let se = (row.alpha * (1.0 - row.alpha) / row.n_iter as f64).sqrt();
            c.that(
                &format!("setting {setting} α={} C² rate {:.5} outside ±4·SE", row.alpha, row.rate),
                (row.rate - row.alpha).abs() <= 4.0 * se,
            );
            summary.push(format!("s{setting} α={} C²={:.5}", row.alpha, row.rate));
        }
    }
    let cfg = SimConfig {
        alphas: vec![0.005],
        methods: vec![SimMethod::Bm],
        master_seed: 7_007,
        ..SimConfig::new(Study::Type1, 2, 30, 15)
    };
    let row = &run_type1(&cfg).unwrap().rows[0];
    let se = (0.005f64 * 0.995 / row.n_iter as f64).sqrt();
    c.that(
        &format!("setting 2 (30,15) BM rate {:.5} not above 0.005 + 2·SE", row.rate),
        row.rate > 0.005 + 2.0 * se,
    );
    summary.push(format!("s2(30,15) α=0.005 BM={:.5}", row.rate));
    let elapsed = start.elapsed();
    c.runtime(elapsed, 600.0);
    c.finish(format!("{} ({:.1?})", summary.join(", "), elapsed))
}

fn coverage() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let mut summary = Vec::new();
    let rate = |theta: f64| {
        let cfg = SimConfig {
            target_theta: Some(theta),
            master_seed: 8_008,
            ..SimConfig::new(Study::Coverage, 1, 15, 15)
        };
        run_coverage(&cfg).unwrap().rows
    };
    for row in rate(0.6) {
        c.that(
            &format!("θ=0.6 {} coverage {:.4} outside [0.925, 0.975]", row.method.tag(), row.rate),
            (0.925..=0.975).contains(&row.rate),
        );
        summary.push(format!("θ=0.6 {}={:.4}", row.method.tag(), row.rate));
    }
    let rows = rate(0.9);
    let get = |m: SimMethod| rows.iter().find(|r| r.method == m).unwrap().rate;
    let (bm, ratio) = (get(SimMethod::Bm), get(SimMethod::C2));
    c.that(&format!("θ=0.9 BM coverage {bm:.4} ≥ 0.925"), bm < 0.925);
    c.that(&format!("θ=0.9 ratio {ratio:.4} < BM {bm:.4}"), ratio >= bm);
    for row in &rows {
        summary.push(format!("θ=0.9 {}={:.4}", row.method.tag(), row.rate));
    }
    let elapsed = start.elapsed();
    c.runtime(elapsed, 900.0);
    c.finish(format!("{} ({:.1?})", summary.join(", "), elapsed))
}

/// Kolmogorov limit: P(√n·D > x) ≈ 2Σ(−1)^{k−1}e^{−2k²x²}.
fn ks_pvalue(d: f64, n: usize) -> f64 {
    let x = (n as f64).sqrt() * d;
    let mut s = 0.0;
    for k in 1..100 {
        let kf = k as f64;
        s += if k % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * kf * kf * x * x).exp();
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_stat(mut v: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pearson χ² p-value for observed counts against cell probabilities.
fn chi2_pvalue(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

fn kernels() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    c.abs("c_0.95", chi2_1_quantile(0.95).unwrap(), 3.8415, 1e-4);
    c.abs("t(0.975, 1)", t_quantile(0.975, 1.0).unwrap(), 12.7062, 1e-3);
    c.abs(
        "t(0.975, 1e6) vs z",
        t_quantile(0.975, 1e6).unwrap(),
        normal_quantile(0.975).unwrap(),
        1e-4,
    );

    let mut worst_normal: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let grid: Vec<f64> = (0..=60)
        .map(|k| 10f64.powf(-6.0 + 6.0 * k as f64 / 60.0))
        .flat_map(|p| [p, 1.0 - p])
        .filter(|p| *p > 0.0 && *p < 1.0)
        .collect();
    for &p in &grid {
        worst_normal = worst_normal.max((normal_cdf(normal_quantile(p).unwrap()) - p).abs());
        let mut df = 0.5;
        while df <= 1e6 {
            let q = t_quantile(p, df).unwrap();
            worst_t = worst_t.max((t_cdf(q, df).unwrap() - p).abs());
            df *= 3.1;
        }
    }
    c.that(&format!("normal round trip {worst_normal:e} > 1e-12"), worst_normal <= 1e-12);
    c.that(&format!("t round trip {worst_t:e} > 1e-10"), worst_t <= 1e-10);

    let n = 100_000;
    let continuous: [(Family, Box<dyn Fn(f64) -> f64>); 5] = [
        (Family::Normal { mean: 0.0, variance: 9.0 }, {
            let d = Normal::new(0.0, 3.0).unwrap();
            Box::new(move |x| d.cdf(x))
        }),
        (Family::Beta { alpha: 2.0, beta: 5.0 }, {
            let d = Beta::new(2.0, 5.0).unwrap();
            Box::new(move |x| d.cdf(x))
        }),
        (Family::Beta { alpha: 0.5, beta: 0.5 }, {
            let d = Beta::new(0.5, 0.5).unwrap();
            Box::new(move |x| d.cdf(x))
        }),
        (Family::Exponential { rate: 2.5 }, {
            let d = Exp::new(2.5).unwrap();
            Box::new(move |x| d.cdf(x))
        }),
        (Family::Laplace { location: 0.0, scale: 3.0 }, {
            let d = Laplace::new(0.0, 3.0).unwrap();
            Box::new(move |x| d.cdf(x))
        }),
    ];
    let mut gof = Vec::new();
    for (i, (fam, cdf)) in continuous.iter().enumerate() {
        let v = fam.sample(n, &mut RngStream::new(9_009, i as u64)).unwrap();
        let p = ks_pvalue(ks_stat(v, cdf), n);
        c.that(&format!("KS {} p={p:e}", fam.describe()), p > 1e-6);
        gof.push(format!("{} {p:.3}", fam.describe()));
    }

    let pois = Family::Poisson { lambda: 1.0 };
    let v = pois.sample(n, &mut RngStream::new(9_009, 10)).unwrap();
    let oracle = Poisson::new(1.0).unwrap();
    let mut counts = [0usize; 7];
    for x in v {
        counts[(x as usize).min(6)] += 1;
    }
    let mut probs: Vec<f64> = (0..6).map(|k| oracle.pmf(k)).collect();
    probs.push(1.0 - oracle.cdf(5));
    let p = chi2_pvalue(&counts, &probs);
    c.that(&format!("χ² Pois(1) p={p:e}"), p > 1e-6);
    gof.push(format!("Pois(1) {p:.3}"));

    let spec = LikertSpec::equal_width(5, [5.0, 2.0], [5.0, 5.0]).unwrap();
    for g in [1u8, 2] {
        let s = likert_sample(&spec, g, n, &mut RngStream::new(9_009, 10 + g as u64)).unwrap();
        let mut counts = [0usize; 5];
        for &x in s.values() {
            counts[x as usize - 1] += 1;
        }
        let d = Beta::new(spec.alpha[g as usize - 1], spec.beta[g as usize - 1]).unwrap();
        let probs: Vec<f64> = (1..=5).map(|j| d.cdf(j as f64 / 5.0) - d.cdf((j - 1) as f64 / 5.0)).collect();
        let p = chi2_pvalue(&counts, &probs);
        c.that(&format!("χ² Likert group {g} p={p:e}"), p > 1e-6);
        gof.push(format!("Likert{g} {p:.3}"));
    }
    c.finish(format!(
        "round trips {worst_normal:.1e}/{worst_t:.1e}; GoF p: {} ({:.1?})",
        gof.join(", "),
        start.elapsed()
    ))
}

fn main() {
    // `cargo test` passes harness flags; a filter argument selects criteria
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 worked example goldens", worked_example),
        ("2 artificial dataset goldens", artificial_goldens),
        ("3 permutation example", permutation_example),
        ("4 exhaustive permutation oracle", exhaustive_oracle),
        ("5 property suite", property_suite),
        ("6 unbiasedness", unbiasedness),
        ("7 type-I calibration", type1_calibration),
        ("8 coverage", coverage),
        ("9 distribution kernels", kernels),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!("criterion {name}: {} | {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
