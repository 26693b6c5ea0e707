//! `analyze`: effect estimates, tests and compatible intervals for one dataset.

use crate::error::Result;
use crate::format::{fmt_ci, fmt_sig};
use npbf::estimators::EffectEstimate;
use npbf::inference::{
    brunner_munzel_test, c2_test, c2_test_theta0, permutation_distribution, BmStatistic,
    PermutationScheme, TestResult,
};
use npbf::intervals::{bm_interval_for, c2_interval, perm_interval_for, ConfidenceInterval};
use npbf::rank_engine::Sample;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Bm,
    Perm,
    C2,
    All,
}

impl MethodChoice {
    fn includes(self, m: MethodChoice) -> bool {
        self == MethodChoice::All || self == m
    }
}

pub struct AnalysisRequest {
    pub alpha: f64,
    pub method: MethodChoice,
    pub theta0: Option<f64>,
    pub permutations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub sample1: String,
    pub sample2: String,
    pub n1: usize,
    pub n2: usize,
    pub theta_hat: f64,
    pub tau_hat: f64,
    pub var_delong: f64,
    pub n_var_unbiased: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodRow {
    pub method: &'static str,
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub ci_method: &'static str,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub exceeds_unit: bool,
    pub fallback: &'static str,
    pub theta0: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub summary: Summary,
    pub rows: Vec<MethodRow>,
}

fn row(t: &TestResult, ci: &ConfidenceInterval, theta0: Option<f64>) -> MethodRow {
    MethodRow {
        method: t.method.tag(),
        statistic: t.statistic,
        df: t.df,
        p_value: t.p_value,
        alpha: t.alpha,
        reject: t.reject,
        ci_method: ci.method.tag(),
        ci_lower: ci.lower,
        ci_upper: ci.upper,
        exceeds_unit: ci.exceeds_unit(),
        fallback: t.fallback.tag(),
        theta0,
    }
}

pub fn analyze(s1: &Sample, s2: &Sample, req: &AnalysisRequest) -> Result<AnalysisReport> {
    let e = EffectEstimate::from_samples(s1, s2)?;
    let total = e.total();
    let mut rows = Vec::new();
    if req.method.includes(MethodChoice::Bm) {
        let t = brunner_munzel_test(s1, s2, req.alpha)?;
        let ci = bm_interval_for(&BmStatistic::from_estimate(&e), total, req.alpha)?;
        rows.push(row(&t, &ci, None));
    }
    if req.method.includes(MethodChoice::Perm) {
        let scheme = PermutationScheme::MonteCarlo {
            n_permutations: req.permutations,
            seed: req.seed,
        };
        let dist = permutation_distribution(s1, s2, scheme)?;
        let ci = perm_interval_for(&dist, total, req.alpha)?;
        rows.push(row(&dist.test_result(req.alpha, scheme)?, &ci, None));
    }
    if req.method.includes(MethodChoice::C2) {
        let ci = c2_interval(&e, req.alpha)?;
        rows.push(row(&c2_test(s1, s2, req.alpha)?, &ci, None));
        if let Some(theta0) = req.theta0 {
            rows.push(row(&c2_test_theta0(s1, s2, theta0, req.alpha)?, &ci, Some(theta0)));
        }
    }
    Ok(AnalysisReport {
        summary: Summary {
            sample1: s1.label().to_string(),
            sample2: s2.label().to_string(),
            n1: e.n1,
            n2: e.n2,
            theta_hat: e.theta_hat,
            tau_hat: e.tau_hat,
            var_delong: e.var_delong,
            n_var_unbiased: e.var_unbiased_scaled(),
        },
        rows,
    })
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(out, "sample 1: {} (n = {})", s.sample1, s.n1);
        let _ = writeln!(out, "sample 2: {} (n = {})", s.sample2, s.n2);
        let _ = writeln!(out, "theta_hat    {:.4}", s.theta_hat);
        let _ = writeln!(out, "tau_hat      {:.4}", s.tau_hat);
        let _ = writeln!(out, "v2_DL        {:.4}", s.var_delong);
        let _ = writeln!(out, "N*sigma2_N   {:.4}", s.n_var_unbiased);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>8} {:>12} {:<9} {:<6} {}",
            "method", "statistic", "df", "p_value", "decision", "ci", "interval"
        );
        for r in &self.rows {
            let method = match r.theta0 {
                Some(t0) => format!("{}({})", r.method, t0),
                None => r.method.to_string(),
            };
            let df = r.df.map_or("-".to_string(), |d| format!("{d:.3}"));
            let mut ci = fmt_ci(r.ci_lower, r.ci_upper);
            if r.exceeds_unit {
                ci.push_str("  exceeds [0,1]");
            }
            if r.fallback != "none" {
                let _ = write!(ci, "  ({})", r.fallback);
            }
            let _ = writeln!(
                out,
                "{:<16} {:>10.4} {:>8} {:>12} {:<9} {:<6} {}",
                method,
                r.statistic,
                df,
                fmt_sig(r.p_value),
                if r.reject { "reject" } else { "retain" },
                r.ci_method,
                ci
            );
        }
        let alpha = self.rows.first().map_or(0.05, |r| r.alpha);
        let _ = writeln!(out, "\nalpha = {alpha}; intervals at level {}", 1.0 - alpha);
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Flat<'a> {
            sample1: &'a str,
            sample2: &'a str,
            n1: usize,
            n2: usize,
            theta_hat: f64,
            tau_hat: f64,
            var_delong: f64,
            n_var_unbiased: f64,
            method: &'a str,
            statistic: f64,
            df: Option<f64>,
            p_value: String,
            alpha: f64,
            reject: bool,
            ci_method: &'a str,
            ci_lower: String,
            ci_upper: String,
            exceeds_unit: bool,
            fallback: &'a str,
            theta0: Option<f64>,
        }
        let s = &self.summary;
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(Flat {
                sample1: &s.sample1,
                sample2: &s.sample2,
                n1: s.n1,
                n2: s.n2,
                theta_hat: s.theta_hat,
                tau_hat: s.tau_hat,
                var_delong: s.var_delong,
                n_var_unbiased: s.n_var_unbiased,
                method: r.method,
                statistic: r.statistic,
                df: r.df,
                p_value: fmt_sig(r.p_value),
                alpha: r.alpha,
                reject: r.reject,
                ci_method: r.ci_method,
                ci_lower: format!("{:.4}", r.ci_lower),
                ci_upper: format!("{:.4}", r.ci_upper),
                exceeds_unit: r.exceeds_unit,
                fallback: r.fallback,
                theta0: r.theta0,
            })?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"))
    }

    /// One JSON object per method row, with the summary repeated.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.rows {
            let mut v = serde_json::to_value(&self.summary)?;
            if let (Some(obj), serde_json::Value::Object(extra)) = (v.as_object_mut(), serde_json::to_value(r)?) {
                obj.extend(extra);
            }
            out.push_str(&serde_json::to_string(&v)?);
            out.push('\n');
        }
        Ok(out)
    }
}
