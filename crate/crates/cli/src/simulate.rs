//! `simulate`: grids of type-I, power and coverage runs written as CSV.

use crate::error::{CliError, Result};
use npbf::sim_harness::{
    power_family, run, type1_scenario, SimConfig, SimMethod, SimReport, SimRow, Study,
    POWER_SIZES, TYPE1_SIZES,
};
use serde::{Deserialize, Serialize};

pub struct SimulateRequest {
    pub study: Study,
    pub setting: u32,
    pub sizes: Vec<(usize, usize)>,
    pub alphas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub methods: Vec<SimMethod>,
    pub iters: usize,
    pub permutations: usize,
    pub seed: u64,
}

/// Default θ grid: 0.5 to 0.9 for power, 0.5 to 0.95 for coverage.
pub fn default_thetas(study: Study) -> Vec<f64> {
    let top = if study == Study::Coverage { 9 } else { 8 };
    (0..=top).map(|k| (50 + 5 * k) as f64 / 100.0).collect()
}

pub fn default_sizes(study: Study) -> Vec<(usize, usize)> {
    match study {
        Study::Type1 => TYPE1_SIZES.iter().flatten().copied().collect(),
        Study::Power | Study::Coverage => POWER_SIZES.to_vec(),
    }
}

pub fn simulate(req: &SimulateRequest) -> Result<Vec<SimReport>> {
    // resolve the setting up front so a bad id is a usage error, not a run failure
    let known = match req.study {
        Study::Type1 => type1_scenario(req.setting).is_ok(),
        Study::Power | Study::Coverage => power_family(req.setting).is_ok(),
    };
    if !known {
        let range = if req.study == Study::Type1 { "1-14" } else { "1-4" };
        return Err(CliError::Usage(format!(
            "unknown setting {} for {} study (expected {range})",
            req.setting,
            req.study.tag()
        )));
    }
    let thetas: Vec<Option<f64>> = match req.study {
        Study::Type1 => vec![None],
        _ => req.thetas.iter().map(|&t| Some(t)).collect(),
    };
    let mut reports = Vec::new();
    for &(n1, n2) in &req.sizes {
        for &target_theta in &thetas {
            let cfg = SimConfig {
                alphas: req.alphas.clone(),
                n_iter: req.iters,
                n_p: req.permutations,
                methods: req.methods.clone(),
                master_seed: req.seed,
                target_theta,
                ..SimConfig::new(req.study, req.setting, n1, n2)
            };
            reports.push(run(&cfg)?);
        }
    }
    Ok(reports)
}

/// One CSV line of a simulation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub study: String,
    pub setting_id: u32,
    pub dist1: String,
    pub dist2: String,
    pub n1: usize,
    pub n2: usize,
    pub alpha: f64,
    pub method: String,
    pub rate: f64,
    pub se: f64,
    pub n_iter: usize,
    pub n_degenerate: usize,
    pub seed: u64,
    pub target_theta: Option<f64>,
    pub bradley_flag: Option<bool>,
}

impl From<&SimRow> for CsvRow {
    fn from(r: &SimRow) -> Self {
        Self {
            study: r.study.tag().to_string(),
            setting_id: r.setting_id,
            dist1: r.dist1.clone(),
            dist2: r.dist2.clone(),
            n1: r.n1,
            n2: r.n2,
            alpha: r.alpha,
            method: r.method.tag().to_string(),
            rate: r.rate,
            se: r.se,
            n_iter: r.n_iter,
            n_degenerate: r.n_degenerate,
            seed: r.seed,
            target_theta: r.target_theta,
            bradley_flag: r.bradley_violation,
        }
    }
}

impl TryFrom<CsvRow> for SimRow {
    type Error = CliError;

    fn try_from(r: CsvRow) -> Result<Self> {
        let study = match r.study.as_str() {
            "TYPE1" => Study::Type1,
            "POWER" => Study::Power,
            "COVERAGE" => Study::Coverage,
            s => return Err(CliError::Usage(format!("unknown study tag `{s}`"))),
        };
        let method = match r.method.as_str() {
            "BM" => SimMethod::Bm,
            "PERM" => SimMethod::Perm,
            "C2" => SimMethod::C2,
            s => return Err(CliError::Usage(format!("unknown method tag `{s}`"))),
        };
        Ok(SimRow {
            study,
            setting_id: r.setting_id,
            dist1: r.dist1,
            dist2: r.dist2,
            n1: r.n1,
            n2: r.n2,
            alpha: r.alpha,
            method,
            rate: r.rate,
            se: r.se,
            n_iter: r.n_iter,
            n_degenerate: r.n_degenerate,
            seed: r.seed,
            target_theta: r.target_theta,
            bradley_violation: r.bradley_flag,
        })
    }
}

pub fn to_csv(reports: &[SimReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut wrote = false;
    for row in reports.iter().flat_map(|r| &r.rows) {
        w.serialize(CsvRow::from(row))?;
        wrote = true;
    }
    if !wrote {
        // header only
        w.write_record([
            "study", "setting_id", "dist1", "dist2", "n1", "n2", "alpha", "method", "rate", "se", "n_iter",
            "n_degenerate", "seed", "target_theta", "bradley_flag",
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<SimRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize::<CsvRow>()
        .map(|r| SimRow::try_from(r?))
        .collect()
}
