use clap::{Parser, Subcommand, ValueEnum};
use npbf::sim_harness::{SimMethod, Study, DEFAULT_ITERS, DEFAULT_PERMUTATIONS};
use npbf_cli::analyze::{self, AnalysisRequest, MethodChoice};
use npbf_cli::error::{CliError, Result};
use npbf_cli::input;
use npbf_cli::simulate::{self, SimulateRequest};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "npbf", version, about = "Rank-based two-sample inference for the nonparametric Behrens-Fisher problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate θ and run the tests on a long-format `group,value` CSV.
    Analyze(AnalyzeArgs),
    /// Run a type-I error, power or coverage study and write CSV.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bm,
    Perm,
    C2,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyArg {
    Type1,
    Power,
    Coverage,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Input CSV, or `-` for stdin.
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Also test H₀: θ = θ₀ with the C² statistic.
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat the second group in the file as sample 1.
    #[arg(long)]
    swap_groups: bool,
    #[arg(long, default_value = "group")]
    group_column: String,
    #[arg(long, default_value = "value")]
    value_column: String,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    study: StudyArg,
    /// Setting id: 1-14 for type1, 1-4 for power and coverage.
    #[arg(long)]
    setting: u32,
    /// Group-1 sizes; pair with --n2. Defaults to the study's grid.
    #[arg(long)]
    n1: Vec<usize>,
    #[arg(long)]
    n2: Vec<usize>,
    /// Nominal level(s); repeatable.
    #[arg(long, default_values_t = [0.05])]
    alpha: Vec<f64>,
    /// True θ for power and coverage; repeatable. Defaults to a 0.05-step grid.
    #[arg(long)]
    theta: Vec<f64>,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_ITERS)]
    iters: usize,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            })
        }
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: args.input.display().to_string(),
        source,
    };
    let mut raw = String::new();
    if args.input.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut raw).map_err(io_err)?;
    } else {
        raw = std::fs::read_to_string(&args.input).map_err(io_err)?;
    }
    let (mut s1, mut s2) = input::read_groups(raw.as_bytes(), &args.group_column, &args.value_column)?;
    if args.swap_groups {
        std::mem::swap(&mut s1, &mut s2);
    }
    let req = AnalysisRequest {
        alpha: args.alpha,
        method: match args.method {
            MethodArg::Bm => MethodChoice::Bm,
            MethodArg::Perm => MethodChoice::Perm,
            MethodArg::C2 => MethodChoice::C2,
            MethodArg::All => MethodChoice::All,
        },
        theta0: args.theta0,
        permutations: args.permutations,
        seed: args.seed,
    };
    if req.theta0.is_some() && !matches!(req.method, MethodChoice::C2 | MethodChoice::All) {
        return Err(CliError::Usage("--theta0 needs --method c2 or all".into()));
    }
    let report = analyze::analyze(&s1, &s2, &req)?;
    let text = match args.format {
        OutputFormat::Text => report.to_text(),
        OutputFormat::Csv => report.to_csv()?,
        OutputFormat::Json => report.to_json_lines()?,
    };
    emit(&args.out, &text)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let study = match args.study {
        StudyArg::Type1 => Study::Type1,
        StudyArg::Power => Study::Power,
        StudyArg::Coverage => Study::Coverage,
    };
    if args.n1.len() != args.n2.len() {
        return Err(CliError::Usage(format!(
            "--n1 given {} time(s) but --n2 {} time(s)",
            args.n1.len(),
            args.n2.len()
        )));
    }
    let sizes = if args.n1.is_empty() {
        simulate::default_sizes(study)
    } else {
        args.n1.iter().copied().zip(args.n2.iter().copied()).collect()
    };
    let thetas = if args.theta.is_empty() {
        simulate::default_thetas(study)
    } else {
        args.theta.clone()
    };
    let req = SimulateRequest {
        study,
        setting: args.setting,
        sizes,
        alphas: args.alpha.clone(),
        thetas,
        methods: match args.method {
            MethodArg::Bm => vec![SimMethod::Bm],
            MethodArg::Perm => vec![SimMethod::Perm],
            MethodArg::C2 => vec![SimMethod::C2],
            MethodArg::All => SimMethod::ALL.to_vec(),
        },
        iters: args.iters,
        permutations: args.permutations,
        seed: args.seed,
    };
    let reports = simulate::simulate(&req)?;
    emit(&args.out, &simulate::to_csv(&reports)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(s) => cmd_simulate(s),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
