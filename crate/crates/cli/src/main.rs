use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsamg::probgen::ProblemSpec;
use nsamg_cli::{
    execute, family_from_name, generate_files, write_outputs, CliError, ExperimentConfig, Report,
    Suite,
};

#[derive(Parser)]
#[command(
    name = "nsamg",
    version,
    about = "Verification suites for nonsymmetric AMG convergence theory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite (or `all`) with default parameters.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate a problem and write A, B and M⁻¹ as Matrix Market files.
    Gen(GenArgs),
}

#[derive(Args)]
struct Overrides {
    /// Random instances per suite.
    #[arg(long)]
    seeds: Option<usize>,
    /// Fixed problem size.
    #[arg(long)]
    n: Option<usize>,
    /// Coarse levels in V-cycle hierarchies.
    #[arg(long)]
    levels: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON report path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV table of compared values.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Overrides {
    fn apply(self, c: &mut ExperimentConfig) {
        if let Some(x) = self.seeds {
            c.seeds = x;
        }
        if self.n.is_some() {
            c.n = self.n;
        }
        if let Some(x) = self.levels {
            c.levels = x;
        }
        if let Some(x) = self.seed {
            c.seed = x;
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        if self.output.is_some() {
            c.output = self.output;
        }
        if self.csv.is_some() {
            c.csv = self.csv;
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Family name (`convection_diffusion_1d`, `random_b_normal`, ...) or a
    /// JSON file holding a full problem spec.
    family: String,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Family parameters as a JSON object, e.g. `{"epsilon": 0.05}`.
    #[arg(long)]
    params: Option<String>,
    /// Output path for A; B and M⁻¹ go next to it as `<stem>.B.mtx` and `<stem>.Minv.mtx`.
    #[arg(short, long)]
    output: PathBuf,
}

fn gen_spec(args: &GenArgs) -> Result<ProblemSpec, CliError> {
    let path = PathBuf::from(&args.family);
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()));
    }
    let params = match &args.params {
        Some(text) => {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("--params: {e}")))?
        }
        None => serde_json::Map::new(),
    };
    Ok(ProblemSpec::new(
        family_from_name(&args.family, params)?,
        args.n,
        args.seed,
    ))
}

fn report_summary(report: &Report) {
    let s = &report.summary;
    eprintln!(
        "{} checks: {} pass, {} fail, {} skipped (hypothesis) in {:.2}s",
        s.total, s.pass, s.fail, s.skipped_hypothesis, report.timestamp.runtime_seconds
    );
    for r in report.failures().take(20) {
        match (r.lhs, r.rhs) {
            (Some(l), Some(rh)) => eprintln!("  FAIL {}: {l:e} vs {rh:e} ({})", r.name, r.anchor),
            _ => eprintln!("  FAIL {}: {}", r.name, r.note.as_deref().unwrap_or("")),
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (command, config) = match cli.command {
        Command::Gen(args) => {
            let spec = gen_spec(&args)?;
            let files = generate_files(&spec, &args.output)?;
            eprintln!(
                "wrote {}, {}, {}",
                files.a.display(),
                files.b.display(),
                files.minv.display()
            );
            return Ok(0);
        }
        Command::Verify { suite, overrides } => {
            let mut c = ExperimentConfig {
                suites: vec![suite],
                ..ExperimentConfig::default()
            };
            overrides.apply(&mut c);
            (format!("verify {}", suite.name()), c)
        }
        Command::Run { config, overrides } => {
            let mut c = ExperimentConfig::load(&config)?;
            overrides.apply(&mut c);
            ("run".to_string(), c)
        }
    };
    let report = execute(&command, &config)?;
    write_outputs(&report, &config)?;
    report_summary(&report);
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
