use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use metric_frag::exponents::{beta_p_critical_point, beta_p_minimum, solve_beta, solve_theta};
use metric_frag::format::{format_matrix, read_matrix_file};
use metric_frag::harness::{
    self, ExperimentConfig, InputSource, OutputFormat, ScheduleChoice, EXIT_INVARIANT,
};
use metric_frag::oracle::{embeddable, max_subset};
use metric_frag::verify::{run_all, run_criterion};
use metric_frag::{generate, Error, Execution, FiniteMetricSpace, GeneratorSpec};

const EXIT_CONFIG: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "metric-frag", version, about = "Ultrametric skeletons of finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run fragmentation trials and print a report.
    Frag(FragArgs),
    /// Solve the exponent equations.
    Exponent(ExponentArgs),
    /// Exact embeddability checks on a small space.
    Oracle(OracleArgs),
    /// Run the acceptance suite.
    Check(CheckArgs),
    /// Print a generated distance matrix.
    Gen(GenArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "generator"])))]
struct SourceArgs {
    /// Distance matrix file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator spec, e.g. `euclidean:dim=3,n=128,seed=7`.
    #[arg(long)]
    generator: Option<GeneratorSpec>,
}

impl SourceArgs {
    fn source(&self) -> InputSource {
        match (&self.input, self.generator) {
            (Some(p), _) => InputSource::File(p.clone()),
            (None, Some(g)) => InputSource::Generator(g),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Args)]
struct FragArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    distortion: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// optimal | mn07 | file:PATH
    #[arg(long, default_value = "optimal")]
    schedule: ScheduleChoice,
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check every trial's structural invariants and ultrametric.
    #[arg(long)]
    checks: bool,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["theta", "beta", "beta_p"])))]
struct ExponentArgs {
    /// θ(D) for distortion D > 2.
    #[arg(long, value_name = "D")]
    theta: Option<f64>,
    /// β(α) for α in (0, 1].
    #[arg(long, value_name = "ALPHA")]
    beta: Option<f64>,
    /// β_p(α), with p from `--p`.
    #[arg(long, value_name = "ALPHA", requires = "p")]
    beta_p: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    distortion: f64,
    /// Also search for a largest embeddable subset.
    #[arg(long)]
    max_subset: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Run a single criterion (1-9).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
    only: Option<u8>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    generator: GeneratorSpec,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Frag(args) => frag(args),
        Command::Exponent(args) => exponent(args),
        Command::Oracle(args) => oracle(args),
        Command::Check(args) => check(args),
        Command::Gen(args) => gen(args),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> ExitCode {
    match out {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                ExitCode::FAILURE
            }
        },
        None => {
            print!("{text}");
            ExitCode::SUCCESS
        }
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn frag(args: FragArgs) -> ExitCode {
    let mut config = ExperimentConfig::new(args.source.source(), args.distortion);
    config.trials = args.trials;
    config.seed = args.seed;
    config.schedule = args.schedule;
    config.format = match args.output {
        Output::Json => OutputFormat::Json,
        Output::Csv => OutputFormat::Csv,
    };
    config.checks = args.checks;
    config.execution = execution(args.sequential);

    let report = match harness::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let code = emit(&report.render(config.format), args.out.as_ref());
    if report.has_violations() {
        let checks = report.checks.as_ref().expect("checks enabled");
        for v in &checks.violations {
            eprintln!("invariant violation in trial {} (seed {}): {}", v.trial, v.seed, v.detail);
        }
        return ExitCode::from(EXIT_INVARIANT as u8);
    }
    code
}

fn domain_exit(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn exponent(args: ExponentArgs) -> ExitCode {
    if let Some(d) = args.theta {
        return match solve_theta(d) {
            Ok(s) => {
                println!("theta({d}) = {:.15}", s.value);
                println!("residual = {:.3e}", s.residual);
                ExitCode::SUCCESS
            }
            Err(e) => domain_exit(e),
        };
    }
    if let Some(alpha) = args.beta {
        return match solve_beta(alpha) {
            Ok(s) => {
                println!("beta({alpha}) = {:.15}", s.value);
                println!("residual = {:.3e}", s.residual);
                ExitCode::SUCCESS
            }
            Err(e) => domain_exit(e),
        };
    }
    let (alpha, p) = (args.beta_p.expect("group"), args.p.expect("requires"));
    match beta_p_minimum(alpha, p) {
        Ok(m) => {
            println!("beta_p({alpha}, p={p}) = {:.15}", m.value);
            println!("minimizer = {:.12}", m.minimizer);
            println!("critical point = {:.12}", beta_p_critical_point(alpha, p, m.value));
            ExitCode::SUCCESS
        }
        Err(e) => domain_exit(e),
    }
}

fn load_raw(source: &InputSource) -> Result<FiniteMetricSpace, ExitCode> {
    let loaded = match source {
        InputSource::File(p) => read_matrix_file(p),
        InputSource::Generator(g) => generate(g),
    };
    loaded.map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_INPUT)
    })
}

fn oracle(args: OracleArgs) -> ExitCode {
    let space = match load_raw(&args.source.source()) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let all: Vec<usize> = (0..space.len()).collect();
    match embeddable(&space, &all, args.distortion) {
        Ok(ok) => println!("embeddable = {ok}"),
        Err(e) => return domain_exit(e),
    }
    if args.max_subset {
        match max_subset(&space, args.distortion, space.len()) {
            Ok(m) => {
                println!("max subset size = {}", m.size);
                println!("witness = {:?}", m.witness);
            }
            Err(e) => return domain_exit(e),
        }
    }
    ExitCode::SUCCESS
}

fn check(args: CheckArgs) -> ExitCode {
    let mode = execution(args.sequential);
    let outcomes = match args.only {
        Some(id) => run_criterion(id, mode).into_iter().collect(),
        None => run_all(mode),
    };
    let mut all_passed = true;
    for o in &outcomes {
        println!("{o}");
        all_passed &= o.passed;
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn gen(args: GenArgs) -> ExitCode {
    match generate(&args.generator) {
        Ok(space) => emit(&format_matrix(&space), args.out.as_ref()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BadSpec(_) => EXIT_CONFIG,
                _ => EXIT_INPUT,
            })
        }
    }
}
