use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use theta_norms::exponent::{conjugate_exponent_with, theta_eval, DEFAULT_EPS_MIN};
use theta_norms::function_space::f_norm;
use theta_norms::gt_weighting::{find_gt_factorization_with, BilinearForm, GtOptions};
use theta_norms::io::{parse_matrix, parse_measure_function, parse_sequence};
use theta_norms::sequence_space::seq_norm;
use theta_norms::suite::{jsonl_to_csv, run_suite, OutputFormat, SuiteConfig};
use theta_norms::{Error, ExponentValue, ThetaExponent};

/// Environment variable that overrides the configured master seed.
const SEED_ENV: &str = "THETA_NORMS_SEED";

#[derive(Parser)]
#[command(name = "theta-norms", version, about = "Generalized-exponent norms, sharp inequalities and GT factorization")]
struct Cli {
    /// Smallest admissible distance of an exponent from 1 before its conjugate is refused.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_MIN)]
    eps_min: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded inequality suite; exit 1 if any check fails.
    Verify(SuiteArgs),
    /// Like `verify` with an explicit output format, or convert an existing JSONL report.
    Report {
        #[arg(long, value_enum)]
        format: Format,
        /// Convert this JSONL report instead of running the suite.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Search Grothendieck factorization weights for a matrix in CSV form.
    Gt {
        matrix: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the certificate JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm of a sequence (one value per line) or of a sampled function (`node,weight,sample`).
    Norm {
        data: PathBuf,
        /// Exponent value, or `inf`.
        #[arg(long, conflicts_with_all = ["theta", "p"])]
        e: Option<ExponentValue>,
        /// Theta preset (`identity`, `power:k`, `affine-power:a,b,c`), evaluated at `--p`.
        #[arg(long, requires = "p")]
        theta: Option<String>,
        #[arg(long, requires = "theta")]
        p: Option<f64>,
        /// Treat the data as `node,weight,sample` rows.
        #[arg(long)]
        function: bool,
    },
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scale every right-hand side (self-test of the exit-code contract).
    #[arg(long, hide = true)]
    debug_rhs_scale: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure { code: 2, msg: err.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Self {
        Failure { code: 2, msg: err.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure { code: 2, msg: format!("{}: {e}", path.display()) })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure { code: 2, msg: format!("{}: {e}", p.display()) })?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(args: &SuiteArgs) -> Result<SuiteConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => SuiteConfig::from_toml(&read(p)?)?,
        None => SuiteConfig::default(),
    };
    // Precedence: config file < environment < command line.
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.master_seed = v
            .trim()
            .parse()
            .map_err(|_| Failure { code: 2, msg: format!("{SEED_ENV}={v:?} is not a 64-bit integer") })?;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials_per_check = t;
    }
    if let Some(o) = &args.out {
        cfg.output.path = Some(o.display().to_string());
    }
    if let Some(scale) = args.debug_rhs_scale {
        cfg.debug.rhs_scale = scale;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_verify(cfg: &SuiteConfig) -> Result<u8, Failure> {
    let out = open_out(cfg.output.path.as_deref().map(Path::new))?;
    let summary = run_suite(cfg, out)?;
    eprintln!(
        "{} lines, {} violations, {} ms",
        summary.lines, summary.violations, summary.elapsed_ms
    );
    for c in summary.checks.iter().filter(|c| c.violations > 0) {
        eprintln!("  {}: {} of {} trials violated", c.check, c.violations, c.trials);
    }
    Ok(summary.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Verify(args) => run_verify(&load_config(&args)?),
        Command::Report { format, input, suite } => {
            if let Some(input) = input {
                let text = read(&input)?;
                let mut out = open_out(suite.out.as_deref())?;
                match format {
                    Format::Csv => out.write_all(jsonl_to_csv(&text)?.as_bytes())?,
                    Format::Jsonl => out.write_all(text.as_bytes())?,
                }
                out.flush()?;
                return Ok(0);
            }
            let mut cfg = load_config(&suite)?;
            cfg.output.format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Jsonl => OutputFormat::Jsonl,
            };
            run_verify(&cfg)
        }
        Command::Gt { matrix, restarts, max_iters, seed, out } => {
            let form = BilinearForm::new(parse_matrix(&read(&matrix)?)?)?;
            let opts = GtOptions { restarts, max_iters, seed, ..GtOptions::default() };
            let cert = find_gt_factorization_with(&form, &opts)?;
            let json = serde_json::to_string_pretty(&cert).map_err(|e| Failure { code: 2, msg: e.to_string() })?;
            let mut w = open_out(out.as_deref())?;
            writeln!(w, "{json}")?;
            w.flush()?;
            eprintln!("K = {} ({})", cert.k, if cert.converged { "converged" } else { "iteration cap reached" });
            Ok(0)
        }
        Command::Norm { data, e, theta, p, function } => {
            let e = match (e, theta, p) {
                (Some(e), _, _) => e,
                (None, Some(t), Some(p)) => theta_eval(&ThetaExponent::from_preset(&t)?, p)?,
                _ => return Err(Failure { code: 2, msg: "give either --e or --theta with --p".into() }),
            };
            let conjugate = conjugate_exponent_with(e, cli.eps_min).ok().map(|c| c.to_string());
            let text = read(&data)?;
            let record = if function {
                let (mu, f) = parse_measure_function(&text)?;
                json!({ "e": e.to_string(), "conjugate": conjugate, "value": f_norm(&f, &mu, e)?, "tail_error": 0.0 })
            } else {
                let enc = seq_norm(&parse_sequence(&text)?, e)?;
                json!({ "e": e.to_string(), "conjugate": conjugate, "value": enc.value, "tail_error": enc.tail_error })
            };
            println!("{record}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
