use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nlscatter::experiment::{exit_code_for, replay, run, threshold_sweep, Diagnostic, ExperimentConfig, ReportBundle};
use nlscatter::spectrum::spectrum_report;
use nlscatter::symbol::{certify_classes, SymbolSpec};
use nlscatter::Error;

type SymbolChoice = (SymbolSpec<f64>, Option<(f64, f64)>);

const DEFAULT_OUT_ROOT: &str = "nlscatter-out";

#[derive(Parser)]
#[command(name = "nlscatter", version, about = "Scattering diagnostics for non-local Schrödinger operators")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $NLSCATTER_OUT/<run name>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Root for default output directories.
    #[arg(long, env = "NLSCATTER_OUT", hide = true, default_value = DEFAULT_OUT_ROOT)]
    out_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SymbolArgs {
    /// Use Ψ(σ) = σ^ρ instead of the config symbol.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    range: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify class membership and envelope monotonicity of a symbol.
    CheckSymbol {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 4)]
        k_max: u32,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Spectral interval and zero set of Ψ′.
    Spectrum {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },
    /// Run every diagnostic listed in the config.
    Simulate,
    /// Run only the Cook integrand diagnostic of the config.
    Cook,
    /// Sweep the potential decay exponent and print the phase table.
    ThresholdSweep,
    /// Re-fit exponents from the CSV files of an earlier run.
    Replay { dir: PathBuf },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code_for(&e) as u8,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(e) => exit_code_for(e) as u8,
            None => 3,
        };
        Failure { code, error }
    }
}

fn validation(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        error: anyhow::anyhow!(msg.into()),
    }
}

impl Cli {
    fn load_config(&self) -> Result<ExperimentConfig, Failure> {
        let path = self.config.as_ref().ok_or_else(|| validation("missing --config"))?;
        ExperimentConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))
            .map_err(Failure::from)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        if let Some(out) = &self.out {
            return out.clone();
        }
        if let Some(out) = &cfg.output_dir {
            return out.clone();
        }
        let leaf = cfg.name.clone().unwrap_or_else(|| cfg.params_hash()[..12].to_string());
        self.out_root.join(leaf)
    }

    fn symbol(&self, args: &SymbolArgs) -> Result<SymbolChoice, Failure> {
        let range = args.range.as_ref().map(|r| (r[0], r[1]));
        match args.rho {
            Some(rho) => Ok((SymbolSpec::fractional(rho)?, range)),
            None if self.config.is_some() => {
                let cfg = self.load_config()?;
                Ok((cfg.symbol, range.or(Some((cfg.packet.eps, cfg.packet.r)))))
            }
            None => Err(validation("give --rho or --config")),
        }
    }
}

fn print_bundle(bundle: &ReportBundle) {
    for v in &bundle.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    println!("report: {}", bundle.report.display());
}

fn execute(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::CheckSymbol { symbol, k_max, samples } => {
            let (spec, range) = cli.symbol(symbol)?;
            let report = certify_classes(&spec, range.unwrap_or((0.1, 10.0)), *samples, *k_max)?;
            print!("kind = {}\n{}", spec.kind_name(), report.to_text_block());
            Ok(0)
        }
        Command::Spectrum { symbol, samples } => {
            let (spec, range) = cli.symbol(symbol)?;
            let range = if symbol.range.is_some() { range } else { None };
            let report = spectrum_report(&spec, range.unwrap_or((1e-4, 1e4)), *samples)?;
            print!("kind = {}\n{}", spec.kind_name(), report.to_text_block());
            Ok(0)
        }
        Command::Simulate | Command::Cook => {
            let mut cfg = cli.load_config()?;
            if matches!(cli.command, Command::Cook) {
                cfg.diagnostics = vec![Diagnostic::CookIntegrand];
            }
            let bundle = run(&cfg, &cli.out_dir(&cfg))?;
            print_bundle(&bundle);
            Ok(bundle.exit_code() as u8)
        }
        Command::ThresholdSweep => {
            let cfg = cli.load_config()?;
            let workers = cli
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            if workers == 0 {
                return Err(validation("--workers must be positive"));
            }
            let (bundle, _) = threshold_sweep(&cfg, &cli.out_dir(&cfg), workers)?;
            let report = std::fs::read_to_string(&bundle.report).map_err(Error::from)?;
            if let Some(table) = report.split("[phase_table]\n").nth(1) {
                print!("{}", table.split("\n[").next().unwrap_or(table));
                println!();
            }
            print_bundle(&bundle);
            Ok(bundle.exit_code() as u8)
        }
        Command::Replay { dir } => replay_dir(dir),
    }
}

fn replay_dir(dir: &Path) -> Result<u8, Failure> {
    let entries = replay(dir)?;
    let mut all = true;
    for e in &entries {
        let name = e.file.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let status = if e.identical() { "identical" } else { "CHANGED" };
        all &= e.identical();
        match &e.refit {
            Some(f) => println!("{name}: exponent {:.16e} r2 {:.6} {status}", f.exponent, f.r_squared),
            None => println!("{name}: no fit {status}"),
        }
    }
    Ok(if all { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
