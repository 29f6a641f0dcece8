use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epsilon_cli::config::{ConfigFile, RunConfig};
use epsilon_cli::{run, SuiteName};
use epsilon_core::scalar::BackendMode;

#[derive(Debug, Parser)]
#[command(name = "epsilon-verify", version)]
#[command(about = "Exhaustive checks of Gauss sums, epsilon factors, Kloosterman sums and Bessel transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gauss sums, root numbers and the GL(1) functional equation
    Gauss(Flags),
    /// Stability of twisted epsilon factors
    Stability(Flags),
    /// Direct and Gauss-sum evaluations of hyper-Kloosterman sums
    Kloosterman(Flags),
    /// Bessel transform: support, duality and the Kloosterman prefactor
    Bessel(Flags),
    /// Every suite
    All(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML file with the same keys; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    t_max: Option<u32>,
    /// Ranks, comma separated
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long)]
    backend: Option<BackendMode>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Per-case cap on summation terms
    #[arg(long)]
    budget: Option<u64>,
    /// Largest a(π) in representation sweeps
    #[arg(long)]
    max_conductor: Option<u32>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a flat CSV summary
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record wall-clock timings (reports then differ between runs)
    #[arg(long)]
    timing: bool,
}

impl Flags {
    fn as_file(&self) -> ConfigFile {
        ConfigFile {
            p: self.p,
            t_max: self.t_max,
            n: self.n.clone(),
            backend: self.backend,
            tolerance: self.tolerance,
            budget: self.budget,
            max_conductor: self.max_conductor,
            out: self.out.clone(),
            csv: self.csv.clone(),
            timing: self.timing.then_some(true),
        }
    }

    fn resolve(&self) -> Result<RunConfig, epsilon_cli::config::ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg = ConfigFile::load(path)?.apply(cfg);
        }
        let cfg = self.as_file().apply(cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (names, flags): (Vec<SuiteName>, _) = match &cli.command {
        Command::Gauss(f) => (vec![SuiteName::Gauss], f),
        Command::Stability(f) => (vec![SuiteName::Stability], f),
        Command::Kloosterman(f) => (vec![SuiteName::Kloosterman], f),
        Command::Bessel(f) => (vec![SuiteName::Bessel], f),
        Command::All(f) => (SuiteName::ALL.to_vec(), f),
    };
    let cfg = match flags.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = run(&names, &cfg);
    let json = match report.to_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("cannot serialize report: {e}");
            return ExitCode::from(2);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if let Some(path) = &cfg.csv {
        if let Err(e) = report.write_csv(path) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    for s in &report.suites {
        eprintln!(
            "{:<12} {:>9} cases {:>6} failures {:>6} skipped  {}",
            s.suite,
            s.cases,
            s.failure_count,
            s.skip_count,
            if s.passed() { "PASS" } else { "FAIL" }
        );
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
