use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bsc_thermo::experiments::{
    cmd_bench, cmd_decay, cmd_gfun, cmd_probs, cmd_simulate, open_output, CommandError, ConfigError,
    ExperimentConfig, Location, Outcome,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(name = "bsc-thermo", version, about = "Markov source through a binary symmetric channel: probabilities, g-function, decay bounds and denoising benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cylinder probabilities by recursion and by enumeration.
    Probs(Flags),
    /// Decay-rate bounds against the measured variation of g.
    Decay(Flags),
    /// g by the field recursion and by the continued fraction.
    Gfun(Flags),
    /// Bit error rates of the denoisers on simulated paths.
    Bench(Flags),
    /// Writes one simulated path (.bin or .csv).
    Simulate(Flags),
}

/// Every flag overrides the same key in `--config`.
#[derive(Args)]
struct Flags {
    /// Plain-text `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Seed or comma-separated seed list.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `p:eps` cells separated by `;`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    grid_file: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    max_n: Option<String>,
    #[arg(long)]
    windows: Option<String>,
    /// Comma-separated subset of exact_bf, gibbs, dude, bfp_exact, bfp_empirical.
    #[arg(long)]
    algorithms: Option<String>,
    /// Path file from `simulate` used instead of generating data.
    #[arg(long)]
    input: Option<String>,
}

impl Flags {
    fn to_config(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let overrides = [
            ("p", &self.p),
            ("eps", &self.eps),
            ("n", &self.n),
            ("seed", &self.seed),
            ("k", &self.k),
            ("k_max", &self.k_max),
            ("depth", &self.depth),
            ("tol", &self.tol),
            ("out", &self.out),
            ("grid", &self.grid),
            ("grid_file", &self.grid_file),
            ("length", &self.length),
            ("samples", &self.samples),
            ("max_n", &self.max_n),
            ("windows", &self.windows),
            ("algorithms", &self.algorithms),
            ("input", &self.input),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v, &Location(None))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(outcome: &Outcome) -> ExitCode {
    let mut code = ExitCode::SUCCESS;
    for check in &outcome.checks {
        if !check.passed {
            eprintln!("check failed: {} ({})", check.name, check.detail);
            code = ExitCode::from(EXIT_CHECK);
        }
    }
    code
}

fn run(command: Command) -> Result<ExitCode, CommandError> {
    let (flags, name) = match &command {
        Command::Probs(f) => (f, "probs"),
        Command::Decay(f) => (f, "decay"),
        Command::Gfun(f) => (f, "gfun"),
        Command::Bench(f) => (f, "bench"),
        Command::Simulate(f) => (f, "simulate"),
    };
    let cfg = flags.to_config()?;
    if name == "simulate" {
        let path = cmd_simulate(&cfg)?;
        eprintln!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    }
    let mut out = open_output(cfg.out.as_deref())?;
    let outcome = match name {
        "probs" => cmd_probs(&cfg, &mut out)?,
        "decay" => cmd_decay(&cfg, &mut out)?,
        "gfun" => cmd_gfun(&cfg, &mut out)?,
        _ => cmd_bench(&cfg, &mut out)?.0,
    };
    Ok(report(&outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(CommandError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_OTHER)
        }
    }
}
