use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tctvp::io::run::{cmd_estimate, cmd_forecast, cmd_irf, cmd_ml_grid, cmd_simulate, RunContext};
use tctvp::io::RunConfig;
use tctvp::Error;

#[derive(Parser)]
#[command(name = "tctvp", version, about = "Theory-coherent TVP-VAR toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Input CSV (date column plus one column per series).
    #[arg(long)]
    data: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base directory for run output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Worker threads (default: TCTVP_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample (λ, γ, θ, Σ, Φ) from the posterior.
    Estimate(Common),
    /// Recursive out-of-sample forecasts with RMSE and CRPS.
    Forecast {
        #[command(flatten)]
        common: Common,
        /// Run directory of a previous `estimate`.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Impulse responses identified by the theory's impact matrix.
    Irf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Simulate data from the theory at fixed θ.
    Simulate(Common),
    /// Log marginal likelihood over a (λ, γ) grid.
    MlGrid(Common),
}

fn context(c: &Common) -> tctvp::Result<RunContext> {
    let config = match &c.config {
        Some(p) => RunConfig::load(p)?.0,
        None => RunConfig::default(),
    };
    let mut ctx = RunContext::new(config);
    if let Some(d) = &c.data {
        ctx.data = Some(d.clone());
    }
    if let Some(o) = &c.out {
        ctx.out = o.clone();
    }
    if let Some(s) = c.seed {
        ctx.seed = s;
    }
    ctx.chains = c.chains.max(1);
    let threads = c.threads.or_else(|| {
        std::env::var("TCTVP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(ctx)
}

fn run(cli: Cli) -> tctvp::Result<PathBuf> {
    match cli.command {
        Command::Estimate(c) => cmd_estimate(&context(&c)?),
        Command::Forecast { common, from } => cmd_forecast(&context(&common)?, from.as_deref()),
        Command::Irf { common, from } => cmd_irf(&context(&common)?, from.as_deref()),
        Command::Simulate(c) => cmd_simulate(&context(&c)?),
        Command::MlGrid(c) => cmd_ml_grid(&context(&c)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
