use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kernelopt::{run, ExperimentConfig, Mode, RunContext, Runner};

#[derive(Parser)]
#[command(
    name = "kernelopt",
    version,
    about = "Tail-probability experiments for stochastic optimizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sampling and consistency tail curves.
    Tails(Common),
    /// Starved-ball search and the bump counterexample.
    Adversarial(Common),
    /// Exact finite-space checks.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Number of randomized scenarios.
        #[arg(long, value_name = "T")]
        randomized: Option<usize>,
    },
    /// Gap-to-dispersion set inclusion on every trajectory.
    ModusPonens(Common),
    /// Ball covers of the search box.
    Cover(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs serially, 0 uses every core.
    #[arg(long, env = "KERNELOPT_THREADS", default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common, randomized) = match cli.command {
        Command::Tails(c) => (Mode::Tails, c, None),
        Command::Adversarial(c) => (Mode::Adversarial, c, None),
        Command::Oracle { common, randomized } => (Mode::Oracle, common, randomized),
        Command::ModusPonens(c) => (Mode::ModusPonens, c, None),
        Command::Cover(c) => (Mode::Cover, c, None),
    };
    let prepared = ExperimentConfig::load(&common.config).and_then(|mut cfg| {
        if let Some(seed) = common.seed {
            cfg.master_seed = seed;
        }
        Ok((cfg, Runner::with_threads(common.threads)?))
    });
    let (cfg, runner) = match prepared {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ctx = RunContext {
        exec: &runner,
        out: &common.out,
        randomized,
    };
    match run(mode, &cfg, &ctx) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            if outcome.violations > 0 {
                eprintln!("contract violations: {}", outcome.violations);
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
