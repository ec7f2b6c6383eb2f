mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exact verification of Stark and Kolyvagin systems over synthetic Selmer data.
#[derive(Parser, Debug)]
#[command(name = "klab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed embedded in every report and used by randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report (for `gen`, the instance) to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub m: usize,
    /// Target invariant factors of the dual Selmer group at 1.
    #[arg(long, value_delimiter = ',', default_value = "")]
    pub e: Vec<String>,
    /// Per-prime levels for tower mode.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance with a prescribed dual Selmer structure.
    Gen(GenArgs),
    /// Check the validity axioms.
    Check { instance: PathBuf },
    /// Compute the module of Stark systems.
    Stark { instance: PathBuf },
    /// Compute Kolyvagin and stub Kolyvagin systems.
    Koly { instance: PathBuf },
    /// Transform the Stark generator into a stub Kolyvagin system.
    Transform { instance: PathBuf },
    /// Recover the dual Selmer structure from the generator's profile.
    Recover { instance: PathBuf },
    /// Find a path between core vertices.
    Path {
        instance: PathBuf,
        /// Comma-separated prime labels; the first core vertex when absent.
        #[arg(long, value_delimiter = ',')]
        from: Option<Vec<String>>,
        /// Comma-separated prime labels; the last core vertex when absent.
        #[arg(long, value_delimiter = ',')]
        to: Option<Vec<String>>,
    },
    /// Check every finite stage of a tower instance.
    Tower { instance: PathBuf },
    /// Run the property suites.
    Selftest {
        /// Comma-separated criteria, all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u32>>,
        /// Override the case count of every randomized suite.
        #[arg(long)]
        cases: Option<usize>,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("KLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| anyhow::anyhow!("KLAB_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| {
        let seed = cli.seed;
        let out = cli.out.as_deref();
        match &cli.command {
            Command::Gen(args) => commands::gen(args, seed, out),
            Command::Check { instance } => commands::check(instance, seed, out),
            Command::Stark { instance } => commands::stark(instance, seed, out),
            Command::Koly { instance } => commands::koly(instance, seed, out),
            Command::Transform { instance } => commands::transform(instance, seed, out),
            Command::Recover { instance } => commands::recover(instance, seed, out),
            Command::Path { instance, from, to } => commands::path(instance, from.as_deref(), to.as_deref(), seed, out),
            Command::Tower { instance } => commands::tower(instance, seed, out),
            Command::Selftest { criteria, cases } => commands::selftest(criteria.as_deref(), *cases, seed, out),
        }
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
