use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use horseshoe::error::Error;
use horseshoe::report::{cmd_lambda, cmd_oracle, cmd_plot, cmd_verify, Format, RunConfig};

/// Verifies strip and sector conditions for the nonautonomous Hénon family
/// and approximates its invariant set.
#[derive(Parser)]
#[command(name = "horseshoe", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Verb {
    /// Check every condition over the time window and write the report.
    Verify,
    /// Write the symbolic approximation of the set at time --n.
    Lambda,
    /// Compare the symbolic set with lattice points whose orbits survive.
    Oracle {
        /// Use points from an earlier `lambda` CSV instead of recomputing.
        #[arg(long)]
        lambda: Option<PathBuf>,
    },
    /// Draw the strips and the symbolic set at time --n as SVG.
    Plot,
}

#[derive(Args)]
struct Flags {
    /// TOML file with any RunConfig fields; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    a_star: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    mu_h: Option<f64>,
    #[arg(long, global = true)]
    mu_v: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    n_min: Option<i64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    n_max: Option<i64>,
    /// Lattice points per side of each strip intersection in the sector sweep.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Past symbols per word (future symbols are one more).
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Proceed even if verification fails.
    #[arg(long, global = true)]
    force: bool,
    /// Time slice for lambda, oracle and plot.
    #[arg(long, global = true, allow_negative_numbers = true)]
    n: Option<i64>,
    /// Survival window of the oracle.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    oracle_grid: Option<usize>,
    /// Refine the oracle lattice around survivors.
    #[arg(long, global = true)]
    adaptive: bool,
}

impl Flags {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$g = v; } )* };
        }
        set!(a_star => a_star, epsilon => epsilon, mu_h => mu_h, mu_v => mu_v, mu => mu,
             n_min => n_min, n_max => n_max, grid => grid, depth => depth, out => out,
             n => n, k => window, oracle_grid => oracle_grid);
        if let Some(fs) = &self.format {
            c.formats = fs.iter().map(|s| s.parse::<Format>()).collect::<Result<_, _>>()?;
        }
        c.force |= self.force;
        c.adaptive |= self.adaptive;
        c.validate()?;
        Ok(c)
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HORSESHOE_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("HORSESHOE_THREADS must be a positive integer, got {v:?}"))?;
        anyhow::ensure!(n > 0, "HORSESHOE_THREADS must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

/// 0 on success, 1 when a check fails, 2 on bad input or I/O trouble.
fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = cli.flags.config()?;
    match cli.verb {
        Verb::Verify => {
            let (report, files) = cmd_verify(&cfg)?;
            print!("{}", report.summary());
            print_files(&files);
            Ok(if report.pass { 0 } else { 1 })
        }
        Verb::Lambda => {
            let run = cmd_lambda(&cfg)?;
            println!("{} points at n = {}, depth {}", run.points, run.n, run.depth);
            print_files(&run.files);
            Ok(0)
        }
        Verb::Plot => {
            let run = cmd_plot(&cfg)?;
            print_files(&run.files);
            Ok(0)
        }
        Verb::Oracle { lambda } => {
            let run = cmd_oracle(&cfg, lambda.as_deref())?;
            let a = &run.agreement;
            println!(
                "symbolic -> survivors {:.6e}, survivors -> symbolic {:.6e}, threshold {:.6e} ({} survivors, {} symbolic points)",
                a.symbolic_to_survivor, a.survivor_to_symbolic, a.threshold, a.survivor_points, a.symbolic_points
            );
            println!("oracle agreement {}", if a.pass { "PASSED" } else { "FAILED" });
            print_files(&run.files);
            Ok(if a.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::VerificationFailed(_)) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
