mod commands;
mod input;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "formality", version, about = "Polyvectors, polydifferential operators and graph-weighted star products with flat-module coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// JSON input files, in the order the command expects them.
    #[arg(long = "input", short = 'i')]
    pub inputs: Vec<PathBuf>,
    /// JSON flat module for module-valued arguments (default: rank-1, no connection).
    #[arg(long)]
    pub module: Option<PathBuf>,
    /// Ambient dimension, needed when the inputs carry no polynomial objects.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Args, Clone, Debug)]
pub struct Mc {
    /// Monte-Carlo samples per graph weight.
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory holding the weight cache.
    #[arg(long = "cache", env = "FORMALITY_CACHE_DIR")]
    pub cache: Option<PathBuf>,
    /// Pass threshold for Monte-Carlo quantities, in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub tolerance: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Schouten bracket of two polyvectors, or Gerstenhaber bracket of two polydifferential operators.
    Bracket(Common),
    /// Action of a plain polyvector (·_S) or polydifferential operator (·_G) on a module-valued one.
    Act(Common),
    /// HKR image of a (module-valued) polyvector, with a cocycle check.
    Hkr(Common),
    /// Enumerate admissible graphs of type (n, m).
    Graphs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Number of edges (default 2n + m − 2).
        #[arg(long)]
        edges: Option<usize>,
    },
    /// Monte-Carlo weight of one admissible graph.
    Weight {
        /// Graph as canonical JSON, e.g. {"n":1,"m":2,"edges":[[1,-1],[1,-2]]}.
        #[arg(long)]
        graph: Option<String>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: Mc,
    },
    /// Star product of a Poisson bivector up to a given order in h.
    Star {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 2)]
        h_cap: usize,
    },
    /// Associativity defect (f*g)*k − f*(g*k) of the star product.
    Assoc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 2)]
        h_cap: usize,
        /// Functions in x1 … xd; the defaults use the first and last coordinates.
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        k: Option<String>,
    },
    /// Truncated comparison of Poisson and Hochschild cohomology.
    Cohomology {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: Mc,
        /// Weight cap W on |β| + (1 − p)|I| of the polyvector basis.
        #[arg(long, default_value_t = 3)]
        degree_cap: u32,
        /// Symbol-degree cap of the Hochschild model complex.
        #[arg(long, default_value_t = 3)]
        symbol_cap: u32,
        /// Skip the Monte-Carlo order-h¹ residual.
        #[arg(long)]
        no_residual: bool,
    },
    /// Run a named invariant suite.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Flat module to use instead of random ones.
        #[arg(long)]
        module: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<commands::Report> {
    match cli.command {
        Command::Bracket(c) => commands::bracket(&c),
        Command::Act(c) => commands::act(&c),
        Command::Hkr(c) => commands::hkr(&c),
        Command::Graphs { n, m, edges } => commands::graphs(n, m, edges),
        Command::Weight { graph, common, mc } => commands::weight(graph.as_deref(), &common, &mc),
        Command::Star { common, mc, h_cap } => commands::star(&common, &mc, h_cap),
        Command::Assoc { common, mc, h_cap, f, g, k } => commands::assoc(&common, &mc, h_cap, [f, g, k]),
        Command::Cohomology { common, mc, degree_cap, symbol_cap, no_residual } => {
            commands::cohomology(&common, &mc, degree_cap, symbol_cap, !no_residual)
        }
        Command::Verify { suite, seed, cases, module } => verify::run(suite, seed, cases, module.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.body).expect("reports serialize");
            let written = match &output {
                Some(path) => std::fs::write(path, text + "\n").map_err(anyhow::Error::from),
                None => match writeln!(std::io::stdout().lock(), "{text}") {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => r.map_err(anyhow::Error::from),
                },
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
