use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use amenlab::experiments::{self, Builtin, CloudKind, GraphSource, PipelineInput};
use amenlab::matrix::NormIndex;
use amenlab::report::{Caps, Format, Report, RunConfig};
use amenlab::{LabError, Result};

#[derive(Parser)]
#[command(
    name = "amenlab",
    version,
    about = "Approximate-diagonal, expander and Mazur-map experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated primes.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2,3")]
    primes: Vec<u64>,
    /// Norm index: a number >= 1, or inf.
    #[arg(long, global = true, default_value = "2")]
    p: String,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    /// Sample pairs per modulus-of-continuity estimate.
    #[arg(long, global = true, default_value_t = 2000)]
    samples: usize,
    /// Smallest matrix dimension for random Mazur-map inputs.
    #[arg(long, global = true, default_value_t = 2)]
    min_dim: usize,
    /// Largest matrix dimension for random Mazur-map inputs.
    #[arg(long, global = true, default_value_t = 16)]
    max_dim: usize,
    #[arg(long, global = true)]
    max_prime: Option<u64>,
    #[arg(long, global = true)]
    closure_cap: Option<usize>,
    #[arg(long, global = true)]
    max_vertices: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cloud {
    Constant,
    Orbit,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the projective plane over F_l and its sign set.
    Plane {
        #[arg(long, default_value_t = 2)]
        l: u64,
    },
    /// Close the elementary generators in SL(3, F_l) for each prime.
    Group,
    /// Adjacency spectrum and Cheeger bounds.
    Spectral {
        /// cayley<l>, k4, k33, petersen, cycle<n>, complete<n>, or an edge-list / JSON file.
        #[arg(long, default_value = "cayley2")]
        graph: String,
    },
    /// Mazur-map identities, inequalities and moduli of continuity.
    Mazur,
    /// Column-norm inequalities on random rectangular pairs.
    Lemma21 {
        #[arg(long, default_value_t = 6)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
    },
    /// Search for the largest column-norm ratio.
    Remark22 {
        #[arg(long, default_value_t = 6)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
    },
    /// Co-area inequality on random sparse functions.
    Coarea {
        /// Repeatable; defaults to the small graphs plus cayley2.
        #[arg(long)]
        graph: Vec<String>,
    },
    /// Concentration of Lipschitz vertex clouds.
    Concentration {
        #[arg(long, default_value = "cayley2")]
        graph: String,
        #[arg(long, value_enum, default_value_t = Cloud::Random)]
        cloud: Cloud,
        /// Largest l_2 norm of the cloud in the Banach check; must not exceed 1.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Kazhdan constants and orbit averages for the permutation representation and its tensor square.
    Invariant,
    /// Rank obstruction for a tensor decomposition.
    Pipeline {
        /// exact-diagonal, rank1, truncated, perturbed, orbit-sample or sweep.
        #[arg(long, default_value = "exact-diagonal", conflicts_with = "input")]
        builtin: String,
        /// JSON decomposition file.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn config(g: &Global) -> Result<RunConfig> {
    let mut caps = Caps::default();
    if let Some(v) = g.max_prime {
        caps.max_prime = v;
    }
    if let Some(v) = g.closure_cap {
        caps.closure_cap = v;
    }
    if let Some(v) = g.max_vertices {
        caps.max_graph_vertices = v;
    }
    let cfg = RunConfig {
        seed: g.seed,
        primes: g.primes.clone(),
        p: NormIndex::parse(&g.p)?,
        trials: g.trials,
        samples: g.samples,
        dims: (g.min_dim, g.max_dim),
        caps,
        format: match g.format {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Report> {
    let cfg = config(&cli.global)?;
    match &cli.command {
        Command::Plane { l } => experiments::plane(&cfg, *l),
        Command::Group => experiments::group(&cfg),
        Command::Spectral { graph } => experiments::spectral(&cfg, &GraphSource::parse(graph)?),
        Command::Mazur => experiments::mazur(&cfg),
        Command::Lemma21 { rows, cols } => experiments::column_inequalities(&cfg, *rows, *cols),
        Command::Remark22 { rows, cols } => experiments::column_ratio(&cfg, *rows, *cols),
        Command::Coarea { graph } => {
            let sources = if graph.is_empty() {
                let mut s = experiments::small_graphs();
                s.push(GraphSource::Cayley(2));
                s
            } else {
                graph
                    .iter()
                    .map(|g| GraphSource::parse(g))
                    .collect::<Result<_>>()?
            };
            experiments::coarea(&cfg, &sources)
        }
        Command::Concentration {
            graph,
            cloud,
            radius,
        } => {
            let kind = match cloud {
                Cloud::Constant => CloudKind::Constant,
                Cloud::Orbit => CloudKind::Orbit,
                Cloud::Random => CloudKind::Random,
            };
            experiments::concentration(&cfg, &GraphSource::parse(graph)?, kind, *radius)
        }
        Command::Invariant => experiments::invariant(&cfg),
        Command::Pipeline { builtin, input } => {
            let input = match input {
                Some(path) => PipelineInput::File(path.clone()),
                None => PipelineInput::Builtin(Builtin::parse(builtin)?),
            };
            experiments::pipeline(&cfg, &input)
        }
    }
}

fn emit(report: &Report, out: Option<&PathBuf>) -> std::result::Result<(), LabError> {
    let text = report.render();
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, cli.global.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("assertion failed: {} (see report)", report.experiment);
        ExitCode::from(1)
    }
}
