//! Command-line front end for the trapezoid, Cantor and gasket measurements.

mod commands;
mod output;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use trapmeasure_core::exact::parse_rational;
use trapmeasure_core::Rational;

use crate::output::{Format, Output};

#[derive(Parser, Debug)]
#[command(
    name = "trapmeasure",
    version,
    about = "Exact areas of permuted parallelogram families and related fractal measures"
)]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true, env = "TRAPMEASURE_THREADS")]
    workers: Option<usize>,

    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct PermArgs {
    /// Number of parallelograms; required by the named shortcuts.
    #[arg(long)]
    n: Option<usize>,

    /// `1,3,2`, `identity`, `reversal`, `composite` or `digit-swap:m`.
    #[arg(long)]
    perm: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact area of the union of parallelograms.
    Area {
        #[command(flatten)]
        perm: PermArgs,
        /// Also report a midpoint estimate from this many slices.
        #[arg(long)]
        oracle_samples: Option<usize>,
    },
    /// Horizontal slice at height y, or the whole slice-length profile.
    Slice {
        #[command(flatten)]
        perm: PermArgs,
        #[arg(long, required_unless_present = "profile")]
        y: Option<String>,
        #[arg(long)]
        profile: bool,
    },
    /// Minimal area over all permutations of size n.
    Alpha {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "heuristic")]
        exhaustive: bool,
        #[arg(long)]
        heuristic: bool,
        /// Evaluation budget for the heuristic search.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Enumerate every permutation instead of one per symmetry class.
        #[arg(long)]
        no_symmetry: bool,
        /// Permit exhaustive search past the size guard.
        #[arg(long)]
        allow_large: bool,
        /// Include wall-clock time in JSON output.
        #[arg(long)]
        timing: bool,
    },
    /// Minimal areas for n = 1..max-n.
    AlphaScan {
        #[arg(long)]
        max_n: usize,
        #[arg(long, default_value_t = 8)]
        exhaustive_max: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long)]
        no_symmetry: bool,
        #[arg(long)]
        timing: bool,
    },
    /// Areas of the base-3 digit-swap permutations of size 3^m.
    Sigma3 {
        #[arg(long, default_value_t = 6)]
        max_m: u32,
    },
    /// Block decomposition of the composite permutation of size n.
    SigmaN {
        #[arg(long)]
        n: usize,
    },
    /// Measures of partial three-digit Cantor sets.
    Cantor {
        /// Third digit; the digit set is {0, 1, t}.
        #[arg(long, conflicts_with = "digits")]
        t: Option<String>,
        /// Explicit digit set `a,b,c`.
        #[arg(long)]
        digits: Option<String>,
        #[arg(long, default_value_t = 8)]
        depth_max: u32,
    },
    /// Limit slice measures of the digit-swap trapezoids at height t.
    SliceMeasure {
        /// Comma-separated rationals.
        #[arg(long, value_delimiter = ',', required_unless_present = "grid")]
        t: Vec<String>,
        /// Use t = i/k for i = 0..k instead.
        #[arg(long, conflicts_with = "t")]
        grid: Option<usize>,
        /// Also report the partial slice set at this depth.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Favard length of partial gaskets.
    Favard {
        #[arg(long, default_value_t = 6)]
        depth_max: u32,
        #[arg(long, default_value_t = 4096)]
        quad_points: usize,
    },
    /// Numerical checks of the supporting inequalities.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
    /// SVG drawings.
    Render {
        #[command(subcommand)]
        what: Render,
    },
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Projection of partial gaskets against the sine bound.
    Lemma1 {
        #[arg(long, default_value_t = 4)]
        depth_max: u32,
        /// Number of equally spaced t in [0, 1].
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Growth of the weighted exponential integral.
    Lemma2 {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 40.0])]
        n: Vec<f64>,
    },
    /// Block identity for the composite permutation.
    WeightedSum {
        #[arg(long, value_delimiter = ',', default_values_t = [4usize])]
        n: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum Render {
    Trapezoid {
        #[command(flatten)]
        perm: PermArgs,
    },
    Gasket {
        #[arg(long)]
        depth: u32,
    },
}

const EXIT_INVALID: u8 = 1;
const EXIT_INTERNAL: u8 = 2;
const EXIT_VIOLATED: u8 = 3;

fn resolve_workers(requested: Option<usize>) -> anyhow::Result<usize> {
    match requested {
        Some(0) => anyhow::bail!("--workers must be at least 1"),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run(cli: &Cli, workers: usize) -> anyhow::Result<Output> {
    use commands::*;
    match &cli.command {
        Command::Area {
            perm,
            oracle_samples,
        } => area_cmd(perm.n, &perm.perm, *oracle_samples),
        Command::Slice { perm, y, profile } => {
            slice_cmd(perm.n, &perm.perm, y.as_deref(), *profile)
        }
        Command::Alpha {
            n,
            exhaustive,
            heuristic,
            budget,
            no_symmetry,
            allow_large,
            timing,
        } => alpha_cmd(AlphaArgs {
            n: *n,
            heuristic: *heuristic,
            exhaustive: *exhaustive,
            budget: *budget,
            no_symmetry: *no_symmetry,
            allow_large: *allow_large,
            timing: *timing,
            workers,
            seed: cli.seed,
        }),
        Command::AlphaScan {
            max_n,
            exhaustive_max,
            budget,
            no_symmetry,
            timing,
        } => alpha_scan_cmd(ScanArgs {
            max_n: *max_n,
            exhaustive_max: *exhaustive_max,
            budget: *budget,
            no_symmetry: *no_symmetry,
            timing: *timing,
            workers,
            seed: cli.seed,
        }),
        Command::Sigma3 { max_m } => sigma3_cmd(*max_m),
        Command::SigmaN { n } => sigma_n_cmd(*n),
        Command::Cantor {
            t,
            digits,
            depth_max,
        } => cantor_cmd(t.as_deref(), digits.as_deref(), *depth_max),
        Command::SliceMeasure { t, grid, depth } => {
            let ts: Vec<Rational> = match grid {
                Some(0) => anyhow::bail!("--grid must be at least 1"),
                Some(k) => (0..=*k)
                    .map(|i| Rational::new((i as i64).into(), (*k as i64).into()))
                    .collect(),
                None => t
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<_, _>>()?,
            };
            slice_measure_cmd(&ts, *depth)
        }
        Command::Favard {
            depth_max,
            quad_points,
        } => favard_cmd(*depth_max, *quad_points),
        Command::Verify { which } => match which {
            Verify::Lemma1 { depth_max, grid } => lemma1_cmd(*depth_max, *grid),
            Verify::Lemma2 { p, n } => lemma2_cmd(*p, n),
            Verify::WeightedSum { n } => weighted_sum_cmd(n),
        },
        Command::Render { what } => {
            if matches!(cli.format, Some(Format::Csv | Format::Json)) {
                anyhow::bail!("render only produces svg");
            }
            match what {
                Render::Trapezoid { perm } => render_trapezoid_cmd(perm.n, &perm.perm),
                Render::Gasket { depth } => render_gasket_cmd(*depth),
            }
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> anyhow::Result<()> {
    let body = out.render(cli.format)?;
    match &cli.output {
        Some(path) => std::fs::write(path, body)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    let mut err = std::io::stderr().lock();
    for note in &out.notes {
        writeln!(err, "{note}")?;
    }
    Ok(())
}

fn real_main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let workers = match resolve_workers(cli.workers) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    // Ignored if a pool already exists; that only happens in tests.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global();

    let out = match run(&cli, workers).and_then(|out| emit(&cli, &out).map(|_| out)) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if out.violated {
        ExitCode::from(EXIT_VIOLATED)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    std::panic::catch_unwind(real_main).unwrap_or(ExitCode::from(EXIT_INTERNAL))
}
