//! `qmap`: membership, volume, width and verification runs on cones of
//! quantum maps.
//!
//! Exit codes: 0 success, 2 a bound was violated, 3 configuration error,
//! 1 any other failure.

mod cache;
mod commands;
mod config;
mod tables;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::cache::ResultCache;
use crate::commands::{run_cached, Context, Report, RunError};
use crate::config::{Command, ExperimentConfig, FileLayer, Flags, SectionInputs, Suite};

#[derive(Parser, Debug)]
#[command(name = "qmap", version, about = "Geometry of cones of quantum maps")]
struct Cli {
    /// INI file of `key = value` defaults, with optional `[command]` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory of the result cache.
    #[arg(
        long,
        global = true,
        env = "QMAP_CACHE_DIR",
        default_value = ".qmap-cache"
    )]
    cache_dir: PathBuf,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Default)]
struct Shared {
    /// Matrix size N (Choi matrices are N²×N²).
    #[arg(long)]
    n: Option<usize>,
    /// Cone: P, D, CP, CcP, T or SP.
    #[arg(long)]
    cone: Option<String>,
    /// Slice: cone, base, tp, tni, sym or sympolar.
    #[arg(long)]
    slice: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Markov chains for volume estimates.
    #[arg(long)]
    chains: Option<usize>,
    /// Kept samples per chain and annealing phase.
    #[arg(long)]
    steps: Option<usize>,
    /// Write the report to `<out>.json` and `<out>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report JSON on stdout instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Decide membership of a Choi matrix (matrix JSON) in a cone or slice.
    Membership {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        input: PathBuf,
    },
    /// Multiphase hit-and-run estimate of the volume radius.
    Volume {
        #[command(flatten)]
        shared: Shared,
    },
    /// Mean width and, for bases, the Urysohn bracket.
    Width {
        #[command(flatten)]
        shared: Shared,
        /// Random directions.
        #[arg(long)]
        dirs: Option<usize>,
    },
    /// Pair values between a base and the base of the dual cone.
    Duality {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// In- and outradius probes with their witnesses.
    Radii {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Volume-radius tables of the five nested cones from cached runs.
    Tables {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Run volume, width and radii for rows that are not cached.
        #[arg(long)]
        run_missing: bool,
    },
    /// Trace-non-increasing volume ratio and the fiber-map checks (N=2).
    Tni {
        #[command(flatten)]
        shared: Shared,
        /// Fiber-map samples.
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Unital versus trace-preserving discrepancy of a linear functional.
    NoDuality {
        #[command(flatten)]
        shared: Shared,
        /// Random channels for the sampled maximum.
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Volume-radius bracket for a central section of a body.
    SectionBounds {
        #[command(flatten)]
        shared: Shared,
        /// Volume radius of the full body.
        #[arg(long)]
        vrad: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        big_r: Option<f64>,
        /// Dimension of the body.
        #[arg(long)]
        m: Option<usize>,
        /// Dimension of the section.
        #[arg(long)]
        k: Option<usize>,
        /// Section volume radius to test against the bracket.
        #[arg(long)]
        check: Option<f64>,
    },
}

fn flags_from(shared: Shared) -> Flags {
    Flags {
        n: shared.n,
        cone: shared.cone,
        slice: shared.slice,
        seed: shared.seed,
        chains: shared.chains,
        steps: shared.steps,
        out: shared.out,
        json: shared.json,
        ..Flags::default()
    }
}

fn split(sub: Sub) -> (Command, Flags) {
    match sub {
        Sub::Membership { shared, input } => (
            Command::Membership,
            Flags {
                input: Some(input),
                ..flags_from(shared)
            },
        ),
        Sub::Volume { shared } => (Command::Volume, flags_from(shared)),
        Sub::Width { shared, dirs } => (
            Command::Width,
            Flags {
                dirs,
                ..flags_from(shared)
            },
        ),
        Sub::Duality { shared, pairs } => (
            Command::Duality,
            Flags {
                pairs,
                ..flags_from(shared)
            },
        ),
        Sub::Radii { shared, probes } => (
            Command::Radii,
            Flags {
                probes,
                ..flags_from(shared)
            },
        ),
        Sub::Tables {
            shared,
            suite,
            run_missing,
        } => (
            Command::Tables,
            Flags {
                suite,
                run_missing,
                ..flags_from(shared)
            },
        ),
        Sub::Tni { shared, probes } => (
            Command::Tni,
            Flags {
                probes,
                ..flags_from(shared)
            },
        ),
        Sub::NoDuality { shared, probes } => (
            Command::NoDuality,
            Flags {
                probes,
                ..flags_from(shared)
            },
        ),
        Sub::SectionBounds {
            shared,
            vrad,
            r,
            big_r,
            m,
            k,
            check,
        } => (
            Command::SectionBounds,
            Flags {
                section: SectionInputs {
                    vrad,
                    r,
                    big_r,
                    m,
                    k,
                    check,
                },
                ..flags_from(shared)
            },
        ),
    }
}

fn write_outputs(base: &Path, report: &str, csv: &str) -> std::io::Result<()> {
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(base.with_extension("json"), report)?;
    std::fs::write(base.with_extension("csv"), csv)
}

fn summary(report: &Report) -> String {
    let mut s = format!(
        "{} (seed {}, qmap {})\n",
        report.command, report.seed, report.version
    );
    if let Some(body) = report.result.get("body").and_then(|b| b.as_str()) {
        s += &format!("body: {body}\n");
    }
    if let Some(v) = report.result.get("verdict") {
        s += &format!(
            "verdict: {} (margin {:.3e})\n",
            v["status"].as_str().unwrap_or("?"),
            v["margin"].as_f64().unwrap_or(f64::NAN)
        );
    }
    if let (Some(lo), Some(hi)) = (report.result.get("lower"), report.result.get("upper")) {
        s += &format!("bracket: [{lo}, {hi}]\n");
    }
    for b in &report.bounds {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        s += &format!(
            "{:<5} {} {}: {:.6} ± {:.2e} in [{}, {}] ({})\n",
            if b.pass { "ok" } else { "FAIL" },
            b.body,
            b.quantity,
            b.value,
            b.stderr,
            f(b.lower),
            f(b.upper),
            b.source
        );
    }
    for w in &report.warnings {
        s += &format!("warning: {w}\n");
    }
    s += if report.pass {
        "pass\n"
    } else {
        "bound violated\n"
    };
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, flags) = split(cli.command);
    let file = match &cli.config {
        Some(p) => FileLayer::load(p, command),
        None => Ok(FileLayer::default()),
    };
    let cfg = match file.and_then(|f| ExperimentConfig::resolve(command, flags, &f)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qmap: configuration error: {e}");
            return ExitCode::from(3);
        }
    };
    let ctx = Context {
        cache: (!cli.no_cache).then(|| ResultCache::new(&cli.cache_dir)),
        quiet: cli.quiet,
    };
    let outcome = run_cached(&cfg, &ctx).and_then(|r| {
        let report = r.parsed()?;
        if let Some(out) = &cfg.out {
            write_outputs(out, &r.report, &r.csv)?;
        }
        let mut stdout = std::io::stdout().lock();
        if cfg.json {
            writeln!(stdout, "{}", r.report)?;
        } else {
            write!(stdout, "{}", summary(&report))?;
        }
        Ok::<_, RunError>(report.pass)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("qmap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
