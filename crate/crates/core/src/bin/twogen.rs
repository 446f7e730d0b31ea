use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use twogen::geometry::free_test;
use twogen::invariants::{golden_compare, golden_rows, Survivor};
use twogen::pipeline::{
    list_tables, plot_circles, plot_contour, render_table, render_tables, run_all, run_triple, Format, Manifest, RunConfig,
};
use twogen::sieve::{rows_of, run_sieves};

#[derive(Parser)]
#[command(name = "twogen", version, about = "Enumerate arithmetic two-generator Kleinian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Plain-text `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting; repeatable, wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListStage {
    Norm,
    Discriminant,
    Aspiring,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Contour,
    Circles,
}

#[derive(Subcommand)]
enum Command {
    /// Print one of the three triple lists with its comparison.
    Lists {
        #[arg(long, value_enum, default_value = "aspiring")]
        stage: ListStage,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run one triple and print a stage-count line per milestone.
    Search {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        r: u32,
        /// Also write per-stage JSON files into the output directory.
        #[arg(long)]
        persist: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run one triple and print its surviving parameters as JSON.
    Filter {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Free-product tests for one parameter.
    Free {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value_t = 3)]
        level: u8,
    },
    /// Compare survivors with the reference group table.
    Golden {
        #[arg(long)]
        compare: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run every aspiring triple and write a manifest.
    RunAll {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Stroke-only SVG of a contour or a circle configuration.
    Plot {
        #[arg(value_enum)]
        kind: PlotKind,
        p: u32,
        q: u32,
        /// `re,im`, required for circles.
        #[arg(allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Render the comparison tables of a manifest.
    Render {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failures of the command itself, mapped to exit code 1.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] twogen::pipeline::ConfigError),
    #[error(transparent)]
    Pipeline(#[from] twogen::pipeline::PipelineError),
    #[error(transparent)]
    Invariant(#[from] twogen::invariants::InvariantError),
    #[error(transparent)]
    Geometry(#[from] twogen::geometry::GeometryError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn load_config(a: &ConfigArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(d) = &a.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(n) = a.parallelism {
        cfg.parallelism = n;
    }
    cfg.validate()?;
    if cfg.parallelism > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallelism).build_global();
    }
    Ok(cfg)
}

fn parse_gamma(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("expected re,im, got {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SurvivorFile {
    Split {
        survivors: Vec<Survivor>,
        #[serde(default)]
        real_excluded: Vec<Survivor>,
    },
    Plain(Vec<Survivor>),
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Lists { stage, format, cfg } => {
            let cfg = load_config(&cfg)?;
            let lists = run_sieves(cfg.t_grid);
            let (idx, triples) = match stage {
                ListStage::Norm => (0, &lists.norm),
                ListStage::Discriminant => (1, &lists.discriminant),
                ListStage::Aspiring => (2, &lists.aspiring),
            };
            let table = &list_tables(&lists)[idx];
            eprintln!("{} rows, {} triples", rows_of(triples).len(), triples.len());
            print!("{}", render_table(table, format));
            Ok(if table.mismatches() == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Search { p, q, r, persist, cfg } => {
            let cfg = load_config(&cfg)?;
            let out = run_triple(&cfg, p, q, r)?;
            for s in &out.stages {
                println!("{}", serde_json::json!({ "stage": s.name, "count": s.count }));
            }
            if persist {
                std::fs::create_dir_all(&cfg.output_dir)?;
                twogen::pipeline::persist(&cfg.output_dir, &out)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Filter { p, q, r, cfg } => {
            let cfg = load_config(&cfg)?;
            let out = run_triple(&cfg, p, q, r)?;
            let doc = serde_json::json!({ "survivors": out.survivors, "real_excluded": out.real_excluded });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Free { p, q, gamma, level } => {
            let o = free_test(p, q, parse_gamma(&gamma)?, level);
            println!("{}", serde_json::to_string_pretty(&o)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Golden { compare, report } => {
            let (survivors, real) = match serde_json::from_str(&std::fs::read_to_string(compare)?)? {
                SurvivorFile::Split { survivors, real_excluded } => (survivors, real_excluded),
                SurvivorFile::Plain(v) => (v, Vec::new()),
            };
            let rep = golden_compare(&golden_rows(), &survivors, &real)?;
            write_out(report.as_deref(), &(serde_json::to_string_pretty(&rep)? + "\n"))?;
            eprintln!(
                "matched {}/{}; {} need geometric confirmation",
                rep.matched(),
                rep.rows.len(),
                rep.needs_geometric_confirmation.len()
            );
            Ok(if rep.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::RunAll { cfg } => {
            let cfg = load_config(&cfg)?;
            let m = run_all(&cfg)?;
            let failed = m.triples.iter().filter(|t| t.error.is_some()).count();
            eprintln!(
                "{} triples ({failed} failed); golden matched {}/{}; {} need geometric confirmation; fingerprint {}",
                m.triples.len(),
                m.golden.matched(),
                m.golden.rows.len(),
                m.golden.needs_geometric_confirmation.len(),
                m.fingerprint
            );
            Ok(if m.golden.all_ok() && failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Plot { kind, p, q, gamma, out, cfg } => {
            let cfg = load_config(&cfg)?;
            let svg = match kind {
                PlotKind::Contour => plot_contour(&cfg, p, q),
                PlotKind::Circles => {
                    let g = gamma.ok_or_else(|| CliError::Usage("circles needs a gamma".into()))?;
                    plot_circles(p, q, parse_gamma(&g)?)?
                }
            };
            write_out(out.as_deref(), &svg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { manifest, format, out } => {
            let m: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest)?)?;
            for path in render_tables(&m, format, &out)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
