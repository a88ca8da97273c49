//! Command-line driver for the `rabi-core` simulations.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::json;

use crate::config::Scenario;
use crate::output::{flatten, pretty, write_atomic, Table};
use crate::scenarios::Plot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] rabi_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "rabi", version, about = "Electron-light Rabi oscillation simulations")]
pub struct Args {
    pub scenario: Scenario,
    /// TOML config, or the `.meta.json` of an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Also draw `.svg` figures (implies CSV output).
    #[arg(long)]
    pub svg: bool,
}

/// Files written by one run, relative to the output directory.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub meta: PathBuf,
}

fn write(dir: &Path, name: String, contents: &[u8], files: &mut Vec<PathBuf>) -> Result<PathBuf, CliError> {
    let path = dir.join(&name);
    write_atomic(&path, contents)?;
    files.push(PathBuf::from(name));
    Ok(path)
}

pub fn run(args: &Args) -> Result<RunSummary, CliError> {
    let loaded = config::load(&args.config)?;
    let cfg = &loaded.config;
    cfg.validate(args.scenario)?;
    let stem = cfg.stem(args.scenario);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    let started = Instant::now();
    let artifacts = pool.install(|| scenarios::run(args.scenario, cfg))?;
    let compute_s = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    let dir = args.out.as_path();
    let csv = args.svg || matches!(args.format, Format::Csv | Format::Both);
    let json = matches!(args.format, Format::Json | Format::Both);
    let mut files = Vec::new();

    for ds in &artifacts.datasets {
        let base = format!("{stem}{}", ds.suffix);
        if csv {
            let path = write(dir, format!("{base}.csv"), ds.table.to_csv().as_bytes(), &mut files)?;
            if args.svg {
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let table = Table::from_csv(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let figure = match ds.plot {
                    Plot::Lines => svg::line_plot(&table, &ds.title),
                    Plot::Heatmap => svg::heatmap(&table, &ds.title).map_err(CliError::Io)?,
                };
                write(dir, format!("{base}.svg"), figure.as_bytes(), &mut files)?;
            }
        }
        if json {
            write(dir, format!("{base}.json"), pretty(&ds.table.to_json()).as_bytes(), &mut files)?;
        }
    }
    for (name, doc) in &artifacts.documents {
        write(dir, format!("{stem}.{name}.json"), pretty(doc).as_bytes(), &mut files)?;
    }
    write(dir, format!("{stem}.report.json"), pretty(&flatten(&artifacts.report)).as_bytes(), &mut files)?;

    let meta = json!({
        "tool": "rabi",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": args.scenario,
        "config": cfg,
        "defaults_applied": loaded.defaults_used(),
        "files": files,
        "threads": pool.current_num_threads(),
        "timing": {
            "compute_s": compute_s,
            "total_s": started.elapsed().as_secs_f64(),
        },
    });
    let meta_name = format!("{stem}.meta.json");
    write_atomic(&dir.join(&meta_name), pretty(&meta).as_bytes())?;
    Ok(RunSummary {
        files,
        meta: PathBuf::from(meta_name),
    })
}
