use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use causal_gamble::config::ExperimentConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Shipped experiment configurations.
const PRESETS: &[(&str, &str)] = &[
    ("fig2-left", include_str!("../presets/fig2-left.toml")),
    ("fig2-right", include_str!("../presets/fig2-right.toml")),
    ("iid-independent", include_str!("../presets/iid-independent.toml")),
    ("markov_bsc", include_str!("../presets/markov_bsc.toml")),
    ("sub-fair", include_str!("../presets/sub-fair.toml")),
    ("dyadic", include_str!("../presets/dyadic.toml")),
];

#[derive(Parser)]
#[command(name = "causal-gamble", version, about = "Horse-race gambling with causal side information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies and directed information for n = 1..=N.
    Dinfo(RunArgs),
    /// Exact and simulated growth of the optimal strategies.
    Growth(RunArgs),
    /// Growth increase of the Markov example against q (left) or lookahead k (right).
    Fig2 {
        panel: Panel,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected code rates with and without side information.
    Compress(RunArgs),
    /// Log-optimal causal portfolio growth.
    Portfolio(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Panel {
    Left,
    Right,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped configuration: fig2-left, fig2-right, iid-independent, markov_bsc, sub-fair, dyadic.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
}

fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
        anyhow!("unknown preset `{name}` (available: {})", names.join(", "))
    })?;
    Ok(ExperimentConfig::from_toml_str(text)?)
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_toml_str(&text).with_context(|| path.display().to_string())?
            }
            (None, Some(name)) => preset(name)?,
            (None, None) => bail!("pass --config PATH or --preset NAME"),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&PathBuf>, table: commands::Table) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    causal_gamble::report::write_csv(sink, &table.header, table.rows)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, table) = match cli.command {
        Command::Fig2 { panel, out } => {
            let mut cfg = preset(match panel {
                Panel::Left => "fig2-left",
                Panel::Right => "fig2-right",
            })?;
            cfg.out = out;
            let table = commands::fig2(&cfg)?;
            (cfg, table)
        }
        Command::Dinfo(args) => {
            let cfg = args.load()?;
            let table = commands::dinfo(&cfg)?;
            (cfg, table)
        }
        Command::Growth(args) => {
            let cfg = args.load()?;
            let table = commands::growth(&cfg)?;
            (cfg, table)
        }
        Command::Compress(args) => {
            let cfg = args.load()?;
            let table = commands::compress(&cfg)?;
            (cfg, table)
        }
        Command::Portfolio(args) => {
            let cfg = args.load()?;
            let table = commands::portfolio(&cfg)?;
            (cfg, table)
        }
    };
    emit(cfg.out.as_ref(), table)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
