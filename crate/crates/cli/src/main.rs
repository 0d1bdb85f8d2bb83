use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use berryloop_cli::commands;
use berryloop_cli::{Config, Mode};
use clap::{Parser, Subcommand};

/// Adiabatic Berry-phase estimation on frustrated spin models.
#[derive(Debug, Parser)]
#[command(name = "berryloop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "BERRYLOOP_JOBS")]
    jobs: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    shots: Option<u64>,

    /// circuit, oracle or both.
    #[arg(long, global = true)]
    mode: Option<Mode>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override any configuration key, e.g. `--set J2=0.4,0.6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Leave wall_time_s at zero so repeated runs give identical CSV.
    #[arg(long, global = true)]
    no_timing: bool,

    /// Skip SVG output.
    #[arg(long, global = true)]
    no_plot: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dimerized chain, phase against J2 for each length.
    #[command(name = "sweep-1d")]
    Sweep1d,
    /// Tetramerized lattice, phase against J2 for each step count.
    #[command(name = "sweep-2d")]
    Sweep2d,
    /// Every pair of driven plaquette bonds.
    Table1,
    /// Plaquette levels against the twist sum.
    Spectrum,
    /// A single point; exits 0 when defined and 2 when undefined.
    Berry,
}

impl Cli {
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        for item in &self.overrides {
            let (k, v) = item
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
            cfg.set(k, v)?;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = Some(j);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if self.no_timing {
            cfg.timing = false;
        }
        if self.no_plot {
            cfg.plot = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let cfg = cli.config()?;
    let report = |csv: &std::path::Path, svg: Option<PathBuf>| {
        println!("wrote {}", csv.display());
        if let Some(svg) = svg {
            println!("wrote {}", svg.display());
        }
    };
    match cli.command {
        Command::Sweep1d => {
            let o = commands::cmd_sweep_1d(&cfg)?;
            report(&o.csv, o.svg);
        }
        Command::Sweep2d => {
            let o = commands::cmd_sweep_2d(&cfg)?;
            report(&o.csv, o.svg);
        }
        Command::Table1 => {
            let o = commands::cmd_table1(&cfg)?;
            report(&o.csv, o.svg);
        }
        Command::Spectrum => {
            let o = commands::cmd_spectrum(&cfg)?;
            report(&o.csv, o.svg);
        }
        Command::Berry => {
            let mut stdout = std::io::stdout().lock();
            let outcome = commands::cmd_berry(&cfg, &mut stdout)?;
            stdout.flush()?;
            return Ok(outcome.code);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
