use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use iosvb::baselines::Algorithm;
use iosvb::harness::{run_command, Command, ExperimentConfig};

/// Interference-optimized singular vector beamforming experiments.
#[derive(Parser, Debug)]
#[command(name = "iosvb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Interference against its upper bound for every IOSVB solution.
    VerifyBound(Opts),
    /// Mean SE over the (N_c, gamma) grid.
    SweepNcGamma(Opts),
    /// Mean SE and iteration count versus gamma.
    SweepGamma(Opts),
    /// Mean SE of each algorithm versus SNR.
    SeVsSnr(Opts),
    /// Smallest N_c reaching 95% of the maximum SE, per N_s.
    TableNc(Opts),
    /// Median wall time per algorithm on a fixed instance.
    BenchTime(Opts),
    /// Write channel realizations to binary channel files.
    GenChannels(Opts),
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// TOML file overlaid on the preset.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Start from the 144/36-element, five-user preset.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated: exhaustive,iosvb,mrt,bd,wmmse.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    algo: Option<Vec<Algorithm>>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Read realizations from channel files in DIR.
    #[arg(long, value_name = "DIR")]
    channels: Option<PathBuf>,
    /// Permit exhaustive search where the preset disables it.
    #[arg(long)]
    allow_exhaustive: bool,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    nc: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    /// Override any config field, e.g. --set channel.clusters=4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl Opts {
    fn assignments(&self) -> Vec<String> {
        let mut out = self.sets.clone();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push(format!("{k}={v}"));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("realizations", self.realizations.map(|v| v.to_string()));
        push(
            "algorithms",
            self.algo.as_ref().map(|a| {
                let tags: Vec<String> = a.iter().map(|x| format!("{:?}", x.tag())).collect();
                format!("[{}]", tags.join(","))
            }),
        );
        push("output_dir", self.out.as_ref().map(|p| toml_string(p)));
        push("channels_dir", self.channels.as_ref().map(|p| toml_string(p)));
        push("n_s", self.ns.map(|v| v.to_string()));
        push("n_c", self.nc.map(|v| v.to_string()));
        push("gamma", self.gamma.map(|v| format!("{v:?}")));
        push("snr_db", self.snr_db.map(|v| format!("{v:?}")));
        if self.allow_exhaustive {
            push("allow_exhaustive", Some("true".into()));
        }
        out
    }
}

fn toml_string(p: &std::path::Path) -> String {
    toml::Value::String(p.display().to_string()).to_string()
}

fn run(cli: Cli) -> Result<()> {
    let (cmd, opts) = match cli.command {
        Cmd::VerifyBound(o) => (Command::VerifyBound, o),
        Cmd::SweepNcGamma(o) => (Command::SweepNcGamma, o),
        Cmd::SweepGamma(o) => (Command::SweepGamma, o),
        Cmd::SeVsSnr(o) => (Command::SeVsSnr, o),
        Cmd::TableNc(o) => (Command::TableNc, o),
        Cmd::BenchTime(o) => (Command::BenchTime, o),
        Cmd::GenChannels(o) => (Command::GenChannels, o),
    };
    let cfg = ExperimentConfig::resolve(opts.paper_scale, opts.config.as_deref(), &opts.assignments())
        .context("resolving configuration")?;
    if opts.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let report = run_command(cmd, &cfg).with_context(|| format!("{cmd} failed"))?;
    let files = report
        .write(&cfg.output_dir)
        .with_context(|| format!("writing results to {}", cfg.output_dir.display()))?;
    println!("{cmd}: {}", report.summary());
    if !matches!(cmd, Command::GenChannels) {
        for f in files {
            println!("  {}", f.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
