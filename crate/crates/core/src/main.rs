use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use monodens::functionals::tau_plugin;
use monodens::harness::{
    parse_functional, run_limit_sample, run_study, run_uniform_study, write_limit_sample,
    write_report, LimitSampleConfig, SimulationReport, StudyConfig, UniformStudyConfig,
};
use monodens::inference::ci_tau_fitted;
use monodens::samples::read_sample;
use monodens::{fit, Domain, Error, Result};

#[derive(Parser)]
#[command(
    name = "monodens",
    version,
    about = "Grenander plug-in estimation of smooth functionals of a nonincreasing density"
)]
struct Cli {
    /// Seed for every random stream (overrides configuration files).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for replication studies (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the Grenander estimator to a data file and estimate a functional.
    Estimate {
        /// One nonnegative observation per line; `#` starts a comment line.
        #[arg(long)]
        data: PathBuf,
        /// power:<p>, xz2 or identity.
        #[arg(long)]
        functional: String,
        /// Confidence level for a Wald interval, e.g. 0.95.
        #[arg(long)]
        ci: Option<f64>,
    },
    /// Run a replication study described by a JSON configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Draw from the limit law of the plug-in estimator.
    LimitSample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        draws: usize,
    },
    /// Standardized statistic under a Uniform[0, 1] truth.
    UniformClt {
        #[arg(long)]
        h: String,
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        reps: usize,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn brief(report: &SimulationReport) -> serde_json::Value {
    json!({
        "scenario": report.scenario.scenario.name(),
        "functional": report.functional,
        "n": report.n,
        "replications": report.replications,
        "seed": report.seed,
        "truth": report.truth,
        "sigma2_eff": report.sigma2_eff,
        "reference": report.reference,
        "summary": report.summary,
        "wall_time_secs": report.wall_time_secs,
    })
}

fn emit_reports(reports: &[SimulationReport], out: &Path) -> Result<()> {
    let mut summaries = Vec::with_capacity(reports.len());
    for r in reports {
        let files = write_report(r, out)?;
        log::info!(
            "wrote {}",
            files
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        summaries.push(brief(r));
    }
    print_json(&serde_json::Value::Array(summaries))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate {
            data,
            functional,
            ci,
        } => {
            let g = parse_functional(&functional)?;
            let s = read_sample(&data)?;
            let d = fit(&s)?;
            let estimate = tau_plugin(&g, &d, Domain::HalfLine)?;
            let interval = ci
                .map(|level| ci_tau_fitted(&g, &s, &d, level))
                .transpose()?;
            print_json(&json!({
                "functional": functional,
                "n": s.len(),
                "estimate": estimate,
                "density": d,
                "ci": interval,
            }))
        }
        Command::Simulate { config } => {
            let mut config: StudyConfig = read_json(&config)?;
            if cli.seed.is_some() {
                config.seed = cli.seed;
            }
            let reports = run_study(&config, cli.threads)?;
            emit_reports(&reports, &cli.out)
        }
        Command::LimitSample { config, draws } => {
            let config: LimitSampleConfig = read_json(&config)?;
            let (meta, ys) = run_limit_sample(&config, draws, cli.seed, cli.threads)?;
            let path = cli.out.join(format!(
                "{}_{}_limit.csv",
                meta.scenario,
                config.functional.replace(':', "-")
            ));
            write_limit_sample(&path, &meta, &ys)?;
            print_json(&json!({ "path": path, "metadata": meta }))
        }
        Command::UniformClt { h, n, reps } => {
            let config = UniformStudyConfig {
                h,
                n,
                replications: reps,
                seed: cli.seed.unwrap_or(0),
            };
            let reports = run_uniform_study(&config, cli.threads)?;
            emit_reports(&reports, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
