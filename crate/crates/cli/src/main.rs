use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hndaf_core::predictor::study;
use hndaf_core::scenario::{leaf_rows, write_rows};
use hndaf_core::usecase::run_usecase;
use hndaf_core::{registry, run_experiment_logged, sweep, Axis, ConfigError, ScenarioConfig};

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Parser)]
#[command(name = "hndaf", version, about = "Hierarchical NWDAF simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Write the event log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the result row as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one axis over every framework it applies to.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// N_T, alpha, beta or capacity.
        #[arg(long)]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        reps: u32,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory for results.csv, means.csv and leaves.csv.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Compare the two predictor feature sets over several seeds.
    Predict {
        /// Samples per dataset.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Number of seeds, starting at 0.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// CSV output; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the throughput prediction walk-through.
    Usecase {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Check config files without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// List the registered frameworks.
    Frameworks,
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario config. Missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(p) => load_config(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            config.seed = s;
        }
        config.validate()?;
        Ok(config)
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ScenarioConfig::from_json(&text)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { scenario, log, out } => {
            let config = scenario.load()?;
            let (report, lines) = run_experiment_logged(&config)?;
            if let Some(p) = log {
                let mut w = create(&p)?;
                for l in &lines {
                    writeln!(w, "{l}")?;
                }
                w.flush()?;
            }
            if let Some(p) = out {
                write_rows(create(&p)?, [report.row()])?;
            }
            println!("provision_time_s={}", report.provision_time_s);
            if !report.complete {
                let pending = report.records.iter().filter(|r| r.first_response_s.is_none()).count();
                eprintln!("incomplete: {pending} events unanswered at t={}", report.final_time_s);
                return Ok(ExitCode::from(EXIT_INCOMPLETE));
            }
        }
        Command::Sweep { scenario, axis, values, reps, jobs, out } => {
            let base = scenario.load()?;
            let configs = axis.expand(&base, &values)?;
            log::info!("{} cells x {reps} reps", configs.len());
            let result = sweep(&configs, reps, jobs)?;
            fs::create_dir_all(&out)?;
            write_rows(create(&out.join("results.csv"))?, result.rows())?;
            write_rows(create(&out.join("means.csv"))?, result.means())?;
            let leaves = result.reports.iter().flatten().filter(|r| r.config.framework == "HNDAF");
            write_rows(create(&out.join("leaves.csv"))?, leaves.flat_map(leaf_rows))?;
            for m in result.means() {
                println!(
                    "{} {axis}={} mean_provision_time_s={:.3} ({}/{} complete)",
                    m.framework,
                    axis_value(axis, &m),
                    m.mean_provision_time_s,
                    m.complete_runs,
                    m.reps
                );
            }
        }
        Command::Predict { n, seeds, lambda, out } => {
            let rows = study(n, 0..seeds, lambda)?;
            match out {
                Some(p) => write_rows(create(&p)?, rows)?,
                None => write_rows(io::stdout().lock(), rows)?,
            }
        }
        Command::Usecase { seed } => print!("{}", run_usecase(seed)?.render()),
        Command::Validate { configs } => {
            let mut bad = 0;
            for p in &configs {
                match load_config(p).and_then(|c| Ok(c.validate()?)) {
                    Ok(()) => println!("{}: ok", p.display()),
                    Err(e) => {
                        bad += 1;
                        eprintln!("{}: {e:#}", p.display());
                    }
                }
            }
            if bad > 0 {
                return Ok(ExitCode::from(EXIT_INVALID_CONFIG));
            }
        }
        Command::Frameworks => {
            for name in registry().names() {
                println!("{name}\t{}", registry().get(name)?.description());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn axis_value(axis: Axis, m: &hndaf_core::scenario::MeanRow) -> String {
    match axis {
        Axis::NT => m.n_t.to_string(),
        Axis::Alpha => m.alpha.to_string(),
        Axis::Beta => m.beta.to_string(),
        Axis::Capacity => m.capacity_bytes.to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let invalid = e.chain().any(|c| c.downcast_ref::<ConfigError>().is_some())
                || matches!(
                    e.downcast_ref::<hndaf_core::ScenarioError>(),
                    Some(hndaf_core::ScenarioError::Config(_))
                );
            ExitCode::from(if invalid { EXIT_INVALID_CONFIG } else { 1 })
        }
    }
}
