use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wedge_euler::harness::{
    list_presets, load_config, preset, run_pair, run_preset, run_single, run_sweep, ExperimentConfig, Plan,
    SweepKey, SweepMode,
};
use wedge_euler::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "wedge-euler", version, about = "Wedge-vorticity experiments for compressible Euler flow")]
struct Cli {
    /// Output directory (overrides `out_dir` in config files).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the solver.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one configuration.
    Run { config: PathBuf },
    /// Run case 0 and case 2 and record their vorticity distance.
    Pair { config: PathBuf },
    /// Vary one parameter over a list of values.
    Sweep {
        config: PathBuf,
        /// beta, alpha, theta0 (multiple of pi), A, N or epsilon.
        #[arg(long)]
        key: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Run a case pair per value instead of a single run.
        #[arg(long)]
        pair: bool,
    },
    /// List the built-in presets.
    Presets,
    /// Run a built-in preset.
    Preset {
        name: String,
        #[arg(long)]
        paper_scale: bool,
    },
}

fn load(path: &Path, out: &Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path)?;
    if let Some(dir) = out {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("--threads {k}: {e}")))?;
    }
    match cli.command {
        Command::Run { config } => {
            let rec = run_single(&load(&config, &cli.out)?)?;
            for p in &rec.peaks {
                println!("t = {}: {} peak(s)", p.time, p.count);
            }
            println!("manifest: {}", rec.manifest.display());
        }
        Command::Pair { config } => {
            let series = run_pair(&load(&config, &cli.out)?)?;
            for (t, d) in series.times.iter().zip(&series.values) {
                println!("{t}\t{d:.6e}");
            }
        }
        Command::Sweep {
            config,
            key,
            values,
            pair,
        } => {
            let key = SweepKey::parse(&key)?;
            let mode = if pair { SweepMode::Pair } else { SweepMode::Single };
            let sweep = run_sweep(&load(&config, &cli.out)?, key, &values, mode)?;
            let mut code = 0;
            for row in &sweep.rows {
                match &row.message {
                    None => println!(
                        "{} = {} case {}: {} peak(s)",
                        key.name(),
                        row.value,
                        row.case,
                        row.final_peak_count.unwrap_or(0)
                    ),
                    Some(m) => {
                        println!("{} = {} case {}: failed: {m}", key.name(), row.value, row.case);
                        code = code.max(row.status);
                    }
                }
            }
            return Ok(code);
        }
        Command::Presets => {
            for name in list_presets() {
                let p = preset(name, false)?;
                let c = &p.config;
                let plan = match &p.plan {
                    Plan::Cases(cases) => format!("cases {:?}", cases.iter().map(|c| c.index()).collect::<Vec<_>>()),
                    Plan::Pair => "pair".to_string(),
                    Plan::Sweep { key, values } => format!("sweep {} over {values:?}", key.name()),
                    Plan::Refinement { levels, reference } => format!("N {levels:?} against {reference}"),
                };
                println!(
                    "{:<17} beta={} alpha={} theta0={}pi eps={} A={} T={}  {plan}  ({})",
                    p.name, c.beta, c.alpha, c.theta0_over_pi, c.epsilon, c.pressure_coeff, c.t_final, p.description
                );
            }
        }
        Command::Preset { name, paper_scale } => {
            let p = preset(&name, paper_scale)?;
            let out = cli.out.unwrap_or_else(|| p.config.out_dir.clone());
            let outcome = run_preset(&p, &out)?;
            for rec in &outcome.records {
                let counts: Vec<usize> = rec.peaks.iter().map(|s| s.count).collect();
                println!("{}: peaks {counts:?}", rec.label);
            }
            let mut code = 0;
            for (msg, status) in &outcome.failures {
                println!("failed: {msg}");
                code = code.max(*status);
            }
            return Ok(code);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
