use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvflow_bench::experiments::{norm_report, solve_with_flow};
use mvflow_bench::report::json_path;
use mvflow_bench::{emit_report, read_report_json, run_experiment, BenchError, ExperimentConfig, ExperimentKind, Format, RunReport};

#[derive(Parser)]
#[command(name = "mvflow", version, about = "Mean-field flow experiments and reports")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dual-norm bracket of Gaussian pair differences.
    Norm,
    /// Boundedness study of a catalog kernel's mollified norms.
    KernelStudy,
    /// Solve the flow and write it to `flow.bin`.
    Solve,
    /// Particle system against the PDE flow.
    Particles,
    /// Run a named experiment.
    Experiment { name: String },
    /// Print a stored report and exit by its pass flags.
    Report,
}

fn load(cli: &Cli, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = kind {
        cfg.experiment = k;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.grid {
        cfg.grid = n;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(report: &RunReport, dir: &Path) -> Result<bool, BenchError> {
    emit_report(report, dir, &Format::ALL)?;
    print!("{report}");
    println!("report written to {}", dir.display());
    Ok(report.all_pass())
}

fn run(cli: &Cli) -> Result<bool, BenchError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| BenchError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Report => {
            let dir = match (&cli.out, &cli.config) {
                (Some(o), _) => o.clone(),
                (None, Some(_)) => PathBuf::from(load(cli, None)?.output_dir),
                (None, None) => PathBuf::from(ExperimentConfig::default().output_dir),
            };
            let report = read_report_json(&json_path(&dir))?;
            print!("{report}");
            Ok(report.all_pass())
        }
        Command::Norm => {
            let cfg = load(cli, None)?;
            finish(&norm_report(&cfg)?, Path::new(&cfg.output_dir))
        }
        Command::KernelStudy => {
            let cfg = load(cli, Some(ExperimentKind::KernelMembership))?;
            finish(&run_experiment(&cfg)?, Path::new(&cfg.output_dir))
        }
        Command::Solve => {
            let cfg = load(cli, Some(ExperimentKind::Solve))?;
            let (flow, report) = solve_with_flow(&cfg)?;
            let dir = Path::new(&cfg.output_dir);
            std::fs::create_dir_all(dir)?;
            flow.write_binary(std::io::BufWriter::new(std::fs::File::create(dir.join("flow.bin"))?))?;
            finish(&report, dir)
        }
        Command::Particles => {
            let cfg = load(cli, Some(ExperimentKind::Particles))?;
            finish(&run_experiment(&cfg)?, Path::new(&cfg.output_dir))
        }
        Command::Experiment { name } => {
            let cfg = load(cli, Some(name.parse()?))?;
            finish(&run_experiment(&cfg)?, Path::new(&cfg.output_dir))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
