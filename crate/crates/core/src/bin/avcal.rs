use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use avcal::experiment::{
    geometry_text, parse_config, parse_number_list, prepare_trial, run_selftest, run_strategy_joint,
    run_strategy_rbt, sweep_to_dir, ExperimentConfig, Strategy,
};
use avcal::sim::{parse_observations, write_observations, write_scenario};

#[derive(Parser)]
#[command(name = "avcal", version, about = "Acoustic sensor calibration against a camera network")]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Comma-separated reverberation proxies in ms; `simulate` uses the first.
    #[arg(long, global = true)]
    t60_list: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalibStrategy {
    Rbt,
    Joint,
}

#[derive(Subcommand)]
enum Command {
    /// Write a simulated scenario and its observations.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Calibrate from an observations file and print the geometry.
    Calibrate {
        #[arg(long, value_enum)]
        strategy: CalibStrategy,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a noise sweep and write metrics.csv and mpe_vs_t60.svg.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn load_config(cli: &Cli, path: Option<&PathBuf>) -> avcal::Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(list) = &cli.t60_list {
        cfg.t60_list = parse_number_list(list)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> avcal::Result<bool> {
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(cli, config.as_ref())?;
            let data = prepare_trial(&cfg, cfg.t60_list[0], 0)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            std::fs::write(cfg.out_dir.join("scenario.txt"), write_scenario(&data.scenario))?;
            std::fs::write(cfg.out_dir.join("observations.txt"), write_observations(&data.observations))?;
            println!(
                "{} stops, {} readings, {} injected acoustic outliers",
                data.scenario.trajectory.len(),
                data.observations.count_observed(avcal::calib::Mode::Joint),
                data.outliers.len()
            );
        }
        Command::Calibrate { strategy, input, config } => {
            let cfg = load_config(cli, config.as_ref())?;
            let obs = parse_observations(&std::fs::read_to_string(input)?)?;
            let mut settings = cfg.settings_for(cfg.t60_list[0]);
            settings.ransac.seed = cfg.seed;
            let text = match strategy {
                CalibStrategy::Joint => {
                    let out = run_strategy_joint(&obs, &settings)?;
                    geometry_text(Strategy::Joint, &out.estimate, out.consensus.len())
                }
                CalibStrategy::Rbt => {
                    let out = run_strategy_rbt(&obs, &settings, None)?;
                    geometry_text(Strategy::Rbt, &out.mapped, out.relative.consensus.len())
                }
            };
            match &cli.out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("geometry.txt"), &text)?;
                }
                None => print!("{text}"),
            }
        }
        Command::Sweep { config } => {
            let cfg = load_config(cli, config.as_ref())?;
            let rows = sweep_to_dir(&cfg)?;
            print!("{}", avcal::experiment::metrics_csv(&rows));
        }
        Command::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
