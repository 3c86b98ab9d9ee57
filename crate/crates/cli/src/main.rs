mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liftreach_core::scenario::DictionarySpec;
use liftreach_core::{
    compare_pipelines, monte_carlo_containment, reach, DatasetConfig, Error, KoopmanModel, ReachResult, RunSetup,
    Scenario, SystemSpec,
};

use files::{read_dataset, read_json, write_hull_csv, write_json, write_ratio_csv};

/// Data-driven reachability through lifted linear models.
#[derive(Parser)]
#[command(name = "liftreach", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset of a bundled system.
    Simulate {
        /// cstr, nonaffine, unicycle or toy
        #[arg(long)]
        system: String,
        /// Dataset config JSON; the system's defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset JSON to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write one CSV per trajectory into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Fit a lifted linear model to a dataset.
    Identify {
        /// Dataset JSON, or a directory of trajectory CSV files.
        #[arg(long)]
        data: PathBuf,
        /// Builtin dictionary name or a dictionary JSON file.
        #[arg(long)]
        dictionary: String,
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Over-approximate the reachable sets of the unknown system.
    Reach {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario horizon.
        #[arg(long)]
        horizon: Option<usize>,
        /// Result JSON; the hull CSV goes next to it unless --hull-csv is given.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        hull_csv: Option<PathBuf>,
    },
    /// Check reachable sets against simulated trajectories.
    Verify {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        system: String,
        /// Dataset config whose `params` override the system defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale every set about its center before checking.
        #[arg(long)]
        shrink: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare set widths of the scenario dictionary and the baseline.
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Ratio CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON copy of the table.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write the default scenario (and optionally dataset config) of a bundled system.
    Preset {
        #[arg(long)]
        system: String,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write interval-hull bounds of a result for plotting.
    ExportPlot {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Input(String),
    Compute(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Input(m) => (2, m),
                Failure::Compute(m) => (3, m),
                Failure::Violation(m) => (4, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn system_with_config(name: &str, config: Option<&PathBuf>) -> Result<(SystemSpec, Option<DatasetConfig>), Error> {
    match config {
        Some(p) => {
            let c: DatasetConfig = read_json(p)?;
            Ok((c.system(name)?, Some(c)))
        }
        None => Ok((SystemSpec::from_name(name)?, None)),
    }
}

fn dictionary_spec(arg: &str) -> Result<DictionarySpec, Error> {
    let path = std::path::Path::new(arg);
    if path.is_file() {
        read_json(path)
    } else {
        Ok(DictionarySpec::Builtin(arg.to_string()))
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate {
            system,
            config,
            seed,
            out,
            csv_dir,
        } => {
            let (sys, cfg) = system_with_config(&system, config.as_ref())?;
            let cfg = cfg.unwrap_or_else(|| DatasetConfig::preset(&sys));
            cfg.lengths()?;
            let data = cfg.generate(&sys, seed)?;
            write_json(&out, &data)?;
            if let Some(dir) = csv_dir {
                files::write_trajectory_csvs(&dir, &data)?;
            }
            eprintln!(
                "wrote {} trajectories ({} transitions) to {}",
                data.trajectories().len(),
                data.total_transitions(),
                out.display()
            );
        }
        Command::Identify {
            data,
            dictionary,
            ridge,
            out,
        } => {
            let data = read_dataset(&data)?;
            let dict = dictionary_spec(&dictionary)?.resolve(data.state_dim(), data.input_dim())?;
            let model = KoopmanModel::identify(&data, &dict, ridge)?;
            write_json(&out, &model)?;
        }
        Command::Reach {
            model,
            data,
            scenario,
            horizon,
            out,
            hull_csv,
        } => {
            let model: KoopmanModel = read_json(&model)?;
            let data = read_dataset(&data)?;
            let sc = Scenario::load(&scenario)?;
            let n = horizon.unwrap_or(sc.horizon);
            let result = reach(
                &model,
                &data,
                &sc.x0,
                &sc.input_sets(),
                &sc.noise,
                n,
                &sc.reach_options(),
            )?;
            write_json(&out, &result)?;
            write_hull_csv(&hull_csv.unwrap_or_else(|| out.with_extension("csv")), &result)?;
        }
        Command::Verify {
            result,
            system,
            config,
            scenario,
            samples,
            seed,
            shrink,
            out,
        } => {
            let mut result: ReachResult = read_json(&result)?;
            if let Some(f) = shrink {
                if !(f > 0.0 && f.is_finite()) {
                    return Err(Failure::Input(format!("shrink factor must be positive, got {f}")));
                }
                result = result.shrunk(f);
            }
            let (sys, _) = system_with_config(&system, config.as_ref())?;
            let sc = Scenario::load(&scenario)?;
            let report = monte_carlo_containment(&sys, &sc.x0, &sc.input_sets(), &sc.noise, &result, samples, seed)?;
            write_json(&out, &report)?;
            if !report.all_contained() {
                let first = report
                    .first_violation
                    .as_ref()
                    .map(|v| format!("; first: sample {} at k = {}: {}", v.sample, v.k, v.reason))
                    .unwrap_or_default();
                return Err(Failure::Violation(format!(
                    "{} containment failures over {} samples{first}",
                    report.total_violations(),
                    samples
                )));
            }
        }
        Command::Compare {
            data,
            scenario,
            out,
            json,
        } => {
            let data = read_dataset(&data)?;
            let sc = Scenario::load(&scenario)?;
            let (n, m) = (data.state_dim(), data.input_dim());
            let koopman = sc.koopman_dictionary(n, m)?;
            let baseline = sc.baseline_dictionary(n, m)?;
            let (inputs, options) = (sc.input_sets(), sc.reach_options());
            let setup = RunSetup {
                x0: &sc.x0,
                inputs: &inputs,
                noise: &sc.noise,
                horizon: sc.horizon,
                ridge: sc.ridge,
                options: &options,
            };
            let table = compare_pipelines(&data, &koopman, &baseline, &setup)?;
            write_ratio_csv(&out, &table)?;
            if let Some(p) = json {
                write_json(&p, &table)?;
            }
        }
        Command::Preset {
            system,
            scenario,
            config,
        } => {
            let sys = SystemSpec::from_name(&system)?;
            write_json(&scenario, &Scenario::preset(&sys))?;
            if let Some(p) = config {
                write_json(&p, &DatasetConfig::preset(&sys))?;
            }
        }
        Command::ExportPlot { result, out } => {
            let result: ReachResult = read_json(&result)?;
            write_hull_csv(&out, &result)?;
        }
    }
    Ok(())
}
