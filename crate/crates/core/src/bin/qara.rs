//! Command-line front end: instance generation, single solver runs, the full
//! benchmark protocol, and metric recomputation from run CSVs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qara_core::bench::{self, instance_seed, run_algorithm, Algorithm, ExperimentConfig};
use qara_core::error::Error;
use qara_core::instance::{generate_instance, ExactCoverInstance};
use qara_core::optimizer::OptimizerConfig;

#[derive(Parser)]
#[command(name = "qara", about = "Exact cover solver suite with QARA, QAOA, RQAOA and CRRA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Ansatz depth p
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Maximum optimizer iterations per QAOA run
    #[arg(long = "max-iters", default_value_t = 500)]
    max_iters: usize,
    /// Adam learning rate
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    /// Disable the local verification and rollback mechanism
    #[arg(long = "no-rollback", default_value_t = false)]
    no_rollback: bool,
    /// RQAOA residual variable threshold
    #[arg(long = "theta-min", default_value_t = 5)]
    theta_min: usize,
}

impl SolverFlags {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: self.lr,
            max_iterations: self.max_iters,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit random instance files (JSON) with planted solutions
    Generate {
        /// Comma-separated subset counts, e.g. 8,10,12
        #[arg(long, value_delimiter = ',', default_value = "8,10,12,14,16,18,20")]
        sizes: Vec<usize>,
        /// Instances per size
        #[arg(long, default_value_t = 20)]
        instances: usize,
        /// Master seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out-dir", default_value = "instances")]
        out_dir: PathBuf,
    },
    /// Run one algorithm on one instance file and print the run record as JSON
    Solve {
        #[arg(long)]
        algorithm: Algorithm,
        /// Path to an instance JSON file
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run the full benchmark protocol and write CSV/JSON results
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "8,10,12,14,16,18,20")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        /// Comma-separated algorithm names
        #[arg(long, value_delimiter = ',', default_value = "qara,crra,rqaoa,qaoa")]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out-dir", default_value = "results")]
        out_dir: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Recompute instance metrics and size summaries from a runs.csv
    Metrics {
        /// Path to a runs.csv produced by `bench`
        #[arg(long)]
        runs: PathBuf,
        /// Output directory; prints to stdout when omitted
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate {
            sizes,
            instances,
            seed,
            out_dir,
        } => {
            fs::create_dir_all(&out_dir)?;
            for &m in &sizes {
                for idx in 0..instances {
                    let inst = generate_instance(m, instance_seed(seed, m, idx))?;
                    let path = out_dir.join(format!("instance_m{m}_i{idx}.json"));
                    fs::write(&path, serde_json::to_string_pretty(&inst)?)?;
                    println!("{}", path.display());
                }
            }
            Ok(())
        }
        Command::Solve {
            algorithm,
            instance,
            seed,
            solver,
        } => {
            let text = fs::read_to_string(&instance)?;
            let inst: ExactCoverInstance = serde_json::from_str(&text)?;
            let config = experiment_config(&solver, vec![algorithm], seed);
            let record = run_algorithm(&inst, algorithm, &config, seed)?;
            println!("{}", serde_json::to_string_pretty(&record)?);
            Ok(())
        }
        Command::Bench {
            sizes,
            instances,
            runs,
            algorithms,
            seed,
            out_dir,
            solver,
        } => {
            let mut config = experiment_config(&solver, algorithms, seed);
            config.sizes = sizes;
            config.instances_per_size = instances;
            config.runs_per_instance = runs;
            let results = bench::run_experiment(&config)?;
            bench::write_results(&out_dir, &config, &results)?;
            print!("{}", bench::summary_csv(&results));
            Ok(())
        }
        Command::Metrics { runs, out_dir } => {
            let text = fs::read_to_string(&runs)?;
            let rows = bench::parse_runs_csv(&text)?;
            let results = bench::recompute_from_runs(&rows)?;
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("instance_metrics.csv"), bench::instance_metrics_csv(&results))?;
                    fs::write(dir.join("summary.csv"), bench::summary_csv(&results))?;
                }
                None => {
                    print!("{}", bench::instance_metrics_csv(&results));
                    print!("{}", bench::summary_csv(&results));
                }
            }
            Ok(())
        }
    }
}

fn experiment_config(solver: &SolverFlags, algorithms: Vec<Algorithm>, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        algorithms,
        depth: solver.depth,
        master_seed: seed,
        optimizer: solver.optimizer(),
        rollback_enabled: !solver.no_rollback,
        var_threshold: solver.theta_min,
        ..ExperimentConfig::default()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version requests are not failures.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::ResourceLimit(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
