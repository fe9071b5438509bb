//! Experiment driver: generate instances, run each algorithm R times per
//! instance, aggregate the per-instance and per-size metrics, and write
//! machine-readable results.
//!
//! Per-run seeds are a pure function of (master_seed, size, instance_index,
//! algorithm, run_index), so results do not depend on scheduling order.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::instance::{generate_instance, ExactCoverInstance};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::qara::{crra_run, qara_run, QaraConfig, RunRecord};
use crate::rqaoa::{rqaoa_run, RqaoaConfig};
use crate::simulator::{most_probable_bitstring, precompute_diagonal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Algorithm {
    Qara,
    QaraNoRollback,
    Crra,
    Rqaoa,
    Qaoa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Qara,
        Algorithm::QaraNoRollback,
        Algorithm::Crra,
        Algorithm::Rqaoa,
        Algorithm::Qaoa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qara => "qara",
            Algorithm::QaraNoRollback => "qara-no-rollback",
            Algorithm::Crra => "crra",
            Algorithm::Rqaoa => "rqaoa",
            Algorithm::Qaoa => "qaoa",
        }
    }

    fn id(self) -> u64 {
        match self {
            Algorithm::Qara => 1,
            Algorithm::QaraNoRollback => 2,
            Algorithm::Crra => 3,
            Algorithm::Rqaoa => 4,
            Algorithm::Qaoa => 5,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl clap::ValueEnum for Algorithm {
    fn value_variants<'a>() -> &'a [Self] {
        &Algorithm::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qara" => Ok(Algorithm::Qara),
            "qara-no-rollback" => Ok(Algorithm::QaraNoRollback),
            "crra" => Ok(Algorithm::Crra),
            "rqaoa" => Ok(Algorithm::Rqaoa),
            "qaoa" => Ok(Algorithm::Qaoa),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Per-instance aggregates over R runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceMetrics {
    pub c_opt: u64,
    pub c_avg: f64,
    pub p_success: f64,
    pub t_itr: f64,
    pub run_count: usize,
}

/// Per-size aggregates over K instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub m: usize,
    pub mean_c_opt: f64,
    pub mean_c_avg: f64,
    pub mean_p_success: f64,
    pub mean_t_itr: f64,
    pub s_ratio: f64,
    pub instance_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub instances_per_size: usize,
    pub runs_per_instance: usize,
    pub algorithms: Vec<Algorithm>,
    pub depth: usize,
    pub master_seed: u64,
    pub optimizer: OptimizerConfig,
    /// Disables verification/rollback for the qara and crra entries
    /// (the dedicated qara-no-rollback algorithm ignores this).
    pub rollback_enabled: bool,
    pub rollback_cap_override: Option<usize>,
    pub var_threshold: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: vec![8, 10, 12, 14, 16, 18, 20],
            instances_per_size: 20,
            runs_per_instance: 50,
            algorithms: vec![
                Algorithm::Qara,
                Algorithm::Crra,
                Algorithm::Rqaoa,
                Algorithm::Qaoa,
            ],
            depth: 1,
            master_seed: 0,
            optimizer: OptimizerConfig::default(),
            rollback_enabled: true,
            rollback_cap_override: None,
            var_threshold: 5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.instances_per_size == 0 || self.runs_per_instance == 0 {
            return Err(Error::InvalidConfig(
                "sizes, instances and runs must all be non-empty/positive".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        if self.sizes.iter().any(|&m| m > crate::simulator::MAX_QUBITS) {
            return Err(Error::ResourceLimit(format!(
                "sizes above the {}-qubit simulator cap",
                crate::simulator::MAX_QUBITS
            )));
        }
        self.optimizer.validate()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(fields: &[u64]) -> u64 {
    let mut acc = 0u64;
    for &f in fields {
        acc = splitmix64(acc ^ f);
    }
    acc
}

pub fn instance_seed(master_seed: u64, size: usize, instance_index: usize) -> u64 {
    mix(&[master_seed, 0xA11CE, size as u64, instance_index as u64])
}

pub fn run_seed(
    master_seed: u64,
    size: usize,
    instance_index: usize,
    algorithm: Algorithm,
    run_index: usize,
) -> u64 {
    mix(&[
        master_seed,
        0xB0B,
        size as u64,
        instance_index as u64,
        algorithm.id(),
        run_index as u64,
    ])
}

/// Plain QAOA baseline: one full optimization on the whole instance, solution
/// read off as the most probable bitstring.
pub fn qaoa_baseline_run(
    instance: &ExactCoverInstance,
    depth: usize,
    optimizer: &OptimizerConfig,
    seed: u64,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = build_hamiltonian(instance);
    let diag = precompute_diagonal(&h, instance.num_subsets())?;
    let result = optimize(&diag, depth, optimizer, &mut rng)?;
    let assignment = most_probable_bitstring(&result.final_state);
    let objective = instance.objective_value(&assignment)?;
    Ok(RunRecord {
        assignment,
        objective,
        optimizer_iterations_total: result.iterations,
        quantum_prunings: 0,
        rollbacks: 0,
        phase_log: Vec::new(),
        wall_time: start.elapsed(),
    })
}

/// Dispatches one seeded run of `algorithm` on `instance`.
pub fn run_algorithm(
    instance: &ExactCoverInstance,
    algorithm: Algorithm,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<RunRecord> {
    let qara_config = QaraConfig {
        depth: config.depth,
        optimizer: config.optimizer.clone(),
        rollback_enabled: config.rollback_enabled,
        rollback_cap_override: config.rollback_cap_override,
    };
    match algorithm {
        Algorithm::Qara => qara_run(instance, &qara_config, seed),
        Algorithm::QaraNoRollback => {
            let no_rollback = QaraConfig {
                rollback_enabled: false,
                ..qara_config
            };
            qara_run(instance, &no_rollback, seed)
        }
        Algorithm::Crra => crra_run(instance, &qara_config, seed),
        Algorithm::Rqaoa => {
            let rqaoa_config = RqaoaConfig {
                depth: config.depth,
                optimizer: config.optimizer.clone(),
                var_threshold: config.var_threshold,
            };
            rqaoa_run(instance, &rqaoa_config, seed)
        }
        Algorithm::Qaoa => qaoa_baseline_run(instance, config.depth, &config.optimizer, seed),
    }
}

/// One row of runs.csv.
#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub size: usize,
    pub instance_id: usize,
    pub algorithm: Algorithm,
    pub run_id: usize,
    pub objective: u64,
    pub iterations: usize,
    pub quantum_prunings: usize,
    pub rollbacks: usize,
    pub wall_ms: u128,
    #[serde(skip)]
    pub phase_log: Vec<crate::qara::PhaseStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRow {
    pub size: usize,
    pub instance_id: usize,
    pub algorithm: Algorithm,
    pub metrics: InstanceMetrics,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub summary: SizeSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResults {
    pub runs: Vec<RunRow>,
    pub instances: Vec<InstanceRow>,
    pub summaries: Vec<SummaryRow>,
}

impl ExperimentResults {
    pub fn summary_for(&self, algorithm: Algorithm, m: usize) -> Option<&SizeSummary> {
        self.summaries
            .iter()
            .find(|row| row.algorithm == algorithm && row.summary.m == m)
            .map(|row| &row.summary)
    }
}

/// C_opt, C_avg, P_success and T_ITR over one instance's runs.
pub fn compute_instance_metrics(objectives: &[u64], iteration_counts: &[usize]) -> Result<InstanceMetrics> {
    if objectives.is_empty() || objectives.len() != iteration_counts.len() {
        return Err(Error::InvalidArgument(
            "objective and iteration lists must be non-empty and of equal length".into(),
        ));
    }
    let r = objectives.len();
    let c_opt = *objectives.iter().min().expect("non-empty");
    let c_avg = objectives.iter().map(|&c| c as f64).sum::<f64>() / r as f64;
    let successes = objectives.iter().filter(|&&c| c == 0).count();
    let t_itr = iteration_counts.iter().map(|&t| t as f64).sum::<f64>() / r as f64;
    Ok(InstanceMetrics {
        c_opt,
        c_avg,
        p_success: successes as f64 / r as f64,
        t_itr,
        run_count: r,
    })
}

/// Arithmetic means across instances plus the solved-instance ratio.
pub fn compute_size_summary(m: usize, per_instance: &[InstanceMetrics]) -> Result<SizeSummary> {
    if per_instance.is_empty() {
        return Err(Error::InvalidArgument("no instance metrics provided".into()));
    }
    let k = per_instance.len() as f64;
    let solved = per_instance.iter().filter(|im| im.c_opt == 0).count();
    Ok(SizeSummary {
        m,
        mean_c_opt: per_instance.iter().map(|im| im.c_opt as f64).sum::<f64>() / k,
        mean_c_avg: per_instance.iter().map(|im| im.c_avg).sum::<f64>() / k,
        mean_p_success: per_instance.iter().map(|im| im.p_success).sum::<f64>() / k,
        mean_t_itr: per_instance.iter().map(|im| im.t_itr).sum::<f64>() / k,
        s_ratio: solved as f64 / per_instance.len() as f64,
        instance_count: per_instance.len(),
    })
}

/// Runs the full protocol in memory. Rows are ordered by
/// (size, instance, algorithm, run) regardless of worker scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let mut runs = Vec::new();
    let mut instances = Vec::new();
    let mut summaries = Vec::new();

    for &size in &config.sizes {
        let generated: Vec<ExactCoverInstance> = (0..config.instances_per_size)
            .map(|idx| generate_instance(size, instance_seed(config.master_seed, size, idx)))
            .collect::<Result<_>>()?;

        let jobs: Vec<(usize, Algorithm, usize)> = (0..config.instances_per_size)
            .flat_map(|idx| {
                config.algorithms.iter().flat_map(move |&algo| {
                    (0..config.runs_per_instance).map(move |run| (idx, algo, run))
                })
            })
            .collect();

        let size_rows: Vec<RunRow> = jobs
            .par_iter()
            .map(|&(idx, algo, run)| {
                let seed = run_seed(config.master_seed, size, idx, algo, run);
                let record = run_algorithm(&generated[idx], algo, config, seed)?;
                Ok(RunRow {
                    size,
                    instance_id: idx,
                    algorithm: algo,
                    run_id: run,
                    objective: record.objective,
                    iterations: record.optimizer_iterations_total,
                    quantum_prunings: record.quantum_prunings,
                    rollbacks: record.rollbacks,
                    wall_ms: record.wall_time.as_millis(),
                    phase_log: record.phase_log,
                })
            })
            .collect::<Result<_>>()?;

        for &algo in &config.algorithms {
            let mut per_instance = Vec::new();
            for idx in 0..config.instances_per_size {
                let rows: Vec<&RunRow> = size_rows
                    .iter()
                    .filter(|r| r.instance_id == idx && r.algorithm == algo)
                    .collect();
                let objectives: Vec<u64> = rows.iter().map(|r| r.objective).collect();
                let iteration_counts: Vec<usize> = rows.iter().map(|r| r.iterations).collect();
                let metrics = compute_instance_metrics(&objectives, &iteration_counts)?;
                per_instance.push(metrics.clone());
                instances.push(InstanceRow {
                    size,
                    instance_id: idx,
                    algorithm: algo,
                    metrics,
                });
            }
            summaries.push(SummaryRow {
                algorithm: algo,
                summary: compute_size_summary(size, &per_instance)?,
            });
        }
        runs.extend(size_rows);
    }

    Ok(ExperimentResults {
        runs,
        instances,
        summaries,
    })
}

pub const RUNS_HEADER: &str =
    "size,instance_id,algorithm,run_id,objective,iterations,quantum_prunings,rollbacks";
pub const TIMINGS_HEADER: &str = "size,instance_id,algorithm,run_id,wall_ms";
pub const INSTANCE_HEADER: &str = "size,instance_id,algorithm,c_opt,c_avg,p_success,t_itr,runs";
pub const SUMMARY_HEADER: &str =
    "size,algorithm,mean_c_opt,mean_c_avg,mean_p_success,mean_t_itr,s_ratio,instances";

pub fn runs_csv(results: &ExperimentResults) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in &results.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.size,
            r.instance_id,
            r.algorithm,
            r.run_id,
            r.objective,
            r.iterations,
            r.quantum_prunings,
            r.rollbacks
        ));
    }
    out
}

/// Wall-clock data lives in its own file: it is measurement output, not part
/// of the deterministic results contract.
pub fn timings_csv(results: &ExperimentResults) -> String {
    let mut out = String::from(TIMINGS_HEADER);
    out.push('\n');
    for r in &results.runs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.size, r.instance_id, r.algorithm, r.run_id, r.wall_ms
        ));
    }
    out
}

pub fn instance_metrics_csv(results: &ExperimentResults) -> String {
    let mut out = String::from(INSTANCE_HEADER);
    out.push('\n');
    for row in &results.instances {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.size,
            row.instance_id,
            row.algorithm,
            row.metrics.c_opt,
            row.metrics.c_avg,
            row.metrics.p_success,
            row.metrics.t_itr,
            row.metrics.run_count
        ));
    }
    out
}

pub fn summary_csv(results: &ExperimentResults) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in &results.summaries {
        let s = &row.summary;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.m,
            row.algorithm,
            s.mean_c_opt,
            s.mean_c_avg,
            s.mean_p_success,
            s.mean_t_itr,
            s.s_ratio,
            s.instance_count
        ));
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    instance_seeds: Vec<ManifestSeeds>,
}

#[derive(Serialize)]
struct ManifestSeeds {
    size: usize,
    seeds: Vec<u64>,
}

/// Writes runs.csv, timings.csv, instance_metrics.csv, summary.csv and
/// manifest.json into `out_dir`.
pub fn write_results(out_dir: &Path, config: &ExperimentConfig, results: &ExperimentResults) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("runs.csv"), runs_csv(results))?;
    fs::write(out_dir.join("timings.csv"), timings_csv(results))?;
    fs::write(out_dir.join("instance_metrics.csv"), instance_metrics_csv(results))?;
    fs::write(out_dir.join("summary.csv"), summary_csv(results))?;
    let manifest = Manifest {
        config,
        instance_seeds: config
            .sizes
            .iter()
            .map(|&size| ManifestSeeds {
                size,
                seeds: (0..config.instances_per_size)
                    .map(|idx| instance_seed(config.master_seed, size, idx))
                    .collect(),
            })
            .collect(),
    };
    let mut file = fs::File::create(out_dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut file, &manifest)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Rebuilds instance metrics and size summaries from parsed runs.csv rows.
pub fn recompute_from_runs(rows: &[RunRow]) -> Result<ExperimentResults> {
    let mut keys: Vec<(usize, Algorithm)> = rows.iter().map(|r| (r.size, r.algorithm)).collect();
    keys.sort();
    keys.dedup();
    let mut instances = Vec::new();
    let mut summaries = Vec::new();
    for (size, algo) in keys {
        let mut instance_ids: Vec<usize> = rows
            .iter()
            .filter(|r| r.size == size && r.algorithm == algo)
            .map(|r| r.instance_id)
            .collect();
        instance_ids.sort_unstable();
        instance_ids.dedup();
        let mut per_instance = Vec::new();
        for idx in instance_ids {
            let selected: Vec<&RunRow> = rows
                .iter()
                .filter(|r| r.size == size && r.algorithm == algo && r.instance_id == idx)
                .collect();
            let objectives: Vec<u64> = selected.iter().map(|r| r.objective).collect();
            let iterations: Vec<usize> = selected.iter().map(|r| r.iterations).collect();
            let metrics = compute_instance_metrics(&objectives, &iterations)?;
            per_instance.push(metrics.clone());
            instances.push(InstanceRow {
                size,
                instance_id: idx,
                algorithm: algo,
                metrics,
            });
        }
        summaries.push(SummaryRow {
            algorithm: algo,
            summary: compute_size_summary(size, &per_instance)?,
        });
    }
    Ok(ExperimentResults {
        runs: rows.to_vec(),
        instances,
        summaries,
    })
}

/// Parses the runs.csv format written by `runs_csv`.
pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty runs csv".into()))?;
    if header != RUNS_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected header '{header}'")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::InvalidArgument(format!(
                "line {}: expected 8 fields",
                lineno + 2
            )));
        }
        let parse_err = |what: &str| Error::InvalidArgument(format!("line {}: bad {what}", lineno + 2));
        rows.push(RunRow {
            size: fields[0].parse().map_err(|_| parse_err("size"))?,
            instance_id: fields[1].parse().map_err(|_| parse_err("instance_id"))?,
            algorithm: fields[2].parse()?,
            run_id: fields[3].parse().map_err(|_| parse_err("run_id"))?,
            objective: fields[4].parse().map_err(|_| parse_err("objective"))?,
            iterations: fields[5].parse().map_err(|_| parse_err("iterations"))?,
            quantum_prunings: fields[6].parse().map_err(|_| parse_err("quantum_prunings"))?,
            rollbacks: fields[7].parse().map_err(|_| parse_err("rollbacks"))?,
            wall_ms: 0,
            phase_log: Vec::new(),
        });
    }
    Ok(rows)
}
