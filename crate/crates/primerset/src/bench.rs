//! Seeded benchmark sweeps over random instances.
//!
//! A sweep runs every configured algorithm on every (n, k, seed) point and
//! renders one CSV: a `run` row per execution in config order, then a
//! `mean` row per (n, k, algorithm) averaging the successful runs. Failures
//! (infeasible draws, stalls) land in the `status` column of their row and
//! never abort the sweep.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::greedy::{solve_gfix, solve_gpot, solve_gvar, verify_cover, GreedyError};
use crate::index::{build_index, enumerate_candidates, CandidateWindow, HybridizationIndex};
use crate::instance::{generate_random_instance, Instance};
use crate::io::instance_sha256;
use crate::mcs::{build_amplification_graph, solve_mcs_rounding, solve_trivial, McsOptions};
use crate::report::{McsReport, ReportParameters, SolutionReport};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown algorithm {found:?} (expected gpot, gfix, gvar, mcs-round, or mcs-trivial)")]
    UnknownAlgorithm { found: String },
    #[error("config needs at least one {field}")]
    Empty { field: &'static str },
    #[error("repetitions must be at least 1")]
    Repetitions,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report: {0}")]
    Report(#[from] crate::report::ReportError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchAlgo {
    Gpot,
    Gfix,
    Gvar,
    McsRound,
    McsTrivial,
}

impl BenchAlgo {
    pub const ALL: [BenchAlgo; 5] = [
        BenchAlgo::Gpot,
        BenchAlgo::Gfix,
        BenchAlgo::Gvar,
        BenchAlgo::McsRound,
        BenchAlgo::McsTrivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchAlgo::Gpot => "gpot",
            BenchAlgo::Gfix => "gfix",
            BenchAlgo::Gvar => "gvar",
            BenchAlgo::McsRound => "mcs-round",
            BenchAlgo::McsTrivial => "mcs-trivial",
        }
    }
}

impl std::fmt::Display for BenchAlgo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BenchAlgo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        BenchAlgo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::UnknownAlgorithm {
                found: s.to_string(),
            })
    }
}

/// Sweep parameters. The seed for repetition `r` is `base_seed + r`, shared
/// across all (n, k) points so every point sees the same seed list.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algorithms: Vec<BenchAlgo>,
    pub n_values: Vec<u32>,
    pub k_values: Vec<u32>,
    pub l: u32,
    pub base_seed: u64,
    pub repetitions: u32,
    /// When set, one JSON report per successful run is written here.
    pub report_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: vec![BenchAlgo::Gpot, BenchAlgo::Gfix, BenchAlgo::Gvar],
            n_values: vec![100],
            k_values: vec![8, 10, 12],
            l: 1000,
            base_seed: 0,
            repetitions: 10,
            report_dir: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        for (field, empty) in [
            ("algorithm", self.algorithms.is_empty()),
            ("n value", self.n_values.is_empty()),
            ("k value", self.k_values.is_empty()),
        ] {
            if empty {
                return Err(BenchError::Empty { field });
            }
        }
        if self.repetitions == 0 {
            return Err(BenchError::Repetitions);
        }
        Ok(())
    }
}

/// Solution size divided by the trivial two-primers-per-target count.
pub fn normalized_size(count: usize, n: u32) -> f64 {
    count as f64 / (2.0 * n as f64)
}

/// Renders an error and its causes on one line for the status column.
fn error_chain(e: &(dyn std::error::Error + 'static)) -> String {
    let mut out = e.to_string();
    let mut cause = e.source();
    while let Some(c) = cause {
        out.push_str(": ");
        out.push_str(&c.to_string());
        cause = c.source();
    }
    out
}

/// One executed (algorithm, n, k, seed) cell.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub algorithm: BenchAlgo,
    pub n: u32,
    pub k: u32,
    pub l: u32,
    pub seed: u64,
    pub rep: u32,
    /// `"ok"` or the failure message.
    pub status: String,
    pub size: Option<usize>,
    pub normalized: Option<f64>,
    pub seconds: Option<f64>,
}

/// Per-(n, k, algorithm) means over the successful runs.
#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub algorithm: BenchAlgo,
    pub n: u32,
    pub k: u32,
    pub l: u32,
    pub runs_ok: u32,
    pub runs_total: u32,
    pub mean_size: Option<f64>,
    pub mean_normalized: Option<f64>,
    pub mean_seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub summaries: Vec<BenchSummary>,
}

struct RunOutcome {
    size: usize,
    seconds: f64,
    report: RunReport,
}

enum RunReport {
    Cover(SolutionReport),
    Mcs(McsReport),
}

fn cover_report(
    algo: BenchAlgo,
    instance: &Instance,
    index: &HybridizationIndex,
    seed: u64,
    picks: &[crate::index::CandidateId],
    seconds: f64,
) -> SolutionReport {
    let primers: Vec<_> = picks.iter().map(|&id| index.candidate(id).clone()).collect();
    let check = verify_cover(instance, &primers).expect("selected primers have length k");
    debug_assert!(check.is_valid());
    SolutionReport {
        algorithm: algo.name().to_string(),
        parameters: parameters(instance),
        seed: Some(seed),
        instance_sha256: instance_sha256(instance),
        primers: primers.iter().map(|p| p.to_string()).collect(),
        count: picks.len(),
        witnesses: check.witnesses,
        seconds,
    }
}

fn parameters(instance: &Instance) -> ReportParameters {
    ReportParameters {
        n: instance.n() as u32,
        l: instance.l,
        k: instance.k,
        delta: instance.delta,
    }
}

fn run_greedy(
    algo: BenchAlgo,
    instance: &Instance,
    index: &HybridizationIndex,
    seed: u64,
) -> Result<RunOutcome, GreedyError> {
    let start = Instant::now();
    let picks = match algo {
        BenchAlgo::Gpot => solve_gpot(index)?,
        BenchAlgo::Gfix => solve_gfix(index)?,
        BenchAlgo::Gvar => solve_gvar(index)?,
        _ => unreachable!(),
    };
    let seconds = start.elapsed().as_secs_f64();
    Ok(RunOutcome {
        size: picks.len(),
        seconds,
        report: RunReport::Cover(cover_report(algo, instance, index, seed, &picks, seconds)),
    })
}

fn run_mcs(
    algo: BenchAlgo,
    instance: &Instance,
    index: &HybridizationIndex,
    seed: u64,
) -> Result<RunOutcome, crate::mcs::McsError> {
    let start = Instant::now();
    let reduction = build_amplification_graph(index)?;
    let graph = &reduction.graph;
    let mut report = McsReport {
        algorithm: algo.name().to_string(),
        parameters: Some(parameters(instance)),
        instance_sha256: Some(instance_sha256(instance)),
        seed: None,
        n_vertices: graph.n_vertices(),
        n_edges: graph.n_edges(),
        n_classes: graph.n_classes(),
        vertices: Vec::new(),
        count: 0,
        witness_edges: Vec::new(),
        primers: Some(
            reduction
                .vertex_candidates
                .iter()
                .map(|&id| index.candidate(id).to_string())
                .collect(),
        ),
        rounds: None,
        restarts: None,
        lp_objective: None,
        unpruned_size: None,
        seconds: 0.0,
    };
    match algo {
        BenchAlgo::McsRound => {
            let sol = solve_mcs_rounding(graph, seed, &McsOptions::default())?;
            report.seed = Some(seed);
            report.vertices = sol.vertices.clone();
            report.count = sol.vertices.len();
            report.witness_edges = sol.witness_edges.clone();
            report.rounds = Some(sol.rounds);
            report.restarts = Some(sol.restarts);
            report.lp_objective = Some(sol.lp_objective);
            report.unpruned_size = Some(sol.unpruned_size);
        }
        BenchAlgo::McsTrivial => {
            let (vertices, witness_edges) = solve_trivial(graph);
            report.count = vertices.len();
            report.vertices = vertices;
            report.witness_edges = witness_edges;
        }
        _ => unreachable!(),
    }
    report.seconds = start.elapsed().as_secs_f64();
    Ok(RunOutcome {
        size: report.count,
        seconds: report.seconds,
        report: RunReport::Mcs(report),
    })
}

fn write_report(dir: &PathBuf, record: &BenchRecord, report: &RunReport) -> Result<(), BenchError> {
    let path = dir.join(format!(
        "{}_n{}_k{}_s{}.json",
        record.algorithm, record.n, record.k, record.seed
    ));
    let json = match report {
        RunReport::Cover(r) => r.to_json()?,
        RunReport::Mcs(r) => r.to_json()?,
    };
    fs::write(&path, json).map_err(|source| BenchError::Io { path, source })
}

/// Runs the sweep. Rows are produced in config order: n, then k, then
/// repetition, then algorithm, with the mean rows in n, k, algorithm order.
pub fn run_bench(config: &BenchConfig) -> Result<BenchOutput, BenchError> {
    config.validate()?;
    if let Some(dir) = &config.report_dir {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.clone(),
            source,
        })?;
    }

    let needs_full = config
        .algorithms
        .iter()
        .any(|a| !matches!(a, BenchAlgo::Gfix));
    let needs_half = config.algorithms.contains(&BenchAlgo::Gfix);

    let mut records = Vec::new();
    for &n in &config.n_values {
        for &k in &config.k_values {
            for rep in 0..config.repetitions {
                let seed = config.base_seed + rep as u64;
                let instance = generate_random_instance(n, config.l, k, seed);
                let indexes = instance.as_ref().ok().map(|inst| {
                    let build = |w| build_index(inst, enumerate_candidates(inst, w)).unwrap();
                    (
                        needs_full.then(|| build(CandidateWindow::Full)),
                        needs_half.then(|| build(CandidateWindow::Half)),
                    )
                });
                for &algo in &config.algorithms {
                    let mut record = BenchRecord {
                        algorithm: algo,
                        n,
                        k,
                        l: config.l,
                        seed,
                        rep,
                        status: "ok".to_string(),
                        size: None,
                        normalized: None,
                        seconds: None,
                    };
                    let outcome = match (&instance, &indexes) {
                        (Ok(inst), Some((full, half))) => match algo {
                            BenchAlgo::Gfix => {
                                run_greedy(algo, inst, half.as_ref().unwrap(), seed)
                                    .map_err(|e| error_chain(&e))
                            }
                            BenchAlgo::Gpot | BenchAlgo::Gvar => {
                                run_greedy(algo, inst, full.as_ref().unwrap(), seed)
                                    .map_err(|e| error_chain(&e))
                            }
                            BenchAlgo::McsRound | BenchAlgo::McsTrivial => {
                                run_mcs(algo, inst, full.as_ref().unwrap(), seed)
                                    .map_err(|e| error_chain(&e))
                            }
                        },
                        (Err(e), _) => Err(error_chain(e)),
                        (Ok(_), None) => unreachable!(),
                    };
                    match outcome {
                        Ok(run) => {
                            record.size = Some(run.size);
                            record.normalized = Some(normalized_size(run.size, n));
                            record.seconds = Some(run.seconds);
                            if let Some(dir) = &config.report_dir {
                                write_report(dir, &record, &run.report)?;
                            }
                        }
                        Err(message) => record.status = message,
                    }
                    records.push(record);
                }
            }
        }
    }

    let mut summaries = Vec::new();
    for &n in &config.n_values {
        for &k in &config.k_values {
            for &algo in &config.algorithms {
                let cell: Vec<&BenchRecord> = records
                    .iter()
                    .filter(|r| r.n == n && r.k == k && r.algorithm == algo)
                    .collect();
                let ok: Vec<&&BenchRecord> =
                    cell.iter().filter(|r| r.status == "ok").collect();
                let mean = |f: fn(&BenchRecord) -> f64| {
                    (!ok.is_empty()).then(|| {
                        ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                    })
                };
                summaries.push(BenchSummary {
                    algorithm: algo,
                    n,
                    k,
                    l: config.l,
                    runs_ok: ok.len() as u32,
                    runs_total: cell.len() as u32,
                    mean_size: mean(|r| r.size.unwrap() as f64),
                    mean_normalized: mean(|r| r.normalized.unwrap()),
                    mean_seconds: mean(|r| r.seconds.unwrap()),
                });
            }
        }
    }

    Ok(BenchOutput { records, summaries })
}

/// One flat CSV: `run` rows leave the mean columns blank and `mean` rows
/// leave the per-run columns blank. The two log10 columns render the mean
/// rows as a log-log runtime table; they stay blank when a mean rounds to
/// zero seconds.
pub fn bench_csv(output: &BenchOutput) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "record",
        "algorithm",
        "n",
        "k",
        "L",
        "seed",
        "rep",
        "status",
        "size",
        "normalized_size",
        "seconds",
        "runs",
        "mean_size",
        "mean_normalized_size",
        "mean_seconds",
        "log10_n",
        "log10_mean_seconds",
    ])?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in &output.records {
        w.write_record([
            "run".to_string(),
            r.algorithm.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.l.to_string(),
            r.seed.to_string(),
            r.rep.to_string(),
            r.status.clone(),
            opt(r.size.map(|x| x.to_string())),
            opt(r.normalized.map(|x| format!("{x:.6}"))),
            opt(r.seconds.map(|x| format!("{x:.3}"))),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    for s in &output.summaries {
        let log_secs = s
            .mean_seconds
            .filter(|&x| x > 0.0)
            .map(|x| format!("{:.6}", x.log10()));
        w.write_record([
            "mean".to_string(),
            s.algorithm.to_string(),
            s.n.to_string(),
            s.k.to_string(),
            s.l.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            format!("{}/{}", s.runs_ok, s.runs_total),
            opt(s.mean_size.map(|x| format!("{x:.3}"))),
            opt(s.mean_normalized.map(|x| format!("{x:.6}"))),
            opt(s.mean_seconds.map(|x| format!("{x:.3}"))),
            format!("{:.6}", (s.n as f64).log10()),
            opt(log_secs),
        ])?;
    }
    Ok(String::from_utf8(
        w.into_inner().map_err(crate::report::ReportError::from)?,
    )
    .map_err(crate::report::ReportError::from)?)
}
