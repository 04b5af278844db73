//! Command-line front end: instance generation and extraction, the cover
//! solvers, the multi-colored subgraph pipeline, gap experiments, report
//! verification, and benchmark sweeps. Artifacts are fully buffered before
//! anything is written, so a failed run never leaves a truncated file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use primerset::{
    bench_csv, brute_force_optimal, build_amplification_graph, build_index, build_mcs_lp,
    enumerate_candidates, extract_from_genome, generate_gap_instance, generate_random_instance,
    instance_sha256, oracle_budget, parse_fasta, parse_graph, parse_instance, parse_loci,
    run_bench, solve_gfix, solve_gpot, solve_gvar, solve_lp, solve_mcs_rounding, solve_trivial,
    verify_cover, verify_multicolor, write_graph, write_instance, BenchAlgo, BenchConfig,
    CandidateId, CandidateWindow, ColoredGraph, HybridizationIndex, Instance, LpStatus, McsOptions,
    McsReport, Primer, ReportParameters, Scaling, SolutionReport, SolveOptions,
    DEFAULT_ORACLE_SIZE_CAP,
};

#[derive(Parser)]
#[command(
    name = "primerset",
    version,
    about = "Minimum primer set selection under an amplification-length bound"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file
    Gen(GenArgs),
    /// Cut an instance out of a genome FASTA at given loci
    Extract(ExtractArgs),
    /// Run a cover solver on an instance file
    Solve(SolveArgs),
    /// Run the multi-colored subgraph solver on an instance or graph dump
    Mcs(McsArgs),
    /// Generate and solve an integrality-gap instance
    Gap(GapArgs),
    /// Re-check an emitted report against its instance or graph
    Verify(VerifyArgs),
    /// Sweep algorithms over random instances and emit a CSV
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of targets
    #[arg(short = 'n', long = "targets")]
    n: u32,
    /// Flank length
    #[arg(short = 'L', long = "length")]
    l: u32,
    /// Primer length
    #[arg(short = 'k', long = "primer-length")]
    k: u32,
    /// Degeneracy bound for candidate primers
    #[arg(long, default_value_t = 1)]
    delta: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output instance file
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    /// Single-record FASTA genome
    #[arg(long)]
    genome: PathBuf,
    /// Loci list: `<position>[\t<length>]` per line, 1-based
    #[arg(long)]
    loci: PathBuf,
    #[arg(short = 'L', long = "length")]
    l: u32,
    #[arg(short = 'k', long = "primer-length")]
    k: u32,
    #[arg(long, default_value_t = 1)]
    delta: u64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file
    instance: PathBuf,
    /// gpot, gfix, gvar, or brute
    #[arg(long)]
    algo: String,
    /// Candidate primers file (one IUPAC primer per line) replacing the
    /// instance-derived candidates
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Subset size cap for --algo brute
    #[arg(long, default_value_t = DEFAULT_ORACLE_SIZE_CAP)]
    size_cap: usize,
    /// Write the JSON report here instead of stdout
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Also write the CSV rendering here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct McsArgs {
    /// Instance file or colored-graph dump (detected by header)
    input: PathBuf,
    /// round or trivial
    #[arg(long, default_value = "round")]
    algo: String,
    /// Drop the variable bounds and scale the covering rows instead
    #[arg(long)]
    scaled: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    max_restarts: usize,
    /// Keep the rounded set as is instead of greedily pruning it
    #[arg(long)]
    no_prune: bool,
    /// Write the canonical graph dump of the (reduced) input here
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    /// Number of vertices (and color classes)
    #[arg(short = 'n', long = "vertices")]
    n: u32,
    /// Matching size per class
    #[arg(short = 's', long = "matching-size")]
    s: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    max_restarts: usize,
    /// Write the graph dump here
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// A JSON report emitted by solve, mcs, or bench
    report: PathBuf,
    /// The instance file or graph dump the report was computed from
    source: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated: gpot, gfix, gvar, mcs-round, mcs-trivial
    #[arg(long, value_delimiter = ',', default_value = "gpot,gfix,gvar")]
    algos: Vec<String>,
    /// Comma-separated target counts
    #[arg(short = 'n', long = "targets", value_delimiter = ',', default_value = "100")]
    n: Vec<u32>,
    /// Comma-separated primer lengths
    #[arg(short = 'k', long = "primer-lengths", value_delimiter = ',', default_value = "8,10,12")]
    k: Vec<u32>,
    #[arg(short = 'L', long = "length", default_value_t = 1000)]
    l: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances per (n, k) point, seeded seed..seed+reps
    #[arg(long, default_value_t = 10)]
    reps: u32,
    /// Write one JSON report per successful run into this directory
    #[arg(long)]
    report_dir: Option<PathBuf>,
    #[arg(short = 'o', long = "output", default_value = "bench.csv")]
    output: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Extract(args) => extract(args),
        Command::Solve(args) => solve(args),
        Command::Mcs(args) => mcs(args),
        Command::Gap(args) => gap(args),
        Command::Verify(args) => verify(args),
        Command::Bench(args) => bench(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_out(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn gen(args: GenArgs) -> Result<()> {
    let mut instance = generate_random_instance(args.n, args.l, args.k, args.seed)?;
    instance.delta = args.delta.max(1);
    write_out(&args.output, &write_instance(&instance))?;
    eprintln!(
        "wrote {} ({} targets, sha256 {})",
        args.output.display(),
        args.n,
        &instance_sha256(&instance)[..12]
    );
    Ok(())
}

fn extract(args: ExtractArgs) -> Result<()> {
    let genome = parse_fasta(&read(&args.genome)?)
        .with_context(|| format!("{}", args.genome.display()))?;
    let loci =
        parse_loci(&read(&args.loci)?).with_context(|| format!("{}", args.loci.display()))?;
    let instance = extract_from_genome(&genome, &loci, args.l, args.k, args.delta.max(1))?;
    write_out(&args.output, &write_instance(&instance))?;
    eprintln!(
        "wrote {} ({} loci, sha256 {})",
        args.output.display(),
        loci.len(),
        &instance_sha256(&instance)[..12]
    );
    Ok(())
}

/// Candidate primers, one per line, validated against the instance bounds.
fn load_candidates(path: &Path, instance: &Instance) -> Result<Vec<Primer>> {
    let mut primers = Vec::new();
    for (i, line) in read(path)?.lines().enumerate() {
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let primer: Primer = text
            .parse()
            .map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1))?;
        if primer.len() != instance.k {
            bail!(
                "{}:{}: primer length {} does not match k={}",
                path.display(),
                i + 1,
                primer.len(),
                instance.k
            );
        }
        if primer.degeneracy() > instance.delta as u128 {
            bail!(
                "{}:{}: degeneracy {} exceeds delta={}",
                path.display(),
                i + 1,
                primer.degeneracy(),
                instance.delta
            );
        }
        primers.push(primer);
    }
    if primers.is_empty() {
        bail!("{}: no candidate primers", path.display());
    }
    Ok(primers)
}

fn make_index(
    instance: &Instance,
    candidates: Option<&PathBuf>,
    window: CandidateWindow,
) -> Result<HybridizationIndex> {
    let list = match candidates {
        Some(path) => load_candidates(path, instance)?,
        None => enumerate_candidates(instance, window),
    };
    Ok(build_index(instance, list)?)
}

fn solve(args: SolveArgs) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let window = if args.algo == "gfix" {
        CandidateWindow::Half
    } else {
        CandidateWindow::Full
    };
    let index = make_index(&instance, args.candidates.as_ref(), window)?;

    let start = Instant::now();
    let picks: Vec<CandidateId> = match args.algo.as_str() {
        "gpot" => solve_gpot(&index)?,
        "gfix" => solve_gfix(&index)?,
        "gvar" => solve_gvar(&index)?,
        "brute" => brute_force_optimal(&index, args.size_cap, oracle_budget())?.cover,
        other => bail!("unknown algorithm {other:?} (expected gpot, gfix, gvar, or brute)"),
    };
    let seconds = start.elapsed().as_secs_f64();

    let primers: Vec<Primer> = picks.iter().map(|&id| index.candidate(id).clone()).collect();
    let check = verify_cover(&instance, &primers)?;
    if !check.is_valid() {
        bail!(
            "internal: solver output leaves target(s) {:?} uncovered",
            check.violations
        );
    }
    let report = SolutionReport {
        algorithm: args.algo.clone(),
        parameters: ReportParameters {
            n: instance.n() as u32,
            l: instance.l,
            k: instance.k,
            delta: instance.delta,
        },
        seed: None,
        instance_sha256: instance_sha256(&instance),
        primers: primers.iter().map(|p| p.to_string()).collect(),
        count: picks.len(),
        witnesses: check.witnesses,
        seconds,
    };
    if let Some(path) = &args.csv {
        write_out(path, &report.to_csv()?)?;
    }
    emit(args.output.as_ref(), &report.to_json()?)?;
    Ok(())
}

fn mcs(args: McsArgs) -> Result<()> {
    let text = read(&args.input)?;
    let start = Instant::now();
    let (graph, instance, primers): (ColoredGraph, Option<Instance>, Option<Vec<String>>) =
        if text.starts_with("MCSG") {
            let graph = parse_graph(&text).with_context(|| format!("{}", args.input.display()))?;
            (graph, None, None)
        } else {
            let instance =
                parse_instance(&text).with_context(|| format!("{}", args.input.display()))?;
            let index = make_index(&instance, None, CandidateWindow::Full)?;
            let reduction = build_amplification_graph(&index)?;
            let names = reduction
                .vertex_candidates
                .iter()
                .map(|&id| index.candidate(id).to_string())
                .collect();
            (reduction.graph, Some(instance), Some(names))
        };
    if let Some(path) = &args.graph_out {
        write_out(path, &write_graph(&graph))?;
    }

    let mut report = McsReport {
        algorithm: format!("mcs-{}", args.algo),
        parameters: instance.as_ref().map(|inst| ReportParameters {
            n: inst.n() as u32,
            l: inst.l,
            k: inst.k,
            delta: inst.delta,
        }),
        instance_sha256: instance.as_ref().map(instance_sha256),
        seed: None,
        n_vertices: graph.n_vertices(),
        n_edges: graph.n_edges(),
        n_classes: graph.n_classes(),
        vertices: Vec::new(),
        count: 0,
        witness_edges: Vec::new(),
        primers,
        rounds: None,
        restarts: None,
        lp_objective: None,
        unpruned_size: None,
        seconds: 0.0,
    };
    match args.algo.as_str() {
        "round" => {
            let opts = McsOptions {
                scaling: if args.scaled { Scaling::Scaled } else { Scaling::Unscaled },
                max_restarts: args.max_restarts,
                prune: !args.no_prune,
                lp: SolveOptions::default(),
            };
            let sol = solve_mcs_rounding(&graph, args.seed, &opts)?;
            report.seed = Some(args.seed);
            report.count = sol.vertices.len();
            report.vertices = sol.vertices;
            report.witness_edges = sol.witness_edges;
            report.rounds = Some(sol.rounds);
            report.restarts = Some(sol.restarts);
            report.lp_objective = Some(sol.lp_objective);
            report.unpruned_size = Some(sol.unpruned_size);
        }
        "trivial" => {
            let (vertices, witness_edges) = solve_trivial(&graph);
            report.count = vertices.len();
            report.vertices = vertices;
            report.witness_edges = witness_edges;
        }
        other => bail!("unknown algorithm {other:?} (expected round or trivial)"),
    }
    report.seconds = start.elapsed().as_secs_f64();
    emit(args.output.as_ref(), &report.to_json()?)?;
    Ok(())
}

fn gap(args: GapArgs) -> Result<()> {
    let gap = generate_gap_instance(args.n, args.s, args.seed)?;
    if let Some(path) = &args.graph_out {
        write_out(path, &write_graph(&gap.graph))?;
    }
    let lp = build_mcs_lp(&gap.graph, Scaling::Unscaled);
    let lp_sol = solve_lp(&lp.problem, &SolveOptions::default())?;
    if lp_sol.status != LpStatus::Optimal {
        bail!("relaxation ended {:?} instead of optimal", lp_sol.status);
    }
    let opts = McsOptions {
        max_restarts: args.max_restarts,
        ..McsOptions::default()
    };
    let start = Instant::now();
    let sol = solve_mcs_rounding(&gap.graph, args.seed, &opts)?;
    let seconds = start.elapsed().as_secs_f64();
    let report = serde_json::json!({
        "n": args.n,
        "s": args.s,
        "seed": args.seed,
        "n_vertices": gap.graph.n_vertices(),
        "n_edges": gap.graph.n_edges(),
        "n_classes": gap.graph.n_classes(),
        "certificate_objective": gap.certificate_objective,
        "lp_objective": lp_sol.objective,
        "rounded": sol,
        "seconds": seconds,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.output.as_ref(), &text)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let report_text = read(&args.report)?;
    let value: serde_json::Value = serde_json::from_str(&report_text)
        .with_context(|| format!("{}", args.report.display()))?;
    if value.get("witnesses").is_some() {
        verify_cover_report(&SolutionReport::from_json(&report_text)?, &args.source)
    } else if value.get("witness_edges").is_some() {
        verify_mcs_report(&McsReport::from_json(&report_text)?, &args.source)
    } else {
        bail!(
            "{}: not a solve or mcs report (no witnesses field)",
            args.report.display()
        );
    }
}

fn verify_cover_report(report: &SolutionReport, source: &Path) -> Result<()> {
    let instance = load_instance(source)?;
    let hash = instance_sha256(&instance);
    if hash != report.instance_sha256 {
        bail!(
            "instance hash mismatch: report has {}, {} has {}",
            report.instance_sha256,
            source.display(),
            hash
        );
    }
    let primers: Vec<Primer> = report
        .primers
        .iter()
        .map(|t| t.parse().map_err(|e| anyhow!("primer {t:?}: {e}")))
        .collect::<Result<_>>()?;
    if primers.len() != report.count {
        bail!("count {} does not match {} primers", report.count, primers.len());
    }
    let check = verify_cover(&instance, &primers)?;
    if !check.is_valid() {
        bail!("target(s) {:?} are not covered", check.violations);
    }
    if check.witnesses != report.witnesses {
        bail!("witnesses do not match the recomputation");
    }
    println!(
        "ok: {} primers cover all {} targets",
        report.count,
        instance.n()
    );
    Ok(())
}

fn verify_mcs_report(report: &McsReport, source: &Path) -> Result<()> {
    let text = read(source)?;
    let graph = if text.starts_with("MCSG") {
        parse_graph(&text).with_context(|| format!("{}", source.display()))?
    } else {
        let instance = parse_instance(&text).with_context(|| format!("{}", source.display()))?;
        if let Some(hash) = &report.instance_sha256 {
            let actual = instance_sha256(&instance);
            if &actual != hash {
                bail!(
                    "instance hash mismatch: report has {hash}, {} has {actual}",
                    source.display()
                );
            }
        }
        let index = make_index(&instance, None, CandidateWindow::Full)?;
        build_amplification_graph(&index)?.graph
    };
    if (graph.n_vertices(), graph.n_edges(), graph.n_classes())
        != (report.n_vertices, report.n_edges, report.n_classes)
    {
        bail!(
            "graph shape mismatch: report has {}v/{}e/{}c, source gives {}v/{}e/{}c",
            report.n_vertices,
            report.n_edges,
            report.n_classes,
            graph.n_vertices(),
            graph.n_edges(),
            graph.n_classes()
        );
    }
    if report.count != report.vertices.len() {
        bail!(
            "count {} does not match {} vertices",
            report.count,
            report.vertices.len()
        );
    }
    let mut picked = vec![false; graph.n_vertices() as usize];
    for &v in &report.vertices {
        *picked
            .get_mut(v as usize)
            .ok_or_else(|| anyhow!("vertex {v} out of range"))? = true;
    }
    let check = verify_multicolor(&graph, &picked);
    if !check.is_covered() {
        bail!("class(es) {:?} are not covered", check.uncovered);
    }
    if report.witness_edges.len() != graph.n_classes() {
        bail!(
            "{} witness edges for {} classes",
            report.witness_edges.len(),
            graph.n_classes()
        );
    }
    for (i, &e) in report.witness_edges.iter().enumerate() {
        let in_class = graph.class(i).contains(&e);
        let covered = (e as usize) < graph.n_edges() && {
            let edge = graph.edge(e);
            report.vertices.contains(&edge.u) && report.vertices.contains(&edge.v)
        };
        if !in_class || !covered {
            bail!("witness edge {e} for class {i} is not a covered class edge");
        }
    }
    println!(
        "ok: {} vertices cover all {} classes",
        report.count,
        graph.n_classes()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let algorithms: Vec<BenchAlgo> = args
        .algos
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let config = BenchConfig {
        algorithms,
        n_values: args.n,
        k_values: args.k,
        l: args.l,
        base_seed: args.seed,
        repetitions: args.reps,
        report_dir: args.report_dir,
    };
    let output = run_bench(&config)?;
    write_out(&args.output, &bench_csv(&output)?)?;
    let failed = output.records.iter().filter(|r| r.status != "ok").count();
    let mut note = format!(
        "wrote {} ({} runs, {} mean rows",
        args.output.display(),
        output.records.len(),
        output.summaries.len()
    );
    if failed > 0 {
        write!(note, ", {failed} failed").unwrap();
    }
    note.push(')');
    eprintln!("{note}");
    Ok(())
}
