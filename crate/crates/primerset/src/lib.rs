//! Selection of minimum PCR primer sets under an amplification-length bound.
//!
//! The crate covers the whole pipeline: typed DNA sequences and degenerate
//! primers, hybridization indexing, three greedy cover solvers plus an exact
//! brute-force oracle, a dense two-phase simplex LP solver, the multi-colored
//! subgraph relaxation with randomized rounding, instance file formats, and a
//! seeded benchmark harness.
//!
//! The LP layer is generic over the scalar type through [`lp::LpScalar`]
//! (any `num-traits` float); `f64` aliases are re-exported at the crate
//! root.

pub mod bench;
pub mod greedy;
pub mod index;
pub mod instance;
pub mod io;
pub mod lp;
pub mod mcs;
pub mod report;
pub mod seq;

/// `f64` instantiations of the generic LP layer.
pub type LpProblem64 = lp::LpProblem<f64>;
pub type LpSolution64 = lp::LpSolution<f64>;
pub type LpOptions64 = lp::SolveOptions<f64>;

pub use bench::{
    bench_csv, normalized_size, run_bench, BenchAlgo, BenchConfig, BenchError, BenchOutput,
    BenchRecord, BenchSummary,
};
pub use greedy::{
    brute_force_optimal, gain, oracle_budget, solve_gfix, solve_gpot, solve_gvar, total_gain,
    verify_cover, CoverCheck, CoverState, GreedyError, OracleError, OracleResult,
    DEFAULT_ORACLE_BUDGET, DEFAULT_ORACLE_SIZE_CAP,
};
pub use index::{
    build_index, enumerate_candidates, hybridization_position, CandidateId, CandidateWindow,
    HybridizationIndex,
};
pub use instance::{
    amplicon_length, extract_from_genome, generate_random_instance, Instance, Locus, Strand,
    TargetPair,
};
pub use io::{
    instance_sha256, parse_fasta, parse_graph, parse_instance, parse_loci, write_graph,
    write_instance,
};
pub use lp::{solve_lp, LpError, LpScalar, LpStatus, Sense, SolveOptions, VarId};
pub use mcs::{
    brute_force_mcs, build_amplification_graph, build_mcs_lp, generate_gap_instance, round_once,
    scale_solution, solve_mcs_rounding, solve_trivial, verify_multicolor, AmplificationGraph,
    ColoredGraph, Edge, GapInstance, McsCheck, McsError, McsLp, McsOptions, McsOracleResult,
    McsSolution, ScaledProbabilities, Scaling,
};
pub use report::{McsReport, ReportParameters, SolutionReport, Witness};
pub use seq::{reverse_complement_text, DegenerateNucleotide, Nucleotide, Primer, Sequence};
