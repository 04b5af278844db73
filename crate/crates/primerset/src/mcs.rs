//! Minimum multi-colored subgraph: pick the fewest vertices so that every
//! color class keeps an edge with both endpoints picked.
//!
//! Primer selection reduces to this problem: candidates become vertices and
//! each target contributes a color class holding every candidate pair that
//! amplifies it. The solver relaxes the integer program, scales the edge
//! variables by the square root of the largest class, and rounds them
//! randomly until the picked set covers all classes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::index::{CandidateId, HybridizationIndex};
use crate::instance::Strand;
use crate::lp::{solve_lp, LpError, LpProblem, LpStatus, Sense, SolveOptions, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McsError {
    #[error("a colored graph needs at least one class")]
    NoClasses,
    #[error("class {index} has no edges")]
    EmptyClass { index: usize },
    #[error("class {class}: vertex {vertex} out of range (graph has {n_vertices})")]
    VertexOutOfRange {
        class: usize,
        vertex: u32,
        n_vertices: u32,
    },
    #[error("no candidate pair reaches the length bound on target(s) {targets:?}")]
    NoFeasiblePairs { targets: Vec<u32> },
    #[error("relaxation failed")]
    Lp(#[from] LpError),
    #[error("relaxation ended {status:?} instead of optimal")]
    LpNotOptimal { status: LpStatus },
    #[error("rounding left class(es) {uncovered:?} uncovered after {attempts} attempts")]
    RoundingFailed {
        attempts: usize,
        uncovered: Vec<usize>,
    },
    #[error("exhaustive search needs {needed} subset checks, over the budget of {budget}")]
    OracleBudget { needed: u64, budget: u64 },
    #[error("matching instance needs n >= 2s and s >= 1, got n={n} s={s}")]
    BadMatchingShape { n: u32, s: u32 },
}

/// Unordered edge with `u <= v`; `u == v` is a self-loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
}

impl Edge {
    pub fn new(a: u32, b: u32) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
        }
    }

    pub fn is_loop(self) -> bool {
        self.u == self.v
    }
}

/// An edge-colored graph where one edge may carry several colors. Edges are
/// deduplicated across classes; every stored edge belongs to at least one
/// class by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    n_vertices: u32,
    edges: Vec<Edge>,
    classes: Vec<Vec<u32>>, // edge ids, ascending
}

impl ColoredGraph {
    /// Builds the graph from per-class vertex pairs. Pairs are normalized
    /// and deduplicated; a pair occurring in several classes becomes one
    /// edge with several colors.
    pub fn new(n_vertices: u32, class_pairs: Vec<Vec<(u32, u32)>>) -> Result<Self, McsError> {
        if class_pairs.is_empty() {
            return Err(McsError::NoClasses);
        }
        let mut edges: Vec<Edge> = Vec::new();
        for (i, pairs) in class_pairs.iter().enumerate() {
            if pairs.is_empty() {
                return Err(McsError::EmptyClass { index: i });
            }
            for &(a, b) in pairs {
                let bad = a.max(b);
                if bad >= n_vertices {
                    return Err(McsError::VertexOutOfRange {
                        class: i,
                        vertex: bad,
                        n_vertices,
                    });
                }
                edges.push(Edge::new(a, b));
            }
        }
        edges.sort();
        edges.dedup();
        let classes = class_pairs
            .iter()
            .map(|pairs| {
                let mut ids: Vec<u32> = pairs
                    .iter()
                    .map(|&(a, b)| {
                        edges.binary_search(&Edge::new(a, b)).unwrap() as u32
                    })
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            })
            .collect();
        Ok(ColoredGraph {
            n_vertices,
            edges,
            classes,
        })
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: u32) -> Edge {
        self.edges[id as usize]
    }

    pub fn class(&self, i: usize) -> &[u32] {
        &self.classes[i]
    }

    /// Size of the largest color class.
    pub fn max_class_size(&self) -> usize {
        self.classes.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// The colored graph a primer instance reduces to, with the map back from
/// vertices to candidate ids.
#[derive(Debug, Clone)]
pub struct AmplificationGraph {
    pub graph: ColoredGraph,
    /// Vertex id to candidate id, ascending.
    pub vertex_candidates: Vec<CandidateId>,
}

/// Reduces an indexed instance to a colored graph: one color per target,
/// one edge per unordered candidate pair `{p, p'}` hybridizing at
/// `t + t' >= L` (a self-loop when one candidate serves both strings).
/// Targets with no such pair make the reduction fail.
pub fn build_amplification_graph(
    index: &HybridizationIndex,
) -> Result<AmplificationGraph, McsError> {
    let n = index.n_targets();
    let l = index.l() as u64;

    let mut pair_classes: Vec<Vec<(CandidateId, CandidateId)>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for i in 0..n {
        let mut pairs = Vec::new();
        for &(fid, t) in index.on_strand(i, Strand::Forward) {
            for &(rid, tp) in index.on_strand(i, Strand::Reverse) {
                if t as u64 + tp as u64 >= l {
                    pairs.push((fid.min(rid), fid.max(rid)));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.is_empty() {
            missing.push(i as u32 + 1);
        }
        pair_classes.push(pairs);
    }
    if !missing.is_empty() {
        return Err(McsError::NoFeasiblePairs { targets: missing });
    }

    let mut used: Vec<CandidateId> = pair_classes
        .iter()
        .flatten()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    used.sort_unstable();
    used.dedup();
    let vertex_of = |cand: CandidateId| used.binary_search(&cand).unwrap() as u32;

    let class_pairs = pair_classes
        .iter()
        .map(|pairs| {
            pairs
                .iter()
                .map(|&(a, b)| (vertex_of(a), vertex_of(b)))
                .collect()
        })
        .collect();
    Ok(AmplificationGraph {
        graph: ColoredGraph::new(used.len() as u32, class_pairs)?,
        vertex_candidates: used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Unit covering rows and `[0, 1]` variable ranges.
    Unscaled,
    /// Covering rows ask for `sqrt(max class size)` and variables are
    /// unbounded above, absorbing the scale-up into the relaxation itself.
    Scaled,
}

/// The relaxation with its variable layout: `edge_vars[e]` selects edge
/// `e`, `vertex_vars[v]` pays for vertex `v`, and the objective sums the
/// vertex variables.
#[derive(Debug, Clone)]
pub struct McsLp {
    pub problem: LpProblem<f64>,
    pub edge_vars: Vec<VarId>,
    pub vertex_vars: Vec<VarId>,
}

/// Builds the relaxation: minimize the vertex sum subject to one covering
/// row per class and, for every vertex touched by a class, a row keeping
/// the vertex variable above the class's edge mass at that vertex.
pub fn build_mcs_lp(graph: &ColoredGraph, scaling: Scaling) -> McsLp {
    let mut problem = LpProblem::new();
    let (upper, cover_rhs) = match scaling {
        Scaling::Unscaled => (Some(1.0), 1.0),
        Scaling::Scaled => (None, (graph.max_class_size() as f64).sqrt()),
    };
    // variable and row construction below cannot alias, so the builder
    // errors are unreachable
    let edge_vars: Vec<VarId> = (0..graph.n_edges())
        .map(|e| problem.add_var(format!("y{e}"), 0.0, upper).unwrap())
        .collect();
    let vertex_vars: Vec<VarId> = (0..graph.n_vertices())
        .map(|v| problem.add_var(format!("x{v}"), 1.0, upper).unwrap())
        .collect();
    for (i, class) in (0..graph.n_classes()).map(|i| (i, graph.class(i))) {
        let terms: Vec<(VarId, f64)> =
            class.iter().map(|&e| (edge_vars[e as usize], 1.0)).collect();
        problem
            .add_row(format!("cover_c{i}"), Sense::Ge, cover_rhs, &terms)
            .unwrap();
        let mut touched: Vec<u32> = class
            .iter()
            .flat_map(|&e| {
                let edge = graph.edge(e);
                [edge.u, edge.v]
            })
            .collect();
        touched.sort_unstable();
        touched.dedup();
        for v in touched {
            let mut terms: Vec<(VarId, f64)> = class
                .iter()
                .filter(|&&e| {
                    let edge = graph.edge(e);
                    edge.u == v || edge.v == v
                })
                .map(|&e| (edge_vars[e as usize], 1.0))
                .collect();
            terms.push((vertex_vars[v as usize], -1.0));
            problem
                .add_row(format!("link_c{i}_v{v}"), Sense::Le, 0.0, &terms)
                .unwrap();
        }
    }
    McsLp {
        problem,
        edge_vars,
        vertex_vars,
    }
}

/// Edge probabilities after scaling: `p[e] = min(factor * y[e], 1)`.
#[derive(Debug, Clone)]
pub struct ScaledProbabilities {
    pub p: Vec<f64>,
    /// Vertex values after the same scaling, uncapped; these back the
    /// expected-size bound of the rounding argument.
    pub scaled_x: Vec<f64>,
    /// Edges the cap at 1 actually clipped.
    pub capped: usize,
}

/// Scales a relaxation solution into rounding probabilities. Before
/// capping, every covering row of the scaled program must hold: the edge
/// mass of each class reaches `sqrt(max class size)`. That is asserted
/// here; capping afterwards can only help coverage.
pub fn scale_solution(
    graph: &ColoredGraph,
    edge_values: &[f64],
    vertex_values: &[f64],
    factor: f64,
) -> ScaledProbabilities {
    assert_eq!(edge_values.len(), graph.n_edges());
    assert_eq!(vertex_values.len(), graph.n_vertices() as usize);
    let target = (graph.max_class_size() as f64).sqrt();
    for i in 0..graph.n_classes() {
        let mass: f64 = graph
            .class(i)
            .iter()
            .map(|&e| factor * edge_values[e as usize])
            .sum();
        assert!(
            mass >= target - 1e-6,
            "class {i}: pre-cap covering mass {mass} < {target}"
        );
    }
    let mut capped = 0;
    let p: Vec<f64> = edge_values
        .iter()
        .map(|&y| {
            let scaled = factor * y;
            if scaled > 1.0 {
                capped += 1;
                1.0
            } else {
                scaled.max(0.0)
            }
        })
        .collect();
    let scaled_x = vertex_values.iter().map(|&x| factor * x).collect();
    ScaledProbabilities { p, scaled_x, capped }
}

/// One rounding pass: every (vertex, edge) incidence flips its own coin
/// with the edge's probability; a self-loop is a single incidence. Edges
/// are visited in id order, endpoint `u` before `v`, so a seeded generator
/// reproduces the pass exactly.
pub fn round_once<R: Rng>(graph: &ColoredGraph, p: &[f64], rng: &mut R) -> Vec<bool> {
    let mut picked = vec![false; graph.n_vertices() as usize];
    for (e, edge) in graph.edges().iter().enumerate() {
        if rng.gen::<f64>() < p[e] {
            picked[edge.u as usize] = true;
        }
        if !edge.is_loop() && rng.gen::<f64>() < p[e] {
            picked[edge.v as usize] = true;
        }
    }
    picked
}

/// Per-class coverage of a vertex pick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsCheck {
    /// For each class, the lowest-id edge with both endpoints picked.
    pub witness_edges: Vec<Option<u32>>,
    /// Classes with no such edge.
    pub uncovered: Vec<usize>,
}

impl McsCheck {
    pub fn is_covered(&self) -> bool {
        self.uncovered.is_empty()
    }
}

pub fn verify_multicolor(graph: &ColoredGraph, picked: &[bool]) -> McsCheck {
    let mut witness_edges = Vec::with_capacity(graph.n_classes());
    let mut uncovered = Vec::new();
    for i in 0..graph.n_classes() {
        let witness = graph.class(i).iter().copied().find(|&e| {
            let edge = graph.edge(e);
            picked[edge.u as usize] && picked[edge.v as usize]
        });
        if witness.is_none() {
            uncovered.push(i);
        }
        witness_edges.push(witness);
    }
    McsCheck {
        witness_edges,
        uncovered,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct McsOptions {
    pub scaling: Scaling,
    /// Extra attempts after the first, each on its own generator stream.
    pub max_restarts: usize,
    /// Drop redundant vertices (ascending id) once a cover is found.
    pub prune: bool,
    pub lp: SolveOptions<f64>,
}

impl Default for McsOptions {
    fn default() -> Self {
        McsOptions {
            scaling: Scaling::Unscaled,
            max_restarts: 20,
            prune: true,
            lp: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McsSolution {
    /// Picked vertices, ascending.
    pub vertices: Vec<u32>,
    /// Covering edge per class.
    pub witness_edges: Vec<u32>,
    /// Rounding passes united per attempt: `ceil(ln m) + 2` for `m`
    /// classes.
    pub rounds: usize,
    /// Attempts before the successful one.
    pub restarts: usize,
    pub seed: u64,
    pub lp_objective: f64,
    /// Cover size before pruning.
    pub unpruned_size: usize,
}

/// Relax, scale, and round until every class is covered. Each attempt
/// unites `rounds` passes drawn from stream `attempt` of a generator
/// seeded with `seed`, so results are reproducible. Fails after
/// `1 + max_restarts` attempts without a cover.
pub fn solve_mcs_rounding(
    graph: &ColoredGraph,
    seed: u64,
    opts: &McsOptions,
) -> Result<McsSolution, McsError> {
    let lp = build_mcs_lp(graph, opts.scaling);
    let sol = solve_lp(&lp.problem, &opts.lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(McsError::LpNotOptimal { status: sol.status });
    }
    let factor = match opts.scaling {
        Scaling::Unscaled => (graph.max_class_size() as f64).sqrt(),
        Scaling::Scaled => 1.0,
    };
    let edge_values: Vec<f64> = lp.edge_vars.iter().map(|&v| sol.values[v]).collect();
    let vertex_values: Vec<f64> = lp.vertex_vars.iter().map(|&v| sol.values[v]).collect();
    let scaled = scale_solution(graph, &edge_values, &vertex_values, factor);
    let rounds = (graph.n_classes() as f64).ln().ceil() as usize + 2;

    let mut last_uncovered = Vec::new();
    for attempt in 0..=opts.max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut picked = vec![false; graph.n_vertices() as usize];
        for _ in 0..rounds {
            for (v, hit) in round_once(graph, &scaled.p, &mut rng).into_iter().enumerate() {
                picked[v] |= hit;
            }
        }
        let cover = verify_multicolor(graph, &picked);
        if !cover.is_covered() {
            last_uncovered = cover.uncovered;
            continue;
        }
        let unpruned_size = picked.iter().filter(|&&x| x).count();
        if opts.prune {
            for v in 0..picked.len() {
                if picked[v] {
                    picked[v] = false;
                    if !verify_multicolor(graph, &picked).is_covered() {
                        picked[v] = true;
                    }
                }
            }
        }
        let check = verify_multicolor(graph, &picked);
        let witness_edges = check.witness_edges.into_iter().map(Option::unwrap).collect();
        return Ok(McsSolution {
            vertices: (0..graph.n_vertices()).filter(|&v| picked[v as usize]).collect(),
            witness_edges,
            rounds,
            restarts: attempt,
            seed,
            lp_objective: sol.objective,
            unpruned_size,
        });
    }
    Err(McsError::RoundingFailed {
        attempts: opts.max_restarts + 1,
        uncovered: last_uncovered,
    })
}

/// Baseline cover: take the lowest-id edge of every class, pick both
/// endpoints. At most `2m` vertices for `m` classes.
pub fn solve_trivial(graph: &ColoredGraph) -> (Vec<u32>, Vec<u32>) {
    let mut picked = vec![false; graph.n_vertices() as usize];
    let mut witness_edges = Vec::with_capacity(graph.n_classes());
    for i in 0..graph.n_classes() {
        let e = graph.class(i)[0];
        let edge = graph.edge(e);
        picked[edge.u as usize] = true;
        picked[edge.v as usize] = true;
        witness_edges.push(e);
    }
    let vertices = (0..graph.n_vertices())
        .filter(|&v| picked[v as usize])
        .collect();
    (vertices, witness_edges)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsOracleResult {
    pub optimal_size: usize,
    /// Lexicographically first minimum cover, ascending.
    pub vertices: Vec<u32>,
    pub subsets_checked: u64,
}

/// Exhaustive minimum cover in increasing subset size. The full vertex set
/// always covers, so the search terminates; it refuses to start when the
/// enumeration would exceed `budget` subsets.
pub fn brute_force_mcs(graph: &ColoredGraph, budget: u64) -> Result<McsOracleResult, McsError> {
    use itertools::Itertools;
    let nv = graph.n_vertices() as usize;
    let needed = 2u64.saturating_pow(nv as u32).saturating_sub(1);
    if needed > budget {
        return Err(McsError::OracleBudget { needed, budget });
    }
    let mut checked = 0u64;
    let mut picked = vec![false; nv];
    // classes are non-empty, so a cover needs at least one vertex
    for s in 1..=nv {
        for subset in (0..nv as u32).combinations(s) {
            checked += 1;
            picked.fill(false);
            for &v in &subset {
                picked[v as usize] = true;
            }
            if verify_multicolor(graph, &picked).is_covered() {
                return Ok(McsOracleResult {
                    optimal_size: s,
                    vertices: subset,
                    subsets_checked: checked,
                });
            }
        }
    }
    unreachable!("the full vertex set covers every class")
}

/// A matching-based instance with a known fractional certificate.
#[derive(Debug, Clone)]
pub struct GapInstance {
    pub graph: ColoredGraph,
    /// Certificate value on every edge and vertex variable.
    pub fraction: f64,
    /// Objective of the certificate: `n / s`.
    pub certificate_objective: f64,
}

/// Generates `n` color classes over `n` vertices, each an independent
/// uniformly random matching of `s` disjoint edges (shuffle the vertices,
/// pair off the first `2s`; every matching arises from equally many
/// permutations). Setting every variable to `1/s` satisfies the unscaled
/// relaxation, so its optimum is at most `n / s` while integral covers
/// grow faster.
pub fn generate_gap_instance(n: u32, s: u32, seed: u64) -> Result<GapInstance, McsError> {
    if s == 0 || n < 2 * s {
        return Err(McsError::BadMatchingShape { n, s });
    }
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verts: Vec<u32> = (0..n).collect();
    let mut class_pairs = Vec::with_capacity(n as usize);
    for _ in 0..n {
        verts.shuffle(&mut rng);
        class_pairs.push(
            (0..s as usize)
                .map(|j| (verts[2 * j], verts[2 * j + 1]))
                .collect(),
        );
    }
    let graph = ColoredGraph::new(n, class_pairs)?;

    let fraction = 1.0 / s as f64;
    let lp = build_mcs_lp(&graph, Scaling::Unscaled);
    let values = vec![fraction; lp.problem.n_vars()];
    let violated = lp.problem.check_feasible(&values, 1e-9);
    assert!(violated.is_empty(), "certificate violates {violated:?}");

    Ok(GapInstance {
        graph,
        fraction,
        certificate_objective: n as f64 / s as f64,
    })
}
