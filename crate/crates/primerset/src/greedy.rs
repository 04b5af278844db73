//! Greedy primer selection.
//!
//! All three solvers pick, each round, the candidate with the largest gain
//! under their own progress measure, breaking ties toward the
//! lexicographically smallest primer (equivalently, the lowest candidate id,
//! since ids follow text order). Gains are cached per candidate and marked
//! stale only for candidates touching a string whose coverage changed, so a
//! round recomputes a small fraction of the candidate set.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::index::{CandidateId, HybridizationIndex, IndexError};
use crate::instance::{amplicon_length, Instance, Strand};
use crate::report::Witness;
use crate::seq::Primer;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreedyError {
    /// No candidate pair reaches the length bound on these targets, so no
    /// selection can amplify them.
    #[error("infeasible: no candidate pair amplifies target(s) {targets:?}")]
    Infeasible { targets: Vec<u32> },
    /// Strand elements `(target id, strand)` with no admissible
    /// hybridization site at all.
    #[error("infeasible: no candidate covers strand element(s) {elements:?}")]
    UncoverableElements { elements: Vec<(u32, char)> },
    /// Every remaining candidate has gain zero while elements are still
    /// uncovered. The variable-threshold heuristic can reach this state on
    /// feasible instances.
    #[error("stalled with zero gain; uncovered strand element(s): {elements:?}")]
    Stuck { elements: Vec<(u32, char)> },
}

fn slot(target: usize, strand: Strand) -> usize {
    2 * target + (strand == Strand::Reverse) as usize
}

/// Per-candidate gain cache. `invalidate` marks a candidate for lazy
/// recomputation; `best` refreshes the stale entries and returns the
/// lowest-id candidate with the (strictly) largest nonzero gain.
struct GainCache {
    gains: Vec<u64>,
    stale: Vec<bool>,
    queue: Vec<CandidateId>,
}

impl GainCache {
    fn new(len: usize) -> Self {
        GainCache {
            gains: vec![0; len],
            stale: vec![true; len],
            queue: (0..len as CandidateId).collect(),
        }
    }

    fn invalidate(&mut self, id: CandidateId) {
        if !self.stale[id as usize] {
            self.stale[id as usize] = true;
            self.queue.push(id);
        }
    }

    fn best(&mut self, mut recompute: impl FnMut(CandidateId) -> u64) -> Option<(CandidateId, u64)> {
        for id in self.queue.drain(..) {
            self.gains[id as usize] = recompute(id);
            self.stale[id as usize] = false;
        }
        let mut best = None;
        let mut best_gain = 0;
        for (id, &g) in self.gains.iter().enumerate() {
            if g > best_gain {
                best_gain = g;
                best = Some(id as CandidateId);
            }
        }
        best.map(|id| (id, best_gain))
    }
}

/// Coverage positions reached so far on every string: `forward(i)` is the
/// largest hybridization position of any selected primer on target `i`'s
/// forward string (0 when none), mirrored for `reverse(i)`. The potential
/// sums `min(L, forward + reverse)` over targets and hits `n * L` exactly
/// when every target is amplified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverState {
    l: u32,
    cf: Vec<u32>,
    cr: Vec<u32>,
}

impl CoverState {
    pub fn new(n: usize, l: u32) -> Self {
        CoverState {
            l,
            cf: vec![0; n],
            cr: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.cf.len()
    }

    pub fn forward(&self, target: usize) -> u32 {
        self.cf[target]
    }

    pub fn reverse(&self, target: usize) -> u32 {
        self.cr[target]
    }

    pub fn phi(&self) -> u64 {
        let l = self.l as u64;
        self.cf
            .iter()
            .zip(&self.cr)
            .map(|(&f, &r)| l.min(f as u64 + r as u64))
            .sum()
    }

    pub fn is_complete(&self) -> bool {
        self.cf
            .iter()
            .zip(&self.cr)
            .all(|(&f, &r)| f as u64 + r as u64 >= self.l as u64)
    }

    /// Folds one candidate in; returns the targets whose coverage moved.
    pub fn apply(&mut self, index: &HybridizationIndex, id: CandidateId) -> Vec<usize> {
        let mut changed = Vec::new();
        for occ in index.occurrences(id) {
            let ti = occ.target as usize;
            let c = match occ.strand {
                Strand::Forward => &mut self.cf[ti],
                Strand::Reverse => &mut self.cr[ti],
            };
            if occ.position > *c {
                *c = occ.position;
                if changed.last() != Some(&ti) {
                    changed.push(ti);
                }
            }
        }
        changed.dedup();
        changed
    }
}

fn potential_delta(state: &CoverState, target: usize, fpos: Option<u32>, rpos: Option<u32>) -> u64 {
    let cf = state.cf[target];
    let cr = state.cr[target];
    let have = cf as u64 + cr as u64;
    let l = state.l as u64;
    if have >= l {
        return 0;
    }
    let mut d = 0u64;
    if let Some(t) = fpos {
        if t > cf {
            d += (t - cf) as u64;
        }
    }
    if let Some(t) = rpos {
        if t > cr {
            d += (t - cr) as u64;
        }
    }
    d.min(l - have)
}

/// Potential gain of `id` restricted to one target.
pub fn gain(state: &CoverState, index: &HybridizationIndex, id: CandidateId, target: usize) -> u64 {
    let t = target as u32;
    potential_delta(
        state,
        target,
        index.position(id, t, Strand::Forward),
        index.position(id, t, Strand::Reverse),
    )
}

/// Total potential gain of `id`: exactly the potential increase
/// `apply` would produce.
pub fn total_gain(state: &CoverState, index: &HybridizationIndex, id: CandidateId) -> u64 {
    let occs = index.occurrences(id);
    let mut total = 0u64;
    let mut i = 0;
    while i < occs.len() {
        let target = occs[i].target;
        let mut fpos = None;
        let mut rpos = None;
        while i < occs.len() && occs[i].target == target {
            match occs[i].strand {
                Strand::Forward => fpos = Some(occs[i].position),
                Strand::Reverse => rpos = Some(occs[i].position),
            }
            i += 1;
        }
        total += potential_delta(state, target as usize, fpos, rpos);
    }
    total
}

fn strand_max(index: &HybridizationIndex, target: usize, strand: Strand) -> u32 {
    index
        .on_strand(target, strand)
        .iter()
        .map(|&(_, t)| t)
        .max()
        .unwrap_or(0)
}

/// Potential-function greedy: maximizes the summed coverage-position gain
/// each round until every target reaches the length bound. Returns the
/// selection in pick order.
pub fn solve_gpot(index: &HybridizationIndex) -> Result<Vec<CandidateId>, GreedyError> {
    let n = index.n_targets();
    let l = index.l() as u64;

    let unreachable: Vec<u32> = (0..n)
        .filter(|&i| {
            (strand_max(index, i, Strand::Forward) as u64)
                + (strand_max(index, i, Strand::Reverse) as u64)
                < l
        })
        .map(|i| i as u32 + 1)
        .collect();
    if !unreachable.is_empty() {
        return Err(GreedyError::Infeasible {
            targets: unreachable,
        });
    }

    let mut state = CoverState::new(n, index.l());
    let mut cache = GainCache::new(index.len());
    let mut selected = Vec::new();
    while !state.is_complete() {
        let Some((id, _)) = cache.best(|c| total_gain(&state, index, c)) else {
            // unreachable given the precheck: an incomplete target always
            // leaves one of its extremal candidates with positive gain
            let elements = (0..n)
                .filter(|&i| (state.cf[i] as u64 + state.cr[i] as u64) < l)
                .flat_map(|i| [(i as u32 + 1, 'F'), (i as u32 + 1, 'R')])
                .collect();
            return Err(GreedyError::Stuck { elements });
        };
        selected.push(id);
        for target in state.apply(index, id) {
            for strand in [Strand::Forward, Strand::Reverse] {
                for &(c, _) in index.on_strand(target, strand) {
                    cache.invalidate(c);
                }
            }
        }
    }
    Ok(selected)
}

/// Fixed-threshold greedy set cover over the `2n` strand elements. An
/// element counts as covered only by sites at `t >= ceil(L/2)`, so any two
/// covered strings of a target pair to an admissible amplicon.
pub fn solve_gfix(index: &HybridizationIndex) -> Result<Vec<CandidateId>, GreedyError> {
    let n = index.n_targets();
    let h = index.l().div_ceil(2);

    let uncoverable: Vec<(u32, char)> = (0..n)
        .flat_map(|i| [(i, Strand::Forward), (i, Strand::Reverse)])
        .filter(|&(i, s)| strand_max(index, i, s) < h)
        .map(|(i, s)| (i as u32 + 1, s.letter()))
        .collect();
    if !uncoverable.is_empty() {
        return Err(GreedyError::UncoverableElements {
            elements: uncoverable,
        });
    }

    let mut covered = vec![false; 2 * n];
    let mut remaining = 2 * n;
    let mut cache = GainCache::new(index.len());
    let mut selected = Vec::new();
    while remaining > 0 {
        let best = cache.best(|c| {
            index
                .occurrences(c)
                .iter()
                .filter(|o| o.position >= h && !covered[slot(o.target as usize, o.strand)])
                .count() as u64
        });
        let Some((id, _)) = best else {
            let elements = element_list(&covered, n);
            return Err(GreedyError::Stuck { elements });
        };
        selected.push(id);
        for occ in index.occurrences(id) {
            let e = slot(occ.target as usize, occ.strand);
            if occ.position >= h && !covered[e] {
                covered[e] = true;
                remaining -= 1;
                for &(c, _) in index.on_strand(occ.target as usize, occ.strand) {
                    cache.invalidate(c);
                }
            }
        }
    }
    Ok(selected)
}

fn element_list(covered: &[bool], n: usize) -> Vec<(u32, char)> {
    (0..n)
        .flat_map(|i| [(i, Strand::Forward), (i, Strand::Reverse)])
        .filter(|&(i, s)| !covered[slot(i, s)])
        .map(|(i, s)| (i as u32 + 1, s.letter()))
        .collect()
}

/// Variable-threshold greedy set cover. Elements start accepting any site;
/// once one string of a target is covered at position `t`, the opposite
/// string only accepts sites at `t' >= L - t`, which keeps every finished
/// pair within the length bound. Within one pick the forward string is
/// settled before the reverse one. Can stall on feasible instances, which
/// surfaces as [`GreedyError::Stuck`].
pub fn solve_gvar(index: &HybridizationIndex) -> Result<Vec<CandidateId>, GreedyError> {
    let n = index.n_targets();
    let l = index.l();

    let uncoverable: Vec<(u32, char)> = (0..n)
        .flat_map(|i| [(i, Strand::Forward), (i, Strand::Reverse)])
        .filter(|&(i, s)| index.on_strand(i, s).is_empty())
        .map(|(i, s)| (i as u32 + 1, s.letter()))
        .collect();
    if !uncoverable.is_empty() {
        return Err(GreedyError::UncoverableElements {
            elements: uncoverable,
        });
    }

    let mut covered = vec![false; 2 * n];
    let mut threshold = vec![1u32; 2 * n];
    let mut remaining = 2 * n;
    let mut cache = GainCache::new(index.len());
    let mut selected = Vec::new();
    while remaining > 0 {
        let best = cache.best(|c| {
            let occs = index.occurrences(c);
            let mut g = 0u64;
            let mut i = 0;
            while i < occs.len() {
                let target = occs[i].target as usize;
                let mut fpos = None;
                let mut rpos = None;
                while i < occs.len() && occs[i].target as usize == target {
                    match occs[i].strand {
                        Strand::Forward => fpos = Some(occs[i].position),
                        Strand::Reverse => rpos = Some(occs[i].position),
                    }
                    i += 1;
                }
                let fe = slot(target, Strand::Forward);
                let re = slot(target, Strand::Reverse);
                let mut thr_r = threshold[re];
                if let Some(t) = fpos {
                    if !covered[fe] && t >= threshold[fe] {
                        g += 1;
                        if !covered[re] {
                            thr_r = thr_r.max(l.saturating_sub(t).max(1));
                        }
                    }
                }
                if let Some(t) = rpos {
                    if !covered[re] && t >= thr_r {
                        g += 1;
                    }
                }
            }
            g
        });
        let Some((id, _)) = best else {
            let elements = element_list(&covered, n);
            return Err(GreedyError::Stuck { elements });
        };
        selected.push(id);

        let occs = index.occurrences(id);
        let mut i = 0;
        let mut touched: Vec<usize> = Vec::new();
        while i < occs.len() {
            let target = occs[i].target as usize;
            let mut fpos = None;
            let mut rpos = None;
            while i < occs.len() && occs[i].target as usize == target {
                match occs[i].strand {
                    Strand::Forward => fpos = Some(occs[i].position),
                    Strand::Reverse => rpos = Some(occs[i].position),
                }
                i += 1;
            }
            let fe = slot(target, Strand::Forward);
            let re = slot(target, Strand::Reverse);
            if let Some(t) = fpos {
                if !covered[fe] && t >= threshold[fe] {
                    covered[fe] = true;
                    remaining -= 1;
                    touched.push(fe);
                    if !covered[re] {
                        let need = l.saturating_sub(t).max(1);
                        if need > threshold[re] {
                            threshold[re] = need;
                            touched.push(re);
                        }
                    }
                }
            }
            if let Some(t) = rpos {
                if !covered[re] && t >= threshold[re] {
                    covered[re] = true;
                    remaining -= 1;
                    touched.push(re);
                    if !covered[fe] {
                        let need = l.saturating_sub(t).max(1);
                        if need > threshold[fe] {
                            threshold[fe] = need;
                            touched.push(fe);
                        }
                    }
                }
            }
        }
        for e in touched {
            let (target, strand) = (e / 2, if e % 2 == 0 { Strand::Forward } else { Strand::Reverse });
            for &(c, _) in index.on_strand(target, strand) {
                cache.invalidate(c);
            }
        }
    }
    Ok(selected)
}

/// Outcome of checking a selection against an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverCheck {
    /// One witness per amplified target, in target order.
    pub witnesses: Vec<Witness>,
    /// Targets (1-based ids) no selected pair amplifies.
    pub violations: Vec<u32>,
}

impl CoverCheck {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `primers` amplify every target of `instance`: some pair
/// (possibly one primer twice) hybridizes at `t + t' >= L`. For each
/// amplified target the witness records the id-order-first such pair and the
/// number of distinct unordered pairs that work.
pub fn verify_cover(instance: &Instance, primers: &[Primer]) -> Result<CoverCheck, IndexError> {
    let index = crate::index::build_index(instance, primers.iter().cloned())?;
    let l = instance.l as u64;
    let mut witnesses = Vec::new();
    let mut violations = Vec::new();
    for (ti, target) in instance.targets.iter().enumerate() {
        let fwd = index.on_strand(ti, Strand::Forward);
        let rev = index.on_strand(ti, Strand::Reverse);
        let mut first: Option<(CandidateId, u32, CandidateId, u32)> = None;
        let mut pairs: BTreeSet<(CandidateId, CandidateId)> = BTreeSet::new();
        for &(fid, t) in fwd {
            for &(rid, tp) in rev {
                if t as u64 + tp as u64 >= l {
                    pairs.insert((fid.min(rid), fid.max(rid)));
                    if first.is_none() {
                        first = Some((fid, t, rid, tp));
                    }
                }
            }
        }
        match first {
            Some((fid, t, rid, tp)) => witnesses.push(Witness {
                target_id: target.id,
                forward_primer: index.candidate(fid).to_string(),
                t,
                reverse_primer: index.candidate(rid).to_string(),
                t_prime: tp,
                amplicon_length: amplicon_length(instance.l, target.locus_length, t, tp),
                satisfying_pairs: pairs.len() as u64,
            }),
            None => violations.push(target.id),
        }
    }
    Ok(CoverCheck {
        witnesses,
        violations,
    })
}

pub const DEFAULT_ORACLE_SIZE_CAP: usize = 4;
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

/// Subset-enumeration budget: `DEFAULT_ORACLE_BUDGET` unless
/// `MPSSL_ORACLE_BUDGET` overrides it.
pub fn oracle_budget() -> u64 {
    std::env::var("MPSSL_ORACLE_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "exhaustive search needs {needed} subset checks (cap {size_cap}), over the budget of {budget}"
    )]
    BudgetExceeded {
        needed: u64,
        size_cap: usize,
        budget: u64,
    },
    #[error("no selection of size <= {size_cap} amplifies every target")]
    NotFoundWithinCap { size_cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Size of a minimum feasible selection.
    pub optimal_size: usize,
    /// The lexicographically first minimum selection, ids ascending.
    pub cover: Vec<CandidateId>,
    /// Subsets actually tested.
    pub subsets_checked: u64,
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut result: u64 = 1;
    for i in 0..k.min(n.saturating_sub(k)) {
        result = result
            .saturating_mul(n - i)
            .checked_div(i + 1)
            .unwrap_or(u64::MAX);
        if result == u64::MAX {
            return u64::MAX;
        }
    }
    if k > n {
        0
    } else {
        result
    }
}

/// Exhaustive minimum-selection search in increasing subset size, used as a
/// ground-truth check for the greedy solvers on small inputs. Refuses to
/// start when the enumeration would exceed `budget` subsets.
pub fn brute_force_optimal(
    index: &HybridizationIndex,
    size_cap: usize,
    budget: u64,
) -> Result<OracleResult, OracleError> {
    let m = index.len();
    let l = index.l() as u64;
    let n = index.n_targets();

    let mut needed = 0u64;
    for s in 1..=size_cap as u64 {
        needed = needed.saturating_add(binomial(m as u64, s));
    }
    if needed > budget {
        return Err(OracleError::BudgetExceeded {
            needed,
            size_cap,
            budget,
        });
    }

    let mut maxf = vec![0u32; n];
    let mut maxr = vec![0u32; n];
    let mut checked = 0u64;
    for s in 1..=size_cap {
        for subset in (0..m as CandidateId).combinations(s) {
            checked += 1;
            maxf.fill(0);
            maxr.fill(0);
            for &id in &subset {
                for occ in index.occurrences(id) {
                    let ti = occ.target as usize;
                    let c = match occ.strand {
                        Strand::Forward => &mut maxf[ti],
                        Strand::Reverse => &mut maxr[ti],
                    };
                    *c = (*c).max(occ.position);
                }
            }
            if (0..n).all(|i| maxf[i] as u64 + maxr[i] as u64 >= l) {
                return Ok(OracleResult {
                    optimal_size: s,
                    cover: subset,
                    subsets_checked: checked,
                });
            }
        }
    }
    Err(OracleError::NotFoundWithinCap { size_cap })
}
