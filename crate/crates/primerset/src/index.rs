//! Hybridization positions and the candidate index.
//!
//! A primer covers a string at the *largest* 1-based position `t` whose
//! window it can bind (see [`Primer::matches_window`]), so each primer covers
//! at most one position per string. The index maps every candidate primer to
//! its occurrence list over all `2n` flanking strings and keeps, per string,
//! the list of candidates touching it; the greedy solvers use the latter to
//! re-evaluate only affected candidates after a selection.

use std::collections::HashMap;

use thiserror::Error;

use crate::instance::{Instance, Strand};
use crate::seq::{Nucleotide, Primer, Sequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("primer length {k} exceeds sequence length {len}")]
    PrimerTooLong { k: u32, len: u32 },
    #[error("candidate {primer} has length {found}, instance expects k={expected}")]
    CandidateLength {
        primer: String,
        expected: u32,
        found: u32,
    },
}

/// Largest position `t` (1-based, `1 <= t <= |s|-k+1`) at which `p` binds
/// `s`, or `None` when no window matches.
pub fn hybridization_position(p: &Primer, s: &Sequence) -> Result<Option<u32>, IndexError> {
    let k = p.len();
    let len = s.len() as u32;
    if k > len {
        return Err(IndexError::PrimerTooLong { k, len });
    }
    for t in (1..=len - k + 1).rev() {
        if p.matches_window(s.window(t, k)) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Candidate index into a [`HybridizationIndex`].
pub type CandidateId = u32;

/// One hybridization site of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub target: u32,
    pub strand: Strand,
    pub position: u32,
}

/// Which windows of the flanking strings contribute candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateWindow {
    /// Positions anywhere in the strings.
    Full,
    /// Positions `t >= ceil(L/2)` only; any two such sites pair feasibly.
    Half,
}

/// Inverted index from candidate primers to their hybridization sites.
///
/// Candidates are stored sorted by their text rendering, so candidate ids
/// increase in lexicographic primer order and id-order scans break ties the
/// same way everywhere.
#[derive(Debug, Clone)]
pub struct HybridizationIndex {
    candidates: Vec<Primer>,
    by_candidate: Vec<Vec<Occurrence>>,
    /// Indexed by `2 * target + strand`; entries sorted by candidate id.
    by_strand: Vec<Vec<(CandidateId, u32)>>,
    l: u32,
    n: usize,
}

fn strand_slot(target: usize, strand: Strand) -> usize {
    2 * target
        + match strand {
            Strand::Forward => 0,
            Strand::Reverse => 1,
        }
}

impl HybridizationIndex {
    pub fn candidates(&self) -> &[Primer] {
        &self.candidates
    }

    pub fn candidate(&self, id: CandidateId) -> &Primer {
        &self.candidates[id as usize]
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn n_targets(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn lookup(&self, p: &Primer) -> Option<CandidateId> {
        self.candidates.binary_search(p).ok().map(|i| i as CandidateId)
    }

    /// Occurrences of a candidate, sorted by (target, strand).
    pub fn occurrences(&self, id: CandidateId) -> &[Occurrence] {
        &self.by_candidate[id as usize]
    }

    /// Candidates hybridizing to one flanking string, with their positions,
    /// sorted by candidate id.
    pub fn on_strand(&self, target: usize, strand: Strand) -> &[(CandidateId, u32)] {
        &self.by_strand[strand_slot(target, strand)]
    }

    /// Position of candidate `id` on the given string, if it hybridizes.
    pub fn position(&self, id: CandidateId, target: u32, strand: Strand) -> Option<u32> {
        let occ = &self.by_candidate[id as usize];
        occ.binary_search_by(|o| (o.target, o.strand).cmp(&(target, strand)))
            .ok()
            .map(|i| occ[i].position)
    }
}

/// Builds the index over `candidates` for all `2n` strings of `instance`.
///
/// Degeneracy-1 candidates are located by hashing every window once per
/// string; degenerate candidates are scanned per string from the high end.
/// The result is deterministic: equal inputs give equal indexes.
pub fn build_index(
    instance: &Instance,
    candidates: impl IntoIterator<Item = Primer>,
) -> Result<HybridizationIndex, IndexError> {
    let k = instance.k;
    let l = instance.l;
    let n = instance.n();

    let mut cands: Vec<Primer> = candidates.into_iter().collect();
    cands.sort();
    cands.dedup();
    for p in &cands {
        if p.len() != k {
            return Err(IndexError::CandidateLength {
                primer: p.to_string(),
                expected: k,
                found: p.len(),
            });
        }
    }

    // degeneracy-1 candidates bind exactly the windows equal to their
    // reverse complement
    let mut window_of: Vec<Option<Vec<Nucleotide>>> = Vec::with_capacity(cands.len());
    for p in &cands {
        window_of.push(
            p.as_sequence()
                .map(|s| s.reverse_complement().bases().to_vec()),
        );
    }
    let mut exact: HashMap<&[Nucleotide], CandidateId> = HashMap::new();
    for (id, w) in window_of.iter().enumerate() {
        if let Some(w) = w {
            exact.insert(w.as_slice(), id as CandidateId);
        }
    }
    let degenerate: Vec<CandidateId> = (0..cands.len() as CandidateId)
        .filter(|&id| window_of[id as usize].is_none())
        .collect();

    let mut by_candidate: Vec<Vec<Occurrence>> = vec![Vec::new(); cands.len()];
    let mut by_strand: Vec<Vec<(CandidateId, u32)>> = vec![Vec::new(); 2 * n];

    let mut hits: HashMap<CandidateId, u32> = HashMap::new();
    for ti in 0..n {
        for strand in [Strand::Forward, Strand::Reverse] {
            let seq = instance.strand(ti, strand);
            hits.clear();
            for t in 1..=l - k + 1 {
                if let Some(&id) = exact.get(seq.window(t, k)) {
                    hits.insert(id, t); // ascending t: last write is the largest
                }
            }
            for &id in &degenerate {
                if let Some(t) = hybridization_position(&cands[id as usize], seq)? {
                    hits.insert(id, t);
                }
            }
            let slot = &mut by_strand[strand_slot(ti, strand)];
            for (&id, &t) in hits.iter() {
                slot.push((id, t));
            }
            slot.sort_unstable();
            for &(id, t) in slot.iter() {
                by_candidate[id as usize].push(Occurrence {
                    target: ti as u32,
                    strand,
                    position: t,
                });
            }
        }
    }
    for occ in &mut by_candidate {
        occ.sort_unstable_by_key(|o| (o.target, o.strand));
    }

    Ok(HybridizationIndex {
        candidates: cands,
        by_candidate,
        by_strand,
        l,
        n,
    })
}

/// Collects the degeneracy-1 candidates occurring in the instance: the
/// reverse complements of the k-windows of every flanking string,
/// deduplicated and sorted. `Half` keeps only windows at `t >= ceil(L/2)`,
/// which makes any selected pair satisfy `t + t' >= L` by construction.
pub fn enumerate_candidates(instance: &Instance, window: CandidateWindow) -> Vec<Primer> {
    let k = instance.k;
    let l = instance.l;
    let t_min = match window {
        CandidateWindow::Full => 1,
        CandidateWindow::Half => l.div_ceil(2),
    };
    let mut set: std::collections::BTreeSet<Primer> = std::collections::BTreeSet::new();
    if t_min > l - k + 1 {
        return Vec::new();
    }
    for (ti, _) in instance.targets.iter().enumerate() {
        for strand in [Strand::Forward, Strand::Reverse] {
            let seq = instance.strand(ti, strand);
            for t in t_min..=l - k + 1 {
                let w = Sequence::new(seq.window(t, k).to_vec());
                let p = Primer::from_sequence(&w.reverse_complement()).expect("k >= 1");
                set.insert(p);
            }
        }
    }
    set.into_iter().collect()
}
