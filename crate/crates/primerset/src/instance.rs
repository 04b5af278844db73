//! Amplification instances: target pairs of flanking sequences plus the
//! problem parameters (primer length `k`, degeneracy bound `delta`, product
//! length bound `L`).
//!
//! Each target stores its forward and reverse flank oriented toward the
//! locus: position `L` of either string is the base adjacent to the locus,
//! position 1 the farthest. A primer pair binding at positions `t` and `t'`
//! yields a product of length `(2L + x) - (t + t')`, so the product is within
//! `L + x` exactly when `t + t' >= L`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::seq::{Sequence, NUCLEOTIDES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance must have at least one target")]
    NoTargets,
    #[error("target {id}: sequence length {found} differs from L={expected}")]
    BadLength { id: u32, expected: u32, found: u32 },
    #[error("primer length k={k} must satisfy 1 <= k <= L={l}")]
    BadPrimerLength { k: u32, l: u32 },
    #[error("degeneracy bound must be at least 1")]
    BadDegeneracyBound,
    #[error("locus {index} at position {position}: needs {needed} flanking bases on the {side} side, found {found}")]
    LocusOutOfRange {
        index: usize,
        position: u64,
        side: &'static str,
        needed: u64,
        found: u64,
    },
}

/// One amplification locus: its flanking strings and the locus length `x`
/// (1 for SNP genotyping).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPair {
    /// 1-based target index.
    pub id: u32,
    pub forward: Sequence,
    pub reverse: Sequence,
    pub locus_length: u32,
}

impl TargetPair {
    pub fn new(id: u32, forward: Sequence, reverse: Sequence) -> Self {
        TargetPair {
            id,
            forward,
            reverse,
            locus_length: 1,
        }
    }
}

/// Which of the two flanking strings of a target a primer binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strand {
    Forward,
    Reverse,
}

impl Strand {
    pub fn letter(self) -> char {
        match self {
            Strand::Forward => 'F',
            Strand::Reverse => 'R',
        }
    }
}

/// A full problem instance: `n` target pairs sharing the same `L`, a primer
/// length `k`, and a degeneracy bound `delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub targets: Vec<TargetPair>,
    pub k: u32,
    pub delta: u64,
    pub l: u32,
}

impl Instance {
    pub fn new(targets: Vec<TargetPair>, k: u32, delta: u64, l: u32) -> Result<Self, InstanceError> {
        let inst = Instance { targets, k, delta, l };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.targets.is_empty() {
            return Err(InstanceError::NoTargets);
        }
        if self.k < 1 || self.k > self.l {
            return Err(InstanceError::BadPrimerLength { k: self.k, l: self.l });
        }
        if self.delta < 1 {
            return Err(InstanceError::BadDegeneracyBound);
        }
        for t in &self.targets {
            for seq in [&t.forward, &t.reverse] {
                if seq.len() as u32 != self.l {
                    return Err(InstanceError::BadLength {
                        id: t.id,
                        expected: self.l,
                        found: seq.len() as u32,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.targets.len()
    }

    pub fn strand(&self, target: usize, strand: Strand) -> &Sequence {
        match strand {
            Strand::Forward => &self.targets[target].forward,
            Strand::Reverse => &self.targets[target].reverse,
        }
    }
}

fn random_sequence<R: Rng>(rng: &mut R, len: u32) -> Sequence {
    Sequence::new(
        (0..len)
            .map(|_| NUCLEOTIDES[rng.gen_range(0..4)])
            .collect(),
    )
}

/// Generates `n` target pairs of i.i.d. uniform bases using ChaCha8 seeded
/// with `seed`. Generation order is target 1 forward, target 1 reverse,
/// target 2 forward, ... so identical parameters reproduce identical
/// instances on any platform.
pub fn generate_random_instance(n: u32, l: u32, k: u32, seed: u64) -> Result<Instance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = (1..=n)
        .map(|id| {
            let forward = random_sequence(&mut rng, l);
            let reverse = random_sequence(&mut rng, l);
            TargetPair::new(id, forward, reverse)
        })
        .collect();
    Instance::new(targets, k, 1, l)
}

/// A locus inside a genome: 1-based start position and length in bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Locus {
    pub position: u64,
    pub length: u32,
}

/// Cuts `(forward, reverse)` flank pairs of length `l` around each locus of a
/// genome. The forward flank is the `l` bases before the locus as written;
/// the reverse flank is the `l` bases after the locus, reverse-complemented,
/// so both read toward the locus. Loci may overlap; each yields an
/// independent target.
pub fn extract_from_genome(
    genome: &Sequence,
    loci: &[Locus],
    l: u32,
    k: u32,
    delta: u64,
) -> Result<Instance, InstanceError> {
    let glen = genome.len() as u64;
    let mut targets = Vec::with_capacity(loci.len());
    for (idx, locus) in loci.iter().enumerate() {
        let left_available = locus.position.saturating_sub(1);
        if left_available < l as u64 {
            return Err(InstanceError::LocusOutOfRange {
                index: idx + 1,
                position: locus.position,
                side: "left",
                needed: l as u64,
                found: left_available,
            });
        }
        let locus_end = locus.position + locus.length as u64 - 1;
        let right_available = glen.saturating_sub(locus_end);
        if locus_end > glen || right_available < l as u64 {
            return Err(InstanceError::LocusOutOfRange {
                index: idx + 1,
                position: locus.position,
                side: "right",
                needed: l as u64,
                found: right_available.min(glen),
            });
        }
        let start = (locus.position - 1 - l as u64) as usize;
        let forward = Sequence::new(genome.bases()[start..start + l as usize].to_vec());
        let rstart = locus_end as usize;
        let after = Sequence::new(genome.bases()[rstart..rstart + l as usize].to_vec());
        let mut t = TargetPair::new(idx as u32 + 1, forward, after.reverse_complement());
        t.locus_length = locus.length;
        targets.push(t);
    }
    Instance::new(targets, k, delta, l)
}

/// Product length for a witness pair binding at `t` and `t_prime` on a target
/// with locus length `x`.
pub fn amplicon_length(l: u32, x: u32, t: u32, t_prime: u32) -> i64 {
    (2 * l as i64 + x as i64) - (t as i64 + t_prime as i64)
}

#[allow(unused)]
fn nucleotide_counts(seq: &Sequence) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for &b in seq.bases() {
        counts[b as usize] += 1;
    }
    counts
}
