//! DNA alphabet, sequences, and (possibly degenerate) primers.
//!
//! Sequences are strings over `{a,c,g,t}`; a degenerate primer is a string of
//! non-empty nucleotide subsets and stands for the mixture of all its
//! expansions. Hybridization is antiparallel: a primer binds a window whose
//! bases are Watson-Crick complements of the primer read back to front, so a
//! degeneracy-1 primer binds exactly the windows equal to its reverse
//! complement.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    /// Character outside `{a,c,g,t}` (position is 1-based).
    #[error("invalid nucleotide {found:?} at position {position}")]
    InvalidNucleotide { position: usize, found: char },
    /// Character that is not an IUPAC nucleotide code (position is 1-based).
    #[error("invalid IUPAC code {found:?} at position {position}")]
    InvalidIupac { position: usize, found: char },
    #[error("empty sequence")]
    Empty,
}

/// One of the four DNA bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Nucleotide {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

pub const NUCLEOTIDES: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

impl Nucleotide {
    /// Watson-Crick complement: a↔t, c↔g. Involution.
    pub fn complement(self) -> Self {
        match self {
            Nucleotide::A => Nucleotide::T,
            Nucleotide::C => Nucleotide::G,
            Nucleotide::G => Nucleotide::C,
            Nucleotide::T => Nucleotide::A,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'a' => Some(Nucleotide::A),
            'c' => Some(Nucleotide::C),
            'g' => Some(Nucleotide::G),
            't' => Some(Nucleotide::T),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Nucleotide::A => 'a',
            Nucleotide::C => 'c',
            Nucleotide::G => 'g',
            Nucleotide::T => 't',
        }
    }
}

/// A plain DNA string over `{a,c,g,t}`. Parsing is case-insensitive and
/// normalizes to lowercase; anything else is rejected with its 1-based
/// position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence(Vec<Nucleotide>);

impl Sequence {
    pub fn new(bases: Vec<Nucleotide>) -> Self {
        Sequence(bases)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bases(&self) -> &[Nucleotide] {
        &self.0
    }

    /// Reverse of the per-base complement. Involution.
    pub fn reverse_complement(&self) -> Sequence {
        Sequence(self.0.iter().rev().map(|b| b.complement()).collect())
    }

    /// The window of length `k` starting at 1-based position `t`.
    pub fn window(&self, t: u32, k: u32) -> &[Nucleotide] {
        let start = (t - 1) as usize;
        &self.0[start..start + k as usize]
    }
}

impl FromStr for Sequence {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, SeqError> {
        let mut bases = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match Nucleotide::from_char(c) {
                Some(b) => bases.push(b),
                None => {
                    return Err(SeqError::InvalidNucleotide {
                        position: i + 1,
                        found: c,
                    })
                }
            }
        }
        Ok(Sequence(bases))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", b.to_char())?;
        }
        Ok(())
    }
}

/// Reverse complement of a text sequence; rejects non-`acgt` characters with
/// the offending 1-based position.
pub fn reverse_complement_text(s: &str) -> Result<String, SeqError> {
    if s.is_empty() {
        return Err(SeqError::Empty);
    }
    Ok(s.parse::<Sequence>()?.reverse_complement().to_string())
}

/// A non-empty subset of the four bases, stored as a 4-bit mask.
///
/// Ordering follows the lowercase IUPAC code character, so sorting primers
/// sorts their text renderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DegenerateNucleotide(u8);

const IUPAC: [(char, u8); 15] = [
    ('a', 0b0001),
    ('c', 0b0010),
    ('g', 0b0100),
    ('t', 0b1000),
    ('m', 0b0011),
    ('r', 0b0101),
    ('w', 0b1001),
    ('s', 0b0110),
    ('y', 0b1010),
    ('k', 0b1100),
    ('v', 0b0111),
    ('h', 0b1011),
    ('d', 0b1101),
    ('b', 0b1110),
    ('n', 0b1111),
];

impl DegenerateNucleotide {
    pub fn exact(base: Nucleotide) -> Self {
        DegenerateNucleotide(1 << base as u8)
    }

    /// Builds from any non-empty set of bases.
    pub fn from_bases(bases: &[Nucleotide]) -> Option<Self> {
        let mut mask = 0u8;
        for &b in bases {
            mask |= 1 << b as u8;
        }
        if mask == 0 {
            None
        } else {
            Some(DegenerateNucleotide(mask))
        }
    }

    pub fn from_iupac(c: char) -> Option<Self> {
        let lc = c.to_ascii_lowercase();
        IUPAC
            .iter()
            .find(|(ch, _)| *ch == lc)
            .map(|&(_, m)| DegenerateNucleotide(m))
    }

    pub fn to_iupac(self) -> char {
        IUPAC
            .iter()
            .find(|(_, m)| *m == self.0)
            .map(|&(ch, _)| ch)
            .expect("mask is non-empty")
    }

    pub fn contains(self, base: Nucleotide) -> bool {
        self.0 & (1 << base as u8) != 0
    }

    /// Number of bases in the set, 1..=4.
    pub fn size(self) -> u32 {
        self.0.count_ones()
    }

    /// The set of complements of the members.
    pub fn complement(self) -> Self {
        let m = self.0;
        let a = m & 0b0001;
        let c = (m & 0b0010) >> 1;
        let g = (m & 0b0100) >> 2;
        let t = (m & 0b1000) >> 3;
        DegenerateNucleotide(t | (g << 1) | (c << 2) | (a << 3))
    }

    pub fn bases(self) -> impl Iterator<Item = Nucleotide> {
        NUCLEOTIDES.into_iter().filter(move |&b| self.contains(b))
    }
}

impl PartialOrd for DegenerateNucleotide {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DegenerateNucleotide {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_iupac().cmp(&other.to_iupac())
    }
}

/// A primer of length `k`: a string of degenerate nucleotides. Degeneracy-1
/// primers round-trip to plain `acgt` strings; degenerate positions render as
/// IUPAC codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Primer(Vec<DegenerateNucleotide>);

impl Primer {
    pub fn new(positions: Vec<DegenerateNucleotide>) -> Result<Self, SeqError> {
        if positions.is_empty() {
            return Err(SeqError::Empty);
        }
        Ok(Primer(positions))
    }

    pub fn from_sequence(s: &Sequence) -> Result<Self, SeqError> {
        Primer::new(s.bases().iter().map(|&b| DegenerateNucleotide::exact(b)).collect())
    }

    pub fn len(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn positions(&self) -> &[DegenerateNucleotide] {
        &self.0
    }

    /// Number of non-degenerate primers this primer represents: the product
    /// of the per-position set sizes. Saturates at `u128::MAX`.
    pub fn degeneracy(&self) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.size() as u128))
    }

    pub fn is_degenerate(&self) -> bool {
        self.0.iter().any(|d| d.size() > 1)
    }

    /// The unique expansion of a degeneracy-1 primer.
    pub fn as_sequence(&self) -> Option<Sequence> {
        if self.is_degenerate() {
            return None;
        }
        Some(Sequence(
            self.0.iter().map(|d| d.bases().next().unwrap()).collect(),
        ))
    }

    /// True iff the window (same length as the primer) can be bound: each
    /// window base must be the complement of some member of the primer
    /// position aligned antiparallel to it.
    ///
    /// This predicate is the single seam for the hybridization model; the
    /// rest of the crate never inspects windows directly.
    pub fn matches_window(&self, window: &[Nucleotide]) -> bool {
        debug_assert_eq!(window.len(), self.0.len());
        let k = self.0.len();
        window
            .iter()
            .enumerate()
            .all(|(j, &s)| self.0[k - 1 - j].contains(s.complement()))
    }
}

impl FromStr for Primer {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, SeqError> {
        if s.is_empty() {
            return Err(SeqError::Empty);
        }
        let mut positions = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match DegenerateNucleotide::from_iupac(c) {
                Some(d) => positions.push(d),
                None => {
                    return Err(SeqError::InvalidIupac {
                        position: i + 1,
                        found: c,
                    })
                }
            }
        }
        Ok(Primer(positions))
    }
}

impl fmt::Display for Primer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{}", d.to_iupac())?;
        }
        Ok(())
    }
}
