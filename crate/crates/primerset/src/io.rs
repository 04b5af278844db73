//! File formats: the line-oriented instance format, single-record FASTA,
//! loci lists, and colored-graph dumps.
//!
//! Instance format (UTF-8, LF, lowercase sequences):
//!
//! ```text
//! MPSSL 1 n=<n> L=<L> k=<k> delta=<d>
//! <id>\t<forward>\t<reverse>[\t<locus-length>]
//! ```
//!
//! Record ids are the 1-based target indices in order. The optional fourth
//! column is the locus length and is written only when it differs from 1, so
//! writing then parsing reproduces the instance byte for byte.
//!
//! Colored-graph format (0-based vertex and edge ids):
//!
//! ```text
//! MCSG 1 n=<vertices> e=<edges> m=<classes>
//! e <u> <v>
//! c <edge-id> <edge-id> ...
//! ```
//!
//! Edge lines come first and are numbered by file order; class lines follow,
//! one per color. Blank lines and `#` comments are skipped. Writers emit
//! edges sorted with `u <= v`; parsers accept any order and normalize, so a
//! written graph round-trips byte for byte while hand-written dumps may be
//! reordered on the first pass.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instance::{Instance, InstanceError, Locus, TargetPair};
use crate::mcs::{ColoredGraph, McsError};
use crate::seq::{SeqError, Sequence};

pub const FORMAT_NAME: &str = "MPSSL";
pub const GRAPH_FORMAT_NAME: &str = "MCSG";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line 1: expected header `MPSSL 1 n=<n> L=<L> k=<k> delta=<d>`, found {found:?}")]
    BadHeader { found: String },
    #[error("line 1: unsupported format version {found} (supported: {FORMAT_VERSION})")]
    Version { found: String },
    #[error("expected {expected} records, found {found}")]
    RecordCount { expected: usize, found: usize },
    #[error("line {line}: expected {expected} tab-separated fields, found {found}")]
    FieldCount {
        line: usize,
        expected: &'static str,
        found: usize,
    },
    #[error("line {line}: record id {found} out of order (expected {expected})")]
    RecordId {
        line: usize,
        expected: u32,
        found: String,
    },
    #[error("line {line}, field {field}: sequence length {found}, expected L={expected}")]
    SequenceLength {
        line: usize,
        field: &'static str,
        expected: u32,
        found: usize,
    },
    #[error("line {line}, field {field}, char {position}: invalid nucleotide {found:?}")]
    Character {
        line: usize,
        field: &'static str,
        position: usize,
        found: char,
    },
    #[error("line {line}: invalid locus length {found:?}")]
    LocusLength { line: usize, found: String },
    #[error("invalid instance")]
    Invalid(#[source] InstanceError),
    #[error("FASTA: no sequence data")]
    FastaEmpty,
    #[error("FASTA: multiple records (second header at line {line}); only single-record genomes are supported")]
    FastaMultiRecord { line: usize },
    #[error("FASTA line {line}, char {position}: invalid nucleotide {found:?}")]
    FastaCharacter {
        line: usize,
        position: usize,
        found: char,
    },
    #[error("loci line {line}: expected `<position>[\\t<length>]`, found {found:?}")]
    BadLocus { line: usize, found: String },
    #[error("line 1: expected header `MCSG 1 n=<vertices> e=<edges> m=<classes>`, found {found:?}")]
    BadGraphHeader { found: String },
    #[error("graph line {line}: expected `e <u> <v>` or `c <edge-id> ...`, found {found:?}")]
    GraphLine { line: usize, found: String },
    #[error("expected {expected} graph {kind} lines, found {found}")]
    GraphCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("graph line {line}: edge id {found} out of range ({n_edges} edges declared so far)")]
    GraphEdgeId {
        line: usize,
        found: u32,
        n_edges: usize,
    },
    #[error("graph edge {id} belongs to no class")]
    GraphUnusedEdge { id: u32 },
    #[error("invalid colored graph")]
    InvalidGraph(#[source] McsError),
}

fn parse_header(line: &str) -> Result<(usize, u32, u32, u64), FormatError> {
    let bad = || FormatError::BadHeader {
        found: line.to_string(),
    };
    let mut parts = line.split(' ');
    if parts.next() != Some(FORMAT_NAME) {
        return Err(bad());
    }
    let version = parts.next().ok_or_else(bad)?;
    if version != FORMAT_VERSION.to_string() {
        return Err(FormatError::Version {
            found: version.to_string(),
        });
    }
    let mut n = None;
    let mut l = None;
    let mut k = None;
    let mut delta = None;
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(bad)?;
        match key {
            "n" => n = value.parse::<usize>().ok(),
            "L" => l = value.parse::<u32>().ok(),
            "k" => k = value.parse::<u32>().ok(),
            "delta" => delta = value.parse::<u64>().ok(),
            _ => return Err(bad()),
        }
    }
    match (n, l, k, delta) {
        (Some(n), Some(l), Some(k), Some(d)) => Ok((n, l, k, d)),
        _ => Err(bad()),
    }
}

fn parse_sequence(
    text: &str,
    line: usize,
    field: &'static str,
    expected: u32,
) -> Result<Sequence, FormatError> {
    let seq: Sequence = text.parse().map_err(|e| match e {
        SeqError::InvalidNucleotide { position, found } => FormatError::Character {
            line,
            field,
            position,
            found,
        },
        _ => FormatError::Character {
            line,
            field,
            position: 1,
            found: '?',
        },
    })?;
    if seq.len() != expected as usize {
        return Err(FormatError::SequenceLength {
            line,
            field,
            expected,
            found: seq.len(),
        });
    }
    Ok(seq)
}

/// Parses the instance format, enforcing every instance invariant; errors
/// carry 1-based line numbers.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let (n, l, k, delta) = parse_header(header)?;

    let mut targets = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() && targets.len() == n {
            continue; // trailing blank line
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(FormatError::FieldCount {
                line: line_no,
                expected: "3 or 4",
                found: fields.len(),
            });
        }
        let expected_id = targets.len() as u32 + 1;
        if fields[0].parse::<u32>() != Ok(expected_id) {
            return Err(FormatError::RecordId {
                line: line_no,
                expected: expected_id,
                found: fields[0].to_string(),
            });
        }
        let forward = parse_sequence(fields[1], line_no, "forward", l)?;
        let reverse = parse_sequence(fields[2], line_no, "reverse", l)?;
        let mut target = TargetPair::new(expected_id, forward, reverse);
        if let Some(x) = fields.get(3) {
            target.locus_length = x.parse::<u32>().map_err(|_| FormatError::LocusLength {
                line: line_no,
                found: x.to_string(),
            })?;
        }
        targets.push(target);
    }
    if targets.len() != n {
        return Err(FormatError::RecordCount {
            expected: n,
            found: targets.len(),
        });
    }
    Instance::new(targets, k, delta, l).map_err(FormatError::Invalid)
}

/// Serializes an instance; `parse_instance(write_instance(x)) == x`.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{FORMAT_NAME} {FORMAT_VERSION} n={} L={} k={} delta={}",
        instance.n(),
        instance.l,
        instance.k,
        instance.delta
    )
    .unwrap();
    for t in &instance.targets {
        if t.locus_length == 1 {
            writeln!(out, "{}\t{}\t{}", t.id, t.forward, t.reverse).unwrap();
        } else {
            writeln!(out, "{}\t{}\t{}\t{}", t.id, t.forward, t.reverse, t.locus_length).unwrap();
        }
    }
    out
}

/// SHA-256 of the canonical serialization, for report provenance.
pub fn instance_sha256(instance: &Instance) -> String {
    let bytes = write_instance(instance);
    let digest = Sha256::digest(bytes.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

/// Reads a single-record FASTA: one optional `>` header, sequence lines
/// concatenated with whitespace stripped. A second header is an error.
pub fn parse_fasta(text: &str) -> Result<Sequence, FormatError> {
    let mut bases = Vec::new();
    let mut seen_header = false;
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('>') {
            if seen_header || seen_data {
                return Err(FormatError::FastaMultiRecord { line: line_no });
            }
            seen_header = true;
            continue;
        }
        seen_data = true;
        for (j, c) in trimmed.chars().enumerate() {
            if c.is_whitespace() {
                continue;
            }
            match crate::seq::Nucleotide::from_char(c) {
                Some(b) => bases.push(b),
                None => {
                    return Err(FormatError::FastaCharacter {
                        line: line_no,
                        position: j + 1,
                        found: c,
                    })
                }
            }
        }
    }
    if bases.is_empty() {
        return Err(FormatError::FastaEmpty);
    }
    Ok(Sequence::new(bases))
}

/// Parses a loci list: one locus per line as `<position>[\t<length>]`,
/// 1-based positions, `#` comments and blank lines skipped. Length defaults
/// to 1.
pub fn parse_loci(text: &str) -> Result<Vec<Locus>, FormatError> {
    let mut loci = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = || FormatError::BadLocus {
            line: line_no,
            found: line.to_string(),
        };
        let mut parts = trimmed.split_whitespace();
        let position = parts
            .next()
            .and_then(|p| p.parse::<u64>().ok())
            .filter(|&p| p >= 1)
            .ok_or_else(bad)?;
        let length = match parts.next() {
            Some(p) => p.parse::<u32>().ok().filter(|&x| x >= 1).ok_or_else(bad)?,
            None => 1,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        loci.push(Locus { position, length });
    }
    Ok(loci)
}

/// Serializes a colored graph in canonical order;
/// `parse_graph(write_graph(g)) == g`.
pub fn write_graph(graph: &ColoredGraph) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{GRAPH_FORMAT_NAME} {FORMAT_VERSION} n={} e={} m={}",
        graph.n_vertices(),
        graph.n_edges(),
        graph.n_classes()
    )
    .unwrap();
    for e in graph.edges() {
        writeln!(out, "e {} {}", e.u, e.v).unwrap();
    }
    for i in 0..graph.n_classes() {
        out.push('c');
        for &id in graph.class(i) {
            write!(out, " {id}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_graph_header(line: &str) -> Result<(u32, usize, usize), FormatError> {
    let bad = || FormatError::BadGraphHeader {
        found: line.to_string(),
    };
    let mut parts = line.split(' ');
    if parts.next() != Some(GRAPH_FORMAT_NAME) {
        return Err(bad());
    }
    let version = parts.next().ok_or_else(bad)?;
    if version != FORMAT_VERSION.to_string() {
        return Err(FormatError::Version {
            found: version.to_string(),
        });
    }
    let mut n = None;
    let mut e = None;
    let mut m = None;
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(bad)?;
        match key {
            "n" => n = value.parse::<u32>().ok(),
            "e" => e = value.parse::<usize>().ok(),
            "m" => m = value.parse::<usize>().ok(),
            _ => return Err(bad()),
        }
    }
    match (n, e, m) {
        (Some(n), Some(e), Some(m)) => Ok((n, e, m)),
        _ => Err(bad()),
    }
}

/// Parses the colored-graph format. Every declared edge must be referenced
/// by at least one class; errors carry 1-based line numbers.
pub fn parse_graph(text: &str) -> Result<ColoredGraph, FormatError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let (n, n_edges, n_classes) = parse_graph_header(header)?;

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(n_edges);
    let mut used = vec![false; n_edges];
    let mut classes: Vec<Vec<(u32, u32)>> = Vec::with_capacity(n_classes);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = || FormatError::GraphLine {
            line: line_no,
            found: line.to_string(),
        };
        let mut parts = trimmed.split_whitespace();
        match parts.next() {
            Some("e") if classes.is_empty() => {
                let u = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                let v = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                edges.push((u, v));
                if used.len() < edges.len() {
                    used.push(false);
                }
            }
            Some("c") => {
                let mut pairs = Vec::new();
                for p in parts {
                    let id: u32 = p.parse().map_err(|_| bad())?;
                    let pair =
                        *edges
                            .get(id as usize)
                            .ok_or(FormatError::GraphEdgeId {
                                line: line_no,
                                found: id,
                                n_edges: edges.len(),
                            })?;
                    used[id as usize] = true;
                    pairs.push(pair);
                }
                classes.push(pairs);
            }
            _ => return Err(bad()),
        }
    }
    if edges.len() != n_edges {
        return Err(FormatError::GraphCount {
            kind: "edge",
            expected: n_edges,
            found: edges.len(),
        });
    }
    if classes.len() != n_classes {
        return Err(FormatError::GraphCount {
            kind: "class",
            expected: n_classes,
            found: classes.len(),
        });
    }
    if let Some(id) = used.iter().position(|&u| !u) {
        return Err(FormatError::GraphUnusedEdge { id: id as u32 });
    }
    ColoredGraph::new(n, classes).map_err(FormatError::InvalidGraph)
}
