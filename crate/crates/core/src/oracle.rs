//! Oracle files and the untrusted preprocessor.
//!
//! An oracle lists, per pruning step, the subsumptions that justify removing
//! networks. The preprocessor rewrites a raw oracle so the checker can consume
//! it in one pass: triples are sorted by subsumed network and chains
//! `A ⪯ B ⪯ C` are collapsed so that every subsumer survives pruning.
//!
//! File grammar (UTF-8, one record per line, `#` lines ignored):
//!
//! ```text
//! ORACLE v1 n=<channels> kind=<raw|reduced>
//! LEVEL k=<size> count=<m>
//! <subsumer codes> ; <subsumed codes> ; <perm images>     (m lines)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::ops::Deref;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::network::{parse_natural, Network, Permutation, MAX_CHANNELS};
use crate::search::SubsumptionWitness;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("level k={level}: network {network} is removed by more than one triple")]
    DuplicateRemoval { level: usize, network: String },
    #[error("level k={level}: subsumption cycle through network {network}")]
    Cycle { level: usize, network: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// The subsumptions of one pruning step; all networks have `size` comparators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleLevel {
    pub size: usize,
    pub triples: Vec<SubsumptionWitness>,
}

impl OracleLevel {
    pub fn new(size: usize, triples: Vec<SubsumptionWitness>) -> Self {
        OracleLevel { size, triples }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// A level in checker order: subsumed networks strictly increasing and no
/// subsumer removed in the same level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedOracleLevel(OracleLevel);

impl ReducedOracleLevel {
    /// Accepts `level` only if it already satisfies the reduced-level
    /// invariants.
    pub fn try_from_level(level: OracleLevel) -> Result<Self, OracleLevel> {
        let sorted = level
            .triples
            .windows(2)
            .all(|w| w[0].subsumed < w[1].subsumed);
        let mut subsumed: Vec<&Network> = level.triples.iter().map(|t| &t.subsumed).collect();
        subsumed.sort();
        let chain_free = level
            .triples
            .iter()
            .all(|t| subsumed.binary_search(&&t.subsumer).is_err());
        if sorted && chain_free {
            Ok(ReducedOracleLevel(level))
        } else {
            Err(level)
        }
    }

    pub fn into_level(self) -> OracleLevel {
        self.0
    }
}

impl Deref for ReducedOracleLevel {
    type Target = OracleLevel;

    fn deref(&self) -> &OracleLevel {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Raw,
    Reduced,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Raw => "raw",
            OracleKind::Reduced => "reduced",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleHeader {
    pub channels: usize,
    pub kind: OracleKind,
}

/// Contents of an oracle file. A file without any records has no header.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleFile {
    pub header: Option<OracleHeader>,
    pub levels: Vec<OracleLevel>,
}

impl OracleFile {
    pub fn new(channels: usize, kind: OracleKind, levels: Vec<OracleLevel>) -> Self {
        OracleFile {
            header: Some(OracleHeader { channels, kind }),
            levels,
        }
    }

    pub fn channels(&self) -> Option<usize> {
        self.header.map(|h| h.channels)
    }

    pub fn parse(text: &str) -> Result<Self, OracleError> {
        Parser::default().parse(text)
    }

    pub fn write_to<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        let Some(header) = self.header else {
            return Ok(());
        };
        writeln!(out, "ORACLE v1 n={} kind={}", header.channels, header.kind)?;
        for level in &self.levels {
            writeln!(out, "LEVEL k={} count={}", level.size, level.triples.len())?;
            for t in &level.triples {
                writeln!(out, "{} ; {} ; {}", t.subsumer, t.subsumed, t.perm)?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("oracle text is ASCII")
    }
}

pub fn read_oracle(path: impl AsRef<Path>) -> Result<OracleFile, OracleError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| OracleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    OracleFile::parse(&text)
}

pub fn write_oracle(file: &OracleFile, path: impl AsRef<Path>) -> Result<(), OracleError> {
    let path = path.as_ref();
    let io_err = |source| OracleError::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = fs::File::create(path).map_err(io_err)?;
    let mut w = io::BufWriter::new(f);
    file.write_to(&mut w).map_err(io_err)?;
    io::Write::flush(&mut w).map_err(io_err)
}

#[derive(Default)]
struct Parser {
    header: Option<OracleHeader>,
    levels: Vec<OracleLevel>,
    // (header line, declared count) of the level being filled
    open: Option<(usize, usize)>,
}

fn field<'a>(token: Option<&'a str>, key: &str) -> Option<&'a str> {
    token?.strip_prefix(key)?.strip_prefix('=')
}

impl Parser {
    fn parse(mut self, text: &str) -> Result<OracleFile, OracleError> {
        for (idx, raw) in text.split_terminator('\n').enumerate() {
            let line = idx + 1;
            if raw.starts_with('#') {
                continue;
            }
            let err = |message: String| OracleError::Syntax { line, message };
            match self.header {
                None => {
                    self.header = Some(parse_header(raw).ok_or_else(|| {
                        err(format!(
                            "expected `ORACLE v1 n=<channels> kind=<raw|reduced>`, found {raw:?}"
                        ))
                    })?)
                }
                Some(header) => {
                    if raw.starts_with("LEVEL") {
                        self.close_level()?;
                        let (size, count) = parse_level(raw).ok_or_else(|| {
                            err(format!(
                                "expected `LEVEL k=<size> count=<m>`, found {raw:?}"
                            ))
                        })?;
                        if self.levels.iter().any(|l| l.size == size) {
                            return Err(err(format!("duplicate level k={size}")));
                        }
                        self.levels.push(OracleLevel::new(
                            size,
                            Vec::with_capacity(count.min(1 << 16)),
                        ));
                        self.open = Some((line, count));
                    } else {
                        let level = match self.levels.last_mut() {
                            Some(level) if self.open.is_some() => level,
                            _ => return Err(err(format!("triple outside of a level: {raw:?}"))),
                        };
                        let triple = parse_triple(raw, header.channels, level.size).map_err(err)?;
                        level.triples.push(triple);
                    }
                }
            }
        }
        self.close_level()?;
        Ok(OracleFile {
            header: self.header,
            levels: self.levels,
        })
    }

    fn close_level(&mut self) -> Result<(), OracleError> {
        if let (Some((line, count)), Some(level)) = (self.open.take(), self.levels.last()) {
            if level.triples.len() != count {
                return Err(OracleError::Syntax {
                    line,
                    message: format!(
                        "level k={} declares {count} triples but has {}",
                        level.size,
                        level.triples.len()
                    ),
                });
            }
        }
        Ok(())
    }
}

fn parse_header(line: &str) -> Option<OracleHeader> {
    let mut tokens = line.split(' ');
    if tokens.next()? != "ORACLE" || tokens.next()? != "v1" {
        return None;
    }
    let channels = parse_natural(field(tokens.next(), "n")?)?;
    let kind = match field(tokens.next(), "kind")? {
        "raw" => OracleKind::Raw,
        "reduced" => OracleKind::Reduced,
        _ => return None,
    };
    if tokens.next().is_some() || channels > MAX_CHANNELS {
        return None;
    }
    Some(OracleHeader { channels, kind })
}

fn parse_level(line: &str) -> Option<(usize, usize)> {
    let mut tokens = line.split(' ');
    if tokens.next()? != "LEVEL" {
        return None;
    }
    let size = parse_natural(field(tokens.next(), "k")?)?;
    let count = parse_natural(field(tokens.next(), "count")?)?;
    if tokens.next().is_some() {
        return None;
    }
    Some((size, count))
}

fn parse_triple(line: &str, channels: usize, size: usize) -> Result<SubsumptionWitness, String> {
    let parts: Vec<&str> = line.split(" ; ").collect();
    let [subsumer, subsumed, perm] = parts[..] else {
        return Err(format!(
            "expected `<subsumer> ; <subsumed> ; <permutation>`, found {line:?}"
        ));
    };
    let network = |text: &str| {
        let c = Network::parse(channels, text).map_err(|e| e.to_string())?;
        if c.size() != size {
            return Err(format!("network {text} does not have size {size}"));
        }
        Ok(c)
    };
    let subsumer = network(subsumer)?;
    let subsumed = network(subsumed)?;
    let perm = Permutation::parse(perm).map_err(|e| e.to_string())?;
    if perm.len() != channels {
        return Err(format!(
            "permutation {perm} does not act on {channels} channels"
        ));
    }
    Ok(SubsumptionWitness::new(subsumer, subsumed, perm))
}

/// Removed networks point at their subsumers; each node has at most one
/// outgoing edge, labelled with the permutation of the triple.
#[derive(Debug, Clone)]
pub struct SubsumptionGraph {
    size: usize,
    nodes: Vec<Network>,
    edges: Vec<Option<(usize, Permutation)>>,
}

impl SubsumptionGraph {
    pub fn nodes(&self) -> &[Network] {
        &self.nodes
    }

    /// `(subsumed, subsumer, label)` for every edge.
    pub fn edges(&self) -> impl Iterator<Item = (&Network, &Network, &Permutation)> {
        self.edges.iter().enumerate().filter_map(|(from, e)| {
            e.as_ref()
                .map(|(to, perm)| (&self.nodes[from], &self.nodes[*to], perm))
        })
    }
}

pub fn build_graph(level: &OracleLevel) -> Result<SubsumptionGraph, OracleError> {
    let mut index: HashMap<&Network, usize> = HashMap::new();
    let mut nodes: Vec<Network> = Vec::new();
    let mut edges: Vec<Option<(usize, Permutation)>> = Vec::new();
    let mut intern = |c| {
        *index.entry(c).or_insert_with(|| {
            nodes.push(Network::clone(c));
            edges.push(None);
            nodes.len() - 1
        })
    };
    let mut labelled = Vec::with_capacity(level.triples.len());
    for t in &level.triples {
        labelled.push((intern(&t.subsumed), intern(&t.subsumer), t));
    }
    for (from, to, t) in labelled {
        if edges[from].is_some() {
            return Err(OracleError::DuplicateRemoval {
                level: level.size,
                network: t.subsumed.to_string(),
            });
        }
        edges[from] = Some((to, t.perm.clone()));
    }

    // colour walk: 1 = on the current path, 2 = known to reach a root
    let mut state = vec![0u8; nodes.len()];
    for start in 0..nodes.len() {
        let mut path = vec![];
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            match &edges[cur] {
                Some((next, _)) => cur = *next,
                None => break,
            }
        }
        if state[cur] == 1 && edges[cur].is_some() {
            return Err(OracleError::Cycle {
                level: level.size,
                network: nodes[cur].to_string(),
            });
        }
        for p in path {
            state[p] = 2;
        }
    }

    Ok(SubsumptionGraph {
        size: level.size,
        nodes,
        edges,
    })
}

/// Collapses every path to its root: each removed node is paired with the
/// root it leads to and the composed permutation.
///
/// Following `X → Y` labelled `π` means `π(outputs(Y)) ⊆ outputs(X)`; if
/// `σ(outputs(X)) ⊆ outputs(start)` then `σ∘π` carries `outputs(Y)` into
/// `outputs(start)`.
pub fn reduce(graph: &SubsumptionGraph) -> ReducedOracleLevel {
    let mut triples = Vec::new();
    for (start, edge) in graph.edges.iter().enumerate() {
        if edge.is_none() {
            continue;
        }
        let mut sigma = Permutation::identity(graph_channels(graph));
        let mut cur = start;
        while let Some((next, pi)) = &graph.edges[cur] {
            sigma = pi.then(&sigma);
            cur = *next;
        }
        triples.push(SubsumptionWitness::new(
            graph.nodes[cur].clone(),
            graph.nodes[start].clone(),
            sigma,
        ));
    }
    triples.sort_by(|a, b| a.subsumed.cmp(&b.subsumed));
    ReducedOracleLevel(OracleLevel::new(graph.size, triples))
}

fn graph_channels(graph: &SubsumptionGraph) -> usize {
    graph.nodes.first().map_or(0, Network::channels)
}

/// Builds and reduces the graph of every level.
pub fn preprocess(raw: &[OracleLevel]) -> Result<Vec<ReducedOracleLevel>, OracleError> {
    raw.iter()
        .map(|level| build_graph(level).map(|g| reduce(&g)))
        .collect()
}
