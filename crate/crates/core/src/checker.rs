//! The oracle-driven checker.
//!
//! No search happens here. Each pruning step takes the oracle's word for which
//! networks to remove and verifies three obligations:
//!
//! 1. every subsumption claimed by the level is valid;
//! 2. the subsumed networks arrive in canonical order, so that they can all
//!    be removed in a single merge pass;
//! 3. every subsumer is still present after the removal.
//!
//! In strict mode a failed obligation aborts the run. In lenient mode the step
//! keeps its whole generated layer instead, which is always sound.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bst::SearchTree;
use crate::generate::{ogenerate, Layer};
use crate::network::{Network, NetworkError, MAX_CHANNELS};
use crate::oracle::OracleLevel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    /// A sorting network of `size` comparators exists and none smaller does.
    Yes { channels: usize, size: usize },
    /// `layer` is complete for size `size` and holds no sorting network.
    No {
        channels: usize,
        size: usize,
        layer: Layer,
    },
    /// The oracle ran out before a decision was reached.
    Maybe,
}

impl Answer {
    pub fn size(&self) -> Option<usize> {
        match self {
            Answer::Yes { size, .. } | Answer::No { size, .. } => Some(*size),
            Answer::Maybe => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Yes { channels, size } => write!(f, "ANSWER yes n={channels} k={size}"),
            Answer::No { channels, size, .. } => write!(f, "ANSWER no n={channels} k={size}"),
            Answer::Maybe => f.write_str("ANSWER maybe"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Obligation {
    ValidSubsumptions = 1,
    OrderedRemoval = 2,
    SubsumersKept = 3,
}

impl Obligation {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self {
            Obligation::ValidSubsumptions => "all subsumptions are valid",
            Obligation::OrderedRemoval => "subsumed networks are in canonical order",
            Obligation::SubsumersKept => "all subsumers are kept",
        };
        write!(f, "obligation {} ({what})", self.number())
    }
}

/// Why a level was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleFault {
    pub obligation: Obligation,
    /// Index of the offending triple, when one triple is to blame.
    pub triple: Option<usize>,
    pub detail: String,
}

impl fmt::Display for OracleFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed", self.obligation)?;
        if let Some(t) = self.triple {
            write!(f, " at triple {t}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("oracle level k={level}: {fault}")]
    Oracle { level: usize, fault: OracleFault },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl CheckError {
    pub fn obligation(&self) -> Option<Obligation> {
        match self {
            CheckError::Oracle { fault, .. } => Some(fault.obligation),
            CheckError::Network(_) => None,
        }
    }
}

fn triple_fault(index: usize, detail: String) -> OracleFault {
    OracleFault {
        obligation: Obligation::ValidSubsumptions,
        triple: Some(index),
        detail,
    }
}

/// Validates every triple of `level` against `channels` channels and collects
/// the subsumers, without duplicates, in a search tree.
pub fn oracle_ok_1(
    channels: usize,
    level: &OracleLevel,
) -> Result<SearchTree<Network>, OracleFault> {
    let bad = level
        .triples
        .par_iter()
        .enumerate()
        .find_map_first(|(idx, t)| {
            let shape_ok = [&t.subsumer, &t.subsumed]
                .iter()
                .all(|c| c.channels() == channels && c.size() == level.size);
            if !shape_ok {
                return Some(triple_fault(
                    idx,
                    format!(
                        "networks {} / {} are not of size {} on {channels} channels",
                        t.subsumer, t.subsumed, level.size
                    ),
                ));
            }
            if t.perm.len() != channels {
                return Some(triple_fault(
                    idx,
                    format!("permutation {} does not act on {channels} channels", t.perm),
                ));
            }
            if !t.holds() {
                return Some(triple_fault(
                    idx,
                    format!(
                        "{} does not subsume {} by {}",
                        t.subsumer, t.subsumed, t.perm
                    ),
                ));
            }
            None
        });
    if let Some(fault) = bad {
        return Err(fault);
    }
    // adding a present value is a no-op, so runs of one subsumer need one add
    let mut tree = SearchTree::new();
    let mut last: Option<&Network> = None;
    for t in &level.triples {
        if last != Some(&t.subsumer) {
            tree = tree.add(t.subsumer.clone());
            last = Some(&t.subsumer);
        }
    }
    Ok(tree)
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum RemoveAllError {
    #[error("removal list is not strictly increasing at position {0}")]
    UnsortedRemovals(usize),
    #[error("network list is not strictly increasing at position {0}")]
    UnsortedNetworks(usize),
}

fn first_unsorted<T: Ord>(items: &[T]) -> Option<usize> {
    items.windows(2).position(|w| w[0] >= w[1]).map(|p| p + 1)
}

/// `from` without the elements of `removed`, by one merge of two strictly
/// increasing sequences. Removals absent from `from` are skipped.
pub fn remove_all<T: Ord + Clone>(removed: &[T], from: &[T]) -> Result<Vec<T>, RemoveAllError> {
    remove_all_counted(removed, from).map(|(kept, _)| kept)
}

/// [`remove_all`], also returning the number of element comparisons made by
/// the merge, which never exceeds `removed.len() + from.len()`.
pub fn remove_all_counted<T: Ord + Clone>(
    removed: &[T],
    from: &[T],
) -> Result<(Vec<T>, usize), RemoveAllError> {
    if let Some(p) = first_unsorted(removed) {
        return Err(RemoveAllError::UnsortedRemovals(p));
    }
    if let Some(p) = first_unsorted(from) {
        return Err(RemoveAllError::UnsortedNetworks(p));
    }
    let mut kept = Vec::with_capacity(from.len().saturating_sub(removed.len()));
    let mut comparisons = 0;
    let mut r = 0;
    let mut i = 0;
    while i < from.len() {
        if r == removed.len() {
            kept.extend_from_slice(&from[i..]);
            break;
        }
        comparisons += 1;
        match removed[r].cmp(&from[i]) {
            Ordering::Less => r += 1,
            Ordering::Equal => {
                r += 1;
                i += 1;
            }
            Ordering::Greater => {
                kept.push(from[i].clone());
                i += 1;
            }
        }
    }
    Ok((kept, comparisons))
}

/// Are all values of `subsumers` in the strictly increasing list `kept`?
///
/// Walks `kept` once while repeatedly splitting off the tree's minimum: a
/// match consumes both, a mismatch only the list head.
pub fn oracle_ok_2(subsumers: &SearchTree<Network>, kept: &[Network]) -> bool {
    let mut tree = subsumers.clone();
    let mut rest = kept;
    let mut pending: Option<(Network, SearchTree<Network>)> = None;
    loop {
        if tree.is_empty() {
            return true;
        }
        let Some((head, tail)) = rest.split_first() else {
            return false;
        };
        let (min, without_min) = pending.get_or_insert_with(|| {
            let default = Network::empty(head.channels()).expect("valid channel count");
            tree.split_min(default)
        });
        if *min == *head {
            tree = std::mem::take(without_min);
            pending = None;
        }
        rest = tail;
    }
}

/// Verifies one oracle level against the generated layer and returns the
/// pruned layer.
pub fn check_level(level: &OracleLevel, generated: &Layer) -> Result<Layer, OracleFault> {
    let subsumers = oracle_ok_1(generated.channels(), level)?;
    let removed: Vec<Network> = level.triples.iter().map(|t| t.subsumed.clone()).collect();
    let kept = remove_all(&removed, generated.networks()).map_err(|e| OracleFault {
        obligation: Obligation::OrderedRemoval,
        triple: match e {
            RemoveAllError::UnsortedRemovals(p) => Some(p),
            RemoveAllError::UnsortedNetworks(_) => None,
        },
        detail: e.to_string(),
    })?;
    if !oracle_ok_2(&subsumers, &kept) {
        let missing = subsumers
            .iter()
            .find(|c| kept.binary_search(c).is_err())
            .map_or_else(String::new, |c| format!("subsumer {c} "));
        return Err(OracleFault {
            obligation: Obligation::SubsumersKept,
            triple: None,
            detail: format!("{missing}is not in the pruned layer"),
        });
    }
    Ok(Layer::new(generated.channels(), generated.size(), kept).expect("subsequence of a layer"))
}

/// One pruning step in the given mode. Lenient mode answers a rejected level
/// with the unpruned layer.
pub fn prune_checked(
    level: &OracleLevel,
    generated: Layer,
    mode: Mode,
) -> Result<Layer, CheckError> {
    match check_level(level, &generated) {
        Ok(kept) => Ok(kept),
        Err(_) if mode == Mode::Lenient => Ok(generated),
        Err(fault) => Err(CheckError::Oracle {
            level: level.size,
            fault,
        }),
    }
}

/// First sorting network of the layer in canonical order.
pub fn has_sorting_network(layer: &Layer) -> Option<&Network> {
    layer.networks().iter().find(|c| c.is_sorting_network())
}

/// What happened at one step of a checked run.
#[derive(Debug)]
pub struct CheckedLevel<'a> {
    pub size: usize,
    pub generated: usize,
    pub layer: &'a Layer,
    /// Set when lenient mode ignored a rejected level.
    pub fault: Option<&'a OracleFault>,
}

/// Run settings for [`generate_and_prune_checked_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckConfig {
    pub mode: Mode,
    /// Give up with `maybe` once a generated layer exceeds this many
    /// networks. Lenient runs over a damaged oracle can grow without bound.
    pub max_layer: Option<usize>,
}

impl From<Mode> for CheckConfig {
    fn from(mode: Mode) -> Self {
        CheckConfig {
            mode,
            max_layer: None,
        }
    }
}

pub fn generate_and_prune_checked(
    channels: usize,
    max_size: usize,
    oracle: &[OracleLevel],
    mode: Mode,
) -> Result<Answer, CheckError> {
    generate_and_prune_checked_with(channels, max_size, oracle, mode.into(), |_| {})
}

/// Generate-and-prune driven by `oracle`, one level per step, looked up by
/// network size. Stops with `yes` at the first step whose pruned layer holds
/// a sorting network, `maybe` when the level for the next step is missing, and
/// `no` after `max_size` steps.
pub fn generate_and_prune_checked_with<F>(
    channels: usize,
    max_size: usize,
    oracle: &[OracleLevel],
    config: CheckConfig,
    mut on_level: F,
) -> Result<Answer, CheckError>
where
    F: FnMut(&CheckedLevel<'_>),
{
    if channels > MAX_CHANNELS {
        return Err(NetworkError::Capacity { channels }.into());
    }
    if channels < 2 {
        return Ok(Answer::Yes { channels, size: 0 });
    }
    let mut layer = Layer::initial(channels)?;
    for size in 1..=max_size {
        let Some(level) = oracle.iter().find(|l| l.size == size) else {
            return Ok(Answer::Maybe);
        };
        let generated = ogenerate(&layer);
        if config
            .max_layer
            .is_some_and(|limit| generated.len() > limit)
        {
            return Ok(Answer::Maybe);
        }
        let generated_len = generated.len();
        let (pruned, fault) = match check_level(level, &generated) {
            Ok(kept) => (kept, None),
            Err(fault) if config.mode == Mode::Lenient => (generated, Some(fault)),
            Err(fault) => return Err(CheckError::Oracle { level: size, fault }),
        };
        on_level(&CheckedLevel {
            size,
            generated: generated_len,
            layer: &pruned,
            fault: fault.as_ref(),
        });
        layer = pruned;
        if has_sorting_network(&layer).is_some() {
            return Ok(Answer::Yes { channels, size });
        }
    }
    Ok(Answer::No {
        channels,
        size: max_size,
        layer,
    })
}
