//! The producer: generate-and-prune with a real subsumption search, logging
//! every removal as a witness for the offline checker.

use rayon::prelude::*;

use crate::checker::{has_sorting_network, Answer};
use crate::generate::{ogenerate, Layer};
use crate::network::{subsumes, Network, NetworkError, OutputProfile, Permutation, MAX_CHANNELS};
use crate::oracle::OracleLevel;

/// `subsumer` subsumes `subsumed` by `perm`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsumptionWitness {
    pub subsumer: Network,
    pub subsumed: Network,
    pub perm: Permutation,
}

impl SubsumptionWitness {
    pub fn new(subsumer: Network, subsumed: Network, perm: Permutation) -> Self {
        SubsumptionWitness {
            subsumer,
            subsumed,
            perm,
        }
    }

    /// Recomputes both output sets and tests the claim.
    pub fn holds(&self) -> bool {
        subsumes(&self.subsumer, &self.subsumed, &self.perm)
    }
}

// Candidates examined per parallel round. Each round tests the whole block
// against the survivors found so far, then resolves the block in order.
const BLOCK: usize = 512;

/// Prunes a layer with a single forward pass in canonical order.
///
/// A candidate is dropped when an earlier survivor subsumes it; the first
/// such survivor (in canonical order) and the least permutation are logged.
/// Survivors are never revisited, so every witness names a kept network.
/// The result does not depend on the thread count.
pub fn prune_search(layer: &Layer) -> (Layer, Vec<SubsumptionWitness>) {
    let nets = layer.networks();
    let profiles: Vec<OutputProfile> = nets.par_iter().map(OutputProfile::new).collect();

    let mut survivors: Vec<usize> = Vec::new();
    let mut removals: Vec<(usize, usize, Permutation)> = Vec::new();

    for start in (0..nets.len()).step_by(BLOCK) {
        let end = (start + BLOCK).min(nets.len());
        let pool = &survivors;
        let found: Vec<Option<(usize, Permutation)>> = (start..end)
            .into_par_iter()
            .map(|c| first_subsumer(&profiles, pool, c))
            .collect();

        let fresh_from = survivors.len();
        for (c, hit) in (start..end).zip(found) {
            let hit = hit.or_else(|| first_subsumer(&profiles, &survivors[fresh_from..], c));
            match hit {
                Some((s, perm)) => removals.push((s, c, perm)),
                None => survivors.push(c),
            }
        }
    }

    let witnesses = removals
        .into_iter()
        .map(|(s, c, perm)| SubsumptionWitness::new(nets[s].clone(), nets[c].clone(), perm))
        .collect();
    let kept = survivors.into_iter().map(|i| nets[i].clone()).collect();
    (
        Layer::from_sorted(layer.channels(), layer.size(), kept),
        witnesses,
    )
}

fn first_subsumer(
    profiles: &[OutputProfile],
    pool: &[usize],
    candidate: usize,
) -> Option<(usize, Permutation)> {
    let target = &profiles[candidate];
    pool.iter()
        .find_map(|&s| profiles[s].find_subsumption(target).map(|perm| (s, perm)))
}

/// Per-level bookkeeping of a producer run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelStats {
    pub size: usize,
    pub generated: usize,
    pub kept: usize,
    pub witnesses: usize,
}

#[derive(Debug, Clone)]
pub struct Production {
    pub answer: Answer,
    pub oracle: Vec<OracleLevel>,
    pub stats: Vec<LevelStats>,
}

/// Runs generate-and-prune on `channels` channels for up to `max_size` steps,
/// recording the witnesses of every pruning step.
pub fn produce(channels: usize, max_size: usize) -> Result<Production, NetworkError> {
    produce_with(channels, max_size, |_, _| {})
}

/// Like [`produce`], calling `on_level` with the statistics and the pruned
/// layer after each step.
pub fn produce_with<F>(
    channels: usize,
    max_size: usize,
    mut on_level: F,
) -> Result<Production, NetworkError>
where
    F: FnMut(&LevelStats, &Layer),
{
    if channels > MAX_CHANNELS {
        return Err(NetworkError::Capacity { channels });
    }
    let mut oracle = Vec::new();
    let mut stats = Vec::new();
    if channels < 2 {
        return Ok(Production {
            answer: Answer::Yes { channels, size: 0 },
            oracle,
            stats,
        });
    }

    let mut layer = Layer::initial(channels)?;
    for size in 1..=max_size {
        let generated = ogenerate(&layer);
        let (kept, witnesses) = prune_search(&generated);
        let level_stats = LevelStats {
            size,
            generated: generated.len(),
            kept: kept.len(),
            witnesses: witnesses.len(),
        };
        on_level(&level_stats, &kept);
        stats.push(level_stats);
        oracle.push(OracleLevel::new(size, witnesses));
        layer = kept;
        if has_sorting_network(&layer).is_some() {
            return Ok(Production {
                answer: Answer::Yes { channels, size },
                oracle,
                stats,
            });
        }
    }
    Ok(Production {
        answer: Answer::No {
            channels,
            size: max_size,
            layer,
        },
        oracle,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate;

    fn texts(l: &Layer) -> Vec<String> {
        l.networks().iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn one_comparator_networks_collapse() {
        let n3 = generate(&Layer::initial(3).unwrap());
        let (kept, witnesses) = prune_search(&n3);
        assert_eq!(texts(&kept), ["0"]);
        assert_eq!(witnesses.len(), 2);
        for w in &witnesses {
            assert_eq!(w.subsumer.to_string(), "0");
            assert!(w.holds());
        }
        assert_eq!(witnesses[0].subsumed.to_string(), "1");
        assert_eq!(witnesses[1].subsumed.to_string(), "2");
    }

    #[test]
    fn trivial_layers() {
        let single = Layer::new(2, 1, vec![Network::parse(2, "0").unwrap()]).unwrap();
        let (kept, witnesses) = prune_search(&single);
        assert_eq!(kept, single);
        assert!(witnesses.is_empty());

        let none = Layer::new(3, 1, vec![]).unwrap();
        let (kept, witnesses) = prune_search(&none);
        assert!(kept.is_empty() && witnesses.is_empty());
    }

    #[test]
    fn block_resolution_matches_a_plain_scan() {
        // a layer spanning several blocks
        let layer = ogenerate(&ogenerate(&ogenerate(&Layer::initial(6).unwrap())));
        assert!(layer.len() > 2 * BLOCK);
        let (kept, witnesses) = prune_search(&layer);

        let mut plain_kept: Vec<Network> = vec![];
        let mut plain_witnesses = vec![];
        for c in layer.networks() {
            match plain_kept
                .iter()
                .find_map(|s| crate::network::find_subsumption(s, c).map(|p| (s.clone(), p)))
            {
                Some((s, p)) => plain_witnesses.push(SubsumptionWitness::new(s, c.clone(), p)),
                None => plain_kept.push(c.clone()),
            }
        }
        assert_eq!(kept.networks(), &plain_kept[..]);
        assert_eq!(witnesses, plain_witnesses);
    }

    #[test]
    fn produce_small_cases() {
        assert_eq!(
            produce(2, 5).unwrap().answer,
            Answer::Yes {
                channels: 2,
                size: 1
            }
        );
        assert_eq!(
            produce(1, 5).unwrap().answer,
            Answer::Yes {
                channels: 1,
                size: 0
            }
        );
        match produce(3, 2).unwrap().answer {
            Answer::No {
                channels: 3,
                size: 2,
                layer,
            } => assert!(!layer.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
        assert!(produce(17, 3).is_err());
    }
}
