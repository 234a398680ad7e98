//! Optimal-size sorting networks by generate-and-prune.
//!
//! The [`search`] producer explores all networks layer by layer, removes those
//! subsumed by a kept network and logs each removal. [`oracle`] stores those
//! logs and reshapes them for the [`checker`], which replays the search using
//! the logged subsumptions only after verifying each of them.

pub mod bst;
pub mod checker;
pub mod generate;
pub mod network;
pub mod oracle;
pub mod search;

pub use checker::{generate_and_prune_checked, Answer, CheckConfig, CheckError, Mode, Obligation};
pub use generate::{generate, ogenerate, Layer};
pub use network::{
    find_subsumption, subsumes, BitVector, Comparator, Network, NetworkError, OutputSet,
    Permutation, MAX_CHANNELS,
};
pub use oracle::{preprocess, OracleFile, OracleKind, OracleLevel};
pub use search::{produce, prune_search, SubsumptionWitness};
