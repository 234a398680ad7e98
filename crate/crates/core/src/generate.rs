//! Layers of same-size networks and the one-comparator extension step.

use rayon::prelude::*;
use thiserror::Error;

use crate::network::{comparator_count, Comparator, Network, NetworkError, MAX_CHANNELS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayerError {
    #[error("network {network} does not have {size} comparators on {channels} channels")]
    Shape {
        network: String,
        channels: usize,
        size: usize,
    },
    #[error("layer is not strictly increasing at position {0}")]
    Unsorted(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Networks of one size on one channel count, strictly increasing in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    channels: usize,
    size: usize,
    nets: Vec<Network>,
}

impl Layer {
    pub fn new(channels: usize, size: usize, nets: Vec<Network>) -> Result<Self, LayerError> {
        if channels > MAX_CHANNELS {
            return Err(NetworkError::Capacity { channels }.into());
        }
        if let Some(bad) = nets
            .iter()
            .find(|c| c.channels() != channels || c.size() != size)
        {
            return Err(LayerError::Shape {
                network: bad.to_string(),
                channels,
                size,
            });
        }
        if let Some(pos) = nets.windows(2).position(|w| w[0] >= w[1]) {
            return Err(LayerError::Unsorted(pos + 1));
        }
        Ok(Layer {
            channels,
            size,
            nets,
        })
    }

    /// `{empty network}`, the starting point of every search.
    pub fn initial(channels: usize) -> Result<Self, NetworkError> {
        Ok(Layer {
            channels,
            size: 0,
            nets: vec![Network::empty(channels)?],
        })
    }

    pub(crate) fn from_sorted(channels: usize, size: usize, nets: Vec<Network>) -> Self {
        debug_assert!(nets.windows(2).all(|w| w[0] < w[1]));
        Layer {
            channels,
            size,
            nets,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn networks(&self) -> &[Network] {
        &self.nets
    }

    pub fn into_networks(self) -> Vec<Network> {
        self.nets
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }
}

fn all_comparators(channels: usize) -> impl Iterator<Item = Comparator> {
    (0..comparator_count(channels)).map(|code| Comparator::from_code(code).expect("code in range"))
}

/// Appends every comparator, in ascending code order, to every network.
pub fn generate(layer: &Layer) -> Layer {
    let nets = layer
        .nets
        .par_iter()
        .flat_map_iter(|c| all_comparators(layer.channels).map(move |comp| c.extended(comp)))
        .collect();
    Layer::from_sorted(layer.channels, layer.size + 1, nets)
}

/// Pairs `(i, j)` (as a bitmask over Gödel codes) that some output of `net`
/// has out of order, i.e. the comparators that would change an output.
pub fn useful_comparators(net: &Network) -> u128 {
    let n = net.channels();
    let mut mask = 0u128;
    for x in net.outputs().iter_bits() {
        let mut ones = x;
        while ones != 0 {
            let i = ones.trailing_zeros() as usize;
            ones &= ones - 1;
            // zeros above channel i
            let mut zeros = !x & (((1u64 << n) - 1) as u32) & !((2u32 << i) - 1);
            while zeros != 0 {
                let j = zeros.trailing_zeros() as usize;
                zeros &= zeros - 1;
                mask |= 1 << (j * (j - 1) / 2 + i);
            }
        }
    }
    mask
}

/// [`generate`] without the extensions whose last comparator is redundant:
/// `c = (i, j)` is dropped when every output `x` of the parent already has
/// `x[i] <= x[j]`, so that appending `c` changes nothing.
pub fn ogenerate(layer: &Layer) -> Layer {
    let nets = layer
        .nets
        .par_iter()
        .flat_map_iter(|c| {
            let useful = useful_comparators(c);
            all_comparators(layer.channels)
                .filter(move |comp| useful >> comp.code() & 1 == 1)
                .map(move |comp| c.extended(comp))
        })
        .collect();
    Layer::from_sorted(layer.channels, layer.size + 1, nets)
}
