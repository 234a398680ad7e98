//! Comparator networks and their behaviour on 0/1 inputs.
//!
//! A comparator `(i, j)` with `i < j` routes the minimum of its two inputs to
//! channel `i`. Comparators are stored by their Gödel code `j(j-1)/2 + i`, so
//! the canonical comparator order is simply ascending code. Networks are
//! compared by channel count, then length, then code sequence.
//!
//! Binary vectors keep channel `c` in bit `c` of a machine word. An output set
//! is an occupancy bitset over all `2^n` such words, which makes subset tests a
//! word-wise `AND` and keeps members in ascending order for free.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest supported channel count. Output sets hold `2^16` occupancy bits.
pub const MAX_CHANNELS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("invalid comparator ({i}, {j}): the first channel must be below the second")]
    InvalidComparator { i: usize, j: usize },
    #[error("comparator code {code} is out of range for {channels} channels")]
    ChannelOutOfRange { code: usize, channels: usize },
    #[error("{channels} channels exceeds the supported maximum of {MAX_CHANNELS}")]
    Capacity { channels: usize },
    #[error("permutation image {image:?} is not a bijection on 0..{channels}")]
    InvalidPermutation { image: Vec<usize>, channels: usize },
    #[error("bit vector {bits:#b} does not fit in {channels} channels")]
    InvalidVector { bits: u32, channels: usize },
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// Number of distinct standard comparators on `channels` channels.
pub const fn comparator_count(channels: usize) -> usize {
    channels * channels.saturating_sub(1) / 2
}

/// Gödel code of the comparator `(i, j)`: `j(j-1)/2 + i`.
pub fn godel_encode(i: usize, j: usize) -> Result<usize, NetworkError> {
    if i >= j {
        return Err(NetworkError::InvalidComparator { i, j });
    }
    Ok(j * (j - 1) / 2 + i)
}

/// Inverse of [`godel_encode`]; total on the naturals.
pub fn godel_decode(code: usize) -> (usize, usize) {
    let code = code as u128;
    let mut j = (1 + 8 * code).isqrt().div_ceil(2);
    while j * (j - 1) / 2 > code {
        j -= 1;
    }
    while (j + 1) * j / 2 <= code {
        j += 1;
    }
    ((code - j * (j - 1) / 2) as usize, j as usize)
}

// (i, j) for every code below the channel cap; decoding sits in the
// innermost evaluation loop.
const PAIRS: [(u8, u8); comparator_count(MAX_CHANNELS)] = {
    let mut pairs = [(0, 0); comparator_count(MAX_CHANNELS)];
    let mut j = 1;
    let mut code = 0;
    while j < MAX_CHANNELS {
        let mut i = 0;
        while i < j {
            pairs[code] = (i as u8, j as u8);
            code += 1;
            i += 1;
        }
        j += 1;
    }
    pairs
};

/// A standard comparator, stored as its Gödel code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparator(u8);

impl Comparator {
    pub fn new(i: usize, j: usize) -> Result<Self, NetworkError> {
        if j >= MAX_CHANNELS {
            return Err(NetworkError::Capacity { channels: j + 1 });
        }
        godel_encode(i, j).map(|code| Comparator(code as u8))
    }

    pub fn from_code(code: usize) -> Result<Self, NetworkError> {
        if code >= comparator_count(MAX_CHANNELS) {
            return Err(NetworkError::ChannelOutOfRange {
                code,
                channels: MAX_CHANNELS,
            });
        }
        Ok(Comparator(code as u8))
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// The channel pair `(i, j)`, `i < j`.
    #[inline]
    pub fn channels(self) -> (usize, usize) {
        let (i, j) = PAIRS[self.0 as usize];
        (i as usize, j as usize)
    }

    /// Smallest channel count on which this comparator is valid.
    pub fn min_channels(self) -> usize {
        self.channels().1 + 1
    }

    #[inline]
    pub fn apply_bits(self, bits: u32) -> u32 {
        let (i, j) = self.channels();
        // a 1 above a 0 is the only out-of-order case
        if bits >> i & 1 == 1 && bits >> j & 1 == 0 {
            bits ^ (1 << i | 1 << j)
        } else {
            bits
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = self.channels();
        write!(f, "({i},{j})")
    }
}

fn check_channels(channels: usize) -> Result<(), NetworkError> {
    if channels > MAX_CHANNELS {
        Err(NetworkError::Capacity { channels })
    } else {
        Ok(())
    }
}

/// A 0/1 input or output vector; channel `c` lives in bit `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    channels: u8,
    bits: u32,
}

impl BitVector {
    pub fn new(channels: usize, bits: u32) -> Result<Self, NetworkError> {
        check_channels(channels)?;
        if (bits as u64) >> channels != 0 {
            return Err(NetworkError::InvalidVector { bits, channels });
        }
        Ok(BitVector {
            channels: channels as u8,
            bits,
        })
    }

    /// Parses a string such as `"110"`, whose first character is channel 0.
    pub fn parse(s: &str) -> Result<Self, NetworkError> {
        let mut bits = 0;
        for (c, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' if c < MAX_CHANNELS => bits |= 1 << c,
                _ => return Err(NetworkError::Parse(s.to_string())),
            }
        }
        BitVector::new(s.chars().count(), bits)
    }

    pub fn channels(self) -> usize {
        self.channels as usize
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn get(self, channel: usize) -> bool {
        self.bits >> channel & 1 == 1
    }

    pub fn weight(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// All zeros precede all ones, so channel 0 holds the minimum.
    pub fn is_sorted(self) -> bool {
        is_sorted_bits(self.channels(), self.bits)
    }

    pub fn apply(self, c: Comparator) -> BitVector {
        BitVector {
            bits: c.apply_bits(self.bits),
            ..self
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in 0..self.channels() {
            f.write_str(if self.get(c) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[inline]
fn is_sorted_bits(channels: usize, bits: u32) -> bool {
    let w = bits.count_ones() as usize;
    // the sorted vector of weight w has ones on the top w channels
    let sorted = ((1u64 << channels) - (1u64 << (channels - w))) as u32;
    bits == sorted
}

/// A comparator network on a fixed number of channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    channels: u8,
    comps: Vec<Comparator>,
}

impl Network {
    pub fn new(channels: usize, comps: Vec<Comparator>) -> Result<Self, NetworkError> {
        check_channels(channels)?;
        let limit = comparator_count(channels);
        if let Some(c) = comps.iter().find(|c| c.code() >= limit) {
            return Err(NetworkError::ChannelOutOfRange {
                code: c.code(),
                channels,
            });
        }
        Ok(Network {
            channels: channels as u8,
            comps,
        })
    }

    pub fn empty(channels: usize) -> Result<Self, NetworkError> {
        Network::new(channels, Vec::new())
    }

    pub fn from_codes(channels: usize, codes: &[usize]) -> Result<Self, NetworkError> {
        let comps = codes
            .iter()
            .map(|&code| {
                if code >= comparator_count(channels) {
                    Err(NetworkError::ChannelOutOfRange { code, channels })
                } else {
                    Comparator::from_code(code)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Network::new(channels, comps)
    }

    pub fn from_pairs(channels: usize, pairs: &[(usize, usize)]) -> Result<Self, NetworkError> {
        let comps = pairs
            .iter()
            .map(|&(i, j)| Comparator::new(i, j))
            .collect::<Result<Vec<_>, _>>()?;
        Network::new(channels, comps)
    }

    /// Parses the text form: comma-separated codes, or `-` for the empty network.
    pub fn parse(channels: usize, s: &str) -> Result<Self, NetworkError> {
        if s == "-" {
            return Network::empty(channels);
        }
        let codes = s
            .split(',')
            .map(parse_natural)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| NetworkError::Parse(s.to_string()))?;
        Network::from_codes(channels, &codes)
    }

    pub fn channels(&self) -> usize {
        self.channels as usize
    }

    pub fn size(&self) -> usize {
        self.comps.len()
    }

    pub fn comparators(&self) -> &[Comparator] {
        &self.comps
    }

    /// This network followed by `c`. The comparator must fit the channel count.
    pub fn extended(&self, c: Comparator) -> Network {
        debug_assert!(c.code() < comparator_count(self.channels()));
        let mut comps = Vec::with_capacity(self.comps.len() + 1);
        comps.extend_from_slice(&self.comps);
        comps.push(c);
        Network {
            channels: self.channels,
            comps,
        }
    }

    #[inline]
    pub fn eval_bits(&self, bits: u32) -> u32 {
        self.comps.iter().fold(bits, |x, &c| c.apply_bits(x))
    }

    pub fn eval(&self, x: BitVector) -> BitVector {
        debug_assert_eq!(x.channels(), self.channels());
        BitVector {
            bits: self.eval_bits(x.bits),
            ..x
        }
    }

    pub fn outputs(&self) -> OutputSet {
        let mut set = OutputSet::empty(self.channels());
        for x in 0..1u32 << self.channels {
            set.insert_bits(self.eval_bits(x));
        }
        set
    }

    pub fn is_sorting_network(&self) -> bool {
        self.outputs().is_sorted()
    }
}

pub(crate) fn parse_natural(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl Ord for Network {
    fn cmp(&self, other: &Self) -> Ordering {
        self.channels
            .cmp(&other.channels)
            .then(self.comps.len().cmp(&other.comps.len()))
            .then_with(|| self.comps.cmp(&other.comps))
    }
}

impl PartialOrd for Network {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("-");
        }
        for (idx, c) in self.comps.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", c.code())?;
        }
        Ok(())
    }
}

/// A set of binary vectors of one channel count, as a `2^n`-bit occupancy map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutputSet {
    channels: u8,
    words: Box<[u64]>,
}

impl OutputSet {
    pub(crate) fn empty(channels: usize) -> Self {
        let words = (1usize << channels).div_ceil(64);
        OutputSet {
            channels: channels as u8,
            words: vec![0; words].into_boxed_slice(),
        }
    }

    /// Every vector on `channels` channels, the outputs of the empty network.
    pub fn full(channels: usize) -> Result<Self, NetworkError> {
        check_channels(channels)?;
        let mut set = OutputSet::empty(channels);
        for x in 0..1u32 << channels {
            set.insert_bits(x);
        }
        Ok(set)
    }

    pub fn from_vectors<I: IntoIterator<Item = BitVector>>(
        channels: usize,
        vectors: I,
    ) -> Result<Self, NetworkError> {
        check_channels(channels)?;
        let mut set = OutputSet::empty(channels);
        for v in vectors {
            if v.channels() != channels {
                return Err(NetworkError::InvalidVector {
                    bits: v.bits(),
                    channels,
                });
            }
            set.insert_bits(v.bits());
        }
        Ok(set)
    }

    #[inline]
    pub(crate) fn insert_bits(&mut self, bits: u32) {
        self.words[(bits >> 6) as usize] |= 1 << (bits & 63);
    }

    #[inline]
    pub fn contains_bits(&self, bits: u32) -> bool {
        self.words[(bits >> 6) as usize] >> (bits & 63) & 1 == 1
    }

    pub fn contains(&self, v: BitVector) -> bool {
        v.channels() == self.channels() && self.contains_bits(v.bits())
    }

    pub fn channels(&self) -> usize {
        self.channels as usize
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members as raw bit patterns in ascending order.
    pub fn iter_bits(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some((w as u32) << 6 | b)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = BitVector> + '_ {
        let channels = self.channels;
        self.iter_bits()
            .map(move |bits| BitVector { channels, bits })
    }

    pub fn is_subset(&self, other: &OutputSet) -> bool {
        self.channels == other.channels
            && self
                .words
                .iter()
                .zip(other.words.iter())
                .all(|(a, b)| a & !b == 0)
    }

    /// Member counts per weight, indexed `0..=n`.
    pub fn weight_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.channels() + 1];
        for bits in self.iter_bits() {
            counts[bits.count_ones() as usize] += 1;
        }
        counts
    }

    pub fn is_sorted(&self) -> bool {
        let n = self.channels();
        self.iter_bits().all(|bits| is_sorted_bits(n, bits))
    }

    pub fn permuted(&self, perm: &Permutation) -> OutputSet {
        assert_eq!(perm.len(), self.channels(), "permutation size mismatch");
        let mut out = OutputSet::empty(self.channels());
        for bits in self.iter_bits() {
            out.insert_bits(perm.apply_bits(bits));
        }
        out
    }

    /// `perm(self) ⊆ other`, without materialising the permuted set.
    pub fn permuted_subset_of(&self, perm: &Permutation, other: &OutputSet) -> bool {
        self.channels == other.channels
            && perm.len() == self.channels()
            && self
                .iter_bits()
                .all(|bits| other.contains_bits(perm.apply_bits(bits)))
    }
}

/// A bijection on channel indices; `image[i]` is where channel `i` goes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    image: Vec<u8>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, NetworkError> {
        let n = image.len();
        let invalid = || NetworkError::InvalidPermutation {
            image: image.clone(),
            channels: n,
        };
        if n > MAX_CHANNELS {
            return Err(invalid());
        }
        let mut seen = 0u32;
        for &p in &image {
            if p >= n || seen >> p & 1 == 1 {
                return Err(invalid());
            }
            seen |= 1 << p;
        }
        Ok(Permutation {
            image: image.iter().map(|&p| p as u8).collect(),
        })
    }

    pub fn identity(channels: usize) -> Self {
        assert!(channels <= MAX_CHANNELS);
        Permutation {
            image: (0..channels as u8).collect(),
        }
    }

    /// Parses space-separated images, e.g. `"1 2 0"`.
    pub fn parse(s: &str) -> Result<Self, NetworkError> {
        let image = s
            .split(' ')
            .map(parse_natural)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| NetworkError::Parse(s.to_string()))?;
        Permutation::new(image)
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    pub fn image(&self) -> Vec<usize> {
        self.image.iter().map(|&p| p as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    #[inline]
    pub fn apply_bits(&self, bits: u32) -> u32 {
        let mut rest = bits;
        let mut out = 0;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            out |= 1 << self.image[i];
            rest &= rest - 1;
        }
        out
    }

    /// Moves the value on channel `i` to channel `image[i]`.
    pub fn apply(&self, x: BitVector) -> BitVector {
        assert_eq!(self.len(), x.channels(), "permutation size mismatch");
        BitVector {
            bits: self.apply_bits(x.bits),
            ..x
        }
    }

    /// `i ↦ next(self(i))`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        assert_eq!(self.len(), next.len(), "permutation size mismatch");
        Permutation {
            image: self.image.iter().map(|&p| next.image[p as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u8; self.len()];
        for (i, &p) in self.image.iter().enumerate() {
            image[p as usize] = i as u8;
        }
        Permutation { image }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, p) in self.image.iter().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Does `a` subsume `b` by `perm`, i.e. `perm(outputs(a)) ⊆ outputs(b)`?
///
/// Mismatched channel counts or permutation sizes give `false`.
pub fn subsumes(a: &Network, b: &Network, perm: &Permutation) -> bool {
    if a.channels() != b.channels() || perm.len() != a.channels() {
        return false;
    }
    a.outputs().permuted_subset_of(perm, &b.outputs())
}

/// Lexicographically least permutation by which `a` subsumes `b`, if any.
pub fn find_subsumption(a: &Network, b: &Network) -> Option<Permutation> {
    if a.channels() != b.channels() {
        return None;
    }
    OutputProfile::new(a).find_subsumption(&OutputProfile::new(b))
}

/// Output set of a network together with the per-weight statistics used to
/// reject subsumption candidates before enumerating permutations.
#[derive(Debug, Clone)]
pub struct OutputProfile {
    channels: usize,
    set: OutputSet,
    members: Vec<u32>,
    class_sizes: Vec<u32>,
    // ones[w * n + c]: members of weight w with a 1 on channel c
    ones: Vec<u32>,
}

impl OutputProfile {
    pub fn new(net: &Network) -> Self {
        OutputProfile::from_set(net.outputs())
    }

    pub fn from_set(set: OutputSet) -> Self {
        let n = set.channels();
        let mut class_sizes = vec![0; n + 1];
        let mut ones = vec![0; (n + 1) * n];
        let mut members: Vec<u32> = set.iter_bits().collect();
        for &bits in &members {
            let w = bits.count_ones() as usize;
            class_sizes[w] += 1;
            let mut rest = bits;
            while rest != 0 {
                ones[w * n + rest.trailing_zeros() as usize] += 1;
                rest &= rest - 1;
            }
        }
        // small classes first: they are the most likely to miss
        members.sort_by_key(|&b| (class_sizes[b.count_ones() as usize], b));
        OutputProfile {
            channels: n,
            set,
            members,
            class_sizes,
            ones,
        }
    }

    pub fn outputs(&self) -> &OutputSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Necessary condition from cardinalities alone: a bijection preserves
    /// weights, so every weight class of `self` must fit in the same class of
    /// `other`.
    pub fn weight_classes_fit(&self, other: &OutputProfile) -> bool {
        self.channels == other.channels
            && self.members.len() <= other.members.len()
            && self
                .class_sizes
                .iter()
                .zip(&other.class_sizes)
                .all(|(a, b)| a <= b)
    }

    /// For each channel of `self`, the channels of `other` it may be mapped to.
    ///
    /// Vectors of weight `w` with a 1 (resp. 0) on channel `c` map injectively
    /// into vectors of weight `w` with a 1 (resp. 0) on `perm(c)`.
    fn candidate_targets(&self, other: &OutputProfile) -> Option<[u32; MAX_CHANNELS]> {
        let n = self.channels;
        let mut allowed = [0u32; MAX_CHANNELS];
        for (c, slot) in allowed.iter_mut().enumerate().take(n) {
            for t in 0..n {
                let fits = (0..=n).all(|w| {
                    let (ao, bo) = (self.ones[w * n + c], other.ones[w * n + t]);
                    ao <= bo && self.class_sizes[w] - ao <= other.class_sizes[w] - bo
                });
                if fits {
                    *slot |= 1 << t;
                }
            }
            if *slot == 0 {
                return None;
            }
        }
        Some(allowed)
    }

    pub fn subsumes_by(&self, other: &OutputProfile, perm: &Permutation) -> bool {
        perm.len() == self.channels
            && other.channels == self.channels
            && self
                .members
                .iter()
                .all(|&bits| other.set.contains_bits(perm.apply_bits(bits)))
    }

    /// Lexicographically least `perm` with `perm(outputs(self)) ⊆ outputs(other)`.
    pub fn find_subsumption(&self, other: &OutputProfile) -> Option<Permutation> {
        if !self.weight_classes_fit(other) {
            return None;
        }
        let allowed = self.candidate_targets(other)?;
        let mut image = [0u8; MAX_CHANNELS];
        if self.assign(other, &allowed, &mut image, 0, 0) {
            Some(Permutation {
                image: image[..self.channels].to_vec(),
            })
        } else {
            None
        }
    }

    fn assign(
        &self,
        other: &OutputProfile,
        allowed: &[u32; MAX_CHANNELS],
        image: &mut [u8; MAX_CHANNELS],
        pos: usize,
        used: u32,
    ) -> bool {
        if pos == self.channels {
            let perm = &image[..self.channels];
            return self.members.iter().all(|&bits| {
                let mut rest = bits;
                let mut out = 0u32;
                while rest != 0 {
                    out |= 1 << perm[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                other.set.contains_bits(out)
            });
        }
        let mut options = allowed[pos] & !used;
        while options != 0 {
            let t = options.trailing_zeros();
            options &= options - 1;
            image[pos] = t as u8;
            if self.assign(other, allowed, image, pos + 1, used | 1 << t) {
                return true;
            }
        }
        false
    }
}
