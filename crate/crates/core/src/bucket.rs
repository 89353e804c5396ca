//! The four-field majority-vote bucket and the per-node bucket array.

use crate::hierarchy::{Coordinate, HierarchySpec, Key};

/// One MJRTY cell: candidate key, total count, indicator and the cumulative
/// count of the current candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bucket {
    pub key: Key,
    pub total: u64,
    /// Vote balance of the candidate. Never negative in full mode; the
    /// hardware-faithful update lets it drop below zero.
    pub indicator: i64,
    pub cumulative: u64,
}

/// What happened when a `(key, value)` pair was offered to a bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Offer {
    /// The key was already the candidate.
    Matched,
    /// The key lost the vote and must be carried to the next level.
    Passed,
    /// The key took over an empty bucket; nothing to carry.
    Installed,
    /// The key took over and the previous candidate, with its cumulative
    /// count, must be carried instead.
    Replaced { evicted: Key, count: u64 },
}

impl Offer {
    /// The pair that continues upward, if any: the offered pair on a miss,
    /// the evicted candidate on a takeover.
    #[inline]
    pub fn carry(self, key: Key, value: u64) -> Option<(Key, u64)> {
        match self {
            Offer::Matched | Offer::Installed => None,
            Offer::Passed => Some((key, value)),
            Offer::Replaced { evicted, count } => Some((evicted, count)),
        }
    }

    /// True when the offered key ended up as the bucket's candidate.
    pub fn admitted(self) -> bool {
        !matches!(self, Offer::Passed)
    }
}

impl Default for Bucket {
    fn default() -> Self {
        Bucket::EMPTY
    }
}

impl Bucket {
    pub const EMPTY: Bucket = Bucket {
        key: Key::EMPTY,
        total: 0,
        indicator: 0,
        cumulative: 0,
    };

    pub fn is_empty(&self) -> bool {
        self.key.is_empty()
    }

    /// Full-mode MJRTY step. A tie (`I == v`) decrements.
    #[inline]
    pub fn offer(&mut self, key: Key, value: u64) -> Offer {
        self.total += value;
        if self.key == key {
            self.indicator += value as i64;
            self.cumulative += value;
            return Offer::Matched;
        }
        let v = value as i64;
        if self.indicator >= v {
            self.indicator -= v;
            return Offer::Passed;
        }
        self.indicator = v - self.indicator;
        let evicted = std::mem::replace(&mut self.key, key);
        let count = std::mem::replace(&mut self.cumulative, value);
        if evicted.is_empty() {
            Offer::Installed
        } else {
            Offer::Replaced { evicted, count }
        }
    }

    /// Switch-pipeline step: both branches of the (K, I) pairs atom read the
    /// original values, and the takeover branch does not rewrite I.
    #[inline]
    pub fn offer_hw(&mut self, key: Key, value: u64) -> Offer {
        let v = value as i64;
        let (old_key, old_indicator) = (self.key, self.indicator);
        self.total += value;
        if old_key == key {
            self.indicator = old_indicator + v;
        } else {
            self.indicator = old_indicator - v;
        }
        if old_key != key && old_indicator < v {
            self.key = key;
        }
        if old_key == key {
            self.cumulative += value;
            Offer::Matched
        } else if old_indicator < v {
            let count = std::mem::replace(&mut self.cumulative, value);
            if old_key.is_empty() {
                Offer::Installed
            } else {
                Offer::Replaced {
                    evicted: old_key,
                    count,
                }
            }
        } else {
            Offer::Passed
        }
    }

    /// Unconditional absorption at a node with a single possible key.
    #[inline]
    pub fn absorb(&mut self, key: Key, value: u64) {
        self.key = key;
        self.total += value;
        self.indicator += value as i64;
        self.cumulative += value;
    }

    /// `⌊(V + I) / 2⌋`, the bound on the candidate's true count.
    pub fn candidate_bound(&self) -> u64 {
        (self.total as i128 + self.indicator as i128).max(0) as u64 / 2
    }

    /// `⌊(V − I) / 2⌋`, the bound on any other key's true count.
    pub fn other_bound(&self) -> u64 {
        (self.total as i128 - self.indicator as i128).max(0) as u64 / 2
    }
}

/// splitmix64 output function (the 64-bit murmur3 finalizer family).
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives `count` per-array seeds from one run seed.
pub(crate) fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut state = seed;
    (0..count)
        .map(|_| {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            mix64(state)
        })
        .collect()
}

/// How a node maps keys to slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Indexing {
    /// Seeded hash reduced to `[0, w)` by multiply-shift.
    Hashed { seed: u64 },
    /// The array has one slot per key: the unmasked prefix bits are the slot.
    Direct { src_shift: u32, dst_shift: u32, dst_bits: u32 },
}

/// The bucket array of one hierarchy node.
#[derive(Clone, Debug)]
pub struct NodeArray {
    coord: Coordinate,
    indexing: Indexing,
    single_key: bool,
    buckets: Vec<Bucket>,
}

impl NodeArray {
    pub(crate) fn new(spec: &HierarchySpec, coord: Coordinate, width: usize, seed: u64) -> Self {
        let space = spec.key_space_size(coord);
        let indexing = if space == width as u128 {
            let dst_bits = if spec.dims() == 2 {
                spec.prefix_len(coord.dst)
            } else {
                0
            };
            Indexing::Direct {
                src_shift: spec.step_bits() * coord.src as u32,
                dst_shift: spec.step_bits() * coord.dst as u32,
                dst_bits,
            }
        } else {
            Indexing::Hashed { seed }
        };
        NodeArray {
            coord,
            indexing,
            single_key: space == 1,
            buckets: vec![Bucket::EMPTY; width],
        }
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coord
    }

    pub fn width(&self) -> usize {
        self.buckets.len()
    }

    /// True when the node holds only the wildcard key.
    pub fn is_single_key(&self) -> bool {
        self.single_key
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn buckets_mut(&mut self) -> &mut [Bucket] {
        &mut self.buckets
    }

    #[inline]
    pub fn slot(&self, key: &Key) -> usize {
        match self.indexing {
            Indexing::Hashed { seed } => {
                let h = mix64(key.packed() ^ seed);
                ((h as u128 * self.buckets.len() as u128) >> 64) as usize
            }
            Indexing::Direct {
                src_shift,
                dst_shift,
                dst_bits,
            } => {
                let src = (key.src() as u64).checked_shr(src_shift).unwrap_or(0);
                let dst = (key.dst() as u64).checked_shr(dst_shift).unwrap_or(0);
                ((src << dst_bits) | dst) as usize
            }
        }
    }

    #[inline]
    pub fn bucket_for(&self, key: &Key) -> (usize, &Bucket) {
        let slot = self.slot(key);
        (slot, &self.buckets[slot])
    }

    #[inline]
    pub(crate) fn bucket_mut(&mut self, slot: usize) -> &mut Bucket {
        &mut self.buckets[slot]
    }

    pub fn occupancy(&self) -> usize {
        self.buckets.iter().filter(|b| !b.is_empty()).count()
    }

    pub(crate) fn clear(&mut self) {
        self.buckets.fill(Bucket::EMPTY);
    }
}
