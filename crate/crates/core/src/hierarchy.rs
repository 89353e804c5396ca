//! IPv4 prefix hierarchies: 1D (source) chains and 2D (source x destination)
//! lattices at byte or bit granularity.
//!
//! A node of the hierarchy is named by a [`Coordinate`] holding the number of
//! generalization steps applied in each dimension. A [`Key`] is an address (or
//! address pair) together with the coordinate of the node it lives at. Keys
//! are always canonical: every bit masked out by the coordinate is zero, so
//! equality and hashing are plain bitwise operations.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Prefix-length step between adjacent levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Granularity {
    Byte,
    Bit,
}

impl Granularity {
    pub fn step_bits(self) -> u32 {
        match self {
            Granularity::Byte => 8,
            Granularity::Bit => 1,
        }
    }
}

/// Per-dimension generalization degrees of a hierarchy node.
///
/// For 1D hierarchies the destination degree is always zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coordinate {
    pub src: u8,
    pub dst: u8,
}

impl Coordinate {
    pub const ROOT: Coordinate = Coordinate { src: 0, dst: 0 };

    pub const fn one_d(g: u8) -> Self {
        Coordinate { src: g, dst: 0 }
    }

    pub const fn two_d(src: u8, dst: u8) -> Self {
        Coordinate { src, dst }
    }

    /// Sum of the generalization degrees.
    pub fn level(self) -> usize {
        self.src as usize + self.dst as usize
    }

    /// Component-wise `self <= other`.
    pub fn le(self, other: Coordinate) -> bool {
        self.src <= other.src && self.dst <= other.dst
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.src, self.dst)
    }
}

/// `level_of` for callers that prefer a free function.
pub fn level_of(c: Coordinate) -> usize {
    c.level()
}

/// An address prefix (1D) or pair of prefixes (2D) at a hierarchy node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    src: u32,
    dst: u32,
    coord: Coordinate,
}

impl Key {
    /// Reserved marker for an unoccupied bucket. Its coordinate is outside
    /// every hierarchy, so it never equals a canonical key.
    pub const EMPTY: Key = Key {
        src: u32::MAX,
        dst: u32::MAX,
        coord: Coordinate {
            src: u8::MAX,
            dst: u8::MAX,
        },
    };

    /// A fully specific 1D key (source address only).
    pub const fn flow(src: u32) -> Self {
        Key {
            src,
            dst: 0,
            coord: Coordinate::ROOT,
        }
    }

    /// A fully specific 2D key.
    pub const fn pair(src: u32, dst: u32) -> Self {
        Key {
            src,
            dst,
            coord: Coordinate::ROOT,
        }
    }

    pub fn src(&self) -> u32 {
        self.src
    }

    pub fn dst(&self) -> u32 {
        self.dst
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coord
    }

    pub fn level(&self) -> usize {
        self.coord.level()
    }

    pub fn is_empty(&self) -> bool {
        *self == Key::EMPTY
    }

    /// Both addresses packed into one word, source in the high half.
    pub fn packed(&self) -> u64 {
        ((self.src as u64) << 32) | self.dst as u64
    }
}

/// Shape of a hierarchy: dimensionality, granularity and address width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HierarchySpec {
    dims: u8,
    granularity: Granularity,
    addr_bits: u8,
}

impl HierarchySpec {
    pub const ONE_D_BYTE: HierarchySpec = HierarchySpec {
        dims: 1,
        granularity: Granularity::Byte,
        addr_bits: 32,
    };
    pub const ONE_D_BIT: HierarchySpec = HierarchySpec {
        dims: 1,
        granularity: Granularity::Bit,
        addr_bits: 32,
    };
    pub const TWO_D_BYTE: HierarchySpec = HierarchySpec {
        dims: 2,
        granularity: Granularity::Byte,
        addr_bits: 32,
    };
    pub const TWO_D_BIT: HierarchySpec = HierarchySpec {
        dims: 2,
        granularity: Granularity::Bit,
        addr_bits: 32,
    };

    /// IPv4 hierarchy with the given dimensionality and granularity.
    pub fn new(dims: u8, granularity: Granularity) -> Result<Self> {
        if dims != 1 && dims != 2 {
            return Err(Error::Dimensionality(dims));
        }
        Ok(HierarchySpec {
            dims,
            granularity,
            addr_bits: 32,
        })
    }

    /// Reduced hierarchy over 4-bit addresses at bit granularity (depth 5),
    /// small enough to enumerate every key.
    pub fn toy(dims: u8) -> Result<Self> {
        let mut spec = Self::new(dims, Granularity::Bit)?;
        spec.addr_bits = 4;
        Ok(spec)
    }

    pub fn dims(&self) -> u8 {
        self.dims
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn addr_bits(&self) -> u32 {
        self.addr_bits as u32
    }

    pub fn step_bits(&self) -> u32 {
        self.granularity.step_bits()
    }

    pub fn is_toy(&self) -> bool {
        self.addr_bits != 32
    }

    /// Number of levels per dimension, `addr_bits / step + 1`.
    pub fn depth(&self) -> usize {
        (self.addr_bits() / self.step_bits()) as usize + 1
    }

    /// Number of nodes `H` (and of sketch arrays).
    pub fn nodes(&self) -> usize {
        self.depth().pow(self.dims as u32)
    }

    /// Highest level, `sum(d_i - 1)`.
    pub fn max_level(&self) -> usize {
        (self.depth() - 1) * self.dims as usize
    }

    /// Coordinate of the fully general node.
    pub fn top(&self) -> Coordinate {
        let g = (self.depth() - 1) as u8;
        if self.dims == 1 {
            Coordinate::one_d(g)
        } else {
            Coordinate::two_d(g, g)
        }
    }

    pub fn contains(&self, c: Coordinate) -> bool {
        let d = self.depth();
        (c.src as usize) < d && (c.dst as usize) < d && (self.dims == 2 || c.dst == 0)
    }

    fn check(&self, c: Coordinate) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::CoordinateOutOfRange {
                coordinate: c.to_string(),
                depth: self.depth() as u8,
            })
        }
    }

    /// Array index of a node: the degree itself in 1D, `g_src * d + g_dst`
    /// (destination-minor) in 2D.
    pub fn node_index(&self, c: Coordinate) -> usize {
        if self.dims == 1 {
            c.src as usize
        } else {
            c.src as usize * self.depth() + c.dst as usize
        }
    }

    /// Inverse of [`node_index`](Self::node_index).
    pub fn coordinate_at(&self, index: usize) -> Coordinate {
        if self.dims == 1 {
            Coordinate::one_d(index as u8)
        } else {
            let d = self.depth();
            Coordinate::two_d((index / d) as u8, (index % d) as u8)
        }
    }

    /// All node coordinates in array-index order.
    pub fn coordinates(&self) -> impl Iterator<Item = Coordinate> + '_ {
        (0..self.nodes()).map(move |i| self.coordinate_at(i))
    }

    /// Nodes whose degrees sum to `level`, in array-index order.
    pub fn nodes_at_level(&self, level: usize) -> Vec<Coordinate> {
        self.coordinates().filter(|c| c.level() == level).collect()
    }

    fn mask(&self, degree: u8) -> u32 {
        let masked = self.step_bits() * degree as u32;
        let width_mask = if self.addr_bits == 32 {
            u32::MAX
        } else {
            (1u32 << self.addr_bits) - 1
        };
        if masked >= 32 {
            0
        } else {
            (u32::MAX << masked) & width_mask
        }
    }

    /// Number of unmasked address bits at a degree.
    pub fn prefix_len(&self, degree: u8) -> u32 {
        self.addr_bits() - self.step_bits() * degree as u32
    }

    /// Canonical key for an address (pair) at a node; out-of-range bits are
    /// dropped.
    pub fn key_at(&self, src: u32, dst: u32, c: Coordinate) -> Result<Key> {
        self.check(c)?;
        let dst = if self.dims == 1 { 0 } else { dst };
        Ok(Key {
            src: src & self.mask(c.src),
            dst: dst & self.mask(c.dst),
            coord: c,
        })
    }

    /// Generalizes `key` to the node `target`, which must be at or above the
    /// key's own node in every dimension.
    pub fn generalize(&self, key: &Key, target: Coordinate) -> Result<Key> {
        self.check(target)?;
        if !key.coord.le(target) {
            return Err(Error::NotAnAncestor {
                from: key.coord.to_string(),
                to: target.to_string(),
            });
        }
        Ok(self.generalize_unchecked(key, target))
    }

    #[inline]
    pub(crate) fn generalize_unchecked(&self, key: &Key, target: Coordinate) -> Key {
        Key {
            src: key.src & self.mask(target.src),
            dst: key.dst & self.mask(target.dst),
            coord: target,
        }
    }

    /// The generalization relation `x ⪯ y` (reflexive).
    pub fn covers(&self, x: &Key, y: &Key) -> bool {
        if x.is_empty() || y.is_empty() || !x.coord.le(y.coord) {
            return false;
        }
        let g = self.generalize_unchecked(x, y.coord);
        g.src == y.src && g.dst == y.dst
    }

    /// Number of distinct keys at a node.
    pub fn key_space_size(&self, c: Coordinate) -> u128 {
        let mut bits = self.prefix_len(c.src);
        if self.dims == 2 {
            bits += self.prefix_len(c.dst);
        }
        1u128 << bits
    }

    /// Every key at a node, in increasing address order. Only meant for
    /// small (toy) hierarchies.
    pub fn enumerate_keys(&self, c: Coordinate) -> Vec<Key> {
        let src_bits = self.prefix_len(c.src);
        let dst_bits = if self.dims == 2 {
            self.prefix_len(c.dst)
        } else {
            0
        };
        assert!(
            src_bits + dst_bits <= 24,
            "key space at {c} too large to enumerate"
        );
        let src_shift = self.step_bits() * c.src as u32;
        let dst_shift = self.step_bits() * c.dst as u32;
        let mut keys = Vec::with_capacity(1 << (src_bits + dst_bits));
        for s in 0..(1u64 << src_bits) {
            for t in 0..(1u64 << dst_bits) {
                keys.push(Key {
                    src: (s << src_shift) as u32,
                    dst: if self.dims == 2 { (t << dst_shift) as u32 } else { 0 },
                    coord: c,
                });
            }
        }
        keys
    }

    /// Every key of every node.
    pub fn enumerate_all_keys(&self) -> Vec<Key> {
        self.coordinates()
            .flat_map(|c| self.enumerate_keys(c))
            .collect()
    }

    /// Renders a key as `a.b.c.d/m` (1D) or `a.b.c.d/m|e.f.g.h/n` (2D).
    pub fn render(&self, key: &Key) -> String {
        if key.is_empty() {
            return "EMPTY".to_string();
        }
        let src = format!(
            "{}/{}",
            Ipv4Addr::from(key.src),
            self.prefix_len(key.coord.src)
        );
        if self.dims == 1 {
            src
        } else {
            format!(
                "{src}|{}/{}",
                Ipv4Addr::from(key.dst),
                self.prefix_len(key.coord.dst)
            )
        }
    }

    /// Parses the textual form produced by [`render`](Self::render).
    pub fn parse_key(&self, input: &str) -> Result<Key> {
        let err = |reason: &str| Error::KeyParse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = input.trim().split('|').collect();
        if parts.len() != self.dims as usize {
            return Err(err("wrong number of prefixes for this hierarchy"));
        }
        let mut addrs = [0u32; 2];
        let mut degrees = [0u8; 2];
        for (i, part) in parts.iter().enumerate() {
            let (addr, len) = part.split_once('/').ok_or_else(|| err("missing '/'"))?;
            let addr: Ipv4Addr = addr.parse().map_err(|_| err("bad dotted quad"))?;
            let len: u32 = len.parse().map_err(|_| err("bad prefix length"))?;
            if len > self.addr_bits() {
                return Err(err("prefix length exceeds address width"));
            }
            let masked = self.addr_bits() - len;
            if masked % self.step_bits() != 0 {
                return Err(err("prefix length not on a hierarchy level"));
            }
            let addr = u32::from(addr);
            if self.addr_bits != 32 && addr >> self.addr_bits != 0 {
                return Err(err("address wider than the hierarchy"));
            }
            addrs[i] = addr;
            degrees[i] = (masked / self.step_bits()) as u8;
        }
        let c = Coordinate {
            src: degrees[0],
            dst: degrees[1],
        };
        let key = self.key_at(addrs[0], addrs[1], c)?;
        if key.src != addrs[0] || key.dst != addrs[1] {
            return Err(err("host bits set below the prefix length"));
        }
        Ok(key)
    }
}

impl fmt::Display for HierarchySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = match self.granularity {
            Granularity::Byte => "byte",
            Granularity::Bit => "bit",
        };
        if self.is_toy() {
            write!(f, "{}d-toy{}", self.dims, self.addr_bits)
        } else {
            write!(f, "{}d-{g}", self.dims)
        }
    }
}

impl FromStr for HierarchySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1d-byte" => Ok(Self::ONE_D_BYTE),
            "1d-bit" => Ok(Self::ONE_D_BIT),
            "2d-byte" => Ok(Self::TWO_D_BYTE),
            "2d-bit" => Ok(Self::TWO_D_BIT),
            "1d-toy4" => Self::toy(1),
            "2d-toy4" => Self::toy(2),
            other => Err(Error::Config(format!(
                "unknown hierarchy {other:?} (expected 1d-byte, 1d-bit, 2d-byte or 2d-bit)"
            ))),
        }
    }
}
