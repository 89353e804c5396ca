//! The 1D sketch: one bucket array per level of a source-prefix chain.
//!
//! Updates enter at level 0 and climb until a bucket admits them (or the
//! wildcard level absorbs them). A bucket that changes candidate forwards
//! the evicted candidate and its cumulative count instead. Detect walks the
//! levels bottom-up, reports candidates whose estimated conditioned count
//! reaches the threshold, and pushes the cumulative count of every other
//! candidate one level up.

use std::collections::HashMap;

use crate::bucket::{derive_seeds, Bucket, NodeArray};
use crate::config::{SketchConfig, UpdateMode};
use crate::error::{Error, Result};
use crate::hierarchy::{HierarchySpec, Key};
use crate::probe::{NoProbe, Probe};
use crate::report::{HhhEntry, HhhReport, TraversalStats};

/// Operations shared by the 1D and 2D sketches.
pub trait HhhSketch {
    fn spec(&self) -> &HierarchySpec;
    fn config(&self) -> &SketchConfig;
    /// Inserts one record; the destination is ignored by 1D sketches.
    fn insert(&mut self, src: u32, dst: u32, value: u64);
    fn detect(&mut self, threshold: u64) -> Result<HhhReport>;
    fn reset(&mut self);
    /// Sum of all values inserted since the last reset.
    fn total(&self) -> u64;
    fn traversal_stats(&self) -> &TraversalStats;
    fn arrays(&self) -> &[NodeArray];
}

#[derive(Clone, Debug)]
pub struct Sketch1D {
    config: SketchConfig,
    nodes: Vec<NodeArray>,
    traversal: TraversalStats,
    inflow: Vec<u64>,
    total: u64,
    detected: bool,
}

impl Sketch1D {
    pub fn new(config: SketchConfig) -> Result<Self> {
        let spec = config.spec;
        if spec.dims() != 1 {
            return Err(Error::Config(format!(
                "{spec} is not a one-dimensional hierarchy"
            )));
        }
        if config.widths.len() != spec.nodes() {
            return Err(Error::WidthCount {
                expected: spec.nodes(),
                actual: config.widths.len(),
            });
        }
        if config.mode == UpdateMode::HwFaithful && spec != HierarchySpec::ONE_D_BYTE {
            return Err(Error::HardwareModeUnsupported);
        }
        let seeds = derive_seeds(config.seed, spec.nodes());
        let nodes = config
            .widths
            .iter()
            .zip(seeds)
            .enumerate()
            .map(|(i, (&w, seed))| NodeArray::new(&spec, spec.coordinate_at(i), w, seed))
            .collect();
        Ok(Sketch1D {
            nodes,
            traversal: TraversalStats::default(),
            inflow: vec![0; spec.nodes()],
            total: 0,
            detected: false,
            config,
        })
    }

    pub fn levels(&self) -> usize {
        self.nodes.len()
    }

    pub fn array(&self, level: usize) -> &NodeArray {
        &self.nodes[level]
    }

    /// Direct bucket access for replaying hand-built states.
    pub fn array_mut(&mut self, level: usize) -> &mut NodeArray {
        &mut self.nodes[level]
    }

    /// Total value that has entered each level, including carried
    /// evictions and Detect-time pushes.
    pub fn level_inflow(&self) -> &[u64] {
        &self.inflow
    }

    pub fn update(&mut self, src: u32, value: u64) {
        self.update_probed(src, value, &mut NoProbe);
    }

    pub fn update_probed<P: Probe>(&mut self, src: u32, value: u64, probe: &mut P) {
        self.total += value;
        let hw = self.config.mode == UpdateMode::HwFaithful;
        let touched = self.push_inner(Key::flow(src), value, 0, None, hw, probe);
        self.traversal.record(touched);
    }

    /// Pushes `(key, value)` into `level` and upward with the full-mode
    /// update. The key is generalized to each level on the way.
    pub fn push(&mut self, key: Key, value: u64, level: usize) -> Result<usize> {
        self.check_push(&key, level)?;
        Ok(self.push_inner(key, value, level, None, false, &mut NoProbe))
    }

    /// [`push`](Self::push) with the switch-pipeline semantics.
    pub fn push_hw(&mut self, key: Key, value: u64, level: usize) -> Result<usize> {
        if self.config.spec != HierarchySpec::ONE_D_BYTE {
            return Err(Error::HardwareModeUnsupported);
        }
        self.check_push(&key, level)?;
        Ok(self.push_inner(key, value, level, None, true, &mut NoProbe))
    }

    fn check_push(&self, key: &Key, level: usize) -> Result<()> {
        let spec = &self.config.spec;
        if level >= self.nodes.len() {
            return Err(Error::CoordinateOutOfRange {
                coordinate: level.to_string(),
                depth: spec.depth() as u8,
            });
        }
        spec.generalize(key, spec.coordinate_at(level)).map(|_| ())
    }

    /// Returns the number of arrays touched.
    #[inline]
    fn push_inner<P: Probe>(
        &mut self,
        key: Key,
        value: u64,
        level: usize,
        mut from: Option<usize>,
        hw: bool,
        probe: &mut P,
    ) -> usize {
        let spec = self.config.spec;
        let (mut x, mut v) = (key, value);
        let mut touched = 0;
        for i in level..self.nodes.len() {
            let node = &mut self.nodes[i];
            x = spec.generalize_unchecked(&x, node.coordinate());
            let slot = node.slot(&x);
            probe.inflow(from, i, slot, &x, v);
            self.inflow[i] += v;
            touched += 1;
            let single = node.is_single_key();
            let bucket = node.bucket_mut(slot);
            if single {
                bucket.absorb(x, v);
                break;
            }
            let offer = if hw { bucket.offer_hw(x, v) } else { bucket.offer(x, v) };
            match offer.carry(x, v) {
                Some((k, c)) => {
                    x = k;
                    v = c;
                    from = Some(i);
                }
                None => break,
            }
        }
        touched
    }

    /// Estimated conditioned count of `key` at `level`: the minimum of the
    /// bound in its own bucket and the bounds of its `t` nearest ancestors,
    /// each credited with the cumulative counts collected below it.
    pub fn estimate(&self, key: &Key, level: usize) -> u64 {
        let top = self.nodes.len() - 1;
        let last = (level + self.config.ancestor_depth).min(top);
        estimate_chain(&self.config.spec, &self.nodes, level..=last, key)
    }

    pub fn detect(&mut self, threshold: u64) -> Result<HhhReport> {
        self.detect_probed(threshold, &mut NoProbe)
    }

    pub fn detect_probed<P: Probe>(&mut self, threshold: u64, probe: &mut P) -> Result<HhhReport> {
        if self.detected {
            return Err(Error::AlreadyDetected);
        }
        self.detected = true;
        let spec = self.config.spec;
        let occupancy = self.nodes.iter().map(NodeArray::occupancy).collect();
        let levels = self.nodes.len();
        let mut entries = Vec::new();
        // Cumulative counts of reported descendants, keyed by ancestor.
        let mut below: HashMap<Key, u64> = HashMap::new();
        for i in 0..levels {
            for j in 0..self.nodes[i].width() {
                let bucket = self.nodes[i].buckets()[j];
                if bucket.is_empty() {
                    continue;
                }
                let x = bucket.key;
                let estimate = self.estimate(&x, i);
                probe.estimated(i, j, &x, estimate);
                if estimate >= threshold {
                    let count = estimate + below.get(&x).copied().unwrap_or(0);
                    entries.push(HhhEntry { key: x, count });
                    for a in i + 1..levels {
                        let ancestor = spec.generalize_unchecked(&x, spec.coordinate_at(a));
                        *below.entry(ancestor).or_default() += bucket.cumulative;
                    }
                } else if i + 1 < levels {
                    self.push_inner(x, bucket.cumulative, i + 1, Some(i), false, probe);
                }
            }
        }
        Ok(HhhReport {
            spec,
            threshold,
            entries,
            traversal: self.traversal.clone(),
            occupancy,
        })
    }

    pub fn reset(&mut self) {
        for node in &mut self.nodes {
            node.clear();
        }
        self.traversal.clear();
        self.inflow.fill(0);
        self.total = 0;
        self.detected = false;
    }

    /// Little-endian dump of every bucket, arrays in index order.
    pub fn snapshot(&self) -> Vec<u8> {
        snapshot(&self.nodes)
    }
}

impl HhhSketch for Sketch1D {
    fn spec(&self) -> &HierarchySpec {
        &self.config.spec
    }

    fn config(&self) -> &SketchConfig {
        &self.config
    }

    fn insert(&mut self, src: u32, _dst: u32, value: u64) {
        self.update(src, value);
    }

    fn detect(&mut self, threshold: u64) -> Result<HhhReport> {
        Sketch1D::detect(self, threshold)
    }

    fn reset(&mut self) {
        Sketch1D::reset(self)
    }

    fn total(&self) -> u64 {
        self.total
    }

    fn traversal_stats(&self) -> &TraversalStats {
        &self.traversal
    }

    fn arrays(&self) -> &[NodeArray] {
        &self.nodes
    }
}

/// Estimate along a chain of arrays; the first index holds `key`'s node.
pub(crate) fn estimate_chain(
    spec: &HierarchySpec,
    nodes: &[NodeArray],
    mut chain: impl Iterator<Item = usize>,
    key: &Key,
) -> u64 {
    let Some(first) = chain.next() else {
        return 0;
    };
    let node = &nodes[first];
    let x = spec.generalize_unchecked(key, node.coordinate());
    let (_, own) = node.bucket_for(&x);
    let mut best = own.candidate_bound();
    let mut carried = own.cumulative;
    for index in chain {
        let node = &nodes[index];
        let y = spec.generalize_unchecked(&x, node.coordinate());
        let (_, b) = node.bucket_for(&y);
        let bound = if b.key == y {
            let u = b.candidate_bound() + carried;
            carried += b.cumulative;
            u
        } else {
            b.other_bound() + carried
        };
        best = best.min(bound);
    }
    best
}

/// Per bucket: `src u32, dst u32, coord_src u8, coord_dst u8, V u64, I i64,
/// C u64`, little-endian. The empty key is all-ones.
pub(crate) fn snapshot(nodes: &[NodeArray]) -> Vec<u8> {
    let buckets: usize = nodes.iter().map(NodeArray::width).sum();
    let mut out = Vec::with_capacity(buckets * 34);
    for node in nodes {
        for b in node.buckets() {
            write_bucket(&mut out, b);
        }
    }
    out
}

fn write_bucket(out: &mut Vec<u8>, b: &Bucket) {
    let c = b.key.coordinate();
    out.extend_from_slice(&b.key.src().to_le_bytes());
    out.extend_from_slice(&b.key.dst().to_le_bytes());
    out.push(c.src);
    out.push(c.dst);
    out.extend_from_slice(&b.total.to_le_bytes());
    out.extend_from_slice(&b.indicator.to_le_bytes());
    out.extend_from_slice(&b.cumulative.to_le_bytes());
}
