//! The 2D sketch over the source x destination lattice.
//!
//! Arrays are ordered source-major: node `(s, t)` lives at `s * d + t`, so
//! each source degree `s` owns a column of `d` arrays whose keys generalize
//! only along the destination. A record enters the bottom node `(0, 0)`.
//! Whenever a bottom node `(s, 0)` does not admit the carried key, the pair
//! climbs column `s` like a 1D push and also moves on to the next bottom
//! node `(s + 1, 0)`. Source generalization happens only along the bottom
//! row, and the progression stops at the first bottom node that admits.

use std::collections::HashMap;

use crate::bucket::{derive_seeds, NodeArray, Offer};
use crate::config::{SketchConfig, UpdateMode};
use crate::error::{Error, Result};
use crate::hierarchy::{Coordinate, HierarchySpec, Key};
use crate::probe::{NoProbe, Probe};
use crate::report::{HhhEntry, HhhReport, TraversalStats};
use crate::sketch::{estimate_chain, snapshot, HhhSketch};

#[derive(Clone, Debug)]
pub struct Sketch2D {
    config: SketchConfig,
    depth: usize,
    nodes: Vec<NodeArray>,
    traversal: TraversalStats,
    inflow: Vec<u64>,
    total: u64,
    detected: bool,
}

impl Sketch2D {
    pub fn new(config: SketchConfig) -> Result<Self> {
        let spec = config.spec;
        if spec.dims() != 2 {
            return Err(Error::Config(format!(
                "{spec} is not a two-dimensional hierarchy"
            )));
        }
        if config.mode != UpdateMode::Full {
            return Err(Error::HardwareModeUnsupported);
        }
        if config.widths.len() != spec.nodes() {
            return Err(Error::WidthCount {
                expected: spec.nodes(),
                actual: config.widths.len(),
            });
        }
        let seeds = derive_seeds(config.seed, spec.nodes());
        let nodes = config
            .widths
            .iter()
            .zip(seeds)
            .enumerate()
            .map(|(i, (&w, seed))| NodeArray::new(&spec, spec.coordinate_at(i), w, seed))
            .collect();
        Ok(Sketch2D {
            depth: spec.depth(),
            nodes,
            traversal: TraversalStats::default(),
            inflow: vec![0; spec.nodes()],
            total: 0,
            detected: false,
            config,
        })
    }

    #[inline]
    fn index(&self, s: usize, t: usize) -> usize {
        s * self.depth + t
    }

    pub fn array(&self, c: Coordinate) -> &NodeArray {
        &self.nodes[self.config.spec.node_index(c)]
    }

    pub fn array_mut(&mut self, c: Coordinate) -> &mut NodeArray {
        let i = self.config.spec.node_index(c);
        &mut self.nodes[i]
    }

    /// Total value that has entered each array, by node index.
    pub fn node_inflow(&self) -> &[u64] {
        &self.inflow
    }

    pub fn update(&mut self, src: u32, dst: u32, value: u64) {
        self.update_probed(src, dst, value, &mut NoProbe);
    }

    pub fn update_probed<P: Probe>(&mut self, src: u32, dst: u32, value: u64, probe: &mut P) {
        self.total += value;
        let touched = self.bottom_push(Key::pair(src, dst), value, 0, None, probe);
        self.traversal.record(touched);
    }

    /// Source progression along the bottom row starting at `(start, 0)`.
    fn bottom_push<P: Probe>(
        &mut self,
        key: Key,
        value: u64,
        start: usize,
        mut from: Option<usize>,
        probe: &mut P,
    ) -> usize {
        let spec = self.config.spec;
        let (mut x, mut v) = (key, value);
        let mut touched = 0;
        for s in start..self.depth {
            let idx = self.index(s, 0);
            let node = &mut self.nodes[idx];
            x = spec.generalize_unchecked(&x, node.coordinate());
            let slot = node.slot(&x);
            probe.inflow(from, idx, slot, &x, v);
            self.inflow[idx] += v;
            touched += 1;
            let offer = node.bucket_mut(slot).offer(x, v);
            let carried = match offer {
                Offer::Matched | Offer::Installed => break,
                Offer::Passed => (x, v),
                Offer::Replaced { evicted, count } => (evicted, count),
            };
            touched += self.column_push(s, 1, carried.0, carried.1, Some(idx), probe);
            (x, v) = carried;
            from = Some(idx);
        }
        touched
    }

    /// 1D-style push up column `s` from destination degree `start`. Pairs
    /// leaving the top of a column other than the last are dropped.
    fn column_push<P: Probe>(
        &mut self,
        s: usize,
        start: usize,
        key: Key,
        value: u64,
        mut from: Option<usize>,
        probe: &mut P,
    ) -> usize {
        let spec = self.config.spec;
        let (mut x, mut v) = (key, value);
        let mut touched = 0;
        for t in start..self.depth {
            let idx = self.index(s, t);
            let node = &mut self.nodes[idx];
            x = spec.generalize_unchecked(&x, node.coordinate());
            let slot = node.slot(&x);
            probe.inflow(from, idx, slot, &x, v);
            self.inflow[idx] += v;
            touched += 1;
            let single = node.is_single_key();
            let bucket = node.bucket_mut(slot);
            if single {
                bucket.absorb(x, v);
                break;
            }
            match bucket.offer(x, v).carry(x, v) {
                Some((k, c)) => {
                    x = k;
                    v = c;
                    from = Some(idx);
                }
                None => break,
            }
        }
        touched
    }

    /// Estimate for `key` at node `c`, consulting destination-direction
    /// ancestors within the same column.
    pub fn estimate(&self, key: &Key, c: Coordinate) -> u64 {
        let (s, t) = (c.src as usize, c.dst as usize);
        let last = (t + self.config.ancestor_depth).min(self.depth - 1);
        let base = s * self.depth;
        estimate_chain(&self.config.spec, &self.nodes, (t..=last).map(|u| base + u), key)
    }

    pub fn detect(&mut self, threshold: u64) -> Result<HhhReport> {
        self.detect_probed(threshold, &mut NoProbe)
    }

    /// Column by column, bottom-up within each column. A reported key's
    /// count adds back the cumulative counts of reported descendants that
    /// its column never saw: those lower in the same column, and those held
    /// at bottom nodes of earlier columns.
    pub fn detect_probed<P: Probe>(&mut self, threshold: u64, probe: &mut P) -> Result<HhhReport> {
        if self.detected {
            return Err(Error::AlreadyDetected);
        }
        self.detected = true;
        let spec = self.config.spec;
        let d = self.depth;
        let occupancy = self.nodes.iter().map(NodeArray::occupancy).collect();
        let mut entries = Vec::new();
        let mut below: HashMap<Key, u64> = HashMap::new();
        for s in 0..d {
            for t in 0..d {
                let idx = self.index(s, t);
                let coord = Coordinate::two_d(s as u8, t as u8);
                for j in 0..self.nodes[idx].width() {
                    let bucket = self.nodes[idx].buckets()[j];
                    if bucket.is_empty() {
                        continue;
                    }
                    let x = bucket.key;
                    let estimate = self.estimate(&x, coord);
                    probe.estimated(idx, j, &x, estimate);
                    let c = bucket.cumulative;
                    if estimate >= threshold {
                        let count = estimate + below.get(&x).copied().unwrap_or(0);
                        entries.push(HhhEntry { key: x, count });
                        for u in t + 1..d {
                            let a = Coordinate::two_d(s as u8, u as u8);
                            *below.entry(spec.generalize_unchecked(&x, a)).or_default() += c;
                        }
                        if t == 0 {
                            for s2 in s + 1..d {
                                for u in 0..d {
                                    let a = Coordinate::two_d(s2 as u8, u as u8);
                                    *below.entry(spec.generalize_unchecked(&x, a)).or_default() +=
                                        c;
                                }
                            }
                        }
                    } else {
                        if t + 1 < d {
                            self.column_push(s, t + 1, x, c, Some(idx), probe);
                        }
                        if t == 0 && s + 1 < d {
                            self.bottom_push(x, c, s + 1, Some(idx), probe);
                        }
                    }
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

    pub fn snapshot(&self) -> Vec<u8> {
        snapshot(&self.nodes)
    }
}

impl HhhSketch for Sketch2D {
    fn spec(&self) -> &HierarchySpec {
        &self.config.spec
    }

    fn config(&self) -> &SketchConfig {
        &self.config
    }

    fn insert(&mut self, src: u32, dst: u32, value: u64) {
        self.update(src, dst, value);
    }

    fn detect(&mut self, threshold: u64) -> Result<HhhReport> {
        Sketch2D::detect(self, threshold)
    }

    fn reset(&mut self) {
        Sketch2D::reset(self)
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
