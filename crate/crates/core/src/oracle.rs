//! Exact ground truth and shadow trackers.
//!
//! Everything here favors obviousness over speed: plain hash maps over every
//! generalization of every flow.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::config::SketchConfig;
use crate::error::{Error, Result};
use crate::hierarchy::{Coordinate, HierarchySpec, Key};
use crate::lattice::Sketch2D;
use crate::probe::Probe;
use crate::report::{HhhEntry, HhhReport};
use crate::sketch::{HhhSketch, Sketch1D};
use crate::traces::PacketRecord;

/// Canonical fully specific key of a record.
pub fn flow_key(spec: &HierarchySpec, r: &PacketRecord) -> Key {
    spec.key_at(r.src, r.dst, Coordinate::ROOT)
        .expect("root is in every hierarchy")
}

/// Absolute threshold for a fraction of the stream total: `ceil(phi * total)`.
pub fn threshold_for(phi: f64, total: u64) -> u64 {
    let t = phi * total as f64;
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        t.ceil() as u64
    }
}

/// Per-flow totals at the bottom node, sorted by key.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlowTable {
    pub flows: Vec<(Key, u64)>,
    pub total: u64,
}

impl FlowTable {
    pub fn from_records(spec: &HierarchySpec, records: &[PacketRecord]) -> Self {
        let mut m: HashMap<Key, u64> = HashMap::new();
        let mut total = 0;
        for r in records {
            *m.entry(flow_key(spec, r)).or_default() += r.value as u64;
            total += r.value as u64;
        }
        let mut flows: Vec<(Key, u64)> = m.into_iter().collect();
        flows.sort_unstable();
        FlowTable { flows, total }
    }
}

/// `S(x)` for every key with a non-zero count, at every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCounts {
    pub spec: HierarchySpec,
    pub counts: HashMap<Key, u64>,
    pub total: u64,
}

impl ExactCounts {
    pub fn count(&self, key: &Key) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }
}

pub fn exact_counts(records: &[PacketRecord], spec: &HierarchySpec) -> ExactCounts {
    let table = FlowTable::from_records(spec, records);
    let mut counts = HashMap::new();
    for &(f, c) in &table.flows {
        for node in spec.coordinates() {
            *counts.entry(spec.generalize_unchecked(&f, node)).or_default() += c;
        }
    }
    ExactCounts {
        spec: *spec,
        counts,
        total: table.total,
    }
}

/// One member of the exact HHH set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrueHhh {
    pub key: Key,
    pub level: usize,
    /// Conditioned count when the key entered the set.
    pub conditioned: u64,
    /// Unconditioned `S(x)`.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HhhTruth {
    pub spec: HierarchySpec,
    pub threshold: u64,
    pub total: u64,
    /// Members in level order, then key order.
    pub entries: Vec<TrueHhh>,
}

impl HhhTruth {
    pub fn keys(&self) -> HashSet<Key> {
        self.entries.iter().map(|e| e.key).collect()
    }

    pub fn get(&self, key: &Key) -> Option<&TrueHhh> {
        self.entries.iter().find(|e| e.key == *key)
    }

    /// The truth as a report, with exact counts.
    pub fn as_report(&self) -> HhhReport {
        HhhReport {
            spec: self.spec,
            threshold: self.threshold,
            entries: self
                .entries
                .iter()
                .map(|e| HhhEntry {
                    key: e.key,
                    count: e.count,
                })
                .collect(),
            traversal: Default::default(),
            occupancy: Vec::new(),
        }
    }

    /// `key,level,exact_count,conditioned_count` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,level,exact_count,conditioned_count\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.spec.render(&e.key),
                e.level,
                e.count,
                e.conditioned
            );
        }
        out
    }
}

/// Exact HHH set at `ceil(phi * total)`.
pub fn exact_hhh(records: &[PacketRecord], spec: &HierarchySpec, phi: f64) -> HhhTruth {
    let table = FlowTable::from_records(spec, records);
    let threshold = threshold_for(phi, table.total);
    exact_hhh_at(spec, &table, threshold)
}

/// Exact HHH set at an absolute threshold, built level by level. Each level
/// re-scans the flows not yet covered by a member of the set.
pub fn exact_hhh_at(spec: &HierarchySpec, table: &FlowTable, threshold: u64) -> HhhTruth {
    let mut covered = vec![false; table.flows.len()];
    let mut entries = Vec::new();
    for level in 0..=spec.max_level() {
        let nodes = spec.nodes_at_level(level);
        let mut cond: HashMap<Key, u64> = HashMap::new();
        for (i, &(f, c)) in table.flows.iter().enumerate() {
            if covered[i] {
                continue;
            }
            for &n in &nodes {
                *cond.entry(spec.generalize_unchecked(&f, n)).or_default() += c;
            }
        }
        let mut fresh: Vec<(Key, u64)> =
            cond.into_iter().filter(|&(_, c)| c >= threshold).collect();
        if fresh.is_empty() {
            continue;
        }
        fresh.sort_unstable();
        let members: HashSet<Key> = fresh.iter().map(|e| e.0).collect();
        for (i, &(f, _)) in table.flows.iter().enumerate() {
            if !covered[i]
                && nodes
                    .iter()
                    .any(|&n| members.contains(&spec.generalize_unchecked(&f, n)))
            {
                covered[i] = true;
            }
        }
        entries.extend(fresh.into_iter().map(|(key, conditioned)| TrueHhh {
            key,
            level,
            conditioned,
            count: 0,
        }));
    }
    let index: HashMap<Key, usize> = entries.iter().enumerate().map(|(i, e)| (e.key, i)).collect();
    let mut member_nodes: Vec<Coordinate> = entries.iter().map(|e| e.key.coordinate()).collect();
    member_nodes.sort_unstable();
    member_nodes.dedup();
    for &(f, c) in &table.flows {
        for &n in &member_nodes {
            if let Some(&i) = index.get(&spec.generalize_unchecked(&f, n)) {
                entries[i].count += c;
            }
        }
    }
    HhhTruth {
        spec: *spec,
        threshold,
        total: table.total,
        entries,
    }
}

/// `S_H(x)`: value of flows under `x` that no member of `hhh` covers.
pub fn conditioned_count(
    spec: &HierarchySpec,
    x: &Key,
    hhh: &[Key],
    records: &[PacketRecord],
) -> u64 {
    records
        .iter()
        .filter(|r| {
            let f = flow_key(spec, r);
            spec.covers(&f, x) && !hhh.iter().any(|y| spec.covers(&f, y))
        })
        .map(|r| r.value as u64)
        .sum()
}

/// How a shadow check failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `Δ(K) < C`.
    CandidateBelowCumulative,
    /// `Δ(K) > ⌊(V+I)/2⌋`.
    CandidateAboveBound,
    /// `Δ(y) > ⌊(V−I)/2⌋` for a non-candidate `y`.
    OtherAboveBound,
    /// The Δ entries of a bucket do not sum to its `V`.
    Conservation,
    /// A Detect estimate fell below the key's true Δ.
    Underestimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: usize,
    pub slot: usize,
    pub key: Key,
    pub kind: ViolationKind,
    pub expected: u64,
    pub actual: u64,
}

/// Exact per-bucket, per-key inflow `Δ`, fed by the sketch's own probe
/// events so it follows exactly the same hash and carry decisions.
#[derive(Clone, Debug)]
pub struct ShadowBucketTracker {
    config: SketchConfig,
    deltas: HashMap<(usize, usize), HashMap<Key, u64>>,
    estimate_violations: Vec<Violation>,
}

impl ShadowBucketTracker {
    pub fn new(config: SketchConfig) -> Self {
        ShadowBucketTracker {
            config,
            deltas: HashMap::new(),
            estimate_violations: Vec::new(),
        }
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn delta(&self, node: usize, slot: usize, key: &Key) -> u64 {
        self.deltas
            .get(&(node, slot))
            .and_then(|m| m.get(key))
            .copied()
            .unwrap_or(0)
    }

    /// All Δ entries of one bucket.
    pub fn bucket(&self, node: usize, slot: usize) -> Option<&HashMap<Key, u64>> {
        self.deltas.get(&(node, slot))
    }

    /// Estimates observed during Detect that fell below Δ.
    pub fn estimate_violations(&self) -> &[Violation] {
        &self.estimate_violations
    }

    /// Checks every bucket of `sketch` against its Δ map: conservation and
    /// the per-bucket bounds.
    pub fn check_buckets(&self, sketch: &dyn HhhSketch) -> Result<Vec<Violation>> {
        if *sketch.config() != self.config {
            return Err(Error::ConfigMismatch);
        }
        let empty = HashMap::new();
        let mut out = Vec::new();
        for (node, array) in sketch.arrays().iter().enumerate() {
            for (slot, b) in array.buckets().iter().enumerate() {
                let deltas = self.deltas.get(&(node, slot)).unwrap_or(&empty);
                let mut push = |key: Key, kind, expected, actual| {
                    out.push(Violation {
                        node,
                        slot,
                        key,
                        kind,
                        expected,
                        actual,
                    })
                };
                let sum: u64 = deltas.values().sum();
                if sum != b.total {
                    push(b.key, ViolationKind::Conservation, b.total, sum);
                }
                if b.is_empty() {
                    continue;
                }
                let own = deltas.get(&b.key).copied().unwrap_or(0);
                if own < b.cumulative {
                    push(b.key, ViolationKind::CandidateBelowCumulative, b.cumulative, own);
                }
                if own > b.candidate_bound() {
                    push(b.key, ViolationKind::CandidateAboveBound, b.candidate_bound(), own);
                }
                for (&k, &d) in deltas {
                    if k != b.key && d > b.other_bound() {
                        push(k, ViolationKind::OtherAboveBound, b.other_bound(), d);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Probe for ShadowBucketTracker {
    fn inflow(&mut self, _from: Option<usize>, node: usize, slot: usize, key: &Key, value: u64) {
        *self
            .deltas
            .entry((node, slot))
            .or_default()
            .entry(*key)
            .or_default() += value;
    }

    fn estimated(&mut self, node: usize, slot: usize, key: &Key, estimate: u64) {
        let d = self.delta(node, slot, key);
        if estimate < d {
            self.estimate_violations.push(Violation {
                node,
                slot,
                key: *key,
                kind: ViolationKind::Underestimate,
                expected: d,
                actual: estimate,
            });
        }
    }
}

/// Either sketch shape behind one type, with probed entry points.
#[derive(Clone, Debug)]
pub enum AnySketch {
    One(Sketch1D),
    Two(Sketch2D),
}

impl AnySketch {
    pub fn new(config: SketchConfig) -> Result<Self> {
        if config.spec.dims() == 1 {
            Ok(AnySketch::One(Sketch1D::new(config)?))
        } else {
            Ok(AnySketch::Two(Sketch2D::new(config)?))
        }
    }

    pub fn as_dyn(&self) -> &dyn HhhSketch {
        match self {
            AnySketch::One(s) => s,
            AnySketch::Two(s) => s,
        }
    }

    pub fn as_dyn_mut(&mut self) -> &mut dyn HhhSketch {
        match self {
            AnySketch::One(s) => s,
            AnySketch::Two(s) => s,
        }
    }

    pub fn update_probed<P: Probe>(&mut self, r: &PacketRecord, probe: &mut P) {
        match self {
            AnySketch::One(s) => s.update_probed(r.src, r.value as u64, probe),
            AnySketch::Two(s) => s.update_probed(r.src, r.dst, r.value as u64, probe),
        }
    }

    pub fn detect_probed<P: Probe>(&mut self, threshold: u64, probe: &mut P) -> Result<HhhReport> {
        match self {
            AnySketch::One(s) => s.detect_probed(threshold, probe),
            AnySketch::Two(s) => s.detect_probed(threshold, probe),
        }
    }
}

/// Replays `records` through a fresh sketch built from `config` with a
/// shadow tracker attached. Returns both so callers can run further checks.
pub fn shadow_replay(
    records: &[PacketRecord],
    config: &SketchConfig,
) -> Result<(ShadowBucketTracker, AnySketch)> {
    let mut sketch = AnySketch::new(config.clone())?;
    let mut shadow = ShadowBucketTracker::new(config.clone());
    for r in records {
        sketch.update_probed(r, &mut shadow);
    }
    Ok((shadow, sketch))
}

/// Replays `records` in `checkpoints` equal chunks, checking every bucket
/// after each chunk, then runs Detect at `threshold` with the estimate check
/// attached and checks the buckets once more. Returns all violations.
pub fn shadow_audit(
    records: &[PacketRecord],
    config: &SketchConfig,
    checkpoints: usize,
    threshold: u64,
) -> Result<Vec<Violation>> {
    let mut sketch = AnySketch::new(config.clone())?;
    let mut shadow = ShadowBucketTracker::new(config.clone());
    let chunk = records.len().div_ceil(checkpoints.max(1)).max(1);
    let mut out = Vec::new();
    for part in records.chunks(chunk) {
        for r in part {
            sketch.update_probed(r, &mut shadow);
        }
        out.extend(shadow.check_buckets(sketch.as_dyn())?);
    }
    sketch.detect_probed(threshold, &mut shadow)?;
    out.extend(shadow.estimate_violations.iter().copied());
    out.extend(shadow.check_buckets(sketch.as_dyn())?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs(spec: &HierarchySpec, flows: &[(&str, u32)]) -> Vec<PacketRecord> {
        flows
            .iter()
            .map(|&(a, v)| {
                let k = spec.parse_key(&format!("{a}/32")).unwrap();
                PacketRecord::new(k.src(), 0, v)
            })
            .collect()
    }

    #[test]
    fn sums_over_descendants() {
        let spec = HierarchySpec::ONE_D_BYTE;
        let r = recs(&spec, &[("1.2.3.4", 6), ("1.2.3.5", 3)]);
        let e = exact_counts(&r, &spec);
        assert_eq!(e.count(&spec.parse_key("1.2.3.0/24").unwrap()), 9);
        assert_eq!(e.count(&spec.parse_key("0.0.0.0/0").unwrap()), e.total);
        let empty = exact_counts(&[], &spec);
        assert_eq!(empty.total, 0);
        assert!(empty.counts.is_empty());
    }

    #[test]
    fn definition_by_hand() {
        let spec = HierarchySpec::ONE_D_BYTE;
        let r = recs(&spec, &[("1.2.3.4", 6), ("1.2.3.5", 3), ("9.9.9.9", 2)]);
        let t = exact_hhh_at(&spec, &FlowTable::from_records(&spec, &r), 5);
        let got: Vec<(String, usize, u64, u64)> = t
            .entries
            .iter()
            .map(|e| (spec.render(&e.key), e.level, e.conditioned, e.count))
            .collect();
        assert_eq!(
            got,
            vec![
                ("1.2.3.4/32".to_string(), 0, 6, 6),
                ("0.0.0.0/0".to_string(), 4, 5, 11),
            ]
        );
        let h = [spec.parse_key("1.2.3.4/32").unwrap()];
        let root = spec.parse_key("0.0.0.0/0").unwrap();
        assert_eq!(conditioned_count(&spec, &root, &h, &r), 5);
        assert_eq!(conditioned_count(&spec, &root, &[], &r), 11);
        assert_eq!(conditioned_count(&spec, &root, &[root], &r), 0);
        assert!(t.to_csv().starts_with("key,level,exact_count,conditioned_count\n1.2.3.4/32,0,6,6\n"));
    }

    #[test]
    fn degenerate_sets() {
        let spec = HierarchySpec::ONE_D_BYTE;
        let r = recs(&spec, &[("1.2.3.4", 3)]);
        assert!(exact_hhh_at(&spec, &FlowTable::from_records(&spec, &r), 4)
            .entries
            .is_empty());
        let same = recs(&spec, &[("1.2.3.4", 1); 10]);
        let t = exact_hhh(&same, &spec, 0.5);
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].level, 0);
    }

    #[test]
    fn thresholds_round_up() {
        assert_eq!(threshold_for(0.01, 500_000), 5000);
        assert_eq!(threshold_for(0.05, 1000), 50);
        assert_eq!(threshold_for(0.05, 1001), 51);
        assert_eq!(threshold_for(0.5, 0), 0);
    }

    #[test]
    fn single_flow_shadow() {
        let cfg = SketchConfig::uniform(HierarchySpec::ONE_D_BYTE, 8).unwrap();
        let r = vec![PacketRecord::new(0x0102_0304, 0, 4)];
        let (shadow, sketch) = shadow_replay(&r, &cfg).unwrap();
        let key = Key::flow(0x0102_0304);
        let (slot, _) = sketch.as_dyn().arrays()[0].bucket_for(&key);
        assert_eq!(shadow.delta(0, slot, &key), 4);
        assert!(shadow.check_buckets(sketch.as_dyn()).unwrap().is_empty());
        let other = SketchConfig::uniform(HierarchySpec::ONE_D_BYTE, 9).unwrap();
        let (_, s2) = shadow_replay(&r, &other).unwrap();
        assert!(matches!(
            shadow.check_buckets(s2.as_dyn()),
            Err(Error::ConfigMismatch)
        ));
    }

    #[test]
    fn collisions_sum_to_v() {
        let cfg = SketchConfig::uniform(HierarchySpec::ONE_D_BYTE, 1).unwrap();
        let r = vec![
            PacketRecord::new(1, 0, 3),
            PacketRecord::new(2, 0, 5),
            PacketRecord::new(1, 0, 1),
        ];
        let (shadow, sketch) = shadow_replay(&r, &cfg).unwrap();
        let b = shadow.bucket(0, 0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.values().sum::<u64>(), sketch.as_dyn().arrays()[0].buckets()[0].total);
        assert!(shadow.check_buckets(sketch.as_dyn()).unwrap().is_empty());
    }
}
