//! The exact oracle against a second, deliberately naive implementation
//! that walks the definition key by key.

use std::collections::HashSet;

use mvpipe::oracle::{conditioned_count, exact_counts, exact_hhh_at, flow_key, FlowTable};
use mvpipe::traces::PacketRecord;
use mvpipe::{HierarchySpec, Key};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_trace(seed: u64, n: usize) -> Vec<PacketRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hot: Vec<(u32, u32)> = (0..4).map(|_| (rng.random_range(0..16), rng.random_range(0..16))).collect();
    (0..n)
        .map(|_| {
            let (s, d) = if rng.random_bool(0.5) {
                hot[rng.random_range(0..hot.len())]
            } else {
                (rng.random_range(0..16), rng.random_range(0..16))
            };
            PacketRecord::new(s, d, rng.random_range(1..4))
        })
        .collect()
}

/// Definition 1 straight from the text: level by level, conditioned counts
/// by scanning records against the set so far.
fn naive_hhh(spec: &HierarchySpec, records: &[PacketRecord], threshold: u64) -> Vec<(Key, u64)> {
    let keys = spec.enumerate_all_keys();
    let mut set: Vec<Key> = Vec::new();
    let mut out = Vec::new();
    for level in 0..=spec.max_level() {
        let frozen = set.clone();
        for x in keys.iter().filter(|k| k.level() == level) {
            let c = conditioned_count(spec, x, &frozen, records);
            if c >= threshold && c > 0 {
                set.push(*x);
                out.push((*x, c));
            }
        }
    }
    out
}

#[test]
fn counts_agree_with_per_key_scan() {
    for dims in [1, 2] {
        let spec = HierarchySpec::toy(dims).unwrap();
        for seed in 0..10 {
            let recs = random_trace(seed, 100);
            let exact = exact_counts(&recs, &spec);
            for x in spec.enumerate_all_keys() {
                let scan: u64 = recs
                    .iter()
                    .filter(|r| spec.covers(&flow_key(&spec, r), &x))
                    .map(|r| r.value as u64)
                    .sum();
                assert_eq!(exact.count(&x), scan, "{}", spec.render(&x));
            }
            let root = spec.key_at(0, 0, spec.top()).unwrap();
            assert_eq!(exact.count(&root), exact.total);
        }
    }
}

#[test]
fn hhh_sets_agree_with_the_definition() {
    for dims in [1, 2] {
        let spec = HierarchySpec::toy(dims).unwrap();
        for seed in 0..40 {
            let recs = random_trace(seed, 200);
            let table = FlowTable::from_records(&spec, &recs);
            for th in [1, 5, 20, 60, 150] {
                let fast = exact_hhh_at(&spec, &table, th);
                let got: Vec<(Key, u64)> = fast.entries.iter().map(|e| (e.key, e.conditioned)).collect();
                let mut want = naive_hhh(&spec, &recs, th);
                want.sort_by_key(|(k, _)| (k.level(), *k));
                let mut got_sorted = got.clone();
                got_sorted.sort_by_key(|(k, _)| (k.level(), *k));
                assert_eq!(got_sorted, want, "dims {dims} seed {seed} threshold {th}");
                let exact = exact_counts(&recs, &spec);
                for e in &fast.entries {
                    assert_eq!(e.count, exact.count(&e.key));
                    assert!(e.conditioned <= e.count);
                }
            }
        }
    }
}

#[test]
fn one_d_conditioned_counts_never_exceed_the_total() {
    let spec = HierarchySpec::toy(1).unwrap();
    for seed in 0..20 {
        let recs = random_trace(seed, 300);
        let table = FlowTable::from_records(&spec, &recs);
        let t = exact_hhh_at(&spec, &table, 10);
        let sum: u64 = t.entries.iter().map(|e| e.conditioned).sum();
        assert!(sum <= t.total);
        // Levels never go backwards.
        let levels: Vec<usize> = t.entries.iter().map(|e| e.level).collect();
        assert!(levels.windows(2).all(|w| w[0] <= w[1]));
        let members: HashSet<Key> = t.keys();
        for e in &t.entries {
            let below: Vec<Key> = members.iter().filter(|k| k.level() < e.level).copied().collect();
            assert_eq!(conditioned_count(&spec, &e.key, &below, &recs), e.conditioned);
        }
    }
}
