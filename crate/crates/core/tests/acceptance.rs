//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::HashSet;
use std::process::Command;
use std::time::{Duration, Instant};

use mvpipe::bucket::Bucket;
use mvpipe::config::allocate_bucket_widths;
use mvpipe::metrics::{accuracy, median, throughput};
use mvpipe::oracle::{exact_hhh_at, flow_key, shadow_audit, threshold_for, AnySketch, FlowTable};
use mvpipe::probe::{AccessLog, NoProbe};
use mvpipe::traces::{gen_skew_controlled, gen_zipf, split_epochs, PacketRecord};
use mvpipe::{HierarchySpec, Key, SketchConfig, UpdateMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

/// Textbook majority vote extended with the candidate's own running count.
#[derive(Clone, Copy, Default)]
struct Mjrty {
    cand: Option<u8>,
    counter: i64,
    own: u64,
    seen: u64,
}

impl Mjrty {
    fn step(&mut self, x: u8) {
        self.seen += 1;
        if self.cand == Some(x) {
            self.counter += 1;
            self.own += 1;
        } else if self.counter == 0 {
            self.cand = Some(x);
            self.counter = 1;
            self.own = 1;
        } else {
            self.counter -= 1;
        }
    }
}

fn c1_mjrty() -> Outcome {
    let start = Instant::now();
    let keys = [Key::flow(1), Key::flow(2), Key::flow(3)];
    let mut checked = 0u64;
    let mut bad = 0u64;
    for len in 0..=8u32 {
        for code in 0..3u32.pow(len) {
            let mut b = Bucket::EMPTY;
            let mut m = Mjrty::default();
            let mut c = code;
            for _ in 0..len {
                let x = (c % 3) as u8;
                c /= 3;
                b.offer(keys[x as usize], 1);
                m.step(x);
                let same = b.key == m.cand.map_or(Key::EMPTY, |k| keys[k as usize])
                    && b.indicator == m.counter
                    && b.cumulative == m.own
                    && b.total == m.seen;
                if !same {
                    bad += 1;
                }
            }
            checked += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        bad == 0 && within(t, Duration::from_secs(1)),
        format!("{checked} sequences, {bad} mismatched steps, {t:.2?}"),
    )
}

fn c2_lemma1() -> Outcome {
    let start = Instant::now();
    let cfg = SketchConfig::uniform(HierarchySpec::ONE_D_BYTE, 64).unwrap();
    let mut violations = 0;
    for seed in 0..20 {
        let trace = gen_zipf(10_000, 1.0, 5_000, seed).unwrap();
        let th = threshold_for(0.01, trace.total());
        violations += shadow_audit(&trace.records, &cfg.clone().seed(seed), 10, th)
            .unwrap()
            .len();
    }
    let t = start.elapsed();
    outcome(
        violations == 0 && within(t, Duration::from_secs(30)),
        format!("20 traces x 10 checkpoints, {violations} violations, {t:.2?}"),
    )
}

/// Random trace over the toy address space with a random skew.
fn toy_trace(seed: u64) -> Vec<PacketRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = rng.random_range(0.3..2.0);
    let universe = rng.random_range(4..=120);
    gen_zipf(1000, alpha, universe, seed).unwrap().records
}

struct ToyRuns {
    coverage_violations: usize,
    over_violations: usize,
    reported_true: usize,
}

fn toy_runs(dims: u8) -> ToyRuns {
    let spec = HierarchySpec::toy(dims).unwrap();
    let all = spec.enumerate_all_keys();
    let mut runs = ToyRuns {
        coverage_violations: 0,
        over_violations: 0,
        reported_true: 0,
    };
    for seed in 0..100u64 {
        let records = toy_trace(seed);
        let width = [1, 2, 3, 4][(seed % 4) as usize];
        let cfg = SketchConfig::uniform(spec, width).unwrap().seed(seed);
        let mut sketch = AnySketch::new(cfg).unwrap();
        for r in &records {
            sketch.update_probed(r, &mut NoProbe);
        }
        let table = FlowTable::from_records(&spec, &records);
        let th = threshold_for(0.05, table.total);
        let report = sketch.detect_probed(th, &mut NoProbe).unwrap();
        let reported: HashSet<Key> = report.entries.iter().map(|e| e.key).collect();
        let open: Vec<(Key, u64)> = table
            .flows
            .iter()
            .filter(|(f, _)| !reported.iter().any(|p| spec.covers(f, p)))
            .copied()
            .collect();
        for x in &all {
            if reported.contains(x) {
                continue;
            }
            let cond: u64 = open
                .iter()
                .filter(|(f, _)| spec.covers(f, x))
                .map(|e| e.1)
                .sum();
            if cond >= th {
                runs.coverage_violations += 1;
            }
        }
        let truth = exact_hhh_at(&spec, &table, th);
        for e in &report.entries {
            if let Some(t) = truth.get(&e.key) {
                runs.reported_true += 1;
                if e.count < t.count {
                    runs.over_violations += 1;
                }
            }
        }
    }
    runs
}

fn c3_c4_coverage() -> (Outcome, Outcome) {
    let start = Instant::now();
    let one = toy_runs(1);
    let two = toy_runs(2);
    let t = start.elapsed();
    let c3 = outcome(
        one.coverage_violations + two.coverage_violations == 0
            && within(t, Duration::from_secs(60)),
        format!(
            "1D {} / 2D {} uncovered keys at or above threshold, {t:.2?}",
            one.coverage_violations, two.coverage_violations
        ),
    );
    let c4 = outcome(
        one.over_violations == 0,
        format!(
            "{} reported true HHHs, {} underestimated",
            one.reported_true, one.over_violations
        ),
    );
    (c3, c4)
}

const C5_N: usize = 5_000_000;
const C5_TOPK: usize = 500;
const C5_PHIS: [f64; 3] = [0.0005, 0.0007, 0.001];

struct AccuracyRun {
    precision: f64,
    recall: f64,
    rel_error: f64,
    true_count: usize,
}

fn accuracy_runs(records: &[PacketRecord], mode: UpdateMode) -> Vec<AccuracyRun> {
    let spec = HierarchySpec::ONE_D_BYTE;
    let cfg = SketchConfig::with_memory(spec, 256 * 1024).unwrap().mode(mode);
    let mut sketch = AnySketch::new(cfg).unwrap();
    for r in records {
        sketch.update_probed(r, &mut NoProbe);
    }
    let table = FlowTable::from_records(&spec, records);
    C5_PHIS
        .iter()
        .map(|&phi| {
            let th = threshold_for(phi, table.total);
            let truth = exact_hhh_at(&spec, &table, th);
            let report = sketch.clone().detect_probed(th, &mut NoProbe).unwrap();
            let a = accuracy(&report, &truth).unwrap();
            AccuracyRun {
                precision: a.precision,
                recall: a.recall,
                rel_error: a.relative_error,
                true_count: truth.entries.len(),
            }
        })
        .collect()
}

fn c5_c8_accuracy() -> (Outcome, Outcome) {
    let start = Instant::now();
    let trace = gen_skew_controlled(C5_N, C5_TOPK, 0.54, 5).unwrap();
    let full = accuracy_runs(&trace.records, UpdateMode::Full);
    let t = start.elapsed();
    let min_p = full.iter().map(|r| r.precision).fold(1.0, f64::min);
    let min_r = full.iter().map(|r| r.recall).fold(1.0, f64::min);
    let med = median(&mut full.iter().map(|r| r.rel_error).collect::<Vec<_>>());
    let counts: Vec<usize> = full.iter().map(|r| r.true_count).collect();
    let counts_ok = counts.iter().all(|&c| (200..=1000).contains(&c));
    let c5 = outcome(
        counts_ok
            && min_p >= 0.90
            && min_r >= 0.90
            && med <= 0.05
            && within(t, Duration::from_secs(120)),
        format!(
            "true HHHs {counts:?}, min precision {min_p:.4}, min recall {min_r:.4}, median rel error {med:.4}, {t:.2?}"
        ),
    );
    let hw = accuracy_runs(&trace.records, UpdateMode::HwFaithful);
    let dp = full
        .iter()
        .zip(&hw)
        .map(|(a, b)| (a.precision - b.precision).abs())
        .fold(0.0, f64::max);
    let dr = full
        .iter()
        .zip(&hw)
        .map(|(a, b)| (a.recall - b.recall).abs())
        .fold(0.0, f64::max);
    let hw_p: Vec<String> = hw.iter().map(|r| format!("{:.4}/{:.4}", r.precision, r.recall)).collect();
    let c8 = outcome(
        dp <= 0.05 && dr <= 0.05,
        format!("max |dP| {dp:.4}, max |dR| {dr:.4}, hw precision/recall {hw_p:?}"),
    );
    (c5, c8)
}

/// One-node fraction and mean over every array touched, then the same two
/// figures counting only arrays where the record's own key was offered.
fn traversal(fraction: f64) -> (f64, f64, f64, f64) {
    let spec = HierarchySpec::ONE_D_BYTE;
    let trace = gen_skew_controlled(1_000_000, 1000, fraction, 6).unwrap();
    let cfg = SketchConfig::with_memory(spec, 256 * 1024).unwrap();
    let mut sketch = AnySketch::new(cfg).unwrap();
    let mut log = AccessLog::default();
    let (mut own_one, mut own_sum) = (0u64, 0u64);
    for r in &trace.records {
        log.events.clear();
        sketch.update_probed(r, &mut log);
        let flow = flow_key(&spec, r);
        let own = log.events.iter().filter(|e| spec.covers(&flow, &e.key)).count() as u64;
        own_one += u64::from(own == 1);
        own_sum += own;
    }
    let stats = sketch.as_dyn().traversal_stats();
    let n = trace.len() as f64;
    (stats.fraction(1), stats.mean(), own_one as f64 / n, own_sum as f64 / n)
}

fn c6_traversal() -> Outcome {
    let (one, mean, own_one, own_mean) = traversal(0.54);
    let (one10, mean10, _, own_mean10) = traversal(0.10);
    outcome(
        one >= 0.60 && mean <= 2.0 && mean10 > mean,
        format!(
            "54%: one-node {one:.4}, mean {mean:.4}; 10%: one-node {one10:.4}, mean {mean10:.4} \
             (own key only, not scored: 54% one-node {own_one:.4} mean {own_mean:.4}, 10% mean {own_mean10:.4})"
        ),
    )
}

fn c7_convergence() -> Outcome {
    let spec = HierarchySpec::ONE_D_BYTE;
    let cfg = SketchConfig::with_memory(spec, 256 * 1024).unwrap();
    let base = gen_skew_controlled(5_000_000, 500, 0.54, 7).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for len in [500_000, 1_000_000, 5_000_000] {
        let trace = split_epochs(base.clone(), len).unwrap();
        let (mut p, mut r) = (1.0f64, 1.0f64);
        for epoch in trace.epochs() {
            let mut sketch = AnySketch::new(cfg.clone()).unwrap();
            for rec in epoch {
                sketch.update_probed(rec, &mut NoProbe);
            }
            let table = FlowTable::from_records(&spec, epoch);
            let th = threshold_for(0.0007, table.total);
            let truth = exact_hhh_at(&spec, &table, th);
            let a = accuracy(&sketch.detect_probed(th, &mut NoProbe).unwrap(), &truth).unwrap();
            p = p.min(a.precision);
            r = r.min(a.recall);
        }
        pass &= p >= 0.95 && r >= 0.95;
        lines.push(format!("{len}: P {p:.4} R {r:.4}"));
    }
    outcome(pass, format!("worst epoch per size: {}", lines.join(", ")))
}

fn c9_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_mvpipe");
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.bin");
    let ok = Command::new(bin)
        .args(["gen", "skew", "--n", "200000", "--topk", "100", "--fraction", "0.5", "--seed", "3"])
        .arg("--out")
        .arg(&trace)
        .status()
        .unwrap()
        .success();
    if !ok {
        return outcome(false, "trace generation failed");
    }
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(bin)
            .arg("run")
            .arg("--trace")
            .arg(&trace)
            .arg("--out")
            .arg(&out)
            .args(["--format", "both", "--phi", "0.002", "--epoch-len", "50000"])
            .status()
            .unwrap();
        assert!(status.success());
        let mut files: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files
            .iter()
            .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap()))
            .collect::<Vec<_>>()
    };
    let a = run("a");
    let b = run("b");
    outcome(
        a == b && !a.is_empty(),
        format!("{} files compared, identical: {}", a.len(), a == b),
    )
}

fn c10_widths() -> Outcome {
    let w = allocate_bucket_widths(16384, &HierarchySpec::ONE_D_BYTE).unwrap();
    outcome(w == vec![5377, 5375, 5375, 256, 1], format!("{w:?}"))
}

fn c11_throughput() -> Outcome {
    let trace = gen_skew_controlled(5_000_000, 1000, 0.54, 11).unwrap();
    let th = threshold_for(0.001, trace.total());
    let bench = |spec: HierarchySpec| {
        let cfg = SketchConfig::with_memory(spec, 256 * 1024).unwrap();
        throughput(&cfg, &trace.records, 3, th).unwrap().unwrap()
    };
    let byte = bench(HierarchySpec::ONE_D_BYTE);
    let bit = bench(HierarchySpec::ONE_D_BIT);
    outcome(
        byte.median >= 5.0 && byte.median > bit.median,
        format!(
            "1d-byte {:.2} Mups (mean traversed {:.3}), 1d-bit {:.2} Mups (mean traversed {:.3})",
            byte.median, byte.mean_traversed, bit.median, bit.mean_traversed
        ),
    )
}

fn main() {
    // Sanity check that flow keys used above agree with the sketch's own.
    assert_eq!(
        flow_key(&HierarchySpec::ONE_D_BYTE, &PacketRecord::new(7, 9, 1)),
        Key::flow(7)
    );
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    results.push((1, "MJRTY oracle equivalence", c1_mjrty()));
    results.push((2, "bucket bound suite", c2_lemma1()));
    let (c3, c4) = c3_c4_coverage();
    results.push((3, "coverage on toy hierarchies", c3));
    results.push((4, "overestimate only (1D)", c4));
    let (c5, c8) = c5_c8_accuracy();
    results.push((5, "accuracy at desk scale", c5));
    results.push((6, "traversal skew", c6_traversal()));
    results.push((7, "convergence over epoch sizes", c7_convergence()));
    results.push((8, "hardware-faithful mode", c8));
    results.push((9, "determinism", c9_determinism()));
    results.push((10, "width allocation", c10_widths()));
    results.push((11, "throughput sanity", c11_throughput()));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n:>2} {tag} {name}: {}", o.detail);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
