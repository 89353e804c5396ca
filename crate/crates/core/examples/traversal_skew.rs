//! How many arrays an update touches, as the heavy-flow share changes.
//!
//! Two counts per trace: every array an update touches, eviction carries
//! included, and only the arrays where the record's own key was offered.
//!
//! cargo run --release --example traversal_skew -- [n]

use mvpipe::probe::AccessLog;
use mvpipe::traces::gen_skew_controlled;
use mvpipe::{HierarchySpec, Key, Sketch1D, SketchConfig};

fn main() -> mvpipe::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("n"))
        .unwrap_or(1_000_000);
    let spec = HierarchySpec::ONE_D_BYTE;
    println!("fraction,one_node,mean_nodes,own_key_one_node,own_key_mean");
    for fraction in [0.54, 0.5, 0.4, 0.3, 0.2, 0.1] {
        let trace = gen_skew_controlled(n, 1000, fraction, 1)?;
        let mut sketch = Sketch1D::new(SketchConfig::with_memory(spec, 256 * 1024)?)?;
        let (mut own_one, mut own_sum) = (0u64, 0u64);
        let mut log = AccessLog::default();
        for r in &trace.records {
            log.events.clear();
            sketch.update_probed(r.src, r.value as u64, &mut log);
            let flow = Key::flow(r.src);
            let own = log
                .events
                .iter()
                .filter(|e| spec.covers(&flow, &e.key))
                .count() as u64;
            own_sum += own;
            own_one += u64::from(own == 1);
        }
        let stats = &sketch.detect(u64::MAX)?.traversal;
        println!(
            "{fraction},{:.4},{:.4},{:.4},{:.4}",
            stats.fraction(1),
            stats.mean(),
            own_one as f64 / n as f64,
            own_sum as f64 / n as f64
        );
    }
    Ok(())
}
