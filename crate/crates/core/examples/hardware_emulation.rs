//! The two-branch switch update against the full update on the same trace.
//!
//! cargo run --release --example hardware_emulation

use mvpipe::oracle::{exact_hhh_at, threshold_for, FlowTable};
use mvpipe::traces::gen_skew_controlled;
use mvpipe::{accuracy, HierarchySpec, Sketch1D, SketchConfig, UpdateMode};

fn main() -> mvpipe::Result<()> {
    let spec = HierarchySpec::ONE_D_BYTE;
    let trace = gen_skew_controlled(2_000_000, 500, 0.54, 4)?;
    let table = FlowTable::from_records(&spec, &trace.records);
    let th = threshold_for(0.0007, table.total);
    let truth = exact_hhh_at(&spec, &table, th);
    for mode in [UpdateMode::Full, UpdateMode::HwFaithful] {
        let cfg = SketchConfig::with_memory(spec, 256 * 1024)?.mode(mode);
        let mut sketch = Sketch1D::new(cfg)?;
        for r in &trace.records {
            sketch.update(r.src, r.value as u64);
        }
        let negative = (0..sketch.levels())
            .flat_map(|l| sketch.array(l).buckets().iter())
            .filter(|b| b.indicator < 0)
            .count();
        let a = accuracy(&sketch.detect(th)?, &truth)?;
        println!(
            "{mode:>4}: precision {:.4} recall {:.4} rel error {:.5}, buckets with I < 0: {negative}",
            a.precision, a.recall, a.relative_error
        );
    }
    Ok(())
}
