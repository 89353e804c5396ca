//! Sketch against the exact HHH set over a range of thresholds.
//!
//! cargo run --release --example oracle_compare -- [n]

use mvpipe::oracle::{exact_hhh_at, threshold_for, FlowTable};
use mvpipe::traces::gen_skew_controlled;
use mvpipe::{accuracy, HierarchySpec, Sketch1D, SketchConfig};

fn main() -> mvpipe::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(1_000_000, |s| s.parse().expect("n"));
    let spec = HierarchySpec::ONE_D_BYTE;
    let trace = gen_skew_controlled(n, 500, 0.54, 9)?;
    let table = FlowTable::from_records(&spec, &trace.records);
    let mut sketch = Sketch1D::new(SketchConfig::with_memory(spec, 256 * 1024)?)?;
    for r in &trace.records {
        sketch.update(r.src, r.value as u64);
    }
    println!("phi,true_hhh,reported,precision,recall,rel_error");
    for phi in [0.0005, 0.0007, 0.001, 0.002, 0.005] {
        let th = threshold_for(phi, table.total);
        let truth = exact_hhh_at(&spec, &table, th);
        let report = sketch.clone().detect(th)?;
        let a = accuracy(&report, &truth)?;
        println!(
            "{phi},{},{},{:.4},{:.4},{:.5}",
            truth.entries.len(),
            report.len(),
            a.precision,
            a.recall,
            a.relative_error
        );
    }
    Ok(())
}
