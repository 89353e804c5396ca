//! Source/destination HHHs with the 2D lattice sketch.
//!
//! cargo run --release --example lattice_2d

use mvpipe::oracle::{exact_hhh_at, threshold_for, FlowTable};
use mvpipe::traces::gen_zipf;
use mvpipe::{accuracy, HierarchySpec, Sketch2D, SketchConfig};

fn main() -> mvpipe::Result<()> {
    let spec = HierarchySpec::TWO_D_BYTE;
    let trace = gen_zipf(200_000, 1.1, 20_000, 3)?;
    let mut sketch = Sketch2D::new(SketchConfig::with_memory(spec, 512 * 1024)?)?;
    for r in &trace.records {
        sketch.update(r.src, r.dst, r.value as u64);
    }
    let threshold = threshold_for(0.005, trace.total());
    let report = sketch.detect(threshold)?;
    for e in report.entries.iter().take(15) {
        println!("{:>36} {:>7}", spec.render(&e.key), e.count);
    }
    if report.len() > 15 {
        println!("... {} more", report.len() - 15);
    }
    let truth = exact_hhh_at(&spec, &FlowTable::from_records(&spec, &trace.records), threshold);
    let a = accuracy(&report, &truth)?;
    println!(
        "precision {:.3} recall {:.3} relative error {:.4}",
        a.precision, a.recall, a.relative_error
    );
    Ok(())
}
