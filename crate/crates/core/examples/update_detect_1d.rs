//! Feed a few thousand packets into a 1D-byte sketch and print its HHHs.
//!
//! cargo run --example update_detect_1d

use mvpipe::traces::gen_skew_controlled;
use mvpipe::{HierarchySpec, Sketch1D, SketchConfig};

fn main() -> mvpipe::Result<()> {
    let spec = HierarchySpec::ONE_D_BYTE;
    let config = SketchConfig::with_memory(spec, 64 * 1024)?.seed(42);
    println!("widths {:?} ({} bytes nominal)", config.widths, config.nominal_bytes());
    let mut sketch = Sketch1D::new(config)?;

    let trace = gen_skew_controlled(20_000, 5, 0.3, 1)?;
    for r in &trace.records {
        sketch.update(r.src, r.value as u64);
    }
    let report = sketch.detect(1_000)?;
    for e in &report.entries {
        println!("{:>20} {:>6}", spec.render(&e.key), e.count);
    }
    println!(
        "{} updates, mean arrays touched {:.3}",
        report.traversal.updates(),
        report.traversal.mean()
    );
    Ok(())
}
