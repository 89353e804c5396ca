//! Update rate for each hierarchy on one in-memory skew trace.
//!
//! cargo run --release --example throughput

use mvpipe::metrics::throughput;
use mvpipe::oracle::threshold_for;
use mvpipe::traces::gen_skew_controlled;
use mvpipe::{HierarchySpec, SketchConfig};

fn main() -> mvpipe::Result<()> {
    let trace = gen_skew_controlled(5_000_000, 1000, 0.54, 11)?;
    let th = threshold_for(0.001, trace.total());
    println!("spec,min_mups,median_mups,max_mups,detect_ms,mean_traversed");
    for spec in [
        HierarchySpec::ONE_D_BYTE,
        HierarchySpec::ONE_D_BIT,
        HierarchySpec::TWO_D_BYTE,
        HierarchySpec::TWO_D_BIT,
    ] {
        let cfg = SketchConfig::with_memory(spec, 1 << 20)?;
        let t = throughput(&cfg, &trace.records, 3, th)?.expect("non-empty trace");
        println!(
            "{spec},{:.2},{:.2},{:.2},{:.1},{:.3}",
            t.min,
            t.median,
            t.max,
            t.detect_seconds * 1e3,
            t.mean_traversed
        );
    }
    Ok(())
}
