//! Audit every bucket against exact per-key inflow while a trace plays.
//!
//! cargo run --release --example bucket_bounds

use mvpipe::oracle::{shadow_audit, threshold_for};
use mvpipe::traces::gen_zipf;
use mvpipe::{HierarchySpec, SketchConfig};

fn main() -> mvpipe::Result<()> {
    for spec in [HierarchySpec::ONE_D_BYTE, HierarchySpec::TWO_D_BYTE] {
        let cfg = SketchConfig::uniform(spec, 64)?;
        let mut total = 0;
        for seed in 0..10 {
            let trace = gen_zipf(10_000, 1.0, 5_000, seed)?;
            let th = threshold_for(0.01, trace.total());
            let v = shadow_audit(&trace.records, &cfg.clone().seed(seed), 10, th)?;
            if let Some(first) = v.first() {
                println!("seed {seed}: {first:?}");
            }
            total += v.len();
        }
        println!("{spec}: {total} violations over 10 traces");
    }
    Ok(())
}
