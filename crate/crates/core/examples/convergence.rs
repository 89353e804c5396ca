//! Accuracy as the epoch length grows.
//!
//! cargo run --release --example convergence

use mvpipe::cli::{evaluate, Threshold};
use mvpipe::metrics::average;
use mvpipe::traces::{gen_skew_controlled, split_epochs};
use mvpipe::{HierarchySpec, SketchConfig};

fn main() -> mvpipe::Result<()> {
    let base = gen_skew_controlled(5_000_000, 500, 0.54, 7)?;
    let cfg = SketchConfig::with_memory(HierarchySpec::ONE_D_BYTE, 256 * 1024)?;
    println!("epoch_len,epochs,precision,recall,rel_error");
    for len in [250_000, 500_000, 1_000_000, 2_500_000, 5_000_000] {
        let trace = split_epochs(base.clone(), len)?;
        let per_epoch = &evaluate(&cfg, &trace, &[Threshold::Phi(0.0007)])?[0];
        let a = average(per_epoch);
        println!(
            "{len},{},{:.4},{:.4},{:.5}",
            per_epoch.len(),
            a.precision,
            a.recall,
            a.relative_error
        );
    }
    Ok(())
}
