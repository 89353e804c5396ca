//! Per-array widths for a few memory budgets.
//!
//! cargo run --example width_allocation

use mvpipe::config::nominal_bucket_bytes;
use mvpipe::{allocate_widths, HierarchySpec};

fn main() -> mvpipe::Result<()> {
    for spec in [HierarchySpec::ONE_D_BYTE, HierarchySpec::ONE_D_BIT, HierarchySpec::TWO_D_BYTE] {
        for budget in [64 * 1024, 256 * 1024, 1 << 20] {
            let w = allocate_widths(budget, nominal_bucket_bytes(&spec), &spec)?;
            let shown: Vec<String> = w.iter().take(8).map(usize::to_string).collect();
            let more = if w.len() > 8 { format!(" ... ({} arrays)", w.len()) } else { String::new() };
            println!("{spec:<8} {:>8} B: [{}]{more}", budget, shown.join(", "));
        }
    }
    Ok(())
}
