//! Small hand-checkable scenarios: an update that evicts a candidate, an
//! estimate that consults ancestors, and Detect adding back descendants.
//!
//! cargo run --example worked_examples

use mvpipe::probe::AccessLog;
use mvpipe::{Bucket, HierarchySpec, Key, Sketch1D, SketchConfig};

fn set(s: &mut Sketch1D, level: usize, key: Key, v: u64, i: i64, c: u64) {
    s.array_mut(level).buckets_mut()[0] = Bucket {
        key,
        total: v,
        indicator: i,
        cumulative: c,
    };
}

fn main() -> mvpipe::Result<()> {
    let spec = HierarchySpec::ONE_D_BYTE;
    let key = |s: &str| spec.parse_key(s).unwrap();
    // One bucket per array so every key collides.
    let narrow = || {
        Sketch1D::new(SketchConfig::with_widths(spec, vec![1; 5]).unwrap().ancestor_depth(2))
    };

    println!("-- update");
    let mut s = narrow()?;
    set(&mut s, 0, key("9.9.9.9/32"), 10, 8, 9);
    set(&mut s, 1, key("5.6.7.0/24"), 6, 0, 5);
    set(&mut s, 2, key("5.6.0.0/16"), 20, 12, 15);
    let mut log = AccessLog::default();
    s.update_probed(0x0102_0304, 1, &mut log);
    for e in &log.events {
        println!("level {} <- {} x{}", e.node, spec.render(&e.key), e.value);
    }

    println!("-- estimate");
    let mut s = narrow()?;
    let x = key("1.5.8.8/32");
    set(&mut s, 0, x, 40, 24, 8);
    set(&mut s, 1, key("1.5.8.0/24"), 20, 10, 14);
    set(&mut s, 2, key("1.2.0.0/16"), 10, 2, 3);
    println!("own bucket bound {}", s.array(0).buckets()[0].candidate_bound());
    println!("estimate with two ancestors {}", s.estimate(&x, 0));

    println!("-- detect");
    let mut s = Sketch1D::new(SketchConfig::with_memory(spec, 64 * 1024)?)?;
    for (addr, n) in [(0x0102_0304u32, 6), (0x0102_0305, 3), (0x0909_0909, 2)] {
        for _ in 0..n {
            s.update(addr, 1);
        }
    }
    for e in s.detect(5)?.entries {
        println!("{} {}", spec.render(&e.key), e.count);
    }
    Ok(())
}
