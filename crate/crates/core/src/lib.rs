//! Hierarchical heavy hitter detection over IPv4 traffic with a pipeline of
//! majority-vote bucket arrays.
//!
//! One array per hierarchy node. Each bucket keeps a single candidate key
//! and a few counters. A record is offered to the most specific node first
//! and climbs only while it fails to find a home, so skewed traffic touches
//! one array per update most of the time.
//!
//! ```
//! use mvpipe::{HierarchySpec, Sketch1D, SketchConfig};
//!
//! let config = SketchConfig::with_memory(HierarchySpec::ONE_D_BYTE, 64 * 1024)?;
//! let mut sketch = Sketch1D::new(config)?;
//! for _ in 0..50 {
//!     sketch.update(0x0a00_0001, 1);
//! }
//! sketch.update(0x0b00_0001, 1);
//! let report = sketch.detect(40)?;
//! assert_eq!(report.entries[0].count, 50);
//! # Ok::<(), mvpipe::Error>(())
//! ```

pub mod bucket;
pub mod cli;
pub mod config;
pub mod error;
pub mod hierarchy;
pub mod lattice;
pub mod metrics;
pub mod oracle;
pub mod probe;
pub mod report;
pub mod sketch;
pub mod traces;

pub use bucket::{Bucket, NodeArray, Offer};
pub use config::{allocate_bucket_widths, allocate_widths, SketchConfig, UpdateMode};
pub use error::{Error, Result};
pub use hierarchy::{Coordinate, Granularity, HierarchySpec, Key};
pub use lattice::Sketch2D;
pub use metrics::{accuracy, AccuracyResult};
pub use oracle::{exact_counts, exact_hhh, AnySketch};
pub use report::{HhhEntry, HhhReport, TraversalStats};
pub use sketch::{HhhSketch, Sketch1D};
pub use traces::{PacketRecord, Trace};
