//! Sketch configuration and memory-budget width allocation.

use crate::error::{Error, Result};
use crate::hierarchy::HierarchySpec;

/// Which Push variant the sketch runs on updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum UpdateMode {
    /// The three-branch MJRTY push.
    #[default]
    Full,
    /// Emulation of the two-branch switch pipeline (1D-byte only).
    HwFaithful,
}

impl std::fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UpdateMode::Full => "full",
            UpdateMode::HwFaithful => "hw",
        })
    }
}

impl std::str::FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(UpdateMode::Full),
            "hw" | "hw-faithful" => Ok(UpdateMode::HwFaithful),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Nominal bucket footprint used for memory budgets: 4 bytes per counter
/// and per address.
pub fn nominal_bucket_bytes(spec: &HierarchySpec) -> usize {
    if spec.dims() == 1 {
        16
    } else {
        20
    }
}

/// Default number of ancestors consulted by Estimate.
pub fn default_ancestor_depth(spec: &HierarchySpec) -> usize {
    use crate::hierarchy::Granularity::*;
    match (spec.dims(), spec.granularity()) {
        (1, Byte) => 2,
        (1, Bit) => 8,
        (_, Byte) => 4,
        (_, Bit) => 8,
    }
}

/// Splits a memory budget into per-array widths.
///
/// Arrays are visited from the top node down. A node whose key space is
/// smaller than the running average gets exactly its key space, and the
/// average is recomputed over the remaining arrays; every other node gets
/// the current average. Buckets lost to integer division go to array 0.
pub fn allocate_widths(
    budget_bytes: usize,
    bucket_bytes: usize,
    spec: &HierarchySpec,
) -> Result<Vec<usize>> {
    let buckets = budget_bytes / bucket_bytes.max(1);
    allocate_bucket_widths(buckets, spec)
}

/// [`allocate_widths`] with the budget already expressed in buckets.
pub fn allocate_bucket_widths(buckets: usize, spec: &HierarchySpec) -> Result<Vec<usize>> {
    let nodes = spec.nodes();
    if buckets < nodes {
        return Err(Error::BudgetTooSmall { buckets, nodes });
    }
    let mut widths = vec![0usize; nodes];
    let mut residual = buckets;
    let mut remaining = nodes;
    let mut avg = residual / remaining;
    for index in (0..nodes).rev() {
        let space = spec.key_space_size(spec.coordinate_at(index));
        if space < avg as u128 {
            let w = space as usize;
            widths[index] = w;
            residual -= w;
            remaining -= 1;
            if remaining > 0 {
                avg = residual / remaining;
            }
        } else {
            widths[index] = avg;
            residual -= avg;
            remaining -= 1;
        }
    }
    widths[0] += residual;
    Ok(widths)
}

/// Everything needed to build a sketch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchConfig {
    pub spec: HierarchySpec,
    pub widths: Vec<usize>,
    pub seed: u64,
    pub ancestor_depth: usize,
    pub mode: UpdateMode,
}

impl SketchConfig {
    /// Widths from a byte budget using the nominal bucket size.
    pub fn with_memory(spec: HierarchySpec, budget_bytes: usize) -> Result<Self> {
        let widths = allocate_widths(budget_bytes, nominal_bucket_bytes(&spec), &spec)?;
        Self::with_widths(spec, widths)
    }

    /// Explicit widths, one per node in array-index order. A width may not
    /// exceed the node's key space.
    pub fn with_widths(spec: HierarchySpec, widths: Vec<usize>) -> Result<Self> {
        if widths.len() != spec.nodes() {
            return Err(Error::WidthCount {
                expected: spec.nodes(),
                actual: widths.len(),
            });
        }
        for (index, &w) in widths.iter().enumerate() {
            if w == 0 {
                return Err(Error::ZeroWidth { index });
            }
            let space = spec.key_space_size(spec.coordinate_at(index));
            if w as u128 > space {
                return Err(Error::Config(format!(
                    "array {index} width {w} exceeds its key space {space}"
                )));
            }
        }
        Ok(SketchConfig {
            spec,
            widths,
            seed: 0,
            ancestor_depth: default_ancestor_depth(&spec),
            mode: UpdateMode::Full,
        })
    }

    /// The same width at every node, capped at each node's key space.
    pub fn uniform(spec: HierarchySpec, width: usize) -> Result<Self> {
        let widths = spec
            .coordinates()
            .map(|c| (width as u128).min(spec.key_space_size(c)) as usize)
            .collect();
        Self::with_widths(spec, widths)
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn ancestor_depth(mut self, t: usize) -> Self {
        self.ancestor_depth = t;
        self
    }

    pub fn mode(mut self, mode: UpdateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn total_buckets(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn nominal_bytes(&self) -> usize {
        self.total_buckets() * nominal_bucket_bytes(&self.spec)
    }
}
