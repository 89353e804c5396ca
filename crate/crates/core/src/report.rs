//! Detection output and its JSON/CSV forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hierarchy::{HierarchySpec, Key};

/// One reported hierarchical heavy hitter with its estimated count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HhhEntry {
    pub key: Key,
    pub count: u64,
}

/// Histogram of arrays touched per update: `histogram[n]` updates touched
/// exactly `n` arrays.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraversalStats {
    pub histogram: Vec<u64>,
}

impl TraversalStats {
    #[inline]
    pub(crate) fn record(&mut self, touched: usize) {
        if touched >= self.histogram.len() {
            self.histogram.resize(touched + 1, 0);
        }
        self.histogram[touched] += 1;
    }

    pub fn updates(&self) -> u64 {
        self.histogram.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let n = self.updates();
        if n == 0 {
            return 0.0;
        }
        let weighted: u64 = self
            .histogram
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum();
        weighted as f64 / n as f64
    }

    /// Share of updates that touched exactly `nodes` arrays.
    pub fn fraction(&self, nodes: usize) -> f64 {
        let n = self.updates();
        if n == 0 {
            return 0.0;
        }
        self.histogram.get(nodes).copied().unwrap_or(0) as f64 / n as f64
    }

    pub fn clear(&mut self) {
        self.histogram.clear();
    }
}

/// Everything Detect returns for one epoch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HhhReport {
    pub spec: HierarchySpec,
    /// Absolute count a candidate's estimate had to reach.
    pub threshold: u64,
    /// Reported keys in detection order.
    pub entries: Vec<HhhEntry>,
    pub traversal: TraversalStats,
    /// Non-empty buckets per array when Detect started.
    pub occupancy: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    key: String,
    count: u64,
}

impl HhhReport {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_of(&self, key: &Key) -> Option<u64> {
        self.entries.iter().find(|e| e.key == *key).map(|e| e.count)
    }

    /// `[{"key": "a.b.c.d/m", "count": n}, ...]`
    pub fn to_json(&self) -> String {
        let rows: Vec<Row> = self
            .entries
            .iter()
            .map(|e| Row {
                key: self.spec.render(&e.key),
                count: e.count,
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("plain rows serialize")
    }

    /// `key,count` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,count\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{}", self.spec.render(&e.key), e.count);
        }
        out
    }
}

/// Parses the JSON produced by [`HhhReport::to_json`].
pub fn entries_from_json(spec: &HierarchySpec, text: &str) -> Result<Vec<HhhEntry>> {
    let rows: Vec<Row> = serde_json::from_str(text)?;
    rows.into_iter()
        .map(|r| {
            Ok(HhhEntry {
                key: spec.parse_key(&r.key)?,
                count: r.count,
            })
        })
        .collect()
}
