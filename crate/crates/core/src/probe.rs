//! Observation hooks threaded through Push and Detect.
//!
//! The default sketch entry points use [`NoProbe`], which compiles away. Test
//! oracles and instrumentation implement [`Probe`] to watch every value that
//! enters a bucket.

use crate::hierarchy::Key;

pub trait Probe {
    /// `value` of `key` entered bucket `slot` of array `node`. `from` is the
    /// array the pair was carried from, `None` for a fresh record.
    fn inflow(&mut self, from: Option<usize>, node: usize, slot: usize, key: &Key, value: u64) {
        let _ = (from, node, slot, key, value);
    }

    /// Detect computed `estimate` for the candidate `key` stored at
    /// `(node, slot)`.
    fn estimated(&mut self, node: usize, slot: usize, key: &Key, estimate: u64) {
        let _ = (node, slot, key, estimate);
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoProbe;

impl Probe for NoProbe {}

/// Records every inflow event, in order.
#[derive(Clone, Debug, Default)]
pub struct AccessLog {
    pub events: Vec<Inflow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inflow {
    pub from: Option<usize>,
    pub node: usize,
    pub slot: usize,
    pub key: Key,
    pub value: u64,
}

impl Probe for AccessLog {
    fn inflow(&mut self, from: Option<usize>, node: usize, slot: usize, key: &Key, value: u64) {
        self.events.push(Inflow {
            from,
            node,
            slot,
            key: *key,
            value,
        });
    }
}

impl<P: Probe + ?Sized> Probe for &mut P {
    fn inflow(&mut self, from: Option<usize>, node: usize, slot: usize, key: &Key, value: u64) {
        (**self).inflow(from, node, slot, key, value)
    }

    fn estimated(&mut self, node: usize, slot: usize, key: &Key, estimate: u64) {
        (**self).estimated(node, slot, key, estimate)
    }
}
