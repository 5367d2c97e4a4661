//! Per-node processor-element occupancy shared by every scheduler and the simulator.
//!
//! A node owns `npe_slots` unit slots, each with the time it next becomes free. A task
//! demanding `npe` elements takes the `npe` slots that free up first and holds them until it
//! completes. No backfilling: a slot's free time only moves forward.

use crate::model::{FogNode, ScheduleEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSlots {
    /// Free times, kept sorted ascending.
    free_at: Vec<f64>,
}

impl NodeSlots {
    pub fn new(slots: u32) -> Self {
        Self {
            free_at: vec![0.0; slots as usize],
        }
    }

    pub fn for_node(node: &FogNode) -> Self {
        Self::new(node.npe_slots)
    }

    pub fn capacity(&self) -> u32 {
        self.free_at.len() as u32
    }

    /// Earliest time at or after `ready` when `npe` slots are free, or `None` when the
    /// node is too small for the demand.
    pub fn earliest_start(&self, npe: u32, ready: f64) -> Option<f64> {
        let k = npe.max(1) as usize;
        self.free_at.get(k - 1).map(|&t| t.max(ready))
    }

    /// Occupies `npe` slots until `until`. Callers must pass a `start` obtained from
    /// [`earliest_start`](Self::earliest_start) or later.
    pub fn reserve(&mut self, npe: u32, start: f64, until: f64) {
        let k = npe.max(1) as usize;
        debug_assert!(k <= self.free_at.len());
        debug_assert!(self.free_at[k - 1] <= start);
        for t in &mut self.free_at[..k] {
            *t = until;
        }
        self.free_at.sort_by(f64::total_cmp);
    }

    /// Time the last slot becomes free.
    pub fn horizon(&self) -> f64 {
        self.free_at.last().copied().unwrap_or(0.0)
    }
}

/// Rebuilds slot state by replaying entries in reservation order.
pub fn replay<'a>(
    nodes: &[FogNode],
    entries: impl IntoIterator<Item = (&'a ScheduleEntry, u32)>,
    node_index: impl Fn(&ScheduleEntry) -> Option<usize>,
) -> Vec<NodeSlots> {
    let mut slots: Vec<NodeSlots> = nodes.iter().map(NodeSlots::for_node).collect();
    for (e, npe) in entries {
        if let Some(i) = node_index(e) {
            slots[i].reserve(npe, e.start, e.completion);
        }
    }
    slots
}
