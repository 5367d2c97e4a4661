//! Dynamic power, DVFS operating points and energy accounting.

use std::collections::HashMap;

use crate::error::{ensure_range, Error, Result};
use crate::model::{FogNode, NodeId, ScheduleEntry};
use crate::numeric;

/// Dynamic power at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub watts: f64,
    pub volts: f64,
    pub hertz: f64,
}

/// `activity * load_cap * volts^2 * hertz`, with volts and hertz inside the node envelope.
pub fn dynamic_power(node: &FogNode, volts: f64, hertz: f64) -> Result<f64> {
    ensure_range("volts", volts, 0.0, node.v_max)?;
    ensure_range("hertz", hertz, 0.0, node.f_max)?;
    Ok(node.activity * node.load_cap * volts * volts * hertz)
}

/// Voltage and frequency after scaling the envelope by `rho`.
pub fn scaled_vf(node: &FogNode, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::OutOfRange {
            quantity: "rho",
            value: rho,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok((rho * node.v_max, rho * node.f_max))
}

pub fn operating_point(node: &FogNode, rho: f64) -> Result<PowerSample> {
    let (volts, hertz) = scaled_vf(node, rho)?;
    Ok(PowerSample {
        watts: dynamic_power(node, volts, hertz)?,
        volts,
        hertz,
    })
}

/// Power drawn while the node executes at `rho`, static share included.
pub fn active_power(node: &FogNode, rho: f64) -> Result<f64> {
    Ok(operating_point(node, rho)?.watts + node.static_power)
}

/// Energy of an execution, `P * t`.
pub fn entry_energy(node: &FogNode, entry: &ScheduleEntry) -> Result<f64> {
    Ok(active_power(node, entry.rho)? * entry.exec_time)
}

fn index(nodes: &[FogNode]) -> HashMap<NodeId, &FogNode> {
    nodes.iter().map(|n| (n.id, n)).collect()
}

/// Sum of full-speed dynamic power over the nodes the entries run on.
pub fn total_power_full(nodes: &[FogNode], entries: &[ScheduleEntry]) -> Result<f64> {
    let by_id = index(nodes);
    let mut parts = Vec::with_capacity(entries.len());
    for e in entries {
        let node = by_id.get(&e.node_id).ok_or(Error::UnknownNode(e.node_id))?;
        parts.push(dynamic_power(node, node.v_max, node.f_max)?);
    }
    Ok(numeric::sum(parts))
}

/// Sum of dynamic power with each entry at its own scale factor.
pub fn total_power(nodes: &[FogNode], entries: &[ScheduleEntry]) -> Result<f64> {
    let by_id = index(nodes);
    let mut parts = Vec::with_capacity(entries.len());
    for e in entries {
        let node = by_id.get(&e.node_id).ok_or(Error::UnknownNode(e.node_id))?;
        parts.push(operating_point(node, e.rho)?.watts);
    }
    Ok(numeric::sum(parts))
}

/// Total energy of a list of executions.
pub fn total_energy(nodes: &[FogNode], entries: &[ScheduleEntry]) -> Result<f64> {
    let by_id = index(nodes);
    let mut parts = Vec::with_capacity(entries.len());
    for e in entries {
        let node = by_id.get(&e.node_id).ok_or(Error::UnknownNode(e.node_id))?;
        parts.push(entry_energy(node, e)?);
    }
    Ok(numeric::sum(parts))
}
