use serde::{Deserialize, Serialize};

use crate::circuit::Nanos;
use crate::schedule::ScheduledCircuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub cx_count: usize,
    pub total_duration_ns: Nanos,
    pub depth: usize,
}

pub fn circuit_stats(sc: &ScheduledCircuit) -> CircuitStats {
    CircuitStats { cx_count: sc.circuit.cx_count(), total_duration_ns: sc.total_duration(), depth: sc.circuit.depth() }
}
