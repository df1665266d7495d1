//! Noise-aware initial layout selection.

use super::route::{route, Routed};
use super::{Layout, TranspileError};
use crate::circuit::{Circuit, GateKind};
use crate::noise::device::DeviceModel;
use crate::schedule::{schedule_asap, ScheduledCircuit};

pub const DEFAULT_CANDIDATES: usize = 64;

/// Estimated log success probability of a scheduled physical circuit:
/// `Σ_gates ln(1−ε_g) + Σ_q (−T_q/(2·T1_q) − T_idle,q/(2·Tφ_q)) + Σ_measured ln(1−ε_ro,q)`.
pub fn score_layout(sc: &ScheduledCircuit, dev: &DeviceModel) -> Result<f64, TranspileError> {
    let mut score = 0.0;
    for g in &sc.circuit.gates {
        if g.is_unitary() {
            score += (1.0 - dev.gate_error(g)?).ln();
        }
    }
    for q in 0..sc.num_qubits() {
        let active_us = sc.active_time(q) as f64 * 1e-3;
        let idle_us = sc.idle_time(q) as f64 * 1e-3;
        score -= active_us / (2.0 * dev.t1_us[q]);
        score -= idle_us / (2.0 * dev.t_phi_us(q));
    }
    for (q, _) in sc.circuit.measurements() {
        score += (1.0 - dev.readout_error(q)).ln();
    }
    Ok(score)
}

#[derive(Clone, Debug)]
pub struct LayoutChoice {
    pub layout: Layout,
    pub routed: Routed,
    pub scheduled: ScheduledCircuit,
    pub score: f64,
}

/// Seed layouts: a BFS from each physical qubit, seeds ordered by degree
/// (descending) then index. The most CX-heavy logical qubit takes the seed
/// and the rest follow in BFS order.
pub fn candidate_layouts(c: &Circuit, dev: &DeviceModel, max: usize) -> Vec<Layout> {
    let cm = &dev.coupling;
    let n = c.num_qubits;
    let mut weight = vec![0usize; n];
    for g in &c.gates {
        if g.qubits.len() == 2 {
            weight[g.qubits[0]] += 1;
            weight[g.qubits[1]] += 1;
        }
    }
    let mut logical: Vec<usize> = (0..n).collect();
    logical.sort_by_key(|&l| (std::cmp::Reverse(weight[l]), l));
    let mut seeds: Vec<usize> = (0..cm.num_qubits()).collect();
    seeds.sort_by_key(|&p| (std::cmp::Reverse(cm.degree(p)), p));

    let mut out: Vec<Layout> = Vec::new();
    for seed in seeds {
        if out.len() >= max {
            break;
        }
        let order = cm.bfs_order(seed);
        let mut map = vec![0; n];
        for (k, &l) in logical.iter().enumerate() {
            map[l] = order[k];
        }
        let layout = Layout(map);
        if !out.contains(&layout) {
            out.push(layout);
        }
    }
    out
}

/// Routes and scores every candidate layout and keeps the best one. Ties go
/// to fewer CX gates, then the smaller sum of physical indices.
pub fn select_layout(c: &Circuit, dev: &DeviceModel, candidates: usize) -> Result<LayoutChoice, TranspileError> {
    if c.num_qubits > dev.num_qubits() {
        return Err(TranspileError::TooWide { logical: c.num_qubits, physical: dev.num_qubits() });
    }
    if c.gates.iter().any(|g| matches!(g.kind, GateKind::H | GateKind::U2q(_))) {
        return Err(TranspileError::NotNative);
    }
    let mut best: Option<LayoutChoice> = None;
    for layout in candidate_layouts(c, dev, candidates.max(1)) {
        let routed = route(c, &dev.coupling, &layout)?;
        let scheduled = schedule_asap(&routed.circuit, &dev.gate_durations_ns)?;
        let score = score_layout(&scheduled, dev)?;
        let key = (routed.circuit.cx_count(), layout.physical_sum());
        let better = match &best {
            None => true,
            Some(b) => {
                let bkey = (b.routed.circuit.cx_count(), b.layout.physical_sum());
                score > b.score + 1e-12 || ((score - b.score).abs() <= 1e-12 && key < bkey)
            }
        };
        if better {
            best = Some(LayoutChoice { layout, routed, scheduled, score });
        }
    }
    Ok(best.expect("at least one candidate"))
}
