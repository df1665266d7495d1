//! SWAP insertion so that every CX acts on a coupled pair.

use super::{CouplingMap, Edge, Layout, TranspileError};
use crate::circuit::{Circuit, Gate, GateKind, Qubit};

/// Weight of the lookahead term relative to the front layer.
const LOOKAHEAD_WEIGHT: f64 = 0.5;
/// Cap on CX gates considered by the lookahead.
const LOOKAHEAD_SIZE: usize = 20;

/// Routed circuit on physical qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    /// Complete logical-to-physical map at the start; logical indices beyond
    /// the input width stand for unused physical qubits.
    pub initial_layout: Layout,
    /// Same map after all inserted SWAPs.
    pub final_layout: Layout,
    pub swaps: usize,
}

struct Dag {
    succs: Vec<Vec<usize>>,
    npred: Vec<usize>,
}

fn build_dag(c: &Circuit) -> Dag {
    let n = c.gates.len();
    let mut succs = vec![Vec::new(); n];
    let mut npred = vec![0; n];
    let mut last: Vec<Option<usize>> = vec![None; c.num_qubits];
    for (i, g) in c.gates.iter().enumerate() {
        let qubits: Vec<Qubit> = if g.is_barrier() { (0..c.num_qubits).collect() } else { g.qubits.clone() };
        let mut preds: Vec<usize> = qubits.iter().filter_map(|&q| last[q]).collect();
        preds.sort_unstable();
        preds.dedup();
        for p in preds {
            succs[p].push(i);
            npred[i] += 1;
        }
        for q in qubits {
            last[q] = Some(i);
        }
    }
    Dag { succs, npred }
}

/// Greedy router: executes every ready gate whose operands are coupled and
/// otherwise inserts the SWAP minimizing front-layer distance plus a
/// weighted depth-two lookahead. Ties go to the smallest edge. When no SWAP
/// reduces the front distance, the first blocked CX is moved one step along
/// a shortest path, which guarantees progress.
pub fn route(c: &Circuit, cm: &CouplingMap, initial: &Layout) -> Result<Routed, TranspileError> {
    c.validate()?;
    // Terminal measurements are applied after routing so that SWAPs never
    // move an already measured qubit.
    let deferred = if c.measurements_terminal() { c.measurements() } else { Vec::new() };
    let stripped;
    let c = if deferred.is_empty() {
        c
    } else {
        stripped = c.without_measurements();
        &stripped
    };
    let np = cm.num_qubits();
    if c.num_qubits > np {
        return Err(TranspileError::TooWide { logical: c.num_qubits, physical: np });
    }
    if initial.len() != c.num_qubits {
        return Err(TranspileError::LayoutWidth { expected: c.num_qubits, got: initial.len() });
    }
    initial.validate(np)?;
    let full = initial.complete(np);
    let mut phys: Vec<Qubit> = full.0.clone();
    let mut logical_at = vec![0; np];
    for (l, &p) in phys.iter().enumerate() {
        logical_at[p] = l;
    }

    let dag = build_dag(c);
    let mut npred = dag.npred.clone();
    let mut front: Vec<usize> = (0..c.gates.len()).filter(|&i| npred[i] == 0).collect();
    let mut out = Circuit::new(np, c.num_clbits);
    let mut swaps = 0;
    let mut last_swap: Option<Edge> = None;
    // Once the greedy step stalls, keep stepping the same CX until it runs.
    let mut forced = false;

    let map_gate = |g: &Gate, phys: &[Qubit]| -> Gate {
        match g.kind {
            GateKind::Barrier => Gate::new(GateKind::Barrier, Vec::new()),
            _ => Gate::new(g.kind.clone(), g.qubits.iter().map(|&q| phys[q]).collect()),
        }
    };

    while !front.is_empty() {
        // Execute everything that can run.
        let mut progressed = true;
        while progressed {
            progressed = false;
            let mut next_front = Vec::with_capacity(front.len());
            let mut ran = Vec::new();
            for &i in &front {
                let g = &c.gates[i];
                let ok = g.qubits.len() < 2 || cm.contains(phys[g.qubits[0]], phys[g.qubits[1]]);
                if ok {
                    out.gates.push(map_gate(g, &phys));
                    ran.push(i);
                } else {
                    next_front.push(i);
                }
            }
            for i in ran {
                progressed = true;
                forced = false;
                for &s in &dag.succs[i] {
                    npred[s] -= 1;
                    if npred[s] == 0 {
                        next_front.push(s);
                    }
                }
            }
            next_front.sort_unstable();
            front = next_front;
        }
        if front.is_empty() {
            break;
        }

        let lookahead = lookahead_set(c, &dag, &npred, &front);
        let front_cost = |phys: &[Qubit]| -> usize {
            front.iter().map(|&i| cm.distance(phys[c.gates[i].qubits[0]], phys[c.gates[i].qubits[1]])).sum()
        };
        let look_cost = |phys: &[Qubit]| -> f64 {
            if lookahead.is_empty() {
                return 0.0;
            }
            let s: usize =
                lookahead.iter().map(|&i| cm.distance(phys[c.gates[i].qubits[0]], phys[c.gates[i].qubits[1]])).sum();
            s as f64 / lookahead.len() as f64
        };
        let base = front_cost(&phys);

        let mut candidates: Vec<Edge> = front
            .iter()
            .flat_map(|&i| c.gates[i].qubits.iter().map(|&q| phys[q]).collect::<Vec<_>>())
            .flat_map(|p| cm.neighbors(p).iter().map(move |&n| Edge::new(p, n)))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut best: Option<(f64, usize, Edge)> = None;
        for e in candidates {
            if Some(e) == last_swap {
                continue;
            }
            let mut trial = phys.clone();
            let (la, lb) = (logical_at[e.0], logical_at[e.1]);
            trial.swap(la, lb);
            let fc = front_cost(&trial);
            let cost = fc as f64 + LOOKAHEAD_WEIGHT * look_cost(&trial);
            if best.is_none_or(|(bc, _, _)| cost < bc - 1e-12) {
                best = Some((cost, fc, e));
            }
        }
        let chosen = match best {
            Some((_, fc, e)) if fc < base && !forced => e,
            _ => {
                forced = true;
                // Step the first blocked CX's control toward its target.
                let g = &c.gates[front[0]];
                let (pa, pb) = (phys[g.qubits[0]], phys[g.qubits[1]]);
                let step = cm
                    .neighbors(pa)
                    .iter()
                    .copied()
                    .find(|&n| cm.distance(n, pb) + 1 == cm.distance(pa, pb))
                    .expect("connected map has a shortest path");
                Edge::new(pa, step)
            }
        };
        let (pa, pb) = (chosen.0, chosen.1);
        out.cx(pa, pb).cx(pb, pa).cx(pa, pb);
        let (la, lb) = (logical_at[pa], logical_at[pb]);
        phys.swap(la, lb);
        logical_at.swap(pa, pb);
        swaps += 1;
        last_swap = Some(chosen);
    }

    for (q, cl) in deferred {
        out.measure(phys[q], cl);
    }
    Ok(Routed { circuit: out, initial_layout: full, final_layout: Layout(phys), swaps })
}

/// CX gates within two dependency layers after the front.
fn lookahead_set(c: &Circuit, dag: &Dag, npred: &[usize], front: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut remaining = npred.to_vec();
    let mut layer: Vec<usize> = front.to_vec();
    for _ in 0..2 {
        let mut next = Vec::new();
        for &i in &layer {
            for &s in &dag.succs[i] {
                remaining[s] -= 1;
                if remaining[s] == 0 {
                    next.push(s);
                }
            }
        }
        next.sort_unstable();
        for &s in &next {
            if c.gates[s].kind == GateKind::Cx && out.len() < LOOKAHEAD_SIZE {
                out.push(s);
            }
        }
        layer = next;
    }
    out
}
