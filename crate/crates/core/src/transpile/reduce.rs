//! Peephole reduction on native circuits.

use super::wrap_angle;
use crate::circuit::{Circuit, Gate, GateKind};

/// RZ angles within this distance of a multiple of 2π are dropped.
pub const ZERO_ANGLE_TOL: f64 = 1e-12;

/// Repeats local rewrites until none applies: merge adjacent RZ on a qubit,
/// drop RZ(0 mod 2π), cancel X·X, cancel identical adjacent CX pairs, and
/// remove runs of four SX. Results equal the input up to global phase.
pub fn reduce(c: &Circuit) -> Circuit {
    let mut gates = c.gates.clone();
    loop {
        let (next, changed) = pass(&gates, c.num_qubits);
        gates = next;
        if !changed {
            break;
        }
    }
    Circuit { num_qubits: c.num_qubits, num_clbits: c.num_clbits, gates }
}

fn pass(gates: &[Gate], num_qubits: usize) -> (Vec<Gate>, bool) {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    // Index in `out` of the most recent gate on each qubit, if it may still
    // combine with what follows.
    let mut last: Vec<Option<usize>> = vec![None; num_qubits];
    let mut sx_run: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    let mut changed = false;

    for g in gates {
        match g.kind {
            GateKind::Rz(theta) => {
                let q = g.qubits[0];
                if let Some(i) = last[q] {
                    if let Some(Gate { kind: GateKind::Rz(prev), .. }) = &mut out[i] {
                        *prev = wrap_angle(*prev + theta);
                        changed = true;
                        continue;
                    }
                }
                if wrap_angle(theta).abs() < ZERO_ANGLE_TOL {
                    changed = true;
                    continue;
                }
                out.push(Some(g.clone()));
                last[q] = Some(out.len() - 1);
                sx_run[q].clear();
            }
            GateKind::X => {
                let q = g.qubits[0];
                if let Some(i) = last[q] {
                    if matches!(out[i], Some(Gate { kind: GateKind::X, .. })) {
                        out[i] = None;
                        last[q] = None;
                        changed = true;
                        continue;
                    }
                }
                out.push(Some(g.clone()));
                last[q] = Some(out.len() - 1);
                sx_run[q].clear();
            }
            GateKind::Sx => {
                let q = g.qubits[0];
                let continues = matches!(last[q], Some(i) if sx_run[q].last() == Some(&i));
                if !continues {
                    sx_run[q].clear();
                }
                out.push(Some(g.clone()));
                let idx = out.len() - 1;
                sx_run[q].push(idx);
                last[q] = Some(idx);
                if sx_run[q].len() == 4 {
                    for i in sx_run[q].drain(..) {
                        out[i] = None;
                    }
                    last[q] = None;
                    changed = true;
                }
            }
            GateKind::Cx => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                if let (Some(i), Some(j)) = (last[a], last[b]) {
                    if i == j {
                        if let Some(prev) = &out[i] {
                            if prev.kind == GateKind::Cx && prev.qubits == g.qubits {
                                out[i] = None;
                                last[a] = None;
                                last[b] = None;
                                changed = true;
                                continue;
                            }
                        }
                    }
                }
                out.push(Some(g.clone()));
                let idx = out.len() - 1;
                for &q in &g.qubits {
                    last[q] = Some(idx);
                    sx_run[q].clear();
                }
            }
            _ => {
                // Barriers, measurements, delays and other gates block merging.
                out.push(Some(g.clone()));
                let idx = out.len() - 1;
                let qubits: Vec<usize> = if g.is_barrier() { (0..num_qubits).collect() } else { g.qubits.clone() };
                for q in qubits {
                    last[q] = Some(idx);
                    sx_run[q].clear();
                }
            }
        }
    }
    // Merged RZ may have collapsed to zero.
    let mut result = Vec::with_capacity(out.len());
    for g in out.into_iter().flatten() {
        if let GateKind::Rz(t) = g.kind {
            if wrap_angle(t).abs() < ZERO_ANGLE_TOL {
                changed = true;
                continue;
            }
        }
        result.push(g);
    }
    (result, changed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::{trace_fidelity, unitary_of};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rz_pair_cancels() {
        let mut c = Circuit::new(1, 0);
        c.rz(0.3, 0).rz(-0.3, 0);
        assert!(reduce(&c).gates.is_empty());
    }

    #[test]
    fn cx_pair_cancels() {
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).cx(0, 1);
        assert!(reduce(&c).gates.is_empty());
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).cx(1, 0);
        assert_eq!(reduce(&c).gates.len(), 2);
    }

    #[test]
    fn four_sx_vanish() {
        let mut c = Circuit::new(1, 0);
        c.sx(0).sx(0).sx(0).sx(0).sx(0);
        assert_eq!(reduce(&c).gates.len(), 1);
    }

    #[test]
    fn nested_cancellation_reaches_fixed_point() {
        let mut c = Circuit::new(2, 0);
        c.x(0).cx(0, 1).rz(PI, 1).rz(PI, 1).cx(0, 1).x(0);
        assert!(reduce(&c).gates.is_empty());
    }

    #[test]
    fn barrier_blocks() {
        let mut c = Circuit::new(1, 0);
        c.x(0).barrier().x(0);
        assert_eq!(reduce(&c).gates.len(), 3);
    }

    proptest! {
        #[test]
        fn reduce_preserves_unitary(ops in prop::collection::vec((0u8..5, 0usize..3, 0usize..3, -4i32..4), 0..40)) {
            let mut c = Circuit::new(3, 0);
            for (k, a, b, t) in ops {
                match k {
                    0 => { c.rz(t as f64 * PI / 4.0, a); }
                    1 => { c.sx(a); }
                    2 => { c.x(a); }
                    3 if a != b => { c.cx(a, b); }
                    _ => {}
                }
            }
            let r = reduce(&c);
            prop_assert!(r.gates.len() <= c.gates.len());
            prop_assert!(r.cx_count() <= c.cx_count());
            let f = trace_fidelity(&unitary_of(&c).unwrap(), &unitary_of(&r).unwrap());
            prop_assert!(f > 1.0 - 1e-10);
            prop_assert_eq!(reduce(&r), r.clone());
        }
    }
}
