//! Lowering to the native basis `{RZ, SX, X, CX}`.

use nalgebra::Matrix4;

use super::synth::synth_2q;
use super::TranspileError;
use crate::circuit::{Circuit, GateKind, C64};
use std::f64::consts::FRAC_PI_2;

/// Rewrites `H` as `RZ(π/2)·SX·RZ(π/2)` and synthesizes arbitrary two-qubit
/// unitaries. Native gates, measurements, barriers and delays pass through.
pub fn to_native(c: &Circuit) -> Result<Circuit, TranspileError> {
    c.validate()?;
    let mut out = Circuit::new(c.num_qubits, c.num_clbits);
    for g in &c.gates {
        match &g.kind {
            GateKind::H => {
                let q = g.qubits[0];
                out.rz(FRAC_PI_2, q).sx(q).rz(FRAC_PI_2, q);
            }
            GateKind::U2q(m) => {
                let m: &Matrix4<C64> = m;
                let sub = synth_2q(m)?;
                for sg in sub.gates {
                    let qubits = sg.qubits.iter().map(|&q| g.qubits[q]).collect();
                    out.push(sg.kind, qubits);
                }
            }
            _ => {
                out.push(g.kind.clone(), g.qubits.clone());
            }
        }
    }
    Ok(out)
}

pub fn is_native(c: &Circuit) -> bool {
    c.gates.iter().all(|g| !matches!(g.kind, GateKind::H | GateKind::U2q(_)))
}
