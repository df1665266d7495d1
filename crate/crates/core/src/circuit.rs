//! Gate-level circuit representation.
//!
//! Qubit ordering is little-endian throughout the crate: in a state vector,
//! qubit `q` is bit `q` of the amplitude index. Two-qubit matrices follow the
//! same rule, with `qubits[0]` as the low bit of the 4-dimensional index.

use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Qubit = usize;
pub type Clbit = usize;
/// Integer nanoseconds.
pub type Nanos = u64;

pub type C64 = Complex64;

/// Tolerance on `‖U†U − I‖_max` for user-supplied two-qubit unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {index} ({name}): qubit {qubit} out of range for {num_qubits}-qubit circuit")]
    QubitOutOfRange { index: usize, name: &'static str, qubit: Qubit, num_qubits: usize },
    #[error("gate {index} ({name}): clbit {clbit} out of range for {num_clbits} clbits")]
    ClbitOutOfRange { index: usize, name: &'static str, clbit: Clbit, num_clbits: usize },
    #[error("gate {index} ({name}): repeated qubit {qubit}")]
    RepeatedQubit { index: usize, name: &'static str, qubit: Qubit },
    #[error("gate {index} ({name}): expected {expected} qubits, got {got}")]
    Arity { index: usize, name: &'static str, expected: usize, got: usize },
    #[error("gate {index}: two-qubit matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { index: usize, deviation: f64 },
    #[error("gate {index}: angle is not finite")]
    NonFiniteAngle { index: usize },
    #[error("clbit {clbit} is written by more than one measurement")]
    ClbitReused { clbit: Clbit },
}

/// The operation a gate performs. Qubit operands live on [`Gate`].
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz(f64),
    Sx,
    X,
    H,
    /// Operands are `[control, target]`.
    Cx,
    /// Arbitrary two-qubit unitary.
    U2q(Box<Matrix4<C64>>),
    Measure(Clbit),
    /// Full-width synchronization point.
    Barrier,
    /// Explicit idle period of the given length.
    Delay(Nanos),
}

/// Gate kind without parameters, used as a key for durations and error rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateType {
    Rz,
    Sx,
    X,
    H,
    Cx,
    U2q,
    Measure,
    Barrier,
    Delay,
}

impl GateType {
    pub fn name(self) -> &'static str {
        match self {
            GateType::Rz => "rz",
            GateType::Sx => "sx",
            GateType::X => "x",
            GateType::H => "h",
            GateType::Cx => "cx",
            GateType::U2q => "u2q",
            GateType::Measure => "measure",
            GateType::Barrier => "barrier",
            GateType::Delay => "delay",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "rz" => GateType::Rz,
            "sx" => GateType::Sx,
            "x" => GateType::X,
            "h" => GateType::H,
            "cx" => GateType::Cx,
            "u2q" => GateType::U2q,
            "measure" => GateType::Measure,
            "barrier" => GateType::Barrier,
            "delay" => GateType::Delay,
            _ => return None,
        })
    }

    fn arity(self) -> Option<usize> {
        match self {
            GateType::Rz | GateType::Sx | GateType::X | GateType::H => Some(1),
            GateType::Measure | GateType::Delay => Some(1),
            GateType::Cx | GateType::U2q => Some(2),
            GateType::Barrier => None,
        }
    }
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<Qubit>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<Qubit>) -> Self {
        Gate { kind, qubits }
    }

    pub fn gate_type(&self) -> GateType {
        match self.kind {
            GateKind::Rz(_) => GateType::Rz,
            GateKind::Sx => GateType::Sx,
            GateKind::X => GateType::X,
            GateKind::H => GateType::H,
            GateKind::Cx => GateType::Cx,
            GateKind::U2q(_) => GateType::U2q,
            GateKind::Measure(_) => GateType::Measure,
            GateKind::Barrier => GateType::Barrier,
            GateKind::Delay(_) => GateType::Delay,
        }
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self.kind, GateKind::Barrier)
    }

    pub fn is_measure(&self) -> bool {
        matches!(self.kind, GateKind::Measure(_))
    }

    /// True for gates that act on the quantum state (not barriers, delays or
    /// measurements).
    pub fn is_unitary(&self) -> bool {
        !matches!(self.kind, GateKind::Measure(_) | GateKind::Barrier | GateKind::Delay(_))
    }

    /// 2×2 matrix of a single-qubit unitary gate.
    pub fn matrix_1q(&self) -> Option<[[C64; 2]; 2]> {
        Some(match self.kind {
            GateKind::Rz(theta) => rz_matrix(theta),
            GateKind::Sx => sx_matrix(),
            GateKind::X => x_matrix(),
            GateKind::H => h_matrix(),
            _ => return None,
        })
    }

    /// 4×4 matrix of a two-qubit unitary gate, indexed with `qubits[0]` as the
    /// low bit.
    pub fn matrix_2q(&self) -> Option<Matrix4<C64>> {
        match &self.kind {
            GateKind::Cx => Some(cx_matrix()),
            GateKind::U2q(m) => Some(**m),
            _ => None,
        }
    }
}

pub fn rz_matrix(theta: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    [[C64::from_polar(1.0, -theta / 2.0), z], [z, C64::from_polar(1.0, theta / 2.0)]]
}

pub fn sx_matrix() -> [[C64; 2]; 2] {
    let a = C64::new(0.5, 0.5);
    let b = C64::new(0.5, -0.5);
    [[a, b], [b, a]]
}

pub fn x_matrix() -> [[C64; 2]; 2] {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    [[z, o], [o, z]]
}

pub fn h_matrix() -> [[C64; 2]; 2] {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// CX with control on the low bit (`qubits[0]`).
pub fn cx_matrix() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    let one = C64::new(1.0, 0.0);
    // |c t> index = c + 2 t; control set flips target.
    m[(0, 0)] = one;
    m[(2, 2)] = one;
    m[(3, 1)] = one;
    m[(1, 3)] = one;
    m
}

/// Largest absolute entry of `U†U − I`.
pub fn unitarity_deviation(m: &Matrix4<C64>) -> f64 {
    let p = m.adjoint() * m - Matrix4::identity();
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// An ordered list of gates over a fixed register pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit { num_qubits, num_clbits, gates: Vec::new() }
    }

    /// Builds a circuit and checks every invariant.
    pub fn from_gates(num_qubits: usize, num_clbits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let c = Circuit { num_qubits, num_clbits, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut clbit_used = vec![false; self.num_clbits];
        for (index, g) in self.gates.iter().enumerate() {
            let ty = g.gate_type();
            let name = ty.name();
            if let Some(expected) = ty.arity() {
                if g.qubits.len() != expected {
                    return Err(CircuitError::Arity { index, name, expected, got: g.qubits.len() });
                }
            }
            for (i, &q) in g.qubits.iter().enumerate() {
                if q >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange { index, name, qubit: q, num_qubits: self.num_qubits });
                }
                if g.qubits[..i].contains(&q) {
                    return Err(CircuitError::RepeatedQubit { index, name, qubit: q });
                }
            }
            match &g.kind {
                GateKind::Rz(theta) if !theta.is_finite() => return Err(CircuitError::NonFiniteAngle { index }),
                GateKind::U2q(m) => {
                    let deviation = unitarity_deviation(m);
                    if deviation > UNITARITY_TOL {
                        return Err(CircuitError::NotUnitary { index, deviation });
                    }
                }
                GateKind::Measure(c) => {
                    if *c >= self.num_clbits {
                        return Err(CircuitError::ClbitOutOfRange { index, name, clbit: *c, num_clbits: self.num_clbits });
                    }
                    if clbit_used[*c] {
                        return Err(CircuitError::ClbitReused { clbit: *c });
                    }
                    clbit_used[*c] = true;
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn push(&mut self, kind: GateKind, qubits: Vec<Qubit>) -> &mut Self {
        self.gates.push(Gate { kind, qubits });
        self
    }

    pub fn rz(&mut self, theta: f64, q: Qubit) -> &mut Self {
        self.push(GateKind::Rz(theta), vec![q])
    }

    pub fn sx(&mut self, q: Qubit) -> &mut Self {
        self.push(GateKind::Sx, vec![q])
    }

    pub fn x(&mut self, q: Qubit) -> &mut Self {
        self.push(GateKind::X, vec![q])
    }

    pub fn h(&mut self, q: Qubit) -> &mut Self {
        self.push(GateKind::H, vec![q])
    }

    pub fn cx(&mut self, control: Qubit, target: Qubit) -> &mut Self {
        self.push(GateKind::Cx, vec![control, target])
    }

    pub fn u2q(&mut self, m: Matrix4<C64>, q0: Qubit, q1: Qubit) -> &mut Self {
        self.push(GateKind::U2q(Box::new(m)), vec![q0, q1])
    }

    pub fn measure(&mut self, q: Qubit, c: Clbit) -> &mut Self {
        self.push(GateKind::Measure(c), vec![q])
    }

    /// Measures qubit `i` into clbit `i` for every qubit.
    pub fn measure_all(&mut self) -> &mut Self {
        for q in 0..self.num_qubits.min(self.num_clbits) {
            self.measure(q, q);
        }
        self
    }

    pub fn barrier(&mut self) -> &mut Self {
        self.push(GateKind::Barrier, Vec::new())
    }

    pub fn delay(&mut self, ns: Nanos, q: Qubit) -> &mut Self {
        self.push(GateKind::Delay(ns), vec![q])
    }

    /// Appends every gate of `other`, which must have the same width.
    pub fn extend_from(&mut self, other: &Circuit) -> &mut Self {
        self.gates.extend(other.gates.iter().cloned());
        self
    }

    pub fn count(&self, ty: GateType) -> usize {
        self.gates.iter().filter(|g| g.gate_type() == ty).count()
    }

    pub fn cx_count(&self) -> usize {
        self.count(GateType::Cx)
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(Gate::is_measure)
    }

    /// `(qubit, clbit)` pairs in program order.
    pub fn measurements(&self) -> Vec<(Qubit, Clbit)> {
        self.gates
            .iter()
            .filter_map(|g| match g.kind {
                GateKind::Measure(c) => Some((g.qubits[0], c)),
                _ => None,
            })
            .collect()
    }

    /// True when no qubit is acted on after it has been measured.
    pub fn measurements_terminal(&self) -> bool {
        let mut measured = vec![false; self.num_qubits];
        for g in &self.gates {
            if g.is_barrier() {
                continue;
            }
            if g.qubits.iter().any(|&q| measured[q]) && !g.is_measure() {
                return false;
            }
            if g.is_measure() {
                measured[g.qubits[0]] = true;
            }
        }
        true
    }

    /// Copy of the circuit without measurements.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            gates: self.gates.iter().filter(|g| !g.is_measure()).cloned().collect(),
        }
    }

    /// Logical depth: longest chain of unitary gates sharing qubits.
    /// Barriers synchronize but do not add a layer.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            if g.is_barrier() {
                let m = level.iter().copied().max().unwrap_or(0);
                level.iter_mut().for_each(|l| *l = m);
                continue;
            }
            if matches!(g.kind, GateKind::Delay(_)) {
                continue;
            }
            let l = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.qubits {
                level[q] = l;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }
}
