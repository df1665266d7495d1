//! Dense state-vector kernels shared by the exact and noisy simulators.

use nalgebra::Matrix4;

use crate::circuit::{Gate, GateKind, Qubit, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = C64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    /// Computational basis state with amplitude index `index`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = C64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be a power of two");
        let num_qubits = amps.len().trailing_zeros() as usize;
        StateVector { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn apply_1q(&mut self, q: Qubit, m: &[[C64; 2]; 2]) {
        let stride = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    /// Diagonal single-qubit gate `diag(d0, d1)`.
    pub fn apply_diag(&mut self, q: Qubit, d0: C64, d1: C64) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { d0 } else { d1 };
        }
    }

    pub fn apply_rz(&mut self, q: Qubit, theta: f64) {
        self.apply_diag(q, C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0));
    }

    pub fn apply_x(&mut self, q: Qubit) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn apply_y(&mut self, q: Qubit) {
        let bit = 1usize << q;
        let i_unit = C64::new(0.0, 1.0);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = -i_unit * a1;
                self.amps[i | bit] = i_unit * a0;
            }
        }
    }

    pub fn apply_z(&mut self, q: Qubit) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = -*a;
            }
        }
    }

    pub fn apply_cx(&mut self, control: Qubit, target: Qubit) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }

    /// Two-qubit unitary with `q0` as the low bit of the matrix index.
    pub fn apply_2q(&mut self, q0: Qubit, q1: Qubit, m: &Matrix4<C64>) {
        let b0 = 1usize << q0;
        let b1 = 1usize << q1;
        for i in 0..self.amps.len() {
            if i & b0 != 0 || i & b1 != 0 {
                continue;
            }
            let idx = [i, i | b0, i | b1, i | b0 | b1];
            let v = [self.amps[idx[0]], self.amps[idx[1]], self.amps[idx[2]], self.amps[idx[3]]];
            for r in 0..4 {
                self.amps[idx[r]] = m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
            }
        }
    }

    /// `exp(−i·(φ/2)·Z⊗Z)` on qubits `a`, `b`.
    pub fn apply_zz(&mut self, a: Qubit, b: Qubit, phi: f64) {
        let ba = 1usize << a;
        let bb = 1usize << b;
        let same = C64::from_polar(1.0, -phi / 2.0);
        let diff = C64::from_polar(1.0, phi / 2.0);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let parity = ((i & ba != 0) as u8) ^ ((i & bb != 0) as u8);
            *amp *= if parity == 0 { same } else { diff };
        }
    }

    /// Applies a unitary gate; measurements, barriers and delays are no-ops.
    pub fn apply_gate(&mut self, g: &Gate) {
        match &g.kind {
            GateKind::Rz(theta) => self.apply_rz(g.qubits[0], *theta),
            GateKind::X => self.apply_x(g.qubits[0]),
            GateKind::Sx | GateKind::H => {
                let m = g.matrix_1q().expect("single-qubit gate");
                self.apply_1q(g.qubits[0], &m)
            }
            GateKind::Cx => self.apply_cx(g.qubits[0], g.qubits[1]),
            GateKind::U2q(m) => self.apply_2q(g.qubits[0], g.qubits[1], m),
            GateKind::Measure(_) | GateKind::Barrier | GateKind::Delay(_) => {}
        }
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: Qubit) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let overlap: C64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        overlap.norm_sqr()
    }
}
