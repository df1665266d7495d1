//! Dense unitaries of small circuits, used as an equivalence oracle.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::circuit::{Circuit, C64};
use crate::statevector::StateVector;

pub const MAX_UNITARY_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitaryError {
    #[error("circuit has {0} qubits; unitaries are limited to {MAX_UNITARY_QUBITS}")]
    TooWide(usize),
    #[error("circuit contains measurements")]
    HasMeasurement,
}

/// The `2^n × 2^n` matrix of the circuit (little-endian basis order).
pub fn unitary_of(c: &Circuit) -> Result<DMatrix<C64>, UnitaryError> {
    if c.num_qubits > MAX_UNITARY_QUBITS {
        return Err(UnitaryError::TooWide(c.num_qubits));
    }
    if c.has_measurements() {
        return Err(UnitaryError::HasMeasurement);
    }
    let dim = 1usize << c.num_qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(c.num_qubits, col);
        for g in &c.gates {
            s.apply_gate(g);
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}

/// `|tr(A†B)| / d`; equals 1 iff the matrices agree up to global phase.
pub fn trace_fidelity(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let tr: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    tr.norm() / a.nrows() as f64
}

/// Max-entry distance between `a` and `b` after removing the best global phase.
pub fn distance_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let tr: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

/// Matrix of the permutation that moves the content of bit `i` to bit `perm[i]`.
pub fn permutation_matrix(perm: &[usize]) -> DMatrix<C64> {
    let n = perm.len();
    let dim = 1usize << n;
    let mut p = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = 0usize;
        for (i, &to) in perm.iter().enumerate() {
            if col >> i & 1 == 1 {
                row |= 1 << to;
            }
        }
        p[(row, col)] = C64::new(1.0, 0.0);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_identity(u: &DMatrix<C64>, tol: f64) -> bool {
        distance_up_to_phase(u, &DMatrix::identity(u.nrows(), u.ncols())) < tol
    }

    #[test]
    fn x_gate_is_pauli_x() {
        let mut c = Circuit::new(1, 0);
        c.x(0);
        let u = unitary_of(&c).unwrap();
        assert_eq!(u[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(u[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(u[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn involutions_give_identity() {
        let mut c = Circuit::new(1, 0);
        c.h(0).h(0);
        assert!(is_identity(&unitary_of(&c).unwrap(), 1e-12));
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).cx(0, 1);
        assert!(is_identity(&unitary_of(&c).unwrap(), 1e-12));
    }

    #[test]
    fn errors() {
        let mut c = Circuit::new(1, 1);
        c.measure(0, 0);
        assert_eq!(unitary_of(&c), Err(UnitaryError::HasMeasurement));
        assert_eq!(unitary_of(&Circuit::new(11, 0)), Err(UnitaryError::TooWide(11)));
    }

    fn random_circuit(ops: &[(u8, usize, usize, f64)]) -> Circuit {
        let mut c = Circuit::new(3, 0);
        for &(k, a, b, t) in ops {
            let (a, b) = (a % 3, b % 3);
            match k % 5 {
                0 => c.h(a),
                1 => c.sx(a),
                2 => c.rz(t, a),
                3 => c.x(a),
                _ if a != b => c.cx(a, b),
                _ => c.h(b),
            };
        }
        c
    }

    proptest! {
        #[test]
        fn concatenation_multiplies(
            a in prop::collection::vec((any::<u8>(), 0usize..3, 0usize..3, -3.0f64..3.0), 0..12),
            b in prop::collection::vec((any::<u8>(), 0usize..3, 0usize..3, -3.0f64..3.0), 0..12),
        ) {
            let ca = random_circuit(&a);
            let cb = random_circuit(&b);
            let mut cat = ca.clone();
            cat.extend_from(&cb);
            let expected = unitary_of(&cb).unwrap() * unitary_of(&ca).unwrap();
            prop_assert!(distance_up_to_phase(&unitary_of(&cat).unwrap(), &expected) < 1e-10);
        }
    }

    #[test]
    fn permutation_matrix_moves_bits() {
        // content of bit 0 goes to bit 1 and vice versa.
        let p = permutation_matrix(&[1, 0]);
        assert_eq!(p[(2, 1)], C64::new(1.0, 0.0));
        assert_eq!(p[(1, 2)], C64::new(1.0, 0.0));
    }
}
