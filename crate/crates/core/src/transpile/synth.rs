//! Two-qubit unitary synthesis via the canonical (KAK) decomposition, and
//! single-qubit Euler decomposition onto `RZ`/`SX`.
//!
//! Any `U ∈ U(4)` factors as `(A1⊗A0) · exp(i(a·XX + b·YY + c·ZZ)) · (B1⊗B0)`
//! up to global phase. The interaction term is realized with three CX gates
//! and the remaining single-qubit slots are merged and decomposed.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use thiserror::Error;

use super::wrap_angle;
use crate::circuit::{unitarity_deviation, Circuit, GateKind, C64, UNITARITY_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("failed to diagonalize the canonical form (residual {0:e})")]
    Diagonalization(f64),
}

const ANGLE_EPS: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Columns are the magic-basis vectors; in this basis local unitaries are
/// real orthogonal and the canonical interaction is diagonal.
fn magic_basis() -> Matrix4<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (c(s, 0.0), c(0.0, 0.0), c(0.0, s));
    Matrix4::new(o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i)
}

// Diagonals of XX, YY and ZZ in the magic basis. They are mutually
// orthogonal and orthogonal to (1,1,1,1).
const XX_DIAG: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const YY_DIAG: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];
const ZZ_DIAG: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Result of the canonical decomposition. Matrices follow the crate's
/// little-endian convention: `kron(high, low)` acts with `low` on the
/// first qubit operand.
#[derive(Clone, Debug)]
pub struct KakDecomposition {
    /// Local factors applied after the interaction, on (operand 0, operand 1).
    pub after: (Matrix2<C64>, Matrix2<C64>),
    /// Local factors applied before the interaction.
    pub before: (Matrix2<C64>, Matrix2<C64>),
    /// Interaction coefficients `(a, b, c)` of `exp(i(a·XX + b·YY + c·ZZ))`.
    pub coefficients: (f64, f64, f64),
}

pub fn kron2(high: &Matrix2<C64>, low: &Matrix2<C64>) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    for r1 in 0..2 {
        for c1 in 0..2 {
            for r0 in 0..2 {
                for c0 in 0..2 {
                    m[(2 * r1 + r0, 2 * c1 + c0)] = high[(r1, c1)] * low[(r0, c0)];
                }
            }
        }
    }
    m
}

/// `exp(i(a·XX + b·YY + c·ZZ))`.
pub fn canonical_gate(a: f64, b: f64, cc: f64) -> Matrix4<C64> {
    let magic = magic_basis();
    let mut d = Matrix4::zeros();
    for k in 0..4 {
        d[(k, k)] = C64::from_polar(1.0, a * XX_DIAG[k] + b * YY_DIAG[k] + cc * ZZ_DIAG[k]);
    }
    magic * d * magic.adjoint()
}

/// Splits `K = kron(high, low)`; `K` must be a tensor product.
fn factor_local(k: &Matrix4<C64>) -> (Matrix2<C64>, Matrix2<C64>) {
    // Rearranged so that R[(r1,c1),(r0,c0)] = high[r1,c1]·low[r0,c0] is rank one.
    let entry = |hi: usize, lo: usize| {
        let (r1, c1) = (hi / 2, hi % 2);
        let (r0, c0) = (lo / 2, lo % 2);
        k[(2 * r1 + r0, 2 * c1 + c0)]
    };
    let (mut best, mut bh, mut bl) = (-1.0, 0, 0);
    for hi in 0..4 {
        for lo in 0..4 {
            let v = entry(hi, lo).norm();
            if v > best {
                best = v;
                bh = hi;
                bl = lo;
            }
        }
    }
    let mut high = Matrix2::from_fn(|r, cidx| entry(2 * r + cidx, bl));
    let det = high.determinant();
    high /= det.sqrt();
    let pivot = high[(bh / 2, bh % 2)];
    let low = Matrix2::from_fn(|r, cidx| entry(bh, 2 * r + cidx) / pivot);
    (high, low)
}

/// Canonical decomposition of a two-qubit unitary.
pub fn kak_decompose(u: &Matrix4<C64>) -> Result<KakDecomposition, SynthError> {
    let deviation = unitarity_deviation(u);
    if deviation > UNITARITY_TOL {
        return Err(SynthError::NotUnitary(deviation));
    }
    let det = u.determinant();
    let u = u / det.powf(0.25);
    let magic = magic_basis();
    let up = magic.adjoint() * u * magic;
    let m2 = up.transpose() * up;

    // M2 is symmetric unitary, so its real and imaginary parts commute and
    // share a real orthogonal eigenbasis. A generic real combination of the
    // two has non-degenerate spectrum with overwhelming probability.
    let re = m2.map(|z| z.re);
    let im = m2.map(|z| z.im);
    let mut best: Option<(f64, nalgebra::Matrix4<f64>)> = None;
    for attempt in 0..64 {
        let x = (0.6180339887 + attempt as f64 * 0.7548776662).fract();
        let mixed = re * x + im * (1.0 - x);
        let eig = SymmetricEigen::new(mixed);
        let p = eig.eigenvectors;
        let pc = p.map(|v| c(v, 0.0));
        let d = pc.transpose() * m2 * pc;
        let mut off = 0.0f64;
        for r in 0..4 {
            for cc in 0..4 {
                if r != cc {
                    off = off.max(d[(r, cc)].norm());
                }
            }
        }
        if best.as_ref().is_none_or(|(o, _)| off < *o) {
            best = Some((off, p));
        }
        if off < 1e-13 {
            break;
        }
    }
    let (off, mut p) = best.expect("at least one attempt");
    if off > 1e-9 {
        return Err(SynthError::Diagonalization(off));
    }
    if p.determinant() < 0.0 {
        for r in 0..4 {
            p[(r, 0)] = -p[(r, 0)];
        }
    }
    let pc = p.map(|v| c(v, 0.0));
    let d = pc.transpose() * m2 * pc;
    let mut theta = [0.0f64; 4];
    for k in 0..4 {
        theta[k] = d[(k, k)].arg() / 2.0;
    }
    let total: f64 = theta.iter().sum();
    if (C64::from_polar(1.0, total) - c(1.0, 0.0)).norm() > 1e-6 {
        theta[0] += PI;
    }
    let mut inv_sqrt = Matrix4::zeros();
    for k in 0..4 {
        inv_sqrt[(k, k)] = C64::from_polar(1.0, -theta[k]);
    }
    let k1 = up * pc * inv_sqrt;
    let k2 = pc.transpose();
    let l1 = magic * k1 * magic.adjoint();
    let l2 = magic * k2 * magic.adjoint();
    let dot = |v: &[f64; 4]| (0..4).map(|k| v[k] * theta[k]).sum::<f64>() / 4.0;
    let coefficients = (dot(&XX_DIAG), dot(&YY_DIAG), dot(&ZZ_DIAG));
    let (a1, a0) = factor_local(&l1);
    let (b1, b0) = factor_local(&l2);
    Ok(KakDecomposition { after: (a0, a1), before: (b0, b1), coefficients })
}

fn rz2(theta: f64) -> Matrix2<C64> {
    Matrix2::new(C64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, theta / 2.0))
}

fn ry2(theta: f64) -> Matrix2<C64> {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// Native gate sequence (in application order) equal to `u` up to global
/// phase: `RZ(λ) · SX · RZ(θ+π) · SX · RZ(φ+π)`, or a single `RZ` when `u` is
/// diagonal. Zero rotations are omitted.
pub fn euler_zsx(u: &Matrix2<C64>) -> Vec<GateKind> {
    let det = u.determinant();
    let su = u / det.sqrt();
    let (a, b) = (su[(0, 0)], su[(1, 0)]);
    let theta = 2.0 * b.norm().atan2(a.norm());
    let sum = -2.0 * a.arg();
    let diff = 2.0 * b.arg();
    let mut out = Vec::with_capacity(5);
    let push_rz = |t: f64, out: &mut Vec<GateKind>| {
        let t = wrap_angle(t);
        if t.abs() > ANGLE_EPS {
            out.push(GateKind::Rz(t));
        }
    };
    if b.norm() < ANGLE_EPS {
        // Diagonal: only φ+λ is defined.
        push_rz(sum, &mut out);
        return out;
    }
    let phi = (sum + diff) / 2.0;
    let lambda = (sum - diff) / 2.0;
    push_rz(lambda, &mut out);
    out.push(GateKind::Sx);
    push_rz(theta + PI, &mut out);
    out.push(GateKind::Sx);
    push_rz(phi + PI, &mut out);
    out
}

fn push_local(circuit: &mut Circuit, q: usize, u: &Matrix2<C64>) {
    for kind in euler_zsx(u) {
        circuit.push(kind, vec![q]);
    }
}

/// Two-qubit circuit on operands `(0, 1)` equal to `u` up to global phase,
/// using at most three CX gates (none when `u` is a local unitary).
pub fn synth_2q(u: &Matrix4<C64>) -> Result<Circuit, SynthError> {
    let kak = kak_decompose(u)?;
    let (a, b, cc) = kak.coefficients;
    let (b0, b1) = kak.before;
    let (a0, a1) = kak.after;
    let mut circuit = Circuit::new(2, 0);

    let local = kron2(&(a1 * b1), &(a0 * b0));
    if crate::unitary::trace_fidelity(&dyn4(u), &dyn4(&local)) > 1.0 - 1e-13 {
        push_local(&mut circuit, 0, &(a0 * b0));
        push_local(&mut circuit, 1, &(a1 * b1));
        return Ok(circuit);
    }

    // Interaction core, operand 1 is the high bit:
    //   q1: RZ(−π/2); CX(q1→q0); q0: RZ(−π/2−2c), q1: RY(2a+π/2);
    //   CX(q0→q1); q1: RY(−2b−π/2); CX(q1→q0); q0: RZ(π/2).
    // Adjacent single-qubit factors are merged into one slot per qubit.
    push_local(&mut circuit, 0, &b0);
    push_local(&mut circuit, 1, &(rz2(-FRAC_PI_2) * b1));
    circuit.cx(1, 0);
    push_local(&mut circuit, 0, &rz2(-FRAC_PI_2 - 2.0 * cc));
    push_local(&mut circuit, 1, &ry2(2.0 * a + FRAC_PI_2));
    circuit.cx(0, 1);
    push_local(&mut circuit, 1, &ry2(-2.0 * b - FRAC_PI_2));
    circuit.cx(1, 0);
    push_local(&mut circuit, 0, &(a0 * rz2(FRAC_PI_2)));
    push_local(&mut circuit, 1, &a1);
    Ok(circuit)
}

fn dyn4(m: &Matrix4<C64>) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(4, 4, |r, cc| m[(r, cc)])
}

/// Haar-random element of U(4) from the QR decomposition of a complex
/// Gaussian matrix with the phase of `R`'s diagonal removed.
pub fn haar_unitary_4<R: rand::Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    use rand_distr::{Distribution, StandardNormal};
    let g = Matrix4::from_fn(|_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) / std::f64::consts::SQRT_2
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut lambda = Matrix4::zeros();
    for k in 0..4 {
        let d = r[(k, k)];
        lambda[(k, k)] = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
    }
    q * lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{cx_matrix, Gate};
    use crate::unitary::{trace_fidelity, unitary_of};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reconstruct_fidelity(u: &Matrix4<C64>) -> (f64, usize) {
        let circ = synth_2q(u).unwrap();
        let v = unitary_of(&circ).unwrap();
        (trace_fidelity(&dyn4(u), &v), circ.cx_count())
    }

    fn one_q(kind: GateKind) -> Matrix2<C64> {
        let m = Gate::new(kind, vec![0]).matrix_1q().unwrap();
        Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }

    #[test]
    fn euler_reproduces_random_single_qubit_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u4 = haar_unitary_4(&mut rng);
            let u = Matrix2::new(u4[(0, 0)], u4[(0, 1)], u4[(1, 0)], u4[(1, 1)]);
            // Polar-normalize the top-left block into a unitary.
            let svd = u.svd(true, true);
            let w = svd.u.unwrap() * svd.v_t.unwrap();
            let seq = euler_zsx(&w);
            let mut acc = Matrix2::identity();
            for k in seq {
                acc = one_q(k) * acc;
            }
            let tr = (w.adjoint() * acc).trace();
            assert!(tr.norm() / 2.0 > 1.0 - 1e-12);
        }
    }

    #[test]
    fn hadamard_is_rz_sx_rz() {
        let h = one_q(GateKind::H);
        let seq = [GateKind::Rz(FRAC_PI_2), GateKind::Sx, GateKind::Rz(FRAC_PI_2)];
        let mut acc = Matrix2::identity();
        for k in seq {
            acc = one_q(k) * acc;
        }
        assert!((h.adjoint() * acc).trace().norm() / 2.0 > 1.0 - 1e-15);
    }

    #[test]
    fn identity_needs_no_cx() {
        let (f, cx) = reconstruct_fidelity(&Matrix4::identity());
        assert!(f > 1.0 - 1e-12);
        assert_eq!(cx, 0);
        assert!(synth_2q(&Matrix4::identity()).unwrap().gates.is_empty());
    }

    #[test]
    fn cx_reconstructs() {
        let (f, cx) = reconstruct_fidelity(&cx_matrix());
        assert!(f >= 1.0 - 1e-9);
        assert!(cx <= 3);
    }

    #[test]
    fn swap_and_locals_reconstruct() {
        let swap = Matrix4::from_fn(|r, cc| {
            let perm = [0, 2, 1, 3];
            if perm[cc] == r {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(reconstruct_fidelity(&swap).0 >= 1.0 - 1e-9);
        let local = kron2(&ry2(0.3), &rz2(1.1));
        let (f, cx) = reconstruct_fidelity(&local);
        assert!(f >= 1.0 - 1e-9);
        assert_eq!(cx, 0);
    }

    #[test]
    fn canonical_gate_matches_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u = haar_unitary_4(&mut rng);
            let k = kak_decompose(&u).unwrap();
            let (a, b, cc) = k.coefficients;
            let v = kron2(&k.after.1, &k.after.0) * canonical_gate(a, b, cc) * kron2(&k.before.1, &k.before.0);
            assert!(trace_fidelity(&dyn4(&u), &dyn4(&v)) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn haar_samples_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = haar_unitary_4(&mut rng);
            let (f, cx) = reconstruct_fidelity(&u);
            assert!(f >= 1.0 - 1e-9, "fidelity {f}");
            assert!(cx <= 3);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let mut m = Matrix4::identity();
        m[(1, 1)] = c(2.0, 0.0);
        assert!(matches!(synth_2q(&m), Err(SynthError::NotUnitary(_))));
    }
}
