//! Benchmark circuit families. Every generator emits logical circuits over
//! `{RZ, SX, X, H, CX, U2Q}` with terminal measurements; bitstring position
//! `i` always refers to qubit (and clbit) `i`.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::circuit::{Circuit, Qubit};
use crate::noise::distribution::{Pauli, PauliString};
use crate::transpile::synth::haar_unitary_4;

fn parse_target(s: &str, width: usize) -> Result<Vec<bool>, BenchError> {
    if s.len() != width || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(BenchError::Invalid(format!("expected a {width}-bit string, got {s:?}")));
    }
    Ok(s.chars().map(|c| c == '1').collect())
}

/// `RX(θ) = H·RZ(θ)·H`.
pub fn rx(c: &mut Circuit, theta: f64, q: Qubit) {
    c.h(q).rz(theta, q).h(q);
}

/// `RY(θ) = S·RX(θ)·S†`.
pub fn ry(c: &mut Circuit, theta: f64, q: Qubit) {
    c.rz(-PI / 2.0, q);
    rx(c, theta, q);
    c.rz(PI / 2.0, q);
}

pub fn cz(c: &mut Circuit, a: Qubit, b: Qubit) {
    c.h(b).cx(a, b).h(b);
}

/// Controlled phase `diag(1, 1, 1, e^{iφ})`, up to global phase.
pub fn cphase(c: &mut Circuit, phi: f64, a: Qubit, b: Qubit) {
    c.rz(phi / 2.0, a).rz(phi / 2.0, b).cx(a, b).rz(-phi / 2.0, b).cx(a, b);
}

/// `exp(−iθ/2·Z⊗Z)`.
pub fn rzz(c: &mut Circuit, theta: f64, a: Qubit, b: Qubit) {
    c.cx(a, b).rz(theta, b).cx(a, b);
}

/// Toffoli with six CX.
pub fn ccx(c: &mut Circuit, a: Qubit, b: Qubit, t: Qubit) {
    let t_gate = PI / 4.0;
    c.h(t).cx(b, t).rz(-t_gate, t).cx(a, t).rz(t_gate, t).cx(b, t).rz(-t_gate, t).cx(a, t);
    c.rz(t_gate, b).rz(t_gate, t).h(t).cx(a, b).rz(t_gate, a).rz(-t_gate, b).cx(a, b);
}

/// Bernstein–Vazirani on `n` qubits: `n−1` data qubits and an ancilla (the
/// last qubit) in |−⟩. The oracle defaults to all ones.
pub fn gen_bv(n: usize, oracle: Option<&str>) -> Result<Circuit, BenchError> {
    if n < 2 {
        return Err(BenchError::Invalid("BV needs at least 2 qubits".into()));
    }
    let bits = match oracle {
        Some(s) => parse_target(s, n - 1)?,
        None => vec![true; n - 1],
    };
    let anc = n - 1;
    let mut c = Circuit::new(n, n - 1);
    c.x(anc).h(anc);
    for q in 0..anc {
        c.h(q);
    }
    for (q, &b) in bits.iter().enumerate() {
        if b {
            c.cx(q, anc);
        }
    }
    for q in 0..anc {
        c.h(q);
    }
    for q in 0..anc {
        c.measure(q, q);
    }
    Ok(c)
}

/// Value of a bitstring with position `i` worth `2^i`.
fn bits_value(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |v, (i, &b)| v | (b as u64) << i)
}

/// Prepares the inverse Fourier transform of `input` with one H layer and
/// one RZ layer, then applies the QFT; the ideal output is `input`.
pub fn gen_qft(n: usize, input: &str) -> Result<Circuit, BenchError> {
    if n < 2 {
        return Err(BenchError::Invalid("QFT needs at least 2 qubits".into()));
    }
    let mut bits = parse_target(input, n)?;
    // The QFT below omits the final swap network, so its output register is
    // reversed; preparing the inverse transform of reversed(x) undoes that.
    bits.reverse();
    let x = bits_value(&bits) as f64;
    let size = (1u64 << n) as f64;
    let mut c = Circuit::new(n, n);
    for j in 0..n {
        c.h(j);
        c.rz(-2.0 * PI * x * (1u64 << j) as f64 / size, j);
    }
    for j in (0..n).rev() {
        c.h(j);
        for k in (0..j).rev() {
            cphase(&mut c, PI / (1u64 << (j - k)) as f64, k, j);
        }
    }
    for q in 0..n {
        c.measure(q, q);
    }
    Ok(c)
}

/// Toffoli up to a diagonal phase, with three CX. The gate is its own
/// inverse, so a compute/uncompute pair around diagonal gates is exact.
pub fn rccx(c: &mut Circuit, a: Qubit, b: Qubit, t: Qubit) {
    let t_gate = PI / 4.0;
    c.h(t).rz(t_gate, t).cx(b, t).rz(-t_gate, t).cx(a, t).rz(t_gate, t).cx(b, t).rz(-t_gate, t).h(t);
}

/// Phase flip of |1…1⟩ on the five search qubits using two clean ancillas.
fn mcz5(c: &mut Circuit, q: [Qubit; 5], anc: [Qubit; 2]) {
    rccx(c, q[0], q[1], anc[0]);
    rccx(c, q[2], anc[0], anc[1]);
    c.h(q[4]);
    ccx(c, q[3], anc[1], q[4]);
    c.h(q[4]);
    rccx(c, q[2], anc[0], anc[1]);
    rccx(c, q[0], q[1], anc[0]);
}

/// Grover search over 5 qubits (qubits 0–4) with two ancillas (5, 6).
pub fn gen_grover5(target: &str, iterations: usize) -> Result<Circuit, BenchError> {
    if iterations > 2 {
        return Err(BenchError::Invalid(format!("Grover iterations must be at most 2, got {iterations}")));
    }
    let bits = parse_target(target, 5)?;
    let search = [0, 1, 2, 3, 4];
    let anc = [5, 6];
    let mut c = Circuit::new(7, 5);
    for &q in &search {
        c.h(q);
    }
    for _ in 0..iterations {
        for (q, &b) in bits.iter().enumerate() {
            if !b {
                c.x(q);
            }
        }
        mcz5(&mut c, search, anc);
        for (q, &b) in bits.iter().enumerate() {
            if !b {
                c.x(q);
            }
        }
        for &q in &search {
            c.h(q).x(q);
        }
        mcz5(&mut c, search, anc);
        for &q in &search {
            c.x(q).h(q);
        }
    }
    for &q in &search {
        c.measure(q, q);
    }
    Ok(c)
}

/// Ideal target probability after `k` Grover iterations over `2^n` items.
pub fn grover_success(n: usize, k: usize) -> f64 {
    let theta = (1.0 / ((1u64 << n) as f64).sqrt()).asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Weighted graph for MaxCut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

const MAXCUT7: &str = include_str!("../../data/maxcut7.json");

impl WeightedGraph {
    /// The shipped 7-node, 10-edge instance.
    pub fn maxcut7() -> Self {
        serde_json::from_str(MAXCUT7).expect("shipped graph parses")
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let g: WeightedGraph = serde_json::from_str(text).map_err(|e| BenchError::Invalid(e.to_string()))?;
        if g.edges.iter().any(|&(a, b, w)| a >= g.nodes || b >= g.nodes || a == b || !w.is_finite()) {
            return Err(BenchError::Invalid("graph edge out of range".into()));
        }
        Ok(g)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Cut weight of an assignment (bit `i` = side of node `i`).
    pub fn cut_value(&self, key: u64) -> f64 {
        self.edges.iter().filter(|&&(a, b, _)| (key >> a ^ key >> b) & 1 == 1).map(|e| e.2).sum()
    }
}

/// Single-mode Fourier map from `(u, v)` to per-layer angles.
pub fn fourier_angles(u: f64, v: f64, p: usize) -> (Vec<f64>, Vec<f64>) {
    let k = 1.0;
    let arg = |l: usize| (k - 0.5) * (l as f64 - 0.5) * PI / p as f64;
    let gammas = (1..=p).map(|l| u * arg(l).sin()).collect();
    let betas = (1..=p).map(|l| v * arg(l).cos()).collect();
    (gammas, betas)
}

/// Depth-`p` QAOA circuit for MaxCut on `g`.
pub fn qaoa_circuit(g: &WeightedGraph, gammas: &[f64], betas: &[f64]) -> Circuit {
    let n = g.nodes;
    let mut c = Circuit::new(n, n);
    for q in 0..n {
        c.h(q);
    }
    for (gamma, beta) in gammas.iter().zip(betas) {
        for &(a, b, w) in &g.edges {
            rzz(&mut c, -gamma * w, a, b);
        }
        for q in 0..n {
            rx(&mut c, 2.0 * beta, q);
        }
    }
    c.measure_all();
    c
}

/// Grid of QAOA circuits over `(u, v)`, row-major with `u` along rows.
#[derive(Clone, Debug)]
pub struct QaoaGrid {
    pub circuits: Vec<Circuit>,
    pub shape: (usize, usize),
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
}

pub const QAOA_LAYERS: usize = 3;
pub const QAOA_GRID: (usize, usize) = (24, 24);
pub const QAOA_U_RANGE: (f64, f64) = (0.0, PI);
pub const QAOA_V_RANGE: (f64, f64) = (0.0, PI / 2.0);

pub fn gen_qaoa_landscape(g: &WeightedGraph, p: usize, shape: (usize, usize)) -> QaoaGrid {
    use crate::metrics::Landscape;
    let mut circuits = Vec::with_capacity(shape.0 * shape.1);
    for i in 0..shape.0 {
        for j in 0..shape.1 {
            let u = Landscape::axis_value(QAOA_U_RANGE, i, shape.0);
            let v = Landscape::axis_value(QAOA_V_RANGE, j, shape.1);
            let (gammas, betas) = fourier_angles(u, v, p);
            circuits.push(qaoa_circuit(g, &gammas, &betas));
        }
    }
    QaoaGrid { circuits, shape, u_range: QAOA_U_RANGE, v_range: QAOA_V_RANGE }
}

/// Sum of weighted Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    pub terms: Vec<(PauliString, f64)>,
}

impl PauliHamiltonian {
    /// Parses lines of `coeff pauli_string`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut terms = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| BenchError::Invalid(format!("hamiltonian line {}: {why}", no + 1));
            let mut parts = line.split_whitespace();
            let coeff: f64 = parts.next().ok_or_else(|| bad("empty"))?.parse().map_err(|_| bad("bad coefficient"))?;
            let pauli: PauliString = parts.next().ok_or_else(|| bad("missing Pauli string"))?.parse().map_err(|_| bad("bad Pauli string"))?;
            if parts.next().is_some() {
                return Err(bad("trailing text"));
            }
            if !coeff.is_finite() {
                return Err(bad("coefficient is not finite"));
            }
            terms.push((pauli, coeff));
        }
        let h = PauliHamiltonian { terms };
        let w = h.width().ok_or_else(|| BenchError::Invalid("hamiltonian has no terms".into()))?;
        if h.terms.iter().any(|(p, _)| p.len() != w) {
            return Err(BenchError::Invalid("Pauli strings differ in width".into()));
        }
        Ok(h)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, BenchError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn width(&self) -> Option<usize> {
        self.terms.first().map(|(p, _)| p.len())
    }

    /// Energy from per-term expectation values (identity terms count as 1).
    pub fn energy(&self, expectations: &[f64]) -> f64 {
        self.terms.iter().zip(expectations).map(|((_, c), e)| c * e).sum()
    }
}

const HEISENBERG4: &str = include_str!("../../data/hamiltonians/heisenberg4.txt");
const TFIM6: &str = include_str!("../../data/hamiltonians/tfim6.txt");

/// Shipped sample Hamiltonian for `n ∈ {4, 6}`.
pub fn sample_hamiltonian(n: usize) -> Option<PauliHamiltonian> {
    match n {
        4 => PauliHamiltonian::parse(HEISENBERG4).ok(),
        6 => PauliHamiltonian::parse(TFIM6).ok(),
        _ => None,
    }
}

pub const VQE_REPS: usize = 2;

/// Number of ansatz parameters on `n` qubits.
pub fn vqe_param_count(n: usize) -> usize {
    (VQE_REPS + 1) * n
}

/// RY layers with a linear CX chain between them.
pub fn vqe_ansatz(n: usize, params: &[f64]) -> Circuit {
    let mut c = Circuit::new(n, n);
    for rep in 0..=VQE_REPS {
        for q in 0..n {
            ry(&mut c, params[rep * n + q], q);
        }
        if rep < VQE_REPS {
            for q in 0..n - 1 {
                c.cx(q, q + 1);
            }
        }
    }
    c
}

/// One measurement circuit per Hamiltonian term, rotated so the term is
/// diagonal; its expectation is the parity over the term's support.
pub fn gen_vqe(n: usize, params: &[f64], ham: &PauliHamiltonian) -> Result<Vec<(Circuit, PauliString)>, BenchError> {
    if n != 4 && n != 6 {
        return Err(BenchError::Invalid(format!("VQE supports 4 or 6 qubits, got {n}")));
    }
    if params.len() != vqe_param_count(n) {
        return Err(BenchError::Invalid(format!("expected {} parameters, got {}", vqe_param_count(n), params.len())));
    }
    if ham.width() != Some(n) {
        return Err(BenchError::Invalid(format!("hamiltonian width {:?} does not match {n} qubits", ham.width())));
    }
    let ansatz = vqe_ansatz(n, params);
    Ok(ham
        .terms
        .iter()
        .map(|(p, _)| {
            let mut c = ansatz.clone();
            for (q, &op) in p.0.iter().enumerate() {
                match op {
                    Pauli::X => {
                        c.h(q);
                    }
                    Pauli::Y => {
                        c.rz(-PI / 2.0, q).h(q);
                    }
                    _ => {}
                }
            }
            c.measure_all();
            (c, p.clone())
        })
        .collect())
}

/// Z-parity checks of the 5-qubit repetition code, as qubit pairs.
pub const REPETITION_CHECKS: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 4)];

/// Repetition code on data qubits 0–4 with ancillas 5–8, prepared in the
/// logical |+⟩ state. Clbits 0–3 hold the ancilla syndrome, clbits 4–8 the
/// data qubits.
pub fn gen_repetition5(inject: Option<usize>) -> Result<Circuit, BenchError> {
    let mut c = Circuit::new(9, 9);
    c.h(0);
    for q in 1..5 {
        c.cx(q - 1, q);
    }
    if let Some(q) = inject {
        if q >= 5 {
            return Err(BenchError::Invalid(format!("injection qubit {q} is not a data qubit")));
        }
        c.x(q);
    }
    for (k, &(a, b)) in REPETITION_CHECKS.iter().enumerate() {
        c.cx(a, 5 + k).cx(b, 5 + k);
    }
    for k in 0..4 {
        c.measure(5 + k, k);
    }
    for q in 0..5 {
        c.measure(q, 4 + q);
    }
    Ok(c)
}

/// Splits an outcome of [`gen_repetition5`] into (measured, expected)
/// syndromes.
pub fn repetition_syndromes(key: u64) -> (u64, u64) {
    let measured = key & 0xF;
    let data = key >> 4;
    let expected = REPETITION_CHECKS
        .iter()
        .enumerate()
        .fold(0, |s, (k, &(a, b))| s | ((data >> a ^ data >> b) & 1) << k);
    (measured, expected)
}

/// Stabilizer generators of the five-qubit code.
pub const FIVE_QUBIT_GENERATORS: [&str; 4] = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"];

pub fn five_qubit_generator(k: usize) -> PauliString {
    FIVE_QUBIT_GENERATORS[k].parse().expect("valid generator")
}

fn apply_pauli(c: &mut Circuit, p: Pauli, q: Qubit) {
    match p {
        Pauli::X => {
            c.x(q);
        }
        Pauli::Z => {
            c.rz(PI, q);
        }
        Pauli::Y => {
            c.x(q).rz(PI, q);
        }
        Pauli::I => {}
    }
}

/// Prepares |0_L⟩ of the five-qubit code on qubits 0–4: a five-cycle graph
/// state followed by local Cliffords and a Pauli frame fix.
pub fn encode_five_qubit_zero(c: &mut Circuit) {
    for q in 0..5 {
        c.h(q);
    }
    for (a, b) in [(0, 2), (0, 4), (1, 2), (1, 3), (3, 4)] {
        cz(c, a, b);
    }
    let s = PI / 2.0;
    c.h(0).rz(s, 0).h(0);
    c.rz(s, 1);
    c.rz(s, 2);
    c.h(3).rz(s, 3).h(3);
    c.h(4);
    apply_pauli(c, Pauli::Y, 4);
}

/// Five-qubit code: encode |0_L⟩, optionally inject a single-qubit Pauli,
/// measure all four generators with ancillas 5–8 (clbits 0–3), then measure
/// the data qubits in the basis of generator `check` (clbits 4–8).
pub fn gen_five_qubit_code(inject: Option<(Pauli, usize)>, check: usize) -> Result<Circuit, BenchError> {
    if check >= 4 {
        return Err(BenchError::Invalid(format!("generator index {check} out of range 0..4")));
    }
    let mut c = Circuit::new(9, 9);
    encode_five_qubit_zero(&mut c);
    if let Some((p, q)) = inject {
        if q >= 5 {
            return Err(BenchError::Invalid(format!("injection qubit {q} is not a data qubit")));
        }
        apply_pauli(&mut c, p, q);
    }
    for k in 0..4 {
        let anc = 5 + k;
        c.h(anc);
        for (q, &p) in five_qubit_generator(k).0.iter().enumerate() {
            match p {
                Pauli::X => {
                    c.cx(anc, q);
                }
                Pauli::Z => cz(&mut c, anc, q),
                Pauli::Y => {
                    c.rz(-PI / 2.0, q).cx(anc, q).rz(PI / 2.0, q);
                }
                Pauli::I => {}
            }
        }
        c.h(anc);
        c.measure(anc, k);
    }
    for (q, &p) in five_qubit_generator(check).0.iter().enumerate() {
        match p {
            Pauli::X => {
                c.h(q);
            }
            Pauli::Y => {
                c.rz(-PI / 2.0, q).h(q);
            }
            _ => {}
        }
    }
    for q in 0..5 {
        c.measure(q, 4 + q);
    }
    Ok(c)
}

/// (ancilla syndrome bit, directly measured stabilizer bit) for generator
/// `check` from an outcome of [`gen_five_qubit_code`].
pub fn five_qubit_bits(key: u64, check: usize) -> (u64, u64) {
    let measured = key >> check & 1;
    let data = key >> 4 & 0x1F;
    let direct = (data & five_qubit_generator(check).support_mask()).count_ones() as u64 & 1;
    (measured, direct)
}

/// Random quantum-volume circuits: `n` layers of Haar SU(4) blocks on a
/// random pairing of the qubits.
pub fn gen_qv(n: usize, circuits: usize, seed: u64) -> Result<Vec<Circuit>, BenchError> {
    if n < 2 {
        return Err(BenchError::Invalid("QV needs at least 2 qubits".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(circuits);
    for _ in 0..circuits {
        let mut c = Circuit::new(n, n);
        for _ in 0..n {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for pair in perm.chunks_exact(2) {
                c.u2q(haar_unitary_4(&mut rng), pair[0], pair[1]);
            }
        }
        c.measure_all();
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::noise::distribution::{format_bits, parse_bits, Distribution};
    use crate::noise::exact_distribution;
    use crate::statevector::StateVector;

    fn exact(c: &Circuit) -> Distribution {
        exact_distribution(c).unwrap()
    }

    #[test]
    fn bv_cases() {
        let c = gen_bv(2, Some("1")).unwrap();
        assert!((exact(&c).prob_of("1").unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(gen_bv(16, None).unwrap().cx_count(), 15);
        assert_eq!(gen_bv(6, Some("00000")).unwrap().cx_count(), 0);
        for s in ["10110", "01001", "11111"] {
            assert!((exact(&gen_bv(6, Some(s)).unwrap()).prob_of(s).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(gen_bv(1, None).is_err());
        assert!(gen_bv(4, Some("10")).is_err());
    }

    #[test]
    fn qft_cases() {
        assert!((exact(&gen_qft(3, "101").unwrap()).prob_of("101").unwrap() - 1.0).abs() < 1e-9);
        assert!((exact(&gen_qft(2, "00").unwrap()).prob_of("00").unwrap() - 1.0).abs() < 1e-9);
        for n in 2..=6 {
            for x in [1u64, 5, 19, 42] {
                let s = format_bits(x % (1 << n), n);
                assert!((exact(&gen_qft(n, &s).unwrap()).prob_of(&s).unwrap() - 1.0).abs() < 1e-9, "{n} {s}");
            }
        }
        let counts: Vec<usize> = (2..=6).map(|n| gen_qft(n, &"0".repeat(n)).unwrap().cx_count()).collect();
        // Two CX per controlled phase: n(n−1).
        assert_eq!(counts, (2..=6).map(|n| n * (n - 1)).collect::<Vec<_>>());
    }

    #[test]
    fn toffoli_is_exact() {
        for input in 0..8u64 {
            let mut c = Circuit::new(3, 3);
            for q in 0..3 {
                if input >> q & 1 == 1 {
                    c.x(q);
                }
            }
            ccx(&mut c, 0, 1, 2);
            c.measure_all();
            let expect = input ^ (((input & 1) & (input >> 1 & 1)) << 2);
            assert!((exact(&c).prob(expect) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_phase_toffoli() {
        use crate::unitary::unitary_of;
        let mut a = Circuit::new(3, 0);
        rccx(&mut a, 0, 1, 2);
        let mut exact = Circuit::new(3, 0);
        ccx(&mut exact, 0, 1, 2);
        let (u, v) = (unitary_of(&a).unwrap(), unitary_of(&exact).unwrap());
        // Same permutation, phases differ only on the diagonal.
        let d = v.adjoint() * &u;
        for r in 0..8 {
            for col in 0..8 {
                let x = d[(r, col)].norm();
                assert!(if r == col { (x - 1.0).abs() < 1e-12 } else { x < 1e-12 });
            }
        }
        a.extend_from(&a.clone());
        let id = unitary_of(&a).unwrap();
        assert!((id - nalgebra::DMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn grover_cases() {
        let p2 = grover_success(5, 2);
        assert!((p2 - 0.60242).abs() < 1e-5);
        for t in 0..32u64 {
            let s = format_bits(t, 5);
            let d = exact(&gen_grover5(&s, 2).unwrap());
            assert!((d.prob(t) - p2).abs() < 1e-9, "{s}: {}", d.prob(t));
            let sel = crate::metrics::selectivity(&d, &s).unwrap();
            assert!(sel.value > 1.0);
        }
        let one = exact(&gen_grover5("01101", 1).unwrap());
        assert!((one.prob_of("01101").unwrap() - grover_success(5, 1)).abs() < 1e-9);
        let zero = exact(&gen_grover5("01101", 0).unwrap());
        assert!(crate::metrics::selectivity(&zero, "01101").unwrap().value.abs() < 1e-9);
        assert!(gen_grover5("01101", 3).is_err());
    }

    #[test]
    fn maxcut_graph() {
        let g = WeightedGraph::maxcut7();
        assert_eq!((g.nodes, g.edges.len()), (7, 10));
        assert!(g.edges.iter().all(|e| (0.1..=1.0).contains(&e.2)));
        let (gs, bs) = fourier_angles(0.0, 0.0, QAOA_LAYERS);
        let d = exact(&qaoa_circuit(&g, &gs, &bs));
        let cost: f64 = d.iter().map(|(k, p)| p * g.cut_value(k)).sum();
        assert!((cost - g.total_weight() / 2.0).abs() < 1e-9);
        let grid = gen_qaoa_landscape(&g, QAOA_LAYERS, (3, 4));
        assert_eq!(grid.circuits.len(), 12);
    }

    #[test]
    fn fourier_map() {
        let (g, b) = fourier_angles(1.0, 2.0, 3);
        let a = |l: f64| 0.5 * (l - 0.5) * PI / 3.0;
        assert!((g[0] - a(1.0).sin()).abs() < 1e-15 && (g[2] - a(3.0).sin()).abs() < 1e-15);
        assert!((b[1] - 2.0 * a(2.0).cos()).abs() < 1e-15);
    }

    fn pauli_matrix(p: &PauliString) -> nalgebra::DMatrix<crate::circuit::C64> {
        use crate::circuit::C64;
        let n = p.len();
        let dim = 1 << n;
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut row = col;
            let mut phase = C64::new(1.0, 0.0);
            for (q, &op) in p.0.iter().enumerate() {
                let bit = col >> q & 1;
                match op {
                    Pauli::X => row ^= 1 << q,
                    Pauli::Y => {
                        row ^= 1 << q;
                        phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            phase = -phase;
                        }
                    }
                    Pauli::I => {}
                }
            }
            m[(row, col)] = phase;
        }
        m
    }

    fn expectation(psi: &StateVector, p: &PauliString) -> f64 {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        (v.adjoint() * pauli_matrix(p) * &v)[(0, 0)].re
    }

    fn run_unitary(c: &Circuit) -> StateVector {
        let mut s = StateVector::zero(c.num_qubits);
        for g in &c.gates {
            if g.is_unitary() {
                s.apply_gate(g);
            }
        }
        s
    }

    #[test]
    fn hamiltonian_parsing() {
        let h = PauliHamiltonian::parse("# comment\n0.5 ZZII\n-1.25 xyzi  # trailing\n\n").unwrap();
        assert_eq!(h.terms.len(), 2);
        assert_eq!(h.terms[1].0.to_string(), "XYZI");
        assert!(PauliHamiltonian::parse("0.5 ZZ\n1.0 ZZZ\n").is_err());
        assert!(PauliHamiltonian::parse("abc ZZ\n").is_err());
        assert!(PauliHamiltonian::parse("").is_err());
        assert!(sample_hamiltonian(4).is_some() && sample_hamiltonian(6).is_some());
    }

    #[test]
    fn vqe_cases() {
        assert_eq!(vqe_param_count(6), 18);
        let h = PauliHamiltonian::parse("1.0 ZIII\n").unwrap();
        let circuits = gen_vqe(4, &[0.0; 12], &h).unwrap();
        let d = exact(&circuits[0].0);
        assert!((d.pauli_expectation(&circuits[0].1).unwrap() - 1.0).abs() < 1e-12);

        // Exact per-term expectations against a dense-matrix oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [4, 6] {
            let ham = sample_hamiltonian(n).unwrap();
            let params: Vec<f64> = (0..vqe_param_count(n)).map(|_| rand::Rng::gen_range(&mut rng, -PI..PI)).collect();
            let psi = run_unitary(&vqe_ansatz(n, &params));
            let oracle: f64 = ham.terms.iter().map(|(p, c)| c * expectation(&psi, p)).sum();
            let exps: Vec<f64> = gen_vqe(n, &params, &ham)
                .unwrap()
                .iter()
                .map(|(c, p)| exact(c).pauli_expectation(p).unwrap())
                .collect();
            assert!((ham.energy(&exps) - oracle).abs() < 1e-9);
        }
        assert!(gen_vqe(5, &[0.0; 15], &h).is_err());
        assert!(gen_vqe(4, &[0.0; 11], &h).is_err());
        assert!(gen_vqe(6, &[0.0; 18], &h).is_err());
    }

    fn repetition_joint(inject: Option<usize>) -> (u64, u64) {
        let d = exact(&gen_repetition5(inject).unwrap());
        let mut out = None;
        for (k, _) in d.iter().filter(|e| e.1 > 1e-12) {
            let s = repetition_syndromes(k);
            assert!(out.is_none() || out == Some(s));
            out = Some(s);
        }
        out.unwrap()
    }

    #[test]
    fn repetition_code() {
        let six = parse_bits("0110").unwrap();
        assert_eq!(repetition_joint(Some(2)), (six, six));
        assert_eq!(repetition_joint(None), (0, 0));
        let first = parse_bits("1000").unwrap();
        assert_eq!(repetition_joint(Some(0)), (first, first));
        assert!(gen_repetition5(Some(5)).is_err());
    }

    #[test]
    fn five_qubit_encoding_is_stabilized() {
        let mut c = Circuit::new(5, 0);
        encode_five_qubit_zero(&mut c);
        let psi = run_unitary(&c);
        for k in 0..4 {
            assert!((expectation(&psi, &five_qubit_generator(k)) - 1.0).abs() < 1e-12);
        }
        assert!((expectation(&psi, &"ZZZZZ".parse().unwrap()) - 1.0).abs() < 1e-12);
    }

    fn anticommutes(a: Pauli, b: Pauli) -> bool {
        a != Pauli::I && b != Pauli::I && a != b
    }

    /// Syndrome predicted by commutation with each generator.
    fn oracle_syndrome(p: Pauli, q: usize) -> u64 {
        (0..4).fold(0, |s, k| s | (anticommutes(p, five_qubit_generator(k).0[q]) as u64) << k)
    }

    #[test]
    fn five_qubit_code_syndromes() {
        let mut seen = std::collections::BTreeSet::new();
        for q in 0..5 {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let d = exact(&gen_five_qubit_code(Some((p, q)), 0).unwrap());
                let syndromes: std::collections::BTreeSet<u64> = d.iter().filter(|e| e.1 > 1e-12).map(|(k, _)| k & 0xF).collect();
                assert_eq!(syndromes.len(), 1);
                let s = *syndromes.iter().next().unwrap();
                assert_eq!(s, oracle_syndrome(p, q));
                seen.insert(s);
            }
        }
        assert_eq!(seen.len(), 15);
        assert!(!seen.contains(&0));
        // Z on qubit 0 anticommutes with XZZXI.
        let d = exact(&gen_five_qubit_code(Some((Pauli::Z, 0)), 0).unwrap());
        assert!(d.iter().filter(|e| e.1 > 1e-12).all(|(k, _)| five_qubit_bits(k, 0).0 == 1));
        for check in 0..4 {
            let d = exact(&gen_five_qubit_code(None, check).unwrap());
            let agree: f64 = d.iter().filter(|&(k, _)| five_qubit_bits(k, check).0 == five_qubit_bits(k, check).1).map(|(_, p)| p).sum();
            assert!((agree - 1.0).abs() < 1e-9);
            for q in 0..5 {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let d = exact(&gen_five_qubit_code(Some((p, q)), check).unwrap());
                    let agree: f64 = d.iter().filter(|&(k, _)| five_qubit_bits(k, check).0 == five_qubit_bits(k, check).1).map(|(_, p)| p).sum();
                    assert!((agree - 1.0).abs() < 1e-9);
                }
            }
        }
        assert!(gen_five_qubit_code(None, 4).is_err());
    }

    #[test]
    fn qv_structure() {
        let cs = gen_qv(2, 1, 3).unwrap();
        let blocks = cs[0].gates.iter().filter(|g| matches!(g.kind, GateKind::U2q(_))).count();
        assert_eq!(blocks, 2);
        let a = gen_qv(5, 3, 9).unwrap();
        let b = gen_qv(5, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].gates.iter().filter(|g| matches!(g.kind, GateKind::U2q(_))).count(), 10);
    }
}
