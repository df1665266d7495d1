//! Trajectory simulation of scheduled circuits under a [`DeviceModel`].
//!
//! The schedule is compiled into a time-ordered list of operations: gate
//! unitaries, depolarizing events after gates, amplitude damping and phase
//! flips at the end of each idle window, `exp(−i(ζt/2)·ZZ)` over intervals
//! where both ends of an edge are idle, and optional crosstalk kicks.
//!
//! Shots share work. All shots start on the event-free path; each shot's own
//! random stream decides where its first event happens, shots that fire at
//! the same place with the same event share the forked state, and the
//! process recurses. Shots without further events sample from the final
//! state of the path they are on.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::device::{Confusion, DeviceError, DeviceModel};
use super::distribution::{Distribution, DistributionError};
use crate::circuit::{Circuit, Clbit, Gate, GateKind, Qubit, C64};
use crate::schedule::{ScheduledCircuit, Window};
use crate::statevector::StateVector;

pub const MAX_SIM_QUBITS: usize = 16;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("circuit has {0} qubits; the simulator supports at most {MAX_SIM_QUBITS}")]
    TooWide(usize),
    #[error("circuit has {circuit} qubits but the device has {device}")]
    DeviceMismatch { circuit: usize, device: usize },
    #[error("qubit {0} is used after it was measured")]
    MidCircuitMeasurement(Qubit),
    #[error("exact simulation requires a device without stochastic noise; request shots instead")]
    StochasticNoise,
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Clone, Debug)]
enum Op {
    Gate(Gate),
    /// Random non-identity Pauli on one or two qubits.
    Depolarize { qubits: [Qubit; 2], two: bool, p: f64 },
    /// Kraus unraveling with decay probability `gamma`.
    AmpDamp { q: Qubit, gamma: f64 },
    PhaseFlip { q: Qubit, p: f64 },
    Zz { a: Qubit, b: Qubit, phi: f64 },
    Kick { q: Qubit, theta: f64 },
}

impl Op {
    fn is_stochastic(&self) -> bool {
        matches!(self, Op::Depolarize { .. } | Op::AmpDamp { .. } | Op::PhaseFlip { .. })
    }
}

/// Compiled form of a scheduled circuit on a device.
#[derive(Clone, Debug)]
pub struct NoiseProgram {
    num_qubits: usize,
    num_clbits: usize,
    ops: Vec<Op>,
    measurements: Vec<(Qubit, Clbit)>,
    readout: Vec<Confusion>,
}

fn overlap(a: &[Window], b: &[Window]) -> Vec<Window> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn rx(theta: f64) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

impl NoiseProgram {
    pub fn compile(sc: &ScheduledCircuit, dev: &DeviceModel) -> Result<Self, SimError> {
        let n = sc.num_qubits();
        if n > MAX_SIM_QUBITS {
            return Err(SimError::TooWide(n));
        }
        if n != dev.num_qubits() {
            return Err(SimError::DeviceMismatch { circuit: n, device: dev.num_qubits() });
        }
        dev.validate()?;
        let c = &sc.circuit;
        let mut measured = vec![false; n];
        for g in &c.gates {
            if g.is_barrier() {
                continue;
            }
            for &q in &g.qubits {
                if measured[q] {
                    return Err(SimError::MidCircuitMeasurement(q));
                }
            }
            if g.is_measure() {
                measured[g.qubits[0]] = true;
            }
        }

        // (time, phase, sequence) orders events; phase 0 runs before gates
        // starting at the same instant.
        let mut timed: Vec<((u64, u8, usize), Op)> = Vec::new();
        let mut seq = 0usize;
        let mut push = |timed: &mut Vec<_>, t: u64, phase: u8, op: Op| {
            timed.push(((t, phase, seq), op));
            seq += 1;
        };
        for q in 0..n {
            let t1 = dev.t1_us[q];
            let tphi = dev.t_phi_us(q);
            for &(a, b) in &sc.idle_windows[q] {
                let t_us = (b - a) as f64 * 1e-3;
                let gamma = 1.0 - (-t_us / t1).exp();
                if gamma > 0.0 {
                    push(&mut timed, b, 0, Op::AmpDamp { q, gamma });
                }
                let p = 0.5 * (1.0 - (-t_us / tphi).exp());
                if p > 0.0 {
                    push(&mut timed, b, 0, Op::PhaseFlip { q, p });
                }
            }
        }
        for (edge, &zeta) in &dev.zz_rate_rad_per_us {
            if zeta == 0.0 {
                continue;
            }
            for (a, b) in overlap(&sc.idle_windows[edge.0], &sc.idle_windows[edge.1]) {
                let phi = zeta * (b - a) as f64 * 1e-3;
                push(&mut timed, b, 0, Op::Zz { a: edge.0, b: edge.1, phi });
            }
        }
        for i in sc.time_order() {
            let g = &c.gates[i];
            if !g.is_unitary() {
                continue;
            }
            let t = sc.starts[i];
            push(&mut timed, t, 1, Op::Gate(g.clone()));
            let p = dev.gate_error(g)?;
            if p > 0.0 {
                let two = g.qubits.len() == 2;
                let qubits = [g.qubits[0], if two { g.qubits[1] } else { g.qubits[0] }];
                push(&mut timed, t, 1, Op::Depolarize { qubits, two, p });
            }
            let eps = dev.classical_crosstalk_rad;
            if eps != 0.0 && !matches!(g.kind, GateKind::Rz(_)) {
                for &q in &g.qubits {
                    for &nb in dev.coupling.neighbors(q) {
                        if !g.qubits.contains(&nb) {
                            push(&mut timed, t, 1, Op::Kick { q: nb, theta: eps });
                        }
                    }
                }
            }
        }
        timed.sort_by_key(|(k, _)| *k);
        let program = NoiseProgram {
            num_qubits: n,
            num_clbits: c.num_clbits,
            ops: timed.into_iter().map(|(_, op)| op).collect(),
            measurements: c.measurements(),
            readout: dev.readout_confusion.clone(),
        };
        Ok(program.compacted())
    }

    /// Drops qubits no operation touches; they stay in |0⟩ and are never read.
    fn compacted(self) -> Self {
        let mut used = vec![false; self.num_qubits];
        for op in &self.ops {
            match op {
                Op::Gate(g) => g.qubits.iter().for_each(|&q| used[q] = true),
                Op::Depolarize { qubits, .. } => qubits.iter().for_each(|&q| used[q] = true),
                Op::AmpDamp { q, .. } | Op::PhaseFlip { q, .. } | Op::Kick { q, .. } => used[*q] = true,
                Op::Zz { a, b, .. } => {
                    used[*a] = true;
                    used[*b] = true;
                }
            }
        }
        for &(q, _) in &self.measurements {
            used[q] = true;
        }
        let mut map = vec![usize::MAX; self.num_qubits];
        let mut readout = Vec::new();
        for q in 0..self.num_qubits {
            if used[q] {
                map[q] = readout.len();
                readout.push(self.readout[q]);
            }
        }
        let ops = self
            .ops
            .into_iter()
            .map(|op| match op {
                Op::Gate(mut g) => {
                    g.qubits.iter_mut().for_each(|q| *q = map[*q]);
                    Op::Gate(g)
                }
                Op::Depolarize { qubits, two, p } => Op::Depolarize { qubits: [map[qubits[0]], map[qubits[1]]], two, p },
                Op::AmpDamp { q, gamma } => Op::AmpDamp { q: map[q], gamma },
                Op::PhaseFlip { q, p } => Op::PhaseFlip { q: map[q], p },
                Op::Zz { a, b, phi } => Op::Zz { a: map[a], b: map[b], phi },
                Op::Kick { q, theta } => Op::Kick { q: map[q], theta },
            })
            .collect();
        NoiseProgram {
            num_qubits: readout.len(),
            num_clbits: self.num_clbits,
            ops,
            measurements: self.measurements.into_iter().map(|(q, c)| (map[q], c)).collect(),
            readout,
        }
    }

    pub fn has_stochastic_ops(&self) -> bool {
        self.ops.iter().any(Op::is_stochastic)
    }

    fn readout_is_ideal(&self) -> bool {
        self.measurements.iter().all(|&(q, _)| self.readout[q][1][0] == 0.0 && self.readout[q][0][1] == 0.0)
    }

    fn apply_deterministic(&self, state: &mut StateVector, op: &Op) {
        match op {
            Op::Gate(g) => state.apply_gate(g),
            Op::Zz { a, b, phi } => state.apply_zz(*a, *b, *phi),
            Op::Kick { q, theta } => state.apply_1q(*q, &rx(*theta)),
            _ => {}
        }
    }

    /// Applies the event-free branch of `op` and returns the probability
    /// that its event would have fired instead.
    fn no_event(&self, state: &mut StateVector, op: &Op) -> f64 {
        match *op {
            Op::Depolarize { p, .. } | Op::PhaseFlip { p, .. } => p,
            Op::AmpDamp { q, gamma } => {
                let p = gamma * state.prob_one(q);
                let keep = (1.0 - gamma).sqrt();
                state.apply_diag(q, C64::new(1.0, 0.0), C64::new(keep, 0.0));
                state.normalize();
                p
            }
            _ => {
                self.apply_deterministic(state, op);
                0.0
            }
        }
    }

    /// Draws which event fires; the returned label groups identical events.
    fn draw_event(op: &Op, rng: &mut ChaCha8Rng) -> u8 {
        match op {
            Op::Depolarize { two: false, .. } => rng.gen_range(1..4),
            Op::Depolarize { two: true, .. } => rng.gen_range(1..16),
            _ => 0,
        }
    }

    fn apply_event(state: &mut StateVector, op: &Op, label: u8) {
        let pauli = |state: &mut StateVector, q: Qubit, k: u8| match k {
            1 => state.apply_x(q),
            2 => state.apply_y(q),
            3 => state.apply_z(q),
            _ => {}
        };
        match *op {
            Op::Depolarize { qubits, two, .. } => {
                pauli(state, qubits[0], label % 4);
                if two {
                    pauli(state, qubits[1], label / 4);
                }
            }
            Op::PhaseFlip { q, .. } => state.apply_z(q),
            Op::AmpDamp { q, .. } => {
                let bit = 1usize << q;
                let amps = state.amplitudes_mut();
                for i in 0..amps.len() {
                    if i & bit == 0 {
                        amps[i] = amps[i | bit];
                    } else {
                        amps[i] = C64::new(0.0, 0.0);
                    }
                }
                state.normalize();
            }
            _ => unreachable!("deterministic op has no event"),
        }
    }

    /// Runs the shots in `shots` from `state` at op `start`, adding samples
    /// to `counts`.
    fn run(&self, mut state: StateVector, start: usize, mut shots: Vec<Shot>, counts: &mut BTreeMap<u64, u64>) {
        // Survival along the event-free path.
        let mut probe = state.clone();
        let mut stoch_idx = Vec::new();
        let mut survival = vec![1.0f64];
        for (k, op) in self.ops.iter().enumerate().skip(start) {
            let p = self.no_event(&mut probe, op);
            if op.is_stochastic() {
                stoch_idx.push(k);
                survival.push(survival.last().unwrap() * (1.0 - p));
            }
        }
        let end_survival = *survival.last().unwrap();

        let mut quiet = Vec::new();
        let mut fired: BTreeMap<usize, Vec<Shot>> = BTreeMap::new();
        for mut shot in shots.drain(..) {
            let u: f64 = shot.rng.gen();
            if u < end_survival {
                quiet.push(shot);
                continue;
            }
            // First j with survival[j + 1] <= u.
            let j = survival[1..].partition_point(|&s| s > u);
            fired.entry(stoch_idx[j]).or_default().push(shot);
        }
        if !quiet.is_empty() {
            self.sample_final(&probe, quiet, counts);
        }
        drop(probe);
        if fired.is_empty() {
            return;
        }

        let last = *fired.keys().next_back().unwrap();
        for k in start..=last {
            let op = &self.ops[k];
            if let Some(group) = fired.remove(&k) {
                let mut by_label: BTreeMap<u8, Vec<Shot>> = BTreeMap::new();
                for mut shot in group {
                    let label = Self::draw_event(op, &mut shot.rng);
                    by_label.entry(label).or_default().push(shot);
                }
                for (label, sub) in by_label {
                    let mut branch = state.clone();
                    Self::apply_event(&mut branch, op, label);
                    self.run(branch, k + 1, sub, counts);
                }
            }
            if k < last {
                self.no_event(&mut state, op);
            }
        }
    }

    fn sample_final(&self, state: &StateVector, shots: Vec<Shot>, counts: &mut BTreeMap<u64, u64>) {
        let mut cdf = Vec::with_capacity(1 << self.num_qubits);
        let mut acc = 0.0;
        for a in state.amplitudes() {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        for mut shot in shots {
            let u: f64 = shot.rng.gen::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            let mut key = 0u64;
            for &(q, cl) in &self.measurements {
                let mut bit = idx >> q & 1;
                let flip = self.readout[q][1 - bit][bit];
                if flip > 0.0 && shot.rng.gen::<f64>() < flip {
                    bit = 1 - bit;
                }
                key |= (bit as u64) << cl;
            }
            *counts.entry(key).or_insert(0) += 1;
        }
    }

    /// Born distribution over clbits with readout confusion applied.
    pub fn exact(&self) -> Result<Distribution, SimError> {
        if self.has_stochastic_ops() {
            return Err(SimError::StochasticNoise);
        }
        let mut state = StateVector::zero(self.num_qubits);
        for op in &self.ops {
            self.apply_deterministic(&mut state, op);
        }
        let mut probs: BTreeMap<u64, f64> = BTreeMap::new();
        for (idx, p) in state.probabilities().into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut key = 0u64;
            for &(q, cl) in &self.measurements {
                key |= ((idx >> q & 1) as u64) << cl;
            }
            *probs.entry(key).or_insert(0.0) += p;
        }
        if !self.readout_is_ideal() {
            for &(q, cl) in &self.measurements {
                probs = apply_bit_confusion(&probs, cl, &self.readout[q]);
            }
        }
        Ok(Distribution::from_probs(self.num_clbits, probs, 0)?)
    }

    pub fn sample(&self, shots: u64, seed: u64) -> Result<Distribution, SimError> {
        let shots_vec: Vec<Shot> = (0..shots)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                Shot { rng }
            })
            .collect();
        let mut counts = BTreeMap::new();
        self.run(StateVector::zero(self.num_qubits), 0, shots_vec, &mut counts);
        Ok(Distribution::from_counts(self.num_clbits, &counts)?)
    }
}

struct Shot {
    rng: ChaCha8Rng,
}

/// Pushes one bit of a distribution through a confusion matrix.
pub fn apply_bit_confusion(probs: &BTreeMap<u64, f64>, bit: usize, m: &Confusion) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    for (&k, &p) in probs {
        let v = (k >> bit & 1) as usize;
        for read in 0..2 {
            let q = m[read][v] * p;
            if q > 0.0 {
                let key = (k & !(1 << bit)) | ((read as u64) << bit);
                *out.entry(key).or_insert(0.0) += q;
            }
        }
    }
    out
}

/// Samples `shots` outcomes of a scheduled physical circuit. With
/// `shots == 0` the exact distribution is returned, which is only possible
/// when the device has no stochastic noise (coherent ZZ and readout
/// confusion are allowed).
pub fn simulate(sc: &ScheduledCircuit, dev: &DeviceModel, shots: u64, seed: u64) -> Result<Distribution, SimError> {
    let program = NoiseProgram::compile(sc, dev)?;
    if shots == 0 {
        program.exact()
    } else {
        program.sample(shots, seed)
    }
}

/// Ideal output distribution of a circuit over its classical bits.
pub fn exact_distribution(c: &Circuit) -> Result<Distribution, SimError> {
    if c.num_qubits > MAX_SIM_QUBITS {
        return Err(SimError::TooWide(c.num_qubits));
    }
    let mut state = StateVector::zero(c.num_qubits);
    let mut measured = vec![false; c.num_qubits];
    for g in &c.gates {
        if g.is_barrier() {
            continue;
        }
        for &q in &g.qubits {
            if measured[q] && !g.is_measure() {
                return Err(SimError::MidCircuitMeasurement(q));
            }
        }
        if g.is_measure() {
            measured[g.qubits[0]] = true;
        }
        state.apply_gate(g);
    }
    let meas = c.measurements();
    let mut probs: BTreeMap<u64, f64> = BTreeMap::new();
    for (idx, p) in state.probabilities().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut key = 0u64;
        for &(q, cl) in &meas {
            key |= ((idx >> q & 1) as u64) << cl;
        }
        *probs.entry(key).or_insert(0.0) += p;
    }
    // Drop round-off dust below the normalization tolerance.
    let total: f64 = probs.values().sum();
    Ok(Distribution::from_probs(c.num_clbits, probs.into_iter().map(|(k, p)| (k, p / total)), 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateType;
    use crate::noise::device::confusion;
    use crate::schedule::{schedule_asap, Durations};
    use crate::transpile::{CouplingMap, Edge};

    fn durations() -> Durations {
        Durations::new()
            .with(GateType::X, 35)
            .with(GateType::Sx, 35)
            .with(GateType::H, 35)
            .with(GateType::Rz, 0)
            .with(GateType::Cx, 300)
            .with(GateType::Measure, 1000)
    }

    fn binomial_sigma(p: f64, n: u64) -> f64 {
        (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn hadamard_exact() {
        let mut c = Circuit::new(1, 1);
        c.h(0).measure(0, 0);
        let d = exact_distribution(&c).unwrap();
        assert!((d.prob(0) - 0.5).abs() < 1e-15 && (d.prob(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn noiseless_sampling_matches_exact() {
        let dev = DeviceModel::noiseless(CouplingMap::line(3), durations());
        let mut c = Circuit::new(3, 3);
        c.h(0).cx(0, 1).cx(1, 2).measure_all();
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        let d = simulate(&sc, &dev, 4000, 1).unwrap();
        assert_eq!(d.counts().unwrap().values().sum::<u64>(), 4000);
        assert_eq!(d.support_len(), 2);
        let tv = d.total_variation(&exact_distribution(&c).unwrap());
        assert!(tv <= 3.0 * (2.0f64 / 4000.0).sqrt());
        assert_eq!(simulate(&sc, &dev, 4000, 1).unwrap(), d);
    }

    #[test]
    fn amplitude_damping_half_life() {
        let mut dev = DeviceModel::noiseless(CouplingMap::line(1), durations());
        let t1 = 50.0;
        dev.t1_us = vec![t1];
        dev.t2_us = vec![2.0 * t1];
        let t_ns = (t1 * 2f64.ln() * 1000.0).round() as u64;
        let mut c = Circuit::new(1, 1);
        c.x(0).delay(t_ns, 0).measure(0, 0);
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        let shots = 10_000;
        let d = simulate(&sc, &dev, shots, 7).unwrap();
        let expected = (-(t_ns as f64) * 1e-3 / t1).exp();
        assert!((d.prob(1) - expected).abs() <= 3.0 * binomial_sigma(expected, shots));
    }

    #[test]
    fn zz_matches_exact_unitary() {
        let mut dev = DeviceModel::noiseless(CouplingMap::line(2), durations());
        let zeta = 0.5;
        dev.zz_rate_rad_per_us.insert(Edge(0, 1), zeta);
        let t_ns = (std::f64::consts::PI / zeta * 1000.0 / 2.0).round() as u64;
        let mut c = Circuit::new(2, 2);
        c.h(0).h(1).delay(t_ns, 0).delay(t_ns, 1).h(0).h(1).measure_all();
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();

        let mut oracle = StateVector::zero(2);
        for q in 0..2 {
            oracle.apply_1q(q, &crate::circuit::h_matrix());
        }
        oracle.apply_zz(0, 1, zeta * t_ns as f64 * 1e-3);
        for q in 0..2 {
            oracle.apply_1q(q, &crate::circuit::h_matrix());
        }
        let expected = oracle.probabilities();
        let exact = simulate(&sc, &dev, 0, 0).unwrap();
        for k in 0..4 {
            assert!((exact.prob(k) - expected[k as usize]).abs() < 1e-12);
        }
        let shots = 10_000;
        let d = simulate(&sc, &dev, shots, 3).unwrap();
        for k in 0..4 {
            let p = expected[k as usize];
            assert!((d.prob(k) - p).abs() <= 3.0 * binomial_sigma(p, shots).max(1e-4));
        }
    }

    #[test]
    fn depolarizing_rate() {
        let mut dev = DeviceModel::noiseless(CouplingMap::line(1), durations());
        dev.single_qubit_error.insert(GateType::X, vec![0.3]);
        let mut c = Circuit::new(1, 1);
        c.x(0).measure(0, 0);
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        let shots = 20_000;
        let d = simulate(&sc, &dev, shots, 11).unwrap();
        // X and Y flip back to |0⟩ with probability 2/3 of the error.
        let expected = 0.3 * 2.0 / 3.0;
        assert!((d.prob(0) - expected).abs() <= 3.0 * binomial_sigma(expected, shots));
        assert!(matches!(simulate(&sc, &dev, 0, 0), Err(SimError::StochasticNoise)));
    }

    #[test]
    fn readout_confusion_exact_and_sampled() {
        let mut dev = DeviceModel::noiseless(CouplingMap::line(2), durations());
        dev.readout_confusion = vec![confusion(0.1, 0.2), confusion(0.0, 0.0)];
        let mut c = Circuit::new(2, 2);
        c.x(0).measure_all();
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        let exact = simulate(&sc, &dev, 0, 0).unwrap();
        assert!((exact.prob(0) - 0.2).abs() < 1e-15);
        let d = simulate(&sc, &dev, 10_000, 5).unwrap();
        assert!((d.prob(0) - 0.2).abs() <= 3.0 * binomial_sigma(0.2, 10_000));
    }

    #[test]
    fn rejects_mismatch_and_midcircuit() {
        let dev = DeviceModel::noiseless(CouplingMap::line(3), durations());
        let mut c = Circuit::new(2, 1);
        c.x(0).measure(0, 0);
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        assert!(matches!(simulate(&sc, &dev, 10, 0), Err(SimError::DeviceMismatch { .. })));
        let mut c = Circuit::new(3, 1);
        c.measure(0, 0).x(0);
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        assert!(matches!(simulate(&sc, &dev, 10, 0), Err(SimError::MidCircuitMeasurement(0))));
    }
}
