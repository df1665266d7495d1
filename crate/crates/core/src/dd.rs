//! Dynamical decoupling in idle windows.
//!
//! Idle qubits get X-pulse trains whose toggling sign integrates to zero
//! (static dephasing cancels). Coupled qubits idling at the same time are
//! 2-colored and given staggered trains so that the product of their signs
//! also integrates to zero, which refocuses ZZ.

use std::collections::{BTreeMap, VecDeque};

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, Nanos, Qubit};
use crate::noise::device::DeviceModel;
use crate::schedule::{compute_idle_windows, ScheduledCircuit, Window};
use crate::transpile::Edge;

/// X-pulse centers as fractions of a normalized window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdSequence {
    fractions: Vec<Rational64>,
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

impl DdSequence {
    /// Pulses must lie strictly inside (0, 1), increase strictly, and come in
    /// an even number.
    pub fn new(fractions: Vec<Rational64>) -> Option<Self> {
        let inside = fractions.iter().all(|f| *f > Rational64::zero() && *f < Rational64::one());
        let increasing = fractions.windows(2).all(|w| w[0] < w[1]);
        (inside && increasing && fractions.len() % 2 == 0).then_some(DdSequence { fractions })
    }

    /// Two pulses at 1/4 and 3/4.
    pub fn cpmg2() -> Self {
        DdSequence { fractions: vec![r(1, 4), r(3, 4)] }
    }

    /// Four pulses at odd multiples of 1/8.
    pub fn cpmg4() -> Self {
        DdSequence { fractions: vec![r(1, 8), r(3, 8), r(5, 8), r(7, 8)] }
    }

    pub fn for_color(color: u8) -> Self {
        if color == 0 {
            Self::cpmg2()
        } else {
            Self::cpmg4()
        }
    }

    /// The sequence compressed into each of `n` equal sub-windows.
    pub fn repeated(&self, n: i64) -> Self {
        let mut fractions = Vec::with_capacity(self.fractions.len() * n as usize);
        for i in 0..n {
            for f in &self.fractions {
                fractions.push((Rational64::from_integer(i) + f) / n);
            }
        }
        DdSequence { fractions }
    }

    pub fn fractions(&self) -> &[Rational64] {
        &self.fractions
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// `∫₀¹ s(t) dt` for the toggling sign `s`, starting at +1.
    pub fn sign_integral(&self) -> Rational64 {
        toggling_integral(&[Some(self)])
    }
}

impl Serialize for DdSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.fractions.iter().map(|f| f.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DdSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v: Vec<String> = Vec::deserialize(d)?;
        let fr = v.iter().map(|s| s.parse::<Rational64>().map_err(D::Error::custom)).collect::<Result<Vec<_>, _>>()?;
        DdSequence::new(fr).ok_or_else(|| D::Error::custom("invalid pulse fractions"))
    }
}

/// `∫₀¹ Π s_q(t) dt` over the given sequences; `None` never flips.
fn toggling_integral(seqs: &[Option<&DdSequence>]) -> Rational64 {
    let mut points: Vec<Rational64> = seqs.iter().flatten().flat_map(|s| s.fractions.iter().copied()).collect();
    points.push(Rational64::zero());
    points.push(Rational64::one());
    points.sort();
    points.dedup();
    let mut total = Rational64::zero();
    for w in points.windows(2) {
        let mid = (w[0] + w[1]) / 2;
        let mut sign = 1i64;
        for s in seqs.iter().flatten() {
            if s.fractions.iter().filter(|f| **f < mid).count() % 2 == 1 {
                sign = -sign;
            }
        }
        total += (w[1] - w[0]) * sign;
    }
    total
}

/// Residual ZZ phase of two qubits over a shared window, in units of ζT.
/// Zero means ZZ is fully refocused.
pub fn residual_zz_phase(a: Option<&DdSequence>, b: Option<&DdSequence>) -> Rational64 {
    toggling_integral(&[a, b])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdConfig {
    /// Windows shorter than this get no pulses.
    pub min_window_ns: Nanos,
    /// Windows longer than this get the sequence twice.
    pub repeat_threshold_ns: Nanos,
    /// Uniform mode gives every qubit color 0 (no staggering).
    pub staggered: bool,
    /// Skip windows whose estimated ZZ benefit is below the pulse error cost.
    pub rank: bool,
}

impl DdConfig {
    pub fn for_device(dev: &DeviceModel) -> Self {
        let min = 4 * dev.x_duration().max(1);
        DdConfig { min_window_ns: min, repeat_threshold_ns: 10 * min, staggered: true, rank: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdAssignment {
    pub qubit: Qubit,
    pub window: Window,
    pub sequence: Option<DdSequence>,
    /// Pulse start times once instantiated.
    pub pulse_starts: Vec<Nanos>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdPlan {
    pub config: DdConfig,
    pub pulse_ns: Nanos,
    pub coloring: BTreeMap<Qubit, u8>,
    pub assignments: Vec<DdAssignment>,
    /// Coupled pairs with overlapping idle windows that got the same color.
    pub conflicts: Vec<Edge>,
    /// Windows where the planned sequence did not fit and was reduced.
    pub dropped: Vec<(Qubit, Window)>,
}

impl DdPlan {
    pub fn pulse_count(&self) -> usize {
        self.assignments.iter().map(|a| a.pulse_starts.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

fn windows_overlap(a: &[Window], b: &[Window]) -> Nanos {
    let mut total = 0;
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                total += hi - lo;
            }
        }
    }
    total
}

/// Greedy BFS 2-coloring of the graph of coupled qubits whose idle windows
/// overlap. Returns the coloring and the monochromatic edges.
fn color_conflicts(sc: &ScheduledCircuit, dev: &DeviceModel, windows: &[Vec<Window>]) -> (BTreeMap<Qubit, u8>, Vec<Edge>) {
    let n = sc.num_qubits();
    let mut adj = vec![Vec::new(); n];
    for e in dev.coupling.edges() {
        if windows_overlap(&windows[e.0], &windows[e.1]) > 0 {
            adj[e.0].push(e.1);
            adj[e.1].push(e.0);
        }
    }
    let mut color: Vec<Option<u8>> = vec![None; n];
    for start in 0..n {
        if color[start].is_some() || windows[start].is_empty() {
            continue;
        }
        color[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            let c = color[q].unwrap();
            for &nb in &adj[q] {
                if color[nb].is_none() {
                    color[nb] = Some(1 - c);
                    queue.push_back(nb);
                }
            }
        }
    }
    let mut conflicts = Vec::new();
    for e in dev.coupling.edges() {
        if let (Some(a), Some(b)) = (color[e.0], color[e.1]) {
            if a == b && adj[e.0].contains(&e.1) {
                conflicts.push(e);
            }
        }
    }
    let coloring = color.iter().enumerate().filter_map(|(q, c)| c.map(|c| (q, c))).collect();
    (coloring, conflicts)
}

/// Pulse start times for `seq` in `window`, or `None` when the pulses do
/// not fit with one pulse width of spacing.
fn instantiate(seq: &DdSequence, window: Window, pulse: Nanos) -> Option<Vec<Nanos>> {
    let (a, b) = window;
    let len = (b - a) as i64;
    let half = Rational64::new(pulse as i64, 2);
    let mut starts = Vec::with_capacity(seq.len());
    for f in seq.fractions() {
        let s = (Rational64::from_integer(a as i64) + *f * len - half).round().to_integer();
        if s < a as i64 || s + pulse as i64 > b as i64 {
            return None;
        }
        starts.push(s as Nanos);
    }
    for w in starts.windows(2) {
        if w[1] < w[0] + 2 * pulse {
            return None;
        }
    }
    Some(starts)
}

/// Chooses a sequence for every idle window of a scheduled physical circuit.
pub fn plan_dd(sc: &ScheduledCircuit, dev: &DeviceModel, config: &DdConfig) -> DdPlan {
    let pulse = dev.x_duration().max(1);
    let windows = &sc.idle_windows;
    let (mut coloring, mut conflicts) = color_conflicts(sc, dev, windows);
    if !config.staggered {
        coloring.values_mut().for_each(|c| *c = 0);
        conflicts.clear();
    }
    let x_err = |q: Qubit| dev.single_qubit_error.get(&crate::circuit::GateType::X).and_then(|v| v.get(q)).copied().unwrap_or(0.0);
    let mut assignments = Vec::new();
    let mut dropped = Vec::new();
    for (q, ws) in windows.iter().enumerate() {
        let color = coloring.get(&q).copied().unwrap_or(0);
        for &w in ws {
            let len = w.1 - w.0;
            let mut assignment = DdAssignment { qubit: q, window: w, sequence: None, pulse_starts: Vec::new() };
            if len >= config.min_window_ns {
                let reps = if len > config.repeat_threshold_ns { 2 } else { 1 };
                let mut seq = DdSequence::for_color(color).repeated(reps);
                let mut starts = instantiate(&seq, w, pulse);
                if starts.is_none() && color == 1 {
                    // Fall back to half the pulses.
                    seq = DdSequence::cpmg2().repeated(reps);
                    starts = instantiate(&seq, w, pulse);
                    dropped.push((q, w));
                }
                if starts.is_none() && reps == 2 {
                    seq = DdSequence::cpmg2();
                    starts = instantiate(&seq, w, pulse);
                    dropped.push((q, w));
                }
                if let Some(starts) = starts {
                    // Ranking: the refocusable ZZ phase of idle neighbors
                    // versus the error the pulses add.
                    let benefit: f64 = dev
                        .coupling
                        .neighbors(q)
                        .iter()
                        .map(|&nb| dev.zz_rate(q, nb) * windows_overlap(&[w], &windows[nb]) as f64 * 1e-3)
                        .sum();
                    let cost = starts.len() as f64 * x_err(q);
                    if !config.rank || benefit > cost {
                        assignment.sequence = Some(seq);
                        assignment.pulse_starts = starts;
                    }
                }
            }
            assignments.push(assignment);
        }
    }
    DdPlan { config: *config, pulse_ns: pulse, coloring, assignments, conflicts, dropped }
}

/// Inserts the planned X pulses. Original gate times are unchanged.
pub fn embed(sc: &ScheduledCircuit, plan: &DdPlan) -> ScheduledCircuit {
    let mut items: Vec<((Nanos, u8, usize), Gate, Nanos)> = sc
        .circuit
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| ((sc.starts[i], 0, i), g.clone(), sc.durations[i]))
        .collect();
    let mut k = 0;
    for a in &plan.assignments {
        for &s in &a.pulse_starts {
            items.push(((s, 1, k), Gate::new(GateKind::X, vec![a.qubit]), plan.pulse_ns));
            k += 1;
        }
    }
    items.sort_by_key(|(key, _, _)| *key);
    let mut circuit = Circuit::new(sc.circuit.num_qubits, sc.circuit.num_clbits);
    let mut starts = Vec::with_capacity(items.len());
    let mut durations = Vec::with_capacity(items.len());
    for ((s, _, _), g, d) in items {
        circuit.gates.push(g);
        starts.push(s);
        durations.push(d);
    }
    let mut out = ScheduledCircuit { circuit, starts, durations, idle_windows: Vec::new() };
    out.idle_windows = compute_idle_windows(&out);
    out
}

/// Residual ZZ phase (units of ζT) of every coupled pair over the windows
/// where both are idle, weighted by overlap length in µs and ζ.
pub fn residual_report(plan: &DdPlan, dev: &DeviceModel) -> Vec<(Edge, f64)> {
    let mut out = Vec::new();
    for e in dev.coupling.edges() {
        let zeta = dev.zz_rate(e.0, e.1);
        let mut total = 0.0;
        for a in plan.assignments.iter().filter(|a| a.qubit == e.0) {
            for b in plan.assignments.iter().filter(|b| b.qubit == e.1 && b.window == a.window) {
                let res = residual_zz_phase(a.sequence.as_ref(), b.sequence.as_ref());
                total += res.abs().to_f64().unwrap_or(0.0) * zeta * (a.window.1 - a.window.0) as f64 * 1e-3;
            }
        }
        if total > 0.0 {
            out.push((e, total));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateType;
    use crate::schedule::{schedule_asap, Durations};
    use crate::transpile::CouplingMap;
    use crate::unitary::{trace_fidelity, unitary_of};
    use proptest::prelude::*;

    fn durations() -> Durations {
        Durations::new()
            .with(GateType::X, 35)
            .with(GateType::Sx, 35)
            .with(GateType::H, 35)
            .with(GateType::Rz, 0)
            .with(GateType::Cx, 300)
            .with(GateType::Measure, 1000)
    }

    fn device(n: usize) -> DeviceModel {
        let mut dev = DeviceModel::noiseless(CouplingMap::line(n), durations());
        for e in dev.coupling.edges().collect::<Vec<_>>() {
            dev.zz_rate_rad_per_us.insert(e, 0.05);
        }
        dev
    }

    fn idle_circuit(n: usize, t: Nanos) -> Circuit {
        let mut c = Circuit::new(n, n);
        for q in 0..n {
            c.h(q);
        }
        for q in 0..n {
            c.delay(t, q);
        }
        for q in 0..n {
            c.h(q);
        }
        c.measure_all();
        c
    }

    #[test]
    fn residuals() {
        let (a, b) = (DdSequence::cpmg2(), DdSequence::cpmg4());
        assert_eq!(residual_zz_phase(None, None), Rational64::one());
        assert_eq!(residual_zz_phase(Some(&a), Some(&a)), Rational64::one());
        assert_eq!(residual_zz_phase(Some(&a), Some(&b)), Rational64::zero());
        assert_eq!(a.sign_integral(), Rational64::zero());
        assert_eq!(b.sign_integral(), Rational64::zero());
        assert_eq!(residual_zz_phase(Some(&a.repeated(2)), Some(&b.repeated(2))), Rational64::zero());
        assert_eq!(b.repeated(2).sign_integral(), Rational64::zero());
    }

    #[test]
    fn invalid_sequences_rejected() {
        assert!(DdSequence::new(vec![r(1, 2)]).is_none());
        assert!(DdSequence::new(vec![r(3, 4), r(1, 4)]).is_none());
        assert!(DdSequence::new(vec![r(0, 1), r(1, 2)]).is_none());
    }

    #[test]
    fn no_idle_means_empty_plan() {
        let dev = device(2);
        let mut c = Circuit::new(2, 2);
        c.h(0).h(1).cx(0, 1).measure_all();
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        let plan = plan_dd(&sc, &dev, &DdConfig::for_device(&dev));
        assert_eq!(plan.pulse_count(), 0);
        assert_eq!(embed(&sc, &plan), sc);
    }

    #[test]
    fn staggered_pair_and_path_coloring() {
        let dev = device(3);
        let sc = schedule_asap(&idle_circuit(3, 20_000), &dev.gate_durations_ns).unwrap();
        let plan = plan_dd(&sc, &dev, &DdConfig::for_device(&dev));
        assert_eq!(plan.coloring.values().copied().collect::<Vec<_>>(), vec![0, 1, 0]);
        assert!(plan.conflicts.is_empty());
        let seq = |q: usize| plan.assignments.iter().find(|a| a.qubit == q).unwrap().sequence.clone().unwrap();
        assert_eq!(seq(0), DdSequence::cpmg2().repeated(2));
        assert_eq!(seq(1), DdSequence::cpmg4().repeated(2));
        assert!(residual_report(&plan, &dev).is_empty());

        let dev2 = device(2);
        let sc = schedule_asap(&idle_circuit(2, 1000), &dev2.gate_durations_ns).unwrap();
        let plan = plan_dd(&sc, &dev2, &DdConfig::for_device(&dev2));
        let seq = |q: usize| plan.assignments.iter().find(|a| a.qubit == q).unwrap().sequence.clone().unwrap();
        assert_eq!(seq(0), DdSequence::cpmg2());
        assert_eq!(seq(1), DdSequence::cpmg4());
    }

    #[test]
    fn odd_cycle_records_conflict() {
        let mut dev = DeviceModel::noiseless(CouplingMap::full(3), durations());
        for e in dev.coupling.edges().collect::<Vec<_>>() {
            dev.zz_rate_rad_per_us.insert(e, 0.05);
        }
        let sc = schedule_asap(&idle_circuit(3, 5000), &dev.gate_durations_ns).unwrap();
        let plan = plan_dd(&sc, &dev, &DdConfig::for_device(&dev));
        assert_eq!(plan.conflicts.len(), 1);
    }

    #[test]
    fn embedding_is_transparent_and_keeps_times() {
        let dev = device(3);
        let c = idle_circuit(3, 5000);
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        let plan = plan_dd(&sc, &dev, &DdConfig::for_device(&dev));
        let e = embed(&sc, &plan);
        assert_eq!(e.circuit.cx_count(), c.cx_count());
        assert_eq!(e.circuit.gates.len(), c.gates.len() + plan.pulse_count());
        assert_eq!(e.total_duration(), sc.total_duration());
        let u0 = unitary_of(&c.without_measurements()).unwrap();
        let u1 = unitary_of(&e.circuit.without_measurements()).unwrap();
        assert!(trace_fidelity(&u0, &u1) > 1.0 - 1e-10);
        // Pulses are busy, so they never overlap original gates.
        for q in 0..3 {
            let mut busy = e.busy_intervals(q);
            busy.sort();
            assert!(busy.windows(2).all(|w| w[0].1 <= w[1].0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_embeddings_are_transparent(ops in prop::collection::vec((0u8..4, 0usize..4, 0usize..4, 0u64..4000), 1..20)) {
            let dev = device(4);
            let mut c = Circuit::new(4, 0);
            for (k, a, b, d) in ops {
                match k {
                    0 => { c.h(a); }
                    1 => { c.rz(0.7, a); }
                    2 if a != b && a.abs_diff(b) == 1 => { c.cx(a, b); }
                    _ => { c.delay(d, a); }
                }
            }
            let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
            let plan = plan_dd(&sc, &dev, &DdConfig { rank: false, ..DdConfig::for_device(&dev) });
            let e = embed(&sc, &plan);
            let mut s0 = crate::statevector::StateVector::zero(4);
            let mut s1 = s0.clone();
            c.gates.iter().for_each(|g| s0.apply_gate(g));
            e.circuit.gates.iter().for_each(|g| s1.apply_gate(g));
            prop_assert!(s0.fidelity(&s1) > 1.0 - 1e-10);
            for a in &plan.assignments {
                if let Some(s) = &a.sequence {
                    prop_assert_eq!(s.sign_integral(), Rational64::zero());
                }
            }
        }
    }
}
