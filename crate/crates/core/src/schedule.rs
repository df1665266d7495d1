//! As-soon-as-possible scheduling and per-qubit idle windows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate, GateKind, GateType, Nanos, Qubit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("no duration configured for gate kind `{0}`")]
    MissingDuration(GateType),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Gate durations keyed by gate kind. Barriers always take zero time and
/// delays carry their own length.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Durations(pub BTreeMap<GateType, Nanos>);

impl Durations {
    pub fn new() -> Self {
        Durations(BTreeMap::new())
    }

    pub fn with(mut self, ty: GateType, ns: Nanos) -> Self {
        self.0.insert(ty, ns);
        self
    }

    pub fn get(&self, ty: GateType) -> Option<Nanos> {
        self.0.get(&ty).copied()
    }

    pub fn of(&self, g: &Gate) -> Result<Nanos, ScheduleError> {
        match g.kind {
            GateKind::Barrier => Ok(0),
            GateKind::Delay(d) => Ok(d),
            _ => self.get(g.gate_type()).ok_or(ScheduleError::MissingDuration(g.gate_type())),
        }
    }
}

/// Half-open time interval `[start, end)` in nanoseconds.
pub type Window = (Nanos, Nanos);

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledCircuit {
    pub circuit: Circuit,
    pub starts: Vec<Nanos>,
    pub durations: Vec<Nanos>,
    /// Per qubit, the gaps between its busy intervals inside its active span.
    pub idle_windows: Vec<Vec<Window>>,
}

impl ScheduledCircuit {
    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits
    }

    pub fn end(&self, gate: usize) -> Nanos {
        self.starts[gate] + self.durations[gate]
    }

    /// Completion time of the last gate.
    pub fn total_duration(&self) -> Nanos {
        (0..self.starts.len()).map(|i| self.end(i)).max().unwrap_or(0)
    }

    /// Intervals during which gates act on `q`; measurements, delays and
    /// barriers are excluded.
    pub fn busy_intervals(&self, q: Qubit) -> Vec<Window> {
        self.circuit
            .gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_unitary() && g.qubits.contains(&q))
            .map(|(i, _)| (self.starts[i], self.end(i)))
            .collect()
    }

    /// Start time of the first measurement of `q`, if any.
    pub fn measure_start(&self, q: Qubit) -> Option<Nanos> {
        self.circuit
            .gates
            .iter()
            .enumerate()
            .find(|(_, g)| g.is_measure() && g.qubits[0] == q)
            .map(|(i, _)| self.starts[i])
    }

    /// `[first operation start, measurement start)`; for unmeasured qubits the
    /// span ends with the last gate. `None` for qubits no gate touches.
    pub fn active_span(&self, q: Qubit) -> Option<Window> {
        let busy = self.busy_intervals(q);
        let first = busy.first()?.0;
        let end = match self.measure_start(q) {
            Some(m) => m,
            None => busy.iter().map(|w| w.1).max().unwrap_or(first),
        };
        Some((first, end.max(first)))
    }

    /// Active time `T_i` of qubit `q`.
    pub fn active_time(&self, q: Qubit) -> Nanos {
        self.active_span(q).map_or(0, |(a, b)| b - a)
    }

    pub fn idle_time(&self, q: Qubit) -> Nanos {
        self.idle_windows[q].iter().map(|(a, b)| b - a).sum()
    }

    pub fn busy_time(&self, q: Qubit) -> Nanos {
        let Some((lo, hi)) = self.active_span(q) else { return 0 };
        self.busy_intervals(q).iter().map(|&(a, b)| b.min(hi).saturating_sub(a.max(lo))).sum()
    }

    /// Gates sorted by start time, ties broken by program order.
    pub fn time_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.starts.len()).collect();
        idx.sort_by_key(|&i| (self.starts[i], i));
        idx
    }
}

/// Schedules each gate at the earliest time its qubits are free.
pub fn schedule_asap(c: &Circuit, durations: &Durations) -> Result<ScheduledCircuit, ScheduleError> {
    c.validate()?;
    let mut avail = vec![0 as Nanos; c.num_qubits];
    let mut starts = Vec::with_capacity(c.gates.len());
    let mut durs = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let d = durations.of(g)?;
        if g.is_barrier() {
            let t = avail.iter().copied().max().unwrap_or(0);
            avail.iter_mut().for_each(|a| *a = t);
            starts.push(t);
            durs.push(0);
            continue;
        }
        let t = g.qubits.iter().map(|&q| avail[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            avail[q] = t + d;
        }
        starts.push(t);
        durs.push(d);
    }
    let mut sc = ScheduledCircuit { circuit: c.clone(), starts, durations: durs, idle_windows: Vec::new() };
    sc.idle_windows = compute_idle_windows(&sc);
    Ok(sc)
}

/// Recomputes idle windows from gate times.
pub fn compute_idle_windows(sc: &ScheduledCircuit) -> Vec<Vec<Window>> {
    (0..sc.num_qubits())
        .map(|q| {
            let Some((lo, hi)) = sc.active_span(q) else { return Vec::new() };
            let mut busy = sc.busy_intervals(q);
            busy.sort();
            let mut windows = Vec::new();
            let mut cursor = lo;
            for (a, b) in busy {
                let a = a.min(hi);
                if a > cursor {
                    windows.push((cursor, a));
                }
                cursor = cursor.max(b);
            }
            if hi > cursor {
                windows.push((cursor, hi));
            }
            windows
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn durations() -> Durations {
        Durations::new()
            .with(GateType::X, 20)
            .with(GateType::H, 20)
            .with(GateType::Sx, 20)
            .with(GateType::Rz, 0)
            .with(GateType::Cx, 300)
            .with(GateType::Measure, 100)
    }

    #[test]
    fn back_to_back() {
        let mut c = Circuit::new(1, 0);
        c.x(0).x(0);
        let sc = schedule_asap(&c, &durations()).unwrap();
        assert_eq!(sc.starts, vec![0, 20]);
        assert!(sc.idle_windows[0].is_empty());
    }

    #[test]
    fn late_starting_qubit_has_no_leading_window() {
        let mut c = Circuit::new(2, 2);
        c.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
        let sc = schedule_asap(&c, &durations()).unwrap();
        assert_eq!(sc.starts, vec![0, 20, 320, 320]);
        // q1 starts at the CX; time before its first operation is not idle.
        assert_eq!(sc.active_span(1), Some((20, 320)));
        assert!(sc.idle_windows[1].is_empty());
        assert!(sc.idle_windows[0].is_empty());
    }

    #[test]
    fn waiting_qubit_gets_window() {
        let mut c = Circuit::new(2, 2);
        c.h(0).h(1).x(0).x(0).cx(0, 1).measure_all();
        let sc = schedule_asap(&c, &durations()).unwrap();
        assert_eq!(sc.idle_windows[1], vec![(20, 60)]);
    }

    #[test]
    fn barriers_only() {
        let mut c = Circuit::new(3, 0);
        c.barrier().barrier();
        let sc = schedule_asap(&c, &durations()).unwrap();
        assert_eq!(sc.total_duration(), 0);
        assert!(sc.idle_windows.iter().all(Vec::is_empty));
    }

    #[test]
    fn barrier_synchronizes() {
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).x(0).barrier().x(1).x(0);
        let sc = schedule_asap(&c, &durations()).unwrap();
        assert_eq!(sc.starts, vec![0, 300, 320, 320, 320]);
        assert_eq!(sc.idle_windows[1], vec![(300, 320)]);
    }

    #[test]
    fn delay_is_idle() {
        let mut c = Circuit::new(1, 1);
        c.h(0).delay(1000, 0).h(0).measure(0, 0);
        let sc = schedule_asap(&c, &durations()).unwrap();
        assert_eq!(sc.idle_windows[0], vec![(20, 1020)]);
        assert_eq!(sc.active_time(0), 1040);
    }

    #[test]
    fn missing_duration() {
        let mut c = Circuit::new(1, 0);
        c.sx(0);
        let d = Durations::new().with(GateType::X, 20);
        assert_eq!(schedule_asap(&c, &d), Err(ScheduleError::MissingDuration(GateType::Sx)));
    }

    proptest! {
        #[test]
        fn busy_plus_idle_is_active(ops in prop::collection::vec((0u8..6, 0usize..4, 0usize..4, 0u64..500), 0..40)) {
            let mut c = Circuit::new(4, 4);
            for (k, a, b, d) in ops {
                match k {
                    0 => c.h(a),
                    1 => c.x(a),
                    2 => c.rz(0.3, a),
                    3 if a != b => c.cx(a, b),
                    4 => c.delay(d, a),
                    _ => c.barrier(),
                };
            }
            c.measure_all();
            let sc = schedule_asap(&c, &durations()).unwrap();
            for q in 0..4 {
                prop_assert_eq!(sc.busy_time(q) + sc.idle_time(q), sc.active_time(q));
                let w = &sc.idle_windows[q];
                for pair in w.windows(2) {
                    // Zero-length gates (virtual RZ) split windows without a gap.
                    prop_assert!(pair[0].1 <= pair[1].0);
                }
                if let Some((lo, hi)) = sc.active_span(q) {
                    prop_assert!(w.iter().all(|&(a, b)| lo <= a && a < b && b <= hi));
                }
            }
            // No two gates sharing a qubit overlap.
            let n = sc.starts.len();
            for i in 0..n {
                for j in i + 1..n {
                    let gi = &sc.circuit.gates[i];
                    let gj = &sc.circuit.gates[j];
                    if gi.qubits.iter().any(|q| gj.qubits.contains(q)) {
                        prop_assert!(sc.end(i) <= sc.starts[j] || sc.end(j) <= sc.starts[i]);
                    }
                }
            }
        }
    }
}
