//! Device description: topology, coherence times, gate timings and error
//! rates, ZZ couplings and readout confusion.
//!
//! JSON schema (all keys required unless noted):
//!
//! ```text
//! {
//!   "name": "...", "synthetic": true,
//!   "coupling": {"num_qubits": 16, "edges": [[0, 1], ...]},
//!   "t1_us": [...], "t2_us": [...],          // null means no decay
//!   "gate_durations_ns": {"rz": 0, "sx": 35, "x": 35, "cx": 300, "measure": 1000},
//!   "single_qubit_error": {"rz": [...], "sx": [...], "x": [...]},
//!   "cx_error": {"0-1": 0.007, ...},
//!   "zz_rate_rad_per_us": {"0-1": 0.05, ...},
//!   "readout_confusion": [[[P(0|0), P(0|1)], [P(1|0), P(1|1)]], ...],
//!   "gate_params": {"0-1": {"alpha": .., "beta": .., "gamma": ..}},   // optional
//!   "classical_crosstalk_rad": 0.0                                    // optional
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{Gate, GateKind, GateType, Qubit};
use crate::gatecal::GateParams;
use crate::schedule::Durations;
use crate::transpile::{CouplingMap, Edge};

/// Column-stochastic readout matrix, `m[i][j] = P[read i | prepared j]`.
pub type Confusion = [[f64; 2]; 2];

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("{field}: expected {expected} entries, found {found}")]
    Length { field: &'static str, expected: usize, found: usize },
    #[error("qubit {qubit}: T2 = {t2} µs exceeds 2·T1 = {} µs", 2.0 * t1)]
    Coherence { qubit: Qubit, t1: f64, t2: f64 },
    #[error("qubit {qubit}: readout confusion column {column} sums to {sum}")]
    Confusion { qubit: Qubit, column: usize, sum: f64 },
    #[error("{what}: probability {value} outside [0, 1)")]
    Probability { what: String, value: f64 },
    #[error("no error rate for `{gate}` on {qubits:?}")]
    MissingRate { gate: GateType, qubits: Vec<Qubit> },
    #[error("edge {0} is not in the coupling map")]
    UnknownEdge(Edge),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub name: String,
    #[serde(default)]
    pub synthetic: bool,
    pub coupling: CouplingMap,
    #[serde(with = "infinite_as_null")]
    pub t1_us: Vec<f64>,
    #[serde(with = "infinite_as_null")]
    pub t2_us: Vec<f64>,
    pub gate_durations_ns: Durations,
    pub single_qubit_error: BTreeMap<GateType, Vec<f64>>,
    pub cx_error: BTreeMap<Edge, f64>,
    #[serde(default)]
    pub zz_rate_rad_per_us: BTreeMap<Edge, f64>,
    pub readout_confusion: Vec<Confusion>,
    #[serde(default)]
    pub gate_params: BTreeMap<Edge, GateParams>,
    #[serde(default)]
    pub classical_crosstalk_rad: f64,
}

pub const IDENTITY_CONFUSION: Confusion = [[1.0, 0.0], [0.0, 1.0]];

/// Confusion matrix from the two flip probabilities.
pub fn confusion(p1_given_0: f64, p0_given_1: f64) -> Confusion {
    [[1.0 - p1_given_0, p0_given_1], [p1_given_0, 1.0 - p0_given_1]]
}

impl DeviceModel {
    /// A device without any noise source on the given topology.
    pub fn noiseless(coupling: CouplingMap, durations: Durations) -> Self {
        let n = coupling.num_qubits();
        let single = [GateType::Rz, GateType::Sx, GateType::X, GateType::H]
            .into_iter()
            .map(|t| (t, vec![0.0; n]))
            .collect();
        let cx_error = coupling.edges().map(|e| (e, 0.0)).collect();
        DeviceModel {
            name: "noiseless".into(),
            synthetic: true,
            t1_us: vec![f64::INFINITY; n],
            t2_us: vec![f64::INFINITY; n],
            gate_durations_ns: durations,
            single_qubit_error: single,
            cx_error,
            zz_rate_rad_per_us: BTreeMap::new(),
            readout_confusion: vec![IDENTITY_CONFUSION; n],
            gate_params: BTreeMap::new(),
            classical_crosstalk_rad: 0.0,
            coupling,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.coupling.num_qubits()
    }

    pub fn from_json(text: &str) -> Result<Self, DeviceError> {
        let d: DeviceModel = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DeviceError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("device model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DeviceError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Short content hash used to key stored calibration data.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("device model serializes");
        let digest = Sha256::digest(compact.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        let n = self.num_qubits();
        let check_len = |field: &'static str, found: usize| {
            if found == n {
                Ok(())
            } else {
                Err(DeviceError::Length { field, expected: n, found })
            }
        };
        check_len("t1_us", self.t1_us.len())?;
        check_len("t2_us", self.t2_us.len())?;
        check_len("readout_confusion", self.readout_confusion.len())?;
        for (ty, v) in &self.single_qubit_error {
            check_len("single_qubit_error", v.len())?;
            for (q, &p) in v.iter().enumerate() {
                check_probability(format!("{ty} error on qubit {q}"), p)?;
            }
        }
        for q in 0..n {
            let (t1, t2) = (self.t1_us[q], self.t2_us[q]);
            if !(t1 > 0.0 && t2 > 0.0) || (t1.is_finite() && t2 > 2.0 * t1 * (1.0 + 1e-12)) {
                return Err(DeviceError::Coherence { qubit: q, t1, t2 });
            }
            let m = self.readout_confusion[q];
            for column in 0..2 {
                for row in 0..2 {
                    if !(0.0..=1.0).contains(&m[row][column]) {
                        return Err(DeviceError::Probability {
                            what: format!("readout confusion of qubit {q}"),
                            value: m[row][column],
                        });
                    }
                }
                let sum = m[0][column] + m[1][column];
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(DeviceError::Confusion { qubit: q, column, sum });
                }
            }
        }
        for (e, &p) in &self.cx_error {
            if !self.coupling.contains(e.0, e.1) {
                return Err(DeviceError::UnknownEdge(*e));
            }
            check_probability(format!("cx error on {e}"), p)?;
        }
        for e in self.zz_rate_rad_per_us.keys().chain(self.gate_params.keys()) {
            if !self.coupling.contains(e.0, e.1) {
                return Err(DeviceError::UnknownEdge(*e));
            }
        }
        Ok(())
    }

    /// Depolarizing probability for a gate on physical qubits. Measurements,
    /// barriers and delays have none (readout error lives in the confusion
    /// matrices).
    pub fn gate_error(&self, g: &Gate) -> Result<f64, DeviceError> {
        let missing = || DeviceError::MissingRate { gate: g.gate_type(), qubits: g.qubits.clone() };
        match g.kind {
            GateKind::Measure(_) | GateKind::Barrier | GateKind::Delay(_) => Ok(0.0),
            GateKind::Cx => self.cx_error.get(&Edge::new(g.qubits[0], g.qubits[1])).copied().ok_or_else(missing),
            GateKind::U2q(_) => Err(missing()),
            _ => self
                .single_qubit_error
                .get(&g.gate_type())
                .and_then(|v| v.get(g.qubits[0]))
                .copied()
                .ok_or_else(missing),
        }
    }

    pub fn readout_error(&self, q: Qubit) -> f64 {
        let m = self.readout_confusion[q];
        0.5 * (m[1][0] + m[0][1])
    }

    /// Pure-dephasing time `Tφ` in µs, from `1/Tφ = 1/T2 − 1/(2·T1)`.
    pub fn t_phi_us(&self, q: Qubit) -> f64 {
        let rate = 1.0 / self.t2_us[q] - 0.5 / self.t1_us[q];
        if rate <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / rate
        }
    }

    pub fn zz_rate(&self, a: Qubit, b: Qubit) -> f64 {
        self.zz_rate_rad_per_us.get(&Edge::new(a, b)).copied().unwrap_or(0.0)
    }

    /// Duration of the X gate, used to size DD pulses.
    pub fn x_duration(&self) -> u64 {
        self.gate_durations_ns.get(GateType::X).unwrap_or(0)
    }
}

fn check_probability(what: String, value: f64) -> Result<(), DeviceError> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(DeviceError::Probability { what, value })
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| if x.is_finite() { Some(*x) } else { None }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}
