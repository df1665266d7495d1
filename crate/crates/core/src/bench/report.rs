//! Persisted run records and the per-benchmark metrics computed from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generators::{five_qubit_bits, five_qubit_generator, repetition_syndromes, WeightedGraph};
use super::pipeline::{GateCalSummary, PipelineConfig};
use super::{BenchError, BenchId};
use crate::metrics::{
    circuit_infidelity, detection_success, heavy_output_probability, heavy_output_set, pearson_distance, qv_analysis,
    selectivity, ssim, success_probability, JointSyndromeDistribution, Landscape,
};
use crate::noise::{Distribution, Pauli, PauliString};
use crate::transpile::CircuitStats;

/// Metric values by name. Non-finite values are stored as strings so that
/// reports survive a JSON round trip.
pub type MetricMap = BTreeMap<String, f64>;

mod finite_map {
    use super::MetricMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Value {
        Num(f64),
        Text(String),
    }

    fn to_value(v: f64) -> impl Serialize {
        if v.is_finite() {
            Value::Num(v)
        } else {
            Value::Text(v.to_string())
        }
    }

    fn from_value<E: serde::de::Error>(v: Value) -> Result<f64, E> {
        match v {
            Value::Num(x) => Ok(x),
            Value::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                _ => Err(E::custom(format!("bad metric value {s:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(m: &MetricMap, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, &v)| (k, to_value(v))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MetricMap, D::Error> {
        let raw = std::collections::BTreeMap::<String, Value>::deserialize(d)?;
        raw.into_iter().map(|(k, v)| Ok((k, from_value(v)?))).collect()
    }

    pub mod list {
        use super::*;

        #[derive(Serialize, Deserialize)]
        struct Wrapped(#[serde(with = "super")] MetricMap);

        pub fn serialize<S: Serializer>(v: &[MetricMap], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|m| Wrapped(m.clone())))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<MetricMap>, D::Error> {
            Ok(Vec::<Wrapped>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceInfo {
    /// Deterministic algorithm with a single correct output.
    Target { target: String },
    Qaoa { row: usize, col: usize, u: f64, v: f64 },
    Vqe { set: usize, term: String, coeff: f64 },
    Repetition { inject: Option<usize> },
    FiveQubit { inject: Option<String>, check: usize },
    Qv { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub label: String,
    pub qubits: usize,
    pub info: InstanceInfo,
    pub layout: Vec<usize>,
    pub swaps: usize,
    pub stats: CircuitStats,
    pub dd_pulses: usize,
    pub gate_error_limit: f64,
    pub t1_limit: f64,
    pub raw: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mitigated: Option<Distribution>,
    pub ideal: Distribution,
}

impl InstanceRecord {
    /// The distribution metrics are computed from.
    pub fn measured(&self) -> &Distribution {
        self.mitigated.as_ref().unwrap_or(&self.raw)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchContext {
    None,
    Qaoa { graph: WeightedGraph, shape: (usize, usize), u_range: (f64, f64), v_range: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(with = "finite_map::list")]
    pub instances: Vec<MetricMap>,
    #[serde(with = "finite_map")]
    pub summary: MetricMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub benchmark: BenchId,
    pub pipeline: String,
    pub config: PipelineConfig,
    pub device_name: String,
    pub device_hash: String,
    pub seed: u64,
    pub shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_calibration: Option<GateCalSummary>,
    pub context: BenchContext,
    pub instances: Vec<InstanceRecord>,
    pub metrics: Metrics,
    pub wall_time_s: f64,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BenchError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Recomputes the metrics from the stored distributions.
    pub fn recompute_metrics(&self) -> Result<Metrics, BenchError> {
        compute_metrics(self.benchmark, &self.context, &self.instances)
    }

    /// QAOA landscapes (ideal, measured) over the stored grid.
    pub fn qaoa_landscapes(&self) -> Result<Option<(Landscape, Landscape)>, BenchError> {
        match &self.context {
            BenchContext::Qaoa { graph, shape, u_range, v_range } => {
                Ok(Some(qaoa_landscapes(graph, *shape, *u_range, *v_range, &self.instances)?))
            }
            BenchContext::None => Ok(None),
        }
    }

    /// One CSV row per instance with its metrics.
    pub fn metrics_csv(&self) -> String {
        let keys: std::collections::BTreeSet<&String> = self.metrics.instances.iter().flat_map(|m| m.keys()).collect();
        let mut out = String::from("label");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for (inst, m) in self.instances.iter().zip(&self.metrics.instances) {
            out.push_str(&inst.label);
            for k in &keys {
                out.push(',');
                if let Some(v) = m.get(*k) {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

fn metric_err(e: impl std::fmt::Display) -> BenchError {
    BenchError::stage("metrics")(&e)
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn expected_cut(graph: &WeightedGraph, d: &Distribution) -> f64 {
    d.iter().map(|(k, p)| p * graph.cut_value(k)).sum()
}

fn qaoa_landscapes(
    graph: &WeightedGraph,
    shape: (usize, usize),
    u_range: (f64, f64),
    v_range: (f64, f64),
    instances: &[InstanceRecord],
) -> Result<(Landscape, Landscape), BenchError> {
    let mut ideal = vec![vec![f64::NAN; shape.1]; shape.0];
    let mut measured = ideal.clone();
    for inst in instances {
        if let InstanceInfo::Qaoa { row, col, .. } = inst.info {
            if row >= shape.0 || col >= shape.1 {
                return Err(BenchError::Invalid(format!("grid point ({row}, {col}) outside {shape:?}")));
            }
            ideal[row][col] = expected_cut(graph, &inst.ideal);
            measured[row][col] = expected_cut(graph, inst.measured());
        }
    }
    if ideal.iter().flatten().any(|v| v.is_nan()) {
        return Err(BenchError::Invalid("QAOA grid is incomplete".into()));
    }
    Ok((
        Landscape::new(ideal, u_range, v_range).map_err(metric_err)?,
        Landscape::new(measured, u_range, v_range).map_err(metric_err)?,
    ))
}

fn parse_injection(s: &str) -> Option<(Pauli, usize)> {
    let (p, q) = s.split_at(1);
    let p: PauliString = p.parse().ok()?;
    Some((p.0[0], q.parse().ok()?))
}

/// Syndrome a single-qubit Pauli produces on the five-qubit code.
pub fn five_qubit_syndrome(inject: Option<(Pauli, usize)>) -> u64 {
    let Some((p, q)) = inject else { return 0 };
    (0..4).fold(0, |s, k| {
        let g = five_qubit_generator(k).0[q];
        let anti = p != Pauli::I && g != Pauli::I && p != g;
        s | (anti as u64) << k
    })
}

/// Metrics for every instance plus the benchmark summary.
pub fn compute_metrics(bench: BenchId, context: &BenchContext, instances: &[InstanceRecord]) -> Result<Metrics, BenchError> {
    let mut per: Vec<MetricMap> = vec![MetricMap::new(); instances.len()];
    let mut summary = MetricMap::new();
    let put = |m: &mut MetricMap, k: &str, v: f64| {
        m.insert(k.to_string(), v);
    };
    for (m, inst) in per.iter_mut().zip(instances) {
        put(m, "gate_error_limit", inst.gate_error_limit);
        put(m, "t1_limit", inst.t1_limit);
        put(m, "infidelity", circuit_infidelity(inst.measured(), &inst.ideal));
    }
    match bench {
        BenchId::Bv | BenchId::Qft | BenchId::Grover => {
            let mut by_width: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (m, inst) in per.iter_mut().zip(instances) {
                let InstanceInfo::Target { target } = &inst.info else {
                    return Err(BenchError::Invalid(format!("{}: expected a target instance", inst.label)));
                };
                let d = inst.measured();
                let sp = success_probability(d, target).map_err(metric_err)?;
                let sel = selectivity(d, target).map_err(metric_err)?;
                let mode_ok = d.mode() == Some(crate::noise::distribution::parse_bits(target).map_err(metric_err)?);
                put(m, "success_probability", sp);
                put(m, "selectivity", sel.value);
                put(m, "mode_correct", mode_ok as u8 as f64);
                by_width.entry(inst.qubits).or_default().push(sp);
            }
            fn col<'a>(per: &'a [MetricMap], k: &'a str) -> impl Iterator<Item = f64> + 'a {
                per.iter().map(move |m| m[k])
            }
            put(&mut summary, "mean_success_probability", mean(col(&per, "success_probability")));
            put(&mut summary, "mean_selectivity", mean(col(&per, "selectivity")));
            put(&mut summary, "mean_infidelity", mean(col(&per, "infidelity")));
            put(&mut summary, "mode_correct", col(&per, "mode_correct").sum());
            put(&mut summary, "selectivity_positive", col(&per, "selectivity").filter(|&s| s > 0.0).count() as f64);
            if bench != BenchId::Grover {
                for (n, v) in by_width {
                    put(&mut summary, &format!("success_probability_n{n:02}"), mean(v));
                }
            }
        }
        BenchId::Qaoa => {
            let BenchContext::Qaoa { graph, shape, u_range, v_range } = context else {
                return Err(BenchError::Invalid("QAOA report without grid context".into()));
            };
            for (m, inst) in per.iter_mut().zip(instances) {
                put(m, "cost", expected_cut(graph, inst.measured()));
                put(m, "ideal_cost", expected_cut(graph, &inst.ideal));
            }
            let (ideal, measured) = qaoa_landscapes(graph, *shape, *u_range, *v_range, instances)?;
            put(&mut summary, "ssim", ssim(&ideal, &measured).map_err(metric_err)?);
            let best = |l: &Landscape| l.grid.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
            put(&mut summary, "max_cost", best(&measured));
            put(&mut summary, "ideal_max_cost", best(&ideal));
        }
        BenchId::Vqe => {
            let mut ideal_exp = Vec::new();
            let mut measured_exp = Vec::new();
            let mut energies: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
            for (m, inst) in per.iter_mut().zip(instances) {
                let InstanceInfo::Vqe { set, term, coeff } = &inst.info else {
                    return Err(BenchError::Invalid(format!("{}: expected a VQE instance", inst.label)));
                };
                let p: PauliString = term.parse().map_err(metric_err)?;
                let e = inst.measured().pauli_expectation(&p).map_err(metric_err)?;
                let e0 = inst.ideal.pauli_expectation(&p).map_err(metric_err)?;
                put(m, "expectation", e);
                put(m, "ideal_expectation", e0);
                let entry = energies.entry(*set).or_insert((0.0, 0.0));
                entry.0 += coeff * e;
                entry.1 += coeff * e0;
                if !p.is_identity() {
                    ideal_exp.push(e0);
                    measured_exp.push(e);
                }
            }
            put(&mut summary, "pearson_distance", pearson_distance(&ideal_exp, &measured_exp).map_err(metric_err)?);
            for (s, (e, e0)) in &energies {
                put(&mut summary, &format!("energy_set{s:02}"), *e);
                put(&mut summary, &format!("ideal_energy_set{s:02}"), *e0);
            }
            put(&mut summary, "mean_energy_error", mean(energies.values().map(|(e, e0)| (e - e0).abs())));
        }
        BenchId::QecRep => {
            for (m, inst) in per.iter_mut().zip(instances) {
                let j = JointSyndromeDistribution::from_distribution(inst.measured(), 4, repetition_syndromes);
                put(m, "detection_success", detection_success(&j));
            }
            put(&mut summary, "detection_success", mean(per.iter().map(|m| m["detection_success"])));
        }
        BenchId::Qec5q => {
            for (m, inst) in per.iter_mut().zip(instances) {
                let InstanceInfo::FiveQubit { inject, check } = &inst.info else {
                    return Err(BenchError::Invalid(format!("{}: expected a code instance", inst.label)));
                };
                let inj = match inject {
                    Some(s) => Some(parse_injection(s).ok_or_else(|| BenchError::Invalid(format!("bad injection {s:?}")))?),
                    None => None,
                };
                let expected = five_qubit_syndrome(inj);
                let d = inst.measured();
                let agree: f64 = d
                    .iter()
                    .filter(|&(k, _)| {
                        let (a, b) = five_qubit_bits(k, *check);
                        a == b
                    })
                    .map(|(_, p)| p)
                    .sum();
                let syndrome_ok: f64 = d.iter().filter(|&(k, _)| k & 0xF == expected).map(|(_, p)| p).sum();
                put(m, "agreement", agree);
                put(m, "syndrome_correct", syndrome_ok);
            }
            put(&mut summary, "detection_success", mean(per.iter().map(|m| m["agreement"])));
            put(&mut summary, "syndrome_correct", mean(per.iter().map(|m| m["syndrome_correct"])));
        }
        BenchId::Qv => {
            let mut by_width: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (m, inst) in per.iter_mut().zip(instances) {
                let ho = heavy_output_probability(inst.measured(), &heavy_output_set(&inst.ideal));
                put(m, "heavy_output", ho);
                by_width.entry(inst.qubits).or_default().push(ho);
            }
            let mut volume = 1.0;
            for (n, ho) in by_width {
                put(&mut summary, &format!("mean_heavy_output_n{n:02}"), mean(ho.iter().copied()));
                if let Ok(a) = qv_analysis(&ho, n) {
                    put(&mut summary, &format!("heavy_output_std_error_n{n:02}"), a.std_error);
                    put(&mut summary, &format!("passes_n{n:02}"), a.passes as u8 as f64);
                    if a.passes {
                        volume = f64::max(volume, (1u64 << n) as f64);
                    }
                }
            }
            put(&mut summary, "quantum_volume", volume);
        }
    }
    put(&mut summary, "mean_infidelity_all", mean(per.iter().map(|m| m["infidelity"])));
    Ok(Metrics { instances: per, summary })
}

/// Summary table of two reports with `b / a` ratios.
pub fn compare(a: &BenchReport, b: &BenchReport) -> String {
    let mut out = String::new();
    writeln!(out, "benchmark: {} ({} vs {})", a.benchmark, a.pipeline, b.pipeline).unwrap();
    if a.benchmark != b.benchmark {
        writeln!(out, "warning: comparing different benchmarks ({} vs {})", a.benchmark, b.benchmark).unwrap();
    }
    if a.device_hash != b.device_hash {
        writeln!(out, "warning: reports come from different devices").unwrap();
    }
    writeln!(out, "{:<34} {:>14} {:>14} {:>10}", "metric", a.pipeline, b.pipeline, "ratio").unwrap();
    let keys: std::collections::BTreeSet<&String> = a.metrics.summary.keys().chain(b.metrics.summary.keys()).collect();
    for k in keys {
        let va = a.metrics.summary.get(k).copied();
        let vb = b.metrics.summary.get(k).copied();
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        let ratio = match (va, vb) {
            (Some(x), Some(y)) if x != 0.0 && x.is_finite() && y.is_finite() => format!("{:.3}", y / x),
            _ => "-".to_string(),
        };
        writeln!(out, "{:<34} {:>14} {:>14} {:>10}", k, fmt(va), fmt(vb), ratio).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(info: InstanceInfo, raw: Distribution, ideal: Distribution) -> InstanceRecord {
        InstanceRecord {
            label: "x".into(),
            qubits: raw.width(),
            info,
            layout: vec![],
            swaps: 0,
            stats: CircuitStats { cx_count: 0, total_duration_ns: 0, depth: 0 },
            dd_pulses: 0,
            gate_error_limit: 1.0,
            t1_limit: 1.0,
            raw,
            mitigated: None,
            ideal,
        }
    }

    #[test]
    fn non_finite_metrics_round_trip() {
        let mut m = MetricMap::new();
        m.insert("a".into(), f64::NEG_INFINITY);
        m.insert("b".into(), 0.25);
        let metrics = Metrics { instances: vec![m.clone()], summary: m };
        let text = serde_json::to_string(&metrics).unwrap();
        assert!(text.contains("\"-inf\""));
        assert_eq!(serde_json::from_str::<Metrics>(&text).unwrap(), metrics);
    }

    #[test]
    fn target_metrics() {
        let raw = Distribution::from_probs(2, [(3, 0.5), (1, 0.25), (0, 0.25)], 0).unwrap();
        let inst = record(InstanceInfo::Target { target: "11".into() }, raw, Distribution::point(2, 3));
        let m = compute_metrics(BenchId::Bv, &BenchContext::None, &[inst]).unwrap();
        assert_eq!(m.instances[0]["success_probability"], 0.5);
        assert_eq!(m.instances[0]["selectivity"], 1.0);
        assert_eq!(m.summary["mode_correct"], 1.0);
        assert_eq!(m.summary["success_probability_n02"], 0.5);
    }

    #[test]
    fn five_qubit_oracle() {
        assert_eq!(five_qubit_syndrome(None), 0);
        assert_eq!(five_qubit_syndrome(Some((Pauli::Z, 0))) & 1, 1);
        assert_eq!(parse_injection("Y3"), Some((Pauli::Y, 3)));
    }

    #[test]
    fn compare_table() {
        let raw = Distribution::point(2, 3);
        let inst = record(InstanceInfo::Target { target: "11".into() }, raw.clone(), raw);
        let metrics = compute_metrics(BenchId::Bv, &BenchContext::None, std::slice::from_ref(&inst)).unwrap();
        let r = BenchReport {
            benchmark: BenchId::Bv,
            pipeline: "default".into(),
            config: PipelineConfig::DEFAULT,
            device_name: "d".into(),
            device_hash: "h".into(),
            seed: 0,
            shots: 0,
            gate_calibration: None,
            context: BenchContext::None,
            instances: vec![inst],
            metrics,
            wall_time_s: 0.0,
        };
        let text = compare(&r, &r);
        assert!(text.contains("mean_success_probability"));
        assert!(text.contains("1.000"));
        let back = BenchReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.recompute_metrics().unwrap(), r.metrics);
    }
}
