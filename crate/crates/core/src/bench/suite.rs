//! Benchmark instances and the end-to-end run.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generators::{
    gen_bv, gen_five_qubit_code, gen_grover5, gen_qaoa_landscape, gen_qft, gen_qv, gen_repetition5,
    gen_vqe, sample_hamiltonian, vqe_param_count, PauliHamiltonian, WeightedGraph, QAOA_GRID, QAOA_LAYERS,
};
use super::pipeline::{compile, execute, prepare_device, PipelineConfig};
use super::report::{compute_metrics, BenchContext, BenchReport, InstanceInfo, InstanceRecord};
use super::{derive_seed, par_map, BenchError, BenchId};
use crate::circuit::Circuit;
use crate::dd::DdPlan;
use crate::metrics::{gate_error_limit, t1_limit};
use crate::noise::distribution::format_bits;
use crate::noise::{exact_distribution, DeviceModel, Pauli};
use crate::transpile::circuit_stats;

/// Everything a run needs besides the device and pipeline.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub bench: BenchId,
    /// Inclusive width range; `None` picks the benchmark's default.
    pub qubits: Option<(usize, usize)>,
    pub shots: u64,
    pub seed: u64,
    pub hamiltonian: Option<PauliHamiltonian>,
    pub graph: Option<WeightedGraph>,
    pub qaoa_grid: (usize, usize),
    /// Random inputs per width for QFT.
    pub qft_inputs: usize,
    /// Parameter sets for VQE.
    pub vqe_sets: usize,
    /// Circuits per width for QV.
    pub qv_circuits: usize,
    /// Grover targets; `None` means all 32.
    pub grover_targets: Option<Vec<String>>,
}

impl RunSpec {
    pub fn new(bench: BenchId, shots: u64, seed: u64) -> Self {
        RunSpec {
            bench,
            qubits: None,
            shots,
            seed,
            hamiltonian: None,
            graph: None,
            qaoa_grid: QAOA_GRID,
            qft_inputs: 10,
            vqe_sets: 8,
            qv_circuits: 50,
            grover_targets: None,
        }
    }

    fn default_range(&self) -> (usize, usize) {
        match self.bench {
            BenchId::Bv => (4, 12),
            BenchId::Qft => (3, 6),
            BenchId::Grover => (5, 5),
            BenchId::Qaoa => (7, 7),
            BenchId::Vqe => (4, 4),
            BenchId::QecRep | BenchId::Qec5q => (9, 9),
            BenchId::Qv => (3, 5),
        }
    }

    fn range(&self, dev: &DeviceModel) -> Result<(usize, usize), BenchError> {
        let (a, b) = self.qubits.unwrap_or_else(|| self.default_range());
        let bad = |why: String| Err(BenchError::Invalid(format!("{}: {why}", self.bench)));
        if a > b {
            return bad(format!("empty qubit range {a}..{b}"));
        }
        let fixed = match self.bench {
            BenchId::Grover => Some(5),
            BenchId::Qaoa => Some(self.graph.as_ref().map_or(7, |g| g.nodes)),
            BenchId::QecRep | BenchId::Qec5q => Some(9),
            _ => None,
        };
        if let Some(w) = fixed {
            if (a, b) != (w, w) {
                return bad(format!("width is fixed at {w}"));
            }
        }
        let min = match self.bench {
            BenchId::Bv | BenchId::Qft | BenchId::Qv => 2,
            _ => a,
        };
        if a < min {
            return bad(format!("needs at least {min} qubits"));
        }
        if self.bench == BenchId::Vqe && !(a..=b).all(|n| n == 4 || n == 6) {
            return bad("supports 4 or 6 qubits".into());
        }
        let physical = match self.bench {
            BenchId::Grover => 7,
            _ => b,
        };
        if physical > dev.num_qubits() {
            return bad(format!("{physical} qubits do not fit on a {}-qubit device", dev.num_qubits()));
        }
        Ok((a, b))
    }
}

struct Instance {
    label: String,
    qubits: usize,
    info: InstanceInfo,
    circuit: Circuit,
}

fn instances(spec: &RunSpec, dev: &DeviceModel) -> Result<(Vec<Instance>, BenchContext), BenchError> {
    let (lo, hi) = spec.range(dev)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 4, 0));
    let mut out = Vec::new();
    let mut context = BenchContext::None;
    let target = |t: &str| InstanceInfo::Target { target: t.to_string() };
    match spec.bench {
        BenchId::Bv => {
            for n in lo..=hi {
                let t = "1".repeat(n - 1);
                out.push(Instance { label: format!("bv-n{n:02}"), qubits: n, info: target(&t), circuit: gen_bv(n, None)? });
            }
        }
        BenchId::Qft => {
            for n in lo..=hi {
                for i in 0..spec.qft_inputs {
                    let t = format_bits(rng.gen_range(0..1u64 << n), n);
                    out.push(Instance { label: format!("qft-n{n:02}-{i:02}-{t}"), qubits: n, info: target(&t), circuit: gen_qft(n, &t)? });
                }
            }
        }
        BenchId::Grover => {
            let targets = spec.grover_targets.clone().unwrap_or_else(|| (0..32).map(|k| format_bits(k, 5)).collect());
            for t in targets {
                out.push(Instance { label: format!("grover-{t}"), qubits: 5, circuit: gen_grover5(&t, 2)?, info: target(&t) });
            }
        }
        BenchId::Qaoa => {
            let graph = spec.graph.clone().unwrap_or_else(WeightedGraph::maxcut7);
            let grid = gen_qaoa_landscape(&graph, QAOA_LAYERS, spec.qaoa_grid);
            let (rows, cols) = grid.shape;
            for (k, c) in grid.circuits.into_iter().enumerate() {
                let (row, col) = (k / cols, k % cols);
                let u = crate::metrics::Landscape::axis_value(grid.u_range, row, rows);
                let v = crate::metrics::Landscape::axis_value(grid.v_range, col, cols);
                out.push(Instance {
                    label: format!("qaoa-{row:02}-{col:02}"),
                    qubits: graph.nodes,
                    info: InstanceInfo::Qaoa { row, col, u, v },
                    circuit: c,
                });
            }
            context = BenchContext::Qaoa { graph, shape: grid.shape, u_range: grid.u_range, v_range: grid.v_range };
        }
        BenchId::Vqe => {
            for n in lo..=hi {
                let ham = match &spec.hamiltonian {
                    Some(h) => h.clone(),
                    None => sample_hamiltonian(n).ok_or_else(|| BenchError::Invalid(format!("no sample Hamiltonian for {n} qubits")))?,
                };
                for set in 0..spec.vqe_sets {
                    let params: Vec<f64> = (0..vqe_param_count(n)).map(|_| rng.gen_range(-PI..PI)).collect();
                    for (t, ((c, p), (_, coeff))) in gen_vqe(n, &params, &ham)?.into_iter().zip(&ham.terms).enumerate() {
                        out.push(Instance {
                            label: format!("vqe-n{n}-s{set:02}-t{t:02}-{p}"),
                            qubits: n,
                            info: InstanceInfo::Vqe { set, term: p.to_string(), coeff: *coeff },
                            circuit: c,
                        });
                    }
                }
            }
        }
        BenchId::QecRep => {
            for q in 0..5 {
                out.push(Instance {
                    label: format!("rep-x{q}"),
                    qubits: 9,
                    info: InstanceInfo::Repetition { inject: Some(q) },
                    circuit: gen_repetition5(Some(q))?,
                });
            }
        }
        BenchId::Qec5q => {
            let mut injections = vec![None];
            for q in 0..5 {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    injections.push(Some((p, q)));
                }
            }
            for inj in injections {
                let name = inj.map(|(p, q)| format!("{p:?}{q}"));
                for check in 0..4 {
                    out.push(Instance {
                        label: format!("5q-{}-g{check}", name.as_deref().unwrap_or("none")),
                        qubits: 9,
                        info: InstanceInfo::FiveQubit { inject: name.clone(), check },
                        circuit: gen_five_qubit_code(inj, check)?,
                    });
                }
            }
        }
        BenchId::Qv => {
            for n in lo..=hi {
                let cs = gen_qv(n, spec.qv_circuits, derive_seed(spec.seed, 5, n as u64))?;
                for (i, c) in cs.into_iter().enumerate() {
                    out.push(Instance { label: format!("qv-n{n}-{i:03}"), qubits: n, info: InstanceInfo::Qv { index: i }, circuit: c });
                }
            }
        }
    }
    Ok((out, context))
}

pub struct RunOutput {
    pub report: BenchReport,
    /// DD plan per instance label, when the DD stage ran.
    pub dd_plans: Vec<(String, DdPlan)>,
}

/// Generates the benchmark's circuits, runs them through the pipeline on
/// `dev` and computes the metrics.
pub fn run_benchmark(spec: &RunSpec, config: &PipelineConfig, dev: &DeviceModel) -> Result<RunOutput, BenchError> {
    let start = Instant::now();
    dev.validate().map_err(|e| BenchError::Invalid(e.to_string()))?;
    let (insts, context) = instances(spec, dev)?;
    let prepared = prepare_device(dev, config, spec.seed)?;
    let device = &prepared.device;
    let results = par_map(&insts, |i, inst| -> Result<(InstanceRecord, Option<DdPlan>), BenchError> {
        let compiled = compile(&inst.circuit, device, config)?;
        let executed = execute(&compiled, device, config, spec.shots, spec.seed, i as u64)?;
        let ideal = exact_distribution(&inst.circuit).map_err(|e| BenchError::stage("ideal simulation")(&e))?;
        let sc = &compiled.scheduled;
        let record = InstanceRecord {
            label: inst.label.clone(),
            qubits: inst.qubits,
            info: inst.info.clone(),
            layout: compiled.layout.clone(),
            swaps: compiled.swaps,
            stats: circuit_stats(sc),
            dd_pulses: compiled.dd.as_ref().map_or(0, |p| p.pulse_count()),
            gate_error_limit: gate_error_limit(sc, device).map_err(|e| BenchError::stage("metrics")(&e))?,
            t1_limit: t1_limit(sc, device),
            raw: executed.raw,
            mitigated: executed.mitigated,
            ideal,
        };
        Ok((record, compiled.dd))
    });
    let mut records = Vec::with_capacity(results.len());
    let mut dd_plans = Vec::new();
    for r in results {
        let (rec, plan) = r?;
        if let Some(p) = plan {
            dd_plans.push((rec.label.clone(), p));
        }
        records.push(rec);
    }
    let metrics = compute_metrics(spec.bench, &context, &records)?;
    let report = BenchReport {
        benchmark: spec.bench,
        pipeline: config.name().to_string(),
        config: *config,
        device_name: dev.name.clone(),
        device_hash: dev.hash(),
        seed: spec.seed,
        shots: spec.shots,
        gate_calibration: prepared.summary(),
        context,
        instances: records,
        metrics,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { report, dd_plans })
}
