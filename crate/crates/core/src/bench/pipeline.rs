//! Stage orchestration: lowering, reduction, layout and routing, scheduling,
//! DD embedding, gate calibration, simulation and readout mitigation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{derive_seed, BenchError};
use crate::circuit::{Circuit, Qubit};
use crate::dd::{embed, plan_dd, DdConfig, DdPlan};
use crate::gatecal::{calibrate_device, GateCalConfig, GateCalibration, ToyGateModel, DEFAULT_REPETITIONS};
use crate::noise::{simulate, DeviceModel, Distribution};
use crate::readout::{calibrate, choose_groups, mitigate};
use crate::schedule::{schedule_asap, ScheduledCircuit};
use crate::transpile::{reduce, route, select_layout, to_native, Layout, DEFAULT_CANDIDATES};

/// Which suppression stages run. Lowering to native gates, a trivial
/// layout and routing always run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub reduce: bool,
    pub error_aware_layout: bool,
    pub dd: bool,
    pub optimized_gates: bool,
    pub mitigation: bool,
}

impl PipelineConfig {
    pub const DEFAULT: PipelineConfig =
        PipelineConfig { reduce: false, error_aware_layout: false, dd: false, optimized_gates: false, mitigation: false };
    pub const SUPPRESSED: PipelineConfig =
        PipelineConfig { reduce: true, error_aware_layout: true, dd: true, optimized_gates: true, mitigation: true };

    pub fn preset(name: &str) -> Option<PipelineConfig> {
        match name {
            "default" => Some(Self::DEFAULT),
            "suppressed" => Some(Self::SUPPRESSED),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match *self {
            Self::DEFAULT => "default",
            Self::SUPPRESSED => "suppressed",
            _ => "custom",
        }
    }
}

/// Share of the lowest file CX error that is irreducible (not a
/// calibration offset) in the device's gate model.
pub const GATE_FLOOR_FRACTION: f64 = 0.3;

/// Readout groups are at most this many qubits.
pub const READOUT_GROUP_SIZE: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCalSummary {
    pub edges: usize,
    pub blocks: usize,
    pub mean_epg_before: f64,
    pub mean_epg_after: f64,
}

impl GateCalSummary {
    fn of(cal: &GateCalibration) -> Self {
        let n = cal.edges.len().max(1) as f64;
        GateCalSummary {
            edges: cal.edges.len(),
            blocks: cal.blocks.blocks.len(),
            mean_epg_before: cal.edges.values().map(|e| e.epg_before).sum::<f64>() / n,
            mean_epg_after: cal.edges.values().map(|e| e.epg_after).sum::<f64>() / n,
        }
    }
}

/// The device a run executes on, after optional gate calibration.
#[derive(Clone, Debug)]
pub struct PreparedDevice {
    pub device: DeviceModel,
    pub gate_calibration: Option<GateCalibration>,
}

impl PreparedDevice {
    pub fn summary(&self) -> Option<GateCalSummary> {
        self.gate_calibration.as_ref().map(GateCalSummary::of)
    }
}

/// Seed of the device's own miscalibration, fixed by its content.
fn device_seed(dev: &DeviceModel) -> u64 {
    u64::from_str_radix(&dev.hash(), 16).unwrap_or(0)
}

/// With `optimized_gates`, calibrates every CX against the device's gate
/// model and writes the tuned error rates into the device.
pub fn prepare_device(dev: &DeviceModel, config: &PipelineConfig, seed: u64) -> Result<PreparedDevice, BenchError> {
    if !config.optimized_gates {
        return Ok(PreparedDevice { device: dev.clone(), gate_calibration: None });
    }
    let model = ToyGateModel::for_device(dev, GATE_FLOOR_FRACTION, &DEFAULT_REPETITIONS, device_seed(dev));
    let (device, cal) = calibrate_device(dev, &model, &GateCalConfig::default(), derive_seed(seed, 3, 0))
        .map_err(|e| BenchError::stage("gate calibration")(&e))?;
    Ok(PreparedDevice { device, gate_calibration: Some(cal) })
}

/// A circuit ready to run on the physical device.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub scheduled: ScheduledCircuit,
    /// Physical qubit of each logical qubit at the start.
    pub layout: Vec<Qubit>,
    pub swaps: usize,
    pub dd: Option<DdPlan>,
}

pub fn compile(c: &Circuit, dev: &DeviceModel, config: &PipelineConfig) -> Result<Compiled, BenchError> {
    let mut native = to_native(c).map_err(|e| BenchError::stage("transpile")(&e))?;
    if config.reduce {
        native = reduce(&native);
    }
    let routed = if config.error_aware_layout {
        select_layout(&native, dev, DEFAULT_CANDIDATES).map_err(|e| BenchError::stage("layout")(&e))?.routed
    } else {
        route(&native, &dev.coupling, &Layout::identity(native.num_qubits)).map_err(|e| BenchError::stage("route")(&e))?
    };
    // Routing SWAPs often cancel against neighbouring CX gates.
    let physical = if config.reduce { reduce(&routed.circuit) } else { routed.circuit };
    let mut scheduled =
        schedule_asap(&physical, &dev.gate_durations_ns).map_err(|e| BenchError::stage("schedule")(&e))?;
    let dd = if config.dd {
        let plan = plan_dd(&scheduled, dev, &DdConfig::for_device(dev));
        scheduled = embed(&scheduled, &plan);
        Some(plan)
    } else {
        None
    };
    let layout = routed.initial_layout.0[..c.num_qubits].to_vec();
    Ok(Compiled { scheduled, layout, swaps: routed.swaps, dd })
}

#[derive(Clone, Debug)]
pub struct Executed {
    pub raw: Distribution,
    pub mitigated: Option<Distribution>,
}

/// Samples the compiled circuit and, with `mitigation`, calibrates readout
/// on its measured physical qubits and corrects the counts.
pub fn execute(
    compiled: &Compiled,
    dev: &DeviceModel,
    config: &PipelineConfig,
    shots: u64,
    seed: u64,
    index: u64,
) -> Result<Executed, BenchError> {
    let raw = simulate(&compiled.scheduled, dev, shots, derive_seed(seed, 1, index))
        .map_err(|e| BenchError::stage("simulate")(&e))?;
    if !config.mitigation {
        return Ok(Executed { raw, mitigated: None });
    }
    let measured = compiled.scheduled.circuit.measurements();
    let physical: Vec<Qubit> = measured.iter().map(|m| m.0).collect();
    let to_clbit: BTreeMap<usize, usize> = measured.iter().copied().collect();
    let partition = choose_groups(&dev.coupling, &physical, READOUT_GROUP_SIZE);
    let cal_shots = shots.max(1);
    let cal = calibrate(&partition, dev, cal_shots, derive_seed(seed, 2, index))
        .map_err(|e| BenchError::stage("readout calibration")(&e))?;
    let mitigated = mitigate(&raw, &cal.restrict(&to_clbit)).map_err(|e| BenchError::stage("mitigate")(&e))?;
    Ok(Executed { raw, mitigated: Some(mitigated) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::generators::gen_bv;
    use crate::transpile::CouplingMap;

    fn shipped() -> DeviceModel {
        DeviceModel::from_json(include_str!("../../data/heavy_hex_16.json")).unwrap()
    }

    #[test]
    fn presets() {
        assert_eq!(PipelineConfig::preset("default"), Some(PipelineConfig::DEFAULT));
        assert_eq!(PipelineConfig::SUPPRESSED.name(), "suppressed");
        assert!(PipelineConfig::preset("expert").is_none());
        let custom = PipelineConfig { dd: false, ..PipelineConfig::SUPPRESSED };
        assert_eq!(custom.name(), "custom");
    }

    #[test]
    fn noiseless_bv_through_both_presets() {
        let dev = DeviceModel::noiseless(CouplingMap::heavy_hex_16(), shipped().gate_durations_ns);
        let c = gen_bv(6, None).unwrap();
        for cfg in [PipelineConfig::DEFAULT, PipelineConfig { optimized_gates: false, ..PipelineConfig::SUPPRESSED }] {
            let compiled = compile(&c, &dev, &cfg).unwrap();
            assert_eq!(compiled.layout.len(), 6);
            let out = execute(&compiled, &dev, &cfg, 0, 1, 0);
            let d = match out {
                Ok(e) => e.mitigated.unwrap_or(e.raw),
                Err(e) => panic!("{e}"),
            };
            assert!((d.prob_of("11111").unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn stage_toggles_are_local() {
        let dev = shipped();
        let c = gen_bv(5, None).unwrap();
        let base = compile(&c, &dev, &PipelineConfig { dd: false, ..PipelineConfig::SUPPRESSED }).unwrap();
        let with_dd = compile(&c, &dev, &PipelineConfig::SUPPRESSED).unwrap();
        assert_eq!(base.layout, with_dd.layout);
        assert_eq!(base.swaps, with_dd.swaps);
        assert!(base.dd.is_none() && with_dd.dd.is_some());
        let plain = compile(&c, &dev, &PipelineConfig::DEFAULT).unwrap();
        assert_eq!(plain.layout, (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn gate_calibration_lowers_errors() {
        let dev = shipped();
        let p = prepare_device(&dev, &PipelineConfig::SUPPRESSED, 3).unwrap();
        let s = p.summary().unwrap();
        assert_eq!(s.edges, 16);
        assert!(s.mean_epg_after < 0.6 * s.mean_epg_before, "{s:?}");
        let mean_file: f64 = dev.cx_error.values().sum::<f64>() / 16.0;
        let mean_tuned: f64 = p.device.cx_error.values().sum::<f64>() / 16.0;
        assert!(mean_tuned < 0.6 * mean_file);
        assert!(prepare_device(&dev, &PipelineConfig::DEFAULT, 3).unwrap().gate_calibration.is_none());
    }
}
