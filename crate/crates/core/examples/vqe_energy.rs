//! Energies of a hardware-efficient ansatz on the 4-site Heisenberg
//! Hamiltonian for random parameter sets, measured term by term.

use quell::bench::{run_benchmark, BenchId, PipelineConfig, RunSpec};
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let mut spec = RunSpec::new(BenchId::Vqe, 4000, 6);
    spec.vqe_sets = 6;
    for cfg in [PipelineConfig::DEFAULT, PipelineConfig::SUPPRESSED] {
        let r = run_benchmark(&spec, &cfg, &dev)?.report;
        let m = &r.metrics.summary;
        println!("{}: Pearson distance {:.4}, mean |ΔE| {:.4}", cfg.name(), m["pearson_distance"], m["mean_energy_error"]);
        for s in 0..spec.vqe_sets {
            println!("  set {s}: E {:>8.4}  ideal {:>8.4}", m[&format!("energy_set{s:02}")], m[&format!("ideal_energy_set{s:02}")]);
        }
    }
    Ok(())
}
