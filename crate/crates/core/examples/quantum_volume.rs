//! Heavy-output probabilities for QV widths 3..5 through both pipelines.

use quell::bench::{run_benchmark, BenchId, PipelineConfig, RunSpec};
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let mut spec = RunSpec::new(BenchId::Qv, 2000, 5);
    spec.qv_circuits = 40;
    for cfg in [PipelineConfig::DEFAULT, PipelineConfig::SUPPRESSED] {
        let r = run_benchmark(&spec, &cfg, &dev)?.report;
        println!("{}:", cfg.name());
        for n in 3..=5 {
            let m = &r.metrics.summary;
            println!(
                "  n={n}: HO {:.3} ± {:.3}  passes {}",
                m[&format!("mean_heavy_output_n{n:02}")],
                m[&format!("heavy_output_std_error_n{n:02}")],
                m[&format!("passes_n{n:02}")] == 1.0
            );
        }
        println!("  quantum volume {}", r.metrics.summary["quantum_volume"]);
    }
    Ok(())
}
