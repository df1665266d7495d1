//! Syndrome detection success for the repetition code and the five-qubit
//! code on the shipped device, default against suppressed.

use quell::bench::{run_benchmark, BenchId, PipelineConfig, RunSpec};
use quell::metrics::enhancement_ratio;
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    for bench in [BenchId::QecRep, BenchId::Qec5q] {
        let spec = RunSpec::new(bench, 4096, 3);
        let a = run_benchmark(&spec, &PipelineConfig::DEFAULT, &dev)?.report;
        let b = run_benchmark(&spec, &PipelineConfig::SUPPRESSED, &dev)?.report;
        let (da, db) = (a.metrics.summary["detection_success"], b.metrics.summary["detection_success"]);
        // Chance agreement: 1/16 for a 4-bit syndrome, 1/2 for a single bit.
        let chance = if bench == BenchId::QecRep { 1.0 / 16.0 } else { 0.5 };
        let ratio = enhancement_ratio(db, da, chance).map_or("n/a (baseline at chance)".to_string(), |r| format!("{r:.2}"));
        println!("{bench}: detection success {da:.4} -> {db:.4}, enhancement {ratio}");
        if bench == BenchId::QecRep {
            for (x, y) in a.metrics.instances.iter().zip(&b.metrics.instances) {
                println!("  {:.4} -> {:.4}", x["detection_success"], y["detection_success"]);
            }
        } else {
            println!("  syndrome correct {:.4} -> {:.4}", a.metrics.summary["syndrome_correct"], b.metrics.summary["syndrome_correct"]);
        }
        println!("  wall time {:.1}s / {:.1}s", a.wall_time_s, b.wall_time_s);
    }
    Ok(())
}
