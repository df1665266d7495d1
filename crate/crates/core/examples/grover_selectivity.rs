//! Grover search selectivity for every 5-bit target on the shipped device.

use quell::bench::{run_benchmark, BenchId, PipelineConfig, RunSpec};
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let mut spec = RunSpec::new(BenchId::Grover, 4096, 2);
    if let Some(n) = std::env::args().nth(1) {
        let n: u64 = n.parse()?;
        spec.grover_targets = Some((0..n).map(|k| quell::noise::distribution::format_bits(k, 5)).collect());
    }
    let a = run_benchmark(&spec, &PipelineConfig::DEFAULT, &dev)?.report;
    let b = run_benchmark(&spec, &PipelineConfig::SUPPRESSED, &dev)?.report;
    println!("{:<8} {:>9} {:>9} {:>9} {:>9} {:>6} {:>6}", "target", "p_t def", "p_t sup", "S def", "S sup", "cx d", "cx s");
    for ((ia, ib), (ma, mb)) in a.instances.iter().zip(&b.instances).zip(a.metrics.instances.iter().zip(&b.metrics.instances)) {
        println!(
            "{:<8} {:>9.4} {:>9.4} {:>9.3} {:>9.3} {:>6} {:>6}",
            &ia.label[7..],
            ma["success_probability"],
            mb["success_probability"],
            ma["selectivity"],
            mb["selectivity"],
            ia.stats.cx_count,
            ib.stats.cx_count
        );
    }
    let better = a.metrics.instances.iter().zip(&b.metrics.instances).filter(|(x, y)| y["selectivity"] > x["selectivity"]).count();
    println!("suppressed more selective on {better}/{}; S > 0 on {}/{}", a.instances.len(), b.metrics.summary["selectivity_positive"], b.instances.len());
    println!("wall time: {:.1}s / {:.1}s", a.wall_time_s, b.wall_time_s);
    Ok(())
}
