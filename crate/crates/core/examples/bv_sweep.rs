//! Bernstein–Vazirani success probability versus width on the shipped
//! device, default pipeline against the suppressed one.

use quell::bench::{run_benchmark, BenchId, PipelineConfig, RunSpec};
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let mut spec = RunSpec::new(BenchId::Bv, 8192, 1);
    spec.qubits = Some((4, 12));
    let a = run_benchmark(&spec, &PipelineConfig::DEFAULT, &dev)?.report;
    let b = run_benchmark(&spec, &PipelineConfig::SUPPRESSED, &dev)?.report;
    println!("{:>3} {:>9} {:>11} {:>7} {:>9} {:>9} {:>6} {:>6}", "n", "default", "suppressed", "ratio", "gate lim", "t1 lim", "cx d", "cx s");
    for ((ia, ib), (ma, mb)) in a.instances.iter().zip(&b.instances).zip(a.metrics.instances.iter().zip(&b.metrics.instances)) {
        let (sa, sb) = (ma["success_probability"], mb["success_probability"]);
        println!(
            "{:>3} {:>9.4} {:>11.4} {:>7.2} {:>9.4} {:>9.4} {:>6} {:>6}  mode ok: {}",
            ia.qubits, sa, sb, sb / sa, ib.gate_error_limit, ib.t1_limit, ia.stats.cx_count, ib.stats.cx_count, mb["mode_correct"] == 1.0
        );
    }
    println!("wall time: {:.1}s / {:.1}s", a.wall_time_s, b.wall_time_s);
    Ok(())
}
