//! Closed-loop CX calibration on the heavy-hex device: edges are tuned in
//! conflict-free blocks by annealing a sampled error-per-gate estimate.

use quell::gatecal::{calibrate_gates, color_edges, GateCalConfig, ToyGateModel, DEFAULT_REPETITIONS};
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let blocks = color_edges(&dev.coupling);
    for (i, b) in blocks.blocks.iter().enumerate() {
        println!("block {i}: {:?}", b);
    }
    let model = ToyGateModel::for_device(&dev, 0.3, &DEFAULT_REPETITIONS, 42);
    let cal = calibrate_gates(&dev, &model, &GateCalConfig::default(), 1)?;
    println!("\n{:<8} {:>10} {:>10} {:>10}", "edge", "file", "before", "after");
    for (e, r) in &cal.edges {
        println!("{:<8} {:>10.5} {:>10.5} {:>10.5}", e.to_string(), dev.cx_error[e], r.epg_before, r.epg_after);
    }
    Ok(())
}
