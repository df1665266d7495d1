//! Place and route a 6-qubit QFT on the heavy-hex device: identity layout
//! against the error-aware layout search.

use quell::bench::generators::gen_qft;
use quell::noise::DeviceModel;
use quell::schedule::schedule_asap;
use quell::transpile::{circuit_stats, reduce, route, score_layout, select_layout, to_native, Layout, DEFAULT_CANDIDATES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let c = reduce(&to_native(&gen_qft(6, "101101")?)?);
    println!("logical: {} CX", c.cx_count());

    let naive = route(&c, &dev.coupling, &Layout::identity(c.num_qubits))?;
    let sc = schedule_asap(&naive.circuit, &dev.gate_durations_ns)?;
    let s = circuit_stats(&sc);
    println!(
        "identity layout  {:?}: {} swaps, {} CX, {} ns, score {:.3}",
        &naive.initial_layout.0[..6],
        naive.swaps,
        s.cx_count,
        s.total_duration_ns,
        score_layout(&sc, &dev)?
    );

    let best = select_layout(&c, &dev, DEFAULT_CANDIDATES)?;
    let s = circuit_stats(&best.scheduled);
    println!(
        "selected layout  {:?}: {} swaps, {} CX, {} ns, score {:.3}",
        &best.layout.0[..6],
        best.routed.swaps,
        s.cx_count,
        s.total_duration_ns,
        best.score
    );
    Ok(())
}
