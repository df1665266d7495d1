//! Ramsey decay of three coupled qubits under ZZ crosstalk with no DD,
//! uniform DD and staggered DD.

use quell::circuit::Circuit;
use quell::dd::{embed, plan_dd, DdConfig};
use quell::noise::{simulate, DeviceModel};
use quell::schedule::{schedule_asap, ScheduledCircuit};

/// Mean ⟨X⟩ over the three measured qubits.
fn mean_x(sc: &ScheduledCircuit, dev: &DeviceModel, seed: u64) -> Result<f64, Box<dyn std::error::Error>> {
    let d = simulate(sc, dev, 4096, seed)?;
    Ok((0..3).map(|b| 1.0 - 2.0 * d.marginal(&[b]).prob(1)).sum::<f64>() / 3.0)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let qubits = [0, 1, 2];
    let staggered = DdConfig::for_device(&dev);
    let uniform = DdConfig { staggered: false, ..staggered };
    println!("{:>8} {:>8} {:>8} {:>10}", "tau_us", "none", "uniform", "staggered");
    for k in 0..=10u64 {
        let tau = k * 3_000;
        let mut c = Circuit::new(dev.num_qubits(), qubits.len());
        for &q in &qubits {
            c.h(q);
        }
        for &q in &qubits {
            if tau > 0 {
                c.delay(tau, q);
            }
        }
        for (cl, &q) in qubits.iter().enumerate() {
            c.h(q).measure(q, cl);
        }
        let sc = schedule_asap(&c, &dev.gate_durations_ns)?;
        let none = mean_x(&sc, &dev, k)?;
        let uni = mean_x(&embed(&sc, &plan_dd(&sc, &dev, &uniform)), &dev, k)?;
        let plan = plan_dd(&sc, &dev, &staggered);
        let stag = mean_x(&embed(&sc, &plan), &dev, k)?;
        println!("{:>8} {none:>8.3} {uni:>8.3} {stag:>10.3}   colors {:?}", tau / 1000, plan.coloring.values().collect::<Vec<_>>());
    }
    Ok(())
}
