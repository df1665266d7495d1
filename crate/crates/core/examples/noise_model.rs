//! Single-qubit T1 decay on the simulator against exp(−t/T1), and the exact
//! (shots = 0) mode on a noiseless device.

use quell::circuit::Circuit;
use quell::noise::{simulate, DeviceModel};
use quell::schedule::schedule_asap;
use quell::transpile::CouplingMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shipped = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let mut dev = DeviceModel::noiseless(CouplingMap::line(2), shipped.gate_durations_ns.clone());
    dev.t1_us = vec![40.0, f64::INFINITY];
    dev.t2_us = vec![80.0, f64::INFINITY];
    println!("{:>8} {:>9} {:>9}", "t_us", "P(1)", "exp(-t/T1)");
    for t_us in [0u64, 10, 20, 40, 80] {
        let mut c = Circuit::new(2, 1);
        c.x(0);
        if t_us > 0 {
            c.delay(t_us * 1000, 0);
        }
        c.measure(0, 0);
        let d = simulate(&schedule_asap(&c, &dev.gate_durations_ns)?, &dev, 20_000, t_us)?;
        println!("{t_us:>8} {:>9.4} {:>9.4}", d.prob(1), (-(t_us as f64) / 40.0).exp());
    }

    let quiet = DeviceModel::noiseless(CouplingMap::line(2), shipped.gate_durations_ns);
    let mut bell = Circuit::new(2, 2);
    bell.h(0).cx(0, 1).measure_all();
    let exact = simulate(&schedule_asap(&bell, &quiet.gate_durations_ns)?, &quiet, 0, 0)?;
    println!("\nexact Bell distribution: {:?}", exact.probs());
    Ok(())
}
