//! Calibrate readout on groups of neighbouring qubits and mitigate the
//! counts of a 5-qubit GHZ state.

use std::collections::BTreeMap;

use quell::circuit::Circuit;
use quell::noise::{simulate, DeviceModel, Distribution};
use quell::readout::{calibrate, choose_groups, hellinger_loss, mitigate};
use quell::schedule::schedule_asap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let chain = [0, 1, 2, 3, 5];
    let mut c = Circuit::new(dev.num_qubits(), chain.len());
    c.h(chain[0]);
    for w in chain.windows(2) {
        c.cx(w[0], w[1]);
    }
    for (cl, &q) in chain.iter().enumerate() {
        c.measure(q, cl);
    }
    let raw = simulate(&schedule_asap(&c, &dev.gate_durations_ns)?, &dev, 10_000, 1)?;

    let partition = choose_groups(&dev.coupling, &chain, 3);
    let cal = calibrate(&partition, &dev, 10_000, 2)?;
    let to_clbit: BTreeMap<usize, usize> = chain.iter().enumerate().map(|(cl, &q)| (q, cl)).collect();
    let mitigated = mitigate(&raw, &cal.restrict(&to_clbit))?;

    let ideal = Distribution::from_probs(5, [(0, 0.5), (31, 0.5)], 0)?;
    println!("groups {:?}, {} calibration circuits", partition.groups, 1 << partition.max_size());
    println!("P(00000)+P(11111): raw {:.4}, mitigated {:.4}", raw.prob(0) + raw.prob(31), mitigated.prob(0) + mitigated.prob(31));
    println!("Hellinger to ideal: raw {:.4}, mitigated {:.4}", hellinger_loss(&raw, &ideal), hellinger_loss(&mitigated, &ideal));
    Ok(())
}
