//! Device noise model and noisy simulation.

pub mod device;
pub mod distribution;
pub mod sim;

pub use device::{confusion, Confusion, DeviceError, DeviceModel};
pub use distribution::{pauli_expectation, Distribution, DistributionError, Pauli, PauliString};
pub use sim::{exact_distribution, simulate, SimError, MAX_SIM_QUBITS};
