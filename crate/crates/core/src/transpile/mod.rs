//! Transpilation to a device: native lowering, peephole reduction,
//! layout selection and routing.

mod coupling;
pub mod layout;
pub mod native;
pub mod reduce;
pub mod route;
pub mod stats;
pub mod synth;

use std::f64::consts::PI;

use thiserror::Error;

pub use coupling::{CouplingMap, Edge, Layout, TopologyError};
pub use layout::{score_layout, select_layout, LayoutChoice, DEFAULT_CANDIDATES};
pub use native::to_native;
pub use reduce::reduce;
pub use route::{route, Routed};
pub use stats::{circuit_stats, CircuitStats};
pub use synth::{euler_zsx, synth_2q, SynthError};

use crate::circuit::CircuitError;
use crate::noise::device::DeviceError;
use crate::schedule::ScheduleError;

#[derive(Debug, Error)]
pub enum TranspileError {
    #[error("circuit uses {logical} qubits but the device has {physical}")]
    TooWide { logical: usize, physical: usize },
    #[error("layout covers {got} qubits, circuit has {expected}")]
    LayoutWidth { expected: usize, got: usize },
    #[error("circuit must be lowered to native gates first")]
    NotNative,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}
