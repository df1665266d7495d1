pub mod bench;
pub mod circuit;
pub mod dd;
pub mod gatecal;
pub mod metrics;
pub mod noise;
pub mod qasm;
pub mod readout;
pub mod schedule;
pub mod statevector;
pub mod transpile;
pub mod unitary;
