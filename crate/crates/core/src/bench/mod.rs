//! Benchmark generators, the default/suppressed pipeline and run reports.

pub mod generators;
pub mod pipeline;
pub mod report;
pub mod suite;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pipeline::{compile, execute, prepare_device, Compiled, Executed, PipelineConfig, PreparedDevice};
pub use report::{compare, compute_metrics, BenchReport, InstanceInfo, InstanceRecord, Metrics};
pub use suite::{run_benchmark, RunOutput, RunSpec};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub(crate) fn stage(stage: &'static str) -> impl Fn(&dyn fmt::Display) -> BenchError {
        move |e| BenchError::Stage { stage, message: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchId {
    #[serde(rename = "bv")]
    Bv,
    #[serde(rename = "qft")]
    Qft,
    #[serde(rename = "grover")]
    Grover,
    #[serde(rename = "qaoa")]
    Qaoa,
    #[serde(rename = "vqe")]
    Vqe,
    #[serde(rename = "qec-rep")]
    QecRep,
    #[serde(rename = "qec-5q")]
    Qec5q,
    #[serde(rename = "qv")]
    Qv,
}

impl BenchId {
    pub const ALL: [BenchId; 8] =
        [BenchId::Bv, BenchId::Qft, BenchId::Grover, BenchId::Qaoa, BenchId::Vqe, BenchId::QecRep, BenchId::Qec5q, BenchId::Qv];

    pub fn name(self) -> &'static str {
        match self {
            BenchId::Bv => "bv",
            BenchId::Qft => "qft",
            BenchId::Grover => "grover",
            BenchId::Qaoa => "qaoa",
            BenchId::Vqe => "vqe",
            BenchId::QecRep => "qec-rep",
            BenchId::Qec5q => "qec-5q",
            BenchId::Qv => "qv",
        }
    }
}

impl fmt::Display for BenchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| BenchError::Invalid(format!("unknown benchmark {s:?}")))
    }
}

/// Independent seed for `(stream, index)` derived from the run seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps `f` over `items` on all available cores; results keep input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len());
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let mut parts: Vec<(usize, R)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break out;
                        }
                        out.push((i, f(i, &items[i])));
                    }
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    parts.sort_by_key(|p| p.0);
    parts.into_iter().map(|p| p.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for b in BenchId::ALL {
            assert_eq!(b.name().parse::<BenchId>().unwrap(), b);
            assert_eq!(serde_json::to_string(&b).unwrap(), format!("\"{}\"", b.name()));
        }
        assert!("ghz".parse::<BenchId>().is_err());
    }

    #[test]
    fn par_map_keeps_order() {
        let v: Vec<u64> = (0..100).collect();
        assert_eq!(par_map(&v, |i, x| i as u64 + x), (0..100).map(|x| 2 * x).collect::<Vec<_>>());
        assert!(par_map(&Vec::<u8>::new(), |_, x| *x).is_empty());
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(7, 2, 3), derive_seed(7, 2, 3));
    }
}
