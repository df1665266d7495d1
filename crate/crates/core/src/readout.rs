//! Tensored readout-error mitigation over small qubit groups.
//!
//! Qubits are split into connected groups of at most `k_max`. Every group's
//! confusion matrix is measured with the same `2^max|G|` calibration
//! circuits, and observed distributions are corrected group by group,
//! conditioned on the bits outside the group.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, WeightedIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Qubit};
use crate::noise::device::DeviceModel;
use crate::noise::distribution::{Distribution, DistributionError};
use crate::noise::sim::{simulate, SimError};
use crate::schedule::{schedule_asap, ScheduleError};
use crate::transpile::CouplingMap;

pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_STEP_TOL: f64 = 1e-8;
const COLUMN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ReadoutError {
    #[error("calibration needs at least one shot")]
    ZeroShots,
    #[error("group bit {bit} is outside the {width}-bit distribution")]
    Dimension { bit: usize, width: usize },
    #[error("confusion matrix for group {group} is {got}x{got}, expected {expected}x{expected}")]
    MatrixSize { group: usize, got: usize, expected: usize },
    #[error("confusion matrix for group {group} column {column} sums to {sum}")]
    NotStochastic { group: usize, column: usize, sum: f64 },
    #[error("groups overlap at bit {0}")]
    Overlap(usize),
    #[error("calibration was taken on device {expected}, not {got}")]
    DeviceHash { expected: String, got: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Disjoint groups of bit positions (physical qubits at calibration time).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    pub groups: Vec<Vec<usize>>,
}

impl GroupPartition {
    pub fn max_size(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn validate(&self) -> Result<(), ReadoutError> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &self.groups {
            for &b in g {
                if !seen.insert(b) {
                    return Err(ReadoutError::Overlap(b));
                }
            }
        }
        Ok(())
    }
}

/// Greedy connected groups: start from the smallest ungrouped qubit and add
/// the smallest ungrouped measured neighbor of the group until `k_max`.
pub fn choose_groups(cm: &CouplingMap, measured: &[Qubit], k_max: usize) -> GroupPartition {
    let k_max = k_max.max(1);
    let mut pending: Vec<Qubit> = measured.to_vec();
    pending.sort_unstable();
    pending.dedup();
    let mut free: std::collections::BTreeSet<Qubit> = pending.iter().copied().collect();
    let mut groups = Vec::new();
    while let Some(&seed) = free.iter().next() {
        free.remove(&seed);
        let mut group = vec![seed];
        while group.len() < k_max {
            let next = group
                .iter()
                .flat_map(|&q| cm.neighbors(q).iter().copied())
                .filter(|n| free.contains(n))
                .min();
            match next {
                Some(n) => {
                    free.remove(&n);
                    group.push(n);
                }
                None => break,
            }
        }
        group.sort_unstable();
        groups.push(group);
    }
    GroupPartition { groups }
}

/// Something that can execute calibration circuits.
pub trait ReadoutBackend {
    fn run(&mut self, circuit: &Circuit, shots: u64, seed: u64) -> Result<Distribution, ReadoutError>;
}

/// Runs circuits on the noise simulator.
pub struct SimBackend<'a> {
    pub device: &'a DeviceModel,
}

impl ReadoutBackend for SimBackend<'_> {
    fn run(&mut self, circuit: &Circuit, shots: u64, seed: u64) -> Result<Distribution, ReadoutError> {
        let sc = schedule_asap(circuit, &self.device.gate_durations_ns)?;
        Ok(simulate(&sc, self.device, shots, seed)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationData {
    pub partition: GroupPartition,
    /// Per group, `m[i][j] = P[read i | prepared j]` with bit `k` of the
    /// index for the group's `k`-th member.
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub device_hash: String,
    #[serde(default)]
    pub shots: u64,
}

impl CalibrationData {
    /// Calibration that assumes perfect readout.
    pub fn identity(partition: GroupPartition) -> Self {
        let matrices = partition
            .groups
            .iter()
            .map(|g| {
                let d = 1 << g.len();
                (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
            })
            .collect();
        CalibrationData { partition, matrices, device_hash: String::new(), shots: 0 }
    }

    pub fn validate(&self) -> Result<(), ReadoutError> {
        self.partition.validate()?;
        for (gi, (g, m)) in self.partition.groups.iter().zip(&self.matrices).enumerate() {
            let d = 1 << g.len();
            if m.len() != d || m.iter().any(|row| row.len() != d) {
                return Err(ReadoutError::MatrixSize { group: gi, got: m.len(), expected: d });
            }
            for j in 0..d {
                let sum: f64 = (0..d).map(|i| m[i][j]).sum();
                if (sum - 1.0).abs() > COLUMN_TOL || (0..d).any(|i| m[i][j] < 0.0) {
                    return Err(ReadoutError::NotStochastic { group: gi, column: j, sum });
                }
            }
        }
        Ok(())
    }

    /// Renames the bit positions, e.g. from physical qubits to clbits.
    pub fn relabel(&self, map: &BTreeMap<usize, usize>) -> CalibrationData {
        let groups = self
            .partition
            .groups
            .iter()
            .map(|g| g.iter().map(|b| map.get(b).copied().unwrap_or(*b)).collect())
            .collect();
        CalibrationData { partition: GroupPartition { groups }, ..self.clone() }
    }

    /// Keeps only groups whose members all appear in `map` and renames them.
    pub fn restrict(&self, map: &BTreeMap<usize, usize>) -> CalibrationData {
        let mut groups = Vec::new();
        let mut matrices = Vec::new();
        for (g, m) in self.partition.groups.iter().zip(&self.matrices) {
            if g.iter().all(|b| map.contains_key(b)) {
                groups.push(g.iter().map(|b| map[b]).collect());
                matrices.push(m.clone());
            }
        }
        CalibrationData { partition: GroupPartition { groups }, matrices, ..self.clone() }
    }

    pub fn path_for(dir: impl AsRef<Path>, device_hash: &str) -> PathBuf {
        dir.as_ref().join(format!("readout-{device_hash}.json"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ReadoutError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReadoutError> {
        let c: CalibrationData = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        c.validate()?;
        Ok(c)
    }

    /// Loads calibration for `dev` and checks that it was taken on it.
    pub fn load_for(path: impl AsRef<Path>, dev: &DeviceModel) -> Result<Self, ReadoutError> {
        let c = Self::load(path)?;
        let h = dev.hash();
        if c.device_hash != h {
            return Err(ReadoutError::DeviceHash { expected: c.device_hash, got: h });
        }
        Ok(c)
    }
}

/// Runs the `2^max|G|` calibration circuits. Circuit `b` prepares, in every
/// group at once, the low `|G|` bits of `b`.
pub fn calibrate_with(
    backend: &mut dyn ReadoutBackend,
    partition: &GroupPartition,
    num_qubits: usize,
    shots: u64,
    seed: u64,
) -> Result<CalibrationData, ReadoutError> {
    if shots == 0 {
        return Err(ReadoutError::ZeroShots);
    }
    partition.validate()?;
    let measured: Vec<usize> = partition.groups.iter().flatten().copied().collect();
    let max = partition.max_size();
    let mut tallies: Vec<Vec<Vec<f64>>> =
        partition.groups.iter().map(|g| vec![vec![0.0; 1 << g.len()]; 1 << g.len()]).collect();
    for b in 0..1usize << max {
        let mut c = Circuit::new(num_qubits, measured.len());
        for g in &partition.groups {
            for (k, &q) in g.iter().enumerate() {
                if b >> k & 1 == 1 {
                    c.x(q);
                }
            }
        }
        for (cl, &q) in measured.iter().enumerate() {
            c.measure(q, cl);
        }
        let dist = backend.run(&c, shots, seed.wrapping_add(b as u64))?;
        let mut offset = 0;
        for (gi, g) in partition.groups.iter().enumerate() {
            let prepared = b & ((1 << g.len()) - 1);
            for (key, p) in dist.iter() {
                let read = (key >> offset) as usize & ((1 << g.len()) - 1);
                tallies[gi][read][prepared] += p;
            }
            offset += g.len();
        }
    }
    let matrices = tallies
        .into_iter()
        .map(|mut m| {
            let d = m.len();
            for j in 0..d {
                let s: f64 = (0..d).map(|i| m[i][j]).sum();
                for row in m.iter_mut() {
                    row[j] /= s;
                }
            }
            m
        })
        .collect();
    Ok(CalibrationData { partition: partition.clone(), matrices, device_hash: String::new(), shots })
}

/// Calibrates against the simulated device.
pub fn calibrate(partition: &GroupPartition, dev: &DeviceModel, shots: u64, seed: u64) -> Result<CalibrationData, ReadoutError> {
    let mut backend = SimBackend { device: dev };
    let mut cal = calibrate_with(&mut backend, partition, dev.num_qubits(), shots, seed)?;
    cal.device_hash = dev.hash();
    Ok(cal)
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub p: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `min ‖C p − q‖²` over the simplex. Uses the exact inverse when it is
/// already a probability vector, otherwise accelerated projected gradient.
pub fn solve_simplex(c: &DMatrix<f64>, q: &DVector<f64>, max_iter: usize, step_tol: f64) -> SolveOutcome {
    let residual = |p: &DVector<f64>| (c * p - q).norm();
    if let Some(inv) = c.clone().try_inverse() {
        let p = &inv * q;
        if p.iter().all(|&x| x >= -1e-12) {
            let mut p = p.map(|x| x.max(0.0));
            let s = p.sum();
            p /= s;
            return SolveOutcome { residual: residual(&p), p, iterations: 0, converged: true };
        }
    }
    let ctc = c.transpose() * c;
    let ctq = c.transpose() * q;
    // Lipschitz constant of the gradient 2(CᵀC p − Cᵀq).
    let lip = 2.0 * ctc.symmetric_eigenvalues().amax().max(1e-12);
    let mut x = project_simplex(q);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for k in 0..max_iter {
        iterations = k + 1;
        let grad = (&ctc * &y - &ctq) * 2.0;
        let x_next = project_simplex(&(&y - grad / lip));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let step = (&x_next - &x).norm();
        y = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
        x = x_next;
        t = t_next;
        if step < step_tol {
            converged = true;
            break;
        }
    }
    SolveOutcome { residual: residual(&x), p: x, iterations, converged }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MitigationReport {
    pub distribution: Distribution,
    /// Largest solver residual over all group slices.
    pub max_residual: f64,
    pub converged: bool,
    pub solves: usize,
}

/// Corrects `dist` group by group; see [`mitigate_detailed`].
pub fn mitigate(dist: &Distribution, cal: &CalibrationData) -> Result<Distribution, ReadoutError> {
    Ok(mitigate_detailed(dist, cal, DEFAULT_MAX_ITERATIONS, DEFAULT_STEP_TOL)?.distribution)
}

/// For each group in turn, every slice of the distribution that fixes the
/// bits outside the group is replaced by the simplex-constrained solution
/// of `C_g p = q`, keeping the slice's total mass.
pub fn mitigate_detailed(
    dist: &Distribution,
    cal: &CalibrationData,
    max_iter: usize,
    step_tol: f64,
) -> Result<MitigationReport, ReadoutError> {
    cal.validate()?;
    let width = dist.width();
    for g in &cal.partition.groups {
        for &b in g {
            if b >= width {
                return Err(ReadoutError::Dimension { bit: b, width });
            }
        }
    }
    let mut probs: BTreeMap<u64, f64> = dist.probs().clone();
    let mut max_residual = 0.0f64;
    let mut converged = true;
    let mut solves = 0;
    for (g, m) in cal.partition.groups.iter().zip(&cal.matrices) {
        let d = 1usize << g.len();
        let is_identity = (0..d).all(|i| (0..d).all(|j| m[i][j] == if i == j { 1.0 } else { 0.0 }));
        if is_identity {
            continue;
        }
        let c = DMatrix::from_fn(d, d, |i, j| m[i][j]);
        let mask: u64 = g.iter().fold(0, |acc, &b| acc | 1 << b);
        let local = |key: u64| g.iter().enumerate().fold(0usize, |acc, (k, &b)| acc | ((key >> b & 1) as usize) << k);
        let expand = |ctx: u64, pat: usize| g.iter().enumerate().fold(ctx, |acc, (k, &b)| acc | ((pat >> k & 1) as u64) << b);
        let mut slices: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for (&key, &p) in &probs {
            slices.entry(key & !mask).or_insert_with(|| vec![0.0; d])[local(key)] += p;
        }
        let mut next = BTreeMap::new();
        for (ctx, q) in slices {
            let mass: f64 = q.iter().sum();
            if mass <= 0.0 {
                continue;
            }
            let qv = DVector::from_iterator(d, q.iter().map(|x| x / mass));
            let out = solve_simplex(&c, &qv, max_iter, step_tol);
            solves += 1;
            max_residual = max_residual.max(out.residual);
            converged &= out.converged;
            for (pat, &x) in out.p.iter().enumerate() {
                if x > 0.0 {
                    next.insert(expand(ctx, pat), x * mass);
                }
            }
        }
        probs = next;
    }
    let total: f64 = probs.values().sum();
    let distribution = Distribution::from_probs(width, probs.into_iter().map(|(k, p)| (k, p / total)), dist.shots)?;
    Ok(MitigationReport { distribution, max_residual, converged, solves })
}

/// `sqrt(1 − Σ √(a_s b_s))`.
pub fn hellinger_loss(a: &Distribution, b: &Distribution) -> f64 {
    let bc: f64 = a.iter().map(|(k, p)| (p * b.prob(k)).sqrt()).sum();
    (1.0 - bc).max(0.0).sqrt()
}

/// Percentile bootstrap interval of `statistic` over the mitigated
/// estimator, resampling the observed counts multinomially.
pub fn bootstrap_ci(
    dist: &Distribution,
    cal: &CalibrationData,
    statistic: impl Fn(&Distribution) -> f64,
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<(f64, f64), ReadoutError> {
    let shots = dist.shots.max(1);
    let keys: Vec<u64> = dist.iter().map(|(k, _)| k).collect();
    let weights: Vec<f64> = dist.iter().map(|(_, p)| p).collect();
    let sampler = WeightedIndex::new(&weights).map_err(|_| DistributionError::Empty)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(keys[sampler.sample(&mut rng)]).or_insert(0u64) += 1;
        }
        let resampled = Distribution::from_counts(dist.width(), &counts)?;
        stats.push(statistic(&mitigate(&resampled, cal)?));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - confidence) / 2.0;
    let pick = |f: f64| stats[((f * (stats.len() - 1) as f64).round() as usize).min(stats.len() - 1)];
    Ok((pick(alpha), pick(1.0 - alpha)))
}
