//! Closed-loop tuning of two-qubit gates on a toy cross-resonance model.
//!
//! The gate on an edge is `U(p) = exp(−i/2·(α·Z_c X_t + β·X_t + γ·Z_c))` with
//! the control on the edge's lower index. At `(α, β, γ) = (−π/2, π/2, π/2)`
//! the control-|0⟩ block is `e^{−iπ/4}·I` and the control-|1⟩ block is
//! `e^{−iπ/4}·X`, so `U = e^{−iπ/4}·CX` exactly.
//!
//! Hardware realizes `U(p + offset)` for an unknown per-edge offset. The
//! error per gate is estimated by repeating the gate `N` times on two probe
//! states and fitting infidelity against `N`, and annealing minimizes it.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::C64;
use crate::noise::device::DeviceModel;
use crate::transpile::{CouplingMap, Edge};

#[derive(Debug, Error)]
pub enum GateCalError {
    #[error("repetition counts must be strictly increasing with at least 3 entries")]
    BadRepetitions,
    #[error("every probe is saturated; the error per gate cannot be fitted")]
    Saturated,
    #[error("no shots requested")]
    ZeroShots,
    #[error("calibration table belongs to device {expected}, not {got}")]
    DeviceHash { expected: String, got: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Drive parameters of the toy entangling gate, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl GateParams {
    pub const IDEAL: GateParams = GateParams { alpha: -FRAC_PI_2, beta: FRAC_PI_2, gamma: FRAC_PI_2 };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        GateParams { alpha, beta, gamma }
    }

    pub fn add(&self, o: &GateParams) -> GateParams {
        GateParams::new(self.alpha + o.alpha, self.beta + o.beta, self.gamma + o.gamma)
    }

    pub fn sub(&self, o: &GateParams) -> GateParams {
        GateParams::new(self.alpha - o.alpha, self.beta - o.beta, self.gamma - o.gamma)
    }

    pub fn scale(&self, s: f64) -> GateParams {
        GateParams::new(self.alpha * s, self.beta * s, self.gamma * s)
    }

    pub fn norm(&self) -> f64 {
        (self.alpha.powi(2) + self.beta.powi(2) + self.gamma.powi(2)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }
}

/// `U(p)` with the control as operand 0 (low bit) and target as operand 1.
pub fn gate_unitary(p: &GateParams) -> Matrix4<C64> {
    let mut u = Matrix4::zeros();
    for control in 0..2 {
        let z = if control == 0 { 1.0 } else { -1.0 };
        let theta = p.alpha * z + p.beta;
        let phase = C64::from_polar(1.0, -p.gamma * z / 2.0);
        let (s, c) = (theta / 2.0).sin_cos();
        // exp(−iθ/2·X) on the target.
        let block = [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]];
        for t_out in 0..2 {
            for t_in in 0..2 {
                u[(control + 2 * t_out, control + 2 * t_in)] = phase * block[t_out][t_in];
            }
        }
    }
    u
}

/// Miscalibrated hardware: the gate commanded with `p` on edge `e`
/// realizes `U(p + offsets[e])`, followed by two-qubit depolarizing noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyGateModel {
    pub ideal: GateParams,
    pub offsets: BTreeMap<Edge, GateParams>,
    #[serde(default)]
    pub depolarizing: f64,
}

impl ToyGateModel {
    pub fn perfect() -> Self {
        ToyGateModel { ideal: GateParams::IDEAL, offsets: BTreeMap::new(), depolarizing: 0.0 }
    }

    /// Random offsets of the given size (radians, Euclidean) on every edge.
    pub fn random(cm: &CouplingMap, magnitude: f64, depolarizing: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets = cm.edges().map(|e| (e, random_direction(&mut rng).scale(magnitude))).collect();
        ToyGateModel { ideal: GateParams::IDEAL, offsets, depolarizing }
    }

    /// Model whose uncalibrated gates reproduce the device's CX error rates:
    /// a depolarizing floor worth `floor_fraction` of the smallest rate, and
    /// per-edge coherent offsets in a random direction sized so that the
    /// exact error per gate at the ideal command equals the edge's rate.
    pub fn for_device(dev: &DeviceModel, floor_fraction: f64, repetitions: &[usize], seed: u64) -> Self {
        let min_rate = dev.cx_error.values().copied().fold(f64::INFINITY, f64::min);
        let floor_epg = if min_rate.is_finite() { floor_fraction * min_rate } else { 0.0 };
        // For small d, each probe loses 0.8·d per gate.
        let depolarizing = floor_epg / 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = ToyGateModel { ideal: GateParams::IDEAL, offsets: BTreeMap::new(), depolarizing };
        for (&e, &rate) in &dev.cx_error {
            let dir = visible_direction(&mut rng);
            let epg_at = |m: f64, model: &mut ToyGateModel| {
                model.offsets.insert(e, dir.scale(m));
                epg_exact(&GateParams::IDEAL, model, e, repetitions)
            };
            // Smallest magnitude reaching the rate: coarse scan, then bisection.
            let (mut lo, mut hi) = (0.0, 0.0);
            let mut m = 0.0;
            while m < 0.5 {
                m += 0.005;
                if epg_at(m, &mut model) >= rate {
                    hi = m;
                    break;
                }
                lo = m;
            }
            if hi == 0.0 {
                hi = lo;
            } else {
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if epg_at(mid, &mut model) >= rate {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            model.offsets.insert(e, dir.scale(hi));
        }
        model
    }

    pub fn offset(&self, e: Edge) -> GateParams {
        self.offsets.get(&e).copied().unwrap_or(GateParams::new(0.0, 0.0, 0.0))
    }

    pub fn realized(&self, commanded: &GateParams, e: Edge) -> Matrix4<C64> {
        gate_unitary(&commanded.add(&self.offset(e)))
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> GateParams {
    loop {
        let v = GateParams::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-6 {
            return v.scale(1.0 / n);
        }
    }
}

/// The probes cannot see offsets along (1, −1, −1): |00⟩ only senses α+β and
/// |++⟩ only senses α+γ.
pub const BLIND_AXIS: [f64; 3] = [1.0, -1.0, -1.0];

fn visible_direction(rng: &mut ChaCha8Rng) -> GateParams {
    loop {
        let v = random_direction(rng);
        let b = GateParams::new(BLIND_AXIS[0], BLIND_AXIS[1], BLIND_AXIS[2]).scale(1.0 / 3f64.sqrt());
        let along = v.alpha * b.alpha + v.beta * b.beta + v.gamma * b.gamma;
        let w = v.sub(&b.scale(along));
        if w.norm() > 1e-3 {
            return w.scale(1.0 / w.norm());
        }
    }
}

pub const DEFAULT_REPETITIONS: [usize; 4] = [1, 4, 16, 64];

type Density = Matrix4<C64>;

fn probe_states() -> [Vector4<C64>; 2] {
    let one = C64::new(1.0, 0.0);
    let half = C64::new(0.5, 0.0);
    [Vector4::new(one, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)), Vector4::new(half, half, half, half)]
}

/// Probability of staying in each probe state after `n` noisy gates. Both
/// probes are fixed points of CX, so this is the success probability.
fn probe_survival(u: &Matrix4<C64>, depolarizing: f64, n: usize) -> [f64; 2] {
    let shrink = 1.0 - 16.0 * depolarizing / 15.0;
    let mix = 4.0 * depolarizing / 15.0;
    let probes = probe_states();
    let mut out = [0.0; 2];
    for (k, psi) in probes.iter().enumerate() {
        let mut rho: Density = psi * psi.adjoint();
        for _ in 0..n {
            rho = u * rho * u.adjoint();
            if depolarizing > 0.0 {
                rho = rho * C64::new(shrink, 0.0) + Density::identity() * C64::new(mix, 0.0);
            }
        }
        out[k] = (psi.adjoint() * rho * psi)[(0, 0)].re.clamp(0.0, 1.0);
    }
    out
}

fn check_repetitions(n_list: &[usize]) -> Result<(), GateCalError> {
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(GateCalError::BadRepetitions);
    }
    Ok(())
}

/// Least-squares slope through the origin of the running maximum of the
/// infidelities. A coherent error wraps around once `N·δ` passes π, and the
/// running maximum keeps that from reading as a small error.
fn amplified_slope(x: &[f64], y: &[f64]) -> f64 {
    let mut env = f64::NEG_INFINITY;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, &b) in x.iter().zip(y) {
        env = env.max(b);
        sxy += a * env;
        sxx += a * a;
    }
    sxy / sxx
}

/// Error per gate from exact probe populations (no sampling).
pub fn epg_exact(p: &GateParams, model: &ToyGateModel, e: Edge, n_list: &[usize]) -> f64 {
    let u = model.realized(p, e);
    let x: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = n_list
        .iter()
        .map(|&n| {
            let s = probe_survival(&u, model.depolarizing, n);
            1.0 - 0.5 * (s[0] + s[1])
        })
        .collect();
    amplified_slope(&x, &y)
}

/// Error per gate: infidelity of `N` repetitions on |00⟩ and |++⟩, sampled
/// with `shots` per probe, averaged over probes and fitted linearly in `N`.
pub fn epg_estimate(
    p: &GateParams,
    model: &ToyGateModel,
    e: Edge,
    n_list: &[usize],
    shots: u64,
    seed: u64,
) -> Result<f64, GateCalError> {
    check_repetitions(n_list)?;
    if shots == 0 {
        return Err(GateCalError::ZeroShots);
    }
    let u = model.realized(p, e);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let mut y = Vec::with_capacity(n_list.len());
    let mut saturated = true;
    for &n in n_list {
        let s = probe_survival(&u, model.depolarizing, n);
        let mut infid = 0.0;
        for prob in s {
            let k = Binomial::new(shots, prob).expect("valid probability").sample(&mut rng);
            if k > 0 {
                saturated = false;
            }
            infid += 1.0 - k as f64 / shots as f64;
        }
        y.push(infid / 2.0);
    }
    if saturated {
        return Err(GateCalError::Saturated);
    }
    Ok(amplified_slope(&x, &y))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub cooling: f64,
    pub steps: usize,
    /// Proposal width at `t0`; it shrinks as `sqrt(T/t0)`.
    pub sigma0: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { t0: 0.1, cooling: 0.95, steps: 300, sigma0: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealResult {
    pub params: GateParams,
    pub cost: f64,
    pub initial_cost: f64,
    pub evaluations: usize,
}

/// Simulated annealing with Gaussian proposals and Metropolis acceptance.
/// Returns the best point seen.
pub fn anneal(
    mut cost: impl FnMut(&GateParams) -> f64,
    init: GateParams,
    schedule: &AnnealSchedule,
    seed: u64,
) -> AnnealResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_cost = cost(&init);
    let (mut cur, mut cur_cost) = (init, initial_cost);
    let (mut best, mut best_cost) = (init, initial_cost);
    // Temperatures are relative to the starting cost.
    let scale = if initial_cost.is_finite() && initial_cost.abs() > 1e-12 { initial_cost.abs() } else { 1.0 };
    let mut t = schedule.t0;
    let mut evaluations = 1;
    for _ in 0..schedule.steps {
        let sigma = schedule.sigma0 * (t / schedule.t0).sqrt();
        let step = GateParams::new(
            sigma * rng.sample::<f64, _>(StandardNormal),
            sigma * rng.sample::<f64, _>(StandardNormal),
            sigma * rng.sample::<f64, _>(StandardNormal),
        );
        let cand = cur.add(&step);
        let c = cost(&cand);
        evaluations += 1;
        let delta = (c - cur_cost) / scale;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / t.max(1e-300)).exp() {
            cur = cand;
            cur_cost = c;
        }
        if c < best_cost {
            best = cand;
            best_cost = c;
        }
        t *= schedule.cooling;
    }
    AnnealResult { params: best, cost: best_cost, initial_cost, evaluations }
}

/// Ordered groups of edges that can be tuned at the same time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationBlocks {
    pub blocks: Vec<Vec<Edge>>,
}

/// Edges conflict when they share a qubit or a coupling edge joins them.
pub fn edges_conflict(cm: &CouplingMap, a: Edge, b: Edge) -> bool {
    if a == b {
        return false;
    }
    if a.shares_qubit(&b) {
        return true;
    }
    [a.0, a.1].iter().any(|&x| [b.0, b.1].iter().any(|&y| cm.contains(x, y)))
}

impl CalibrationBlocks {
    pub fn is_conflict_free(&self, cm: &CouplingMap) -> bool {
        self.blocks.iter().all(|blk| {
            blk.iter().enumerate().all(|(i, &a)| blk[i + 1..].iter().all(|&b| !edges_conflict(cm, a, b)))
        })
    }
}

fn greedy_coloring(cm: &CouplingMap, order: &[Edge]) -> Vec<Vec<Edge>> {
    let mut blocks: Vec<Vec<Edge>> = Vec::new();
    for &e in order {
        match blocks.iter_mut().find(|blk| blk.iter().all(|&f| !edges_conflict(cm, e, f))) {
            Some(blk) => blk.push(e),
            None => blocks.push(vec![e]),
        }
    }
    blocks.iter_mut().for_each(|b| b.sort());
    blocks
}

/// Greedy distance-2 edge coloring. Edges are tried in index order and in
/// order of decreasing conflict degree; the coloring with fewer blocks wins.
pub fn color_edges(cm: &CouplingMap) -> CalibrationBlocks {
    let edges: Vec<Edge> = cm.edges().collect();
    let by_index = greedy_coloring(cm, &edges);
    let mut by_degree = edges.clone();
    let degree = |e: Edge| edges.iter().filter(|&&f| edges_conflict(cm, e, f)).count();
    by_degree.sort_by_key(|&e| (std::cmp::Reverse(degree(e)), e));
    let alt = greedy_coloring(cm, &by_degree);
    let blocks = if alt.len() < by_index.len() { alt } else { by_index };
    CalibrationBlocks { blocks }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCalConfig {
    pub schedule: AnnealSchedule,
    pub repetitions: Vec<usize>,
    pub shots: u64,
    /// Search is confined to this distance (radians) from the starting point;
    /// farther out the amplified infidelity aliases.
    pub radius: f64,
}

impl Default for GateCalConfig {
    fn default() -> Self {
        GateCalConfig {
            schedule: AnnealSchedule { sigma0: 0.05, ..AnnealSchedule::default() },
            repetitions: DEFAULT_REPETITIONS.to_vec(),
            shots: 10_000,
            radius: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCalibration {
    pub params: GateParams,
    pub epg_before: f64,
    pub epg_after: f64,
}

/// Optimized gate table for one device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCalibration {
    pub device_hash: String,
    pub blocks: CalibrationBlocks,
    pub edges: BTreeMap<Edge, EdgeCalibration>,
}

impl GateCalibration {
    /// Writes parameters and achieved error rates into a device.
    pub fn apply(&self, dev: &mut DeviceModel) {
        for (e, cal) in &self.edges {
            dev.gate_params.insert(*e, cal.params);
            dev.cx_error.insert(*e, cal.epg_after.clamp(0.0, 0.999));
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GateCalError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GateCalError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn load_for(path: impl AsRef<Path>, dev: &DeviceModel) -> Result<Self, GateCalError> {
        let c = Self::load(path)?;
        let h = dev.hash();
        if c.device_hash != h {
            return Err(GateCalError::DeviceHash { expected: c.device_hash, got: h });
        }
        Ok(c)
    }
}

fn edge_seed(seed: u64, e: Edge) -> u64 {
    seed ^ ((e.0 as u64) << 32 | e.1 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn calibrate_edge(
    init: GateParams,
    model: &ToyGateModel,
    e: Edge,
    config: &GateCalConfig,
    es: u64,
) -> Result<EdgeCalibration, GateCalError> {
    let mut calls = 0u64;
    let mut failure = None;
    let result = anneal(
        |p| {
            calls += 1;
            if p.sub(&init).norm() > config.radius {
                return f64::INFINITY;
            }
            match epg_estimate(p, model, e, &config.repetitions, config.shots, es.wrapping_add(calls)) {
                Ok(v) => v,
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::INFINITY
                }
            }
        },
        init,
        &config.schedule,
        es,
    );
    if result.initial_cost.is_infinite() {
        return Err(failure.unwrap_or(GateCalError::Saturated));
    }
    let check = es.wrapping_add(u64::MAX / 2);
    let epg_before = epg_estimate(&init, model, e, &config.repetitions, config.shots, check)?;
    let epg_after = epg_estimate(&result.params, model, e, &config.repetitions, config.shots, check ^ 1)?;
    Ok(EdgeCalibration { params: result.params, epg_before, epg_after: epg_after.max(0.0) })
}

/// Tunes every edge block by block, one thread per edge within a block.
/// The cost is a sampled error per gate with a fresh seed per evaluation;
/// the reported error is re-measured at the winner with an independent seed.
pub fn calibrate_gates(
    dev: &DeviceModel,
    model: &ToyGateModel,
    config: &GateCalConfig,
    seed: u64,
) -> Result<GateCalibration, GateCalError> {
    check_repetitions(&config.repetitions)?;
    let blocks = color_edges(&dev.coupling);
    let mut edges = BTreeMap::new();
    for block in &blocks.blocks {
        let results: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = block
                .iter()
                .map(|&e| {
                    let init = dev.gate_params.get(&e).copied().unwrap_or(model.ideal);
                    s.spawn(move || (e, calibrate_edge(init, model, e, config, edge_seed(seed, e))))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("calibration thread panicked")).collect()
        });
        for (e, r) in results {
            edges.insert(e, r?);
        }
    }
    Ok(GateCalibration { device_hash: dev.hash(), blocks, edges })
}

/// Runs [`calibrate_gates`] and returns the device with the optimized
/// parameters and error rates written in.
pub fn calibrate_device(
    dev: &DeviceModel,
    model: &ToyGateModel,
    config: &GateCalConfig,
    seed: u64,
) -> Result<(DeviceModel, GateCalibration), GateCalError> {
    let cal = calibrate_gates(dev, model, config, seed)?;
    let mut out = dev.clone();
    cal.apply(&mut out);
    Ok((out, cal))
}
