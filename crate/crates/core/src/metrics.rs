//! Benchmark figures of merit: success probability, Hellinger-based
//! infidelity, selectivity, landscape SSIM, Pearson distance, heavy outputs,
//! error-budget limits and QEC detection success.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::device::{DeviceError, DeviceModel};
use crate::noise::distribution::{parse_bits, Distribution, DistributionError};
use crate::readout::hellinger_loss;
use crate::schedule::ScheduledCircuit;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("bitstring has {got} bits, distribution has {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("{what}: need at least {min}, got {got}")]
    TooFew { what: &'static str, min: usize, got: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("landscape shapes differ: {a:?} vs {b:?}")]
    ShapeMismatch { a: (usize, usize), b: (usize, usize) },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("reference landscape is constant and the other differs")]
    ConstantLandscape,
    #[error("landscape is not rectangular or has non-finite values")]
    BadLandscape,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn target_key(dist: &Distribution, target: &str) -> Result<u64, MetricsError> {
    if target.len() != dist.width() {
        return Err(MetricsError::WidthMismatch { expected: dist.width(), got: target.len() });
    }
    Ok(parse_bits(target)?)
}

pub fn success_probability(dist: &Distribution, target: &str) -> Result<f64, MetricsError> {
    Ok(dist.prob(target_key(dist, target)?))
}

/// `1 − (1 − H²)²` with `H` the Hellinger distance.
pub fn circuit_infidelity(measured: &Distribution, ideal: &Distribution) -> f64 {
    let h2 = hellinger_loss(measured, ideal).powi(2);
    (1.0 - (1.0 - h2).powi(2)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    StrongCorrect,
    WeakCorrect,
    Incorrect,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selectivity {
    pub value: f64,
    pub p_target: f64,
    pub p_next: f64,
    /// No other outcome was observed and `p_next` is the `1/(4·shots)` floor.
    pub floored: bool,
}

impl Selectivity {
    pub fn regime(&self) -> Regime {
        if self.value > 1.0 {
            Regime::StrongCorrect
        } else if self.value > 0.0 {
            Regime::WeakCorrect
        } else {
            Regime::Incorrect
        }
    }
}

/// `log2(p_target / p_next)` where `p_next` is the strongest other outcome.
/// Gives −∞ when the target never appears, and +∞ for an exact
/// distribution concentrated on the target.
pub fn selectivity(dist: &Distribution, target: &str) -> Result<Selectivity, MetricsError> {
    let key = target_key(dist, target)?;
    let p_target = dist.prob(key);
    let mut p_next = dist.iter().filter(|&(k, _)| k != key).map(|(_, p)| p).fold(0.0, f64::max);
    let mut floored = false;
    if p_next <= 0.0 && dist.shots > 0 {
        p_next = 1.0 / (4.0 * dist.shots as f64);
        floored = true;
    }
    let value = if p_target <= 0.0 { f64::NEG_INFINITY } else { (p_target / p_next).log2() };
    Ok(Selectivity { value, p_target, p_next, floored })
}

/// Relative shot count needed to resolve the target: `1/(p_t·S²)`.
pub fn required_shots(p_target: f64, s: f64) -> Result<f64, MetricsError> {
    if !(p_target > 0.0) {
        return Err(MetricsError::NonPositive("target probability"));
    }
    if !(s > 0.0) {
        return Err(MetricsError::NonPositive("selectivity"));
    }
    Ok(1.0 / (p_target * s * s))
}

/// Cost values on a rectangular grid; rows follow the first parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub grid: Vec<Vec<f64>>,
    pub param1: (f64, f64),
    pub param2: (f64, f64),
}

impl Landscape {
    pub fn new(grid: Vec<Vec<f64>>, param1: (f64, f64), param2: (f64, f64)) -> Result<Self, MetricsError> {
        let l = Landscape { grid, param1, param2 };
        l.check()?;
        Ok(l)
    }

    fn check(&self) -> Result<(), MetricsError> {
        let cols = self.grid.first().map_or(0, Vec::len);
        if self.grid.is_empty() || cols == 0 || self.grid.iter().any(|r| r.len() != cols || r.iter().any(|v| !v.is_finite())) {
            return Err(MetricsError::BadLandscape);
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grid.len(), self.grid.first().map_or(0, Vec::len))
    }

    /// Grid coordinate of row `i` / column `j` (inclusive ranges).
    pub fn axis_value(range: (f64, f64), i: usize, n: usize) -> f64 {
        if n <= 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    fn range(&self) -> (f64, f64) {
        self.grid.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Two header lines `name,lo,hi,count` per axis, then one row per line.
    pub fn to_csv(&self) -> String {
        let (r, c) = self.shape();
        let mut out = String::new();
        writeln!(out, "param1,{},{},{}", self.param1.0, self.param1.1, r).unwrap();
        writeln!(out, "param2,{},{},{}", self.param2.0, self.param2.1, c).unwrap();
        for row in &self.grid {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut axis = |name: &str| -> Result<(f64, f64, usize), MetricsError> {
            let line = lines.next().ok_or_else(|| MetricsError::Csv(format!("missing {name} header")))?;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 || f[0] != name {
                return Err(MetricsError::Csv(format!("bad {name} header: {line}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| MetricsError::Csv(format!("{s}: {e}")));
            let n = f[3].parse::<usize>().map_err(|e| MetricsError::Csv(format!("{}: {e}", f[3])))?;
            Ok((num(f[1])?, num(f[2])?, n))
        };
        let (a0, a1, rows) = axis("param1")?;
        let (b0, b1, cols) = axis("param2")?;
        let grid = lines
            .map(|l| l.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| MetricsError::Csv(format!("{s}: {e}")))).collect())
            .collect::<Result<Vec<Vec<f64>>, _>>()?;
        let l = Landscape::new(grid, (a0, a1), (b0, b1))?;
        if l.shape() != (rows, cols) {
            return Err(MetricsError::Csv(format!("header says {rows}x{cols}, grid is {:?}", l.shape())));
        }
        Ok(l)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), MetricsError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, MetricsError> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig { window: 7, k1: 0.01, k2: 0.03 }
    }
}

/// Mean structural similarity of `b` against the reference `a`.
pub fn ssim(a: &Landscape, b: &Landscape) -> Result<f64, MetricsError> {
    ssim_with(a, b, &SsimConfig::default())
}

/// SSIM over every fully contained `w×w` window. The dynamic range comes
/// from `a`, so the score is not symmetric in general.
pub fn ssim_with(a: &Landscape, b: &Landscape, cfg: &SsimConfig) -> Result<f64, MetricsError> {
    a.check()?;
    b.check()?;
    let (r, c) = a.shape();
    if b.shape() != (r, c) {
        return Err(MetricsError::ShapeMismatch { a: a.shape(), b: b.shape() });
    }
    let w = cfg.window;
    if r < w.max(8) || c < w.max(8) {
        return Err(MetricsError::TooFew { what: "landscape side", min: w.max(8), got: r.min(c) });
    }
    let (lo, hi) = a.range();
    let l = hi - lo;
    if l == 0.0 {
        return if a.grid == b.grid { Ok(1.0) } else { Err(MetricsError::ConstantLandscape) };
    }
    let c1 = (cfg.k1 * l).powi(2);
    let c2 = (cfg.k2 * l).powi(2);
    let n = (w * w) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..=r - w {
        for j in 0..=c - w {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for di in 0..w {
                for dj in 0..w {
                    let x = a.grid[i + di][j + dj];
                    let y = b.grid[i + di][j + dj];
                    sa += x;
                    sb += y;
                    saa += x * x;
                    sbb += y * y;
                    sab += x * y;
                }
            }
            let (ma, mb) = (sa / n, sb / n);
            let va = (saa / n - ma * ma).max(0.0);
            let vb = (sbb / n - mb * mb).max(0.0);
            let cov = sab / n - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// `1 − r` with `r` the sample Pearson correlation.
pub fn pearson_distance(ideal: &[f64], measured: &[f64]) -> Result<f64, MetricsError> {
    if ideal.len() != measured.len() {
        return Err(MetricsError::WidthMismatch { expected: ideal.len(), got: measured.len() });
    }
    if ideal.len() < 3 {
        return Err(MetricsError::TooFew { what: "Pearson samples", min: 3, got: ideal.len() });
    }
    let n = ideal.len() as f64;
    let mx = ideal.iter().sum::<f64>() / n;
    let my = measured.iter().sum::<f64>() / n;
    let sxx: f64 = ideal.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = measured.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = ideal.iter().zip(measured).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(MetricsError::ZeroVariance("ideal values"));
    }
    if syy <= 0.0 {
        return Err(MetricsError::ZeroVariance("measured values"));
    }
    Ok(1.0 - (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Outcomes whose ideal probability is strictly above the median over all
/// `2^n` outcomes (zeros included).
pub fn heavy_output_set(ideal: &Distribution) -> BTreeSet<u64> {
    let size = 1u64 << ideal.width();
    let mut all: Vec<f64> = (0..size).map(|k| ideal.prob(k)).collect();
    all.sort_by(f64::total_cmp);
    let mid = all.len() / 2;
    let median = if all.len() % 2 == 0 { 0.5 * (all[mid - 1] + all[mid]) } else { all[mid] };
    ideal.iter().filter(|&(_, p)| p > median).map(|(k, _)| k).collect()
}

pub fn heavy_output_probability(measured: &Distribution, heavy: &BTreeSet<u64>) -> f64 {
    heavy.iter().map(|&k| measured.prob(k)).sum()
}

pub const QV_THRESHOLD: f64 = 2.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QvAnalysis {
    pub qubits: usize,
    pub mean: f64,
    pub std_error: f64,
    pub passes: bool,
    /// Running mean over circuits in the given order.
    pub cumulative_mean: Vec<f64>,
}

pub fn qv_analysis(ho_probs: &[f64], n: usize) -> Result<QvAnalysis, MetricsError> {
    qv_analysis_with(ho_probs, n, 1000, 0)
}

/// Mean heavy-output probability with a bootstrap standard error; the width
/// passes when `mean − 2·SE > 2/3`.
pub fn qv_analysis_with(ho_probs: &[f64], n: usize, resamples: usize, seed: u64) -> Result<QvAnalysis, MetricsError> {
    const MIN_CIRCUITS: usize = 30;
    if ho_probs.len() < MIN_CIRCUITS {
        return Err(MetricsError::TooFew { what: "QV circuits", min: MIN_CIRCUITS, got: ho_probs.len() });
    }
    let k = ho_probs.len();
    let mean = ho_probs.iter().sum::<f64>() / k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..resamples.max(2))
        .map(|_| (0..k).map(|_| ho_probs[rng.gen_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    let mm = means.iter().sum::<f64>() / means.len() as f64;
    let std_error = (means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt();
    let cumulative_mean = ho_probs
        .iter()
        .scan(0.0, |s, &h| {
            *s += h;
            Some(*s)
        })
        .enumerate()
        .map(|(i, s)| s / (i + 1) as f64)
        .collect();
    Ok(QvAnalysis { qubits: n, mean, std_error, passes: mean - 2.0 * std_error > QV_THRESHOLD, cumulative_mean })
}

/// Product of `1 − ε` over every gate of the circuit.
pub fn gate_error_limit(sc: &ScheduledCircuit, dev: &DeviceModel) -> Result<f64, MetricsError> {
    let mut f = 1.0;
    for g in &sc.circuit.gates {
        f *= 1.0 - dev.gate_error(g)?;
    }
    Ok(f)
}

/// Product of `exp(−T_i / 2·T1_i)` over qubits with nonzero active time.
pub fn t1_limit(sc: &ScheduledCircuit, dev: &DeviceModel) -> f64 {
    (0..sc.num_qubits())
        .map(|q| {
            let t_us = sc.active_time(q) as f64 * 1e-3;
            match dev.t1_us.get(q) {
                Some(&t1) if t_us > 0.0 => (-t_us / (2.0 * t1)).exp(),
                _ => 1.0,
            }
        })
        .product()
}

/// Joint distribution of measured (rows) and expected (columns) syndromes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSyndromeDistribution {
    pub bits: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl JointSyndromeDistribution {
    pub fn zeros(bits: usize) -> Self {
        let n = 1 << bits;
        JointSyndromeDistribution { bits, matrix: vec![vec![0.0; n]; n] }
    }

    /// Splits each outcome of `dist` into (measured, expected) syndromes.
    pub fn from_distribution(dist: &Distribution, bits: usize, split: impl Fn(u64) -> (u64, u64)) -> Self {
        let mut j = Self::zeros(bits);
        for (k, p) in dist.iter() {
            let (m, e) = split(k);
            j.matrix[m as usize][e as usize] += p;
        }
        j
    }

    pub fn total(&self) -> f64 {
        self.matrix.iter().flatten().sum()
    }

    /// Averages several joint distributions with equal weight.
    pub fn average(parts: &[JointSyndromeDistribution]) -> Option<Self> {
        let first = parts.first()?;
        let mut out = Self::zeros(first.bits);
        for p in parts {
            for (r, row) in p.matrix.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    out.matrix[r][c] += v / parts.len() as f64;
                }
            }
        }
        Some(out)
    }
}

/// Probability that measured and expected syndromes agree.
pub fn detection_success(j: &JointSyndromeDistribution) -> f64 {
    (0..j.matrix.len()).map(|s| j.matrix[s][s]).sum()
}

/// Improvement of `a` over `b` after removing the chance level.
pub fn enhancement_ratio(a: f64, b: f64, chance: f64) -> Result<f64, MetricsError> {
    if b - chance <= 0.0 {
        return Err(MetricsError::NonPositive("baseline above chance"));
    }
    Ok((a - chance) / (b - chance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, GateType};
    use crate::schedule::{schedule_asap, Durations};
    use crate::transpile::CouplingMap;
    use std::collections::BTreeMap;

    fn dist(width: usize, probs: &[(u64, f64)]) -> Distribution {
        Distribution::from_probs(width, probs.iter().copied(), 0).unwrap()
    }

    #[test]
    fn success_probability_cases() {
        assert_eq!(success_probability(&Distribution::point(3, 0b101), "101").unwrap(), 1.0);
        assert!((success_probability(&Distribution::uniform(5), "10010").unwrap() - 1.0 / 32.0).abs() < 1e-15);
        assert!(matches!(success_probability(&Distribution::uniform(5), "10"), Err(MetricsError::WidthMismatch { .. })));
    }

    #[test]
    fn infidelity_cases() {
        let a = dist(1, &[(0, 0.3), (1, 0.7)]);
        assert!(circuit_infidelity(&a, &a).abs() < 1e-15);
        assert!((circuit_infidelity(&Distribution::point(1, 0), &Distribution::point(1, 1)) - 1.0).abs() < 1e-15);
        let half = dist(1, &[(0, 0.5), (1, 0.5)]);
        let i = circuit_infidelity(&Distribution::point(1, 0), &half);
        assert!((i - 0.5).abs() < 1e-12, "{i}");
        let b = dist(1, &[(0, 0.9), (1, 0.1)]);
        assert!((circuit_infidelity(&a, &b) - circuit_infidelity(&b, &a)).abs() < 1e-15);
    }

    #[test]
    fn selectivity_cases() {
        let d = dist(2, &[(0, 0.5), (1, 0.125), (2, 0.125), (3, 0.25)]);
        // Strongest other outcome is 0.25 here.
        assert!((selectivity(&d, "00").unwrap().value - 1.0).abs() < 1e-12);
        let d = dist(3, &[(0, 0.5), (1, 0.125), (2, 0.125), (3, 0.125), (4, 0.125)]);
        let s = selectivity(&d, "000").unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert_eq!(s.regime(), Regime::StrongCorrect);
        let tie = dist(1, &[(0, 0.5), (1, 0.5)]);
        assert_eq!(selectivity(&tie, "0").unwrap().value, 0.0);
        assert_eq!(selectivity(&tie, "0").unwrap().regime(), Regime::Incorrect);
        assert!(selectivity(&Distribution::uniform(4), "0110").unwrap().value.abs() < 1e-12);
        assert_eq!(selectivity(&Distribution::point(2, 1), "00").unwrap().value, f64::NEG_INFINITY);
        let counts: BTreeMap<u64, u64> = [(0b11, 100)].into_iter().collect();
        let s = selectivity(&Distribution::from_counts(2, &counts).unwrap(), "11").unwrap();
        assert!(s.floored && (s.value - 400f64.log2()).abs() < 1e-12);
        // Rescaling all probabilities leaves the ratio unchanged.
        let a = dist(2, &[(0, 0.4), (1, 0.2), (2, 0.2), (3, 0.2)]);
        let b = dist(2, &[(0, 0.4 * 0.5), (1, 0.1), (2, 0.1), (3, 0.6)]);
        assert!((selectivity(&a, "00").unwrap().value - 1.0).abs() < 1e-12);
        assert!(selectivity(&b, "00").unwrap().value < 0.0);
    }

    #[test]
    fn required_shots_cases() {
        assert!((required_shots(1.0, 10.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((required_shots(0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let r = required_shots(0.3, 0.7).unwrap() / required_shots(0.3, 1.4).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        assert!(required_shots(0.0, 1.0).is_err());
        assert!(required_shots(0.5, -1.0).is_err());
    }

    fn wave(n: usize) -> Landscape {
        let grid = (0..n).map(|i| (0..n).map(|j| (i as f64 * 0.4).sin() * (j as f64 * 0.3).cos()).collect()).collect();
        Landscape::new(grid, (0.0, 1.0), (0.0, 2.0)).unwrap()
    }

    #[test]
    fn ssim_cases() {
        let a = wave(16);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let (lo, hi) = a.range();
        let shifted = Landscape { grid: a.grid.iter().map(|r| r.iter().map(|v| v + 0.5 * (hi - lo)).collect()).collect(), ..a.clone() };
        assert!(ssim(&a, &shifted).unwrap() < 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let noise = Landscape {
                grid: (0..16).map(|_| (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
                ..a.clone()
            };
            let s = ssim(&a, &noise).unwrap();
            assert!(s.abs() <= 0.1, "{s}");
        }
        assert!(matches!(ssim(&a, &wave(12)), Err(MetricsError::ShapeMismatch { .. })));
        assert!(matches!(ssim(&wave(6), &wave(6)), Err(MetricsError::TooFew { .. })));
        let flat = Landscape::new(vec![vec![1.0; 8]; 8], (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert_eq!(ssim(&flat, &flat).unwrap(), 1.0);
        assert!(ssim(&flat, &wave(8)).is_err());
    }

    /// Direct evaluation of the luminance/contrast/structure product for a
    /// single window covering the whole 8×8 grid.
    #[test]
    fn ssim_single_window_formula() {
        let a = wave(8);
        let b = Landscape { grid: a.grid.iter().map(|r| r.iter().map(|v| 0.7 * v + 0.1).collect()).collect(), ..a.clone() };
        let cfg = SsimConfig { window: 8, ..SsimConfig::default() };
        let xs: Vec<f64> = a.grid.concat();
        let ys: Vec<f64> = b.grid.concat();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n;
        let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n;
        let cxy = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
        let l = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        let (c1, c2) = ((0.01 * l).powi(2), (0.03 * l).powi(2));
        let expect = (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        assert!((ssim_with(&a, &b, &cfg).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn landscape_csv_roundtrip() {
        let a = wave(9);
        let text = a.to_csv();
        assert!(text.starts_with("param1,0,1,9\nparam2,0,2,9\n"));
        assert_eq!(Landscape::from_csv(&text).unwrap(), a);
        assert!(Landscape::from_csv("param1,0,1,2\nparam2,0,1,2\n1,2\n3\n").is_err());
        assert!(Landscape::from_csv("param1,0,1,3\nparam2,0,1,2\n1,2\n3,4\n").is_err());
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 4.0, 3.0, -1.0];
        assert!(pearson_distance(&x, &x).unwrap().abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_distance(&x, &neg).unwrap() - 2.0).abs() < 1e-12);
        let aff: Vec<f64> = x.iter().map(|v| 0.5 * v + 0.1).collect();
        assert!(pearson_distance(&x, &aff).unwrap().abs() < 1e-12);
        assert!(matches!(pearson_distance(&[1.0, 1.0, 1.0], &x[..3]), Err(MetricsError::ZeroVariance(_))));
        assert!(matches!(pearson_distance(&x[..2], &x[..2]), Err(MetricsError::TooFew { .. })));
    }

    #[test]
    fn heavy_output_cases() {
        assert!(heavy_output_set(&Distribution::uniform(3)).is_empty());
        let d = dist(2, &[(0b00, 0.4), (0b10, 0.3), (0b01, 0.2), (0b11, 0.1)]);
        // Keys store clbit 0 in bit 0: "01" is key 0b10.
        assert_eq!(heavy_output_set(&d), [0b00, 0b10].into_iter().collect());
        assert_eq!(heavy_output_set(&Distribution::point(2, 3)), [3].into_iter().collect());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let w: Vec<f64> = (0..16).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = w.iter().sum();
            let d = dist(4, &w.iter().enumerate().map(|(k, v)| (k as u64, v / s)).collect::<Vec<_>>());
            let heavy = heavy_output_set(&d);
            assert!(heavy_output_probability(&d, &heavy) >= 0.5);
        }
    }

    #[test]
    fn qv_cases() {
        assert!(qv_analysis(&[0.85; 40], 5).unwrap().passes);
        assert!(!qv_analysis(&[0.5; 40], 5).unwrap().passes);
        let alt: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.6 } else { 0.7 }).collect();
        let a = qv_analysis(&alt, 5).unwrap();
        assert!((a.mean - 0.65).abs() < 1e-12 && !a.passes);
        assert!((a.cumulative_mean[1] - 0.65).abs() < 1e-12);
        assert!(a.std_error > 0.0 && a.std_error < 0.02);
        assert!(matches!(qv_analysis(&[0.9; 10], 3), Err(MetricsError::TooFew { .. })));
    }

    fn dev_line(n: usize) -> DeviceModel {
        let d = Durations::new().with(GateType::X, 35).with(GateType::Sx, 35).with(GateType::Rz, 0).with(GateType::Cx, 300).with(GateType::Measure, 1000);
        DeviceModel::noiseless(CouplingMap::line(n), d)
    }

    #[test]
    fn error_limits() {
        let mut dev = dev_line(2);
        let mut c = Circuit::new(2, 0);
        for _ in 0..10 {
            c.x(0);
        }
        let sc = schedule_asap(&c, &dev.gate_durations_ns).unwrap();
        assert_eq!(gate_error_limit(&sc, &dev).unwrap(), 1.0);
        dev.single_qubit_error.insert(GateType::X, vec![0.01, 0.01]);
        assert!((gate_error_limit(&sc, &dev).unwrap() - 0.99f64.powi(10)).abs() < 1e-15);
        assert!((gate_error_limit(&sc, &dev).unwrap() - 0.9044).abs() < 1e-4);

        // One qubit active for exactly T1.
        dev.t1_us = vec![0.35, 0.35];
        assert!((t1_limit(&sc, &dev) - (-0.5f64).exp()).abs() < 1e-12);
        assert!((t1_limit(&sc, &dev) - 0.6065).abs() < 1e-4);
        let empty = schedule_asap(&Circuit::new(2, 0), &dev.gate_durations_ns).unwrap();
        assert_eq!(t1_limit(&empty, &dev), 1.0);
        let mut c2 = Circuit::new(2, 0);
        for _ in 0..20 {
            c2.x(0);
            c2.x(1);
        }
        let sc2 = schedule_asap(&c2, &dev.gate_durations_ns).unwrap();
        assert!((t1_limit(&sc2, &dev) - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn syndrome_metrics() {
        let mut j = JointSyndromeDistribution::zeros(4);
        j.matrix[6][6] = 1.0;
        assert_eq!(detection_success(&j), 1.0);
        let u = JointSyndromeDistribution { bits: 4, matrix: vec![vec![1.0 / 256.0; 16]; 16] };
        assert!((detection_success(&u) - 1.0 / 16.0).abs() < 1e-15);
        assert!((u.total() - 1.0).abs() < 1e-12);
        let mut off = JointSyndromeDistribution::zeros(4);
        off.matrix[1][2] = 1.0;
        assert_eq!(detection_success(&off), 0.0);
        let avg = JointSyndromeDistribution::average(&[j, off]).unwrap();
        assert!((detection_success(&avg) - 0.5).abs() < 1e-15);

        assert!((enhancement_ratio(0.4, 0.4, 1.0 / 16.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(enhancement_ratio(1.0 / 16.0, 0.4, 1.0 / 16.0).unwrap(), 0.0);
        assert!((enhancement_ratio(0.8, 0.25, 1.0 / 16.0).unwrap() - 0.7375 / 0.1875).abs() < 1e-12);
        assert!(enhancement_ratio(0.8, 0.05, 1.0 / 16.0).is_err());
    }

    #[test]
    fn joint_from_distribution() {
        let d = dist(4, &[(0b0110, 0.75), (0b1001, 0.25)]);
        let j = JointSyndromeDistribution::from_distribution(&d, 2, |k| (k & 3, k >> 2));
        assert_eq!(j.matrix[2][1], 0.75);
        assert_eq!(j.matrix[1][2], 0.25);
        assert_eq!(detection_success(&j), 0.0);
    }
}
