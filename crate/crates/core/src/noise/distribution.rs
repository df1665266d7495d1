//! Output distributions over classical bitstrings.
//!
//! Bitstrings are written with clbit 0 as the leftmost character.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Widest distribution a `u64` key can hold.
pub const MAX_WIDTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("bitstring `{0}` is malformed")]
    BadBitstring(String),
    #[error("bitstring `{got}` has width {}, expected {expected}", got.len())]
    Width { expected: usize, got: String },
    #[error("probabilities sum to {0}")]
    NotNormalized(f64),
    #[error("negative or non-finite probability {0}")]
    BadProbability(f64),
    #[error("counts sum to {sum}, expected {shots} shots")]
    CountMismatch { sum: u64, shots: u64 },
    #[error("width {0} exceeds the 64-bit limit")]
    TooWide(usize),
    #[error("empty distribution")]
    Empty,
    #[error("pauli string `{0}` is malformed")]
    BadPauli(String),
    #[error("pauli string has {pauli} positions but the distribution has width {width}")]
    PauliWidth { pauli: usize, width: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    width: usize,
    probs: BTreeMap<u64, f64>,
    /// Number of samples behind the estimate; 0 for exact distributions.
    pub shots: u64,
}

pub fn format_bits(key: u64, width: usize) -> String {
    (0..width).map(|i| if key >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<u64, DistributionError> {
    if s.len() > MAX_WIDTH || s.is_empty() {
        return Err(DistributionError::BadBitstring(s.to_string()));
    }
    let mut key = 0u64;
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => key |= 1 << i,
            _ => return Err(DistributionError::BadBitstring(s.to_string())),
        }
    }
    Ok(key)
}

impl Distribution {
    /// Normalized distribution from explicit probabilities. Zero entries are dropped.
    pub fn from_probs(
        width: usize,
        probs: impl IntoIterator<Item = (u64, f64)>,
        shots: u64,
    ) -> Result<Self, DistributionError> {
        if width > MAX_WIDTH {
            return Err(DistributionError::TooWide(width));
        }
        let mut map = BTreeMap::new();
        let mut total = 0.0;
        for (k, p) in probs {
            if !p.is_finite() || p < 0.0 {
                return Err(DistributionError::BadProbability(p));
            }
            if width < 64 && k >> width != 0 {
                return Err(DistributionError::Width { expected: width, got: format_bits(k, 64 - k.leading_zeros() as usize) });
            }
            total += p;
            if p > 0.0 {
                *map.entry(k).or_insert(0.0) += p;
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DistributionError::NotNormalized(total));
        }
        Ok(Distribution { width, probs: map, shots })
    }

    pub fn from_counts(width: usize, counts: &BTreeMap<u64, u64>) -> Result<Self, DistributionError> {
        let shots: u64 = counts.values().sum();
        if shots == 0 {
            return Err(DistributionError::Empty);
        }
        Self::from_probs(width, counts.iter().map(|(&k, &c)| (k, c as f64 / shots as f64)), shots)
    }

    /// Point mass on `key`.
    pub fn point(width: usize, key: u64) -> Self {
        Distribution { width, probs: BTreeMap::from([(key, 1.0)]), shots: 0 }
    }

    /// Uniform over all `2^width` strings.
    pub fn uniform(width: usize) -> Self {
        let n = 1u64 << width;
        Distribution { width, probs: (0..n).map(|k| (k, 1.0 / n as f64)).collect(), shots: 0 }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn prob(&self, key: u64) -> f64 {
        self.probs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn prob_of(&self, bits: &str) -> Result<f64, DistributionError> {
        if bits.len() != self.width {
            return Err(DistributionError::Width { expected: self.width, got: bits.to_string() });
        }
        Ok(self.prob(parse_bits(bits)?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &BTreeMap<u64, f64> {
        &self.probs
    }

    /// Integer counts when the distribution came from sampling.
    pub fn counts(&self) -> Option<BTreeMap<u64, u64>> {
        if self.shots == 0 {
            return None;
        }
        let mut out = BTreeMap::new();
        for (&k, &p) in &self.probs {
            let c = p * self.shots as f64;
            if (c - c.round()).abs() > 1e-6 {
                return None;
            }
            out.insert(k, c.round() as u64);
        }
        Some(out)
    }

    /// Most probable string, smallest key on ties.
    pub fn mode(&self) -> Option<u64> {
        let mut best: Option<(u64, f64)> = None;
        for (&k, &p) in &self.probs {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((k, p));
            }
        }
        best.map(|(k, _)| k)
    }

    /// Marginal over the listed bit positions; bit `i` of the result is
    /// position `bits[i]` of the input.
    pub fn marginal(&self, bits: &[usize]) -> Distribution {
        let mut map = BTreeMap::new();
        for (&k, &p) in &self.probs {
            let mut m = 0u64;
            for (i, &b) in bits.iter().enumerate() {
                m |= (k >> b & 1) << i;
            }
            *map.entry(m).or_insert(0.0) += p;
        }
        Distribution { width: bits.len(), probs: map, shots: self.shots }
    }

    pub fn total_variation(&self, other: &Distribution) -> f64 {
        let mut keys: Vec<u64> = self.probs.keys().chain(other.probs.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys.iter().map(|&k| (self.prob(k) - other.prob(k)).abs()).sum::<f64>()
    }

    /// `Σ_s p(s)·(−1)^{parity of s on the support of the Pauli}`.
    pub fn pauli_expectation(&self, pauli: &PauliString) -> Result<f64, DistributionError> {
        if pauli.len() > self.width {
            return Err(DistributionError::PauliWidth { pauli: pauli.len(), width: self.width });
        }
        let mask = pauli.support_mask();
        Ok(self.probs.iter().map(|(&k, &p)| if (k & mask).count_ones() % 2 == 0 { p } else { -p }).sum())
    }
}

pub fn pauli_expectation(dist: &Distribution, pauli: &PauliString) -> Result<f64, DistributionError> {
    dist.pauli_expectation(pauli)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis; character `i` acts on qubit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support_mask(&self) -> u64 {
        self.0.iter().enumerate().filter(|(_, p)| **p != Pauli::I).fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }
}

impl FromStr for PauliString {
    type Err = DistributionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(DistributionError::BadPauli(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .and_then(|v| if v.is_empty() { Err(DistributionError::BadPauli(s.to_string())) } else { Ok(PauliString(v)) })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            let c = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    counts: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    probs: Option<BTreeMap<String, f64>>,
    shots: u64,
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self.counts() {
            Some(c) => Repr {
                counts: Some(c.into_iter().map(|(k, v)| (format_bits(k, self.width), v)).collect()),
                probs: None,
                shots: self.shots,
            },
            None => Repr {
                counts: None,
                probs: Some(self.probs.iter().map(|(&k, &p)| (format_bits(k, self.width), p)).collect()),
                shots: self.shots,
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = Repr::deserialize(d)?;
        let width_of = |keys: &mut dyn Iterator<Item = &String>| -> Result<usize, D::Error> {
            let mut w = None;
            for k in keys {
                match w {
                    None => w = Some(k.len()),
                    Some(x) if x != k.len() => return Err(D::Error::custom("bitstrings differ in width")),
                    _ => {}
                }
            }
            w.ok_or_else(|| D::Error::custom("empty distribution"))
        };
        match (r.counts, r.probs) {
            (Some(c), None) => {
                let width = width_of(&mut c.keys())?;
                let mut map = BTreeMap::new();
                for (k, v) in c {
                    map.insert(parse_bits(&k).map_err(D::Error::custom)?, v);
                }
                let sum: u64 = map.values().sum();
                if sum != r.shots {
                    return Err(D::Error::custom(DistributionError::CountMismatch { sum, shots: r.shots }));
                }
                Distribution::from_counts(width, &map).map_err(D::Error::custom)
            }
            (None, Some(p)) => {
                let width = width_of(&mut p.keys())?;
                let mut entries = Vec::new();
                for (k, v) in p {
                    entries.push((parse_bits(&k).map_err(D::Error::custom)?, v));
                }
                Distribution::from_probs(width, entries, r.shots).map_err(D::Error::custom)
            }
            _ => Err(D::Error::custom("expected exactly one of `counts` or `probs`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_order_is_clbit_zero_first() {
        assert_eq!(format_bits(0b0110, 4), "0110");
        assert_eq!(format_bits(0b0001, 4), "1000");
        assert_eq!(parse_bits("1000").unwrap(), 1);
    }

    #[test]
    fn pauli_expectations() {
        let d = Distribution::point(2, 0);
        assert_eq!(d.pauli_expectation(&"ZI".parse().unwrap()).unwrap(), 1.0);
        let u = Distribution::uniform(2);
        assert_eq!(u.pauli_expectation(&"ZZ".parse().unwrap()).unwrap(), 0.0);
        let d = Distribution::from_probs(1, [(0, 0.75), (1, 0.25)], 0).unwrap();
        assert_eq!(d.pauli_expectation(&"Z".parse().unwrap()).unwrap(), 0.5);
        assert_eq!(d.pauli_expectation(&"I".parse().unwrap()).unwrap(), 1.0);
        assert!(d.pauli_expectation(&"ZZ".parse().unwrap()).is_err());
    }

    #[test]
    fn counts_round_trip_json() {
        let counts = BTreeMap::from([(0b01, 3u64), (0b10, 5)]);
        let d = Distribution::from_counts(2, &counts).unwrap();
        let j = serde_json::to_string(&d).unwrap();
        assert_eq!(j, r#"{"counts":{"01":5,"10":3},"shots":8}"#);
        let back: Distribution = serde_json::from_str(&j).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn probs_round_trip_json() {
        let d = Distribution::from_probs(3, [(1, 0.1), (6, 0.9)], 0).unwrap();
        let back: Distribution = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Distribution::from_probs(1, [(0, 0.5)], 0).is_err());
        assert!(serde_json::from_str::<Distribution>(r#"{"counts":{"0":1,"11":1},"shots":2}"#).is_err());
        assert!(serde_json::from_str::<Distribution>(r#"{"counts":{"0":1},"shots":2}"#).is_err());
    }

    #[test]
    fn marginal_and_tv() {
        let d = Distribution::from_probs(2, [(0b00, 0.5), (0b11, 0.5)], 0).unwrap();
        let m = d.marginal(&[1]);
        assert_eq!(m.prob(0), 0.5);
        assert_eq!(d.total_variation(&Distribution::point(2, 0)), 0.5);
    }
}
