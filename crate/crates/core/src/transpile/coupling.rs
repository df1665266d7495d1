use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::circuit::Qubit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("self-loop on qubit {0}")]
    SelfLoop(Qubit),
    #[error("edge ({0}, {1}) references a qubit outside the device")]
    EdgeOutOfRange(Qubit, Qubit),
    #[error("coupling map is disconnected")]
    Disconnected,
    #[error("layout maps logical qubit {logical} to invalid physical qubit {physical}")]
    LayoutOutOfRange { logical: usize, physical: usize },
    #[error("layout maps two logical qubits to physical qubit {0}")]
    LayoutNotInjective(usize),
    #[error("malformed edge key `{0}`")]
    BadEdgeKey(String),
}

/// Unordered qubit pair, stored with the smaller index first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub Qubit, pub Qubit);

impl Edge {
    pub fn new(a: Qubit, b: Qubit) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn touches(&self, q: Qubit) -> bool {
        self.0 == q || self.1 == q
    }

    pub fn shares_qubit(&self, other: &Edge) -> bool {
        self.touches(other.0) || self.touches(other.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl FromStr for Edge {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TopologyError::BadEdgeKey(s.to_string());
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Ok(Edge::new(a, b))
    }
}

// Edges serialize as "a-b" so they can key JSON objects.
impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Undirected device connectivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingMap {
    num_qubits: usize,
    edges: BTreeSet<Edge>,
    adjacency: Vec<Vec<Qubit>>,
    distance: Vec<Vec<usize>>,
}

impl CouplingMap {
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (Qubit, Qubit)>) -> Result<Self, TopologyError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(TopologyError::EdgeOutOfRange(a, b));
            }
            set.insert(Edge::new(a, b));
        }
        let mut adjacency = vec![Vec::new(); num_qubits];
        for e in &set {
            adjacency[e.0].push(e.1);
            adjacency[e.1].push(e.0);
        }
        adjacency.iter_mut().for_each(|v| v.sort_unstable());
        let distance: Vec<Vec<usize>> = (0..num_qubits).map(|s| bfs_distances(&adjacency, s)).collect();
        if num_qubits > 0 && distance[0].contains(&usize::MAX) {
            return Err(TopologyError::Disconnected);
        }
        Ok(CouplingMap { num_qubits, edges: set, adjacency, distance })
    }

    /// Path `0 – 1 – … – n−1`.
    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("a path is connected")
    }

    /// Complete graph on `n` qubits.
    pub fn full(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("complete graph is connected")
    }

    /// 16-qubit heavy-hexagon lattice (two hexagonal cells).
    pub fn heavy_hex_16() -> Self {
        let edges = [
            (0, 1),
            (1, 2),
            (1, 4),
            (2, 3),
            (3, 5),
            (4, 7),
            (5, 8),
            (6, 7),
            (7, 10),
            (8, 9),
            (8, 11),
            (10, 12),
            (11, 14),
            (12, 13),
            (12, 15),
            (13, 14),
        ];
        Self::new(16, edges).expect("heavy-hex lattice is connected")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: Qubit, b: Qubit) -> bool {
        a != b && self.edges.contains(&Edge::new(a, b))
    }

    pub fn neighbors(&self, q: Qubit) -> &[Qubit] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: Qubit) -> usize {
        self.adjacency[q].len()
    }

    /// Hop distance between physical qubits.
    pub fn distance(&self, a: Qubit, b: Qubit) -> usize {
        self.distance[a][b]
    }

    /// Breadth-first order of all qubits from `seed`, neighbors visited in
    /// ascending index order.
    pub fn bfs_order(&self, seed: Qubit) -> Vec<Qubit> {
        let mut seen = vec![false; self.num_qubits];
        let mut order = Vec::with_capacity(self.num_qubits);
        let mut queue = VecDeque::from([seed]);
        seen[seed] = true;
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for &n in &self.adjacency[q] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        order
    }
}

fn bfs_distances(adjacency: &[Vec<Qubit>], source: Qubit) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    let mut queue = VecDeque::from([source]);
    dist[source] = 0;
    while let Some(q) = queue.pop_front() {
        for &n in &adjacency[q] {
            if dist[n] == usize::MAX {
                dist[n] = dist[q] + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}

#[derive(Serialize, Deserialize)]
struct CouplingRepr {
    num_qubits: usize,
    edges: Vec<(Qubit, Qubit)>,
}

impl Serialize for CouplingMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CouplingRepr { num_qubits: self.num_qubits, edges: self.edges.iter().map(|e| (e.0, e.1)).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CouplingMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CouplingRepr::deserialize(d)?;
        CouplingMap::new(r.num_qubits, r.edges).map_err(serde::de::Error::custom)
    }
}

/// Logical-to-physical qubit assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout(pub Vec<Qubit>);

impl Layout {
    pub fn identity(n: usize) -> Self {
        Layout((0..n).collect())
    }

    pub fn new(map: Vec<Qubit>, num_physical: usize) -> Result<Self, TopologyError> {
        let l = Layout(map);
        l.validate(num_physical)?;
        Ok(l)
    }

    pub fn validate(&self, num_physical: usize) -> Result<(), TopologyError> {
        let mut used = vec![false; num_physical];
        for (logical, &physical) in self.0.iter().enumerate() {
            if physical >= num_physical {
                return Err(TopologyError::LayoutOutOfRange { logical, physical });
            }
            if used[physical] {
                return Err(TopologyError::LayoutNotInjective(physical));
            }
            used[physical] = true;
        }
        Ok(())
    }

    pub fn physical(&self, logical: usize) -> Qubit {
        self.0[logical]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Extends the layout to a bijection on `num_physical` qubits by giving
    /// unused physical qubits to the extra logical indices in ascending order.
    pub fn complete(&self, num_physical: usize) -> Layout {
        let mut used = vec![false; num_physical];
        self.0.iter().for_each(|&p| used[p] = true);
        let mut map = self.0.clone();
        map.extend((0..num_physical).filter(|&p| !used[p]));
        Layout(map)
    }

    pub fn physical_sum(&self) -> usize {
        self.0.iter().sum()
    }
}
