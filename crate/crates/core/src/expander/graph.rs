//! Simple regular graphs, Cayley graphs and their text/JSON encodings.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::finite::{GroupElement, Quotient};

/// A simple `k`-regular graph on vertices `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    k: usize,
    neighbors: Vec<Vec<usize>>,
    labels: Option<Vec<GroupElement>>,
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    n: usize,
    k: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Validates simplicity and regularity. Connectivity is checked by the
    /// operations that need it, see [`Graph::require_connected`].
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Graph("graph has no vertices".into()));
        }
        let mut neighbors = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(LabError::Graph(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(LabError::Graph(format!("loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(LabError::Graph(format!("repeated edge ({u}, {v})")));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        let k = neighbors[0].len();
        if let Some(v) = neighbors.iter().position(|nb| nb.len() != k) {
            return Err(LabError::Graph(format!(
                "not regular: vertex {v} has degree {}, vertex 0 has {k}",
                neighbors[v].len()
            )));
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Ok(Graph {
            n,
            k,
            neighbors,
            labels: None,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_edges(n, &edges).expect("complete graph is simple and regular")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("cycle is simple and regular")
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        let edges: Vec<_> = (0..a)
            .flat_map(|u| (0..b).map(move |v| (u, a + v)))
            .collect();
        Self::from_edges(a + b, &edges)
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::from_edges(10, &edges).expect("Petersen graph is simple and 3-regular")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn labels(&self) -> Option<&[GroupElement]> {
        self.labels.as_deref()
    }

    /// Unoriented edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.k / 2
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(LabError::Graph("graph is disconnected".into()))
        }
    }

    /// Breadth-first distances from `source`.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Edge-list text: a `# n=<n> k=<k>` header, then one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={} k={}\n", self.n, self.k);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n_header = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n=") {
                        n_header = Some(
                            v.parse::<usize>()
                                .map_err(|e| LabError::Parse(format!("bad header: {e}")))?,
                        );
                    }
                }
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LabError::Parse(format!("line {}: {e}", lineno + 1)))?;
            if nums.len() != 2 {
                return Err(LabError::Parse(format!(
                    "line {}: expected two vertex ids",
                    lineno + 1
                )));
            }
            edges.push((nums[0], nums[1]));
        }
        let n =
            n_header.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        Self::from_edges(n, &edges)
    }

    pub fn to_json(&self) -> String {
        let wire = GraphWire {
            n: self.n,
            k: self.k,
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        };
        serde_json::to_string(&wire).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: GraphWire = serde_json::from_str(text)?;
        let edges: Vec<_> = wire.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = Self::from_edges(wire.n, &edges)?;
        if g.k != wire.k {
            return Err(LabError::Graph(format!(
                "declared degree {} but edges give {}",
                wire.k, g.k
            )));
        }
        Ok(g)
    }
}

/// Cayley graph with edges `{g, g s}` for generators `s`, over any group given by closures.
pub fn cayley_graph_with<T, M, I>(
    elements: &[T],
    gens: &[T],
    identity: &T,
    mul: M,
    inverse: I,
) -> Result<Graph>
where
    T: Clone + Eq + Hash,
    M: Fn(&T, &T) -> T,
    I: Fn(&T) -> T,
{
    if gens.contains(identity) {
        return Err(LabError::Graph(
            "generator set contains the identity".into(),
        ));
    }
    for s in gens {
        if !gens.contains(&inverse(s)) {
            return Err(LabError::Graph("generator set is not symmetric".into()));
        }
    }
    let distinct: HashSet<&T> = gens.iter().collect();
    if distinct.len() != gens.len() {
        return Err(LabError::Graph(
            "generator set has repeated elements".into(),
        ));
    }
    let index: HashMap<&T, usize> = elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut edges = Vec::with_capacity(elements.len() * gens.len() / 2);
    for (u, g) in elements.iter().enumerate() {
        for s in gens {
            let h = mul(g, s);
            let v = *index.get(&h).ok_or_else(|| {
                LabError::Graph("element set is not closed under the generators".into())
            })?;
            if u < v {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(elements.len(), &edges)?;
    graph.require_connected()?;
    Ok(graph)
}

/// Cayley graph of an enumerated quotient of `SL(3, Z)` for its reduced generators.
pub fn cayley_graph(quotient: &Quotient) -> Result<Graph> {
    let id = GroupElement::identity(quotient.modulus);
    let mut graph = cayley_graph_with(
        &quotient.elements,
        &quotient.generators,
        &id,
        |a, b| a.mul(b).expect("common modulus"),
        |a| a.inverse(),
    )?;
    graph.labels = Some(quotient.elements.clone());
    Ok(graph)
}
