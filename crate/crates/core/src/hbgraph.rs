//! Hyper-bag-graph data model.
//!
//! An hb-graph is a family of weighted multisets (hb-edges) over a vertex
//! universe `0..n`. Multiplicities are non-negative reals; zero
//! multiplicities are never stored. Every hb-edge keeps its members sorted by
//! vertex index and the graph keeps the transposed incidence lists so that
//! both sides of the incidence matrix can be walked in `O(nnz)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a vertex in the universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

/// A weighted multiset of vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct HbEdge {
    members: Vec<(VertexId, f64)>,
    weight: f64,
}

impl HbEdge {
    /// Builds an hb-edge. Repeated vertices have their multiplicities summed
    /// and zero multiplicities are dropped.
    pub fn new<I>(members: I, weight: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, f64)>,
    {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Validation(format!(
                "hb-edge weight must be finite and positive, got {weight}"
            )));
        }
        let mut members: Vec<(VertexId, f64)> = members.into_iter().collect();
        for &(v, m) in &members {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Validation(format!(
                    "multiplicity of {v} must be finite and non-negative, got {m}"
                )));
            }
        }
        members.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(VertexId, f64)> = Vec::with_capacity(members.len());
        for (v, m) in members {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += m,
                _ => merged.push((v, m)),
            }
        }
        merged.retain(|&(_, m)| m > 0.0);
        if merged.is_empty() {
            return Err(Error::Validation("empty hb-edge".into()));
        }
        Ok(HbEdge {
            members: merged,
            weight,
        })
    }

    /// Unit-weight hb-edge from a list of vertex indices; repetitions become
    /// multiplicities.
    pub fn from_vertices<I>(vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        HbEdge::new(vertices.into_iter().map(|v| (VertexId(v), 1.0)), 1.0)
    }

    /// Members sorted by vertex index, each with a strictly positive multiplicity.
    pub fn members(&self) -> &[(VertexId, f64)] {
        &self.members
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Multiplicity of `v` in this hb-edge (0 when absent).
    pub fn multiplicity(&self, v: VertexId) -> f64 {
        self.members
            .binary_search_by_key(&v, |&(u, _)| u)
            .map(|k| self.members[k].1)
            .unwrap_or(0.0)
    }

    /// Sum of the multiplicities.
    pub fn m_cardinality(&self) -> f64 {
        self.members.iter().map(|&(_, m)| m).sum()
    }

    /// Number of distinct vertices.
    pub fn support_len(&self) -> usize {
        self.members.len()
    }

    pub(crate) fn with_weight(&self, weight: f64) -> Result<Self> {
        HbEdge::new(self.members.iter().copied(), weight)
    }
}

/// One nonzero entry of the incidence matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub vertex: VertexId,
    pub edge: usize,
    pub multiplicity: f64,
    pub weight: f64,
}

/// Connected components of the bipartite vertex/hb-edge incidence graph.
#[derive(Debug, Clone)]
pub struct Components {
    /// Component of every vertex, `None` for isolated vertices.
    pub vertex: Vec<Option<usize>>,
    /// Component of every hb-edge.
    pub edge: Vec<usize>,
    /// Number of components that contain at least one hb-edge.
    pub count: usize,
}

/// Immutable hyper-bag-graph.
#[derive(Debug, Clone, PartialEq)]
pub struct HbGraph {
    n: usize,
    edges: Vec<HbEdge>,
    labels: Option<Vec<String>>,
    // transposed incidence: per vertex, (edge index, multiplicity) sorted by edge
    incident: Vec<Vec<(usize, f64)>>,
}

impl HbGraph {
    pub fn new(n: usize, edges: Vec<HbEdge>, labels: Option<Vec<String>>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Validation("an hb-graph needs at least one hb-edge".into()));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Validation(format!(
                    "{} labels given for {n} vertices",
                    labels.len()
                )));
            }
        }
        let mut incident = vec![Vec::new(); n];
        for (j, edge) in edges.iter().enumerate() {
            for &(v, m) in edge.members() {
                if v.0 >= n {
                    return Err(Error::VertexOutOfRange { index: v.0, n });
                }
                incident[v.0].push((j, m));
            }
        }
        Ok(HbGraph {
            n,
            edges,
            labels,
            incident,
        })
    }

    /// Graph whose universe is exactly `0..=max referenced vertex`.
    pub fn from_edges(edges: Vec<HbEdge>) -> Result<Self> {
        let n = edges
            .iter()
            .flat_map(|e| e.members().iter().map(|&(v, _)| v.0 + 1))
            .max()
            .unwrap_or(0);
        HbGraph::new(n, edges, None)
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of hb-edges.
    pub fn p(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[HbEdge] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> Result<&HbEdge> {
        self.edges.get(j).ok_or(Error::EdgeOutOfRange {
            index: j,
            p: self.edges.len(),
        })
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of `v`, or its index when the graph is unlabelled.
    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(labels) => labels[v.0].clone(),
            None => v.0.to_string(),
        }
    }

    /// Hb-edges incident to `v` as `(edge index, multiplicity)`, by edge index.
    pub fn incident_edges(&self, v: VertexId) -> Result<&[(usize, f64)]> {
        self.incident
            .get(v.0)
            .map(Vec::as_slice)
            .ok_or(Error::VertexOutOfRange { index: v.0, n: self.n })
    }

    /// `d_w(v) = Σ_j m_j(v) w(e_j)`.
    pub fn weighted_degree(&self, v: VertexId) -> Result<f64> {
        Ok(self
            .incident_edges(v)?
            .iter()
            .map(|&(j, m)| m * self.edges[j].weight())
            .sum())
    }

    pub fn weighted_degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.incident[i]
                    .iter()
                    .map(|&(j, m)| m * self.edges[j].weight())
                    .sum()
            })
            .collect()
    }

    /// Every nonzero incidence once, ordered by hb-edge then vertex.
    pub fn incidence_triples(&self) -> impl Iterator<Item = Incidence> + '_ {
        self.edges.iter().enumerate().flat_map(|(j, e)| {
            e.members().iter().map(move |&(v, m)| Incidence {
                vertex: v,
                edge: j,
                multiplicity: m,
                weight: e.weight(),
            })
        })
    }

    /// Number of nonzero incidences.
    pub fn nnz(&self) -> usize {
        self.edges.iter().map(HbEdge::support_len).sum()
    }

    pub fn isolated_vertices(&self) -> Vec<VertexId> {
        (0..self.n)
            .filter(|&i| self.incident[i].is_empty())
            .map(VertexId)
            .collect()
    }

    pub fn components(&self) -> Components {
        let mut uf = UnionFind::new(self.p());
        for list in &self.incident {
            for w in list.windows(2) {
                uf.union(w[0].0, w[1].0);
            }
        }
        let mut label = vec![usize::MAX; self.p()];
        let mut edge = Vec::with_capacity(self.p());
        let mut count = 0;
        for j in 0..self.p() {
            let root = uf.find(j);
            if label[root] == usize::MAX {
                label[root] = count;
                count += 1;
            }
            edge.push(label[root]);
        }
        let vertex = self
            .incident
            .iter()
            .map(|list| list.first().map(|&(j, _)| edge[j]))
            .collect();
        Components {
            vertex,
            edge,
            count,
        }
    }

    /// True when the incidence graph is a single component and no vertex is
    /// isolated.
    pub fn is_connected(&self) -> bool {
        self.isolated_vertices().is_empty() && self.components().count == 1
    }

    /// Errors with a description of the first obstruction to connectivity.
    pub fn ensure_connected(&self) -> Result<()> {
        let isolated = self.isolated_vertices();
        if let Some(v) = isolated.first() {
            return Err(Error::Disconnected(format!(
                "{} isolated vertices (first: {v})",
                isolated.len()
            )));
        }
        let count = self.components().count;
        if count != 1 {
            return Err(Error::Disconnected(format!("{count} components")));
        }
        Ok(())
    }

    /// Same graph with every hb-edge weight multiplied by `factor`.
    pub fn scale_weights(&self, factor: f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| e.with_weight(e.weight() * factor))
            .collect::<Result<Vec<_>>>()?;
        HbGraph::new(self.n, edges, self.labels.clone())
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
