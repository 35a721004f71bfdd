//! Weighted networks with an interior/boundary vertex partition.
//!
//! A [`Network`] is the closure `S ∪ ∂S` of an interior vertex set `S`
//! together with symmetric positive edge weights. Weights are stored once per
//! unordered pair, so symmetry holds by construction; adjacency lists are
//! derived from that single edge table.
//!
//! Networks are usually read from a JSON graph document:
//!
//! ```json
//! {"vertices":[{"name":"x","role":"interior"},
//!              {"name":"z1","role":"boundary","mu":1.0,"sigma":0.0}],
//!  "edges":[{"a":"x","b":"z1","w":1.0}]}
//! ```
//!
//! The boundary coefficients `mu`/`sigma` live in the same document and are
//! turned into a [`BoundaryCondition`](crate::boundary::BoundaryCondition) by
//! [`GraphDocument::boundary_condition`].

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryCondition;
use crate::error::{Error, Invariant, Result};

/// Dense vertex index, `0..n` in document order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Interior,
    Boundary,
}

/// An undirected edge `{a, b}` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub weight: f64,
}

/// A finite connected weighted graph `S̄ = S ∪ ∂S`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    roles: Vec<Role>,
    index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    weights: BTreeMap<(usize, usize), f64>,
    adjacency: Vec<Vec<(VertexId, f64)>>,
    interior: Vec<VertexId>,
    boundary: Vec<VertexId>,
}

/// Per-vertex weighted degrees and their maximum over the interior.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTable {
    pub degrees: Vec<f64>,
    /// `max_{x ∈ S} d_ω x`
    pub omega0: f64,
}

impl Network {
    /// Builds and validates a network from named vertices and weighted edges.
    ///
    /// Each unordered pair may be listed at most once per orientation; when
    /// both orientations are present their weights must agree exactly.
    pub fn new<N, E>(vertices: N, edges: E) -> Result<Network>
    where
        N: IntoIterator<Item = (String, Role)>,
        E: IntoIterator<Item = (String, String, f64)>,
    {
        let mut names = Vec::new();
        let mut roles = Vec::new();
        let mut index = HashMap::new();
        for (name, role) in vertices {
            let id = VertexId(names.len());
            if index.insert(name.clone(), id).is_some() {
                return Err(Error::validation(
                    Invariant::DuplicateVertex,
                    format!("vertex '{name}' listed twice"),
                ));
            }
            names.push(name);
            roles.push(role);
        }

        // (min, max) -> (weight, orientations seen)
        let mut pairs: BTreeMap<(usize, usize), (f64, [bool; 2])> = BTreeMap::new();
        for (a, b, w) in edges {
            let ia = *index
                .get(&a)
                .ok_or_else(|| Error::Schema(format!("edge references unknown vertex '{a}'")))?;
            let ib = *index
                .get(&b)
                .ok_or_else(|| Error::Schema(format!("edge references unknown vertex '{b}'")))?;
            if ia == ib {
                return Err(Error::validation(
                    Invariant::Loop,
                    format!("loop at vertex '{a}'"),
                ));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::validation(
                    Invariant::Weight,
                    format!("edge {a}-{b} has weight {w}; weights must be finite and positive"),
                ));
            }
            let (lo, hi, dir) = if ia.0 < ib.0 {
                (ia.0, ib.0, 0)
            } else {
                (ib.0, ia.0, 1)
            };
            match pairs.get_mut(&(lo, hi)) {
                None => {
                    let mut seen = [false; 2];
                    seen[dir] = true;
                    pairs.insert((lo, hi), (w, seen));
                }
                Some((stored, seen)) => {
                    if seen[dir] {
                        return Err(Error::validation(
                            Invariant::Simple,
                            format!("edge {a}-{b} listed twice"),
                        ));
                    }
                    if *stored != w {
                        return Err(Error::validation(
                            Invariant::Symmetry,
                            format!("w({a},{b}) = {w} but w({b},{a}) = {stored}"),
                        ));
                    }
                    seen[dir] = true;
                }
            }
        }

        let weights: BTreeMap<(usize, usize), f64> =
            pairs.into_iter().map(|(k, (w, _))| (k, w)).collect();
        Self::assemble(names, roles, index, weights)
    }

    fn assemble(
        names: Vec<String>,
        roles: Vec<Role>,
        index: HashMap<String, VertexId>,
        weights: BTreeMap<(usize, usize), f64>,
    ) -> Result<Network> {
        let n = names.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(weights.len());
        for (&(a, b), &w) in &weights {
            adjacency[a].push((VertexId(b), w));
            adjacency[b].push((VertexId(a), w));
            edges.push(Edge {
                a: VertexId(a),
                b: VertexId(b),
                weight: w,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|(v, _)| *v);
        }
        let interior: Vec<VertexId> = (0..n)
            .filter(|&i| roles[i] == Role::Interior)
            .map(VertexId)
            .collect();
        let boundary: Vec<VertexId> = (0..n)
            .filter(|&i| roles[i] == Role::Boundary)
            .map(VertexId)
            .collect();

        let net = Network {
            names,
            roles,
            index,
            edges,
            weights,
            adjacency,
            interior,
            boundary,
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        if self.interior.is_empty() {
            return Err(Error::validation(
                Invariant::EmptyInterior,
                "the interior set S is empty",
            ));
        }
        if self.boundary.is_empty() {
            return Err(Error::validation(
                Invariant::EmptyBoundary,
                "the boundary set is empty; every problem needs a boundary condition",
            ));
        }
        for &z in &self.boundary {
            if !self.adjacency[z.0]
                .iter()
                .any(|(y, _)| self.roles[y.0] == Role::Interior)
            {
                return Err(Error::validation(
                    Invariant::BoundaryNeighbor,
                    format!("boundary vertex '{}' has no interior neighbour", self.names[z.0]),
                ));
            }
        }
        // BFS over the whole closure.
        let n = self.names.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(y, _) in &self.adjacency[v] {
                if !seen[y.0] {
                    seen[y.0] = true;
                    count += 1;
                    queue.push_back(y.0);
                }
            }
        }
        if count != n {
            let missing = seen.iter().position(|s| !s).unwrap_or(0);
            return Err(Error::validation(
                Invariant::Connected,
                format!(
                    "graph is disconnected: '{}' is unreachable from '{}'",
                    self.names[missing], self.names[0]
                ),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> {
        (0..self.names.len()).map(VertexId)
    }

    /// Interior vertices `S`, in ascending id order.
    pub fn interior(&self) -> &[VertexId] {
        &self.interior
    }

    /// Boundary vertices `∂S`, in ascending id order.
    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn role(&self, x: VertexId) -> Role {
        self.roles[x.0]
    }

    pub fn is_interior(&self, x: VertexId) -> bool {
        self.roles[x.0] == Role::Interior
    }

    pub fn is_boundary(&self, x: VertexId) -> bool {
        self.roles[x.0] == Role::Boundary
    }

    pub fn name(&self, x: VertexId) -> &str {
        &self.names[x.0]
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, x: VertexId) -> bool {
        x.0 < self.names.len()
    }

    pub(crate) fn check(&self, x: VertexId) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    /// Neighbours of `x` with their edge weights, sorted by id.
    pub fn neighbors(&self, x: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[x.0]
    }

    /// `ω(x, y)`; zero for non-adjacent pairs and for `x == y`.
    pub fn weight(&self, x: VertexId, y: VertexId) -> f64 {
        let key = if x.0 < y.0 { (x.0, y.0) } else { (y.0, x.0) };
        self.weights.get(&key).copied().unwrap_or(0.0)
    }

    /// Weighted degree `d_ω x = Σ_{y ∈ S̄} ω(x, y)`.
    pub fn degree(&self, x: VertexId) -> Result<f64> {
        self.check(x)?;
        Ok(self.adjacency[x.0].iter().map(|(_, w)| w).sum())
    }

    pub fn degrees(&self) -> DegreeTable {
        let degrees: Vec<f64> = self
            .adjacency
            .iter()
            .map(|list| list.iter().map(|(_, w)| w).sum())
            .collect();
        let omega0 = self
            .interior
            .iter()
            .map(|x| degrees[x.0])
            .fold(0.0, f64::max);
        DegreeTable { degrees, omega0 }
    }

    /// Largest weighted degree over the whole closure `S̄`.
    pub fn max_degree(&self) -> f64 {
        self.degrees().degrees.into_iter().fold(0.0, f64::max)
    }

    /// Edges with both endpoints on the boundary.
    ///
    /// The normal derivative only sees interior neighbours, so these edges
    /// break the exact Neumann mass balance; callers that rely on it check
    /// this list first.
    pub fn boundary_boundary_edges(&self) -> Vec<Edge> {
        self.edges
            .iter()
            .filter(|e| self.is_boundary(e.a) && self.is_boundary(e.b))
            .copied()
            .collect()
    }

    /// Serializes the graph together with its boundary coefficients.
    pub fn to_document(&self, bc: &BoundaryCondition) -> GraphDocument {
        let vertices = self
            .vertices()
            .map(|x| {
                let (mu, sigma) = if self.is_boundary(x) {
                    (Some(bc.mu(x)), Some(bc.sigma(x)))
                } else {
                    (None, None)
                };
                VertexEntry {
                    name: self.names[x.0].clone(),
                    role: self.roles[x.0],
                    mu,
                    sigma,
                }
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeEntry {
                a: self.names[e.a.0].clone(),
                b: self.names[e.b.0].clone(),
                w: e.weight,
            })
            .collect();
        GraphDocument { vertices, edges }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub name: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub a: String,
    pub b: String,
    pub w: f64,
}

/// The on-disk graph schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<GraphDocument> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        for v in &doc.vertices {
            match v.role {
                Role::Interior => {
                    if v.mu.is_some() || v.sigma.is_some() {
                        return Err(Error::Schema(format!(
                            "interior vertex '{}' must not carry mu/sigma",
                            v.name
                        )));
                    }
                }
                Role::Boundary => {
                    if v.mu.is_none() || v.sigma.is_none() {
                        return Err(Error::Schema(format!(
                            "boundary vertex '{}' requires both mu and sigma",
                            v.name
                        )));
                    }
                }
            }
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph document serializes")
    }

    pub fn network(&self) -> Result<Network> {
        Network::new(
            self.vertices.iter().map(|v| (v.name.clone(), v.role)),
            self.edges.iter().map(|e| (e.a.clone(), e.b.clone(), e.w)),
        )
    }

    /// Boundary coefficients for `net`, which must have been built from this
    /// document.
    pub fn boundary_condition(&self, net: &Network) -> Result<BoundaryCondition> {
        let entries = self.vertices.iter().filter_map(|v| {
            let id = net.id(&v.name)?;
            match (v.mu, v.sigma) {
                (Some(mu), Some(sigma)) => Some((id, mu, sigma)),
                _ => None,
            }
        });
        BoundaryCondition::new(net, entries)
    }
}

/// Parses and validates a graph document.
pub fn load_network(text: &str) -> Result<Network> {
    GraphDocument::from_json(text)?.network()
}

/// Parses a graph document into the network and its boundary condition.
pub fn load_problem(text: &str) -> Result<(Network, BoundaryCondition)> {
    let doc = GraphDocument::from_json(text)?;
    let net = doc.network()?;
    let bc = doc.boundary_condition(&net)?;
    Ok((net, bc))
}
