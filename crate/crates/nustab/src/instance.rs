//! Problem data model: a bipartite graph whose edges carry tied preference
//! ranks at both endpoints and a per-edge stability kind.
//!
//! Preferences are stored as integer ranks (smaller = more preferred, equal =
//! indifferent), which makes every per-vertex relation transitive and complete
//! by construction. The absent partner is strictly worse than any incident
//! edge. Each edge is tagged [`EdgeKind::Super`] or [`EdgeKind::Strong`],
//! selecting which blocking notion it is excluded from.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which side of the bipartition a vertex lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// A vertex, identified by side and index within that side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub side: Side,
    pub index: usize,
}

impl VertexId {
    pub fn left(index: usize) -> Self {
        VertexId { side: Side::Left, index }
    }

    pub fn right(index: usize) -> Self {
        VertexId { side: Side::Right, index }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Left => write!(f, "L{}", self.index),
            Side::Right => write!(f, "R{}", self.index),
        }
    }
}

/// Index of an edge in instance order. Edge ids double as the global
/// deterministic tie-break key wherever an arbitrary edge must be picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Stability kind of an edge: a `Super` edge must not weakly block, a
/// `Strong` edge must not strongly block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Super,
    Strong,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Super => "super",
            EdgeKind::Strong => "strong",
        }
    }
}

/// An edge between a left vertex `u` and a right vertex `w`, with the rank it
/// occupies in each endpoint's preference order (1 = best; equal ranks tie).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub w: VertexId,
    pub kind: EdgeKind,
    pub rank_u: u32,
    pub rank_w: u32,
}

impl Edge {
    /// Rank of this edge at `v`, or `None` if `v` is not an endpoint.
    pub fn rank_at(&self, v: VertexId) -> Option<u32> {
        if v == self.u {
            Some(self.rank_u)
        } else if v == self.w {
            Some(self.rank_w)
        } else {
            None
        }
    }

    /// The endpoint on the other side from `v`, or `None` if `v` is not an
    /// endpoint.
    pub fn other(&self, v: VertexId) -> Option<VertexId> {
        if v == self.u {
            Some(self.w)
        } else if v == self.w {
            Some(self.u)
        } else {
            None
        }
    }

    pub fn endpoint(&self, side: Side) -> VertexId {
        match side {
            Side::Left => self.u,
            Side::Right => self.w,
        }
    }
}

/// Outcome of comparing two candidate partners at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    StrictlyBetter,
    Tied,
    StrictlyWorse,
}

impl Preference {
    pub fn as_str(self) -> &'static str {
        match self {
            Preference::StrictlyBetter => "strictly_better",
            Preference::Tied => "tied",
            Preference::StrictlyWorse => "strictly_worse",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Preference::StrictlyBetter => Preference::StrictlyWorse,
            Preference::Tied => Preference::Tied,
            Preference::StrictlyWorse => Preference::StrictlyBetter,
        }
    }
}

/// Edge description used to build an [`Instance`] programmatically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSpec {
    pub u: usize,
    pub w: usize,
    pub kind: EdgeKind,
    pub rank_u: u32,
    pub rank_w: u32,
}

impl EdgeSpec {
    pub fn new(u: usize, w: usize, kind: EdgeKind, rank_u: u32, rank_w: u32) -> Self {
        EdgeSpec { u, w, kind, rank_u, rank_w }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate vertex name {name:?} on the {side} side")]
    DuplicateName { side: Side, name: String },
    #[error("edge {index}: unknown vertex name {name:?}")]
    UnknownVertex { index: usize, name: String },
    #[error("edge {index}: unknown kind {kind:?} (expected \"super\" or \"strong\")")]
    UnknownKind { index: usize, kind: String },
    #[error("edge {index}: rank must be at least 1")]
    RankOutOfRange { index: usize },
    #[error("duplicate edge ({u}, {w})")]
    DuplicateEdge { u: String, w: String },
    #[error("edge {index}: endpoint out of bounds ({u}, {w}) for sizes {n1}x{n2}")]
    EndpointOutOfBounds { index: usize, u: usize, w: usize, n1: usize, n2: usize },
    #[error("edge {edge} is not incident to vertex {vertex}")]
    NotIncident { edge: EdgeId, vertex: VertexId },
}

/// An immutable problem instance: the bipartite graph, tied preference ranks
/// and per-edge stability kinds. Safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    names_left: Vec<String>,
    names_right: Vec<String>,
    edges: Vec<Edge>,
    adj_left: Vec<Vec<EdgeId>>,
    adj_right: Vec<Vec<EdgeId>>,
}

impl Instance {
    /// Build an instance with default vertex names (`m1..`/`w1..`). Edge ids
    /// are assigned in input order.
    pub fn new(
        n1: usize,
        n2: usize,
        specs: impl IntoIterator<Item = EdgeSpec>,
    ) -> Result<Self, InstanceError> {
        let names_left = (1..=n1).map(|i| format!("m{i}")).collect();
        let names_right = (1..=n2).map(|i| format!("w{i}")).collect();
        Self::with_names(names_left, names_right, specs)
    }

    /// Build an instance with explicit vertex names.
    pub fn with_names(
        names_left: Vec<String>,
        names_right: Vec<String>,
        specs: impl IntoIterator<Item = EdgeSpec>,
    ) -> Result<Self, InstanceError> {
        for (names, side) in [(&names_left, Side::Left), (&names_right, Side::Right)] {
            for (i, name) in names.iter().enumerate() {
                if names[..i].contains(name) {
                    return Err(InstanceError::DuplicateName { side, name: name.clone() });
                }
            }
        }
        let n1 = names_left.len();
        let n2 = names_right.len();
        let mut edges = Vec::new();
        let mut adj_left = vec![Vec::new(); n1];
        let mut adj_right = vec![Vec::new(); n2];
        let mut seen = std::collections::BTreeSet::new();
        for (index, spec) in specs.into_iter().enumerate() {
            if spec.u >= n1 || spec.w >= n2 {
                return Err(InstanceError::EndpointOutOfBounds {
                    index,
                    u: spec.u,
                    w: spec.w,
                    n1,
                    n2,
                });
            }
            if spec.rank_u < 1 || spec.rank_w < 1 {
                return Err(InstanceError::RankOutOfRange { index });
            }
            if !seen.insert((spec.u, spec.w)) {
                return Err(InstanceError::DuplicateEdge {
                    u: names_left[spec.u].clone(),
                    w: names_right[spec.w].clone(),
                });
            }
            let id = EdgeId(index);
            adj_left[spec.u].push(id);
            adj_right[spec.w].push(id);
            edges.push(Edge {
                id,
                u: VertexId::left(spec.u),
                w: VertexId::right(spec.w),
                kind: spec.kind,
                rank_u: spec.rank_u,
                rank_w: spec.rank_w,
            });
        }
        Ok(Instance { names_left, names_right, edges, adj_left, adj_right })
    }

    pub fn n1(&self) -> usize {
        self.names_left.len()
    }

    pub fn n2(&self) -> usize {
        self.names_right.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    /// Edge ids incident to `v`, in edge-id order.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        match v.side {
            Side::Left => &self.adj_left[v.index],
            Side::Right => &self.adj_right[v.index],
        }
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        match v.side {
            Side::Left => &self.names_left[v.index],
            Side::Right => &self.names_right[v.index],
        }
    }

    pub fn left_vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n1()).map(VertexId::left)
    }

    pub fn right_vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n2()).map(VertexId::right)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.left_vertices().chain(self.right_vertices())
    }

    /// The edge between left index `u` and right index `w`, if present.
    pub fn find_edge(&self, u: usize, w: usize) -> Option<EdgeId> {
        self.adj_left
            .get(u)?
            .iter()
            .copied()
            .find(|&id| self.edge(id).w.index == w)
    }

    pub fn left_index(&self, name: &str) -> Option<usize> {
        self.names_left.iter().position(|n| n == name)
    }

    pub fn right_index(&self, name: &str) -> Option<usize> {
        self.names_right.iter().position(|n| n == name)
    }

    /// True if every edge has the given kind (vacuously true without edges).
    pub fn all_edges_are(&self, kind: EdgeKind) -> bool {
        self.edges.iter().all(|e| e.kind == kind)
    }

    /// A copy of this instance with every edge kind replaced by `kind`.
    pub fn with_uniform_kind(&self, kind: EdgeKind) -> Instance {
        let mut copy = self.clone();
        for e in &mut copy.edges {
            e.kind = kind;
        }
        copy
    }

    /// Compare candidates `a` and `b` at vertex `v` (`None` = staying
    /// unmatched). Any edge beats `None`; `None` ties only with `None`.
    pub fn prefers(
        &self,
        v: VertexId,
        a: Option<EdgeId>,
        b: Option<EdgeId>,
    ) -> Result<Preference, InstanceError> {
        for cand in [a, b].into_iter().flatten() {
            if self.edge(cand).rank_at(v).is_none() {
                return Err(InstanceError::NotIncident { edge: cand, vertex: v });
            }
        }
        Ok(self.cmp_at(v, a, b))
    }

    /// Same comparison as [`Instance::prefers`], for callers that already
    /// know both candidates are incident to `v`.
    pub(crate) fn cmp_at(&self, v: VertexId, a: Option<EdgeId>, b: Option<EdgeId>) -> Preference {
        let rank = |cand: Option<EdgeId>| {
            cand.map(|id| {
                self.edge(id)
                    .rank_at(v)
                    .unwrap_or_else(|| panic!("{id} not incident to {v}"))
            })
        };
        match (rank(a), rank(b)) {
            (None, None) => Preference::Tied,
            (Some(_), None) => Preference::StrictlyBetter,
            (None, Some(_)) => Preference::StrictlyWorse,
            (Some(ra), Some(rb)) => match ra.cmp(&rb) {
                std::cmp::Ordering::Less => Preference::StrictlyBetter,
                std::cmp::Ordering::Equal => Preference::Tied,
                std::cmp::Ordering::Greater => Preference::StrictlyWorse,
            },
        }
    }

    /// True iff `a` is weakly preferred to `b` at `v` (ties count).
    pub(crate) fn weakly_prefers(&self, v: VertexId, a: Option<EdgeId>, b: Option<EdgeId>) -> bool {
        self.cmp_at(v, a, b) != Preference::StrictlyWorse
    }

    /// True iff `a` is strictly preferred to `b` at `v`.
    pub(crate) fn strictly_prefers(
        &self,
        v: VertexId,
        a: Option<EdgeId>,
        b: Option<EdgeId>,
    ) -> bool {
        self.cmp_at(v, a, b) == Preference::StrictlyBetter
    }

    /// Parse the JSON instance format.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance = serde_json::from_str(text)?;
        let mut specs = Vec::with_capacity(raw.edges.len());
        // Resolve names and kinds before delegating the structural checks.
        let left_idx = |index: usize, name: &str| {
            raw.v1
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| InstanceError::UnknownVertex { index, name: name.to_owned() })
        };
        let right_idx = |index: usize, name: &str| {
            raw.v2
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| InstanceError::UnknownVertex { index, name: name.to_owned() })
        };
        for (index, e) in raw.edges.iter().enumerate() {
            let kind = match e.kind.as_str() {
                "super" => EdgeKind::Super,
                "strong" => EdgeKind::Strong,
                other => {
                    return Err(InstanceError::UnknownKind { index, kind: other.to_owned() })
                }
            };
            specs.push(EdgeSpec {
                u: left_idx(index, &e.u)?,
                w: right_idx(index, &e.w)?,
                kind,
                rank_u: e.rank_u,
                rank_w: e.rank_w,
            });
        }
        Self::with_names(raw.v1, raw.v2, specs)
    }

    /// Serialize to the JSON instance format. Key order and edge order are
    /// fixed, so equal instances serialize byte-identically.
    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            v1: self.names_left.clone(),
            v2: self.names_right.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    u: self.vertex_name(e.u).to_owned(),
                    w: self.vertex_name(e.w).to_owned(),
                    kind: e.kind.as_str().to_owned(),
                    rank_u: e.rank_u,
                    rank_w: e.rank_w,
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("instance serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    v1: Vec<String>,
    v2: Vec<String>,
    edges: Vec<RawEdge>,
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    u: String,
    w: String,
    kind: String,
    rank_u: u32,
    rank_w: u32,
}

/// Generate a random instance, deterministically in `seed`.
///
/// Each of the `n1 * n2` potential edges is kept with probability
/// `edge_prob` and made [`EdgeKind::Strong`] with probability `strong_prob`.
/// Per-vertex ranks come from a random weak order: incident edges are
/// shuffled and walked in order, merging each edge into the previous rank
/// level with probability `tie_prob`.
pub fn generate_random(
    seed: u64,
    n1: usize,
    n2: usize,
    edge_prob: f64,
    tie_prob: f64,
    strong_prob: f64,
) -> Instance {
    for p in [edge_prob, tie_prob, strong_prob] {
        assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::new();
    for u in 0..n1 {
        for w in 0..n2 {
            if rng.gen_bool(edge_prob) {
                let kind = if rng.gen_bool(strong_prob) { EdgeKind::Strong } else { EdgeKind::Super };
                // Ranks are filled in below.
                specs.push(EdgeSpec { u, w, kind, rank_u: 0, rank_w: 0 });
            }
        }
    }
    let mut assign_side = |side: Side, count: usize, rng: &mut ChaCha8Rng| {
        for v in 0..count {
            let mut mine: Vec<usize> = (0..specs.len())
                .filter(|&i| match side {
                    Side::Left => specs[i].u == v,
                    Side::Right => specs[i].w == v,
                })
                .collect();
            mine.shuffle(rng);
            let mut rank = 1u32;
            for (pos, &i) in mine.iter().enumerate() {
                if pos > 0 && !rng.gen_bool(tie_prob) {
                    rank += 1;
                }
                match side {
                    Side::Left => specs[i].rank_u = rank,
                    Side::Right => specs[i].rank_w = rank,
                }
            }
        }
    };
    assign_side(Side::Left, n1, &mut rng);
    assign_side(Side::Right, n2, &mut rng);
    Instance::new(n1, n2, specs).expect("generated specs are structurally valid")
}
