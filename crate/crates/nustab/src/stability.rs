//! Blocking predicates and the non-uniform stability check.
//!
//! A matching is non-uniformly stable when no [`EdgeKind::Super`] edge
//! outside it weakly blocks it and no [`EdgeKind::Strong`] edge outside it
//! strongly blocks it. With all edges `Super` this is super-stability, with
//! all edges `Strong` it is strong stability. Every other module is tested
//! against the predicates defined here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{EdgeId, EdgeKind, Instance, Preference, Side, VertexId};

#[derive(Debug, Error)]
pub enum MatchingError {
    #[error("vertex {vertex} is matched by more than one edge")]
    VertexReused { vertex: String },
    #[error("edge {edge} out of range for instance with {num_edges} edges")]
    UnknownEdgeId { edge: usize, num_edges: usize },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("pair {index}: unknown vertex name {name:?}")]
    UnknownVertex { index: usize, name: String },
    #[error("pair {index}: no edge between {u:?} and {w:?}")]
    UnknownEdge { index: usize, u: String, w: String },
    #[error("edge {edge} is already in the matching")]
    EdgeInMatching { edge: EdgeId },
}

/// A matching: pairwise-disjoint edges with per-vertex partner lookup.
/// Construction validates that no vertex is used twice.
#[derive(Debug, Clone)]
pub struct Matching {
    pairs: Vec<EdgeId>,
    partner_left: Vec<Option<EdgeId>>,
    partner_right: Vec<Option<EdgeId>>,
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs
    }
}

impl Eq for Matching {}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Matching {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.pairs.cmp(&other.pairs)
    }
}

impl Matching {
    pub fn empty(inst: &Instance) -> Self {
        Matching {
            pairs: Vec::new(),
            partner_left: vec![None; inst.n1()],
            partner_right: vec![None; inst.n2()],
        }
    }

    /// Build a matching from edge ids, rejecting vertex reuse.
    pub fn from_edges(
        inst: &Instance,
        edges: impl IntoIterator<Item = EdgeId>,
    ) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(inst);
        let mut ids: Vec<EdgeId> = edges.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            if id.0 >= inst.num_edges() {
                return Err(MatchingError::UnknownEdgeId {
                    edge: id.0,
                    num_edges: inst.num_edges(),
                });
            }
            let e = inst.edge(id);
            for (slot, v) in [
                (&mut m.partner_left[e.u.index], e.u),
                (&mut m.partner_right[e.w.index], e.w),
            ] {
                if slot.is_some() {
                    return Err(MatchingError::VertexReused {
                        vertex: inst.vertex_name(v).to_owned(),
                    });
                }
                *slot = Some(id);
            }
            m.pairs.push(id);
        }
        Ok(m)
    }

    /// Sorted edge ids of the matching.
    pub fn pairs(&self) -> &[EdgeId] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.pairs.binary_search(&id).is_ok()
    }

    /// The matching edge at `v`, if any.
    pub fn partner(&self, v: VertexId) -> Option<EdgeId> {
        match v.side {
            Side::Left => self.partner_left[v.index],
            Side::Right => self.partner_right[v.index],
        }
    }

    /// Parse the matching JSON format against an instance.
    pub fn parse(inst: &Instance, text: &str) -> Result<Self, MatchingError> {
        let raw: RawMatching = serde_json::from_str(text)?;
        let mut ids = Vec::with_capacity(raw.pairs.len());
        for (index, p) in raw.pairs.iter().enumerate() {
            let u = inst
                .left_index(&p.u)
                .ok_or_else(|| MatchingError::UnknownVertex { index, name: p.u.clone() })?;
            let w = inst
                .right_index(&p.w)
                .ok_or_else(|| MatchingError::UnknownVertex { index, name: p.w.clone() })?;
            let id = inst.find_edge(u, w).ok_or_else(|| MatchingError::UnknownEdge {
                index,
                u: p.u.clone(),
                w: p.w.clone(),
            })?;
            ids.push(id);
        }
        Self::from_edges(inst, ids)
    }

    /// Serialize to the matching JSON format, pairs in edge-id order.
    pub fn to_json(&self, inst: &Instance) -> String {
        serde_json::to_string(&self.to_raw(inst)).expect("matching serialization cannot fail")
    }

    pub(crate) fn to_raw(&self, inst: &Instance) -> RawMatching {
        RawMatching {
            pairs: self
                .pairs
                .iter()
                .map(|&id| {
                    let e = inst.edge(id);
                    RawPair {
                        u: inst.vertex_name(e.u).to_owned(),
                        w: inst.vertex_name(e.w).to_owned(),
                    }
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RawMatching {
    pub(crate) pairs: Vec<RawPair>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RawPair {
    pub(crate) u: String,
    pub(crate) w: String,
}

/// Which blocking condition a [`BlockReport`] certifies a violation of:
/// `Weak` for a `Super` edge that weakly blocks, `Strong` for a `Strong`
/// edge that strongly blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMode {
    Weak,
    Strong,
}

impl BlockMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockMode::Weak => "weak",
            BlockMode::Strong => "strong",
        }
    }
}

/// Witness that a matching is not non-uniformly stable: a blocking edge plus
/// the comparison outcome of that edge against the current partner at each
/// endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockReport {
    pub edge: EdgeId,
    pub mode: BlockMode,
    pub at_left: Preference,
    pub at_right: Preference,
}

/// True iff `e` is weakly preferred to the current partner at both endpoints.
pub fn weakly_blocks(inst: &Instance, mu: &Matching, e: EdgeId) -> Result<bool, MatchingError> {
    ensure_outside(mu, e)?;
    Ok(weakly_blocks_unchecked(inst, mu, e))
}

/// True iff `e` weakly blocks and is strictly preferred at some endpoint.
pub fn strongly_blocks(inst: &Instance, mu: &Matching, e: EdgeId) -> Result<bool, MatchingError> {
    ensure_outside(mu, e)?;
    Ok(strongly_blocks_unchecked(inst, mu, e))
}

fn ensure_outside(mu: &Matching, e: EdgeId) -> Result<(), MatchingError> {
    if mu.contains(e) {
        return Err(MatchingError::EdgeInMatching { edge: e });
    }
    Ok(())
}

pub(crate) fn weakly_blocks_unchecked(inst: &Instance, mu: &Matching, e: EdgeId) -> bool {
    let edge = inst.edge(e);
    inst.weakly_prefers(edge.u, Some(e), mu.partner(edge.u))
        && inst.weakly_prefers(edge.w, Some(e), mu.partner(edge.w))
}

pub(crate) fn strongly_blocks_unchecked(inst: &Instance, mu: &Matching, e: EdgeId) -> bool {
    let edge = inst.edge(e);
    weakly_blocks_unchecked(inst, mu, e)
        && (inst.strictly_prefers(edge.u, Some(e), mu.partner(edge.u))
            || inst.strictly_prefers(edge.w, Some(e), mu.partner(edge.w)))
}

/// True iff `e` violates the condition attached to its kind: weak blocking
/// for `Super` edges, strong blocking for `Strong` edges.
pub(crate) fn blocks_unchecked(inst: &Instance, mu: &Matching, e: EdgeId) -> bool {
    match inst.edge(e).kind {
        EdgeKind::Super => weakly_blocks_unchecked(inst, mu, e),
        EdgeKind::Strong => strongly_blocks_unchecked(inst, mu, e),
    }
}

fn report_for(inst: &Instance, mu: &Matching, e: EdgeId) -> BlockReport {
    let edge = inst.edge(e);
    BlockReport {
        edge: e,
        mode: match edge.kind {
            EdgeKind::Super => BlockMode::Weak,
            EdgeKind::Strong => BlockMode::Strong,
        },
        at_left: inst.cmp_at(edge.u, Some(e), mu.partner(edge.u)),
        at_right: inst.cmp_at(edge.w, Some(e), mu.partner(edge.w)),
    }
}

/// Check non-uniform stability. Returns `None` when stable, otherwise the
/// lowest-edge-id violation so a failing check names its witness.
pub fn is_non_uniformly_stable(inst: &Instance, mu: &Matching) -> Option<BlockReport> {
    (0..inst.num_edges())
        .map(EdgeId)
        .filter(|&e| !mu.contains(e))
        .find(|&e| blocks_unchecked(inst, mu, e))
        .map(|e| report_for(inst, mu, e))
}

/// Every blocking edge of `mu`, in edge-id order.
pub fn all_blockers(inst: &Instance, mu: &Matching) -> Vec<BlockReport> {
    (0..inst.num_edges())
        .map(EdgeId)
        .filter(|&e| !mu.contains(e) && blocks_unchecked(inst, mu, e))
        .map(|e| report_for(inst, mu, e))
        .collect()
}

/// The blocking edges whose right endpoint is matched in `mu`. This is the
/// set the solver consults when deciding which matched partner to discard.
pub fn block_set(inst: &Instance, mu: &Matching) -> Vec<EdgeId> {
    (0..inst.num_edges())
        .map(EdgeId)
        .filter(|&e| {
            !mu.contains(e)
                && mu.partner(inst.edge(e).w).is_some()
                && blocks_unchecked(inst, mu, e)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, EdgeSpec};

    fn single_super() -> Instance {
        Instance::new(1, 1, [EdgeSpec::new(0, 0, EdgeKind::Super, 1, 1)]).unwrap()
    }

    fn complete_2x2(kind: EdgeKind) -> Instance {
        let specs = (0..2)
            .flat_map(|u| (0..2).map(move |w| EdgeSpec::new(u, w, kind, 1, 1)))
            .collect::<Vec<_>>();
        Instance::new(2, 2, specs).unwrap()
    }

    fn perfect(inst: &Instance) -> Matching {
        // Edges (0,0) and (1,1): ids 0 and 3 in the 2x2 complete graph.
        Matching::from_edges(inst, [EdgeId(0), EdgeId(3)]).unwrap()
    }

    #[test]
    fn matching_rejects_vertex_reuse() {
        let inst = complete_2x2(EdgeKind::Super);
        // Edges 0 and 1 share the left vertex.
        let err = Matching::from_edges(&inst, [EdgeId(0), EdgeId(1)]).unwrap_err();
        assert!(matches!(err, MatchingError::VertexReused { .. }));
    }

    #[test]
    fn every_edge_weakly_and_strongly_blocks_empty_matching() {
        let inst = complete_2x2(EdgeKind::Super);
        let mu = Matching::empty(&inst);
        for e in 0..4 {
            assert!(weakly_blocks(&inst, &mu, EdgeId(e)).unwrap());
            assert!(strongly_blocks(&inst, &mu, EdgeId(e)).unwrap());
        }
    }

    #[test]
    fn cross_edge_of_all_ties_weakly_but_not_strongly_blocks() {
        let inst = complete_2x2(EdgeKind::Strong);
        let mu = perfect(&inst);
        for cross in [EdgeId(1), EdgeId(2)] {
            assert!(weakly_blocks(&inst, &mu, cross).unwrap());
            assert!(!strongly_blocks(&inst, &mu, cross).unwrap());
        }
    }

    #[test]
    fn strictly_preferred_partner_stops_weak_blocking() {
        // Left vertex ranks its matched edge above the candidate.
        let inst = Instance::new(
            1,
            2,
            [
                EdgeSpec::new(0, 0, EdgeKind::Super, 1, 1),
                EdgeSpec::new(0, 1, EdgeKind::Super, 2, 1),
            ],
        )
        .unwrap();
        let mu = Matching::from_edges(&inst, [EdgeId(0)]).unwrap();
        assert!(!weakly_blocks(&inst, &mu, EdgeId(1)).unwrap());
    }

    #[test]
    fn blocking_check_rejects_matching_edges() {
        let inst = single_super();
        let mu = Matching::from_edges(&inst, [EdgeId(0)]).unwrap();
        assert!(matches!(
            weakly_blocks(&inst, &mu, EdgeId(0)),
            Err(MatchingError::EdgeInMatching { .. })
        ));
    }

    #[test]
    fn strong_blocking_implies_weak_blocking() {
        for seed in 0..30 {
            let inst = generate_random(seed, 3, 3, 0.7, 0.4, 0.5);
            let mu = Matching::empty(&inst);
            for e in 0..inst.num_edges() {
                let e = EdgeId(e);
                if strongly_blocks_unchecked(&inst, &mu, e) {
                    assert!(weakly_blocks_unchecked(&inst, &mu, e));
                }
            }
        }
    }

    #[test]
    fn single_edge_matching_is_stable_and_empty_is_not() {
        let inst = single_super();
        let full = Matching::from_edges(&inst, [EdgeId(0)]).unwrap();
        assert!(is_non_uniformly_stable(&inst, &full).is_none());

        let report = is_non_uniformly_stable(&inst, &Matching::empty(&inst)).unwrap();
        assert_eq!(report.edge, EdgeId(0));
        assert_eq!(report.mode, BlockMode::Weak);
    }

    #[test]
    fn all_ties_strong_perfect_matchings_are_stable() {
        let inst = complete_2x2(EdgeKind::Strong);
        for pair in [[EdgeId(0), EdgeId(3)], [EdgeId(1), EdgeId(2)]] {
            let mu = Matching::from_edges(&inst, pair).unwrap();
            assert!(is_non_uniformly_stable(&inst, &mu).is_none());
        }
    }

    #[test]
    fn block_set_examples() {
        let super_inst = complete_2x2(EdgeKind::Super);
        assert!(block_set(&super_inst, &Matching::empty(&super_inst)).is_empty());
        assert_eq!(
            block_set(&super_inst, &perfect(&super_inst)),
            vec![EdgeId(1), EdgeId(2)]
        );

        let strong_inst = complete_2x2(EdgeKind::Strong);
        assert!(block_set(&strong_inst, &perfect(&strong_inst)).is_empty());
    }

    #[test]
    fn matching_json_roundtrip() {
        let inst = complete_2x2(EdgeKind::Super);
        let mu = perfect(&inst);
        let text = mu.to_json(&inst);
        let back = Matching::parse(&inst, &text).unwrap();
        assert_eq!(mu, back);
    }

    #[test]
    fn matching_parse_rejects_unknown_edge() {
        let inst = Instance::new(2, 2, [EdgeSpec::new(0, 0, EdgeKind::Super, 1, 1)]).unwrap();
        let err = Matching::parse(&inst, r#"{"pairs":[{"u":"m2","w":"w2"}]}"#).unwrap_err();
        assert!(matches!(err, MatchingError::UnknownEdge { .. }));
    }
}
