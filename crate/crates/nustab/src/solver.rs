//! Polynomial-time decision procedure for non-uniform stability.
//!
//! The solver repeatedly narrows the edge set: each inner iteration applies
//! the two-stage choice function to the surviving edges, deletes edges the
//! right side's filter rejects, and otherwise checks whether the chosen
//! edges admit a matching saturating every left vertex that still has an
//! edge — if not, all chosen edges at the deficient left vertices are
//! deleted. When the inner loop reaches a fixpoint, one blocking edge among
//! the deleted ones may force a matched partner out as well; the outer loop
//! ends after a round with no such eviction. A final scan for an uncovered
//! right endpoint decides between a stable matching and a certified `No`.
//!
//! Every intermediate set is recorded in a [`ChoiceTrace`] so tests can
//! audit the run's invariants.

use std::collections::BTreeSet;

use serde_json::json;

use crate::instance::{EdgeId, EdgeKind, Instance, Side, VertexId};
use crate::stability::{block_set, Matching};

/// Edge sets are ordered so every iteration order below is deterministic.
pub type EdgeSet = BTreeSet<EdgeId>;

/// The most preferred edges of `f` at a left vertex (all of them, when tied).
pub fn choice_left(inst: &Instance, v: VertexId, f: &EdgeSet) -> EdgeSet {
    debug_assert_eq!(v.side, Side::Left);
    best_tied(inst, v, f)
}

/// The choice of a right vertex: start from its most preferred edges `B` of
/// `f`; keep all of `B` if none is a super edge, keep the single super edge
/// if there is exactly one, and keep nothing if two or more super edges tie.
pub fn choice_right(inst: &Instance, v: VertexId, f: &EdgeSet) -> EdgeSet {
    debug_assert_eq!(v.side, Side::Right);
    let best = best_tied(inst, v, f);
    let supers: EdgeSet = best
        .iter()
        .copied()
        .filter(|&id| inst.edge(id).kind == EdgeKind::Super)
        .collect();
    match supers.len() {
        0 => best,
        1 => supers,
        _ => EdgeSet::new(),
    }
}

fn best_tied(inst: &Instance, v: VertexId, f: &EdgeSet) -> EdgeSet {
    let incident: Vec<EdgeId> =
        inst.incident(v).iter().copied().filter(|id| f.contains(id)).collect();
    let best_rank = incident
        .iter()
        .filter_map(|&id| inst.edge(id).rank_at(v))
        .min();
    match best_rank {
        None => EdgeSet::new(),
        Some(r) => incident
            .into_iter()
            .filter(|&id| inst.edge(id).rank_at(v) == Some(r))
            .collect(),
    }
}

/// Union of the left choices over all left vertices.
pub fn choice_left_union(inst: &Instance, f: &EdgeSet) -> EdgeSet {
    inst.left_vertices()
        .flat_map(|v| choice_left(inst, v, f))
        .collect()
}

/// Union of the right choices over all right vertices.
pub fn choice_right_union(inst: &Instance, f: &EdgeSet) -> EdgeSet {
    inst.right_vertices()
        .flat_map(|v| choice_right(inst, v, f))
        .collect()
}

/// The composite choice: right choices applied to the union of left choices.
pub fn choice_composite(inst: &Instance, f: &EdgeSet) -> EdgeSet {
    choice_right_union(inst, &choice_left_union(inst, f))
}

/// Maximum-cardinality matching within `f` by augmenting paths, processing
/// left vertices and their edges in ascending id order so the result is
/// reproducible.
pub fn max_matching(inst: &Instance, f: &EdgeSet) -> Matching {
    let mut right_partner: Vec<Option<EdgeId>> = vec![None; inst.n2()];
    for u in 0..inst.n1() {
        let mut visited = vec![false; inst.n2()];
        augment(inst, f, u, &mut right_partner, &mut visited);
    }
    Matching::from_edges(inst, right_partner.into_iter().flatten())
        .expect("augmenting paths preserve the matching property")
}

fn augment(
    inst: &Instance,
    f: &EdgeSet,
    u: usize,
    right_partner: &mut [Option<EdgeId>],
    visited: &mut [bool],
) -> bool {
    for &id in inst.incident(VertexId::left(u)) {
        if !f.contains(&id) {
            continue;
        }
        let w = inst.edge(id).w.index;
        if visited[w] {
            continue;
        }
        visited[w] = true;
        let free = match right_partner[w] {
            None => true,
            Some(other) => {
                let u2 = inst.edge(other).u.index;
                augment(inst, f, u2, right_partner, visited)
            }
        };
        if free {
            right_partner[w] = Some(id);
            return true;
        }
    }
    false
}

/// The unique inclusion-minimal minimizer of the deficiency function
/// |neighborhood(X)| - |X| over left vertex sets of `f`: the left vertices
/// reachable from exposed ones by paths alternating unmatched and matched
/// `f` edges, relative to one maximum matching of `f`.
pub fn minimal_deficiency_set(inst: &Instance, f: &EdgeSet) -> BTreeSet<usize> {
    let mu = max_matching(inst, f);
    let mut reached: BTreeSet<usize> = BTreeSet::new();
    let mut queue: Vec<usize> = Vec::new();
    for &id in f {
        let u = inst.edge(id).u.index;
        if mu.partner(VertexId::left(u)).is_none() && reached.insert(u) {
            queue.push(u);
        }
    }
    let mut seen_right = vec![false; inst.n2()];
    while let Some(u) = queue.pop() {
        let matched = mu.partner(VertexId::left(u));
        for &id in inst.incident(VertexId::left(u)) {
            if !f.contains(&id) || Some(id) == matched {
                continue;
            }
            let w = inst.edge(id).w.index;
            if seen_right[w] {
                continue;
            }
            seen_right[w] = true;
            let back = mu
                .partner(VertexId::right(w))
                .expect("right vertex on an alternating path from an exposed vertex is matched");
            let v = inst.edge(back).u.index;
            if reached.insert(v) {
                queue.push(v);
            }
        }
    }
    reached
}

/// One inner iteration's bookkeeping.
#[derive(Debug, Clone)]
pub struct InnerStep {
    pub i: usize,
    /// Output of the composite choice on the surviving edges.
    pub choice: EdgeSet,
    /// Left-chosen edges the right side's filter dropped; deleting them is
    /// this iteration's action when nonempty.
    pub left_only: EdgeSet,
    /// Cumulative deleted set after this iteration.
    pub deleted: EdgeSet,
    /// Maximum matching of `choice`, when computed.
    pub matching: Option<Matching>,
    /// Left vertex indices of the minimal deficiency set, when that branch
    /// fired.
    pub deficient: Option<BTreeSet<usize>>,
}

/// One outer round: the inner iterations to a fixpoint, then at most one
/// blocking-driven eviction.
#[derive(Debug, Clone)]
pub struct OuterRound {
    pub t: usize,
    pub steps: Vec<InnerStep>,
    /// Lowest-id deleted edge that blocks the fixpoint matching, if any.
    pub blocking_edge: Option<EdgeId>,
    /// The matched edge discarded because of `blocking_edge`.
    pub evicted_edge: Option<EdgeId>,
    /// Cumulative deleted set at the end of the round.
    pub round_deleted: EdgeSet,
}

impl OuterRound {
    /// Index of the fixpoint iteration (the last inner step).
    pub fn final_step(&self) -> usize {
        self.steps.len()
    }

    /// The matching computed by the fixpoint iteration.
    pub fn fixpoint_matching(&self) -> &Matching {
        self.steps
            .last()
            .and_then(|s| s.matching.as_ref())
            .expect("fixpoint iteration computes a matching")
    }
}

/// Full iteration history of a solver run.
#[derive(Debug, Clone)]
pub struct ChoiceTrace {
    pub rounds: Vec<OuterRound>,
}

impl ChoiceTrace {
    /// The candidate matching of the final round (defined even on a `No`).
    pub fn final_matching(&self) -> &Matching {
        self.rounds.last().expect("at least one round").fixpoint_matching()
    }

    /// Trace as JSON, every edge set as a sorted array of edge ids.
    pub fn to_json(&self) -> serde_json::Value {
        let ids = |s: &EdgeSet| s.iter().map(|e| e.0).collect::<Vec<_>>();
        json!({
            "rounds": self.rounds.iter().map(|r| json!({
                "t": r.t,
                "steps": r.steps.iter().map(|s| json!({
                    "i": s.i,
                    "choice": ids(&s.choice),
                    "left_only": ids(&s.left_only),
                    "deleted": ids(&s.deleted),
                    "matching": s.matching.as_ref().map(|m| {
                        m.pairs().iter().map(|e| e.0).collect::<Vec<_>>()
                    }),
                    "deficient": s.deficient.as_ref().map(|n| {
                        n.iter().copied().collect::<Vec<_>>()
                    }),
                })).collect::<Vec<_>>(),
                "blocking_edge": r.blocking_edge.map(|e| e.0),
                "evicted_edge": r.evicted_edge.map(|e| e.0),
                "round_deleted": ids(&r.round_deleted),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Stable(Matching),
    No,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub trace: ChoiceTrace,
    /// Final cumulative deleted edge set.
    pub deleted: EdgeSet,
}

/// Decide whether the instance admits a non-uniformly stable matching and
/// construct one if it does.
pub fn solve(inst: &Instance) -> SolveOutcome {
    let all_edges: EdgeSet = (0..inst.num_edges()).map(EdgeId).collect();
    let mut rounds: Vec<OuterRound> = Vec::new();
    let mut carried: EdgeSet = EdgeSet::new();
    let mut t = 0;
    loop {
        t += 1;
        let mut deleted = carried.clone();
        let mut steps: Vec<InnerStep> = Vec::new();
        let mut i = 0;
        loop {
            i += 1;
            let prev = deleted.clone();
            let available: EdgeSet = all_edges.difference(&prev).copied().collect();
            let left_choice = choice_left_union(inst, &available);
            let choice = choice_right_union(inst, &left_choice);
            let left_only: EdgeSet = left_choice.difference(&choice).copied().collect();
            let mut matching = None;
            let mut deficient = None;
            if !left_only.is_empty() {
                deleted.extend(left_only.iter().copied());
            } else {
                let mu = max_matching(inst, &choice);
                if mu.len() < left_support_size(inst, &available) {
                    let n = minimal_deficiency_set(inst, &choice);
                    let removed: EdgeSet = choice
                        .iter()
                        .copied()
                        .filter(|&id| n.contains(&inst.edge(id).u.index))
                        .collect();
                    // An unsaturated left side forces a nonempty deletion;
                    // together with the monotone growth of the deleted set
                    // this bounds the loop.
                    assert!(!removed.is_empty(), "deficiency branch must delete an edge");
                    deleted.extend(removed.iter().copied());
                    deficient = Some(n);
                }
                matching = Some(mu);
            }
            debug_assert!(prev.is_subset(&deleted));
            let fixpoint = deleted == prev;
            steps.push(InnerStep { i, choice, left_only, deleted: deleted.clone(), matching, deficient });
            if fixpoint {
                break;
            }
        }
        let fixpoint_step = steps.last().expect("inner loop ran at least once");
        assert!(
            fixpoint_step.left_only.is_empty() && fixpoint_step.matching.is_some(),
            "fixpoint iteration recomputes a matching with nothing left-only"
        );
        let mu = fixpoint_step.matching.clone().expect("checked above");
        let mut blocking_edge = None;
        let mut evicted_edge = None;
        let mut round_deleted = deleted.clone();
        // Lowest-id deleted edge that still blocks the fixpoint matching;
        // its right endpoint's current partner is discarded too.
        if let Some(&e) = block_set(inst, &mu).iter().find(|e| deleted.contains(e)) {
            let w = inst.edge(e).w;
            let evicted = mu.partner(w).expect("blocking requires a matched right endpoint");
            blocking_edge = Some(e);
            evicted_edge = Some(evicted);
            round_deleted.insert(evicted);
        }
        debug_assert!(carried.is_subset(&round_deleted));
        let finished = round_deleted == deleted;
        rounds.push(OuterRound {
            t,
            steps,
            blocking_edge,
            evicted_edge,
            round_deleted: round_deleted.clone(),
        });
        carried = round_deleted;
        // The outer loop ends after a round in which no blocking-driven
        // eviction occurred (the do-while condition is evaluated after the
        // round body, against that round's fixpoint set).
        if finished {
            break;
        }
    }
    let trace = ChoiceTrace { rounds };
    let mu_o = trace.final_matching().clone();
    let available: EdgeSet = all_edges.difference(&carried).copied().collect();
    let mut candidates = choice_composite(inst, &available);
    candidates.extend(carried.iter().copied());
    let unmatched_right_exists = candidates
        .iter()
        .any(|&id| mu_o.partner(inst.edge(id).w).is_none());
    let result = if unmatched_right_exists {
        SolveResult::No
    } else {
        SolveResult::Stable(mu_o)
    };
    SolveOutcome { result, trace, deleted: carried }
}

fn left_support_size(inst: &Instance, f: &EdgeSet) -> usize {
    let support: BTreeSet<usize> = f.iter().map(|&id| inst.edge(id).u.index).collect();
    support.len()
}
