//! Brute-force ground truth for small instances: exhaustive matching
//! enumeration, exhaustive stability filters, and an all-subsets minimizer
//! of the deficiency function. Everything here is deliberately naive; the
//! fast paths elsewhere are tested against it.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::instance::{EdgeId, Instance};
use crate::stability::{
    is_non_uniformly_stable, strongly_blocks_unchecked, weakly_blocks_unchecked, Matching,
};

/// Size guard for exhaustive enumeration. Enumeration refuses oversized
/// inputs instead of silently truncating.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_edges: usize,
    pub max_matchings: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_edges: 20, max_matchings: 10_000_000 }
    }
}

#[derive(Debug, Error)]
pub enum BudgetError {
    #[error("instance has {edges} edges, enumeration budget allows {max}")]
    TooManyEdges { edges: usize, max: usize },
    #[error("enumeration exceeded {max} matchings")]
    TooManyMatchings { max: u64 },
    #[error("edge set has {vertices} left vertices, brute-force minimizer allows {max}")]
    TooManyVertices { vertices: usize, max: usize },
}

/// Streams every matching of the instance exactly once, in lexicographic
/// order of sorted edge-id sequences (the empty matching first).
pub fn enumerate_matchings<'a>(
    inst: &'a Instance,
    budget: &EnumerationBudget,
) -> Result<MatchingIter<'a>, BudgetError> {
    if inst.num_edges() > budget.max_edges {
        return Err(BudgetError::TooManyEdges {
            edges: inst.num_edges(),
            max: budget.max_edges,
        });
    }
    Ok(MatchingIter {
        inst,
        stack: vec![0],
        chosen: Vec::new(),
        left_used: vec![false; inst.n1()],
        right_used: vec![false; inst.n2()],
        emitted: 0,
        max_matchings: budget.max_matchings,
        started: false,
    })
}

/// Depth-first walk over matchings; each step either emits the current
/// partial matching extended by the next compatible edge or backtracks.
pub struct MatchingIter<'a> {
    inst: &'a Instance,
    stack: Vec<usize>,
    chosen: Vec<EdgeId>,
    left_used: Vec<bool>,
    right_used: Vec<bool>,
    emitted: u64,
    max_matchings: u64,
    started: bool,
}

impl MatchingIter<'_> {
    fn snapshot(&mut self) -> Result<Matching, BudgetError> {
        self.emitted += 1;
        if self.emitted > self.max_matchings {
            return Err(BudgetError::TooManyMatchings { max: self.max_matchings });
        }
        Ok(Matching::from_edges(self.inst, self.chosen.iter().copied())
            .expect("enumeration only extends by disjoint edges"))
    }
}

impl Iterator for MatchingIter<'_> {
    type Item = Result<Matching, BudgetError>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            return Some(self.snapshot());
        }
        while let Some(next) = self.stack.last_mut() {
            let mut candidate = *next;
            let mut found = None;
            while candidate < self.inst.num_edges() {
                let e = self.inst.edge(EdgeId(candidate));
                if !self.left_used[e.u.index] && !self.right_used[e.w.index] {
                    found = Some(candidate);
                    break;
                }
                candidate += 1;
            }
            match found {
                Some(c) => {
                    *next = c + 1;
                    let e = self.inst.edge(EdgeId(c));
                    self.left_used[e.u.index] = true;
                    self.right_used[e.w.index] = true;
                    self.chosen.push(EdgeId(c));
                    self.stack.push(c + 1);
                    return Some(self.snapshot());
                }
                None => {
                    self.stack.pop();
                    if let Some(id) = self.chosen.pop() {
                        let e = self.inst.edge(id);
                        self.left_used[e.u.index] = false;
                        self.right_used[e.w.index] = false;
                    }
                }
            }
        }
        None
    }
}

/// All non-uniformly stable matchings, by exhaustive check.
pub fn enumerate_stable(
    inst: &Instance,
    budget: &EnumerationBudget,
) -> Result<Vec<Matching>, BudgetError> {
    let mut out = Vec::new();
    for mu in enumerate_matchings(inst, budget)? {
        let mu = mu?;
        if is_non_uniformly_stable(inst, &mu).is_none() {
            out.push(mu);
        }
    }
    Ok(out)
}

/// Super-stability, coded directly from its own definition (no edge-kind
/// dispatch): no outside edge may weakly block.
pub fn is_super_stable(inst: &Instance, mu: &Matching) -> bool {
    (0..inst.num_edges())
        .map(EdgeId)
        .filter(|&e| !mu.contains(e))
        .all(|e| !weakly_blocks_unchecked(inst, mu, e))
}

/// Strong stability, coded directly from its own definition: no outside
/// edge may strongly block.
pub fn is_strongly_stable(inst: &Instance, mu: &Matching) -> bool {
    (0..inst.num_edges())
        .map(EdgeId)
        .filter(|&e| !mu.contains(e))
        .all(|e| !strongly_blocks_unchecked(inst, mu, e))
}

/// Right-side neighborhood of a left vertex set through the edge set `f`.
pub fn neighborhood(inst: &Instance, f: &BTreeSet<EdgeId>, xs: &BTreeSet<usize>) -> BTreeSet<usize> {
    f.iter()
        .map(|&id| inst.edge(id))
        .filter(|e| xs.contains(&e.u.index))
        .map(|e| e.w.index)
        .collect()
}

/// The deficiency function: |neighborhood(X)| - |X| over left vertex sets.
pub fn deficiency(inst: &Instance, f: &BTreeSet<EdgeId>, xs: &BTreeSet<usize>) -> i64 {
    neighborhood(inst, f, xs).len() as i64 - xs.len() as i64
}

/// Left vertices of `f` (left vertices with at least one incident `f` edge).
pub fn left_support(inst: &Instance, f: &BTreeSet<EdgeId>) -> BTreeSet<usize> {
    f.iter().map(|&id| inst.edge(id).u.index).collect()
}

const BRUTE_MINIMIZER_MAX: usize = 12;

/// Evaluate the deficiency function on every subset of the left support of
/// `f` and return the unique inclusion-minimal minimizer. Uniqueness is
/// guaranteed by submodularity; a violation is asserted as a harness bug.
pub fn brute_minimal_minimizer(
    inst: &Instance,
    f: &BTreeSet<EdgeId>,
) -> Result<BTreeSet<usize>, BudgetError> {
    let support: Vec<usize> = left_support(inst, f).into_iter().collect();
    if support.len() > BRUTE_MINIMIZER_MAX {
        return Err(BudgetError::TooManyVertices {
            vertices: support.len(),
            max: BRUTE_MINIMIZER_MAX,
        });
    }
    let mut best_value = i64::MAX;
    let mut minimizers: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 0u64..(1 << support.len()) {
        let xs: BTreeSet<usize> = support
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let value = deficiency(inst, f, &xs);
        if value < best_value {
            best_value = value;
            minimizers.clear();
        }
        if value == best_value {
            minimizers.push(xs);
        }
    }
    let minimal: Vec<&BTreeSet<usize>> = minimizers
        .iter()
        .filter(|xs| !minimizers.iter().any(|ys| ys.len() < xs.len() && ys.is_subset(xs)))
        .collect();
    // Submodular functions have a unique inclusion-minimal minimizer; the
    // filter above keeps only subset-minimal attainers, which must all
    // coincide with it.
    assert!(
        minimal.windows(2).all(|w| w[0] == w[1]),
        "multiple inclusion-minimal minimizers found"
    );
    Ok(minimal[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, EdgeKind, EdgeSpec};
    use crate::solver::max_matching;

    fn complete_2x2(kind: EdgeKind) -> Instance {
        let specs = (0..2)
            .flat_map(|u| (0..2).map(move |w| EdgeSpec::new(u, w, kind, 1, 1)))
            .collect::<Vec<_>>();
        Instance::new(2, 2, specs).unwrap()
    }

    fn all_edges(inst: &Instance) -> BTreeSet<EdgeId> {
        (0..inst.num_edges()).map(EdgeId).collect()
    }

    #[test]
    fn single_edge_has_two_matchings() {
        let inst = Instance::new(1, 1, [EdgeSpec::new(0, 0, EdgeKind::Super, 1, 1)]).unwrap();
        let ms: Vec<_> = enumerate_matchings(&inst, &EnumerationBudget::default())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms[0].is_empty());
        assert_eq!(ms[1].pairs(), &[EdgeId(0)]);
    }

    #[test]
    fn complete_2x2_has_seven_matchings_in_lex_order() {
        let inst = complete_2x2(EdgeKind::Super);
        let ms: Vec<_> = enumerate_matchings(&inst, &EnumerationBudget::default())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        let ids: Vec<Vec<usize>> =
            ms.iter().map(|m| m.pairs().iter().map(|e| e.0).collect()).collect();
        assert_eq!(
            ids,
            vec![
                vec![],
                vec![0],
                vec![0, 3],
                vec![1],
                vec![1, 2],
                vec![2],
                vec![3],
            ]
        );
    }

    #[test]
    fn empty_instance_has_one_matching() {
        let inst = Instance::new(0, 0, []).unwrap();
        let ms: Vec<_> = enumerate_matchings(&inst, &EnumerationBudget::default())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(ms.len(), 1);
    }

    #[test]
    fn budget_rejects_oversized_instances() {
        let inst = generate_random(1, 4, 4, 1.0, 0.5, 0.5);
        assert_eq!(inst.num_edges(), 16);
        assert!(matches!(
            enumerate_matchings(&inst, &EnumerationBudget { max_edges: 10, ..Default::default() }),
            Err(BudgetError::TooManyEdges { .. })
        ));
        let tight = EnumerationBudget { max_edges: 20, max_matchings: 10 };
        let result: Result<Vec<_>, _> = enumerate_matchings(&inst, &tight).unwrap().collect();
        assert!(matches!(result, Err(BudgetError::TooManyMatchings { .. })));
    }

    #[test]
    fn stable_sets_of_the_named_instances() {
        let budget = EnumerationBudget::default();
        // All ties, all super: every matching is blocked.
        let super_inst = complete_2x2(EdgeKind::Super);
        assert!(enumerate_stable(&super_inst, &budget).unwrap().is_empty());

        // All ties, all strong: exactly the two perfect matchings.
        let strong_inst = complete_2x2(EdgeKind::Strong);
        let stable = enumerate_stable(&strong_inst, &budget).unwrap();
        let ids: Vec<Vec<usize>> =
            stable.iter().map(|m| m.pairs().iter().map(|e| e.0).collect()).collect();
        assert_eq!(ids, vec![vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn strict_preferences_give_two_stable_matchings() {
        // m1: w1 > w2, m2: w2 > w1, w1: m2 > m1, w2: m1 > m2.
        let inst = Instance::new(
            2,
            2,
            [
                EdgeSpec::new(0, 0, EdgeKind::Super, 1, 2),
                EdgeSpec::new(0, 1, EdgeKind::Super, 2, 1),
                EdgeSpec::new(1, 0, EdgeKind::Super, 2, 1),
                EdgeSpec::new(1, 1, EdgeKind::Super, 1, 2),
            ],
        )
        .unwrap();
        let stable = enumerate_stable(&inst, &EnumerationBudget::default()).unwrap();
        assert_eq!(stable.len(), 2);
    }

    #[test]
    fn specialized_oracles_match_kind_dispatch() {
        let budget = EnumerationBudget::default();
        for seed in 0..40 {
            let super_inst = generate_random(seed, 3, 3, 0.7, 0.5, 0.0);
            assert!(super_inst.all_edges_are(EdgeKind::Super));
            for mu in enumerate_matchings(&super_inst, &budget).unwrap() {
                let mu = mu.unwrap();
                assert_eq!(
                    is_non_uniformly_stable(&super_inst, &mu).is_none(),
                    is_super_stable(&super_inst, &mu)
                );
            }
            let strong_inst = generate_random(seed, 3, 3, 0.7, 0.5, 1.0);
            assert!(strong_inst.all_edges_are(EdgeKind::Strong));
            for mu in enumerate_matchings(&strong_inst, &budget).unwrap() {
                let mu = mu.unwrap();
                assert_eq!(
                    is_non_uniformly_stable(&strong_inst, &mu).is_none(),
                    is_strongly_stable(&strong_inst, &mu)
                );
            }
        }
    }

    #[test]
    fn brute_minimizer_examples() {
        // Perfectly matchable: the empty set attains the minimum value 0.
        let inst = complete_2x2(EdgeKind::Super);
        let f = all_edges(&inst);
        assert!(brute_minimal_minimizer(&inst, &f).unwrap().is_empty());

        // Two left vertices share one right vertex: deficiency -1 at {v1, v2}.
        let star = Instance::new(
            2,
            1,
            [
                EdgeSpec::new(0, 0, EdgeKind::Super, 1, 1),
                EdgeSpec::new(1, 0, EdgeKind::Super, 1, 1),
            ],
        )
        .unwrap();
        let f = all_edges(&star);
        assert_eq!(
            brute_minimal_minimizer(&star, &f).unwrap(),
            BTreeSet::from([0, 1])
        );
        assert_eq!(deficiency(&star, &f, &BTreeSet::from([0, 1])), -1);

        // Empty edge set.
        assert!(brute_minimal_minimizer(&star, &BTreeSet::new()).unwrap().is_empty());
    }

    #[test]
    fn deficiency_is_submodular() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for seed in 0..30 {
            let inst = generate_random(seed, 5, 5, 0.5, 0.5, 0.5);
            let f = all_edges(&inst);
            let support: Vec<usize> = left_support(&inst, &f).into_iter().collect();
            for _ in 0..20 {
                let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> BTreeSet<usize> {
                    support.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
                };
                let xs = pick(&mut rng);
                let ys = pick(&mut rng);
                let union: BTreeSet<usize> = xs.union(&ys).copied().collect();
                let inter: BTreeSet<usize> = xs.intersection(&ys).copied().collect();
                assert!(
                    deficiency(&inst, &f, &xs) + deficiency(&inst, &f, &ys)
                        >= deficiency(&inst, &f, &union) + deficiency(&inst, &f, &inter)
                );
            }
        }
    }

    #[test]
    fn hall_condition_matches_max_matching() {
        for seed in 0..40 {
            let inst = generate_random(seed, 4, 4, 0.5, 0.5, 0.5);
            let f = all_edges(&inst);
            let support: Vec<usize> = left_support(&inst, &f).into_iter().collect();
            let saturating = max_matching(&inst, &f).len() == support.len();
            let hall = (0u64..(1 << support.len())).all(|mask| {
                let xs: BTreeSet<usize> = support
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect();
                deficiency(&inst, &f, &xs) >= 0
            });
            assert_eq!(saturating, hall);
        }
    }
}
