//! Non-archimedean bases: trichotomy, chain closure, canonical
//! decompositions and the tree of successive decompositions.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::frame::FiniteFrame;
use crate::mask::Mask;
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NonArchError {
    #[error("not a base: element {0} is not the join of the basics below it")]
    NotABase(usize),
    #[error("trichotomy fails on basics {0} and {1}")]
    NotNonArch(usize, usize),
    #[error("base is not closed under joins of chains")]
    NotChainClosed,
    #[error("basic {0} has no proper decomposition inside the base")]
    NoNontrivialDecomposition(usize),
}

/// How two basics relate; a non-archimedean base admits only the first four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairRelation {
    Disjoint,
    LeftBelow,
    RightBelow,
    Equal,
    Incomparable,
}

pub fn classify_pair(f: &FiniteFrame, a: usize, b: usize) -> PairRelation {
    if a == b {
        PairRelation::Equal
    } else if f.disjoint(a, b) {
        PairRelation::Disjoint
    } else if f.leq(a, b) {
        PairRelation::LeftBelow
    } else if f.leq(b, a) {
        PairRelation::RightBelow
    } else {
        PairRelation::Incomparable
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrichotomyReport {
    pub holds: bool,
    pub violating_pair: Option<(usize, usize)>,
    /// Every unordered pair of distinct basics, in index order.
    pub table: Vec<(usize, usize, PairRelation)>,
    /// First element that is not a join of basics, if any.
    pub base_defect: Option<usize>,
    /// Non-archimedean base on a frame that is not zero-dimensional.
    pub not_zero_dimensional: bool,
}

impl TrichotomyReport {
    pub fn is_nonarch_base(&self) -> bool {
        self.holds && self.base_defect.is_none()
    }
}

/// Full pairwise classification of `base`, with the base law reported
/// alongside rather than enforced.
pub fn check_nonarch_base(f: &FiniteFrame, base: &Mask) -> TrichotomyReport {
    let members = base.to_vec();
    let mut table = Vec::new();
    let mut violating_pair = None;
    for (k, &a) in members.iter().enumerate() {
        for &b in &members[k + 1..] {
            let rel = classify_pair(f, a, b);
            if rel == PairRelation::Incomparable && violating_pair.is_none() {
                violating_pair = Some((a, b));
            }
            table.push((a, b, rel));
        }
    }
    let holds = violating_pair.is_none();
    let base_defect = f.base_defect(base);
    let not_zero_dimensional = holds && base_defect.is_none() && !f.zero_dimensional().0;
    TrichotomyReport {
        holds,
        violating_pair,
        table,
        base_defect,
        not_zero_dimensional,
    }
}

/// A base known to satisfy both the base law and trichotomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonArchBase {
    members: Mask,
}

impl NonArchBase {
    pub fn new(f: &FiniteFrame, members: Mask) -> Result<Self, NonArchError> {
        let r = check_nonarch_base(f, &members);
        if let Some(a) = r.base_defect {
            return Err(NonArchError::NotABase(a));
        }
        if let Some((a, b)) = r.violating_pair {
            return Err(NonArchError::NotNonArch(a, b));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &Mask {
        &self.members
    }

    pub fn contains(&self, a: usize) -> bool {
        self.members.contains(a)
    }
}

/// Joins of all nonempty chains in `base`. Only trichotomy is required.
pub fn chain_closure(f: &FiniteFrame, base: &Mask) -> Result<Mask, NonArchError> {
    if let Some((a, b)) = check_nonarch_base(f, base).violating_pair {
        return Err(NonArchError::NotNonArch(a, b));
    }
    let members = base.to_vec();
    let mut closure = Mask::empty(f.size());
    // chains are grown upward; the state is (last element, join so far)
    let mut seen = HashSet::new();
    let mut stack: Vec<(usize, usize)> = members.iter().map(|&b| (b, b)).collect();
    while let Some((last, join)) = stack.pop() {
        if !seen.insert((last, join)) {
            continue;
        }
        closure.insert(join);
        for &next in &members {
            if f.lt(last, next) {
                stack.push((next, f.join(join, next)));
            }
        }
    }
    let r = check_nonarch_base(f, &closure);
    if let Some((a, b)) = r.violating_pair {
        return Err(NonArchError::NotNonArch(a, b));
    }
    Ok(closure)
}

pub fn is_chain_closed(f: &FiniteFrame, base: &Mask) -> bool {
    chain_closure(f, base).is_ok_and(|c| &c == base)
}

/// Maximal nonzero basics below `a`: pairwise disjoint, joining to `a`.
pub fn canonical_decomposition(
    f: &FiniteFrame,
    base: &NonArchBase,
    a: usize,
) -> Result<Vec<usize>, NonArchError> {
    if !is_chain_closed(f, base.members()) {
        return Err(NonArchError::NotChainClosed);
    }
    let below: Vec<usize> = base
        .members()
        .iter()
        .filter(|&x| x != f.bottom() && f.leq(x, a))
        .collect();
    Ok(maximal(f, &below))
}

fn maximal(f: &FiniteFrame, xs: &[usize]) -> Vec<usize> {
    xs.iter()
        .copied()
        .filter(|&x| !xs.iter().any(|&y| f.lt(x, y)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrthoOutcome {
    MeetZero,
    IntervalSimple,
    Complemented(usize),
    NoneHolds,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthoReport {
    pub meet: usize,
    pub outcome: OrthoOutcome,
    /// For `Complemented`, whether the complement lies in the chain
    /// closure of the base.
    pub witness_in_closure: Option<bool>,
}

/// Which of meet zero, simple interval `[0, m]`, or complemented meet holds
/// for the meet `m` of `subset`, tested in that order.
pub fn ortho_classify(f: &FiniteFrame, base: &Mask, subset: &Mask) -> OrthoReport {
    debug_assert!(subset.is_subset(base));
    let meet = f.meet_all(subset.iter());
    let outcome = if meet == f.bottom() {
        OrthoOutcome::MeetZero
    } else if f.order().down(meet).count() == 2 {
        OrthoOutcome::IntervalSimple
    } else if let Some(c) = f.complement(meet) {
        OrthoOutcome::Complemented(c)
    } else {
        OrthoOutcome::NoneHolds
    };
    let witness_in_closure = match outcome {
        OrthoOutcome::Complemented(c) => chain_closure(f, base).ok().map(|cl| cl.contains(c)),
        _ => None,
    };
    OrthoReport {
        meet,
        outcome,
        witness_in_closure,
    }
}

/// The tree of successive maximal decompositions. Node 0 is the root and
/// stands for the top element; `levels[k]` holds the nodes at depth `k + 1`.
#[derive(Debug, Clone)]
pub struct TreeBase {
    pub tree: Tree,
    pub node_element: Vec<usize>,
    pub levels: Vec<Vec<usize>>,
}

impl TreeBase {
    pub fn node_of(&self, element: usize) -> Option<usize> {
        self.node_element.iter().position(|&e| e == element)
    }

    /// First invariant that fails, as a message.
    pub fn verify(&self, f: &FiniteFrame) -> Result<(), String> {
        let t = &self.tree;
        if self.node_element[t.root()] != f.top() {
            return Err("root is not the top element".into());
        }
        for v in 0..t.size() {
            let kids = t.children(v);
            for (i, &a) in kids.iter().enumerate() {
                for &b in &kids[i + 1..] {
                    if !f.disjoint(self.node_element[a], self.node_element[b]) {
                        return Err(format!("siblings {a} and {b} overlap"));
                    }
                }
            }
            if !kids.is_empty() {
                let j = f.join_all(kids.iter().map(|&c| self.node_element[c]));
                if j != self.node_element[v] {
                    return Err(format!("node {v} is not the join of its children"));
                }
            }
        }
        for x in 0..t.size() {
            for y in 0..t.size() {
                let frame = f.leq(self.node_element[x], self.node_element[y]);
                if frame != t.is_ancestor(y, x) {
                    return Err(format!("nodes {x} and {y}: tree order is not reversed frame order"));
                }
            }
        }
        for (k, level) in self.levels.iter().enumerate() {
            for (i, &a) in level.iter().enumerate() {
                if t.level_of(a) != k + 1 {
                    return Err(format!("node {a} listed on the wrong level"));
                }
                for &b in &level[i + 1..] {
                    if !f.disjoint(self.node_element[a], self.node_element[b]) {
                        return Err(format!("level {k} members {a} and {b} overlap"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every nonzero basic `b` stops being strictly below a node at some
    /// least level, where it is the join of that level's nodes below it.
    /// Returns the first basic for which this fails.
    pub fn level_decomposition_defect(&self, f: &FiniteFrame, base: &NonArchBase) -> Option<usize> {
        'basics: for b in base.members().iter().filter(|&b| b != f.bottom()) {
            for level in &self.levels {
                let elems = level.iter().map(|&v| self.node_element[v]);
                if elems.clone().any(|e| f.lt(b, e)) {
                    continue;
                }
                let j = f.join_all(elems.filter(|&e| f.leq(e, b)));
                if j == b {
                    continue 'basics;
                }
                return Some(b);
            }
            if !(b == f.top() && self.levels.is_empty()) {
                return Some(b);
            }
        }
        None
    }
}

/// Root at the top element; each non-atomic node gets the maximal basics
/// strictly between 0 and itself as children.
pub fn build_tree_base(f: &FiniteFrame, base: &NonArchBase) -> Result<TreeBase, NonArchError> {
    if !is_chain_closed(f, base.members()) {
        return Err(NonArchError::NotChainClosed);
    }
    let mut parent = vec![None];
    let mut node_element = vec![f.top()];
    let mut frontier = vec![0usize];
    let mut levels = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            let n = node_element[v];
            let proper: Vec<usize> = base
                .members()
                .iter()
                .filter(|&x| x != f.bottom() && f.lt(x, n))
                .collect();
            if proper.is_empty() {
                continue;
            }
            let w = maximal(f, &proper);
            if f.join_all(w.iter().copied()) != n {
                return Err(NonArchError::NoNontrivialDecomposition(n));
            }
            for x in w {
                parent.push(Some(v));
                node_element.push(x);
                next.push(node_element.len() - 1);
            }
        }
        if !next.is_empty() {
            levels.push(next.clone());
        }
        frontier = next;
    }
    let labels = node_element.iter().map(|&e| f.label(e).to_string()).collect();
    let tree = Tree::from_parents(parent).expect("parent links form a tree").with_labels(labels);
    let tb = TreeBase {
        tree,
        node_element,
        levels,
    };
    debug_assert_eq!(tb.verify(f), Ok(()));
    Ok(tb)
}

/// A tree base exists and its root actually splits. The one-element frame
/// gets a single-node tree and is excluded.
pub fn admits_nontrivial_decompositions(f: &FiniteFrame, base: &NonArchBase) -> bool {
    f.size() > 1 && build_tree_base(f, base).is_ok()
}

/// For a basic `b` and a nonzero complemented `c ≤ b`, `b` should be
/// complemented too. Returns the first `(b, c)` where it is not.
pub fn complemented_below_defect(f: &FiniteFrame, base: &Mask) -> Option<(usize, usize)> {
    let comp = f.complemented_elements();
    for b in base.iter() {
        if comp.contains(b) {
            continue;
        }
        if let Some(c) = comp.iter().find(|&c| c != f.bottom() && f.leq(c, b)) {
            return Some((b, c));
        }
    }
    None
}
