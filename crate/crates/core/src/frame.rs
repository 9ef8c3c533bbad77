//! Finite frames: lattice tables, Heyting structure and separation checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Mask;
use crate::order::{self, EnumerationBound, OrderError, Poset, PosetJson};

pub mod points;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("frame carrier is empty")]
    Empty,
    #[error("elements {0} and {1} have no {2}")]
    NotALattice(usize, usize, &'static str),
    #[error("{op} table disagrees with the order at ({a}, {b})")]
    TableMismatch { op: &'static str, a: usize, b: usize },
    #[error("distributivity fails: {a} meet ({x} join {y})")]
    NotDistributive { a: usize, x: usize, y: usize },
    #[error("set family is not closed under {0}")]
    NotClosed(&'static str),
    #[error("point enumerations disagree: {0}")]
    CrossCheckMismatch(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

/// A finite distributive lattice with its meet and join tables.
///
/// For finite lattices, binary distributivity already gives the infinite
/// frame law, so every value of this type is a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFrame {
    order: Poset,
    meet: Vec<u32>,
    join: Vec<u32>,
    bottom: usize,
    top: usize,
}

impl FiniteFrame {
    /// Validates explicit tables against the order, then distributivity.
    pub fn new(order: Poset, meet: Vec<u32>, join: Vec<u32>) -> Result<Self, FrameError> {
        let n = order.size();
        if n == 0 {
            return Err(FrameError::Empty);
        }
        assert_eq!(meet.len(), n * n);
        assert_eq!(join.len(), n * n);
        for a in 0..n {
            for b in 0..n {
                let m = meet[a * n + b] as usize;
                let j = join[a * n + b] as usize;
                let lower = order.down(a).intersection(order.down(b));
                if !lower.contains(m) || !lower.is_subset(order.down(m)) {
                    return Err(FrameError::TableMismatch { op: "meet", a, b });
                }
                let upper = order.up(a).intersection(order.up(b));
                if !upper.contains(j) || !upper.is_subset(order.up(j)) {
                    return Err(FrameError::TableMismatch { op: "join", a, b });
                }
            }
        }
        let f = Self::assemble(order, meet, join);
        f.check_distributive()?;
        Ok(f)
    }

    /// Tables trusted as they are; for large derived frames whose laws are
    /// known from construction.
    pub(crate) fn new_unchecked(order: Poset, meet: Vec<u32>, join: Vec<u32>) -> Self {
        Self::assemble(order, meet, join)
    }

    /// Completes a lattice order to tables and checks distributivity.
    pub fn from_order(order: Poset) -> Result<Self, FrameError> {
        let n = order.size();
        if n == 0 {
            return Err(FrameError::Empty);
        }
        let bound = |cands: Mask, side: fn(&Poset, usize) -> &Mask| {
            cands.iter().find(|&c| cands.is_subset(side(&order, c)))
        };
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        for a in 0..n {
            for b in a..n {
                let m = bound(order.down(a).intersection(order.down(b)), Poset::down)
                    .ok_or(FrameError::NotALattice(a, b, "meet"))?;
                let j = bound(order.up(a).intersection(order.up(b)), Poset::up)
                    .ok_or(FrameError::NotALattice(a, b, "join"))?;
                meet[a * n + b] = m as u32;
                meet[b * n + a] = m as u32;
                join[a * n + b] = j as u32;
                join[b * n + a] = j as u32;
            }
        }
        let f = Self::assemble(order, meet, join);
        f.check_distributive()?;
        Ok(f)
    }

    /// The frame of a family of sets closed under union and intersection,
    /// ordered by inclusion. Members are sorted canonically; set algebra
    /// supplies distributivity.
    pub fn from_set_family(mut members: Vec<Mask>) -> Result<SetFrame, FrameError> {
        members.sort();
        members.dedup();
        if members.is_empty() {
            return Err(FrameError::Empty);
        }
        let n = members.len();
        let index: HashMap<Mask, u32> = members
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        let mut up = vec![Mask::empty(n); n];
        for a in 0..n {
            for b in a..n {
                let m = *index
                    .get(&members[a].intersection(&members[b]))
                    .ok_or(FrameError::NotClosed("intersection"))?;
                let j = *index
                    .get(&members[a].union(&members[b]))
                    .ok_or(FrameError::NotClosed("union"))?;
                meet[a * n + b] = m;
                meet[b * n + a] = m;
                join[a * n + b] = j;
                join[b * n + a] = j;
                if m as usize == a {
                    up[a].insert(b);
                }
                if m as usize == b {
                    up[b].insert(a);
                }
            }
        }
        let labels = members.iter().map(|m| m.to_string()).collect();
        let order = Poset::from_up_sets(up, labels);
        Ok(SetFrame {
            frame: Self::assemble(order, meet, join),
            index,
            sets: members,
        })
    }

    fn assemble(order: Poset, meet: Vec<u32>, join: Vec<u32>) -> Self {
        let n = order.size();
        let bottom = (0..n).find(|&a| order.up(a).is_full()).expect("lattice has a bottom");
        let top = (0..n).find(|&a| order.down(a).is_full()).expect("lattice has a top");
        Self {
            order,
            meet,
            join,
            bottom,
            top,
        }
    }

    fn check_distributive(&self) -> Result<(), FrameError> {
        let n = self.size();
        for a in 0..n {
            for x in 0..n {
                for y in x + 1..n {
                    let lhs = self.meet(a, self.join(x, y));
                    let rhs = self.join(self.meet(a, x), self.meet(a, y));
                    if lhs != rhs {
                        return Err(FrameError::NotDistributive { a, x, y });
                    }
                }
            }
        }
        Ok(())
    }

    /// Powerset of `{1..=n}`; element `i` is the subset with bit mask `i`.
    pub fn powerset(n: usize) -> FiniteFrame {
        let members = (0u64..1 << n).map(|s| Mask::from_bits(n, s)).collect();
        let sf = Self::from_set_family(members).expect("powerset is a set lattice");
        let labels = (0u64..1 << n)
            .map(|s| {
                let parts: Vec<String> = (0..n)
                    .filter(|i| s >> i & 1 == 1)
                    .map(|i| (i + 1).to_string())
                    .collect();
                format!("{{{}}}", parts.join(","))
            })
            .collect();
        sf.frame.relabel(labels)
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> FiniteFrame {
        assert!(n > 0, "a chain frame needs at least one element");
        let members = (0..=n - 1).map(|k| Mask::from_indices(n - 1, 0..k)).collect();
        let sf = Self::from_set_family(members).expect("chain is a set lattice");
        sf.frame.relabel(order::default_labels(n))
    }

    /// Upsets of a poset under inclusion.
    pub fn alexandroff(p: &Poset, bound: EnumerationBound) -> Result<SetFrame, FrameError> {
        let fam = order::enumerate_upsets(p, bound)?;
        Self::from_set_family(fam.into_members())
    }

    pub fn relabel(mut self, labels: Vec<String>) -> FiniteFrame {
        self.order = self.order.with_labels(labels);
        self
    }

    pub fn from_json(spec: &FrameJson) -> Result<FiniteFrame, FrameError> {
        match spec {
            FrameJson::Explicit(p) => Self::from_order(Poset::from_json(p)?),
            FrameJson::Generated(g) => Ok(match g {
                FrameGenerator::Powerset { n } => Self::powerset(*n),
                FrameGenerator::Chain { n } if *n > 0 => Self::chain(*n),
                FrameGenerator::Chain { .. } => return Err(FrameError::Empty),
            }),
        }
    }

    pub fn to_json(&self) -> PosetJson {
        self.order.to_json()
    }

    pub fn size(&self) -> usize {
        self.order.size()
    }

    pub fn order(&self) -> &Poset {
        &self.order
    }

    pub fn label(&self, a: usize) -> &str {
        self.order.label(a)
    }

    pub fn element(&self, label: &str) -> Result<usize, FrameError> {
        self.order
            .index_of(label)
            .ok_or_else(|| FrameError::UnknownElement(label.to_string()))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.order.leq(a, b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.order.lt(a, b)
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.size() + b] as usize
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.size() + b] as usize
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn join_all<I: IntoIterator<Item = usize>>(&self, it: I) -> usize {
        it.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    pub fn meet_all<I: IntoIterator<Item = usize>>(&self, it: I) -> usize {
        it.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    pub fn disjoint(&self, a: usize, b: usize) -> bool {
        self.meet(a, b) == self.bottom
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size()
    }

    /// The largest `x` with `x ∧ a ≤ b`.
    pub fn heyting(&self, a: usize, b: usize) -> usize {
        self.join_all(self.elements().filter(|&x| self.leq(self.meet(x, a), b)))
    }

    pub fn negation(&self, a: usize) -> usize {
        self.heyting(a, self.bottom)
    }

    /// The complement of `a`, when it has one.
    pub fn complement(&self, a: usize) -> Option<usize> {
        let n = self.negation(a);
        (self.join(a, n) == self.top).then_some(n)
    }

    pub fn is_complemented(&self, a: usize) -> bool {
        self.complement(a).is_some()
    }

    pub fn complemented_elements(&self) -> Mask {
        Mask::from_indices(self.size(), self.elements().filter(|&a| self.is_complemented(a)))
    }

    /// First element that is not the join of the members below it.
    pub fn base_defect(&self, members: &Mask) -> Option<usize> {
        self.elements().find(|&a| {
            self.join_all(members.iter().filter(|&b| self.leq(b, a))) != a
        })
    }

    pub fn is_base(&self, members: &Mask) -> bool {
        self.base_defect(members).is_none()
    }

    /// Whether the complemented elements form a base; they are returned as
    /// the witness either way.
    pub fn zero_dimensional(&self) -> (bool, Mask) {
        let c = self.complemented_elements();
        (self.is_base(&c), c)
    }

    /// `a ≺ b` iff `¬a ∨ b = 1`.
    pub fn rather_below(&self, a: usize, b: usize) -> bool {
        self.join(self.negation(a), b) == self.top
    }

    /// The completely-below relation as rows `R[a] = {b | a ≺≺ b}`: the
    /// greatest interpolative subrelation of `≺`.
    pub fn completely_below_relation(&self) -> Vec<Mask> {
        let n = self.size();
        let negs: Vec<usize> = self.elements().map(|a| self.negation(a)).collect();
        let mut rel: Vec<Mask> = (0..n)
            .map(|a| {
                Mask::from_indices(n, (0..n).filter(|&b| self.join(negs[a], b) == self.top))
            })
            .collect();
        loop {
            let next: Vec<Mask> = (0..n)
                .map(|a| {
                    Mask::from_indices(
                        n,
                        rel[a]
                            .iter()
                            .filter(|&b| rel[a].iter().any(|c| rel[c].contains(b))),
                    )
                })
                .collect();
            if next == rel {
                return rel;
            }
            rel = next;
        }
    }

    pub fn completely_below(&self, a: usize, b: usize) -> bool {
        self.completely_below_relation()[a].contains(b)
    }

    /// Every `a` is the join of the elements rather below it.
    pub fn is_regular(&self) -> bool {
        self.elements().all(|a| {
            self.join_all(self.elements().filter(|&x| self.rather_below(x, a))) == a
        })
    }

    pub fn is_completely_regular(&self) -> bool {
        let rel = self.completely_below_relation();
        self.elements().all(|a| {
            self.join_all(self.elements().filter(|&x| rel[x].contains(a))) == a
        })
    }

    /// For all `a ≰ b` there are `x, y` with `a ∨ x = 1`, `y ≰ b` and `x ∧ y ≤ b`.
    pub fn is_fit(&self) -> bool {
        self.separation_search(|f, x, y, b| f.leq(f.meet(x, y), b))
    }

    /// The quantifier form of regularity (`x ∧ y = 0` in place of `≤ b`).
    pub fn is_regular_by_search(&self) -> bool {
        self.separation_search(|f, x, y, _| f.disjoint(x, y))
    }

    fn separation_search(&self, ok: impl Fn(&Self, usize, usize, usize) -> bool) -> bool {
        self.elements().all(|a| {
            self.elements().filter(|&b| !self.leq(a, b)).all(|b| {
                self.elements()
                    .filter(|&x| self.join(a, x) == self.top)
                    .any(|x| {
                        self.elements()
                            .filter(|&y| !self.leq(y, b))
                            .any(|y| ok(self, x, y, b))
                    })
            })
        })
    }

    pub fn atoms(&self) -> Vec<usize> {
        self.order.upper_covers(self.bottom).to_vec()
    }

    pub fn join_irreducibles(&self) -> Mask {
        Mask::from_indices(
            self.size(),
            self.elements().filter(|&a| self.order.lower_covers(a).count() == 1),
        )
    }

    /// Elements `p ≠ 1` with `a ∧ b ≤ p ⇒ a ≤ p or b ≤ p`.
    pub fn meet_irreducibles(&self) -> Mask {
        Mask::from_indices(
            self.size(),
            self.elements().filter(|&p| {
                p != self.top
                    && self.elements().all(|a| {
                        self.elements().all(|b| {
                            !self.leq(self.meet(a, b), p) || self.leq(a, p) || self.leq(b, p)
                        })
                    })
            }),
        )
    }

    /// Principal upset of `a`, as a convenience for filter arguments.
    pub fn principal_filter(&self, a: usize) -> &Mask {
        self.order.up(a)
    }
}

/// A frame built from a set family, keeping the sets and their indices.
#[derive(Debug, Clone)]
pub struct SetFrame {
    pub frame: FiniteFrame,
    index: HashMap<Mask, u32>,
    sets: Vec<Mask>,
}

impl SetFrame {
    pub fn index_of(&self, m: &Mask) -> Option<usize> {
        self.index.get(m).map(|&i| i as usize)
    }

    pub fn set(&self, a: usize) -> &Mask {
        &self.sets[a]
    }

    pub fn sets(&self) -> &[Mask] {
        &self.sets
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameJson {
    Generated(FrameGenerator),
    Explicit(PosetJson),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generate", rename_all = "lowercase")]
pub enum FrameGenerator {
    Powerset { n: usize },
    Chain { n: usize },
}
