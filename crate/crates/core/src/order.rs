//! Finite posets, their upset lattices and maximal chains.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Mask;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("relation table is not square")]
    NotSquare,
    #[error("element {0} is not related to itself")]
    NotReflexive(usize),
    #[error("elements {0} and {1} are mutually related but distinct")]
    NotAntisymmetric(usize, usize),
    #[error("{0} <= {1} and {1} <= {2} but not {0} <= {2}")]
    NotTransitive(usize, usize, usize),
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("enumeration needs {needed} members, above the bound of 2^{bound}")]
    TooLarge { needed: u128, bound: u32 },
}

/// Subset-enumeration bound, as a power of two.
///
/// Posets with at most `bits` elements are enumerated by filtering all
/// subsets; forests of any size are enumerated by the product recurrence as
/// long as the resulting family has at most `2^bits` members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBound {
    pub bits: u32,
}

pub const BOUND_ENV: &str = "LOCUS_ENUM_BOUND";

impl Default for EnumerationBound {
    fn default() -> Self {
        Self { bits: 20 }
    }
}

impl EnumerationBound {
    /// Default bound, overridden by `LOCUS_ENUM_BOUND` when it parses.
    pub fn from_env() -> Self {
        std::env::var(BOUND_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&bits: &u32| (1..=40).contains(&bits))
            .map(|bits| Self { bits })
            .unwrap_or_default()
    }

    pub fn max_members(self) -> u128 {
        1u128 << self.bits
    }
}

/// A finite partial order on `0..size`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    up: Vec<Mask>,
    down: Vec<Mask>,
    labels: Vec<String>,
}

impl std::fmt::Debug for Poset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Poset")
            .field("labels", &self.labels)
            .field("up", &self.up)
            .finish()
    }
}

impl Poset {
    /// Checks reflexivity, antisymmetry and transitivity of `leq[i][j]`
    /// (read as `i <= j`), reporting the first violation found.
    #[allow(clippy::needless_range_loop)]
    pub fn validate(leq: &[Vec<bool>]) -> Result<Poset, OrderError> {
        let n = leq.len();
        if leq.iter().any(|row| row.len() != n) {
            return Err(OrderError::NotSquare);
        }
        for (i, row) in leq.iter().enumerate() {
            if !row[i] {
                return Err(OrderError::NotReflexive(i));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(OrderError::NotAntisymmetric(i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j || !leq[i][j] {
                    continue;
                }
                for k in 0..n {
                    if leq[j][k] && !leq[i][k] {
                        return Err(OrderError::NotTransitive(i, j, k));
                    }
                }
            }
        }
        let up = (0..n)
            .map(|i| Mask::from_indices(n, (0..n).filter(|&j| leq[i][j])))
            .collect();
        Ok(Self::from_up_sets(up, default_labels(n)))
    }

    /// Builds a poset from principal upsets already known to form a partial
    /// order (e.g. subset inclusion on a set family).
    pub(crate) fn from_up_sets(up: Vec<Mask>, labels: Vec<String>) -> Poset {
        let n = up.len();
        let mut down = vec![Mask::empty(n); n];
        for (i, u) in up.iter().enumerate() {
            for j in u.iter() {
                down[j].insert(i);
            }
        }
        Poset { up, down, labels }
    }

    pub fn discrete(n: usize) -> Poset {
        Self::from_up_sets(
            (0..n).map(|i| Mask::singleton(n, i)).collect(),
            default_labels(n),
        )
    }

    pub fn chain(n: usize) -> Poset {
        Self::from_up_sets(
            (0..n).map(|i| Mask::from_indices(n, i..n)).collect(),
            default_labels(n),
        )
    }

    /// Parses the JSON poset format; missing reflexive pairs are added and the
    /// transitive closure is taken once the relation is known to be acyclic.
    #[allow(clippy::needless_range_loop)]
    pub fn from_json(spec: &PosetJson) -> Result<Poset, OrderError> {
        let n = spec.elements.len();
        let mut index = HashMap::new();
        for (i, l) in spec.elements.iter().enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return Err(OrderError::DuplicateLabel(l.clone()));
            }
        }
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| OrderError::UnknownLabel(l.to_string()))
        };
        let mut rel = vec![vec![false; n]; n];
        for (i, row) in rel.iter_mut().enumerate() {
            row[i] = true;
        }
        for [a, b] in &spec.leq {
            rel[lookup(a)?][lookup(b)?] = true;
        }
        // Warshall closure; a cycle shows up as a mutually related pair.
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut p = Self::validate(&rel)?;
        p.labels = spec.elements.clone();
        Ok(p)
    }

    pub fn to_json(&self) -> PosetJson {
        let mut leq = Vec::new();
        for i in 0..self.size() {
            for j in self.upper_covers(i).iter() {
                leq.push([self.labels[i].clone(), self.labels[j].clone()]);
            }
        }
        PosetJson {
            elements: self.labels.clone(),
            leq,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Poset {
        assert_eq!(labels.len(), self.size());
        self.labels = labels;
        self
    }

    pub fn size(&self) -> usize {
        self.up.len()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// `{x | a <= x}`.
    pub fn up(&self, a: usize) -> &Mask {
        &self.up[a]
    }

    /// `{x | x <= a}`.
    pub fn down(&self, a: usize) -> &Mask {
        &self.down[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn upper_covers(&self, a: usize) -> Mask {
        let mut strict = self.up[a].clone();
        strict.remove(a);
        let mut covers = strict.clone();
        for b in strict.iter() {
            let mut above = self.up[b].clone();
            above.remove(b);
            covers.difference_with(&above);
        }
        covers
    }

    pub fn lower_covers(&self, a: usize) -> Mask {
        let mut strict = self.down[a].clone();
        strict.remove(a);
        let mut covers = strict.clone();
        for b in strict.iter() {
            let mut below = self.down[b].clone();
            below.remove(b);
            covers.difference_with(&below);
        }
        covers
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.size()).filter(|&a| self.down[a].count() == 1).collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.size()).filter(|&a| self.up[a].count() == 1).collect()
    }

    pub fn is_upset(&self, m: &Mask) -> bool {
        m.iter().all(|a| self.up[a].is_subset(m))
    }

    pub fn is_chain(&self, m: &Mask) -> bool {
        let v = m.to_vec();
        v.iter()
            .enumerate()
            .all(|(k, &a)| v[k + 1..].iter().all(|&b| self.comparable(a, b)))
    }

    /// Smallest upset containing `m`.
    pub fn up_closure(&self, m: &Mask) -> Mask {
        let mut out = Mask::empty(self.size());
        for a in m.iter() {
            out.union_with(&self.up[a]);
        }
        out
    }

    /// Parent links when every element has at most one lower cover, i.e. the
    /// Hasse diagram is a forest rooted at the minimal elements.
    pub fn forest_parents(&self) -> Option<Vec<Option<usize>>> {
        (0..self.size())
            .map(|a| {
                let lc = self.lower_covers(a);
                match lc.count() {
                    0 => Some(None),
                    1 => Some(lc.first()),
                    _ => None,
                }
            })
            .collect()
    }

    /// Hasse diagram in DOT, drawn bottom-up.
    pub fn hasse_dot(&self) -> String {
        let mut out = String::from("digraph hasse {\n  rankdir=BT;\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label={l:?}];");
        }
        for i in 0..self.size() {
            for j in self.upper_covers(i).iter() {
                let _ = writeln!(out, "  n{i} -> n{j};");
            }
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<[String; 2]>,
}

/// The upward-closed subsets of a poset in canonical (numeric mask) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpsetFamily {
    members: Vec<Mask>,
}

impl UpsetFamily {
    pub fn members(&self) -> &[Mask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<Mask> {
        self.members
    }
}

/// Number of upsets of a forest-shaped poset, by `1 + prod(children)` per
/// subtree and a product over the roots.
pub fn count_forest_upsets(parents: &[Option<usize>]) -> u128 {
    let n = parents.len();
    let children = children_lists(parents);
    fn subtree(v: usize, children: &[Vec<usize>]) -> u128 {
        children[v]
            .iter()
            .map(|&c| subtree(c, children))
            .fold(1u128, |acc, x| acc.saturating_mul(x))
            .saturating_add(1)
    }
    (0..n)
        .filter(|&v| parents[v].is_none())
        .map(|r| subtree(r, &children))
        .fold(1u128, |acc, x| acc.saturating_mul(x))
}

fn children_lists(parents: &[Option<usize>]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); parents.len()];
    for (v, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(v);
        }
    }
    children
}

/// All upsets of `p`, canonically ordered.
pub fn enumerate_upsets(p: &Poset, bound: EnumerationBound) -> Result<UpsetFamily, OrderError> {
    let mut members = match p.forest_parents() {
        Some(parents) => {
            let needed = count_forest_upsets(&parents);
            if needed > bound.max_members() {
                return Err(OrderError::TooLarge {
                    needed,
                    bound: bound.bits,
                });
            }
            forest_upsets(&parents)
        }
        None => {
            if p.size() as u32 > bound.bits {
                return Err(OrderError::TooLarge {
                    needed: 1u128 << p.size().min(127),
                    bound: bound.bits,
                });
            }
            filter_subsets(p)
        }
    };
    members.sort();
    Ok(UpsetFamily { members })
}

fn filter_subsets(p: &Poset) -> Vec<Mask> {
    let n = p.size();
    let ups: Vec<u64> = (0..n).map(|a| p.up(a).bits()).collect();
    (0u64..1 << n)
        .filter(|&s| {
            let mut rest = s;
            while rest != 0 {
                let a = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if ups[a] & !s != 0 {
                    return false;
                }
            }
            true
        })
        .map(|s| Mask::from_bits(n, s))
        .collect()
}

fn forest_upsets(parents: &[Option<usize>]) -> Vec<Mask> {
    let n = parents.len();
    let children = children_lists(parents);
    fn subtree(v: usize, n: usize, children: &[Vec<usize>]) -> (Mask, Vec<Mask>) {
        let mut whole = Mask::singleton(n, v);
        let mut product = vec![Mask::empty(n)];
        for &c in &children[v] {
            let (cw, cu) = subtree(c, n, children);
            whole.union_with(&cw);
            product = cross(&product, &cu);
        }
        product.push(whole.clone());
        (whole, product)
    }
    let mut acc = vec![Mask::empty(n)];
    for r in (0..n).filter(|&v| parents[v].is_none()) {
        let (_, ups) = subtree(r, n, &children);
        acc = cross(&acc, &ups);
    }
    acc
}

fn cross(a: &[Mask], b: &[Mask]) -> Vec<Mask> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.union(y));
        }
    }
    out
}

/// Every maximal chain, as a mask, in canonical order.
///
/// In a finite poset the maximal chains are exactly the cover paths from a
/// minimal element to a maximal one.
pub fn maximal_chains(p: &Poset) -> Vec<Mask> {
    let n = p.size();
    let covers: Vec<Vec<usize>> = (0..n).map(|a| p.upper_covers(a).to_vec()).collect();
    let mut out = Vec::new();
    let mut path = Mask::empty(n);
    fn walk(a: usize, covers: &[Vec<usize>], path: &mut Mask, out: &mut Vec<Mask>) {
        path.insert(a);
        if covers[a].is_empty() {
            out.push(path.clone());
        } else {
            for &b in &covers[a] {
                walk(b, covers, path, out);
            }
        }
        path.remove(a);
    }
    for m in p.minimal_elements() {
        walk(m, &covers, &mut path, &mut out);
    }
    out.sort();
    out
}

/// Maximal chains through `required` that avoid every element of `excluded`.
pub fn chains_through(p: &Poset, required: usize, excluded: &Mask) -> Vec<Mask> {
    maximal_chains(p)
        .into_iter()
        .filter(|c| c.contains(required) && !c.intersects(excluded))
        .collect()
}
