//! Branch spaces of finite trees and the operators between the upset frame
//! `U(T)` and the branch topology `O(Ξ(T))`: k*, k_*, ker, der, ler, the
//! coverage rules, bar induction, and the presentation of a frame from its
//! tree base.

use serde::Serialize;
use thiserror::Error;

use crate::frame::points::{points, spatial_reflection, Point};
use crate::frame::{FiniteFrame, FrameError, SetFrame};
use crate::mask::Mask;
use crate::nonarch::TreeBase;
use crate::nuclei::{
    enumerate_nuclei, prenucleus_closure, quotient, Axiom, ClosureMap, NucleusError, DEFAULT_NUCLEUS_BOUND,
};
use crate::order::{EnumerationBound, OrderError};
use crate::tree::Tree;

/// Opens frames up to this size have all their nuclei enumerated.
pub const OPENS_NUCLEUS_LIMIT: usize = DEFAULT_NUCLEUS_BOUND;
/// Largest branch count for which a presentation is tabulated.
pub const PRESENTATION_LEAF_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BranchError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Nucleus(#[from] NucleusError),
    #[error("{0} is not an open set of branches")]
    NotOpen(Mask),
    #[error("map on opens is not a nucleus: {0}")]
    NotNucleus(Axiom),
    #[error("not a tree base: {0}")]
    NotTreeBase(String),
    #[error("{0} is not a maximal chain of the tree")]
    NotMaximalChain(Mask),
    #[error("{leaves} branches exceed the limit of {bound}")]
    TooLarge { leaves: usize, bound: usize },
}

/// Branches of a finite tree, which are its root-to-leaf paths, and the basic
/// opens `U_t`.
#[derive(Debug, Clone)]
pub struct BranchSet {
    tree: Tree,
    branches: Vec<Mask>,
    basic: Vec<Mask>,
}

impl BranchSet {
    pub fn new(tree: &Tree) -> Self {
        let leaves = tree.leaves();
        let branches: Vec<Mask> = leaves.iter().map(|&l| tree.path_to(l)).collect();
        let nb = branches.len();
        let basic = (0..tree.size())
            .map(|t| Mask::from_indices(nb, (0..nb).filter(|&i| branches[i].contains(t))))
            .collect();
        Self {
            tree: tree.clone(),
            branches,
            basic,
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn branches(&self) -> &[Mask] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// `U_t`: branches through `t`.
    pub fn basic_open(&self, t: usize) -> &Mask {
        &self.basic[t]
    }

    /// Branches meeting `u`.
    pub fn k_star(&self, u: &Mask) -> Mask {
        Mask::from_indices(self.len(), (0..self.len()).filter(|&i| self.branches[i].intersects(u)))
    }

    /// `⋃ {U_t | t ∈ u}`, which must agree with `k_star`.
    pub fn k_star_by_basics(&self, u: &Mask) -> Mask {
        let mut v = Mask::empty(self.len());
        for t in u.iter() {
            v.union_with(&self.basic[t]);
        }
        v
    }

    /// Nodes all of whose branches lie in `v`.
    pub fn k_lower(&self, v: &Mask) -> Mask {
        Mask::from_indices(
            self.tree.size(),
            (0..self.tree.size()).filter(|&t| self.basic[t].is_subset(v)),
        )
    }

    /// `⋂ {T − ξ | ξ ∉ v}`.
    pub fn k_lower_by_formula(&self, v: &Mask) -> Mask {
        let mut out = Mask::full(self.tree.size());
        for i in (0..self.len()).filter(|&i| !v.contains(i)) {
            out.difference_with(&self.branches[i]);
        }
        out
    }

    /// `V` is open iff `k* k_* V = V`.
    pub fn is_open(&self, v: &Mask) -> bool {
        v.len() == self.len() && &self.k_star(&self.k_lower(v)) == v
    }

    pub fn ker(&self, u: &Mask) -> Mask {
        self.k_lower(&self.k_star(u))
    }

    pub fn der(&self, u: &Mask) -> Mask {
        der_mask(&self.tree, u)
    }
}

/// Nodes whose immediate successors all lie in `u`.
pub fn der_mask(t: &Tree, u: &Mask) -> Mask {
    Mask::from_indices(
        t.size(),
        (0..t.size()).filter(|&a| t.children(a).iter().all(|&c| u.contains(c))),
    )
}

/// Least `n` with `der^n(∅) = der^(n+1)(∅)`.
pub fn cb_rank(t: &Tree) -> usize {
    let mut cur = Mask::empty(t.size());
    let mut n = 0;
    loop {
        let next = der_mask(t, &cur);
        if next == cur {
            return n;
        }
        cur = next;
        n += 1;
    }
}

/// The upset frame, the branch topology, and `k*`, `k_*` between them.
#[derive(Debug, Clone)]
pub struct BranchFrames {
    pub branches: BranchSet,
    pub upsets: SetFrame,
    pub opens: SetFrame,
    /// Upset index to open index.
    pub kstar: Vec<usize>,
    /// Open index to upset index.
    pub klower: Vec<usize>,
}

impl BranchFrames {
    pub fn new(tree: &Tree, bound: EnumerationBound) -> Result<Self, BranchError> {
        let branches = BranchSet::new(tree);
        let upsets = FiniteFrame::alexandroff(&tree.poset(), bound)?;
        let images: Vec<Mask> = upsets.sets().iter().map(|u| branches.k_star(u)).collect();
        let opens = FiniteFrame::from_set_family(images.clone())?;
        let kstar = images.iter().map(|v| opens.index_of(v).unwrap()).collect();
        let klower = opens
            .sets()
            .iter()
            .map(|v| {
                let u = branches.k_lower(v);
                upsets.index_of(&u).ok_or_else(|| BranchError::NotOpen(v.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            branches,
            upsets,
            opens,
            kstar,
            klower,
        })
    }

    pub fn tree(&self) -> &Tree {
        self.branches.tree()
    }

    /// First `(upset, open)` pair breaking `k*U ⊆ V ⇔ U ⊆ k_*V`.
    pub fn adjunction_defect(&self) -> Option<(usize, usize)> {
        let (uf, of) = (&self.upsets.frame, &self.opens.frame);
        for u in uf.elements() {
            for v in of.elements() {
                if of.leq(self.kstar[u], v) != uf.leq(u, self.klower[v]) {
                    return Some((u, v));
                }
            }
        }
        None
    }

    /// First upset where `k*` differs from the union of basic opens.
    pub fn basic_generation_defect(&self) -> Option<usize> {
        self.upsets.sets().iter().position(|u| {
            let b = &self.branches;
            b.k_star(u) != b.k_star_by_basics(u)
        })
    }

    /// Whether `k*` is a surjective frame morphism onto the opens.
    pub fn kstar_is_morphism(&self) -> bool {
        let (uf, of) = (&self.upsets.frame, &self.opens.frame);
        let mut hit = Mask::empty(of.size());
        for u in uf.elements() {
            hit.insert(self.kstar[u]);
            for w in uf.elements() {
                if self.kstar[uf.meet(u, w)] != of.meet(self.kstar[u], self.kstar[w])
                    || self.kstar[uf.join(u, w)] != of.join(self.kstar[u], self.kstar[w])
                {
                    return false;
                }
            }
        }
        hit.is_full()
    }

    fn upset_map(&self, f: impl Fn(&Mask) -> Mask) -> Result<ClosureMap<'_>, BranchError> {
        let table = self
            .upsets
            .sets()
            .iter()
            .map(|u| {
                let img = f(u);
                self.upsets
                    .index_of(&img)
                    .ok_or_else(|| FrameError::NotClosed("image is not an upset").into())
            })
            .collect::<Result<Vec<_>, BranchError>>()?;
        Ok(ClosureMap::new(&self.upsets.frame, table)?)
    }

    pub fn ker(&self) -> Result<ClosureMap<'_>, BranchError> {
        self.upset_map(|u| self.branches.ker(u))
    }

    pub fn der(&self) -> Result<ClosureMap<'_>, BranchError> {
        self.upset_map(|u| self.branches.der(u))
    }

    /// `k_* ∘ β ∘ η ∘ k*` for the quotient `O(Ξ)_j`, where `β ∘ η = j`.
    pub fn ler(&self, j: &ClosureMap<'_>) -> Result<ClosureMap<'_>, BranchError> {
        if let Some(ax) = j.check_nucleus() {
            return Err(BranchError::NotNucleus(ax));
        }
        let table = (0..self.upsets.frame.size())
            .map(|u| self.klower[j.apply(self.kstar[u])])
            .collect();
        Ok(ClosureMap::new(&self.upsets.frame, table)?)
    }

    /// Every nucleus of the opens frame when it is small, else the identity.
    pub fn enumerable_opens_nuclei(&self) -> Result<Vec<ClosureMap<'_>>, BranchError> {
        if self.opens.frame.size() <= OPENS_NUCLEUS_LIMIT {
            Ok(enumerate_nuclei(&self.opens.frame, OPENS_NUCLEUS_LIMIT)?)
        } else {
            Ok(vec![ClosureMap::identity(&self.opens.frame)])
        }
    }

    pub fn coverage_of(&self, c: &ClosureMap<'_>) -> CoverageRelation {
        CoverageRelation {
            covers: c.table().iter().map(|&v| self.upsets.set(v).clone()).collect(),
        }
    }
}

/// `U ⊢ a`, tabulated as the set of covered nodes for each upset index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageRelation {
    pub covers: Vec<Mask>,
}

impl CoverageRelation {
    pub fn from_fn(bf: &BranchFrames, rel: impl Fn(&Mask, usize) -> bool) -> Self {
        let n = bf.tree().size();
        Self {
            covers: bf
                .upsets
                .sets()
                .iter()
                .map(|u| Mask::from_indices(n, (0..n).filter(|&a| rel(u, a))))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleResult {
    pub rule: &'static str,
    pub violations: usize,
    pub first: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub rules: Vec<RuleResult>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.rules.iter().all(|r| r.violations == 0)
    }

    pub fn rule(&self, name: &str) -> Option<&RuleResult> {
        self.rules.iter().find(|r| r.rule == name)
    }
}

/// Scans the five coverage rules. `mono` reads as: `V ⊢ b`, `b ≤ a`,
/// `V ⊆ U` give `U ⊢ a`; `idem` reads as: `U ⊢ a` and `V ⊢ U` give `V ⊢ a`.
pub fn coverage_check(bf: &BranchFrames, c: &CoverageRelation) -> CoverageReport {
    let sets = bf.upsets.sets();
    let poset = bf.tree().poset();
    let m = sets.len();
    let mut rules = Vec::new();
    let mut push = |rule, hits: Vec<String>| {
        rules.push(RuleResult {
            rule,
            violations: hits.len(),
            first: hits.into_iter().next(),
        })
    };

    let upset: Vec<String> = (0..m)
        .filter(|&u| !poset.is_upset(&c.covers[u]))
        .map(|u| format!("covered nodes of {} are not an upset", sets[u]))
        .collect();
    push("upset", upset);

    let infl: Vec<String> = (0..m)
        .filter(|&u| !sets[u].is_subset(&c.covers[u]))
        .map(|u| format!("{} does not cover its own members", sets[u]))
        .collect();
    push("infl", infl);

    let mut mono = Vec::new();
    let mut stability = Vec::new();
    let mut idem = Vec::new();
    for v in 0..m {
        let closed_v = poset.up_closure(&c.covers[v]);
        for u in 0..m {
            if sets[v].is_subset(&sets[u]) && !closed_v.is_subset(&c.covers[u]) {
                mono.push(format!("{} covers more than {}", sets[v], sets[u]));
            }
            let meet = sets[u].intersection(&sets[v]);
            let mi = bf.upsets.index_of(&meet).expect("upsets closed under meets");
            let both = c.covers[u].intersection(&c.covers[v]);
            if !both.is_subset(&c.covers[mi]) {
                stability.push(format!("{} and {} cover more than their meet", sets[u], sets[v]));
            }
            if v != u && sets[u].is_subset(&c.covers[v]) && !c.covers[u].is_subset(&c.covers[v]) {
                idem.push(format!("{} covers {} but not all it covers", sets[v], sets[u]));
            }
        }
    }
    push("mono", mono);
    push("stability", stability);
    push("idem", idem);
    CoverageReport { rules }
}

#[derive(Debug, Clone, Serialize)]
pub struct GbiReport {
    /// Perfect upsets satisfy `U ⊩ a ⇒ a ∈ U`.
    pub bar_induction: bool,
    /// `der^∞ = ker = ler` as tables.
    pub tables_equal: bool,
    /// `der(U) = U ⇒ ler(U) = U`.
    pub perfect_fixed: bool,
    /// The frame of `der`-fixed upsets is spatial.
    pub der_quotient_spatial: bool,
    pub agree: bool,
    pub perfect_upsets: usize,
    pub der_iterations: usize,
    pub der_le_ker: bool,
    /// `der(U) ⊆ ker(U) ∪ leaves` for every upset.
    pub der_le_ker_off_leaves: bool,
    pub ker_le_ler: bool,
}

pub fn gbi_check(bf: &BranchFrames, j: &ClosureMap<'_>) -> Result<GbiReport, BranchError> {
    let der = bf.der()?;
    let ker = bf.ker()?;
    let ler = bf.ler(j)?;
    let (der_inf, der_iterations) = prenucleus_closure(&der)?;
    let uf = &bf.upsets.frame;
    let perfect: Vec<usize> = uf.elements().filter(|&u| der.apply(u) == u).collect();
    let sets = bf.upsets.sets();
    let ler_cov = bf.coverage_of(&ler);

    let bar_induction = perfect.iter().all(|&u| ler_cov.covers[u].is_subset(&sets[u]));
    let tables_equal = der_inf.table() == ker.table() && ker.table() == ler.table();
    let perfect_fixed = perfect.iter().all(|&u| ler.apply(u) == u);
    let q = quotient(&der_inf)?;
    let der_quotient_spatial = spatial_reflection(&q.frame)?.injective;
    let agree = bar_induction == tables_equal
        && tables_equal == perfect_fixed
        && perfect_fixed == der_quotient_spatial;

    let leaves = Mask::from_indices(bf.tree().size(), bf.tree().leaves());
    let der_le_ker_off_leaves = uf.elements().all(|u| {
        sets[der.apply(u)].is_subset(&sets[ker.apply(u)].union(&leaves))
    });
    Ok(GbiReport {
        bar_induction,
        tables_equal,
        perfect_fixed,
        der_quotient_spatial,
        agree,
        perfect_upsets: perfect.len(),
        der_iterations,
        der_le_ker: der.leq(&ker),
        der_le_ker_off_leaves,
        ker_le_ler: ker.leq(&ler),
    })
}

/// The map `η: O(Ξ(T)) → A` of a tree base, tabulated over all sets of
/// branches, with its checks.
#[derive(Debug, Clone, Serialize)]
pub struct Presentation {
    /// `eta[v]` for the open whose branch bits are `v`.
    pub eta: Vec<usize>,
    /// `β(a) = ⋃ {U_x | x ≤ a}` as branch bits.
    pub beta: Vec<u64>,
    pub surjective: bool,
    pub morphism: bool,
    pub fixes_basics: bool,
    /// `η` takes distinct values on distinct opens.
    pub injective: bool,
    /// `η ∘ β = id` with `β` injective.
    pub beta_section: bool,
    /// `β(b) = U_b` for every node `b`.
    pub beta_inverts_on_basics: bool,
    /// Fixed opens of `β ∘ η` correspond one to one with frame elements.
    pub non_quotient_matches: bool,
}

impl Presentation {
    pub fn passed(&self) -> bool {
        self.surjective
            && self.morphism
            && self.fixes_basics
            && self.injective
            && self.beta_section
            && self.beta_inverts_on_basics
            && self.non_quotient_matches
    }
}

pub fn quotient_presentation(f: &FiniteFrame, tb: &TreeBase) -> Result<Presentation, BranchError> {
    tb.verify(f).map_err(BranchError::NotTreeBase)?;
    let bs = BranchSet::new(&tb.tree);
    let nb = bs.len();
    if nb > PRESENTATION_LEAF_LIMIT {
        return Err(BranchError::TooLarge {
            leaves: nb,
            bound: PRESENTATION_LEAF_LIMIT,
        });
    }
    let nodes = tb.tree.size();
    let basic: Vec<u64> = (0..nodes).map(|t| bs.basic_open(t).bits()).collect();
    let count = 1usize << nb;
    let eta: Vec<usize> = (0..count as u64)
        .map(|v| {
            f.join_all(
                (0..nodes)
                    .filter(|&x| basic[x] & !v == 0)
                    .map(|x| tb.node_element[x]),
            )
        })
        .collect();
    let beta: Vec<u64> = f
        .elements()
        .map(|a| {
            (0..nodes)
                .filter(|&x| f.leq(tb.node_element[x], a))
                .fold(0, |acc, x| acc | basic[x])
        })
        .collect();

    let mut hit = Mask::empty(f.size());
    eta.iter().for_each(|&a| hit.insert(a));
    let surjective = hit.is_full();
    let full = (count - 1) as u64;
    let mut morphism = eta[0] == f.bottom() && eta[count - 1] == f.top();
    'outer: for v in 0..count {
        for w in v..count {
            let (ev, ew) = (eta[v], eta[w]);
            if eta[v & w] != f.meet(ev, ew) || eta[v | w] != f.join(ev, ew) {
                morphism = false;
                break 'outer;
            }
        }
    }
    let fixes_basics = (0..nodes).all(|x| eta[basic[x] as usize] == tb.node_element[x]);
    let injective = hit.count() == count;
    let beta_section = beta.iter().enumerate().all(|(a, &b)| eta[b as usize] == a)
        && {
            let mut seen = beta.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == f.size()
        };
    let beta_inverts_on_basics = (0..nodes).all(|x| beta[tb.node_element[x]] == basic[x]);
    let non_fixed: Vec<u64> = (0..count as u64).filter(|&v| beta[eta[v as usize]] == v).collect();
    let non_quotient_matches = non_fixed.len() == f.size()
        && non_fixed.iter().all(|&v| v & !full == 0)
        && {
            let mut imgs: Vec<usize> = non_fixed.iter().map(|&v| eta[v as usize]).collect();
            imgs.sort_unstable();
            imgs.dedup();
            imgs.len() == f.size()
        };
    Ok(Presentation {
        eta,
        beta,
        surjective,
        morphism,
        fixes_basics,
        injective,
        beta_section,
        beta_inverts_on_basics,
        non_quotient_matches,
    })
}

/// Non-redundant splitting of `a` over the levels of a tree base: each
/// level contributes its nodes below `a` that lie under no earlier choice.
/// Empty levels are dropped.
pub fn level_decomposition(f: &FiniteFrame, tb: &TreeBase, a: usize) -> Vec<(usize, Vec<usize>)> {
    if a == f.bottom() {
        return Vec::new();
    }
    if tb.levels.is_empty() {
        return if a == f.top() { vec![(0, vec![a])] } else { Vec::new() };
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for (k, level) in tb.levels.iter().enumerate() {
        let picked: Vec<usize> = level
            .iter()
            .map(|&v| tb.node_element[v])
            .filter(|&b| f.leq(b, a) && !chosen.iter().any(|&c| f.leq(b, c)))
            .collect();
        if !picked.is_empty() {
            chosen.extend(&picked);
            out.push((k, picked));
        }
    }
    out
}

/// `p_C(a) = 1` iff some node of the chain lies below `a`.
pub fn branch_point(f: &FiniteFrame, tb: &TreeBase, chain: &Mask) -> Result<Point, BranchError> {
    let t = &tb.tree;
    let is_branch = t.leaves().iter().any(|&l| &t.path_to(l) == chain);
    if !is_branch {
        return Err(BranchError::NotMaximalChain(chain.clone()));
    }
    let kernel = Mask::from_indices(
        f.size(),
        f.elements().filter(|&a| chain.iter().any(|c| f.leq(tb.node_element[c], a))),
    );
    let p = Point { kernel };
    let morphism = !p.holds(f.bottom())
        && p.holds(f.top())
        && f.elements().all(|a| {
            f.elements().all(|b| {
                p.holds(f.meet(a, b)) == (p.holds(a) && p.holds(b))
                    && p.holds(f.join(a, b)) == (p.holds(a) || p.holds(b))
            })
        });
    if !morphism {
        return Err(FrameError::CrossCheckMismatch(format!("p_C for {chain} is not a frame morphism")).into());
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct VarpiReport {
    pub points: Vec<Point>,
    pub continuous: bool,
    pub injective: bool,
    pub surjective: bool,
}

/// `ϖ: Ξ(T) → pt(A)`, branch to `p_C`, with continuity against every
/// element's open set of points.
pub fn varpi(f: &FiniteFrame, tb: &TreeBase) -> Result<VarpiReport, BranchError> {
    let bs = BranchSet::new(&tb.tree);
    let pts: Vec<Point> = bs
        .branches()
        .iter()
        .map(|c| branch_point(f, tb, c))
        .collect::<Result<_, _>>()?;
    let continuous = f.elements().all(|a| {
        let pre = Mask::from_indices(bs.len(), (0..bs.len()).filter(|&i| pts[i].holds(a)));
        bs.is_open(&pre)
    });
    let mut distinct = pts.clone();
    distinct.sort();
    distinct.dedup();
    let injective = distinct.len() == pts.len();
    let all = points(f)?;
    let surjective = all.iter().all(|p| distinct.contains(p));
    Ok(VarpiReport {
        points: pts,
        continuous,
        injective,
        surjective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonarch::{build_tree_base, NonArchBase};

    fn frames(t: &Tree) -> BranchFrames {
        BranchFrames::new(t, EnumerationBound::default()).unwrap()
    }

    #[test]
    fn branch_space_examples() {
        let one = frames(&Tree::single());
        assert_eq!(one.branches.len(), 1);
        assert_eq!(one.opens.frame.size(), 2);
        let b1 = frames(&Tree::cantor(1));
        assert_eq!(b1.upsets.frame.size(), 5);
        assert_eq!(b1.opens.frame.size(), 4);
        let b2 = frames(&Tree::cantor(2));
        assert_eq!(b2.upsets.frame.size(), 26);
        assert_eq!(b2.opens.frame.size(), 16);
        for bf in [&one, &b1, &b2] {
            assert_eq!(bf.adjunction_defect(), None);
            assert_eq!(bf.basic_generation_defect(), None);
            assert!(bf.kstar_is_morphism());
        }
    }

    #[test]
    fn k_lower_examples() {
        let bs = BranchSet::new(&Tree::cantor(1));
        assert!(bs.k_lower(&Mask::full(2)).is_full());
        assert!(bs.k_lower(&Mask::empty(2)).is_empty());
        // branch 0 runs through node 1
        assert_eq!(bs.k_lower(&Mask::singleton(2, 0)).to_vec(), vec![1]);
        for v in 0..4u64 {
            let v = Mask::from_bits(2, v);
            assert_eq!(bs.k_lower(&v), bs.k_lower_by_formula(&v));
        }
    }

    #[test]
    fn ker_and_der_examples() {
        let bs = BranchSet::new(&Tree::cantor(1));
        let l1 = Mask::singleton(3, 1);
        assert_eq!(bs.ker(&l1), l1);
        assert!(bs.ker(&Mask::from_indices(3, [1, 2])).is_full());
        assert!(bs.ker(&Mask::empty(3)).is_empty());
        assert_eq!(bs.der(&Mask::empty(3)).to_vec(), vec![1, 2]);
        assert!(der_mask(&Tree::single(), &Mask::empty(1)).is_full());
        assert!(frames(&Tree::cantor(2)).ker().unwrap().is_nucleus());
    }

    #[test]
    fn ranks() {
        assert_eq!(cb_rank(&Tree::single()), 1);
        assert_eq!(cb_rank(&Tree::cantor(1)), 2);
        for d in 0..=6 {
            assert_eq!(cb_rank(&Tree::cantor(d)), d + 1);
        }
    }

    #[test]
    fn der_closure_iterations_on_binary_depth_two() {
        let bf = frames(&Tree::cantor(2));
        let (c, k) = prenucleus_closure(&bf.der().unwrap()).unwrap();
        assert_eq!(k, 3);
        assert!(c.table().iter().all(|&u| u == bf.upsets.frame.top()));
    }

    #[test]
    fn coverage_examples() {
        let bf = frames(&Tree::cantor(2));
        let id = CoverageRelation::from_fn(&bf, |u, a| u.contains(a));
        assert!(coverage_check(&bf, &id).passed());
        let ker = bf.coverage_of(&bf.ker().unwrap());
        assert!(coverage_check(&bf, &ker).passed());
        let bad = CoverageRelation::from_fn(&bf, |u, a| !u.contains(a));
        assert!(coverage_check(&bf, &bad).rule("infl").unwrap().violations > 0);
    }

    #[test]
    fn ler_examples() {
        let bf = frames(&Tree::cantor(1));
        let of = &bf.opens.frame;
        let ker = bf.ker().unwrap();
        assert_eq!(bf.ler(&ClosureMap::identity(of)).unwrap(), ker);
        let top = bf.ler(&ClosureMap::constant_top(of)).unwrap();
        assert!(top.table().iter().all(|&u| u == bf.upsets.frame.top()));
        let u = bf.opens.index_of(&Mask::singleton(2, 0)).unwrap();
        let closed = bf.ler(&ClosureMap::closed(of, u)).unwrap();
        assert!(ker.leq(&closed) && ker != closed);
    }

    #[test]
    fn gbi_report_on_small_trees() {
        for t in [Tree::single(), Tree::cantor(1), Tree::cantor(2)] {
            let bf = frames(&t);
            for j in bf.enumerable_opens_nuclei().unwrap() {
                let r = gbi_check(&bf, &j).unwrap();
                assert!(r.bar_induction && r.perfect_fixed && r.der_quotient_spatial);
                assert_eq!(r.perfect_upsets, 1);
                assert!(r.der_le_ker_off_leaves && r.ker_le_ler);
                // leaves lie in der(∅) but not in ker(∅)
                assert!(!r.der_le_ker);
                assert!(!r.tables_equal);
            }
        }
    }

    fn powerset_tree_base(n: usize, extra: &[usize]) -> (FiniteFrame, NonArchBase) {
        let f = FiniteFrame::powerset(n);
        let mut members: Vec<usize> = (0..n).map(|i| 1 << i).collect();
        members.extend_from_slice(extra);
        members.push(f.top());
        let b = NonArchBase::new(&f, Mask::from_indices(f.size(), members)).unwrap();
        (f, b)
    }

    #[test]
    fn presentation_examples() {
        let (f, b) = powerset_tree_base(2, &[]);
        let tb = build_tree_base(&f, &b).unwrap();
        let p = quotient_presentation(&f, &tb).unwrap();
        assert!(p.passed());
        let (f, b) = powerset_tree_base(3, &[0b011]);
        let tb = build_tree_base(&f, &b).unwrap();
        assert!(quotient_presentation(&f, &tb).unwrap().passed());
        let one = FiniteFrame::chain(1);
        let tb = build_tree_base(&one, &NonArchBase::new(&one, Mask::full(1)).unwrap()).unwrap();
        let p = quotient_presentation(&one, &tb).unwrap();
        assert!(p.surjective && p.morphism && !p.injective);
        assert!(p.eta.iter().all(|&a| a == 0));
    }

    #[test]
    fn level_decomposition_examples() {
        let (f, b) = powerset_tree_base(3, &[0b011]);
        let tb = build_tree_base(&f, &b).unwrap();
        assert_eq!(level_decomposition(&f, &tb, f.top()), vec![(0, vec![0b011, 0b100])]);
        assert!(level_decomposition(&f, &tb, 0).is_empty());
        assert_eq!(level_decomposition(&f, &tb, 0b101), vec![(0, vec![0b100]), (1, vec![0b001])]);
    }

    #[test]
    fn branch_points() {
        let (f, b) = powerset_tree_base(2, &[]);
        let tb = build_tree_base(&f, &b).unwrap();
        let leaf = tb.node_of(0b01).unwrap();
        let p = branch_point(&f, &tb, &tb.tree.path_to(leaf)).unwrap();
        assert_eq!(p.kernel.to_vec(), vec![0b01, 0b11]);
        assert!(p.holds(f.top()) && !p.holds(f.bottom()));
        assert!(branch_point(&f, &tb, &Mask::singleton(3, 0)).is_err());

        let (f, b) = powerset_tree_base(4, &[0b0011, 0b1100]);
        let tb = build_tree_base(&f, &b).unwrap();
        let r = varpi(&f, &tb).unwrap();
        assert!(r.continuous && r.injective && r.surjective);
    }
}
