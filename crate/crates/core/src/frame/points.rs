//! Points of a finite frame, three ways, and the spatial reflection.

use serde::Serialize;

use super::{FiniteFrame, FrameError, SetFrame};
use crate::mask::Mask;
use crate::nonarch::TreeBase;

/// A frame morphism to the two-element frame, stored by its kernel: the
/// elements sent to 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Point {
    pub kernel: Mask,
}

impl Point {
    pub fn holds(&self, a: usize) -> bool {
        self.kernel.contains(a)
    }
}

/// Whether `kernel` is a completely prime filter of `f`.
pub fn is_completely_prime_filter(f: &FiniteFrame, kernel: &Mask) -> bool {
    if !kernel.contains(f.top()) || kernel.contains(f.bottom()) {
        return false;
    }
    if !f.order().is_upset(kernel) {
        return false;
    }
    let members = kernel.to_vec();
    for (k, &a) in members.iter().enumerate() {
        for &b in &members[k..] {
            if !kernel.contains(f.meet(a, b)) {
                return false;
            }
        }
    }
    for x in f.elements().filter(|x| !kernel.contains(*x)) {
        for y in f.elements().filter(|y| !kernel.contains(*y)) {
            if kernel.contains(f.join(x, y)) {
                return false;
            }
        }
    }
    true
}

/// Frame morphisms `A → 2`, by backtracking along a linear extension with
/// meet, join and monotonicity pruning.
pub fn points_by_morphisms(f: &FiniteFrame) -> Vec<Point> {
    let n = f.size();
    let mut order: Vec<usize> = f.elements().collect();
    order.sort_by_key(|&a| (f.order().down(a).count(), a));
    let mut position = vec![0usize; n];
    for (k, &a) in order.iter().enumerate() {
        position[a] = k;
    }
    // joins landing on each element, from strictly smaller operands
    let mut join_pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            let j = f.join(a, b);
            if j != a && j != b {
                join_pairs[j].push((a, b));
            }
        }
    }

    struct Search<'a> {
        f: &'a FiniteFrame,
        order: &'a [usize],
        position: &'a [usize],
        join_pairs: &'a [Vec<(usize, usize)>],
        value: Vec<bool>,
        out: Vec<Point>,
    }

    impl Search<'_> {
        fn consistent(&self, k: usize, x: usize, v: bool) -> bool {
            let f = self.f;
            if x == f.bottom() && v || x == f.top() && !v {
                return false;
            }
            for &y in &self.order[..k] {
                let fy = self.value[y];
                if f.leq(y, x) && fy && !v {
                    return false;
                }
                let m = f.meet(x, y);
                let fm = if m == x { v } else { self.value[m] };
                debug_assert!(m == x || self.position[m] < k);
                if fm != (v && fy) {
                    return false;
                }
            }
            self.join_pairs[x]
                .iter()
                .all(|&(a, b)| v == (self.value[a] || self.value[b]))
        }

        fn run(&mut self, k: usize) {
            if k == self.order.len() {
                let kernel = Mask::from_indices(
                    self.value.len(),
                    (0..self.value.len()).filter(|&a| self.value[a]),
                );
                self.out.push(Point { kernel });
                return;
            }
            let x = self.order[k];
            for v in [false, true] {
                if self.consistent(k, x, v) {
                    self.value[x] = v;
                    self.run(k + 1);
                }
            }
            self.value[x] = false;
        }
    }

    let mut s = Search {
        f,
        order: &order,
        position: &position,
        join_pairs: &join_pairs,
        value: vec![false; n],
        out: Vec::new(),
    };
    s.run(0);
    let mut out = s.out;
    out.sort();
    out
}

/// Completely prime filters; every filter of a finite lattice is principal,
/// so the candidates are the principal filters.
pub fn points_by_filters(f: &FiniteFrame) -> Vec<Point> {
    let mut out: Vec<Point> = f
        .elements()
        .map(|a| f.principal_filter(a).clone())
        .filter(|k| is_completely_prime_filter(f, k))
        .map(|kernel| Point { kernel })
        .collect();
    out.sort();
    out
}

/// Meet-irreducible elements `p`, each giving the kernel `{x | x ≰ p}`.
pub fn points_by_meet_irreducibles(f: &FiniteFrame) -> Vec<Point> {
    let mut out: Vec<Point> = f
        .meet_irreducibles()
        .iter()
        .map(|p| Point {
            kernel: f.order().down(p).complement(),
        })
        .collect();
    out.sort();
    out
}

/// The point space, after checking that all three descriptions agree.
pub fn points(f: &FiniteFrame) -> Result<Vec<Point>, FrameError> {
    let by_morphism = points_by_morphisms(f);
    let by_filter = points_by_filters(f);
    let by_irreducible = points_by_meet_irreducibles(f);
    if by_morphism != by_filter {
        return Err(FrameError::CrossCheckMismatch(format!(
            "{} morphisms vs {} completely prime filters",
            by_morphism.len(),
            by_filter.len()
        )));
    }
    if by_morphism != by_irreducible {
        return Err(FrameError::CrossCheckMismatch(format!(
            "{} morphisms vs {} meet-irreducibles",
            by_morphism.len(),
            by_irreducible.len()
        )));
    }
    Ok(by_morphism)
}

/// `U: A → O(pt A)`, `U(a) = {p | p(a) = 1}`.
#[derive(Debug, Clone)]
pub struct SpatialReflection {
    pub points: Vec<Point>,
    /// `table[a]` is `U(a)` as a mask over `points`.
    pub table: Vec<Mask>,
    pub image: SetFrame,
    pub is_morphism: bool,
    pub injective: bool,
}

pub fn spatial_reflection(f: &FiniteFrame) -> Result<SpatialReflection, FrameError> {
    let pts = points(f)?;
    let np = pts.len();
    let table: Vec<Mask> = f
        .elements()
        .map(|a| Mask::from_indices(np, (0..np).filter(|&i| pts[i].holds(a))))
        .collect();
    let mut is_morphism =
        table[f.bottom()].is_empty() && table[f.top()].is_full();
    for a in f.elements() {
        for b in f.elements() {
            is_morphism &= table[f.meet(a, b)] == table[a].intersection(&table[b]);
            is_morphism &= table[f.join(a, b)] == table[a].union(&table[b]);
        }
    }
    let mut distinct = table.clone();
    distinct.sort();
    distinct.dedup();
    let injective = distinct.len() == f.size();
    let image = FiniteFrame::from_set_family(distinct)?;
    Ok(SpatialReflection {
        points: pts,
        table,
        image,
        is_morphism,
        injective,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PointTreeViolation {
    /// A point sends two distinct nodes of one level to 1.
    TwoNodesOnLevel { point: usize, level: usize, nodes: (usize, usize) },
    /// Frame order and inclusion of `U(b)` disagree on this node pair.
    OrderMismatch { nodes: (usize, usize) },
    /// `U(a)` is not the union of the `U(b)` for nodes `b ≤ a`.
    NotABasis { element: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct PointTreeReport {
    pub at_most_one_per_level: bool,
    pub order_isomorphic: bool,
    pub basis: bool,
    pub violations: Vec<PointTreeViolation>,
}

impl PointTreeReport {
    pub fn passed(&self) -> bool {
        self.at_most_one_per_level && self.order_isomorphic && self.basis
    }
}

/// Checks the point-level picture of a tree base: one node per level per
/// point, `b ≤ b' ⇔ U(b) ⊆ U(b')`, and `{U(b)}` a basis of `O(pt A)`.
pub fn check_point_tree(f: &FiniteFrame, tb: &TreeBase) -> Result<PointTreeReport, FrameError> {
    let sr = spatial_reflection(f)?;
    let mut violations = Vec::new();
    for (level, nodes) in tb.levels.iter().enumerate() {
        for (pi, p) in sr.points.iter().enumerate() {
            let hit: Vec<usize> = nodes
                .iter()
                .filter(|&&v| p.holds(tb.node_element[v]))
                .copied()
                .collect();
            if hit.len() > 1 {
                violations.push(PointTreeViolation::TwoNodesOnLevel {
                    point: pi,
                    level,
                    nodes: (hit[0], hit[1]),
                });
            }
        }
    }
    let at_most_one_per_level = violations.is_empty();
    let nn = tb.node_element.len();
    let mut order_isomorphic = true;
    for x in 0..nn {
        for y in 0..nn {
            let (bx, by) = (tb.node_element[x], tb.node_element[y]);
            let by_frame = f.leq(bx, by);
            let by_points = sr.table[bx].is_subset(&sr.table[by]);
            let by_tree = tb.tree.is_ancestor(y, x);
            if by_frame != by_points || by_frame != by_tree {
                order_isomorphic = false;
                violations.push(PointTreeViolation::OrderMismatch { nodes: (x, y) });
            }
        }
    }
    let mut basis = true;
    for a in f.elements() {
        let mut u = Mask::empty(sr.points.len());
        for &b in tb.node_element.iter().filter(|&&b| f.leq(b, a)) {
            u.union_with(&sr.table[b]);
        }
        if u != sr.table[a] {
            basis = false;
            violations.push(PointTreeViolation::NotABasis { element: a });
        }
    }
    Ok(PointTreeReport {
        at_most_one_per_level,
        order_isomorphic,
        basis,
        violations,
    })
}
