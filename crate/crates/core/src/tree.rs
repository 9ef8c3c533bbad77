//! Finite rooted trees: generators, exhaustive shapes, JSON and DOT.
//!
//! The tree order puts the root at the bottom: `a ≤ b` iff `a` is an
//! ancestor of `b` (or `a = b`).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Mask;
use crate::order::Poset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("tree has {0} roots")]
    RootCount(usize),
    #[error("parent links form a cycle through `{0}`")]
    Cycle(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("generator `{0}` needs width >= 1")]
    BadWidth(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
    labels: Vec<String>,
    root: usize,
}

impl Tree {
    /// Builds a tree from parent links; children keep ascending index order.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Tree, TreeError> {
        let n = parent.len();
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_parents_labelled(parent, labels)
    }

    fn from_parents_labelled(
        parent: Vec<Option<usize>>,
        labels: Vec<String>,
    ) -> Result<Tree, TreeError> {
        let n = parent.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        let mut level = vec![usize::MAX; n];
        let mut stack = vec![roots[0]];
        level[roots[0]] = 0;
        let mut seen = 1;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                level[c] = level[v] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != n {
            let v = (0..n).find(|&v| level[v] == usize::MAX).unwrap();
            return Err(TreeError::Cycle(labels[v].clone()));
        }
        Ok(Tree {
            parent,
            children,
            level,
            labels,
            root: roots[0],
        })
    }

    pub fn single() -> Tree {
        Self::from_parents(vec![None]).unwrap()
    }

    /// Complete `width`-ary tree of the given depth, nodes in BFS order.
    pub fn complete(width: usize, depth: usize) -> Tree {
        let mut parent = vec![None];
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &v in &frontier {
                for _ in 0..width {
                    parent.push(Some(v));
                    next.push(parent.len() - 1);
                }
            }
            frontier = next;
        }
        Self::from_parents(parent).unwrap()
    }

    /// Binary truncation of the Cantor tree.
    pub fn cantor(depth: usize) -> Tree {
        Self::complete(2, depth)
    }

    /// Width-bounded truncation of the Baire tree: every node up to `depth`
    /// has `width` successors.
    pub fn baire(width: usize, depth: usize) -> Result<Tree, TreeError> {
        if width == 0 {
            return Err(TreeError::BadWidth("baire"));
        }
        Ok(Self::complete(width, depth))
    }

    /// Truncation of a König-style tree: the root carries a spine of every
    /// length `1..=depth`, and each spine node has `width - 1` extra leaves.
    pub fn koenig(width: usize, depth: usize) -> Result<Tree, TreeError> {
        if width == 0 {
            return Err(TreeError::BadWidth("koenig"));
        }
        let mut parent = vec![None];
        for len in 1..=depth {
            let mut at = 0;
            for _ in 0..len {
                parent.push(Some(at));
                let spine = parent.len() - 1;
                for _ in 1..width {
                    parent.push(Some(spine));
                }
                at = spine;
            }
        }
        Ok(Self::from_parents(parent).unwrap())
    }

    /// Random recursive tree: node `i` picks a parent uniformly in `0..i`.
    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Tree {
        let parent = (0..n.max(1))
            .map(|i| (i > 0).then(|| rng.random_range(0..i)))
            .collect();
        Self::from_parents(parent).unwrap()
    }

    pub fn size(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn level_of(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Tree {
        assert_eq!(labels.len(), self.size());
        self.labels = labels;
        self
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.size()).filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn height(&self) -> usize {
        self.level.iter().copied().max().unwrap_or(0)
    }

    /// Nodes at each depth, index order within a level.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.height() + 1];
        for v in 0..self.size() {
            out[self.level[v]].push(v);
        }
        out
    }

    /// `a` is `b` or lies on the path from the root to `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut x = Some(b);
        while let Some(v) = x {
            if v == a {
                return true;
            }
            x = self.parent[v];
        }
        false
    }

    /// Root-to-node path as a mask.
    pub fn path_to(&self, v: usize) -> Mask {
        let mut m = Mask::empty(self.size());
        let mut x = Some(v);
        while let Some(u) = x {
            m.insert(u);
            x = self.parent[u];
        }
        m
    }

    /// Nodes in the subtree rooted at `v`.
    pub fn subtree(&self, v: usize) -> Mask {
        let mut m = Mask::empty(self.size());
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            m.insert(u);
            stack.extend_from_slice(&self.children[u]);
        }
        m
    }

    pub fn poset(&self) -> Poset {
        let up = (0..self.size()).map(|v| self.subtree(v)).collect();
        Poset::from_up_sets(up, self.labels.clone())
    }

    /// Canonical code of the unordered shape, equal for isomorphic trees.
    pub fn shape_code(&self) -> String {
        fn code(t: &Tree, v: usize) -> String {
            let mut parts: Vec<String> = t.children[v].iter().map(|&c| code(t, c)).collect();
            parts.sort();
            format!("({})", parts.concat())
        }
        code(self, self.root)
    }

    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.shape_code() == other.shape_code()
    }

    pub fn from_json(spec: &TreeJson) -> Result<Tree, TreeError> {
        match spec {
            TreeJson::Explicit { nodes, parent } => {
                let mut index = HashMap::new();
                for (i, l) in nodes.iter().enumerate() {
                    if index.insert(l.as_str(), i).is_some() {
                        return Err(TreeError::DuplicateNode(l.clone()));
                    }
                }
                let mut links = vec![None; nodes.len()];
                for (c, p) in parent {
                    let ci = *index.get(c.as_str()).ok_or_else(|| TreeError::UnknownNode(c.clone()))?;
                    let pi = *index.get(p.as_str()).ok_or_else(|| TreeError::UnknownNode(p.clone()))?;
                    links[ci] = Some(pi);
                }
                Self::from_parents_labelled(links, nodes.clone())
            }
            TreeJson::Generated(g) => match *g {
                TreeGenerator::Cantor { depth } => Ok(Self::cantor(depth)),
                TreeGenerator::Baire { width, depth } => Self::baire(width, depth),
                TreeGenerator::Koenig { width, depth } => Self::koenig(width, depth),
            },
        }
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson::Explicit {
            nodes: self.labels.clone(),
            parent: (0..self.size())
                .filter_map(|v| self.parent[v].map(|p| (self.labels[v].clone(), self.labels[p].clone())))
                .collect(),
        }
    }

    /// DOT drawing with the root at the bottom and levels annotated.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  rankdir=BT;\n");
        for (depth, nodes) in self.levels().iter().enumerate() {
            let _ = write!(out, "  {{ rank=same;");
            for &v in nodes {
                let _ = write!(out, " n{v};");
            }
            out.push_str(" }\n");
            for &v in nodes {
                let _ = writeln!(out, "  n{v} [label=\"{} (L{depth})\"];", self.labels[v].replace('"', "'"));
            }
        }
        for v in 0..self.size() {
            for &c in &self.children[v] {
                let _ = writeln!(out, "  n{v} -> n{c};");
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeJson {
    Generated(TreeGenerator),
    Explicit {
        nodes: Vec<String>,
        parent: BTreeMap<String, String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generate", rename_all = "lowercase")]
pub enum TreeGenerator {
    Cantor {
        depth: usize,
    },
    Baire {
        #[serde(default = "default_width")]
        width: usize,
        depth: usize,
    },
    Koenig {
        #[serde(default = "default_width")]
        width: usize,
        depth: usize,
    },
}

fn default_width() -> usize {
    2
}

/// Every unordered rooted tree with exactly `n` nodes, one per isomorphism
/// class, in a fixed order.
pub fn all_shapes(n: usize) -> Vec<Tree> {
    if n == 0 {
        return Vec::new();
    }
    // shapes[k] lists the trees with k nodes as child-shape lists, where each
    // child is (size, index into shapes[size]).
    let mut shapes: Vec<Vec<Vec<(usize, usize)>>> = vec![Vec::new(), vec![Vec::new()]];
    for k in 2..=n {
        let mut out = Vec::new();
        let mut forest = Vec::new();
        forests(k - 1, (k - 1, usize::MAX), &shapes, &mut forest, &mut out);
        shapes.push(out);
    }
    shapes[n]
        .iter()
        .map(|kids| {
            let mut parent = vec![None];
            build(kids, 0, &shapes, &mut parent);
            Tree::from_parents(parent).unwrap()
        })
        .collect()
}

/// Non-increasing multisets of shapes with total size `remaining`, each
/// shape at most `cap` in (size, index) order.
fn forests(
    remaining: usize,
    cap: (usize, usize),
    shapes: &[Vec<Vec<(usize, usize)>>],
    cur: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if remaining == 0 {
        out.push(cur.clone());
        return;
    }
    for size in (1..=remaining.min(cap.0)).rev() {
        let limit = if size == cap.0 { cap.1.min(shapes[size].len().saturating_sub(1)) } else { shapes[size].len() - 1 };
        for idx in (0..=limit).rev() {
            cur.push((size, idx));
            forests(remaining - size, (size, idx), shapes, cur, out);
            cur.pop();
        }
    }
}

fn build(
    kids: &[(usize, usize)],
    at: usize,
    shapes: &[Vec<Vec<(usize, usize)>>],
    parent: &mut Vec<Option<usize>>,
) {
    for &(size, idx) in kids {
        parent.push(Some(at));
        let me = parent.len() - 1;
        build(&shapes[size][idx], me, shapes, parent);
    }
}
