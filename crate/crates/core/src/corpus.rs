//! The deterministic instance corpus shared by the verifiers, the CLI and
//! the acceptance tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::branch::BranchSet;
use crate::frame::FiniteFrame;
use crate::mask::Mask;
use crate::nonarch::check_nonarch_base;
use crate::order::{count_forest_upsets, EnumerationBound, Poset};
use crate::padic::{zp_tree, PAdicBall};
use crate::tree::{all_shapes, Tree};

pub const DEFAULT_MAX_SIZE: usize = 15;
/// Frames above this many elements are left out of the corpus.
pub const FRAME_LIMIT: usize = 64;
const SHAPE_LIMIT: usize = 7;
const RANDOM_TREES: usize = 24;
const RANDOM_TREE_MIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameOrigin {
    Powerset(usize),
    Chain(usize),
    Product,
    /// Upsets of corpus tree `i`.
    Upsets(usize),
    /// Branch topology of corpus tree `i`.
    BranchOpens(usize),
}

#[derive(Debug, Clone)]
pub struct BaseCase {
    pub name: String,
    pub members: Mask,
}

#[derive(Debug, Clone)]
pub struct FrameCase {
    pub name: String,
    pub origin: FrameOrigin,
    pub frame: FiniteFrame,
    pub bases: Vec<BaseCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TreeKind {
    Shape,
    Random,
    Zp { p: i128, depth: usize },
}

#[derive(Debug, Clone)]
pub struct TreeCase {
    pub name: String,
    pub kind: TreeKind,
    pub tree: Tree,
    pub balls: Option<Vec<PAdicBall>>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub max_size: usize,
    pub frames: Vec<FrameCase>,
    pub trees: Vec<TreeCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusCounts {
    pub frames: usize,
    pub bases: usize,
    pub nonarch_bases: usize,
    pub trees: usize,
    pub shape_trees: usize,
    pub random_trees: usize,
    pub zp_trees: usize,
}

impl Corpus {
    pub fn counts(&self) -> CorpusCounts {
        let kind = |k: fn(&TreeKind) -> bool| self.trees.iter().filter(|t| k(&t.kind)).count();
        CorpusCounts {
            frames: self.frames.len(),
            bases: self.frames.iter().map(|f| f.bases.len()).sum(),
            nonarch_bases: self
                .frames
                .iter()
                .flat_map(|f| f.bases.iter().map(move |b| (f, b)))
                .filter(|(f, b)| check_nonarch_base(&f.frame, &b.members).is_nonarch_base())
                .count(),
            trees: self.trees.len(),
            shape_trees: kind(|k| *k == TreeKind::Shape),
            random_trees: kind(|k| *k == TreeKind::Random),
            zp_trees: kind(|k| matches!(k, TreeKind::Zp { .. })),
        }
    }
}

/// Builds the corpus. `max_size` bounds the ground set of every instance:
/// `n` for powersets and chains, nodes for trees, and depth + 1 for coset
/// trees.
pub fn corpus(seed: u64, max_size: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = Vec::new();
    for n in 1..=SHAPE_LIMIT.min(max_size) {
        for (i, t) in all_shapes(n).into_iter().enumerate() {
            trees.push(TreeCase {
                name: format!("shape-{n}-{i}"),
                kind: TreeKind::Shape,
                tree: t,
                balls: None,
            });
        }
    }
    if max_size >= RANDOM_TREE_MIN {
        for i in 0..RANDOM_TREES {
            let n = rng.random_range(RANDOM_TREE_MIN..=max_size);
            trees.push(TreeCase {
                name: format!("random-{i}-{n}"),
                kind: TreeKind::Random,
                tree: Tree::random(&mut rng, n),
                balls: None,
            });
        }
    }
    for p in [2, 3] {
        for depth in 0..=4usize {
            if depth + 1 > max_size {
                continue;
            }
            let (tree, balls) = zp_tree(p, depth).expect("small coset trees fit");
            trees.push(TreeCase {
                name: format!("zp-{p}-{depth}"),
                kind: TreeKind::Zp { p, depth },
                tree,
                balls: Some(balls),
            });
        }
    }

    let mut frames = Vec::new();
    for n in 1..=4usize.min(max_size) {
        frames.push(frame_case(format!("powerset-{n}"), FrameOrigin::Powerset(n), FiniteFrame::powerset(n)));
    }
    for n in 1..=5usize.min(max_size) {
        frames.push(frame_case(format!("chain-{n}"), FrameOrigin::Chain(n), FiniteFrame::chain(n)));
    }
    if max_size >= 5 {
        frames.push(frame_case("chain-2-x-chain-3".into(), FrameOrigin::Product, product_frame()));
    }
    for (i, tc) in trees.iter().enumerate() {
        let t = &tc.tree;
        let parents: Vec<Option<usize>> = (0..t.size()).map(|v| t.parent(v)).collect();
        if count_forest_upsets(&parents) <= FRAME_LIMIT as u128 {
            let sf = FiniteFrame::alexandroff(&t.poset(), EnumerationBound::default()).expect("small upset frame");
            frames.push(frame_case(format!("upsets-{}", tc.name), FrameOrigin::Upsets(i), sf.frame));
        }
        let leaves = t.leaves().len();
        if leaves < usize::BITS as usize && 1usize << leaves <= FRAME_LIMIT {
            let bs = BranchSet::new(t);
            let sf = FiniteFrame::from_set_family((0u64..1 << leaves).map(|v| Mask::from_bits(leaves, v)).collect())
                .expect("powerset of branches");
            let basics = Mask::from_indices(
                sf.frame.size(),
                (0..t.size())
                    .map(|v| sf.index_of(bs.basic_open(v)).expect("basic opens are open"))
                    .collect::<Vec<_>>(),
            );
            let mut case = frame_case(format!("opens-{}", tc.name), FrameOrigin::BranchOpens(i), sf.frame);
            case.bases.push(BaseCase {
                name: "basic-opens".into(),
                members: basics,
            });
            frames.push(case);
        }
    }
    for case in &mut frames {
        let j = case.frame.join_irreducibles();
        if check_nonarch_base(&case.frame, &j).holds {
            let members = random_nonarch_base(&case.frame, &mut rng);
            case.bases.push(BaseCase {
                name: "random".into(),
                members,
            });
        }
    }
    Corpus {
        seed,
        max_size,
        frames,
        trees,
    }
}

fn frame_case(name: String, origin: FrameOrigin, frame: FiniteFrame) -> FrameCase {
    let j = frame.join_irreducibles();
    let mut jt = j.clone();
    jt.insert(frame.top());
    let mut bases = vec![BaseCase {
        name: "join-irreducibles".into(),
        members: j.clone(),
    }];
    if jt != j {
        bases.push(BaseCase {
            name: "join-irreducibles+top".into(),
            members: jt,
        });
    }
    FrameCase {
        name,
        origin,
        frame,
        bases,
    }
}

/// The product of a 2-chain and a 3-chain, as pairs `(i, j)` at index `3i + j`.
pub fn product_frame() -> FiniteFrame {
    let leq = (0..6)
        .map(|a: usize| (0..6).map(|b: usize| a / 3 <= b / 3 && a % 3 <= b % 3).collect())
        .collect::<Vec<Vec<bool>>>();
    let labels = (0..6).map(|a| format!("({},{})", a / 3, a % 3)).collect();
    let order = Poset::validate(&leq).expect("product order").with_labels(labels);
    FiniteFrame::from_order(order).expect("products of chains are distributive")
}

/// Join-irreducibles plus a random selection of other elements, each kept
/// only when trichotomy survives. Every base contains the join-irreducibles,
/// so this reaches every non-archimedean base with positive probability.
pub fn random_nonarch_base<R: Rng>(f: &FiniteFrame, rng: &mut R) -> Mask {
    let mut members = f.join_irreducibles();
    let mut rest: Vec<usize> = f.elements().filter(|&a| !members.contains(a)).collect();
    rest.shuffle(rng);
    for a in rest {
        if !rng.random_bool(0.5) {
            continue;
        }
        let ok = members
            .iter()
            .all(|b| f.disjoint(a, b) || f.leq(a, b) || f.leq(b, a));
        if ok {
            members.insert(a);
        }
    }
    members
}
