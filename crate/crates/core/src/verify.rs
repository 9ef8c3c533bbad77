//! The regression suite: one record per structural claim, each checked over
//! the whole corpus.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::branch::{
    cb_rank, coverage_check, gbi_check, quotient_presentation, varpi, BranchFrames, BranchSet,
    PRESENTATION_LEAF_LIMIT,
};
use crate::corpus::{Corpus, CorpusCounts, FrameCase, TreeCase, TreeKind};
use crate::frame::points::{check_point_tree, spatial_reflection};
use crate::frame::FiniteFrame;
use crate::mask::Mask;
use crate::nonarch::{
    build_tree_base, canonical_decomposition, chain_closure, check_nonarch_base, complemented_below_defect,
    is_chain_closed, ortho_classify, NonArchBase, OrthoOutcome, TreeBase,
};
use crate::nuclei::{assembly, enumerate_nuclei, verify_quot, ClosureMap, DEFAULT_NUCLEUS_BOUND};
use crate::order::{count_forest_upsets, EnumerationBound};
use crate::padic::{ball_window, pow, trichotomy, verify_relations, BallRelation, PAdicBall, PAdicNumber};
use crate::tree::Tree;

/// Trees whose upset frame exceeds this are skipped by the branch checks.
pub const BRANCH_UPSET_LIMIT: u128 = 1024;
/// Trees with more branches than this are skipped by the branch checks.
pub const BRANCH_LEAF_LIMIT: usize = 10;
/// Trees with at most this many upsets also get the coverage scan.
pub const COVERAGE_UPSET_LIMIT: usize = 128;
/// Largest powerset frame built for the coset round trip.
pub const ROUND_TRIP_FRAME_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A documented counterexample: reported, not a defect of the code.
    Flagged,
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    /// Instances examined.
    pub checked: usize,
    pub witness: Option<String>,
    pub anchor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u128>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub max_size: usize,
    pub corpus: CorpusCounts,
    pub records: Vec<Record>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} (seed {}, max size {})\n", self.command, self.seed, self.max_size);
        for r in &self.records {
            let status = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Flagged => "FLAG",
            };
            s.push_str(&format!("{status} {:<28} {:>6}  {}", r.name, r.checked, r.anchor));
            if let Some(ms) = r.millis {
                s.push_str(&format!("  [{ms} ms]"));
            }
            s.push('\n');
            if let Some(w) = &r.witness {
                s.push_str(&format!("     {w}\n"));
            }
        }
        s
    }
}

/// Outcome of one claim on one instance.
#[derive(Debug, Clone, Default)]
pub struct Tally {
    pub checked: usize,
    pub failures: Vec<String>,
    pub flagged: Vec<String>,
}

impl Tally {
    fn ok() -> Self {
        Self {
            checked: 1,
            ..Self::default()
        }
    }

    fn fail(msg: String) -> Self {
        Self {
            checked: 1,
            failures: vec![msg],
            flagged: Vec::new(),
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.failures.extend(other.failures);
        self.flagged.extend(other.flagged);
        self
    }

    pub fn into_record(self, name: &str, anchor: &str) -> Record {
        let summary = |v: &[String]| {
            v.first().map(|first| {
                if v.len() > 1 {
                    format!("{first} (+{} more)", v.len() - 1)
                } else {
                    first.clone()
                }
            })
        };
        let (status, witness) = if !self.failures.is_empty() {
            (Status::Fail, summary(&self.failures))
        } else if !self.flagged.is_empty() {
            (Status::Flagged, summary(&self.flagged))
        } else {
            (Status::Pass, None)
        };
        Record {
            name: name.to_string(),
            status,
            checked: self.checked,
            witness,
            anchor: anchor.to_string(),
            millis: None,
        }
    }
}

fn sum(ts: Vec<Tally>) -> Tally {
    ts.into_iter().fold(Tally::default(), Tally::merge)
}

fn over_frames(c: &Corpus, check: impl Fn(&FrameCase) -> Tally + Sync + Send) -> Tally {
    sum(c.frames.par_iter().map(check).collect())
}

fn over_trees(c: &Corpus, check: impl Fn(&TreeCase) -> Tally + Sync + Send) -> Tally {
    sum(c.trees.par_iter().map(check).collect())
}

/// Non-archimedean bases of a frame case, paired with their names.
fn nonarch_bases(case: &FrameCase) -> Vec<(&str, NonArchBase)> {
    case.bases
        .iter()
        .filter_map(|b| NonArchBase::new(&case.frame, b.members.clone()).ok().map(|nb| (b.name.as_str(), nb)))
        .collect()
}

/// Chain-closed non-archimedean bases: each non-archimedean base replaced
/// by its chain closure, duplicates dropped.
fn closed_bases(case: &FrameCase) -> Vec<(String, NonArchBase)> {
    let mut out: Vec<(String, NonArchBase)> = Vec::new();
    for (name, nb) in nonarch_bases(case) {
        let Ok(cl) = chain_closure(&case.frame, nb.members()) else {
            continue;
        };
        let Ok(cb) = NonArchBase::new(&case.frame, cl) else {
            continue;
        };
        if !out.iter().any(|(_, b)| b == &cb) {
            out.push((name.to_string(), cb));
        }
    }
    out
}

fn tag(case: &FrameCase, base: &str) -> String {
    format!("{}/{}", case.name, base)
}

/// Lattice laws, distributivity, the Heyting adjunction and the negation
/// laws, checked on all element triples. Returns the first violation.
pub fn frame_law_defect(f: &FiniteFrame) -> Option<String> {
    let top = f.top();
    let bot = f.bottom();
    for a in f.elements() {
        if f.meet(a, a) != a || f.join(a, a) != a || f.meet(a, top) != a || f.join(a, bot) != a {
            return Some(format!("idempotence or bounds at {}", f.label(a)));
        }
        let na = f.negation(a);
        if f.meet(a, na) != bot || f.negation(f.negation(na)) != na || !f.leq(a, f.negation(na)) {
            return Some(format!("negation laws at {}", f.label(a)));
        }
        for b in f.elements() {
            let m = f.meet(a, b);
            if m != f.meet(b, a) || f.join(a, b) != f.join(b, a) {
                return Some(format!("commutativity at {}, {}", f.label(a), f.label(b)));
            }
            if f.join(a, m) != a || f.meet(a, f.join(a, b)) != a {
                return Some(format!("absorption at {}, {}", f.label(a), f.label(b)));
            }
            if f.leq(a, b) != (m == a) {
                return Some(format!("order and meet disagree at {}, {}", f.label(a), f.label(b)));
            }
            let h = f.heyting(a, b);
            for c in f.elements() {
                if f.leq(f.meet(c, a), b) != f.leq(c, h) {
                    return Some(format!(
                        "Heyting adjunction at c={}, a={}, b={}",
                        f.label(c),
                        f.label(a),
                        f.label(b)
                    ));
                }
                if f.meet(a, f.join(b, c)) != f.join(m, f.meet(a, c)) {
                    return Some(format!(
                        "distributivity at {}, {}, {}",
                        f.label(a),
                        f.label(b),
                        f.label(c)
                    ));
                }
                if f.meet(m, c) != f.meet(a, f.meet(b, c)) || f.join(f.join(a, b), c) != f.join(a, f.join(b, c)) {
                    return Some(format!("associativity at {}, {}, {}", f.label(a), f.label(b), f.label(c)));
                }
            }
        }
    }
    None
}

/// Closure of a non-archimedean base: again non-archimedean, chain
/// closed, and containing the base.
pub fn chain_closure_defect(f: &FiniteFrame, base: &Mask) -> Option<String> {
    let cl = match chain_closure(f, base) {
        Ok(cl) => cl,
        Err(e) => return Some(e.to_string()),
    };
    if !base.is_subset(&cl) {
        return Some("closure does not contain the base".into());
    }
    if !check_nonarch_base(f, &cl).is_nonarch_base() {
        return Some(format!("closure {cl} is not a non-archimedean base"));
    }
    if !is_chain_closed(f, &cl) {
        return Some(format!("closure {cl} is not closed under chain joins"));
    }
    None
}

/// Maximal-basics decomposition of every element: nonzero basics,
/// pairwise disjoint, joining to the element.
pub fn decomposition_defect(f: &FiniteFrame, base: &NonArchBase) -> Option<String> {
    for a in f.elements() {
        let d = match canonical_decomposition(f, base, a) {
            Ok(d) => d,
            Err(e) => return Some(e.to_string()),
        };
        if d.iter().any(|&x| !base.contains(x) || x == f.bottom()) {
            return Some(format!("decomposition of {} uses a non-basic or zero", f.label(a)));
        }
        for (i, &x) in d.iter().enumerate() {
            if d[i + 1..].iter().any(|&y| !f.disjoint(x, y)) {
                return Some(format!("decomposition of {} is not pairwise disjoint", f.label(a)));
            }
        }
        if f.join_all(d.iter().copied()) != a {
            return Some(format!("decomposition of {} does not join to it", f.label(a)));
        }
    }
    None
}

fn check_frame_laws(c: &Corpus) -> Tally {
    over_frames(c, |case| match frame_law_defect(&case.frame) {
        None => Tally::ok(),
        Some(w) => Tally::fail(format!("{}: {w}", case.name)),
    })
}

fn check_points(c: &Corpus) -> Tally {
    over_frames(c, |case| match spatial_reflection(&case.frame) {
        Err(e) => Tally::fail(format!("{}: {e}", case.name)),
        Ok(sr) if !sr.is_morphism => Tally::fail(format!("{}: U is not a frame morphism", case.name)),
        Ok(sr) if !sr.injective => Tally::fail(format!("{}: finite frame is not spatial", case.name)),
        Ok(_) => Tally::ok(),
    })
}

fn check_separations(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let f = &case.frame;
        let zd = f.zero_dimensional().0;
        let cr = f.is_completely_regular();
        let reg = f.is_regular();
        let fit = f.is_fit();
        let mut bad = Vec::new();
        if zd && !cr {
            bad.push("zero-dimensional but not completely regular");
        }
        if cr && !reg {
            bad.push("completely regular but not regular");
        }
        if reg && !fit {
            bad.push("regular but not fit");
        }
        if reg != f.is_regular_by_search() {
            bad.push("regularity forms disagree");
        }
        match bad.first() {
            None => Tally::ok(),
            Some(w) => Tally::fail(format!("{}: {w}", case.name)),
        }
    })
}

fn check_zero_dimensional(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let mut t = Tally::default();
        for (name, nb) in nonarch_bases(case) {
            t.checked += 1;
            let r = check_nonarch_base(&case.frame, nb.members());
            if r.not_zero_dimensional {
                t.flagged.push(format!(
                    "{}: non-archimedean base {} on a frame that is not zero-dimensional",
                    tag(case, name),
                    named(&case.frame, nb.members())
                ));
            }
        }
        t
    })
}

fn named(f: &FiniteFrame, m: &Mask) -> String {
    let labels: Vec<&str> = m.iter().map(|a| f.label(a)).collect();
    format!("{{{}}}", labels.join(","))
}

fn check_complemented_below(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let mut t = Tally::default();
        for (name, nb) in nonarch_bases(case) {
            t.checked += 1;
            if let Some((b, cc)) = complemented_below_defect(&case.frame, nb.members()) {
                t.failures.push(format!(
                    "{}: {} not complemented above complemented {}",
                    tag(case, name),
                    case.frame.label(b),
                    case.frame.label(cc)
                ));
            }
        }
        t
    })
}

fn check_ortho(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let f = &case.frame;
        let zd = f.zero_dimensional().0;
        let mut t = Tally::default();
        for (name, nb) in nonarch_bases(case) {
            let members = nb.members().to_vec();
            for subset in small_subsets(&members, 3) {
                t.checked += 1;
                let m = Mask::from_indices(f.size(), subset.iter().copied());
                let r = ortho_classify(f, nb.members(), &m);
                if r.outcome == OrthoOutcome::NoneHolds {
                    let msg = format!(
                        "{}: meet {} of {} is nonzero, not simple and not complemented",
                        tag(case, name),
                        f.label(r.meet),
                        named(f, &m)
                    );
                    if zd {
                        t.failures.push(msg);
                    } else {
                        t.flagged.push(msg);
                    }
                }
            }
        }
        t
    })
}

fn small_subsets(xs: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn go(xs: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == k {
            return;
        }
        for i in start..xs.len() {
            cur.push(xs[i]);
            go(xs, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(xs, k, 0, &mut Vec::new(), &mut out);
    out
}

fn check_chain_closure(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let mut t = Tally::default();
        for (name, nb) in nonarch_bases(case) {
            t.checked += 1;
            if let Some(w) = chain_closure_defect(&case.frame, nb.members()) {
                t.failures.push(format!("{}: {w}", tag(case, name)));
            }
        }
        t
    })
}

fn check_decomposition(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let mut t = Tally::default();
        for (name, nb) in closed_bases(case) {
            t.checked += 1;
            if let Some(w) = decomposition_defect(&case.frame, &nb) {
                t.failures.push(format!("{}: {w}", tag(case, &name)));
            }
        }
        t
    })
}

/// Chain-closed bases admitting nontrivial decompositions, with their tree
/// bases.
fn tree_based(case: &FrameCase) -> Vec<(String, NonArchBase, TreeBase)> {
    if case.frame.size() == 1 {
        return Vec::new();
    }
    closed_bases(case)
        .into_iter()
        .filter_map(|(name, nb)| build_tree_base(&case.frame, &nb).ok().map(|tb| (name, nb, tb)))
        .collect()
}

fn check_tree_base(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let f = &case.frame;
        let mut t = Tally::default();
        for (name, nb, tb) in tree_based(case) {
            t.checked += 1;
            let id = tag(case, &name);
            if let Err(e) = tb.verify(f) {
                t.failures.push(format!("{id}: {e}"));
                continue;
            }
            if let Some(a) = tb.level_decomposition_defect(f, &nb) {
                t.failures.push(format!("{id}: level decomposition of {}", f.label(a)));
                continue;
            }
            if tb.tree.leaves().len() > PRESENTATION_LEAF_LIMIT {
                continue;
            }
            match quotient_presentation(f, &tb) {
                Err(e) => t.failures.push(format!("{id}: {e}")),
                Ok(p) if !p.passed() => t.failures.push(format!(
                    "{id}: presentation surjective={} morphism={} fixes_basics={} injective={} beta_section={}",
                    p.surjective, p.morphism, p.fixes_basics, p.injective, p.beta_section
                )),
                Ok(_) => {}
            }
        }
        t
    })
}

fn check_point_trees(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let f = &case.frame;
        let mut t = Tally::default();
        for (name, _, tb) in tree_based(case) {
            t.checked += 1;
            let id = tag(case, &name);
            match spatial_reflection(f) {
                Ok(sr) if sr.injective => {}
                Ok(_) => t.failures.push(format!("{id}: spatial reflection not injective")),
                Err(e) => t.failures.push(format!("{id}: {e}")),
            }
            match check_point_tree(f, &tb) {
                Ok(r) if r.passed() => {}
                Ok(r) => t.failures.push(format!("{id}: {:?}", r.violations.first())),
                Err(e) => t.failures.push(format!("{id}: {e}")),
            }
            match varpi(f, &tb) {
                Ok(v) if v.continuous && v.injective && v.surjective => {}
                Ok(v) => t.failures.push(format!(
                    "{id}: branch map continuous={} injective={} surjective={}",
                    v.continuous, v.injective, v.surjective
                )),
                Err(e) => t.failures.push(format!("{id}: {e}")),
            }
        }
        t
    })
}

fn check_nucleus_count(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let f = &case.frame;
        if f.size() > DEFAULT_NUCLEUS_BOUND {
            return Tally::default();
        }
        let ns = match enumerate_nuclei(f, DEFAULT_NUCLEUS_BOUND) {
            Ok(ns) => ns,
            Err(e) => return Tally::fail(format!("{}: {e}", case.name)),
        };
        let expected = 1usize << f.meet_irreducibles().count();
        if ns.len() != expected {
            return Tally::fail(format!("{}: {} nuclei, expected {expected}", case.name, ns.len()));
        }
        if let Some(j) = ns.iter().find(|j| !j.is_nucleus()) {
            return Tally::fail(format!("{}: enumerated map {:?} is not a nucleus", case.name, j.table()));
        }
        match assembly(f, &ns) {
            Ok(_) => Tally::ok(),
            Err(e) => Tally::fail(format!("{}: assembly {e}", case.name)),
        }
    })
}

fn check_quot(c: &Corpus) -> Tally {
    over_frames(c, |case| {
        let f = &case.frame;
        let mut t = Tally::default();
        if f.size() > DEFAULT_NUCLEUS_BOUND {
            return t;
        }
        for (name, nb) in nonarch_bases(case) {
            match verify_quot(f, &nb, DEFAULT_NUCLEUS_BOUND) {
                Err(e) => {
                    t.checked += 1;
                    t.failures.push(format!("{}: {e}", tag(case, name)));
                }
                Ok(records) => {
                    for r in records {
                        t.checked += 1;
                        if !r.passed {
                            t.failures.push(format!(
                                "{}: nucleus {:?}: {}",
                                tag(case, name),
                                r.nucleus,
                                r.failure.unwrap_or_default()
                            ));
                        }
                    }
                }
            }
        }
        t
    })
}

/// The branch frames of a corpus tree, when within the limits.
pub fn branch_frames(t: &Tree) -> Option<BranchFrames> {
    let parents: Vec<Option<usize>> = (0..t.size()).map(|v| t.parent(v)).collect();
    if count_forest_upsets(&parents) > BRANCH_UPSET_LIMIT || t.leaves().len() > BRANCH_LEAF_LIMIT {
        return None;
    }
    BranchFrames::new(t, EnumerationBound::default()).ok()
}

fn check_branch_space(c: &Corpus) -> Tally {
    over_trees(c, |tc| {
        let Some(bf) = branch_frames(&tc.tree) else {
            return Tally::default();
        };
        let n = &tc.name;
        if let Some((u, v)) = bf.adjunction_defect() {
            return Tally::fail(format!("{n}: adjunction fails at upset {u}, open {v}"));
        }
        if let Some(u) = bf.basic_generation_defect() {
            return Tally::fail(format!("{n}: upset {u} is not generated by basics"));
        }
        if !bf.kstar_is_morphism() {
            return Tally::fail(format!("{n}: k* is not a surjective frame morphism"));
        }
        let leaves = tc.tree.leaves().len();
        if bf.opens.frame.size() != 1 << leaves {
            return Tally::fail(format!("{n}: {} opens on {leaves} branches", bf.opens.frame.size()));
        }
        let bs = &bf.branches;
        for u in bf.upsets.sets() {
            if bs.k_star(u) != bs.k_star_by_basics(u) {
                return Tally::fail(format!("{n}: two forms of k* differ at {u}"));
            }
        }
        for v in bf.opens.sets() {
            if bs.k_lower(v) != bs.k_lower_by_formula(v) {
                return Tally::fail(format!("{n}: two forms of k_* differ at {v}"));
            }
        }
        match bf.ker() {
            Ok(k) if k.is_nucleus() && k.fixed().count() == bf.opens.frame.size() => Tally::ok(),
            Ok(_) => Tally::fail(format!("{n}: ker is not a nucleus with fixed set the opens")),
            Err(e) => Tally::fail(format!("{n}: {e}")),
        }
    })
}

/// Per-tree outcome of the derivative, kernel and bar-induction checks.
struct DerTally {
    gbi: Tally,
    der_le_ker: Tally,
    der_le_ker_off_leaves: Tally,
    ker_le_ler: Tally,
}

fn check_derivatives(c: &Corpus) -> DerTally {
    let per: Vec<DerTally> = c
        .trees
        .par_iter()
        .map(|tc| {
            let empty = || DerTally {
                gbi: Tally::default(),
                der_le_ker: Tally::default(),
                der_le_ker_off_leaves: Tally::default(),
                ker_le_ler: Tally::default(),
            };
            let Some(bf) = branch_frames(&tc.tree) else {
                return empty();
            };
            let n = &tc.name;
            let id = ClosureMap::identity(&bf.opens.frame);
            match gbi_check(&bf, &id) {
                Err(e) => {
                    let mut d = empty();
                    d.gbi = Tally::fail(format!("{n}: {e}"));
                    d
                }
                Ok(r) => {
                    let lift = |ok: bool, msg: String| if ok { Tally::ok() } else { Tally::fail(msg) };
                    DerTally {
                        gbi: lift(
                            r.agree && r.tables_equal,
                            format!(
                                "{n}: bar_induction={} tables_equal={} perfect_fixed={} spatial={}",
                                r.bar_induction, r.tables_equal, r.perfect_fixed, r.der_quotient_spatial
                            ),
                        ),
                        der_le_ker: lift(r.der_le_ker, format!("{n}: der(U) is not inside ker(U)")),
                        der_le_ker_off_leaves: lift(
                            r.der_le_ker_off_leaves,
                            format!("{n}: der(U) leaves ker(U) away from the leaves"),
                        ),
                        ker_le_ler: lift(r.ker_le_ler, format!("{n}: ker is not below ler")),
                    }
                }
            }
        })
        .collect();
    let mut out = DerTally {
        gbi: Tally::default(),
        der_le_ker: Tally::default(),
        der_le_ker_off_leaves: Tally::default(),
        ker_le_ler: Tally::default(),
    };
    for d in per {
        out.gbi = out.gbi.merge(d.gbi);
        out.der_le_ker = out.der_le_ker.merge(d.der_le_ker);
        out.der_le_ker_off_leaves = out.der_le_ker_off_leaves.merge(d.der_le_ker_off_leaves);
        out.ker_le_ler = out.ker_le_ler.merge(d.ker_le_ler);
    }
    out
}

fn check_coverage(c: &Corpus) -> Tally {
    over_trees(c, |tc| {
        let Some(bf) = branch_frames(&tc.tree) else {
            return Tally::default();
        };
        if bf.upsets.frame.size() > COVERAGE_UPSET_LIMIT {
            return Tally::default();
        }
        let n = &tc.name;
        let mut t = Tally::default();
        let ker = match bf.ker() {
            Ok(k) => k,
            Err(e) => return Tally::fail(format!("{n}: {e}")),
        };
        for j in bf.enumerable_opens_nuclei().unwrap_or_default() {
            let Ok(ler) = bf.ler(&j) else {
                t.failures.push(format!("{n}: ler of an opens nucleus failed"));
                continue;
            };
            t.checked += 1;
            let r = coverage_check(&bf, &bf.coverage_of(&ler));
            if let Some(rule) = r.rules.iter().find(|r| r.violations > 0) {
                t.failures.push(format!("{n}: ler breaks {} ({:?})", rule.rule, rule.first));
            }
        }
        for (which, map) in [("identity", ClosureMap::identity(&bf.upsets.frame)), ("ker", ker)] {
            t.checked += 1;
            let r = coverage_check(&bf, &bf.coverage_of(&map));
            if let Some(rule) = r.rules.iter().find(|r| r.violations > 0) {
                t.failures.push(format!("{n}: {which} breaks {} ({:?})", rule.rule, rule.first));
            }
        }
        t
    })
}

fn check_cb_rank(c: &Corpus) -> Tally {
    let mut t = over_trees(c, |tc| {
        let r = cb_rank(&tc.tree);
        if r == tc.tree.height() + 1 {
            Tally::ok()
        } else {
            Tally::fail(format!("{}: rank {r} with height {}", tc.name, tc.tree.height()))
        }
    });
    for d in 0..=6 {
        t.checked += 1;
        let r = cb_rank(&Tree::cantor(d));
        if r != d + 1 {
            t.failures.push(format!("cantor({d}) has rank {r}"));
        }
    }
    for (kind, make) in [
        ("koenig", Tree::koenig as fn(usize, usize) -> Result<Tree, _>),
        ("baire", Tree::baire as fn(usize, usize) -> Result<Tree, _>),
    ] {
        for w in 1..=3 {
            let ranks: Vec<usize> = (0..=4).filter_map(|d| make(w, d).ok()).map(|t| cb_rank(&t)).collect();
            t.checked += 1;
            if ranks.windows(2).any(|p| p[0] >= p[1]) {
                t.failures.push(format!("{kind}({w}, d) ranks {ranks:?} not increasing"));
            }
        }
    }
    t
}

fn check_padic_relations() -> Tally {
    let cases = [(2, 3), (3, 2), (5, 1)];
    sum(cases
        .par_iter()
        .map(|&(p, d)| match verify_relations(p, d) {
            Ok(r) if r.passed() => Tally::ok(),
            Ok(r) => Tally::fail(format!("p={p} depth={d}: {:?}", r.defects.first())),
            Err(e) => Tally::fail(format!("p={p} depth={d}: {e}")),
        })
        .collect())
}

/// Ball membership on the grid `p^-lo Z / p^hi Z`, one mask per ball.
fn grid_membership(p: i128, lo: i32, hi: i32, balls: &[PAdicBall]) -> Result<Vec<Mask>, String> {
    let span = pow(p, (lo + hi) as u32).map_err(|e| e.to_string())?;
    let points: Vec<PAdicNumber> = (0..span).map(|k| PAdicNumber::new(p, k, -lo)).collect();
    balls
        .iter()
        .map(|b| {
            let hits: Result<Vec<usize>, _> = points
                .iter()
                .enumerate()
                .map(|(i, x)| b.contains(x).map(|h| h.then_some(i)))
                .filter_map(|r| r.transpose())
                .collect();
            hits.map(|h| Mask::from_indices(points.len(), h)).map_err(|e| e.to_string())
        })
        .collect()
}

fn check_padic_trichotomy() -> Tally {
    let mut cases = Vec::new();
    for p in [2i128, 3, 5] {
        for d in 0..=4i32 {
            cases.push((p, d));
        }
    }
    sum(cases
        .par_iter()
        .map(|&(p, d)| {
            let (lo, hi) = (d / 2, d - d / 2);
            let id = format!("p={p} depth={d}");
            let balls = match ball_window(p, lo, hi) {
                Ok(b) => b,
                Err(e) => return Tally::fail(format!("{id}: {e}")),
            };
            let sets = match grid_membership(p, lo, hi, &balls) {
                Ok(s) => s,
                Err(e) => return Tally::fail(format!("{id}: {e}")),
            };
            for i in 0..balls.len() {
                for j in 0..balls.len() {
                    let expect = if sets[i] == sets[j] {
                        BallRelation::Equal
                    } else if sets[i].is_subset(&sets[j]) {
                        BallRelation::LeftInsideRight
                    } else if sets[j].is_subset(&sets[i]) {
                        BallRelation::RightInsideLeft
                    } else if !sets[i].intersects(&sets[j]) {
                        BallRelation::Disjoint
                    } else {
                        return Tally::fail(format!("{id}: {} and {} overlap", balls[i], balls[j]));
                    };
                    match trichotomy(&balls[i], &balls[j]) {
                        Ok(r) if r == expect => {}
                        other => {
                            return Tally::fail(format!(
                                "{id}: {} vs {}: {other:?}, grid says {expect:?}",
                                balls[i], balls[j]
                            ))
                        }
                    }
                }
            }
            Tally {
                checked: balls.len() * balls.len(),
                ..Tally::default()
            }
        })
        .collect())
}

/// Coset tree to powerset frame with the coset base and back.
pub fn zp_round_trip_defect(tree: &Tree) -> Option<String> {
    let bs = BranchSet::new(tree);
    let nb = bs.len();
    if nb >= 64 || (1usize << nb) > ROUND_TRIP_FRAME_LIMIT {
        return Some(format!("{nb} leaves exceed the round-trip limit"));
    }
    let f = FiniteFrame::powerset(nb);
    let members = Mask::from_indices(f.size(), (0..tree.size()).map(|v| bs.basic_open(v).bits() as usize));
    let base = match NonArchBase::new(&f, members) {
        Ok(b) => b,
        Err(e) => return Some(e.to_string()),
    };
    match build_tree_base(&f, &base) {
        Ok(tb) if tb.tree.is_isomorphic(tree) => None,
        Ok(tb) => Some(format!("rebuilt tree has {} nodes, not isomorphic", tb.tree.size())),
        Err(e) => Some(e.to_string()),
    }
}

/// Every branch of the coset tree is isolated: each leaf's basic open is a
/// singleton, so the opens are all sets of branches.
pub fn branches_discrete_defect(tree: &Tree) -> Option<String> {
    let bs = BranchSet::new(tree);
    tree.leaves()
        .into_iter()
        .find(|&l| bs.basic_open(l).count() != 1)
        .map(|l| format!("leaf {l} does not isolate a branch"))
}

fn check_zp(c: &Corpus) -> Tally {
    over_trees(c, |tc| {
        let TreeKind::Zp { p, depth } = tc.kind else {
            return Tally::default();
        };
        let n = &tc.name;
        let leaves = tc.tree.leaves().len();
        if leaves as i128 != pow(p, depth as u32).unwrap_or(-1) || cb_rank(&tc.tree) != depth + 1 {
            return Tally::fail(format!("{n}: {leaves} leaves, rank {}", cb_rank(&tc.tree)));
        }
        if let Some(w) = branches_discrete_defect(&tc.tree) {
            return Tally::fail(format!("{n}: {w}"));
        }
        if leaves < 64 && (1usize << leaves) <= ROUND_TRIP_FRAME_LIMIT {
            if let Some(w) = zp_round_trip_defect(&tc.tree) {
                return Tally::fail(format!("{n}: {w}"));
            }
        }
        Tally::ok()
    })
}

type Check = fn(&Corpus) -> Tally;

const FRAME_CHECKS: &[(&str, &str, Check)] = &[
    ("frame-laws", "lattice, distributive and Heyting laws", check_frame_laws),
    ("point-cross-check", "points as morphisms, prime filters and meet-irreducibles", check_points),
    ("separation-chain", "zero-dimensional, completely regular, regular, fit", check_separations),
    ("zero-dimensionality", "non-archimedean bases versus complemented bases", check_zero_dimensional),
    ("complemented-below", "basics above complemented elements are complemented", check_complemented_below),
    ("ortho-classification", "meets of basics: zero, simple or complemented", check_ortho),
    ("chain-closure", "chain closure of a non-archimedean base", check_chain_closure),
    ("canonical-decomposition", "maximal basics below an element", check_decomposition),
    ("tree-base", "tree base and presentation from branch opens", check_tree_base),
    ("point-tree", "spatiality and the point tree of a tree base", check_point_trees),
    ("nucleus-enumeration", "nuclei, their count and the assembly", check_nucleus_count),
    ("quotient-base", "non-archimedean bases of nucleus quotients", check_quot),
    ("branch-space", "upsets, branch opens, k* and k_*", check_branch_space),
    ("coverage-rules", "coverage relations of nuclei on upsets", check_coverage),
    ("cb-rank", "derivative iteration rank of trees", check_cb_rank),
    ("padic-relations", "relations of the ball generators", |_| check_padic_relations()),
    ("padic-trichotomy", "ball trichotomy against grid membership", |_| check_padic_trichotomy()),
    ("zp-tree", "coset trees, their branch frames and round trip", check_zp),
];

/// Runs every claim over the corpus. Records follow a fixed order.
pub fn verify_corpus(c: &Corpus, timing: bool) -> Vec<Record> {
    let mut records = Vec::new();
    for &(name, anchor, check) in FRAME_CHECKS {
        let start = Instant::now();
        let mut r = check(c).into_record(name, anchor);
        if timing {
            r.millis = Some(start.elapsed().as_millis());
        }
        records.push(r);
    }
    let start = Instant::now();
    let d = check_derivatives(c);
    let elapsed = timing.then(|| start.elapsed().as_millis());
    for (tally, name, anchor) in [
        (d.gbi, "bar-induction", "der closure, ker and ler agree on upsets"),
        (d.der_le_ker, "der-below-ker", "derivative below the branch kernel"),
        (d.der_le_ker_off_leaves, "der-below-ker-off-leaves", "derivative below the kernel away from leaves"),
        (d.ker_le_ler, "ker-below-ler", "branch kernel below the quotient kernel"),
    ] {
        let mut r = tally.into_record(name, anchor);
        r.millis = elapsed;
        records.push(r);
    }
    records
}

pub fn verify_paper(c: &Corpus, timing: bool) -> Report {
    Report {
        command: "verify-paper".into(),
        seed: c.seed,
        max_size: c.max_size,
        corpus: c.counts(),
        records: verify_corpus(c, timing),
    }
}
