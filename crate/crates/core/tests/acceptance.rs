//! One PASS/FAIL line per acceptance criterion. Oracles below use only the
//! order relation, explicit sets, or integer residues, never the tables or
//! valuations they are checking.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use locus_core::branch::{cb_rank, gbi_check, quotient_presentation, BranchFrames, BranchSet};
use locus_core::corpus::{corpus, random_nonarch_base, Corpus, DEFAULT_MAX_SIZE};
use locus_core::frame::points::{check_point_tree, points, spatial_reflection};
use locus_core::nonarch::{
    admits_nontrivial_decompositions, build_tree_base, canonical_decomposition, chain_closure, check_nonarch_base, NonArchBase,
};
use locus_core::nuclei::{enumerate_nuclei, verify_quot, DEFAULT_NUCLEUS_BOUND};
use locus_core::padic::{ball_window, trichotomy, zp_tree, BallRelation, PAdicBall};
use locus_core::tree::all_shapes;
use locus_core::verify::{branches_discrete_defect, verify_paper, zp_round_trip_defect};
use locus_core::{EnumerationBound, FiniteFrame, Mask, Status, Tree};

/// Criteria whose literal statement cannot hold for the specified
/// operators; they still print FAIL, and the test checks the cause.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

/// Writes past the test harness's output capture, so the verdicts show up in
/// a plain `cargo test` run.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn report(n: u32, pass: bool, detail: impl AsRef<str>) -> bool {
    say(&format!("criterion {n:>2}: {} {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref()));
    pass
}

fn settle(n: u32, pass: bool) {
    if !KNOWN_UNATTAINABLE.contains(&n) {
        assert!(pass, "criterion {n} failed");
    }
}

fn first(bad: &[String]) -> String {
    bad.first().map(|b| format!(", first {b}")).unwrap_or_default()
}

fn default_corpus() -> Corpus {
    corpus(0, DEFAULT_MAX_SIZE)
}

// ---- order-only oracles ----

/// Meet and join tables rebuilt from the order relation alone.
struct Oracle {
    n: usize,
    bottom: usize,
    meet: Vec<usize>,
    join: Vec<usize>,
}

impl Oracle {
    fn new(f: &FiniteFrame) -> Self {
        let n = f.size();
        let extreme = |cands: Vec<usize>, greatest: bool| -> usize {
            *cands
                .iter()
                .find(|&&x| cands.iter().all(|&y| if greatest { f.leq(y, x) } else { f.leq(x, y) }))
                .expect("bound exists")
        };
        let mut meet = vec![0; n * n];
        let mut join = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                meet[a * n + b] = extreme((0..n).filter(|&l| f.leq(l, a) && f.leq(l, b)).collect(), true);
                join[a * n + b] = extreme((0..n).filter(|&u| f.leq(a, u) && f.leq(b, u)).collect(), false);
            }
        }
        let bottom = extreme((0..n).collect(), false);
        Self { n, bottom, meet, join }
    }

    fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b]
    }

    fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b]
    }

    fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    fn meet_irreducibles(&self) -> usize {
        let top = self.join_all(0..self.n);
        (0..self.n)
            .filter(|&m| m != top)
            .filter(|&m| (0..self.n).all(|a| (0..self.n).all(|b| self.meet(a, b) != m || a == m || b == m)))
            .count()
    }
}

fn oracle_frame_defect(f: &FiniteFrame, o: &Oracle) -> Option<String> {
    let n = f.size();
    for a in 0..n {
        for b in 0..n {
            if o.meet(a, b) != f.meet(a, b) || o.join(a, b) != f.join(a, b) {
                return Some(format!("tables disagree with the order at {a}, {b}"));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let h = o.join_all((0..n).filter(|&c| f.leq(o.meet(c, a), b)));
            if !f.leq(o.meet(h, a), b) || f.heyting(a, b) != h {
                return Some(format!("Heyting implication {a} -> {b}"));
            }
            for c in 0..n {
                if o.meet(a, o.join(b, c)) != o.join(o.meet(a, b), o.meet(a, c)) {
                    return Some(format!("distributivity at {a}, {b}, {c}"));
                }
            }
        }
    }
    None
}

fn oracle_is_nonarch_base(f: &FiniteFrame, o: &Oracle, base: &Mask) -> bool {
    let members = base.to_vec();
    let trichotomy = members.iter().all(|&a| {
        members
            .iter()
            .all(|&b| o.meet(a, b) == o.bottom || f.leq(a, b) || f.leq(b, a))
    });
    let is_base = f
        .elements()
        .all(|a| o.join_all(members.iter().copied().filter(|&x| f.leq(x, a))) == a);
    trichotomy && is_base
}

/// Joins of every nonempty chain of members, by subset enumeration.
fn oracle_chain_joins(f: &FiniteFrame, o: &Oracle, base: &Mask) -> Option<Mask> {
    let members = base.to_vec();
    if members.len() > 16 {
        return None;
    }
    let mut out = Mask::empty(f.size());
    for bits in 1u32..1 << members.len() {
        let chain: Vec<usize> = (0..members.len()).filter(|&i| bits >> i & 1 == 1).map(|i| members[i]).collect();
        let total = chain.iter().all(|&x| chain.iter().all(|&y| f.leq(x, y) || f.leq(y, x)));
        if total {
            out.insert(o.join_all(chain));
        }
    }
    Some(out)
}

#[test]
fn criterion_01_frame_laws() {
    let start = Instant::now();
    let c = default_corpus();
    let mut bad = Vec::new();
    for case in &c.frames {
        if let Some(d) = locus_core::verify::frame_law_defect(&case.frame) {
            bad.push(format!("{}: {d}", case.name));
        }
    }
    let elapsed = start.elapsed();
    for case in &c.frames {
        if let Some(d) = oracle_frame_defect(&case.frame, &Oracle::new(&case.frame)) {
            bad.push(format!("{}: oracle {d}", case.name));
        }
    }
    let max = c.frames.iter().map(|f| f.frame.size()).max().unwrap_or(0);
    let ok = bad.is_empty() && elapsed < Duration::from_secs(10) && max <= 64;
    let pass = report(
        1,
        ok,
        format!(
            "{} frames up to {max} elements, {} failures, {:.2}s",
            c.frames.len(),
            bad.len(),
            elapsed.as_secs_f64()
        ),
    );
    settle(1, pass);
}

#[test]
fn criterion_02_points() {
    let c = default_corpus();
    let mut mismatches = 0;
    for case in &c.frames {
        let f = &case.frame;
        let o = Oracle::new(f);
        match points(f) {
            Ok(ps) => {
                if ps.len() != o.meet_irreducibles() {
                    mismatches += 1;
                }
                for p in &ps {
                    let k = &p.kernel;
                    let filter = k.contains(f.top())
                        && !k.contains(f.bottom())
                        && f.elements().all(|a| {
                            f.elements().all(|b| {
                                (k.contains(o.meet(a, b)) == (k.contains(a) && k.contains(b)))
                                    && (k.contains(o.join(a, b)) == (k.contains(a) || k.contains(b)))
                            })
                        });
                    if !filter {
                        mismatches += 1;
                    }
                }
            }
            Err(_) => mismatches += 1,
        }
    }
    let pass = report(2, mismatches == 0, format!("{} frames, {mismatches} mismatches", c.frames.len()));
    settle(2, pass);
}

fn closure_ok(f: &FiniteFrame, o: &Oracle, base: &Mask) -> bool {
    match chain_closure(f, base) {
        Ok(cl) => {
            let closed = match (oracle_chain_joins(f, o, base), oracle_chain_joins(f, o, &cl)) {
                (Some(joins), Some(again)) => joins == cl && again == cl,
                _ => true,
            };
            base.is_subset(&cl) && oracle_is_nonarch_base(f, o, &cl) && closed
        }
        Err(_) => false,
    }
}

#[test]
fn criterion_03_chain_closure() {
    let c = default_corpus();
    let mut checked = 0;
    let mut bad = 0;
    for case in &c.frames {
        let o = Oracle::new(&case.frame);
        for b in &case.bases {
            if check_nonarch_base(&case.frame, &b.members).is_nonarch_base() {
                checked += 1;
                bad += usize::from(!closure_ok(&case.frame, &o, &b.members));
            }
        }
    }
    let eligible: Vec<(&FiniteFrame, Oracle)> = c
        .frames
        .iter()
        .map(|f| &f.frame)
        .filter(|f| check_nonarch_base(f, &f.join_irreducibles()).holds)
        .map(|f| (f, Oracle::new(f)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for i in 0..1000 {
        let (f, o) = &eligible[i % eligible.len()];
        let b = random_nonarch_base(f, &mut rng);
        checked += 1;
        bad += usize::from(!oracle_is_nonarch_base(f, o, &b) || !closure_ok(f, o, &b));
    }
    let pass = report(3, bad == 0, format!("{checked} bases (1000 random), {bad} failures"));
    settle(3, pass);
}

#[test]
fn criterion_04_decomposition() {
    let c = default_corpus();
    let (mut elements, mut bad) = (0, 0);
    for case in &c.frames {
        let f = &case.frame;
        let o = Oracle::new(f);
        for b in &case.bases {
            let Ok(nb) = NonArchBase::new(f, b.members.clone()) else {
                continue;
            };
            let Ok(cl) = chain_closure(f, nb.members()) else {
                continue;
            };
            let nb = NonArchBase::new(f, cl).expect("closure is a base");
            for a in f.elements() {
                elements += 1;
                let Ok(d) = canonical_decomposition(f, &nb, a) else {
                    bad += 1;
                    continue;
                };
                let disjoint = d
                    .iter()
                    .enumerate()
                    .all(|(i, &x)| d[i + 1..].iter().all(|&y| o.meet(x, y) == o.bottom));
                let basic = d.iter().all(|&x| nb.contains(x) && x != f.bottom());
                if !(disjoint && basic && o.join_all(d.iter().copied()) == a) {
                    bad += 1;
                }
            }
        }
    }
    let pass = report(4, bad == 0, format!("{elements} element decompositions, {bad} failures"));
    settle(4, pass);
}

#[test]
fn criterion_05_tree_base_loop() {
    let c = default_corpus();
    let (mut checked, mut bad) = (0, Vec::new());
    for case in &c.frames {
        let f = &case.frame;
        for b in &case.bases {
            let Ok(nb) = NonArchBase::new(f, b.members.clone()) else {
                continue;
            };
            let nb = NonArchBase::new(f, chain_closure(f, nb.members()).unwrap()).unwrap();
            if !admits_nontrivial_decompositions(f, &nb) {
                continue;
            }
            let tb = build_tree_base(f, &nb).unwrap();
            checked += 1;
            let leaves = tb.tree.leaves().len();
            let ok = match quotient_presentation(f, &tb) {
                Ok(p) => p.surjective && p.morphism && p.fixes_basics && p.injective && f.size() == 1 << leaves,
                Err(_) => false,
            };
            if !ok {
                bad.push(format!("{}/{}", case.name, b.name));
            }
        }
    }
    let pass = report(
        5,
        bad.is_empty() && checked > 0,
        format!("{checked} tree-based frames, {} failures{}", bad.len(), first(&bad)),
    );
    settle(5, pass);
}

#[test]
fn criterion_06_bar_induction() {
    let start = Instant::now();
    let trees: Vec<Tree> = (1..=12).flat_map(all_shapes).collect();
    let (mut runs, mut disagree, mut unequal, mut leaf_cause) = (0, 0, 0, 0);
    for t in &trees {
        let bf = BranchFrames::new(t, EnumerationBound::default()).expect("upsets enumerable");
        for j in bf.enumerable_opens_nuclei().unwrap() {
            runs += 1;
            let r = gbi_check(&bf, &j).unwrap();
            disagree += usize::from(!r.agree);
        }
        let id = locus_core::ClosureMap::identity(&bf.opens.frame);
        let r = gbi_check(&bf, &id).unwrap();
        if !r.tables_equal {
            unequal += 1;
            // der of the empty upset is every leaf, ker of it is empty
            let empty = bf.upsets.index_of(&Mask::empty(t.size())).unwrap();
            let der_empty = bf.der().unwrap().apply(empty);
            let leaves = Mask::from_indices(t.size(), t.leaves());
            if leaves.is_subset(bf.upsets.set(der_empty)) && r.der_le_ker_off_leaves && r.ker_le_ler {
                leaf_cause += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = disagree == 0 && unequal == 0 && elapsed < Duration::from_secs(300);
    report(
        6,
        pass,
        format!(
            "{} trees, {runs} nucleus runs, {disagree} disagreements, identity tables unequal on {unequal}, {:.1}s",
            trees.len(),
            elapsed.as_secs_f64()
        ),
    );
    if !pass {
        say(&format!(
            "              cause: der(empty) = leaves while ker(empty) = empty on {leaf_cause}/{unequal}; \
             der <= ker holds away from the leaves and ker <= ler holds"
        ));
        assert_eq!(leaf_cause, unequal, "a failure not explained by the leaf discrepancy");
        assert!(elapsed < Duration::from_secs(300));
    }
    settle(6, pass);
}

/// All upsets by filtering every subset, then the number of derivative
/// steps from the empty upset until nothing changes.
fn oracle_rank_by_subsets(t: &Tree) -> usize {
    let n = t.size();
    let upsets: BTreeSet<u64> = (0u64..1 << n)
        // the root is least, so upsets are closed under passing to children
        .filter(|&u| (0..n).all(|v| t.parent(v).is_none_or(|p| u >> p & 1 == 0) || u >> v & 1 == 1))
        .collect();
    let der = |u: u64| -> u64 {
        (0..n)
            .filter(|&a| t.children(a).iter().all(|&c| u >> c & 1 == 1))
            .fold(0, |acc, a| acc | 1 << a)
    };
    let (mut cur, mut k) = (0u64, 0);
    loop {
        let next = der(cur);
        assert!(upsets.contains(&next), "der leaves the upsets");
        if next == cur {
            return k;
        }
        cur = next;
        k += 1;
    }
}

fn oracle_height(t: &Tree, v: usize) -> usize {
    t.children(v).iter().map(|&c| 1 + oracle_height(t, c)).max().unwrap_or(0)
}

#[test]
fn criterion_07_cb_rank() {
    let mut bad = Vec::new();
    for d in 0..=6 {
        let t = Tree::cantor(d);
        let r = cb_rank(&t);
        let oracle = if t.size() <= 16 {
            oracle_rank_by_subsets(&t)
        } else {
            oracle_height(&t, t.root()) + 1
        };
        if r != d + 1 || r != oracle {
            bad.push(format!("cantor({d}): {r} vs oracle {oracle}"));
        }
    }
    for w in 2..=3 {
        for (name, make) in [("koenig", Tree::koenig as fn(usize, usize) -> _), ("baire", Tree::baire)] {
            let ranks: Vec<usize> = (0..=5).map(|d| cb_rank(&make(w, d).unwrap())).collect();
            if ranks.windows(2).any(|p| p[0] >= p[1]) {
                bad.push(format!("{name}({w}, d): {ranks:?}"));
            }
        }
    }
    let pass = report(7, bad.is_empty(), format!("cantor d=0..6, koenig/baire w=2,3, {} failures{}", bad.len(), first(&bad)));
    settle(7, pass);
}

/// The quotient order is the parent order restricted to fixed points,
/// binary meets are parent meets, and joins are `j` of parent joins.
fn oracle_quotient_base(f: &FiniteFrame, o: &Oracle, table: &[usize], witness: &[usize]) -> bool {
    let fixed: Vec<usize> = f.elements().filter(|&a| table[a] == a).collect();
    let qbot = table[o.bottom];
    let qjoin = |xs: &[usize]| table[o.join_all(xs.iter().copied())];
    let tri = witness.iter().all(|&a| {
        witness
            .iter()
            .all(|&b| o.meet(a, b) == qbot || f.leq(a, b) || f.leq(b, a))
    });
    let base = fixed.iter().all(|&a| {
        let below: Vec<usize> = witness.iter().copied().filter(|&x| f.leq(x, a)).collect();
        qjoin(&below) == a
    });
    witness.iter().all(|w| fixed.contains(w)) && tri && base
}

#[test]
fn criterion_08_quotient_bases() {
    let c = default_corpus();
    let (mut runs, mut bad) = (0, 0);
    for case in c.frames.iter().filter(|f| f.frame.size() <= DEFAULT_NUCLEUS_BOUND) {
        let f = &case.frame;
        let o = Oracle::new(f);
        let nuclei = enumerate_nuclei(f, DEFAULT_NUCLEUS_BOUND).unwrap();
        for b in &case.bases {
            let Ok(nb) = NonArchBase::new(f, b.members.clone()) else {
                continue;
            };
            let recs = verify_quot(f, &nb, DEFAULT_NUCLEUS_BOUND).unwrap();
            assert_eq!(recs.len(), nuclei.len());
            for r in recs {
                runs += 1;
                if !r.passed || !oracle_quotient_base(f, &o, &r.nucleus, &r.witness) {
                    bad += 1;
                }
            }
        }
    }
    let pass = report(8, bad == 0 && runs > 0, format!("{runs} nucleus quotients, {bad} failures"));
    settle(8, pass);
}

/// Ball `c + p^m Z_p` as the set of grid residues `k` in
/// `0..p^(lo+hi)` with `k / p^lo` in the ball, by direct congruence.
fn residues(b: &PAdicBall, lo: i32, hi: i32) -> BTreeSet<i128> {
    let p = b.p;
    let span = p.pow((lo + hi) as u32);
    let shift = b.center.exponent + lo;
    assert!(shift >= 0 || b.center.mantissa == 0);
    let scaled = if b.center.mantissa == 0 { 0 } else { b.center.mantissa * p.pow(shift as u32) };
    let modulus = p.pow((b.coset_exp + lo) as u32);
    (0..span).filter(|k| (k - scaled).rem_euclid(modulus) == 0).collect()
}

#[test]
fn criterion_09_padic() {
    let (mut pairs, mut bad) = (0usize, Vec::new());
    for p in [2i128, 3, 5] {
        for d in 0..=4 {
            let (lo, hi) = (d / 2, d - d / 2);
            let balls = ball_window(p, lo, hi).unwrap();
            let sets: Vec<BTreeSet<i128>> = balls.iter().map(|b| residues(b, lo, hi)).collect();
            for i in 0..balls.len() {
                for j in 0..balls.len() {
                    pairs += 1;
                    let (a, b) = (&sets[i], &sets[j]);
                    let expect = if a == b {
                        BallRelation::Equal
                    } else if a.is_subset(b) {
                        BallRelation::LeftInsideRight
                    } else if b.is_subset(a) {
                        BallRelation::RightInsideLeft
                    } else if a.is_disjoint(b) {
                        BallRelation::Disjoint
                    } else {
                        bad.push(format!("{} and {} overlap", balls[i], balls[j]));
                        continue;
                    };
                    if trichotomy(&balls[i], &balls[j]).unwrap() != expect {
                        bad.push(format!("{} vs {}", balls[i], balls[j]));
                    }
                }
            }
        }
    }
    for d in 0..=4 {
        let (t, _) = zp_tree(2, d).unwrap();
        if t.leaves().len() != 1 << d || branches_discrete_defect(&t).is_some() {
            bad.push(format!("zp_tree(2, {d}) branch frame"));
        }
        if d <= 3 {
            if let Some(w) = zp_round_trip_defect(&t) {
                bad.push(format!("zp_tree(2, {d}): {w}"));
            }
            let bf = BranchFrames::new(&t, EnumerationBound::default()).unwrap();
            let all: BTreeSet<u64> = bf.opens.sets().iter().map(|m| m.bits()).collect();
            if all.len() != 1 << (1 << d) {
                bad.push(format!("zp_tree(2, {d}) opens are not the powerset"));
            }
        }
    }
    let pass = report(9, bad.is_empty(), format!("{pairs} ball pairs, zp round trip d<=3, {} failures{}", bad.len(), first(&bad)));
    settle(9, pass);
}

#[test]
fn criterion_10_zero_dimension_counterexample() {
    let f = FiniteFrame::chain(3);
    let base = Mask::from_indices(3, [1, 2]);
    let r = check_nonarch_base(&f, &base);
    let o = Oracle::new(&f);
    let zero_dim_oracle = {
        let comp: Vec<usize> = f
            .elements()
            .filter(|&a| f.elements().any(|b| o.meet(a, b) == 0 && o.join(a, b) == 2))
            .collect();
        f.elements()
            .all(|a| o.join_all(comp.iter().copied().filter(|&c| f.leq(c, a))) == a)
    };
    let report_flag = verify_paper(&corpus(0, 3), false)
        .record("zero-dimensionality")
        .is_some_and(|r| r.status == Status::Flagged && r.witness.as_deref().is_some_and(|w| w.contains("chain-3")));
    let ok = r.is_nonarch_base() && r.not_zero_dimensional && !zero_dim_oracle && report_flag;
    let pass = report(
        10,
        ok,
        format!(
            "chain 0<m<1, base {{m,1}}: non-archimedean {}, zero-dimensional {}, flagged {}",
            r.is_nonarch_base(),
            !r.not_zero_dimensional,
            report_flag
        ),
    );
    settle(10, pass);
}

#[test]
fn criterion_11_spatial() {
    let c = default_corpus();
    let (mut checked, mut bad) = (0, Vec::new());
    for case in &c.frames {
        let f = &case.frame;
        for b in &case.bases {
            let Ok(nb) = NonArchBase::new(f, b.members.clone()) else {
                continue;
            };
            let nb = NonArchBase::new(f, chain_closure(f, nb.members()).unwrap()).unwrap();
            if !admits_nontrivial_decompositions(f, &nb) {
                continue;
            }
            let tb = build_tree_base(f, &nb).unwrap();
            checked += 1;
            let sr = spatial_reflection(f).unwrap();
            let pt = check_point_tree(f, &tb).unwrap();
            let branches = BranchSet::new(&tb.tree).len();
            if !(sr.injective && pt.passed() && Oracle::new(f).meet_irreducibles() == branches) {
                bad.push(format!("{}/{}", case.name, b.name));
            }
        }
    }
    let pass = report(
        11,
        bad.is_empty() && checked > 0,
        format!("{checked} tree-based frames, {} failures{}", bad.len(), first(&bad)),
    );
    settle(11, pass);
}
