use locus_core::padic::{qp_ball_tree, trichotomy, zp_tree, BallRelation};
use locus_core::{PAdicBall, PAdicNumber};
use proptest::prelude::*;

const K: u32 = 6;

fn prime() -> impl Strategy<Value = i128> {
    prop_oneof![Just(2i128), Just(3), Just(5), Just(7)]
}

fn number(p: i128) -> impl Strategy<Value = PAdicNumber> {
    (-500i128..500, -3i32..4).prop_map(move |(m, e)| PAdicNumber::new(p, m, e))
}

fn v(p: i128, x: &PAdicNumber, y: &PAdicNumber) -> Option<i32> {
    x.sub(p, y).unwrap().valuation()
}

/// Residues mod `p^K` of the integers in `c + p^m Z`.
fn residues(p: i128, c: i128, m: u32) -> Vec<i128> {
    let modulus = p.pow(K);
    let step = p.pow(m);
    let mut out: Vec<i128> = (0..modulus / step).map(|k| (c + k * step).rem_euclid(modulus)).collect();
    out.sort_unstable();
    out
}

proptest! {
    #[test]
    fn ultrametric((p, x, y, z) in prime().prop_flat_map(|p| (Just(p), number(p), number(p), number(p)))) {
        let (xz, xy, yz) = (v(p, &x, &z), v(p, &x, &y), v(p, &y, &z));
        // a missing valuation is +infinity
        let lo = match (xy, yz) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        if let (Some(lo), Some(xz)) = (lo, xz) {
            prop_assert!(xz >= lo);
        }
        if lo.is_none() {
            prop_assert_eq!(xz, None);
        }
    }

    #[test]
    fn display_parses_back((p, x) in prime().prop_flat_map(|p| (Just(p), number(p)))) {
        prop_assert_eq!(PAdicNumber::parse(p, &x.display(p)).unwrap(), x);
    }

    #[test]
    fn balls_survive_json((p, c, m) in prime().prop_flat_map(|p| (Just(p), number(p), -3i32..5))) {
        let b = PAdicBall::new(p, c, m).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        prop_assert_eq!(serde_json::from_str::<PAdicBall>(&s).unwrap(), b);
        prop_assert!(b.contains(&c).unwrap());
    }

    #[test]
    fn trichotomy_matches_residues(p in prime(), c1 in -200i128..200, c2 in -200i128..200, m1 in 0u32..=4, m2 in 0u32..=4) {
        let a = PAdicBall::from_integer(p, c1, m1 as i32).unwrap();
        let b = PAdicBall::from_integer(p, c2, m2 as i32).unwrap();
        let (ra, rb) = (residues(p, c1, m1), residues(p, c2, m2));
        let inside = |x: &[i128], y: &[i128]| x.iter().all(|r| y.binary_search(r).is_ok());
        let want = if ra == rb {
            BallRelation::Equal
        } else if inside(&ra, &rb) {
            BallRelation::LeftInsideRight
        } else if inside(&rb, &ra) {
            BallRelation::RightInsideLeft
        } else {
            prop_assert!(ra.iter().all(|r| rb.binary_search(r).is_err()));
            BallRelation::Disjoint
        };
        prop_assert_eq!(trichotomy(&a, &b).unwrap(), want);
    }

    #[test]
    fn membership_matches_congruence(p in prime(), c in -200i128..200, x in -200i128..200, m in 0u32..=4) {
        let b = PAdicBall::from_integer(p, c, m as i32).unwrap();
        let want = (x - c).rem_euclid(p.pow(m)) == 0;
        prop_assert_eq!(b.contains(&PAdicNumber::integer(p, x)).unwrap(), want);
    }

    #[test]
    fn children_partition_the_ball(p in prime(), c in -50i128..50, m in -2i32..3) {
        let b = PAdicBall::from_integer(p, c, m).unwrap();
        let kids = b.children().unwrap();
        prop_assert_eq!(kids.len() as i128, p);
        for (i, k) in kids.iter().enumerate() {
            prop_assert_eq!(trichotomy(k, &b).unwrap(), BallRelation::LeftInsideRight);
            for l in &kids[i + 1..] {
                prop_assert_eq!(trichotomy(k, l).unwrap(), BallRelation::Disjoint);
            }
        }
    }
}

#[test]
fn small_balls_for_three() {
    let b = PAdicBall::open(3, PAdicNumber::ZERO, 1).unwrap();
    assert!(b.contains(&PAdicNumber::integer(3, 9)).unwrap());
    assert!(!b.contains(&PAdicNumber::integer(3, 1)).unwrap());
    let b1 = PAdicBall::open(3, PAdicNumber::integer(3, 1), 1).unwrap();
    assert_eq!(trichotomy(&b, &b1).unwrap(), BallRelation::Disjoint);
    let unit = PAdicBall::open(3, PAdicNumber::ZERO, 0).unwrap();
    let at3 = PAdicBall::open(3, PAdicNumber::integer(3, 3), 1).unwrap();
    assert_eq!(trichotomy(&unit, &at3).unwrap(), BallRelation::RightInsideLeft);
}

#[test]
fn ball_trees() {
    let (t, balls) = zp_tree(2, 3).unwrap();
    assert_eq!((t.size(), t.leaves().len(), balls.len()), (15, 8, 15));
    assert!(t.is_isomorphic(&locus_core::Tree::cantor(3)));
    let (t, _) = zp_tree(3, 1).unwrap();
    assert_eq!(t.children(t.root()).len(), 3);
    assert_eq!(zp_tree(5, 0).unwrap().0.size(), 1);
    let forest = qp_ball_tree(2, -1, 1).unwrap();
    assert_eq!(forest.len(), 2);
    for (t, _) in &forest {
        assert_eq!(t.children(t.root()).len(), 2);
    }
    let same = qp_ball_tree(3, 0, 2).unwrap();
    assert_eq!(same.len(), 1);
    assert!(same[0].0.is_isomorphic(&zp_tree(3, 2).unwrap().0));
}
