mod common;

use common::random_tree;
use locus_core::branch::{cb_rank, gbi_check};
use locus_core::order::count_forest_upsets;
use locus_core::{BranchFrames, BranchSet, EnumerationBound, Mask, Tree};
use proptest::prelude::*;

fn upset_count(t: &Tree) -> u128 {
    count_forest_upsets(&t.poset().forest_parents().unwrap())
}

/// Random trees whose upset frame stays small enough to tabulate.
fn tabulable_tree() -> impl Strategy<Value = Tree> {
    (any::<u64>(), 1usize..=10)
        .prop_map(|(s, n)| random_tree(s, n))
        .prop_filter("too many upsets", |t| upset_count(t) <= 256)
}

fn mask_of(len: usize, bits: u64) -> Mask {
    Mask::from_indices(len, (0..len).filter(|&i| bits >> (i % 64) & 1 == 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn branches_run_from_the_root_to_one_leaf(seed in any::<u64>(), n in 1usize..=15) {
        let t = random_tree(seed, n);
        let bs = BranchSet::new(&t);
        prop_assert_eq!(bs.len(), t.leaves().len());
        for b in bs.branches() {
            prop_assert!(b.contains(t.root()));
            prop_assert_eq!(b.iter().filter(|&v| t.is_leaf(v)).count(), 1);
        }
        for v in 0..t.size() {
            let want = Mask::from_indices(bs.len(), (0..bs.len()).filter(|&i| bs.branches()[i].contains(v)));
            prop_assert_eq!(bs.basic_open(v), &want);
        }
    }

    #[test]
    fn adjunction_on_sampled_pairs(seed in any::<u64>(), n in 1usize..=15, u in any::<u64>(), v in any::<u64>()) {
        let t = random_tree(seed, n);
        let bs = BranchSet::new(&t);
        let up = t.poset().up_closure(&mask_of(t.size(), u));
        let opens = mask_of(bs.len(), v);
        prop_assert_eq!(bs.k_star(&up), bs.k_star_by_basics(&up));
        prop_assert_eq!(bs.k_star(&up).is_subset(&opens), up.is_subset(&bs.k_lower(&opens)));
        prop_assert_eq!(bs.k_lower(&opens), bs.k_lower_by_formula(&opens));
        prop_assert!(bs.is_open(&opens));
        // ker is inflationary and idempotent on upsets
        let k = bs.ker(&up);
        prop_assert!(up.is_subset(&k));
        prop_assert_eq!(bs.ker(&k), k);
    }

    #[test]
    fn opens_are_all_sets_of_branches(t in tabulable_tree()) {
        let bf = BranchFrames::new(&t, EnumerationBound::default()).unwrap();
        prop_assert_eq!(bf.opens.frame.size(), 1usize << t.leaves().len());
        prop_assert_eq!(bf.upsets.frame.size() as u128, upset_count(&t));
        prop_assert_eq!(bf.adjunction_defect(), None);
        prop_assert_eq!(bf.basic_generation_defect(), None);
        prop_assert!(bf.kstar_is_morphism());
    }

    #[test]
    fn ker_is_below_every_ler(t in tabulable_tree()) {
        let bf = BranchFrames::new(&t, EnumerationBound::default()).unwrap();
        let ker = bf.ker().unwrap();
        prop_assert!(ker.is_nucleus());
        for j in bf.enumerable_opens_nuclei().unwrap() {
            let ler = bf.ler(&j).unwrap();
            prop_assert!(ler.is_nucleus());
            prop_assert!(ker.leq(&ler));
        }
        let id = locus_core::ClosureMap::identity(&bf.opens.frame);
        let ler = bf.ler(&id).unwrap();
        prop_assert_eq!(ler.table(), ker.table());
    }

    #[test]
    fn der_sits_below_ker_away_from_the_leaves(t in tabulable_tree()) {
        let bf = BranchFrames::new(&t, EnumerationBound::default()).unwrap();
        let id = locus_core::ClosureMap::identity(&bf.opens.frame);
        let r = gbi_check(&bf, &id).unwrap();
        prop_assert!(r.der_le_ker_off_leaves);
        prop_assert!(r.ker_le_ler);
        // der(∅) is the set of leaves while ker(∅) is empty
        prop_assert!(!r.der_le_ker);
        prop_assert!(!r.tables_equal);
        prop_assert_eq!(r.der_iterations, cb_rank(&t));
    }

    #[test]
    fn rank_is_height_plus_one(seed in any::<u64>(), n in 1usize..=15) {
        let t = random_tree(seed, n);
        prop_assert_eq!(cb_rank(&t), t.height() + 1);
    }
}
