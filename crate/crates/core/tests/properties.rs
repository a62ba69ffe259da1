//! Randomized invariants of the building blocks and of the tester.

use proptest::prelude::*;

use pifree::oracle::find_appearance_bruteforce;
use pifree::search::{find_pattern, PointSet};
use pifree::{
    detect_components, order_isomorphic, test_freeness, verify_witness, Cell, IndexSet, OutcomeKind, Pattern, Point,
    SequenceOracle, TesterConfig, ValueSet,
};

fn pattern_strategy() -> impl Strategy<Value = Pattern> {
    (1usize..=4).prop_flat_map(|k| Just((1..=k as u8).collect::<Vec<u8>>()).prop_shuffle()).prop_map(|v| {
        Pattern::new(v).expect("a shuffle of 1..=k is a permutation")
    })
}

proptest! {
    #[test]
    fn index_set_normalization_is_idempotent(raw in prop::collection::vec((0usize..60, 0usize..10), 0..8)) {
        let intervals: Vec<(usize, usize)> = raw.iter().map(|&(a, l)| (a, a + l)).collect();
        let once = IndexSet::new(intervals.clone());
        let twice = IndexSet::new(once.intervals().to_vec());
        prop_assert_eq!(&once, &twice);
        for i in 0..80 {
            let expected = intervals.iter().any(|&(a, b)| a <= i && i < b);
            prop_assert_eq!(once.contains(i), expected);
        }
        prop_assert_eq!(once.iter().count(), once.len());
    }

    #[test]
    fn value_set_operations_match_membership(
        a in prop::collection::vec((-20i32..20, 0i32..8), 0..4),
        b in prop::collection::vec((-20i32..20, 0i32..8), 0..4),
    ) {
        let to_set = |v: &[(i32, i32)]| {
            ValueSet::new(v.iter().map(|&(lo, w)| (lo as f64, (lo + w) as f64)).collect())
        };
        let (x, y) = (to_set(&a), to_set(&b));
        let (inter, uni) = (x.intersect(&y), x.union(&y));
        for t in -50..60 {
            let v = t as f64 / 2.0;
            prop_assert_eq!(inter.contains(v), x.contains(v) && y.contains(v));
            prop_assert_eq!(uni.contains(v), x.contains(v) || y.contains(v));
        }
        prop_assert_eq!(&ValueSet::new(x.intervals().to_vec()), &x);
    }

    #[test]
    fn components_do_not_depend_on_cell_order(
        cells in prop::collection::btree_set((0usize..6, 0usize..6), 0..20),
        seed in any::<u64>(),
    ) {
        let cells: Vec<Cell> = cells.into_iter().map(|(s, l)| Cell::new(s, l)).collect();
        let mut shuffled = cells.clone();
        let len = shuffled.len();
        for i in (1..len).rev() {
            shuffled.swap(i, (seed as usize ^ i.wrapping_mul(2654435761)) % (i + 1));
        }
        let a = detect_components(&cells);
        prop_assert_eq!(&a, &detect_components(&shuffled));
        prop_assert_eq!(a.iter().map(|c| c.cells.len()).sum::<usize>(), cells.len());
    }

    #[test]
    fn search_agrees_with_brute_force(
        values in prop::collection::vec(0u8..8, 0..14),
        pi in pattern_strategy(),
    ) {
        let f: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
        let points: Vec<Point> = f.iter().enumerate().map(|(i, &v)| Point::new(i, v)).collect();
        let fast = find_pattern(&PointSet::new(points), &pi);
        let slow = find_appearance_bruteforce(&f, &pi).unwrap();
        prop_assert_eq!(fast.is_some(), slow.is_some());
        if let Some(w) = fast {
            let vals: Vec<f64> = w.iter().map(|p| p.value).collect();
            prop_assert!(order_isomorphic(&vals, &pi).unwrap());
            prop_assert!(w.windows(2).all(|q| q[0].index < q[1].index));
        }
    }

    #[test]
    fn pattern_text_round_trip(pi in pattern_strategy()) {
        let back: Pattern = pi.to_string().parse().unwrap();
        prop_assert_eq!(back, pi);
    }

    #[test]
    fn order_type_survives_monotone_maps(values in prop::collection::vec(-50i32..50, 3), pi in pattern_strategy()) {
        let f: Vec<f64> = values.iter().take(pi.len()).map(|&v| f64::from(v)).collect();
        prop_assume!(f.len() == pi.len());
        let g: Vec<f64> = f.iter().map(|v| v * v * v + 3.0 * v).collect();
        prop_assert_eq!(order_isomorphic(&f, &pi).unwrap(), order_isomorphic(&g, &pi).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tester_witnesses_are_genuine(
        values in prop::collection::vec(prop::option::weighted(0.9, 0u16..200), 1..400),
        pi in pattern_strategy(),
        seed in any::<u64>(),
        m in 2usize..12,
    ) {
        let f: Vec<Option<f64>> = values.iter().map(|v| v.map(f64::from)).collect();
        let oracle = SequenceOracle::from_entries(f.clone()).unwrap();
        let cfg = TesterConfig::new(pi.clone(), 0.3).with_m(m).with_kappa(4).with_seed(seed);
        let out = test_freeness(&mut oracle.clone(), &cfg).unwrap();
        match out.kind {
            OutcomeKind::FoundPi => prop_assert!(verify_witness(&oracle, &out.witness, &pi)),
            OutcomeKind::NotFound => prop_assert!(out.witness.is_empty()),
            other => prop_assert!(false, "unexpected outcome {:?}", other),
        }
        prop_assert!(out.queries_used <= f.len() as u64);
    }
}
