mod common;

use fairdiv::cake::{
    cake_bic_audit, expected_share_check, incremental_accommodation, is_proportional, split_equal,
    CakeError, PieceSet, PiecewiseDensity,
};
use fairdiv::rational::{int, ratio};
use itertools::Itertools;
use proptest::prelude::*;

use common::{any_density, random_density, random_piece, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_equal_postconditions(seed in any::<u64>(), k in 2usize..=6, linear in any::<bool>()) {
        let mut r = rng(seed);
        let f = random_density(&mut r, linear);
        let x = random_piece(&mut r);
        let crumbs = split_equal(&x, &f, k).unwrap();
        prop_assert_eq!(crumbs.len(), k);
        for c in &crumbs {
            prop_assert_eq!(c.measure(), x.measure() / int(k as i64));
            prop_assert_eq!(f.value(c), f.value(&x) / int(k as i64));
        }
        for (a, b) in crumbs.iter().tuple_combinations() {
            prop_assert!(a.is_disjoint(b));
        }
        let union = crumbs.iter().fold(PieceSet::empty(), |acc, c| acc.union(c).unwrap());
        prop_assert_eq!(union, x);
    }

    #[test]
    fn ia_trace_keeps_exact_shares(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let fs: Vec<PiecewiseDensity> = (0..n).map(|_| any_density(&mut r)).collect();
        let out = incremental_accommodation(&fs).unwrap();
        prop_assert_eq!(out.trace.len(), n);
        for (t, pieces) in out.trace.iter().enumerate() {
            // the pieces always tile the cake
            prop_assert_eq!(pieces.len(), t + 1);
            let union = pieces.iter().fold(PieceSet::empty(), |acc, p| acc.union(p).unwrap());
            prop_assert_eq!(union, PieceSet::full());
            for (j, p) in pieces.iter().enumerate() {
                prop_assert!(fs[j].value(p) >= ratio(1, t as i64 + 1));
                if j < t {
                    // an owner keeps t/(t+1) of her piece, by her own measure
                    let before = fs[j].value(&out.trace[t - 1][j]);
                    prop_assert_eq!(fs[j].value(p), before * ratio(t as i64, t as i64 + 1));
                }
            }
        }
        prop_assert!(is_proportional(&out.allocation, &fs).unwrap().verdict);
    }

    #[test]
    fn expected_share_identity(seed in any::<u64>(), t in 2usize..=6) {
        let mut r = rng(seed);
        let x = random_piece(&mut r);
        let (f, g) = (any_density(&mut r), any_density(&mut r));
        let (lhs, rhs) = expected_share_check(&x, &f, &g, t).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn split_examples() {
    let f = PiecewiseDensity::linear(int(0), int(2)).unwrap();
    let c = split_equal(&PieceSet::full(), &f, 2).unwrap();
    assert_eq!(
        c[0],
        PieceSet::new(vec![(int(0), ratio(1, 4)), (ratio(3, 4), int(1))]).unwrap()
    );
    assert_eq!(
        c[1],
        PieceSet::new(vec![(ratio(1, 4), ratio(3, 4))]).unwrap()
    );
    assert_eq!(f.value(&c[0]), ratio(1, 2));

    let step = PiecewiseDensity::piecewise_constant(&[ratio(1, 2)], &[int(2), int(0)]).unwrap();
    let c = split_equal(&PieceSet::full(), &step, 2).unwrap();
    assert_eq!(
        c[0],
        PieceSet::new(vec![(int(0), ratio(1, 4)), (ratio(1, 2), ratio(3, 4))]).unwrap()
    );
    assert_eq!(
        c[1],
        PieceSet::new(vec![(ratio(1, 4), ratio(1, 2)), (ratio(3, 4), int(1))]).unwrap()
    );
    assert!(matches!(
        split_equal(&PieceSet::full(), &f, 1),
        Err(CakeError::CrumbCount(1))
    ));
}

#[test]
fn bic_audit_cross_checks_for_three_agents() {
    let mut r = rng(21);
    for agent in 0..3 {
        let truth = any_density(&mut r);
        let devs: Vec<_> = (0..4).map(|_| any_density(&mut r)).collect();
        let earlier: Vec<_> = (0..agent).map(|_| any_density(&mut r)).collect();
        let a = cake_bic_audit(agent, &truth, &devs, &earlier, 3).unwrap();
        assert!(a.verdict && a.cross_check_ok(), "{a:?}");
        assert!(a.deviations.iter().all(|d| *d <= a.truthful));
    }
    // the last agent's report matters only through her own pick
    let audit = cake_bic_audit(
        1,
        &PiecewiseDensity::uniform(),
        &[],
        &[PiecewiseDensity::uniform()],
        2,
    )
    .unwrap();
    assert_eq!(audit.truthful, ratio(1, 2));
    assert!(cake_bic_audit(2, &PiecewiseDensity::uniform(), &[], &[], 3).is_err());
}

#[test]
fn closed_form_scales_with_arrival() {
    // agent 1 of 4 holds X_1^1 = [0,1): expected final value (1/4) f(X)
    let f = PiecewiseDensity::linear(ratio(1, 2), int(1)).unwrap();
    let a = cake_bic_audit(0, &f, &[], &[], 4).unwrap();
    assert_eq!(a.truthful, ratio(1, 4) * f.value(&PieceSet::full()));
    assert_eq!(a.enumerated, None);
}
