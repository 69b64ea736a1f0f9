use fairdiv::audits::{is_efficient, is_pigou_dalton_transfer, pdp_holds, EfficiencyCriterion};
use fairdiv::interim::{bic_audit_exact, DEFAULT_EVAL_CAP};
use fairdiv::mechanisms::{
    pass_least_favorite, rr_pass, serial_dictatorship, welfare_max, MechanismId, OwnerVectors,
    DEFAULT_ENUM_CAP,
};
use fairdiv::rational::{int, ratio};
use fairdiv::welfare::{compare_welfare, WelfareFn};
use fairdiv::{Allocation, Profile, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use std::cmp::Ordering;

fn profile_strategy(
    ns: std::ops::RangeInclusive<usize>,
    ms: std::ops::RangeInclusive<usize>,
    lo: i64,
) -> impl Strategy<Value = Profile<Rational>> {
    (ns, ms).prop_flat_map(move |(n, m)| {
        proptest::collection::vec(proptest::collection::vec(lo..=6i64, m), n).prop_map(|rows| {
            Profile::new(
                rows.into_iter()
                    .map(|r| r.into_iter().map(int).collect())
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn welfare_fns() -> Vec<WelfareFn> {
    vec![
        WelfareFn::Utilitarian,
        WelfareFn::Nash,
        WelfareFn::Egalitarian,
        WelfareFn::PMean(ratio(1, 2)),
        WelfareFn::PMean(ratio(-1, 1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rr_pass_depends_only_on_orders(p in profile_strategy(1..=4, 1..=7, 0)) {
        // x -> x^2 + x is strictly increasing and fixes zero
        let q = p.map(|v: &Rational| v * v + v);
        prop_assert_eq!(rr_pass(&p.reports()).unwrap(), rr_pass(&q.reports()).unwrap());
    }

    #[test]
    fn rr_pass_is_balanced_when_everything_is_wanted(p in profile_strategy(1..=4, 1..=8, 1)) {
        let (n, m) = (p.agents(), p.items());
        let x = rr_pass(&p.reports()).unwrap();
        for (i, b) in x.bundles(n).iter().enumerate() {
            // agent i picks at turns i, i + n, ...
            prop_assert_eq!(b.len(), (m + n - 1 - i) / n);
        }
    }

    #[test]
    fn rr_pass_never_hands_out_unwanted_items(p in profile_strategy(1..=4, 1..=7, 0)) {
        let x = rr_pass(&p.reports()).unwrap();
        for j in 0..p.items() {
            let someone = (0..p.agents()).any(|i| !p.value(i, j).is_zero());
            if someone {
                prop_assert!(!p.value(x.owner(j), j).is_zero());
            }
        }
    }

    #[test]
    fn utilitarian_optimum_matches_column_maxima(p in profile_strategy(1..=3, 1..=5, 0)) {
        let x = welfare_max(&p, &WelfareFn::Utilitarian, DEFAULT_ENUM_CAP).unwrap();
        let total: Rational = p.utilities(&x).into_iter().sum();
        let oracle: Rational = (0..p.items())
            .map(|j| (0..p.agents()).map(|i| p.value(i, j).clone()).max().unwrap())
            .sum();
        prop_assert_eq!(total, oracle);
    }

    #[test]
    fn welfare_max_is_optimal_and_first(p in profile_strategy(1..=3, 1..=4, 0)) {
        for w in welfare_fns() {
            let x = welfare_max(&p, &w, DEFAULT_ENUM_CAP).unwrap();
            let ux = p.utilities(&x);
            for owners in OwnerVectors::new(p.agents(), p.items()) {
                let y = Allocation::new(owners, p.agents()).unwrap();
                let ord = compare_welfare(&w, &p.utilities(&y), &ux);
                prop_assert!(ord != Ordering::Greater, "{} beaten by {:?}", w, y.owners());
                if ord == Ordering::Equal {
                    prop_assert!(x.owners() <= y.owners());
                }
            }
        }
    }

    #[test]
    fn utilitarian_optimum_is_pareto_efficient(p in profile_strategy(1..=3, 1..=5, 0)) {
        let x = welfare_max(&p, &WelfareFn::Utilitarian, DEFAULT_ENUM_CAP).unwrap();
        prop_assert!(is_efficient(&p, &x, EfficiencyCriterion::Pareto, DEFAULT_ENUM_CAP).unwrap().verdict);
    }

    #[test]
    fn pigou_dalton_family_accepts_transfers(
        x in proptest::collection::vec(0i64..=20, 2..=4),
        pick in (0usize..4, 0usize..4),
        amount in 1i64..=10,
    ) {
        let n = x.len();
        let (a, b) = (pick.0 % n, pick.1 % n);
        prop_assume!(a != b && x[a] > x[b]);
        // move less than half the gap so the order is kept
        let gap = int(x[a] - x[b]);
        let delta = gap.clone() * ratio(amount, 21);
        let xr: Vec<Rational> = x.iter().map(|&v| int(v)).collect();
        let mut y = xr.clone();
        y[a] = &y[a] - &delta;
        y[b] = &y[b] + &delta;
        prop_assert!(is_pigou_dalton_transfer(&xr, &y));
        for w in welfare_fns() {
            prop_assert!(pdp_holds(&w, &xr, &y).unwrap(), "{}", w);
        }
    }

    #[test]
    fn bic_verdict_is_scale_invariant(
        v in proptest::collection::vec(0i64..=9, 3),
        scale in 1i64..=7,
    ) {
        let values: Vec<Rational> = v.iter().map(|&x| int(x)).collect();
        let scaled: Vec<Rational> = values.iter().map(|x| x * int(scale) / int(3)).collect();
        for agent in 0..2 {
            let a = bic_audit_exact(&MechanismId::RrPass, agent, &values, 2, 3, DEFAULT_EVAL_CAP).unwrap();
            let b = bic_audit_exact(&MechanismId::RrPass, agent, &scaled, 2, 3, DEFAULT_EVAL_CAP).unwrap();
            prop_assert_eq!(a.verdict, b.verdict);
            prop_assert_eq!(a.truthful * int(scale) / int(3), b.truthful);
        }
    }
}

#[test]
fn serial_dictatorship_cascades() {
    let p = Profile::new(vec![
        vec![int(1), int(0), int(0), int(2)],
        vec![int(3), int(1), int(0), int(0)],
        vec![int(0), int(1), int(0), int(5)],
    ])
    .unwrap();
    let x = serial_dictatorship(&p, &[1, 0, 2]).unwrap();
    // item 3 is unwanted and goes to the last dictator
    assert_eq!(x.owners(), &[1, 1, 2, 0]);
    assert!(
        is_efficient(&p, &x, EfficiencyCriterion::SdPlus, DEFAULT_ENUM_CAP)
            .unwrap()
            .verdict
    );
}

#[test]
fn pass_least_favorite_gives_away_one_item() {
    let p = Profile::new(vec![
        vec![int(3), int(1), int(2)],
        vec![int(1), int(1), int(1)],
    ])
    .unwrap();
    assert_eq!(pass_least_favorite(&p).unwrap().owners(), &[0, 1, 0]);
}

#[test]
fn mechanism_ids_round_trip() {
    for s in [
        "rr-pass",
        "serial-dictatorship:2,1",
        "welfare-max:nash",
        "welfare-max:p-mean=1/2",
        "pass-least-favorite",
    ] {
        let id: MechanismId = s.parse().unwrap();
        assert_eq!(id.to_string(), s);
    }
    assert!("welfare-max:median".parse::<MechanismId>().is_err());
}
