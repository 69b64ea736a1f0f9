use fairdiv::audits::{
    allocation_dominates, dominates, exhaustive_witness, fpo_slack, is_ef1, is_efficient,
    is_envy_free, is_fpo, is_fulfilling, Dominance, DominanceMode, EfficiencyCriterion, FpoMethod,
    Witness,
};
use fairdiv::mechanisms::{OwnerVectors, DEFAULT_ENUM_CAP};
use fairdiv::rational::int;
use fairdiv::{utility, Allocation, Bundle, Profile, Rational};
use num_traits::Zero;
use proptest::prelude::*;

/// Small integer profiles (ties and zeros are common) plus an allocation.
fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = (Profile<Rational>, Allocation)> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(proptest::collection::vec(0i64..=4, m), n),
            proptest::collection::vec(0..n, m),
        )
            .prop_map(move |(rows, owners)| {
                let p = Profile::new(
                    rows.into_iter()
                        .map(|r| r.into_iter().map(int).collect())
                        .collect(),
                )
                .unwrap();
                (p, Allocation::new(owners, n).unwrap())
            })
    })
}

fn bundle_pair(m: usize) -> impl Strategy<Value = (Vec<Rational>, Bundle, Bundle)> {
    (
        proptest::collection::vec(0i64..=4, m),
        proptest::collection::vec(any::<bool>(), m),
        proptest::collection::vec(any::<bool>(), m),
    )
        .prop_map(move |(v, a, b)| {
            let pick = |mask: Vec<bool>| Bundle::new((0..m).filter(|&j| mask[j]).collect());
            (v.into_iter().map(int).collect(), pick(a), pick(b))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dominance_implies_higher_utility((v, a, b) in (1usize..=6).prop_flat_map(bundle_pair)) {
        for mode in [DominanceMode::Sd, DominanceMode::SdPlus] {
            if dominates(&v, &a, &b, mode).is_weak_or_better() {
                prop_assert!(utility(&v, &a) >= utility(&v, &b));
            }
        }
        // full-order dominance is the stronger relation
        if dominates(&v, &a, &b, DominanceMode::Sd) == Dominance::Strict {
            prop_assert!(dominates(&v, &a, &b, DominanceMode::SdPlus).is_weak_or_better());
        }
    }

    #[test]
    fn efficiency_notions_are_nested((p, x) in instance(3, 4)) {
        let eff = |c| is_efficient(&p, &x, c, DEFAULT_ENUM_CAP).unwrap().verdict;
        let (pareto, sd_plus, sd) =
            (eff(EfficiencyCriterion::Pareto), eff(EfficiencyCriterion::SdPlus), eff(EfficiencyCriterion::Sd));
        prop_assert!(!pareto || sd_plus);
        prop_assert!(!sd_plus || sd);
    }

    #[test]
    fn pruned_search_matches_naive_scan((p, x) in instance(3, 4)) {
        for c in [EfficiencyCriterion::Pareto, EfficiencyCriterion::Sd, EfficiencyCriterion::SdPlus] {
            let fast = is_efficient(&p, &x, c, DEFAULT_ENUM_CAP).unwrap();
            let slow = exhaustive_witness(&p, &x, c, DEFAULT_ENUM_CAP).unwrap();
            match (fast.witness, slow) {
                (None, None) => prop_assert!(fast.verdict),
                (Some(Witness::Allocation { allocation, utilities }), Some(y)) => {
                    prop_assert_eq!(&allocation, &y);
                    prop_assert_eq!(utilities, p.utilities(&y));
                    prop_assert!(allocation_dominates(&p, &y, &x, c));
                }
                (w, s) => prop_assert!(false, "{:?} vs {:?}", w, s),
            }
        }
    }

    #[test]
    fn fpo_implies_pareto((p, x) in instance(3, 3)) {
        let slack = fpo_slack(&p, &x, FpoMethod::Simplex).unwrap();
        prop_assert!(slack >= Rational::zero());
        let fpo = is_fpo(&p, &x).unwrap();
        prop_assert_eq!(fpo.verdict, slack.is_zero());
        if fpo.verdict {
            prop_assert!(is_efficient(&p, &x, EfficiencyCriterion::Pareto, DEFAULT_ENUM_CAP).unwrap().verdict);
        } else if let Some(Witness::Fractional { shares, utilities }) = fpo.witness {
            let base = p.utilities(&x);
            for j in 0..p.items() {
                let col: Rational = shares.iter().map(|s| s[j].clone()).sum();
                prop_assert_eq!(col, int(1));
            }
            prop_assert!(utilities.iter().zip(&base).all(|(a, b)| a >= b));
            prop_assert!(utilities.iter().zip(&base).any(|(a, b)| a > b));
        } else {
            prop_assert!(false, "missing fractional witness");
        }
    }

    #[test]
    fn simplex_matches_vertex_enumeration((p, x) in instance(2, 3)) {
        prop_assert_eq!(
            fpo_slack(&p, &x, FpoMethod::Simplex).unwrap(),
            fpo_slack(&p, &x, FpoMethod::VertexEnumeration).unwrap()
        );
    }

    #[test]
    fn ef1_witness_is_a_real_violation((p, x) in instance(4, 6)) {
        let r = is_ef1(&p, &x).unwrap();
        let bundles = x.bundles(p.agents());
        let envy_after_removal = |i: usize, k: usize| {
            let own = utility(p.row(i), &bundles[i]);
            let other = &bundles[k];
            other.is_empty() || other.iter().any(|g| own >= utility(p.row(i), &other.without(g)))
        };
        let oracle = (0..p.agents()).all(|i| (0..p.agents()).all(|k| i == k || envy_after_removal(i, k)));
        prop_assert_eq!(r.verdict, oracle);
        if let Some(Witness::EnvyPair { envious, envied }) = r.witness {
            prop_assert!(!envy_after_removal(envious, envied));
        }
        // envy-freeness is the stronger property
        if is_envy_free(&p, &x).unwrap().verdict {
            prop_assert!(r.verdict);
        }
    }

    #[test]
    fn fulfilling_witness_gets_nothing((p, x) in instance(3, 6)) {
        let r = is_fulfilling(&p, &x).unwrap();
        let n = p.agents();
        let u = p.utilities(&x);
        let needy = |i: usize| p.row(i).iter().filter(|v| !v.is_zero()).count() >= n;
        prop_assert_eq!(r.verdict, (0..n).all(|i| !needy(i) || u[i] > Rational::zero()));
        if let Some(Witness::Agent(i)) = r.witness {
            prop_assert!(needy(i) && u[i].is_zero());
        }
    }

    #[test]
    fn float_profiles_agree_with_exact((p, x) in instance(3, 4)) {
        use fairdiv::Scalar;
        let pf: Profile<f64> = p.map(|v| v.approx_f64());
        for c in [EfficiencyCriterion::Pareto, EfficiencyCriterion::Sd, EfficiencyCriterion::SdPlus] {
            prop_assert_eq!(
                is_efficient(&p, &x, c, DEFAULT_ENUM_CAP).unwrap().verdict,
                is_efficient(&pf, &x, c, DEFAULT_ENUM_CAP).unwrap().verdict
            );
        }
        prop_assert_eq!(is_ef1(&p, &x).unwrap().verdict, is_ef1(&pf, &x).unwrap().verdict);
    }
}

#[test]
fn search_respects_cap() {
    let p = Profile::new(vec![vec![int(1); 9]; 4]).unwrap();
    let x = Allocation::new(vec![0; 9], 4).unwrap();
    assert!(is_efficient(&p, &x, EfficiencyCriterion::Pareto, 1000).is_err());
    assert_eq!(OwnerVectors::new(2, 3).count(), 8);
}
