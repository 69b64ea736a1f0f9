mod common;

use fairdiv::io::{parse_instance, parse_owner_list, serialize_instance, Instance};
use fairdiv::Profile;
use proptest::prelude::*;

use common::{any_density, rng};

proptest! {
    #[test]
    fn goods_round_trip(rows in (1usize..=4, 1usize..=5).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::collection::vec((0i64..=50, 1i64..=9), m), n)
    })) {
        let p = Profile::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(|(a, b)| fairdiv::rational::ratio(a, b)).collect())
                .collect(),
        )
        .unwrap();
        let inst = Instance::Goods(p);
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn cake_round_trip(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let inst = Instance::Cake((0..n).map(|_| any_density(&mut r)).collect());
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn owner_lists_round_trip(owners in proptest::collection::vec(0usize..4, 1..8)) {
        let x = fairdiv::Allocation::new(owners, 4).unwrap();
        prop_assert_eq!(parse_owner_list(&x.to_owner_list(), 4).unwrap(), x);
    }
}

#[test]
fn shipped_instances_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let inst = parse_instance(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
        seen += 1;
    }
    assert!(seen >= 3);
}
