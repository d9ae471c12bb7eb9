use std::sync::OnceLock;

use feynhopf::graphs::Model;
use feynhopf::hopf::Hopf;
use feynhopf::poly::MPoly;
use feynhopf::renorm::{check_birkhoff, check_rg, Laurent, ToyRules};
use feynhopf::theory::TheorySpec;
use feynhopf::q;
use proptest::prelude::*;

fn qed() -> &'static Hopf {
    static H: OnceLock<Hopf> = OnceLock::new();
    H.get_or_init(|| Hopf::new(Model::with_window(TheorySpec::qed(), 2, 2)))
}

fn laurent() -> impl Strategy<Value = Laurent> {
    prop::collection::vec((-3i32..=3, -5i64..=5, 1i64..=3), 0..5).prop_map(|ts| {
        let mut l = Laurent::zero();
        for (p, n, d) in ts {
            l.add_term(p, MPoly::constant(2, q(n, d)));
        }
        l
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laurent_ring_laws(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.pole_part().add(&a.regular_part()), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn birkhoff_and_rg_hold_for_any_seed(seed in any::<u64>()) {
        let rules = ToyRules::new(qed(), seed, 6);
        let b = check_birkhoff(&rules, 20, seed);
        prop_assert!(b.passed(), "{}", b.render_text());
        let (rg, _) = check_rg(&rules);
        prop_assert!(rg.passed(), "{}", rg.render_text());
    }
}
