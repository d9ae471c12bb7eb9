use feynhopf::diffeo::{
    lagrange_invert_1d, newton_invert_1d, random_diffeo, random_unit_series, FdbCoords, FormalDiffeo,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composition_is_associative(seed in any::<u64>(), k in 1usize..=2) {
        let mut r = rng(seed);
        let order = if k == 1 { 6 } else { 4 };
        let (f, g, h) = (random_diffeo(&mut r, k, order), random_diffeo(&mut r, k, order), random_diffeo(&mut r, k, order));
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), k in 1usize..=2) {
        let mut r = rng(seed);
        let order = if k == 1 { 7 } else { 4 };
        let f = random_diffeo(&mut r, k, order);
        let id = FormalDiffeo::identity(k, order);
        let inv = f.invert();
        prop_assert_eq!(f.compose(&inv), id.clone());
        prop_assert_eq!(inv.compose(&f), id);
    }

    #[test]
    fn lagrange_matches_newton(seed in any::<u64>()) {
        let f = random_diffeo(&mut rng(seed), 1, 8);
        prop_assert_eq!(lagrange_invert_1d(&f), newton_invert_1d(&f));
    }

    #[test]
    fn pairing_is_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let coords = FdbCoords::new(1, 6);
        let (f, g) = (random_diffeo(&mut r, 1, 7), random_diffeo(&mut r, 1, 7));
        let gf = g.compose(&f);
        for (i, n) in &coords.vars {
            let t = coords.coproduct(*i, n);
            prop_assert_eq!(coords.pair(&t, *i, &f, &g), gf.coord(*i, n));
        }
    }

    #[test]
    fn action_is_a_right_action(seed in any::<u64>()) {
        // acting by f then g is acting by the composite, as substitution
        let mut r = rng(seed);
        let (f, g) = (random_diffeo(&mut r, 2, 4), random_diffeo(&mut r, 2, 4));
        let s = random_unit_series(&mut r, 2, 4);
        prop_assert_eq!(f.act(&g.act(&s)), g.compose(&f).act(&s));
    }
}
