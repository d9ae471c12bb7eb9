use std::sync::OnceLock;

use feynhopf::graphs::Model;
use feynhopf::green::{st_ideal, Greens};
use feynhopf::hopf::{Element, GenId, Hopf, Membership, Mono};
use feynhopf::theory::TheorySpec;
use feynhopf::{qi, Q};
use proptest::prelude::*;

fn qed() -> &'static Hopf {
    static H: OnceLock<Hopf> = OnceLock::new();
    H.get_or_init(|| Hopf::new(Model::with_window(TheorySpec::qed(), 2, 2)))
}

fn ym() -> &'static Hopf {
    static H: OnceLock<Hopf> = OnceLock::new();
    H.get_or_init(|| Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2)))
}

fn pick(h: &Hopf, i: usize) -> GenId {
    let gens = h.all_generators(h.lmax());
    gens[i % gens.len()]
}

fn theory(ym_spec: bool) -> &'static Hopf {
    if ym_spec {
        ym()
    } else {
        qed()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antipode_is_an_involution(which in any::<bool>(), i in any::<usize>()) {
        let h = theory(which);
        // H is commutative, so S∘S = id
        let g = pick(h, i);
        let s = h.antipode_gen(g);
        let ss: Element = s.terms.iter().fold(Element::zero(), |acc, (m, c)| acc.add(&h.antipode_mono(m).scale(c)));
        prop_assert_eq!(ss, Element::gen(g));
    }

    #[test]
    fn coproduct_is_multiplicative(which in any::<bool>(), i in any::<usize>(), j in any::<usize>()) {
        let h = theory(which);
        // one-loop factors keep the product inside the window
        let ones = h.all_generators(1);
        let (a, b) = (ones[i % ones.len()], ones[j % ones.len()]);
        let ab = Mono::from_slice(&[a.min(b), a.max(b)]);
        prop_assume!(h.in_window(&ab));
        let lhs = h.coproduct_mono(&ab);
        let rhs = h.coproduct_gen(a).mul(&h.coproduct_gen(b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gradings_add_over_products(which in any::<bool>(), i in any::<usize>(), j in any::<usize>()) {
        let h = theory(which);
        let (a, b) = (pick(h, i), pick(h, j));
        let ab = Mono::from_slice(&[a.min(b), a.max(b)]);
        let (ia, ib) = (h.info(a), h.info(b));
        prop_assert_eq!(h.mono_loop(&ab), ia.loop_number + ib.loop_number);
        let d: Vec<i32> = ia.d.iter().zip(&ib.d).map(|(x, y)| x + y).collect();
        prop_assert_eq!(h.mono_degree(&ab), d);
    }

    #[test]
    fn degree_relation_on_generators(which in any::<bool>(), i in any::<usize>()) {
        let h = theory(which);
        let info = h.info(pick(h, i));
        let lhs: i64 = info.d.iter().enumerate().map(|(v, &d)| (h.model.valence(v) as i64 - 2) * d as i64).sum();
        prop_assert_eq!(lhs, 2 * info.loop_number as i64);
    }

    #[test]
    fn ideal_absorbs_multiples(i in any::<usize>(), k in 0usize..64) {
        let h = ym();
        let gr = Greens::new(h);
        let ideal = st_ideal(&gr);
        let gens = feynhopf::green::st_generators(&gr);
        let g = &gens[k % gens.len()].element;
        let u = Element::gen(pick(h, i));
        let x = h.mul(&u, g).add(&g.scale(&qi(3)));
        for (_, part) in h.loop_parts(&x) {
            prop_assert_eq!(ideal.contains(&part), Membership::Member);
        }
    }
}

#[test]
fn unit_and_counit() {
    for h in [qed(), ym()] {
        assert_eq!(h.coproduct(&Element::one()).multiply(), Element::one());
        for g in h.all_generators(2) {
            assert_eq!(Element::gen(g).counit(), Q::from_integer(0.into()));
        }
    }
}
