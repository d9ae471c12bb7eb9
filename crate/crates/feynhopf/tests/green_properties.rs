use std::sync::OnceLock;

use feynhopf::graphs::Model;
use feynhopf::green::{check_cop_green, green_coefficient, power, Greens};
use feynhopf::hopf::{Element, Hopf};
use feynhopf::theory::TheorySpec;
use feynhopf::{q, Q};
use proptest::prelude::*;

fn ym() -> &'static Hopf {
    static H: OnceLock<Hopf> = OnceLock::new();
    H.get_or_init(|| Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2)))
}

fn small_q() -> impl Strategy<Value = Q> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn powers_add_exponents(a in small_q(), b in small_q(), r in 0usize..7) {
        let h = ym();
        let gr = Greens::new(h);
        let res = h.model.spec.residues()[r % h.model.spec.residues().len()];
        let g = gr.green(res);
        let lhs = h.mul(&power(h, &g, &a), &power(h, &g, &b));
        prop_assert_eq!(lhs, power(h, &g, &(a + b)));
    }

    #[test]
    fn power_of_power(a in small_q(), b in small_q()) {
        let h = ym();
        let gr = Greens::new(h);
        let g = gr.green(h.model.spec.residues()[0]);
        prop_assert_eq!(power(h, &power(h, &g, &a), &b), power(h, &g, &(a * b)));
    }
}

#[test]
fn green_functions_start_at_one_and_carry_symmetry_weights() {
    let h = ym();
    let gr = Greens::new(h);
    for r in h.model.spec.residues() {
        let g = gr.green(r);
        assert_eq!(g.counit(), Q::from_integer(1.into()));
        let sign = if matches!(r, feynhopf::theory::Res::E(_)) { -1 } else { 1 };
        for l in 1..=2 {
            for &id in h.generators(r, l).iter() {
                assert_eq!(g.coeff(&Element::gen(id).terms.keys().next().unwrap().clone()), green_coefficient(h, id) * Q::from_integer(sign.into()));
            }
        }
        assert!(check_cop_green(&gr, r).passed());
    }
}
