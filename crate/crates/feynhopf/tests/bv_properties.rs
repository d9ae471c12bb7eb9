use feynhopf::bv::{antibracket, yang_mills_brst, BvExpr, FormPoly, Letter, Sym};
use feynhopf::qi;
use proptest::prelude::*;

fn letter() -> impl Strategy<Value = Letter> {
    (0usize..Sym::ALL.len(), any::<bool>()).prop_map(|(i, d)| if d { Letter::dsym(Sym::ALL[i]) } else { Letter::new(Sym::ALL[i]) })
}

fn field_letter() -> impl Strategy<Value = Letter> {
    (0usize..Sym::FIELDS.len(), any::<bool>()).prop_map(|(i, d)| if d { Letter::dsym(Sym::FIELDS[i]) } else { Letter::new(Sym::FIELDS[i]) })
}

fn word_of(ls: &[Letter]) -> FormPoly {
    ls.iter().fold(FormPoly::scalar(feynhopf::bv::cconst(qi(1))), |acc, &l| acc.mul(&FormPoly::letter(l)))
}

fn word() -> impl Strategy<Value = (FormPoly, i32)> {
    prop::collection::vec(letter(), 1..4).prop_map(|ls| (word_of(&ls), ls.iter().map(|l| l.total()).sum()))
}

fn field_word() -> impl Strategy<Value = (FormPoly, i32)> {
    prop::collection::vec(field_letter(), 1..4).prop_map(|ls| (word_of(&ls), ls.iter().map(|l| l.total()).sum()))
}

fn sign(k: i32) -> feynhopf::poly::MPoly {
    feynhopf::bv::cconst(qi(if k.rem_euclid(2) == 1 { -1 } else { 1 }))
}

fn ad_omega(x: &FormPoly) -> FormPoly {
    FormPoly::sym(Sym::Omega).bracket(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bracket_is_graded_antisymmetric((x, dx) in word(), (y, dy) in word()) {
        prop_assert_eq!(x.bracket(&y), y.bracket(&x).scale(&sign(dx * dy + 1)));
    }

    #[test]
    fn bracket_satisfies_jacobi((x, dx) in word(), (y, dy) in word(), (z, _) in word()) {
        let lhs = x.bracket(&y.bracket(&z));
        let rhs = x.bracket(&y).bracket(&z).add(&y.bracket(&x.bracket(&z)).scale(&sign(dx * dy)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_is_a_graded_derivation_squaring_to_zero((x, dx) in word(), (y, _) in word()) {
        prop_assert!(x.d().d().is_zero());
        let lhs = x.mul(&y).d();
        let rhs = x.d().mul(&y).add(&x.mul(&y.d()).scale(&sign(dx)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn trace_is_graded_cyclic((x, dx) in word(), (y, dy) in word()) {
        let a = BvExpr::trace(&x.mul(&y));
        let b = BvExpr::trace(&y.mul(&x)).scale(&sign(dx * dy));
        prop_assert_eq!(&a, &b);
        prop_assert!(BvExpr::trace(&x.bracket(&y)).is_zero());
    }

    #[test]
    fn trace_is_ad_invariant_under_ghost((x, _) in word()) {
        // ad_ω is a degree-1 derivation; tr(ad_ω X) = 0
        prop_assert!(BvExpr::trace(&ad_omega(&x)).is_zero());
    }

    #[test]
    fn pairing_swap_rule((x, dx) in field_word(), (y, dy) in field_word()) {
        let Ok(a) = BvExpr::pair(&x, &y) else { return Ok(()) };
        let form = letters_form(&x);
        let b = BvExpr::pair(&y, &x).unwrap().scale(&sign(dx * dy + form));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pairing_is_ad_invariant_under_ghost((x, dx) in field_word(), (y, _) in field_word()) {
        let Ok(_) = BvExpr::pair(&x, &y) else { return Ok(()) };
        let lhs = BvExpr::pair(&ad_omega(&x), &y).unwrap();
        let rhs = BvExpr::pair(&x, &ad_omega(&y)).unwrap().scale(&sign(dx));
        prop_assert!(lhs.add(&rhs).is_zero(), "{} + {}", lhs.render(), rhs.render());
    }

    #[test]
    fn brst_derivation_is_well_defined_on_pairings((x, dx) in field_word(), (y, _) in field_word()) {
        // s on the canonical key agrees with s on the representative (x, y)
        let Ok(e) = BvExpr::pair(&x, &y) else { return Ok(()) };
        let s = yang_mills_brst();
        let lhs = s.apply_expr(&e).unwrap();
        let rhs = BvExpr::pair(&s.apply(&x), &y).unwrap().add(&BvExpr::pair(&x, &s.apply(&y)).unwrap().scale(&sign(dx)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn brst_derivation_is_well_defined_on_traces((x, dx) in word(), (y, dy) in word()) {
        let s = yang_mills_brst();
        let a = s.apply_expr(&BvExpr::trace(&x.mul(&y))).unwrap();
        let b = s.apply_expr(&BvExpr::trace(&y.mul(&x))).unwrap().scale(&sign(dx * dy));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn antibracket_is_graded_antisymmetric((x, _) in field_word(), (y, _) in field_word(), src in 0usize..4) {
        // F = ∫ tr(x * y) and G = ∫ tr(K_φ * ψ), linear in one source
        let Ok(f) = BvExpr::pair(&x, &y) else { return Ok(()) };
        let phi = Sym::FIELDS[src];
        let k = phi.source().unwrap();
        let partner = if phi.form() == 1 { FormPoly::sym(Sym::A) } else { FormPoly::sym(Sym::H) };
        let Ok(g) = BvExpr::pair(&FormPoly::sym(k), &partner) else { return Ok(()) };
        let (Some(df), Some(dg)) = (f.ghost_degree(), g.ghost_degree()) else { return Ok(()) };
        let fg = antibracket(&f, &g).unwrap();
        let gf = antibracket(&g, &f).unwrap();
        prop_assert_eq!(fg, gf.scale(&sign((df + 1) * (dg + 1) + 1)));
    }
}

fn letters_form(x: &FormPoly) -> i32 {
    x.terms.keys().next().map_or(0, |w| w.iter().map(|l| l.form()).sum())
}
