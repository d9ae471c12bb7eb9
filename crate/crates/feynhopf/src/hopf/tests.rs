use super::*;
use crate::graphs::Model;
use crate::theory::TheorySpec;

fn qed2() -> Hopf {
    Hopf::new(Model::with_window(TheorySpec::qed(), 2, 2))
}

fn res(h: &Hopf, name: &str) -> Res {
    h.model.spec.residue_by_name(name).unwrap()
}

#[test]
fn unit_and_primitive() {
    let h = qed2();
    let t = h.coproduct(&Element::one());
    assert_eq!(h.render_tensor(&t), "1 * 1 (x) 1");
    let g = h.generators(res(&h, "photon"), 1)[0];
    let t = h.coproduct(&Element::gen(g));
    assert_eq!(t.terms.len(), 2);
    assert_eq!(*h.antipode_gen(g), Element::gen(g).neg());
    assert_eq!(h.counit(&Element::scalar(qi(3)).add(&Element::gen(g).scale(&qi(2)))), qi(3));
}

fn qi(n: i64) -> Q {
    crate::qi(n)
}

#[test]
fn nested_self_energy_has_bullet_term() {
    let h = qed2();
    let fermion = res(&h, "fermion");
    let one_loop = *h.generators(fermion, 1).iter().find(|&&g| h.info(g).weight == 1).unwrap();
    let one_loop_info = h.info(one_loop);
    let mut bullet = one_loop_info.graph.clone();
    bullet.bullet = true;
    let bullet_id = h.intern(&bullet);
    let mut found = 0;
    for &g in h.generators(fermion, 2).iter() {
        let t = h.coproduct_gen(g);
        let reduced: Vec<_> = t.terms.iter().filter(|((l, r), _)| !l.is_empty() && !r.is_empty()).collect();
        if reduced.len() != 2 {
            continue;
        }
        let lefts: Vec<&Mono> = reduced.iter().map(|((l, _), _)| l).collect();
        if lefts.contains(&&Mono::from_slice(&[one_loop])) && lefts.contains(&&Mono::from_slice(&[bullet_id])) {
            found += 1;
            for ((l, r), c) in &reduced {
                assert_eq!(*c, &qi(1));
                let q = h.info(r[0]);
                assert_eq!(q.loop_number, 1);
                if l[0] == bullet_id {
                    // quotient carries a mass insertion
                    assert_eq!(q.weight, 2);
                } else {
                    assert_eq!(r[0], one_loop);
                }
            }
            // S(Γ) = −Γ + γ·Γ/γ + γ•·Γ/(γ→•)
            let s = h.antipode_gen(g);
            assert_eq!(s.len(), 3);
            assert_eq!(s.coeff(&Mono::from_slice(&[g])), qi(-1));
        }
    }
    assert_eq!(found, 1);
}

fn axioms(h: &Hopf, lmax: u32) {
    for g in h.all_generators(lmax) {
        let x = Element::gen(g);
        let t = h.coproduct(&x);
        // counit on either side
        let left = t.map(|l| Element::scalar(Element::mono(l.clone(), qi(1)).counit()), |r| Element::mono(r.clone(), qi(1)));
        assert_eq!(left.multiply(), x);
        let right = t.map(|l| Element::mono(l.clone(), qi(1)), |r| Element::scalar(Element::mono(r.clone(), qi(1)).counit()));
        assert_eq!(right.multiply(), x);
        // antipode
        let s = t.map(|l| h.antipode_mono(l), |r| Element::mono(r.clone(), qi(1))).multiply();
        assert!(s.is_zero(), "{}", h.info(g).key);
        // coassociativity
        assert_eq!(h.coproduct3(&x, true), h.coproduct3(&x, false), "{}", h.info(g).key);
        // loop grading
        let lg = h.info(g).loop_number;
        for (l, r) in t.terms.keys() {
            assert_eq!(h.mono_loop(l) + h.mono_loop(r), lg);
        }
    }
}

#[test]
fn hopf_axioms_low_order() {
    axioms(&qed2(), 2);
    axioms(&Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2)), 2);
}

#[test]
fn convolution_with_antipode_is_counit() {
    let h = qed2();
    let toy = |g: GenId| Q::from_integer((g as i64 + 2).into());
    for g in h.all_generators(2) {
        let x = Element::gen(g);
        let sv = |k: GenId| h.eval(&toy, &h.antipode_gen(k), &qi(1));
        let v = h.convolve(&sv, &toy, &x, &qi(1));
        assert_eq!(v, qi(0));
    }
}

#[test]
fn projections() {
    let h = qed2();
    let g = h.generators(res(&h, "photon"), 1)[0];
    let x = Element::one().add(&Element::gen(g));
    assert_eq!(h.project_loop(&x, 0), Element::one());
    assert_eq!(h.project_loop(&x, 1), Element::gen(g));
    let d = h.info(g).d.clone();
    assert_eq!(h.project_multidegree(&x, &d), Element::gen(g));
    assert_eq!(h.project_multidegree(&x, &vec![0; d.len()]), Element::one());
    let sq = h.mul(&Element::gen(g), &Element::gen(g));
    assert_eq!(h.project_loop(&sq, 2), sq);
}

#[test]
fn rendering_is_sorted_and_signed() {
    let h = qed2();
    let gs = h.generators(res(&h, "photon"), 1);
    let x = Element::gen(gs[0]).scale(&qi(-2)).add(&Element::one());
    let s = h.render(&x);
    assert!(s.starts_with("-2 * [") || s.starts_with("1 * 1"), "{s}");
    assert!(s.contains(" - 2 * [") || s.contains(" + 1 * 1"), "{s}");
}
