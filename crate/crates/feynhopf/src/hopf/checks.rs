//! Verification suites for the Hopf structure itself.

use std::collections::BTreeMap;

use super::{Element, Hopf};
use crate::graphs::enumerate_graphs;
use crate::report::{Check, Status};
use crate::Q;

fn first_failure(failures: &[String]) -> Status {
    match failures.first() {
        None => Status::Pass,
        Some(f) => Status::Fail(format!("{} generator(s), first {f}", failures.len())),
    }
}

/// Counit, antipode and coassociativity on every generator with loop
/// number at most `lmax`, one row per axiom and loop order.
pub fn check_axioms(h: &Hopf, lmax: u32) -> Check {
    let mut check = Check::new("coassoc");
    let one = Q::from_integer(1.into());
    for l in 1..=lmax.min(h.lmax()) {
        let mut gens: Vec<_> = h.model.spec.residues().into_iter().flat_map(|r| h.generators(r, l).to_vec()).collect();
        gens.sort_unstable();
        let mut bad: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for &g in &gens {
            let x = Element::gen(g);
            let t = h.coproduct(&x);
            let key = || h.info(g).key.clone();
            let left = t.map(|a| Element::scalar(Element::mono(a.clone(), one.clone()).counit()), |b| Element::mono(b.clone(), one.clone()));
            let right = t.map(|a| Element::mono(a.clone(), one.clone()), |b| Element::scalar(Element::mono(b.clone(), one.clone()).counit()));
            if left.multiply() != x || right.multiply() != x {
                bad.entry("counit").or_default().push(key());
            }
            if !t.map(|a| h.antipode_mono(a), |b| Element::mono(b.clone(), one.clone())).multiply().is_zero() {
                bad.entry("antipode").or_default().push(key());
            }
            if h.coproduct3(&x, true) != h.coproduct3(&x, false) {
                bad.entry("coassociativity").or_default().push(key());
            }
        }
        check.note(format!("L={l}: {} generators", gens.len()));
        for axiom in ["coassociativity", "counit", "antipode"] {
            let f = bad.remove(axiom).unwrap_or_default();
            check.push(format!("{axiom} L={l}"), first_failure(&f));
        }
    }
    check
}

/// Loop and multidegree gradings of the coproduct, connectedness, and
/// `Σ_v (N(v)-2) d_v = 2L` on every enumerated graph.
pub fn check_grading(h: &Hopf, lmax: u32) -> Check {
    let mut check = Check::new("grading");
    let m = &h.model;
    let lmax = lmax.min(h.lmax());
    let mut counted = 0usize;
    let mut lemma_bad = Vec::new();
    let mut loop0 = 0usize;
    for r in m.spec.residues() {
        loop0 += enumerate_graphs(m, r, 0).len();
        for l in 1..=lmax {
            for g in enumerate_graphs(m, r, l) {
                counted += 1;
                let gr = m.grading(&g);
                let lhs: i64 = gr.d.iter().enumerate().map(|(v, &d)| (m.valence(v) as i64 - 2) * d as i64).sum();
                if lhs != 2 * gr.loop_number as i64 {
                    lemma_bad.push(format!("{g:?}: {lhs} vs {}", 2 * gr.loop_number));
                }
            }
        }
    }
    check.note(format!("{counted} enumerated graphs with L <= {lmax}"));
    check.push("sum (N(v)-2) d_v = 2L", first_failure(&lemma_bad));
    check.push("no loop-0 generators", Status::from_bool(loop0 == 0, || format!("{loop0} loop-0 graphs")));
    let mut loop_bad = Vec::new();
    let mut deg_bad = Vec::new();
    for g in h.all_generators(lmax) {
        let info = h.info(g);
        for (a, b) in h.coproduct_gen(g).terms.keys() {
            if h.mono_loop(a) + h.mono_loop(b) != info.loop_number {
                loop_bad.push(info.key.clone());
            }
            let da = h.mono_degree(a);
            let db = h.mono_degree(b);
            if da.iter().zip(&db).map(|(x, y)| x + y).ne(info.d.iter().copied()) {
                deg_bad.push(info.key.clone());
            }
        }
    }
    loop_bad.dedup();
    deg_bad.dedup();
    check.push("coproduct respects loop grading", first_failure(&loop_bad));
    check.push("coproduct respects multidegree", first_failure(&deg_bad));
    check
}
