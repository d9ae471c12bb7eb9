use super::*;
use crate::theory::TheorySpec;

fn qed() -> Model {
    Model::new(TheorySpec::qed())
}

fn ym() -> Model {
    Model::new(TheorySpec::yang_mills())
}

fn res(m: &Model, name: &str) -> Res {
    m.spec.residue_by_name(name).unwrap()
}

/// Automorphisms as half-edge bijections, found by plain backtracking.
/// Independent of the refinement search.
fn half_edge_auts(m: &Model, g: &FeynmanGraph, fix_ext: bool) -> u64 {
    // half-edges: (vertex, field, partner index or ext id)
    #[derive(Clone, Copy)]
    struct H {
        v: usize,
        f: usize,
        other: Option<usize>,
        ext: Option<usize>,
        ty: usize,
    }
    let mut hs: Vec<H> = Vec::new();
    for e in &g.edges {
        let i = hs.len();
        hs.push(H { v: e.a, f: m.efields[e.ty].0, other: Some(i + 1), ext: None, ty: e.ty });
        hs.push(H { v: e.b, f: m.efields[e.ty].1, other: Some(i), ext: None, ty: e.ty });
    }
    for (k, x) in g.ext.iter().enumerate() {
        hs.push(H { v: x.vertex, f: x.field, other: None, ext: Some(k), ty: usize::MAX });
    }
    let n = hs.len();
    let nv = g.vertices.len();
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut vmap = vec![usize::MAX; nv];
    let mut vcnt = vec![0usize; nv];
    fn go(
        i: usize,
        hs: &[H],
        g: &FeynmanGraph,
        fix_ext: bool,
        img: &mut Vec<usize>,
        used: &mut Vec<bool>,
        vmap: &mut Vec<usize>,
        vcnt: &mut Vec<usize>,
        count: &mut u64,
    ) {
        if i == hs.len() {
            *count += 1;
            return;
        }
        if img[i] != usize::MAX {
            go(i + 1, hs, g, fix_ext, img, used, vmap, vcnt, count);
            return;
        }
        let h = hs[i];
        for j in 0..hs.len() {
            let k = hs[j];
            if used[j] || k.f != h.f || k.ty != h.ty || k.ext.is_some() != h.ext.is_some() {
                continue;
            }
            if fix_ext && h.ext.is_some() && h.ext != k.ext {
                continue;
            }
            if g.vertices[k.v] != g.vertices[h.v] {
                continue;
            }
            if vmap[h.v] != usize::MAX && vmap[h.v] != k.v {
                continue;
            }
            if vmap[h.v] == usize::MAX && vcnt[k.v] > 0 {
                continue;
            }
            // partner must follow
            let mut pair = None;
            if let (Some(ho), Some(ko)) = (h.other, k.other) {
                if img[ho] != usize::MAX {
                    if img[ho] != ko {
                        continue;
                    }
                } else {
                    if used[ko] {
                        continue;
                    }
                    let (a, b) = (hs[ho], hs[ko]);
                    if a.f != b.f {
                        continue;
                    }
                    let mapped = vmap[a.v];
                    let a_now_mapped = if a.v == h.v { Some(k.v) } else if mapped != usize::MAX { Some(mapped) } else { None };
                    if let Some(t) = a_now_mapped {
                        if t != b.v {
                            continue;
                        }
                    } else if vcnt[b.v] > 0 || (b.v == k.v && a.v != h.v) {
                        continue;
                    }
                    pair = Some((ho, ko));
                }
            }
            let fresh_v = vmap[h.v] == usize::MAX;
            vmap[h.v] = k.v;
            vcnt[k.v] += 1;
            img[i] = j;
            used[j] = true;
            let mut fresh_p = false;
            if let Some((ho, ko)) = pair {
                let a = hs[ho];
                if vmap[a.v] == usize::MAX {
                    vmap[a.v] = hs[ko].v;
                    fresh_p = true;
                }
                vcnt[hs[ko].v] += 1;
                img[ho] = ko;
                used[ko] = true;
            }
            go(i + 1, hs, g, fix_ext, img, used, vmap, vcnt, count);
            if let Some((ho, ko)) = pair {
                img[ho] = usize::MAX;
                used[ko] = false;
                vcnt[hs[ko].v] -= 1;
                if fresh_p {
                    vmap[hs[ho].v] = usize::MAX;
                }
            }
            img[i] = usize::MAX;
            used[j] = false;
            vcnt[k.v] -= 1;
            if fresh_v {
                vmap[h.v] = usize::MAX;
            }
        }
    }
    let mut count = 0;
    go(0, &hs, g, fix_ext, &mut img, &mut used, &mut vmap, &mut vcnt, &mut count);
    count
}

#[test]
fn qed_photon_one_loop() {
    let m = Model::with_window(TheorySpec::qed(), 1, 1);
    let gs = enumerate_graphs(&m, res(&m, "photon"), 1);
    // mass insertions raise the weight above 1
    assert_eq!(gs.len(), 1);
    let g = &gs[0];
    assert_eq!(m.residue(g), Some(res(&m, "photon")));
    assert_eq!(aut_fixed(&m, g), 1);
    assert_eq!(half_edge_auts(&m, g, true), 1);
    assert_eq!(loop_number(g), 1);
}

#[test]
fn qed_photon_one_loop_with_mass_insertion_window() {
    let m = Model::with_window(TheorySpec::qed(), 1, 2);
    let gs = enumerate_graphs(&m, res(&m, "photon"), 1);
    // plain loop and one mass insertion
    assert_eq!(gs.len(), 2);
}

#[test]
fn ym_gluon_one_loop() {
    let m = ym();
    let gs = enumerate_graphs(&m, res(&m, "glu"), 1);
    let mut syms: Vec<u64> = gs.iter().map(|g| aut_fixed(&m, g)).collect();
    syms.sort();
    // ghost loop, gluon bubble, quartic tadpole
    assert_eq!(gs.len(), 3);
    assert_eq!(syms, vec![1, 2, 2]);
    for g in &gs {
        assert_eq!(aut_fixed(&m, g), half_edge_auts(&m, g, true));
        assert_eq!(aut_free(&m, g), half_edge_auts(&m, g, false));
    }
}

#[test]
fn level_zero_is_empty() {
    let m = qed();
    for r in m.spec.residues() {
        assert!(enumerate_graphs(&m, r, 0).is_empty());
    }
}

#[test]
fn residues_of_self_energies() {
    let m = Model::with_window(TheorySpec::qed(), 1, 1);
    let fermion = res(&m, "fermion");
    let mass = res(&m, "psibarpsi");
    let gs = enumerate_graphs(&m, fermion, 1);
    assert_eq!(gs.len(), 1);
    assert_eq!(m.residue(&gs[0]), Some(fermion));
    let gb = enumerate_graphs(&m, mass, 1);
    assert!(gb.iter().all(|g| g.bullet && m.residue(g) == Some(mass)));
    let plain = FeynmanGraph { bullet: true, ..gs[0].clone() };
    assert!(gb.iter().any(|g| class_key(&m, g) == class_key(&m, &plain)));
    assert_ne!(class_key(&m, &gs[0]), class_key(&m, &plain));
}

#[test]
fn lemma_degrees_relation() {
    for m in [qed(), ym()] {
        for r in m.spec.residues() {
            for l in 1..=2 {
                for g in enumerate_graphs(&m, r, l) {
                    let gr = m.grading(&g);
                    let s: i64 = (0..m.k()).map(|v| (m.valence(v) as i64 - 2) * gr.d[v] as i64).sum();
                    assert_eq!(s, 2 * gr.loop_number as i64);
                }
            }
        }
    }
}

#[test]
fn symmetry_matches_half_edge_oracle() {
    for m in [qed(), ym()] {
        for r in m.spec.residues() {
            for l in 1..=2 {
                for g in enumerate_graphs(&m, r, l) {
                    if g.edges.len() > 6 {
                        continue;
                    }
                    assert_eq!(aut_fixed(&m, &g), half_edge_auts(&m, &g, true), "{}", class_key(&m, &g));
                    assert_eq!(aut_free(&m, &g), half_edge_auts(&m, &g, false), "{}", class_key(&m, &g));
                    assert_eq!(aut_fixed(&m, &g), brute_force_aut_fixed(&m, &g));
                }
            }
        }
    }
}

#[test]
fn contraction_counts() {
    let m = Model::with_window(TheorySpec::qed(), 2, 2);
    for r in m.spec.residues() {
        for g in enumerate_graphs(&m, r, 2) {
            let gg = m.grading(&g);
            for s in subgraphs(&m, &g) {
                let q = contract(&m, &g, &s);
                assert_eq!(m.validate(&q), Ok(()));
                let qg = m.grading(&q);
                let mut lsum = 0;
                let mut expect = gg.m.clone();
                for c in &s.components {
                    let cg = component_graph(&m, &g, c);
                    let cgr = m.grading(&cg);
                    lsum += cgr.loop_number;
                    for v in 0..m.k() {
                        expect[v] = expect[v] + 0 - cgr.m[v];
                    }
                    if let Collapse::Vertex(v) = c.collapse {
                        expect[v] += 1;
                    }
                }
                assert_eq!(qg.loop_number + lsum, gg.loop_number);
                assert_eq!(qg.m, expect);
                assert_eq!(m.residue(&q), m.residue(&g));
            }
        }
    }
}

#[test]
fn canonical_form_is_relabeling_invariant() {
    let m = ym();
    for g in enumerate_graphs(&m, res(&m, "A3"), 2) {
        let n = g.vertices.len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let h = relabel(&g, &perm);
        assert_eq!(canonical_form(&m, &g), canonical_form(&m, &h));
        assert_eq!(class_key(&m, &g), class_key(&m, &h));
    }
}
