//! Generation of all 1PI graphs with a given residue and loop number.
//!
//! Vertex multisets are fixed first from the loop-number relation, then legs are
//! paired by backtracking from a growing connected core. Untouched vertices of
//! one type are interchangeable, so only the first of each type is tried.
//! Isomorphic results are merged by their class key.

use std::collections::BTreeMap;

use super::canon::class_rep;
use super::{is_1pi, Edge, ExtLeg, FeynmanGraph, Model};
use crate::theory::Res;

/// Isomorphism classes of 1PI graphs with residue `r` at loop order `l`,
/// within the model's weight window, sorted by class key.
pub fn enumerate_graphs(m: &Model, r: Res, l: u32) -> Vec<FeynmanGraph> {
    enumerate_window(m, r, l, m.wmax)
}

/// As [`enumerate_graphs`] with an explicit weight bound.
pub fn enumerate_window(m: &Model, r: Res, l: u32, wmax: u32) -> Vec<FeynmanGraph> {
    if l == 0 || l > wmax {
        return Vec::new();
    }
    let legs = m.res_legs(r);
    let n = legs.len() as i64;
    let bullet = matches!(r, Res::V(v) if m.valence(v) == 2);
    let mut ext_need = vec![0u32; m.nfields()];
    for &f in &legs {
        ext_need[f] += 1;
    }
    let target = 2 * l as i64 - 2 + n;
    let n_val2_res: i64 = match r {
        Res::V(v) if m.valence(v) == 2 => 1,
        _ => 0,
    };
    let val2_cap = wmax as i64 - l as i64 + n_val2_res;
    if val2_cap < 0 {
        return Vec::new();
    }
    let mut found: BTreeMap<String, FeynmanGraph> = BTreeMap::new();
    let k = m.k();
    let mut counts = vec![0u32; k];
    vertex_counts(m, 0, target, val2_cap, &ext_need, &mut counts, &mut |mv| {
        if !balanced(m, mv, &ext_need) {
            return;
        }
        let mut vertices = Vec::new();
        for (t, &c) in mv.iter().enumerate() {
            for _ in 0..c {
                vertices.push(t);
            }
        }
        if vertices.is_empty() {
            return;
        }
        let mut st = State {
            free: vertices.iter().map(|&t| m.vlegs[t].clone()).collect(),
            touched: vec![false; vertices.len()],
            edges: Vec::new(),
            ext: Vec::new(),
            ext_need: ext_need.clone(),
            vertices,
        };
        st.touched[0] = true;
        grow(m, &mut st, &mut |g| {
            let g = FeynmanGraph { bullet, ..g.clone() };
            if !m.spec.allow_tadpoles && super::has_self_loop(&g) {
                return;
            }
            if !is_1pi(&g) {
                return;
            }
            let (rep, _) = class_rep(m, &g);
            let key = super::canon::render(m, &rep, &(0..rep.vertices.len()).collect::<Vec<_>>(), true);
            found.entry(key).or_insert(rep);
        });
    });
    found.into_values().collect()
}

#[allow(clippy::too_many_arguments)]
fn vertex_counts(
    m: &Model,
    t: usize,
    remaining: i64,
    val2_left: i64,
    ext_need: &[u32],
    counts: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    if t == m.k() {
        if remaining == 0 {
            f(counts);
        }
        return;
    }
    let w = m.valence(t) as i64 - 2;
    // a vertex with source legs needs all of them external
    let src_cap = m.vlegs[t]
        .iter()
        .enumerate()
        .filter(|&(fi, &c)| c > 0 && m.is_source[fi])
        .map(|(fi, &c)| ext_need[fi] / c)
        .min()
        .map(|x| x as i64);
    let max = if w == 0 { val2_left } else { remaining / w };
    let max = match src_cap {
        Some(c) => max.min(c),
        None => max,
    };
    for c in 0..=max {
        counts[t] = c as u32;
        let (rem, v2) = if w == 0 { (remaining, val2_left - c) } else { (remaining - w * c, val2_left) };
        vertex_counts(m, t + 1, rem, v2, ext_need, counts, f);
    }
    counts[t] = 0;
}

/// Each propagating field must have as many internal half-edges as its
/// partner, and sources no internal half-edges at all.
fn balanced(m: &Model, mv: &[u32], ext_need: &[u32]) -> bool {
    let nf = m.nfields();
    let mut internal = vec![0i64; nf];
    for (t, &c) in mv.iter().enumerate() {
        for f in 0..nf {
            internal[f] += (m.vlegs[t][f] * c) as i64;
        }
    }
    for f in 0..nf {
        internal[f] -= ext_need[f] as i64;
        if internal[f] < 0 {
            return false;
        }
    }
    for f in 0..nf {
        match m.partner[f] {
            None => {
                if internal[f] != 0 {
                    return false;
                }
            }
            Some(g) if g == f => {
                if internal[f] % 2 != 0 {
                    return false;
                }
            }
            Some(g) => {
                if internal[f] != internal[g] {
                    return false;
                }
            }
        }
    }
    true
}

struct State {
    vertices: Vec<usize>,
    free: Vec<Vec<u32>>,
    touched: Vec<bool>,
    edges: Vec<Edge>,
    ext: Vec<ExtLeg>,
    ext_need: Vec<u32>,
}

fn grow(m: &Model, st: &mut State, emit: &mut impl FnMut(&FeynmanGraph)) {
    let n = st.vertices.len();
    let next = (0..n).find(|&v| st.touched[v] && st.free[v].iter().any(|&c| c > 0));
    let v = match next {
        None => {
            if st.touched.iter().all(|&t| t) && st.ext_need.iter().all(|&c| c == 0) {
                let g = FeynmanGraph {
                    vertices: st.vertices.clone(),
                    edges: st.edges.clone(),
                    ext: st.ext.clone(),
                    bullet: false,
                };
                emit(&g);
            }
            return;
        }
        Some(v) => v,
    };
    let f = st.free[v].iter().position(|&c| c > 0).unwrap();
    st.free[v][f] -= 1;

    if st.ext_need[f] > 0 {
        st.ext_need[f] -= 1;
        st.ext.push(ExtLeg { vertex: v, field: f });
        grow(m, st, emit);
        st.ext.pop();
        st.ext_need[f] += 1;
    }

    if let (Some(ty), Some(g)) = (m.field_edge[f], m.partner[f]) {
        let mk = |u: usize| {
            if m.efields[ty].0 == f {
                Edge { ty, a: v, b: u }
            } else {
                Edge { ty, a: u, b: v }
            }
        };
        let mut targets: Vec<usize> = (0..n).filter(|&u| st.touched[u] && st.free[u][g] > 0).collect();
        let mut seen_types = Vec::new();
        for u in 0..n {
            let t = st.vertices[u];
            if !st.touched[u] && !seen_types.contains(&t) {
                seen_types.push(t);
                if st.free[u][g] > 0 {
                    targets.push(u);
                }
            }
        }
        for u in targets {
            let fresh = !st.touched[u];
            st.free[u][g] -= 1;
            st.touched[u] = true;
            st.edges.push(mk(u));
            if feasible(st) {
                grow(m, st, emit);
            }
            st.edges.pop();
            st.touched[u] = !fresh;
            st.free[u][g] += 1;
        }
    }
    st.free[v][f] += 1;
}

/// Cheap necessary condition: enough free legs remain for the external legs.
fn feasible(st: &State) -> bool {
    st.ext_need.iter().enumerate().all(|(f, &need)| {
        need == 0 || st.free.iter().map(|c| c[f]).sum::<u32>() >= need
    })
}
