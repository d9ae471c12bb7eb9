//! Canonical labeling by colour refinement plus exhaustive individualization.
//!
//! Every leaf of the search tree is a discrete colouring, i.e. a vertex order.
//! The canonical labeling is the leaf with the smallest encoding, and the
//! number of leaves attaining it is the order of the vertex automorphism group.

use std::collections::BTreeMap;

use super::{Edge, ExtLeg, FeynmanGraph, Model};
use crate::rational::factorial_u64;

/// Best vertex order and the automorphism count found with it.
#[derive(Clone, Debug)]
pub struct CanonResult {
    /// `perm[old] = new`.
    pub perm: Vec<usize>,
    pub encoding: Vec<u32>,
    pub vertex_auts: u64,
}

struct Searcher<'a> {
    m: &'a Model,
    g: &'a FeynmanGraph,
    free: bool,
    adj: Vec<Vec<(u32, u32, usize)>>,
    best: Option<(Vec<u32>, Vec<usize>)>,
    count: u64,
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut d: Vec<T> = sigs.to_vec();
    d.sort();
    d.dedup();
    sigs.iter().map(|s| d.binary_search(s).unwrap() as u32).collect()
}

fn ncolors(c: &[u32]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

impl<'a> Searcher<'a> {
    fn new(m: &'a Model, g: &'a FeynmanGraph, free: bool) -> Self {
        let n = g.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for e in &g.edges {
            let ty = e.ty as u32;
            if e.a == e.b {
                adj[e.a].push((ty, 3, usize::MAX));
            } else if m.eoriented[e.ty] {
                adj[e.a].push((ty, 0, e.b));
                adj[e.b].push((ty, 1, e.a));
            } else {
                adj[e.a].push((ty, 2, e.b));
                adj[e.b].push((ty, 2, e.a));
            }
        }
        Searcher { m, g, free, adj, best: None, count: 0 }
    }

    fn initial(&self) -> Vec<u32> {
        let n = self.g.vertices.len();
        let mut sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..n).map(|v| (self.g.vertices[v], Vec::new())).collect();
        for (i, x) in self.g.ext.iter().enumerate() {
            let tag = if self.free { 0 } else { i };
            sigs[x.vertex].1.push((tag, x.field));
        }
        for s in &mut sigs {
            s.1.sort_unstable();
        }
        rank(&sigs)
    }

    fn refine(&self, mut col: Vec<u32>) -> Vec<u32> {
        let mut k = ncolors(&col);
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32, u32)>)> = (0..col.len())
                .map(|v| {
                    let mut nb: Vec<(u32, u32, u32)> = self.adj[v]
                        .iter()
                        .map(|&(t, r, u)| (t, r, if u == usize::MAX { 0 } else { col[u] }))
                        .collect();
                    nb.sort_unstable();
                    (col[v], nb)
                })
                .collect();
            col = rank(&sigs);
            let k2 = ncolors(&col);
            if k2 == k {
                return col;
            }
            k = k2;
        }
    }

    fn run(&mut self, col: Vec<u32>) {
        let col = self.refine(col);
        let n = col.len();
        // smallest colour whose cell is not a singleton
        let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in &col {
            *sizes.entry(c).or_default() += 1;
        }
        match sizes.iter().find(|(_, &s)| s > 1).map(|(&c, _)| c) {
            None => {
                let perm: Vec<usize> = col.iter().map(|&c| c as usize).collect();
                debug_assert_eq!(ncolors(&col), n);
                let enc = encode(self.m, self.g, &perm, self.free);
                match &self.best {
                    Some((b, _)) if enc > *b => {}
                    Some((b, _)) if enc == *b => self.count += 1,
                    _ => {
                        self.best = Some((enc, perm));
                        self.count = 1;
                    }
                }
            }
            Some(c) => {
                for v in 0..n {
                    if col[v] != c {
                        continue;
                    }
                    let next: Vec<u32> =
                        (0..n).map(|u| 2 * col[u] + u32::from(col[u] == c && u != v)).collect();
                    self.run(next);
                }
            }
        }
    }
}

/// Integer encoding of `g` under the vertex order `perm`.
pub(crate) fn encode(m: &Model, g: &FeynmanGraph, perm: &[usize], free: bool) -> Vec<u32> {
    let h = relabel_norm(m, g, perm, free);
    let mut out = Vec::with_capacity(4 + h.vertices.len() + 3 * h.edges.len() + 2 * h.ext.len());
    out.push(h.vertices.len() as u32);
    out.extend(h.vertices.iter().map(|&t| t as u32));
    out.push(h.edges.len() as u32);
    for e in &h.edges {
        out.extend([e.ty as u32, e.a as u32, e.b as u32]);
    }
    out.push(h.ext.len() as u32);
    for x in &h.ext {
        out.extend([x.vertex as u32, x.field as u32]);
    }
    out.push(u32::from(h.bullet));
    out
}

/// Apply a vertex relabeling; edge and leg lists keep their order.
pub fn relabel(g: &FeynmanGraph, perm: &[usize]) -> FeynmanGraph {
    let mut vertices = vec![0; g.vertices.len()];
    for (v, &t) in g.vertices.iter().enumerate() {
        vertices[perm[v]] = t;
    }
    FeynmanGraph {
        vertices,
        edges: g.edges.iter().map(|e| Edge { ty: e.ty, a: perm[e.a], b: perm[e.b] }).collect(),
        ext: g.ext.iter().map(|x| ExtLeg { vertex: perm[x.vertex], field: x.field }).collect(),
        bullet: g.bullet,
    }
}

/// Relabel, orient unoriented edges low-to-high and sort edges (and legs
/// when they are unordered).
fn relabel_norm(m: &Model, g: &FeynmanGraph, perm: &[usize], free: bool) -> FeynmanGraph {
    let mut h = relabel(g, perm);
    for e in &mut h.edges {
        if !m.eoriented[e.ty] && e.a > e.b {
            std::mem::swap(&mut e.a, &mut e.b);
        }
    }
    h.edges.sort();
    if free {
        h.ext.sort();
    }
    h
}

pub(crate) fn search(m: &Model, g: &FeynmanGraph, free: bool) -> CanonResult {
    let mut s = Searcher::new(m, g, free);
    if g.vertices.is_empty() {
        return CanonResult { perm: vec![], encoding: encode(m, g, &[], free), vertex_auts: 1 };
    }
    let c0 = s.initial();
    s.run(c0);
    let (encoding, perm) = s.best.take().expect("search reaches a leaf");
    CanonResult { perm, encoding, vertex_auts: s.count }
}

/// Half-edge symmetries that fix every vertex.
fn fixed_vertex_factor(m: &Model, g: &FeynmanGraph, free: bool) -> u64 {
    let mut bundles: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    for e in &g.edges {
        let (a, b) = if m.eoriented[e.ty] { (e.a, e.b) } else { (e.a.min(e.b), e.a.max(e.b)) };
        *bundles.entry((e.ty, a, b)).or_default() += 1;
    }
    let mut f = 1u64;
    for ((ty, a, b), k) in bundles {
        f *= factorial_u64(k);
        if a == b && !m.eoriented[ty] {
            f *= 1 << k;
        }
    }
    if free {
        let mut legs: BTreeMap<ExtLeg, u64> = BTreeMap::new();
        for x in &g.ext {
            *legs.entry(*x).or_default() += 1;
        }
        for k in legs.values() {
            f *= factorial_u64(*k);
        }
    }
    f
}

/// Order of the automorphism group fixing every external leg.
pub fn aut_fixed(m: &Model, g: &FeynmanGraph) -> u64 {
    search(m, g, false).vertex_auts * fixed_vertex_factor(m, g, false)
}

/// Order of the automorphism group allowed to permute external legs of
/// equal field.
pub fn aut_free(m: &Model, g: &FeynmanGraph) -> u64 {
    search(m, g, true).vertex_auts * fixed_vertex_factor(m, g, true)
}

/// Vertex-permutation brute force for [`aut_fixed`]; exponential, meant for
/// small graphs.
pub fn brute_force_aut_fixed(m: &Model, g: &FeynmanGraph) -> u64 {
    let n = g.vertices.len();
    let target = encode(m, g, &(0..n).collect::<Vec<_>>(), false);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0u64;
    permute(&mut perm, 0, &mut |p| {
        if encode(m, g, p, false) == target {
            count += 1;
        }
    });
    count * fixed_vertex_factor(m, g, false)
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Text form `vertices: [..]; edges: [..]; ext: [..]; bullet: b` of `g`
/// relabeled by `perm`.
pub fn render(m: &Model, g: &FeynmanGraph, perm: &[usize], free: bool) -> String {
    let h = relabel_norm(m, g, perm, free);
    let mut used: Vec<Vec<bool>> = h.vertices.iter().map(|&t| vec![false; m.vslots[t].len()]).collect();
    let mut slot = |v: usize, f: usize| -> usize {
        let t = h.vertices[v];
        let i = (0..m.vslots[t].len()).find(|&i| !used[v][i] && m.vslots[t][i] == f).expect("free slot of field");
        used[v][i] = true;
        i
    };
    let vs: Vec<String> = h.vertices.iter().enumerate().map(|(i, &t)| format!("{}@{}", m.vertex_name(t), i)).collect();
    let mut es = Vec::new();
    for e in &h.edges {
        let la = slot(e.a, m.efields[e.ty].0);
        let lb = slot(e.b, m.efields[e.ty].1);
        es.push(format!("{}: {}.{} - {}.{}", m.edge_name(e.ty), e.a, la, e.b, lb));
    }
    let mut xs = Vec::new();
    for x in &h.ext {
        let l = slot(x.vertex, x.field);
        xs.push(format!("{}.{}:{}", x.vertex, l, m.field_name(x.field)));
    }
    format!(
        "vertices: [{}]; edges: [{}]; ext: [{}]; bullet: {}",
        vs.join(","),
        es.join(", "),
        xs.join(","),
        u8::from(h.bullet)
    )
}

/// Canonical string; external legs keep their order.
pub fn canonical_form(m: &Model, g: &FeynmanGraph) -> String {
    let r = search(m, g, false);
    render(m, g, &r.perm, false)
}

/// Canonical string of the isomorphism class with unordered external legs;
/// this is the identity of a generator of the Hopf algebra.
pub fn class_key(m: &Model, g: &FeynmanGraph) -> String {
    let r = search(m, g, true);
    render(m, g, &r.perm, true)
}

/// Canonical representative (relabeled and sorted) with unordered legs.
pub(crate) fn class_rep(m: &Model, g: &FeynmanGraph) -> (FeynmanGraph, CanonResult) {
    let r = search(m, g, true);
    let h = relabel_norm(m, g, &r.perm, true);
    (h, r)
}
