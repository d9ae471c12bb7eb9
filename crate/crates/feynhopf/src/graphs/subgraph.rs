//! Proper subgraphs whose components are 1PI with residue in `R`, and
//! contraction of such subgraphs.

use std::collections::HashMap;

use super::{is_1pi, Edge, ExtLeg, FeynmanGraph, Model};
use crate::theory::Res;

/// What a component is collapsed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Collapse {
    Vertex(usize),
    Edge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Internal edge indices of the host graph.
    pub edges: Vec<usize>,
    /// Host vertices touched by those edges, ascending.
    pub vertices: Vec<usize>,
    pub collapse: Collapse,
}

/// A proper subgraph: vertex-disjoint components, each with a collapse choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphChoice {
    pub components: Vec<Component>,
}

fn vertices_of(g: &FeynmanGraph, mask: u64) -> Vec<usize> {
    let mut v = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if mask >> i & 1 == 1 {
            v.push(e.a);
            v.push(e.b);
        }
    }
    v.sort_unstable();
    v.dedup();
    v
}

/// Open legs of the edge set `mask` as (host vertex, field), in host order.
fn open_legs(m: &Model, g: &FeynmanGraph, verts: &[usize], mask: u64) -> Vec<ExtLeg> {
    let mut out = Vec::new();
    for &v in verts {
        for x in &g.ext {
            if x.vertex == v {
                out.push(*x);
            }
        }
        for (i, e) in g.edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            if e.a == v {
                out.push(ExtLeg { vertex: v, field: m.efields[e.ty].0 });
            }
            if e.b == v {
                out.push(ExtLeg { vertex: v, field: m.efields[e.ty].1 });
            }
        }
    }
    out
}

/// The component as a standalone graph; `bullet` is set for a valence-2
/// vertex collapse.
pub fn component_graph(m: &Model, g: &FeynmanGraph, c: &Component) -> FeynmanGraph {
    let mask = c.edges.iter().fold(0u64, |a, &i| a | 1 << i);
    build_component(m, g, &c.vertices, mask, matches!(c.collapse, Collapse::Vertex(v) if m.valence(v) == 2))
}

fn build_component(m: &Model, g: &FeynmanGraph, verts: &[usize], mask: u64, bullet: bool) -> FeynmanGraph {
    let idx = |v: usize| verts.binary_search(&v).unwrap();
    FeynmanGraph {
        vertices: verts.iter().map(|&v| g.vertices[v]).collect(),
        edges: g
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| Edge { ty: e.ty, a: idx(e.a), b: idx(e.b) })
            .collect(),
        ext: open_legs(m, g, verts, mask).into_iter().map(|x| ExtLeg { vertex: idx(x.vertex), field: x.field }).collect(),
        bullet,
    }
}

/// Collapse options for a connected edge set, empty if it is not admissible.
fn options(m: &Model, g: &FeynmanGraph, mask: u64) -> Vec<Collapse> {
    let verts = vertices_of(g, mask);
    let h = build_component(m, g, &verts, mask, false);
    if super::loop_number(&h) < 1 || !is_1pi(&h) {
        return Vec::new();
    }
    let legs: Vec<usize> = h.ext.iter().map(|x| x.field).collect();
    let mut out = Vec::new();
    if legs.len() == 2 {
        if let Some(Res::V(v)) = m.spec.residue_of_legs(&legs, true) {
            out.push(Collapse::Vertex(v));
        }
        if let Some(Res::E(e)) = m.spec.residue_of_legs(&legs, false) {
            out.push(Collapse::Edge(e));
        }
    } else if let Some(Res::V(v)) = m.spec.residue_of_legs(&legs, false) {
        out.push(Collapse::Vertex(v));
    }
    out
}

/// Connected components of an edge mask, as sub-masks.
fn split(g: &FeynmanGraph, mask: u64) -> Vec<u64> {
    let mut comps: Vec<(Vec<usize>, u64)> = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if mask >> i & 1 == 0 {
            continue;
        }
        let hits: Vec<usize> =
            (0..comps.len()).filter(|&c| comps[c].0.contains(&e.a) || comps[c].0.contains(&e.b)).collect();
        let mut merged = (vec![e.a, e.b], 1u64 << i);
        for &c in hits.iter().rev() {
            let (vs, em) = comps.remove(c);
            merged.0.extend(vs);
            merged.1 |= em;
        }
        comps.push(merged);
    }
    let mut out: Vec<u64> = comps.into_iter().map(|c| c.1).collect();
    out.sort_unstable();
    out
}

/// All proper subgraphs with admissible components, with every combination
/// of collapse choices. Ordered by edge mask, then by choice.
pub fn subgraphs(m: &Model, g: &FeynmanGraph) -> Vec<SubgraphChoice> {
    let ne = g.edges.len();
    assert!(ne < 63, "graph too large for subgraph masks");
    let full = (1u64 << ne) - 1;
    let mut cache: HashMap<u64, Vec<Collapse>> = HashMap::new();
    let mut out = Vec::new();
    for mask in 1..full {
        let parts = split(g, mask);
        let mut opts = Vec::with_capacity(parts.len());
        let mut ok = true;
        for &p in &parts {
            let o = cache.entry(p).or_insert_with(|| options(m, g, p)).clone();
            if o.is_empty() {
                ok = false;
                break;
            }
            opts.push(o);
        }
        if !ok {
            continue;
        }
        // cartesian product over collapse choices
        let mut idx = vec![0usize; parts.len()];
        loop {
            let components = parts
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(j, (&p, &k))| Component {
                    edges: (0..ne).filter(|i| p >> i & 1 == 1).collect(),
                    vertices: vertices_of(g, p),
                    collapse: opts[j][k],
                })
                .collect();
            out.push(SubgraphChoice { components });
            let mut j = 0;
            loop {
                if j == idx.len() {
                    break;
                }
                idx[j] += 1;
                if idx[j] < opts[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                break;
            }
        }
    }
    out
}

/// `Γ/γ`: each component replaced by its residue vertex, or spliced out and
/// replaced by a single propagator. Keeps the host's bullet flag and the order
/// of its external legs.
pub fn contract(m: &Model, g: &FeynmanGraph, choice: &SubgraphChoice) -> FeynmanGraph {
    let n = g.vertices.len();
    let mut comp_of = vec![None; n];
    let mut edge_in = vec![false; g.edges.len()];
    for (ci, c) in choice.components.iter().enumerate() {
        for &v in &c.vertices {
            comp_of[v] = Some(ci);
        }
        for &e in &c.edges {
            edge_in[e] = true;
        }
    }
    // new numbering: untouched vertices, then one per component
    let mut map = vec![0usize; n];
    let mut types: Vec<usize> = Vec::new();
    let mut pseudo: Vec<Option<usize>> = Vec::new();
    for v in 0..n {
        if comp_of[v].is_none() {
            map[v] = types.len();
            types.push(g.vertices[v]);
            pseudo.push(None);
        }
    }
    let mut comp_vertex = Vec::new();
    for c in &choice.components {
        comp_vertex.push(types.len());
        match c.collapse {
            Collapse::Vertex(t) => {
                types.push(t);
                pseudo.push(None);
            }
            Collapse::Edge(t) => {
                types.push(usize::MAX);
                pseudo.push(Some(t));
            }
        }
    }
    for v in 0..n {
        if let Some(ci) = comp_of[v] {
            map[v] = comp_vertex[ci];
        }
    }
    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !edge_in[*i])
        .map(|(_, e)| Edge { ty: e.ty, a: map[e.a], b: map[e.b] })
        .collect();
    let mut ext: Vec<ExtLeg> = g.ext.iter().map(|x| ExtLeg { vertex: map[x.vertex], field: x.field }).collect();

    // splice out propagator collapses
    for p in 0..types.len() {
        let Some(t) = pseudo[p] else { continue };
        let mut ends: Vec<(usize, bool)> = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if e.a == p {
                ends.push((i, true));
            }
            if e.b == p {
                ends.push((i, false));
            }
        }
        let legs: Vec<usize> = (0..ext.len()).filter(|&i| ext[i].vertex == p).collect();
        // far end of an incident edge: (vertex, field there)
        let far = |e: &Edge, at_a: bool| -> (usize, usize) {
            if at_a {
                (e.b, m.efields[e.ty].1)
            } else {
                (e.a, m.efields[e.ty].0)
            }
        };
        match (ends.len(), legs.len()) {
            (2, 0) => {
                assert_ne!(ends[0].0, ends[1].0, "propagator collapse closed on itself");
                let (x1, f1) = far(&edges[ends[0].0], ends[0].1);
                let (x2, _) = far(&edges[ends[1].0], ends[1].1);
                let ne = if m.efields[t].0 == f1 { Edge { ty: t, a: x1, b: x2 } } else { Edge { ty: t, a: x2, b: x1 } };
                let (i0, i1) = (ends[0].0.max(ends[1].0), ends[0].0.min(ends[1].0));
                edges.remove(i0);
                edges.remove(i1);
                edges.push(ne);
            }
            (1, 1) => {
                let (x, f) = far(&edges[ends[0].0], ends[0].1);
                ext[legs[0]] = ExtLeg { vertex: x, field: f };
                edges.remove(ends[0].0);
            }
            other => panic!("propagator collapse with incidence {other:?}"),
        }
    }
    // drop pseudo vertices and compact
    let mut remap = vec![usize::MAX; types.len()];
    let mut vertices = Vec::new();
    for (i, &t) in types.iter().enumerate() {
        if pseudo[i].is_none() {
            remap[i] = vertices.len();
            vertices.push(t);
        }
    }
    for e in &mut edges {
        e.a = remap[e.a];
        e.b = remap[e.b];
    }
    for x in &mut ext {
        x.vertex = remap[x.vertex];
    }
    let h = FeynmanGraph { vertices, edges, ext, bullet: g.bullet };
    debug_assert_eq!(m.validate(&h), Ok(()), "contraction produced an invalid graph");
    h
}
