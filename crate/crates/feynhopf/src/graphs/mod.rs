//! Feynman graphs as typed multigraphs with external legs.
//!
//! Internal edges store the vertex at their `field` end in `a` and the vertex
//! at their `conjugate_field` end in `b`. Legs of one field at one vertex are
//! interchangeable, so a graph only records which vertex each half-edge sits on.

mod canon;
mod enumerate;
mod subgraph;

pub use canon::{
    aut_fixed, aut_free, brute_force_aut_fixed, canonical_form, class_key, relabel, render, CanonResult,
};
pub use enumerate::{enumerate_graphs, enumerate_window};
pub use subgraph::{component_graph, contract, subgraphs, Collapse, Component, SubgraphChoice};

use crate::theory::{Res, TheorySpec};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} legs do not match its type")]
    LegMismatch(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not one-particle irreducible")]
    NotOnePI,
    #[error("graph has no loops")]
    Tree,
    #[error("external legs match no residue")]
    NoResidue,
    #[error("edge {0} carries a non-propagating field")]
    BadEdge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub ty: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtLeg {
    pub vertex: usize,
    pub field: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeynmanGraph {
    /// Vertex type index per vertex.
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
    /// External legs in their (distinguishable) order.
    pub ext: Vec<ExtLeg>,
    pub bullet: bool,
}

/// Loop number, vertex counts and degrees `d_v = m_v - n_v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphGrading {
    pub loop_number: u32,
    pub m: Vec<u32>,
    pub d: Vec<i32>,
}

/// Index tables derived from a [`TheorySpec`] plus truncation settings.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: TheorySpec,
    /// Per vertex type: leg count per field.
    pub vlegs: Vec<Vec<u32>>,
    /// Per vertex type: field of each leg slot.
    pub vslots: Vec<Vec<usize>>,
    /// Per edge type: (field, conjugate field).
    pub efields: Vec<(usize, usize)>,
    pub eoriented: Vec<bool>,
    /// Per field: edge type carrying it.
    pub field_edge: Vec<Option<usize>>,
    /// Per field: field on the opposite end of its propagator.
    pub partner: Vec<Option<usize>>,
    pub is_source: Vec<bool>,
    /// Highest loop order generated.
    pub lmax: u32,
    /// Highest weight `L + Σ_{val 2} d_v` generated.
    pub wmax: u32,
}

impl Model {
    pub fn new(spec: TheorySpec) -> Self {
        let l = spec.loop_cutoff;
        Self::with_window(spec, l, l)
    }

    pub fn with_window(spec: TheorySpec, lmax: u32, wmax: u32) -> Self {
        let nf = spec.fields.len();
        let fi = |n: &str| spec.field_index(n).expect("validated field");
        let vslots: Vec<Vec<usize>> = spec.vertices.iter().map(|v| v.legs.iter().map(|l| fi(l)).collect()).collect();
        let vlegs = vslots
            .iter()
            .map(|s| {
                let mut c = vec![0u32; nf];
                for &f in s {
                    c[f] += 1;
                }
                c
            })
            .collect();
        let efields: Vec<(usize, usize)> = spec.edges.iter().map(|e| (fi(&e.field), fi(&e.conjugate_field))).collect();
        let eoriented = spec.edges.iter().map(|e| e.oriented).collect();
        let mut field_edge = vec![None; nf];
        let mut partner = vec![None; nf];
        for (i, &(f, g)) in efields.iter().enumerate() {
            field_edge[f] = Some(i);
            field_edge[g] = Some(i);
            partner[f] = Some(g);
            partner[g] = Some(f);
        }
        let is_source = spec.fields.iter().map(|f| f.is_source).collect();
        Model { spec, vlegs, vslots, efields, eoriented, field_edge, partner, is_source, lmax, wmax }
    }

    pub fn nfields(&self) -> usize {
        self.spec.fields.len()
    }

    pub fn k(&self) -> usize {
        self.spec.vertices.len()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.vslots[v].len()
    }

    /// Vertex types of valence 2.
    pub fn val2(&self) -> Vec<usize> {
        (0..self.k()).filter(|&v| self.valence(v) == 2).collect()
    }

    /// Field at the given end of an edge of type `ty` (`true` = `a` end).
    pub fn end_field(&self, ty: usize, a_end: bool) -> usize {
        if a_end {
            self.efields[ty].0
        } else {
            self.efields[ty].1
        }
    }

    /// Sorted leg multiset of a residue.
    pub fn res_legs(&self, r: Res) -> Vec<usize> {
        self.spec.res_legs(r)
    }

    /// Per-vertex count of legs filled, per field.
    pub fn filled(&self, g: &FeynmanGraph) -> Vec<Vec<u32>> {
        let nf = self.nfields();
        let mut c = vec![vec![0u32; nf]; g.vertices.len()];
        for e in &g.edges {
            c[e.a][self.efields[e.ty].0] += 1;
            c[e.b][self.efields[e.ty].1] += 1;
        }
        for x in &g.ext {
            c[x.vertex][x.field] += 1;
        }
        c
    }

    /// Check leg filling, connectivity, 1PI and loop number.
    pub fn validate(&self, g: &FeynmanGraph) -> Result<(), GraphError> {
        for (i, e) in g.edges.iter().enumerate() {
            let (f, h) = self.efields[e.ty];
            if self.is_source[f] || self.is_source[h] {
                return Err(GraphError::BadEdge(i));
            }
        }
        for (v, c) in self.filled(g).iter().enumerate() {
            if *c != self.vlegs[g.vertices[v]] {
                return Err(GraphError::LegMismatch(v));
            }
        }
        if !is_connected(g) {
            return Err(GraphError::Disconnected);
        }
        if loop_number(g) < 1 {
            return Err(GraphError::Tree);
        }
        if !is_1pi(g) {
            return Err(GraphError::NotOnePI);
        }
        Ok(())
    }

    /// Residue of a graph, `None` if its legs match nothing in `R`.
    pub fn residue(&self, g: &FeynmanGraph) -> Option<Res> {
        let legs: Vec<usize> = g.ext.iter().map(|x| x.field).collect();
        self.spec.residue_of_legs(&legs, g.bullet)
    }

    pub fn grading(&self, g: &FeynmanGraph) -> GraphGrading {
        let mut m = vec![0u32; self.k()];
        for &t in &g.vertices {
            m[t] += 1;
        }
        let mut d: Vec<i32> = m.iter().map(|&x| x as i32).collect();
        if let Some(Res::V(v)) = self.residue(g) {
            d[v] -= 1;
        }
        GraphGrading { loop_number: loop_number(g) as u32, m, d }
    }

    /// `L + Σ_{valence-2 v} d_v`; additive and non-negative on 1PI graphs.
    pub fn weight(&self, g: &FeynmanGraph) -> u32 {
        let gr = self.grading(g);
        weight_of(self, gr.loop_number, &gr.d)
    }

    pub fn vertex_name(&self, t: usize) -> &str {
        &self.spec.vertices[t].name
    }

    pub fn edge_name(&self, t: usize) -> &str {
        &self.spec.edges[t].name
    }

    pub fn field_name(&self, f: usize) -> &str {
        &self.spec.fields[f].name
    }
}

/// Weight from loop number and degrees.
pub fn weight_of(m: &Model, l: u32, d: &[i32]) -> u32 {
    let extra: i32 = m.val2().iter().map(|&v| d[v]).sum();
    (l as i32 + extra).max(0) as u32
}

/// First Betti number `|E| - |V| + 1` (may be negative for invalid input).
pub fn loop_number(g: &FeynmanGraph) -> i64 {
    g.edges.len() as i64 - g.vertices.len() as i64 + 1
}

fn components_with(nv: usize, edges: &[Edge], skip: Option<usize>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for (i, e) in edges.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let ra = find(&mut parent, e.a);
        let rb = find(&mut parent, e.b);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..nv).map(|x| find(&mut parent, x)).collect()
}

pub fn is_connected(g: &FeynmanGraph) -> bool {
    if g.vertices.is_empty() {
        return false;
    }
    let c = components_with(g.vertices.len(), &g.edges, None);
    c.iter().all(|&x| x == c[0])
}

/// Connected with no bridge among the internal edges.
pub fn is_1pi(g: &FeynmanGraph) -> bool {
    if !is_connected(g) {
        return false;
    }
    (0..g.edges.len()).all(|i| {
        let e = &g.edges[i];
        if e.a == e.b {
            return true;
        }
        let c = components_with(g.vertices.len(), &g.edges, Some(i));
        c.iter().all(|&x| x == c[0])
    })
}

pub fn has_self_loop(g: &FeynmanGraph) -> bool {
    g.edges.iter().any(|e| e.a == e.b)
}

#[cfg(test)]
mod tests;
