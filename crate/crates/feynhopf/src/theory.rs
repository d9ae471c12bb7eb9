//! Field theories: fields with their BRST sources, vertex and edge types, and
//! the `C^φ` assignments.
//!
//! A theory is loaded from JSON. Only leg counts enter the graph algebra, so a
//! vertex is a multiset of field names rather than a Lagrangian monomial.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::fmt_q;
use crate::{qi, Q};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TheoryError {
    #[error("malformed theory document: {0}")]
    Schema(String),
    #[error("duplicate identifier `{0}`")]
    Duplicate(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("source `{source_name}` has ghost degree {got}, expected {expected}")]
    GhostMismatch { source_name: String, got: i32, expected: i32 },
    #[error("invalid theory: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub ghost_degree: i32,
    #[serde(default)]
    pub form_degree: u32,
    #[serde(default)]
    pub is_source: bool,
    /// For a source: the field it is the source of.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<String>,
    pub statistics: Statistics,
    #[serde(default)]
    pub propagates: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexType {
    pub name: String,
    pub legs: Vec<String>,
    pub coupling: String,
}

impl VertexType {
    pub fn valence(&self) -> usize {
        self.legs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeType {
    pub name: String,
    pub field: String,
    pub conjugate_field: String,
    #[serde(default)]
    pub oriented: bool,
}

/// Monomial `Π (G^r)^{α_r}` in Green's-function symbols.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CPhiExpr {
    pub factors: BTreeMap<String, Q>,
}

impl CPhiExpr {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut f = self.factors.clone();
        for (k, v) in &o.factors {
            *f.entry(k.clone()).or_insert_with(Q::zero) += v;
        }
        f.retain(|_, v| !v.is_zero());
        CPhiExpr { factors: f }
    }

    pub fn pow(&self, a: &Q) -> Self {
        let mut f: BTreeMap<String, Q> = self.factors.iter().map(|(k, v)| (k.clone(), v * a)).collect();
        f.retain(|_, v| !v.is_zero());
        CPhiExpr { factors: f }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn symbol(r: &str) -> Self {
        let mut f = BTreeMap::new();
        f.insert(r.to_string(), Q::one());
        CPhiExpr { factors: f }
    }

    pub fn render(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(|(k, v)| if v.is_one() { format!("G^{k}") } else { format!("(G^{k})^({})", fmt_q(v)) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// JSON form: `[green-function name, numerator, denominator]` triples.
impl Serialize for CPhiExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(String, i64, i64)> = self
            .factors
            .iter()
            .map(|(k, q)| {
                let n: i64 = q.numer().try_into().expect("exponent numerator fits i64");
                let d: i64 = q.denom().try_into().expect("exponent denominator fits i64");
                (k.clone(), n, d)
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPhiExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<(String, i64, i64)> = Vec::deserialize(d)?;
        let mut e = CPhiExpr::one();
        for (k, n, den) in v {
            if den == 0 {
                return Err(serde::de::Error::custom("zero exponent denominator"));
            }
            let mut f = BTreeMap::new();
            f.insert(k, Q::new(n.into(), den.into()));
            e = e.mul(&CPhiExpr { factors: f });
        }
        Ok(e)
    }
}

/// Element of `R = R_V ∪ R_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Res {
    V(usize),
    E(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySpec {
    pub name: String,
    pub fields: Vec<FieldSpec>,
    pub vertices: Vec<VertexType>,
    pub edges: Vec<EdgeType>,
    #[serde(default)]
    pub cphi: BTreeMap<String, CPhiExpr>,
    pub loop_cutoff: u32,
    /// Field combinations in which a field enters only linearly; each entry
    /// lists that field first, followed by its partners in the term.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linear_terms: Vec<Vec<String>>,
    #[serde(default = "yes")]
    pub allow_tadpoles: bool,
    /// Send valence-2 `Y_v` to the Slavnov-Taylor ideal.
    #[serde(default = "yes")]
    pub massless: bool,
}

fn yes() -> bool {
    true
}

/// Bundled QED-like theory.
pub const QED_JSON: &str = include_str!("../theories/qed.json");
/// Bundled pure Yang-Mills theory with BRST sources.
pub const YM_JSON: &str = include_str!("../theories/ym.json");

impl TheorySpec {
    pub fn qed() -> Self {
        parse_theory(QED_JSON).expect("bundled QED theory parses")
    }

    pub fn yang_mills() -> Self {
        parse_theory(YM_JSON).expect("bundled Yang-Mills theory parses")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("theory serializes")
    }

    /// `k = |R_V|`.
    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn field(&self, name: &str) -> &FieldSpec {
        &self.fields[self.field_index(name).expect("known field")]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn residue_by_name(&self, name: &str) -> Option<Res> {
        self.vertex_index(name).map(Res::V).or_else(|| self.edge_index(name).map(Res::E))
    }

    pub fn res_name(&self, r: Res) -> &str {
        match r {
            Res::V(i) => &self.vertices[i].name,
            Res::E(i) => &self.edges[i].name,
        }
    }

    /// All of `R`: vertices first, then edges.
    pub fn residues(&self) -> Vec<Res> {
        (0..self.vertices.len()).map(Res::V).chain((0..self.edges.len()).map(Res::E)).collect()
    }

    /// Leg multiset of a residue as field indices, sorted.
    pub fn res_legs(&self, r: Res) -> Vec<usize> {
        let mut v: Vec<usize> = match r {
            Res::V(i) => self.vertices[i].legs.iter().map(|f| self.field_index(f).unwrap()).collect(),
            Res::E(i) => {
                let e = &self.edges[i];
                vec![self.field_index(&e.field).unwrap(), self.field_index(&e.conjugate_field).unwrap()]
            }
        };
        v.sort_unstable();
        v
    }

    /// `N_φ(r)` for every field.
    pub fn leg_counts(&self, r: Res) -> Vec<u32> {
        let mut c = vec![0u32; self.fields.len()];
        for f in self.res_legs(r) {
            c[f] += 1;
        }
        c
    }

    pub fn valence(&self, v: usize) -> usize {
        self.vertices[v].legs.len()
    }

    /// The field sitting on the far end of a propagator of field `f`.
    pub fn conjugate(&self, f: usize) -> Option<usize> {
        let name = &self.fields[f].name;
        self.edges.iter().find_map(|e| {
            if &e.field == name {
                self.field_index(&e.conjugate_field)
            } else if &e.conjugate_field == name {
                self.field_index(&e.field)
            } else {
                None
            }
        })
    }

    /// Edge type carrying field `f` at one end.
    pub fn edge_for_field(&self, f: usize) -> Option<usize> {
        let name = &self.fields[f].name;
        self.edges.iter().position(|e| &e.field == name || &e.conjugate_field == name)
    }

    /// Residue whose leg multiset equals `legs` (sorted field indices).
    /// Two-leg multisets prefer the valence-2 vertex when `bullet` is set.
    pub fn residue_of_legs(&self, legs: &[usize], bullet: bool) -> Option<Res> {
        let mut l = legs.to_vec();
        l.sort_unstable();
        if l.len() == 2 {
            let v = (0..self.vertices.len()).find(|&i| self.res_legs(Res::V(i)) == l).map(Res::V);
            let e = (0..self.edges.len()).find(|&i| self.res_legs(Res::E(i)) == l).map(Res::E);
            return if bullet { v } else { e };
        }
        (0..self.vertices.len()).find(|&i| self.res_legs(Res::V(i)) == l).map(Res::V)
    }

    /// Coupling symbol names in vertex order.
    pub fn couplings(&self) -> Vec<String> {
        self.vertices.iter().map(|v| v.coupling.clone()).collect()
    }
}

/// Parse and validate a theory document.
pub fn parse_theory(text: &str) -> Result<TheorySpec, TheoryError> {
    let spec: TheorySpec = serde_json::from_str(text).map_err(|e| TheoryError::Schema(e.to_string()))?;
    check_structure(&spec)?;
    Ok(spec)
}

fn check_structure(s: &TheorySpec) -> Result<(), TheoryError> {
    let mut seen = BTreeSet::new();
    for f in &s.fields {
        if !seen.insert(f.name.clone()) {
            return Err(TheoryError::Duplicate(f.name.clone()));
        }
    }
    let mut rnames = BTreeSet::new();
    for n in s.vertices.iter().map(|v| &v.name).chain(s.edges.iter().map(|e| &e.name)) {
        if !rnames.insert(n.clone()) {
            return Err(TheoryError::Duplicate(n.clone()));
        }
    }
    let known = |n: &str| -> Result<&FieldSpec, TheoryError> {
        s.fields.iter().find(|f| f.name == n).ok_or_else(|| TheoryError::UnknownField(n.to_string()))
    };
    let mut partners: BTreeMap<String, usize> = BTreeMap::new();
    for f in &s.fields {
        if f.is_source {
            let p = f.partner.as_deref().ok_or_else(|| TheoryError::Invalid(format!("source `{}` has no partner", f.name)))?;
            let pf = known(p)?;
            if pf.is_source {
                return Err(TheoryError::Invalid(format!("source `{}` pairs with source `{p}`", f.name)));
            }
            let expected = -pf.ghost_degree - 1;
            if f.ghost_degree != expected {
                return Err(TheoryError::GhostMismatch { source_name: f.name.clone(), got: f.ghost_degree, expected });
            }
            if f.propagates {
                return Err(TheoryError::Invalid(format!("source `{}` propagates", f.name)));
            }
            *partners.entry(p.to_string()).or_default() += 1;
        }
    }
    for f in s.fields.iter().filter(|f| !f.is_source) {
        if partners.get(&f.name).copied().unwrap_or(0) != 1 {
            return Err(TheoryError::Invalid(format!("field `{}` needs exactly one source", f.name)));
        }
    }
    let mut source_vertices: BTreeMap<String, usize> = BTreeMap::new();
    for v in &s.vertices {
        if v.legs.len() < 2 {
            return Err(TheoryError::Invalid(format!("vertex `{}` has valence < 2", v.name)));
        }
        let mut has_source = false;
        for l in &v.legs {
            let f = known(l)?;
            if f.is_source {
                has_source = true;
                *source_vertices.entry(l.clone()).or_default() += 1;
            }
        }
        if v.legs.len() == 2 && v.legs[0] != v.legs[1] {
            // a conjugate pair counts as one field for mass terms
            let a = &v.legs[0];
            let b = &v.legs[1];
            let pair = s.edges.iter().any(|e| (&e.field == a && &e.conjugate_field == b) || (&e.field == b && &e.conjugate_field == a));
            if !pair {
                return Err(TheoryError::Invalid(format!("valence-2 vertex `{}` mixes two fields", v.name)));
            }
        }
        if !has_source {
            for l in &v.legs {
                if known(l)?.statistics == Statistics::Fermionic {
                    let conj = s.edges.iter().find_map(|e| {
                        if &e.field == l {
                            Some(e.conjugate_field.clone())
                        } else if &e.conjugate_field == l {
                            Some(e.field.clone())
                        } else {
                            None
                        }
                    });
                    if let Some(c) = conj {
                        if !v.legs.contains(&c) {
                            return Err(TheoryError::Invalid(format!("vertex `{}` has `{l}` without `{c}`", v.name)));
                        }
                    }
                }
            }
        }
        // every leg field must be able to end on a propagator or be a source
        for l in &v.legs {
            let f = known(l)?;
            if !f.is_source && !s.edges.iter().any(|e| &e.field == l || &e.conjugate_field == l) {
                return Err(TheoryError::Invalid(format!("vertex `{}` leg `{l}` has no propagator", v.name)));
            }
        }
    }
    for (src, n) in source_vertices {
        if n > 1 {
            return Err(TheoryError::Invalid(format!("source `{src}` appears in {n} vertices")));
        }
    }
    for e in &s.edges {
        for n in [&e.field, &e.conjugate_field] {
            let f = known(n)?;
            if f.is_source {
                return Err(TheoryError::Invalid(format!("edge `{}` carries source `{n}`", e.name)));
            }
            if !f.propagates {
                return Err(TheoryError::Invalid(format!("edge `{}` carries non-propagating `{n}`", e.name)));
            }
        }
        if e.field == e.conjugate_field && e.oriented {
            return Err(TheoryError::Invalid(format!("self-conjugate edge `{}` marked oriented", e.name)));
        }
    }
    for (f, expr) in &s.cphi {
        known(f)?;
        for r in expr.factors.keys() {
            if s.residue_by_name(r).is_none() {
                return Err(TheoryError::Invalid(format!("C^{f} references unknown residue `{r}`")));
            }
        }
    }
    for t in &s.linear_terms {
        for f in t {
            known(f)?;
        }
    }
    Ok(())
}

/// One failed `C^φ` condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPhiViolation {
    pub condition: u8,
    pub detail: String,
}

/// Check the three `C^φ` conditions symbolically; returns the violations.
pub fn validate_cphi(s: &TheorySpec) -> Vec<CPhiViolation> {
    let mut out = Vec::new();
    let c = |f: &str| -> Option<&CPhiExpr> { s.cphi.get(f) };
    for f in &s.fields {
        if c(&f.name).is_none() {
            out.push(CPhiViolation { condition: 0, detail: format!("no C^{} given", f.name) });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for t in &s.linear_terms {
        let prod = t.iter().fold(CPhiExpr::one(), |acc, f| acc.mul(c(f).unwrap()));
        if !prod.is_one() {
            out.push(CPhiViolation { condition: 1, detail: format!("product over {:?} is {}", t, prod.render()) });
        }
    }
    for e in &s.edges {
        let prod = c(&e.field).unwrap().mul(c(&e.conjugate_field).unwrap());
        let want = CPhiExpr::symbol(&e.name);
        if prod != want {
            out.push(CPhiViolation {
                condition: 2,
                detail: format!("C^{} C^{} = {} but G^{} expected", e.field, e.conjugate_field, prod.render(), e.name),
            });
        }
    }
    for f in s.fields.iter().filter(|f| f.is_source) {
        let p = f.partner.as_ref().unwrap();
        let prod = c(&f.name).unwrap().mul(c(p).unwrap());
        if !prod.is_one() {
            out.push(CPhiViolation { condition: 3, detail: format!("C^{} C^{} = {}", f.name, p, prod.render()) });
        }
    }
    out
}

/// `Y_v = G^v / Π_φ (C^φ)^{N_φ(v)}` as a monomial in Green's-function symbols.
pub fn y_monomial(s: &TheorySpec, v: usize) -> CPhiExpr {
    let mut m = CPhiExpr::symbol(&s.vertices[v].name);
    for (fi, n) in s.leg_counts(Res::V(v)).into_iter().enumerate() {
        if n > 0 {
            let cf = s.cphi.get(&s.fields[fi].name).cloned().unwrap_or_default();
            m = m.mul(&cf.pow(&-qi(n as i64)));
        }
    }
    m
}
