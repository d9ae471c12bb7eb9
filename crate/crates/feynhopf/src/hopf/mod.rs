//! The free commutative algebra on 1PI graphs with its coproduct, counit,
//! antipode and grading projections.
//!
//! A [`Hopf`] value owns a generator table. Generators are isomorphism
//! classes of graphs with unordered external legs, interned on first use.
//! Everything is truncated to the model's window: loop number at most
//! `lmax` and weight at most `wmax`.

mod checks;
mod element;
mod ideal;

pub use checks::{check_axioms, check_grading};
pub use element::{mono_mul, Element, GenId, Mono, Tensor, Tensor3};
pub use ideal::{GradedIdeal, Membership};

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use num::{One, Signed, Zero};

use crate::graphs::{self, FeynmanGraph, Model};
use crate::poly::Ring;
use crate::rational::fmt_q;
use crate::theory::Res;
use crate::Q;

/// Data attached to one generator.
#[derive(Clone, Debug)]
pub struct GenInfo {
    pub key: String,
    /// Canonical representative.
    pub graph: FeynmanGraph,
    pub res: Res,
    pub loop_number: u32,
    pub m: Vec<u32>,
    pub d: Vec<i32>,
    pub weight: u32,
    /// Automorphisms permuting equal-field external legs.
    pub aut_free: u64,
    /// Automorphisms fixing the representative's external legs.
    pub aut_fixed: u64,
}

#[derive(Default)]
struct Table {
    ids: HashMap<String, GenId>,
    infos: Vec<Arc<GenInfo>>,
}

/// Generator table, memoized structure maps and truncation window.
pub struct Hopf {
    pub model: Model,
    table: RwLock<Table>,
    cop: Mutex<HashMap<GenId, Arc<Tensor>>>,
    anti: Mutex<HashMap<GenId, Arc<Element>>>,
    gens: Mutex<HashMap<(Res, u32), Arc<Vec<GenId>>>>,
}

impl Hopf {
    pub fn new(model: Model) -> Self {
        Hopf {
            model,
            table: RwLock::new(Table::default()),
            cop: Mutex::new(HashMap::new()),
            anti: Mutex::new(HashMap::new()),
            gens: Mutex::new(HashMap::new()),
        }
    }

    pub fn lmax(&self) -> u32 {
        self.model.lmax
    }

    pub fn wmax(&self) -> u32 {
        self.model.wmax
    }

    /// Generator id of the class of `g`, interning it if new.
    pub fn intern(&self, g: &FeynmanGraph) -> GenId {
        let key = graphs::class_key(&self.model, g);
        if let Some(&id) = self.table.read().unwrap().ids.get(&key) {
            return id;
        }
        let m = &self.model;
        let res = m.residue(g).unwrap_or_else(|| panic!("graph without residue: {key}"));
        let gr = m.grading(g);
        let info = GenInfo {
            weight: graphs::weight_of(m, gr.loop_number, &gr.d),
            key: key.clone(),
            graph: g.clone(),
            res,
            loop_number: gr.loop_number,
            m: gr.m,
            d: gr.d,
            aut_free: graphs::aut_free(m, g),
            aut_fixed: graphs::aut_fixed(m, g),
        };
        let mut t = self.table.write().unwrap();
        if let Some(&id) = t.ids.get(&key) {
            return id;
        }
        let id = t.infos.len() as GenId;
        t.infos.push(Arc::new(info));
        t.ids.insert(key, id);
        id
    }

    pub fn info(&self, id: GenId) -> Arc<GenInfo> {
        self.table.read().unwrap().infos[id as usize].clone()
    }

    pub fn num_interned(&self) -> usize {
        self.table.read().unwrap().infos.len()
    }

    /// Generators with residue `r` at loop `l`, in class-key order.
    pub fn generators(&self, r: Res, l: u32) -> Arc<Vec<GenId>> {
        if let Some(v) = self.gens.lock().unwrap().get(&(r, l)) {
            return v.clone();
        }
        let ids: Vec<GenId> = graphs::enumerate_graphs(&self.model, r, l).iter().map(|g| self.intern(g)).collect();
        let ids = Arc::new(ids);
        self.gens.lock().unwrap().insert((r, l), ids.clone());
        ids
    }

    /// Every generator up to loop `lmax`, grouped by residue then loop.
    pub fn all_generators(&self, lmax: u32) -> Vec<GenId> {
        let mut out = Vec::new();
        for r in self.model.spec.residues() {
            for l in 1..=lmax {
                out.extend(self.generators(r, l).iter().copied());
            }
        }
        out
    }

    pub fn mono_loop(&self, m: &Mono) -> u32 {
        let t = self.table.read().unwrap();
        m.iter().map(|&g| t.infos[g as usize].loop_number).sum()
    }

    pub fn mono_weight(&self, m: &Mono) -> u32 {
        let t = self.table.read().unwrap();
        m.iter().map(|&g| t.infos[g as usize].weight).sum()
    }

    /// Multidegree `(d_v)` of a monomial.
    pub fn mono_degree(&self, m: &Mono) -> Vec<i32> {
        let t = self.table.read().unwrap();
        let mut d = vec![0i32; self.model.k()];
        for &g in m {
            for (x, y) in d.iter_mut().zip(&t.infos[g as usize].d) {
                *x += y;
            }
        }
        d
    }

    pub fn in_window(&self, m: &Mono) -> bool {
        let t = self.table.read().unwrap();
        let (mut l, mut w) = (0, 0);
        for &g in m {
            l += t.infos[g as usize].loop_number;
            w += t.infos[g as usize].weight;
        }
        l <= self.lmax() && w <= self.wmax()
    }

    /// Drop monomials outside the window.
    pub fn truncate(&self, x: &Element) -> Element {
        x.filter(|m| self.in_window(m))
    }

    /// Product truncated to the window.
    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let t = self.table.read().unwrap();
        let (lm, wm) = (self.lmax(), self.wmax());
        a.mul_with(b, |m| {
            let (mut l, mut w) = (0, 0);
            for &g in m {
                l += t.infos[g as usize].loop_number;
                w += t.infos[g as usize].weight;
            }
            l <= lm && w <= wm
        })
    }

    /// `q_l`: loop-homogeneous part.
    pub fn project_loop(&self, x: &Element, l: u32) -> Element {
        x.filter(|m| self.mono_loop(m) == l)
    }

    /// `p_n`: part of multidegree `n`.
    pub fn project_multidegree(&self, x: &Element, n: &[i32]) -> Element {
        x.filter(|m| self.mono_degree(m) == n)
    }

    /// Multidegree components of `x`.
    pub fn multidegree_parts(&self, x: &Element) -> BTreeMap<Vec<i32>, Element> {
        let mut out: BTreeMap<Vec<i32>, Element> = BTreeMap::new();
        for (m, c) in &x.terms {
            out.entry(self.mono_degree(m)).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    /// Loop components of `x`.
    pub fn loop_parts(&self, x: &Element) -> BTreeMap<u32, Element> {
        let mut out: BTreeMap<u32, Element> = BTreeMap::new();
        for (m, c) in &x.terms {
            out.entry(self.mono_loop(m)).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn counit(&self, x: &Element) -> Q {
        x.counit()
    }

    /// `Δ` on a generator: `Γ⊗1 + 1⊗Γ + Σ γ ⊗ Γ/γ`.
    pub fn coproduct_gen(&self, id: GenId) -> Arc<Tensor> {
        if let Some(t) = self.cop.lock().unwrap().get(&id) {
            return t.clone();
        }
        let info = self.info(id);
        let g = &info.graph;
        let m = &self.model;
        let one = Mono::new();
        let me: Mono = smallvec::smallvec![id];
        let mut t = Tensor::zero();
        t.add_term(me.clone(), one.clone(), Q::one());
        t.add_term(one, me, Q::one());
        for choice in graphs::subgraphs(m, g) {
            let mut left = Mono::new();
            for c in &choice.components {
                let cg = graphs::component_graph(m, g, c);
                left = mono_mul(&left, &smallvec::smallvec![self.intern(&cg)]);
            }
            let q = graphs::contract(m, g, &choice);
            let right: Mono = smallvec::smallvec![self.intern(&q)];
            t.add_term(left, right, Q::one());
        }
        let t = Arc::new(t);
        self.cop.lock().unwrap().insert(id, t.clone());
        t
    }

    pub fn coproduct_mono(&self, m: &Mono) -> Tensor {
        let mut t = Tensor::zero();
        t.add_term(Mono::new(), Mono::new(), Q::one());
        for &g in m {
            t = t.mul(&self.coproduct_gen(g));
        }
        t
    }

    pub fn coproduct(&self, x: &Element) -> Tensor {
        let mut t = Tensor::zero();
        for (m, c) in &x.terms {
            t.add_scaled(&self.coproduct_mono(m), c);
        }
        t
    }

    /// `(Δ⊗id)Δ` or `(id⊗Δ)Δ` flattened.
    pub fn coproduct3(&self, x: &Element, left: bool) -> Tensor3 {
        let mut out = Tensor3::default();
        for ((l, r), c) in &self.coproduct(x).terms {
            let inner = self.coproduct_mono(if left { l } else { r });
            for ((a, b), c2) in &inner.terms {
                let v = c * c2;
                if left {
                    out.add_term(a.clone(), b.clone(), r.clone(), v);
                } else {
                    out.add_term(l.clone(), a.clone(), b.clone(), v);
                }
            }
        }
        out
    }

    /// Antipode on a generator, by the reduced-coproduct recursion.
    pub fn antipode_gen(&self, id: GenId) -> Arc<Element> {
        if let Some(s) = self.anti.lock().unwrap().get(&id) {
            return s.clone();
        }
        let cop = self.coproduct_gen(id);
        let mut s = Element::zero();
        s.add_term(smallvec::smallvec![id], -Q::one());
        for ((l, r), c) in &cop.terms {
            if l.is_empty() || r.is_empty() {
                continue;
            }
            let sl = self.antipode_mono(l);
            s.add_scaled(&sl.mul(&Element::mono(r.clone(), Q::one())), &-c);
        }
        let s = Arc::new(s);
        self.anti.lock().unwrap().insert(id, s.clone());
        s
    }

    pub fn antipode_mono(&self, m: &Mono) -> Element {
        let mut e = Element::one();
        for &g in m {
            e = e.mul(&self.antipode_gen(g));
        }
        e
    }

    pub fn antipode(&self, x: &Element) -> Element {
        let mut e = Element::zero();
        for (m, c) in &x.terms {
            e.add_scaled(&self.antipode_mono(m), c);
        }
        e
    }

    /// `(f ⋆ g)(x) = (f⊗g)Δ(x)` for characters given on generators.
    pub fn convolve<R: Ring>(
        &self,
        f: &dyn Fn(GenId) -> R,
        g: &dyn Fn(GenId) -> R,
        x: &Element,
        unit: &R,
    ) -> R {
        let mut acc = unit.zero_like();
        for ((l, r), c) in &self.coproduct(x).terms {
            let v = eval_mono(f, l, unit).mul_r(&eval_mono(g, r, unit)).mul_r(&unit.from_q_like(c));
            acc = acc.add_r(&v);
        }
        acc
    }

    /// Evaluate a character (given on generators) on an element.
    pub fn eval<R: Ring>(&self, f: &dyn Fn(GenId) -> R, x: &Element, unit: &R) -> R {
        let mut acc = unit.zero_like();
        for (m, c) in &x.terms {
            acc = acc.add_r(&eval_mono(f, m, unit).mul_r(&unit.from_q_like(c)));
        }
        acc
    }

    /// `[key1][key2]`, factors sorted by key; `1` for the unit.
    pub fn render_mono(&self, m: &Mono) -> String {
        if m.is_empty() {
            return "1".into();
        }
        let t = self.table.read().unwrap();
        let mut keys: Vec<&str> = m.iter().map(|&g| t.infos[g as usize].key.as_str()).collect();
        keys.sort_unstable();
        keys.iter().map(|k| format!("[{k}]")).collect()
    }

    /// `c1 * [g1][g2] + c2 * [g3]`, terms sorted by rendered monomial.
    pub fn render(&self, x: &Element) -> String {
        let mut rows: Vec<(String, Q)> = x.terms.iter().map(|(m, c)| (self.render_mono(m), c.clone())).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        join_terms(rows.into_iter().map(|(s, c)| (c, s)))
    }

    pub fn render_tensor(&self, t: &Tensor) -> String {
        let mut rows: Vec<(String, Q)> = t
            .terms
            .iter()
            .map(|((l, r), c)| (format!("{} (x) {}", self.render_mono(l), self.render_mono(r)), c.clone()))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        join_terms(rows.into_iter().map(|(s, c)| (c, s)))
    }
}

fn eval_mono<R: Ring>(f: &dyn Fn(GenId) -> R, m: &Mono, unit: &R) -> R {
    let mut v = unit.one_like();
    for &g in m {
        v = v.mul_r(&f(g));
    }
    v
}

fn join_terms(rows: impl Iterator<Item = (Q, String)>) -> String {
    let mut out = String::new();
    for (i, (c, s)) in rows.enumerate() {
        if i > 0 {
            out.push_str(if c.is_negative() { " - " } else { " + " });
            out.push_str(&fmt_q(&c.abs()));
        } else {
            out.push_str(&fmt_q(&c));
        }
        out.push_str(" * ");
        out.push_str(&s);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Coefficient-level difference report: the first monomial (in rendered
/// order) where two tensors disagree.
pub fn first_mismatch(h: &Hopf, a: &Tensor, b: &Tensor) -> Option<String> {
    let d = a.sub(b);
    let mut rows: Vec<(String, Q)> = d
        .terms
        .iter()
        .map(|((l, r), c)| (format!("{} (x) {}", h.render_mono(l), h.render_mono(r)), c.clone()))
        .collect();
    rows.sort_by(|x, y| x.0.cmp(&y.0));
    rows.into_iter().next().map(|(s, c)| format!("{} * {}", fmt_q(&c), s))
}

/// `true` if the scalar is zero; tiny helper for report code.
pub fn is_zero_q(x: &Q) -> bool {
    x.is_zero()
}

/// `1/n` for positive integers.
pub fn inv_u64(n: u64) -> Q {
    Q::new(1.into(), n.into())
}

#[cfg(test)]
mod tests;
