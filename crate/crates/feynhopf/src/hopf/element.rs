//! Linear combinations of graph monomials and their tensor products.

use std::collections::BTreeMap;

use num::{One, Zero};
use smallvec::SmallVec;

use crate::Q;

/// Generator index in a [`super::Hopf`] table.
pub type GenId = u32;

/// Sorted multiset of generators; empty is the unit.
pub type Mono = SmallVec<[GenId; 4]>;

pub fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out: Mono = SmallVec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Element of the free commutative algebra.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Element {
    pub terms: BTreeMap<Mono, Q>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Q::one())
    }

    pub fn scalar(c: Q) -> Self {
        let mut e = Self::zero();
        e.add_term(Mono::new(), c);
        e
    }

    pub fn gen(id: GenId) -> Self {
        Self::mono(smallvec::smallvec![id], Q::one())
    }

    pub fn mono(m: Mono, c: Q) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, o: &Element, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &o.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn add(&self, o: &Element) -> Element {
        let mut r = self.clone();
        r.add_scaled(o, &Q::one());
        r
    }

    pub fn sub(&self, o: &Element) -> Element {
        let mut r = self.clone();
        r.add_scaled(o, &-Q::one());
        r
    }

    pub fn scale(&self, c: &Q) -> Element {
        let mut r = Element::zero();
        r.add_scaled(self, c);
        r
    }

    pub fn neg(&self) -> Element {
        self.scale(&-Q::one())
    }

    /// Coefficient of the unit monomial.
    pub fn counit(&self) -> Q {
        self.terms.get(&Mono::new()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeff(&self, m: &Mono) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    /// Keep the terms whose monomial passes `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Mono) -> bool) -> Element {
        Element { terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    /// Product, dropping monomials rejected by `keep`.
    pub fn mul_with(&self, o: &Element, mut keep: impl FnMut(&Mono) -> bool) -> Element {
        let mut r = Element::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let m = mono_mul(a, b);
                if keep(&m) {
                    r.add_term(m, ca * cb);
                }
            }
        }
        r
    }

    pub fn mul(&self, o: &Element) -> Element {
        self.mul_with(o, |_| true)
    }
}

/// Element of `H ⊗ H`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Tensor {
    pub terms: BTreeMap<(Mono, Mono), Q>,
}

impl Tensor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, l: Mono, r: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((l, r)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, o: &Tensor, c: &Q) {
        for ((l, r), v) in &o.terms {
            self.add_term(l.clone(), r.clone(), v * c);
        }
    }

    pub fn sub(&self, o: &Tensor) -> Tensor {
        let mut t = self.clone();
        t.add_scaled(o, &-Q::one());
        t
    }

    /// `a ⊗ b`.
    pub fn outer(a: &Element, b: &Element) -> Tensor {
        let mut t = Tensor::zero();
        for (l, cl) in &a.terms {
            for (r, cr) in &b.terms {
                t.add_term(l.clone(), r.clone(), cl * cr);
            }
        }
        t
    }

    /// Componentwise product, dropping pairs rejected by `keep`.
    pub fn mul_with(&self, o: &Tensor, mut keep: impl FnMut(&Mono, &Mono) -> bool) -> Tensor {
        let mut t = Tensor::zero();
        for ((a, b), c1) in &self.terms {
            for ((x, y), c2) in &o.terms {
                let l = mono_mul(a, x);
                let r = mono_mul(b, y);
                if keep(&l, &r) {
                    t.add_term(l, r, c1 * c2);
                }
            }
        }
        t
    }

    pub fn mul(&self, o: &Tensor) -> Tensor {
        self.mul_with(o, |_, _| true)
    }

    /// Apply linear maps to each side.
    pub fn map(&self, mut f: impl FnMut(&Mono) -> Element, mut g: impl FnMut(&Mono) -> Element) -> Tensor {
        let mut t = Tensor::zero();
        for ((l, r), c) in &self.terms {
            let a = f(l).scale(c);
            t.add_scaled(&Tensor::outer(&a, &g(r)), &Q::one());
        }
        t
    }

    /// Multiply the two sides together.
    pub fn multiply(&self) -> Element {
        let mut e = Element::zero();
        for ((l, r), c) in &self.terms {
            e.add_term(mono_mul(l, r), c.clone());
        }
        e
    }
}

/// Element of `H ⊗ H ⊗ H`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Tensor3 {
    pub terms: BTreeMap<(Mono, Mono, Mono), Q>,
}

impl Tensor3 {
    pub fn add_term(&mut self, a: Mono, b: Mono, c: Mono, v: Q) {
        if v.is_zero() {
            return;
        }
        match self.terms.entry((a, b, c)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += v;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
}
