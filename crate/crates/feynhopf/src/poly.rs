//! Sparse multivariate polynomials over [`Q`] and the small ring abstraction
//! shared by truncated series.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};

use crate::rational::{fmt_q, qi};
use crate::Q;

/// Coefficient ring for truncated series.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_q_like(&self, c: &Q) -> Self;
    fn is_zero_r(&self) -> bool;
    fn add_r(&self, o: &Self) -> Self;
    fn mul_r(&self, o: &Self) -> Self;
    fn neg_r(&self) -> Self;
    fn sub_r(&self, o: &Self) -> Self {
        self.add_r(&o.neg_r())
    }
}

impl Ring for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn from_q_like(&self, c: &Q) -> Self {
        c.clone()
    }
    fn is_zero_r(&self) -> bool {
        self.is_zero()
    }
    fn add_r(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_r(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_r(&self) -> Self {
        -self
    }
}

/// Exponent vector.
pub type Exps = Vec<u32>;

/// Graded-lex key: total degree first, then reversed lex so that `x1` sorts
/// before `x2` at equal degree.
pub fn grlex_key(e: &[u32]) -> (u32, Vec<std::cmp::Reverse<u32>>) {
    (e.iter().sum(), e.iter().map(|&x| std::cmp::Reverse(x)).collect())
}

/// Polynomial in a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Exps, Q>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn monomial(e: Exps, c: Q) -> Self {
        let mut p = Self::zero(e.len());
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the given exponent.
    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn add_term(&mut self, e: Exps, c: Q) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(e.len(), self.nvars);
        match self.terms.entry(e) {
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

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_trunc(o, None)
    }

    /// Product dropping monomials of total degree above `max_deg`.
    pub fn mul_trunc(&self, o: &Self, max_deg: Option<u32>) -> Self {
        let mut acc: BTreeMap<Exps, Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            for (e2, c2) in &o.terms {
                if let Some(m) = max_deg {
                    let d2: u32 = e2.iter().sum();
                    if d1 + d2 > m {
                        continue;
                    }
                }
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        MPoly { nvars: self.nvars.max(o.nvars), terms: acc }
    }

    pub fn pow(&self, n: u32) -> Self {
        self.pow_trunc(n, None)
    }

    pub fn pow_trunc(&self, n: u32, max_deg: Option<u32>) -> Self {
        let mut r = Self::one(self.nvars);
        for _ in 0..n {
            r = r.mul_trunc(self, max_deg);
        }
        r
    }

    pub fn truncate(&self, max_deg: u32) -> Self {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() <= max_deg).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Largest total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Degree in variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Substitute polynomial `vals[i]` for variable `i`; all values share
    /// one target variable count.
    pub fn substitute(&self, vals: &[MPoly]) -> MPoly {
        let nv = vals.first().map(|v| v.nvars).unwrap_or(0);
        let mut r = MPoly::zero(nv);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(nv, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&vals[i].pow(k));
                }
            }
            r = r.add(&t);
        }
        r
    }

    /// Evaluate at rational point.
    pub fn eval(&self, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= &x[i];
                }
            }
            s += t;
        }
        s
    }

    /// Partial derivative in variable `i`.
    pub fn diff(&self, i: usize) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                r.add_term(e2, c * qi(e[i] as i64));
            }
        }
        r
    }

    /// Widen to `n` variables (new variables appended).
    pub fn widen(&self, n: usize) -> MPoly {
        assert!(n >= self.nvars);
        MPoly {
            nvars: n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.resize(n, 0);
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Terms in graded-lex order.
    pub fn sorted_terms(&self) -> Vec<(&Exps, &Q)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_key(a.0).cmp(&grlex_key(b.0)));
        v
    }

    /// Human-readable form with variable names.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let mono = render_mono(e, names);
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mono.is_empty() {
                out.push_str(&fmt_q(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&fmt_q(&a));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }
}

/// `x1^2*x2` style monomial; empty for the constant monomial.
pub fn render_mono(e: &[u32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        if k == 1 {
            parts.push(names[i].clone());
        } else if k > 1 {
            parts.push(format!("{}^{}", names[i], k));
        }
    }
    parts.join("*")
}

impl Ring for MPoly {
    fn zero_like(&self) -> Self {
        MPoly::zero(self.nvars)
    }
    fn one_like(&self) -> Self {
        MPoly::one(self.nvars)
    }
    fn from_q_like(&self, c: &Q) -> Self {
        MPoly::constant(self.nvars, c.clone())
    }
    fn is_zero_r(&self) -> bool {
        self.is_zero()
    }
    fn add_r(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn mul_r(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_r(&self) -> Self {
        self.neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn arithmetic_and_render() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let p = x.add(&y).pow(2);
        assert_eq!(p.render(&names(2)), "x1^2 + 2*x1*x2 + x2^2");
        let r = p.sub(&x.mul(&x)).scale(&q(1, 2));
        assert_eq!(r.render(&names(2)), "x1*x2 + 1/2*x2^2");
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn substitute_and_diff() {
        let x = MPoly::var(1, 0);
        let p = x.pow(3).add(&x.scale(&qi(2)));
        let s = p.substitute(&[MPoly::constant(1, qi(2))]);
        assert_eq!(s.constant_term(), qi(12));
        assert_eq!(p.diff(0).render(&names(1)), "2 + 3*x1^2");
    }
}
