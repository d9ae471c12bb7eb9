//! Ideal membership in the truncated algebra, one loop slice at a time.
//!
//! Generators are loop-homogeneous. The loop-`l` slice of the ideal is
//! spanned by `u·g` with `u` a monomial and `loop(u) + loop(g) = l`. Each
//! slice is kept as a semi-echelon basis whose pivots are the largest
//! monomials of their rows; reducing away every pivot monomial gives a
//! unique normal form.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num::One;

use super::{mono_mul, Element, GenId, Hopf, Mono, Tensor};
use crate::Q;

/// Outcome of a membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    NotMember,
    /// The truncation is too small to decide.
    Undecidable(String),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

#[derive(Default)]
struct Slice {
    rows: BTreeMap<Mono, Element>,
    /// Some product `u·g` straddled the window boundary.
    ragged: bool,
}

/// The ideal generated by a list of elements, truncated to the window of a
/// [`Hopf`].
pub struct GradedIdeal<'h> {
    pub h: &'h Hopf,
    pub gens: Vec<Element>,
    slices: Vec<Slice>,
    nf_cache: Mutex<HashMap<Mono, Element>>,
}

impl<'h> GradedIdeal<'h> {
    /// Build every slice up to the window's loop bound. Fails if a generator
    /// is not loop-homogeneous or leaves the window.
    pub fn new(h: &'h Hopf, gens: Vec<Element>) -> Result<Self, String> {
        let lmax = h.lmax();
        let mut slices: Vec<Slice> = (0..=lmax).map(|_| Slice::default()).collect();
        let mut by_loop: Vec<(u32, &Element)> = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            let parts = h.loop_parts(g);
            if parts.len() != 1 {
                return Err(format!("generator {i} is not loop-homogeneous"));
            }
            if g.terms.keys().any(|m| !h.in_window(m)) {
                return Err(format!("generator {i} leaves the truncation window"));
            }
            by_loop.push((*parts.keys().next().unwrap(), g));
        }
        let monos = monomials_by_loop(h, lmax);
        for (lg, g) in by_loop {
            for lu in 0..=lmax.saturating_sub(lg) {
                let s = &mut slices[(lg + lu) as usize];
                for u in &monos[lu as usize] {
                    let mut row = Element::zero();
                    let mut inside = 0usize;
                    for (m, c) in &g.terms {
                        let p = mono_mul(u, m);
                        if h.in_window(&p) {
                            inside += 1;
                            row.add_term(p, c.clone());
                        }
                    }
                    if inside == 0 {
                        continue;
                    }
                    if inside < g.terms.len() {
                        s.ragged = true;
                        continue;
                    }
                    insert_row(&mut s.rows, row);
                }
            }
        }
        Ok(GradedIdeal { h, gens, slices, nf_cache: Mutex::new(HashMap::new()) })
    }

    /// Dimension of each loop slice.
    pub fn slice_dims(&self) -> Vec<usize> {
        self.slices.iter().map(|s| s.rows.len()).collect()
    }

    fn check_window(&self, x: &Element) -> Result<(), String> {
        for m in x.terms.keys() {
            if !self.h.in_window(m) {
                return Err(format!("monomial {} outside the truncation window", self.h.render_mono(m)));
            }
        }
        Ok(())
    }

    /// Normal form: the representative with no pivot monomials.
    pub fn normal_form(&self, x: &Element) -> Result<Element, String> {
        self.check_window(x)?;
        let mut out = Element::zero();
        for (m, c) in &x.terms {
            out.add_scaled(&self.nf_mono(m), c);
        }
        Ok(out)
    }

    fn nf_mono(&self, m: &Mono) -> Element {
        if let Some(e) = self.nf_cache.lock().unwrap().get(m) {
            return e.clone();
        }
        let l = self.h.mono_loop(m) as usize;
        let mut x = Element::mono(m.clone(), Q::one());
        if let Some(s) = self.slices.get(l) {
            reduce(&s.rows, &mut x);
        }
        self.nf_cache.lock().unwrap().insert(m.clone(), x.clone());
        x
    }

    fn ragged_loops(&self, x: &Element) -> Vec<u32> {
        let mut ls: Vec<u32> = x.terms.keys().map(|m| self.h.mono_loop(m)).collect();
        ls.sort_unstable();
        ls.dedup();
        ls.into_iter().filter(|&l| self.slices[l as usize].ragged).collect()
    }

    pub fn contains(&self, x: &Element) -> Membership {
        let r = match self.normal_form(x) {
            Ok(r) => r,
            Err(e) => return Membership::Undecidable(e),
        };
        if r.is_zero() {
            return Membership::Member;
        }
        let ragged = self.ragged_loops(&r);
        if ragged.is_empty() {
            Membership::NotMember
        } else {
            Membership::Undecidable(format!("ideal slices {ragged:?} cut by the weight window"))
        }
    }

    /// `(NF⊗NF)(t)`.
    pub fn tensor_normal_form(&self, t: &Tensor) -> Result<Tensor, String> {
        let mut out = Tensor::zero();
        for ((l, r), c) in &t.terms {
            for m in [l, r] {
                if !self.h.in_window(m) {
                    return Err(format!("monomial {} outside the truncation window", self.h.render_mono(m)));
                }
            }
            out.add_scaled(&Tensor::outer(&self.nf_mono(l), &self.nf_mono(r)), c);
        }
        Ok(out)
    }

    /// Membership in `I⊗H + H⊗I`.
    pub fn tensor_contains(&self, t: &Tensor) -> Membership {
        let r = match self.tensor_normal_form(t) {
            Ok(r) => r,
            Err(e) => return Membership::Undecidable(e),
        };
        if r.is_zero() {
            return Membership::Member;
        }
        let mut ragged = Vec::new();
        for (l, r) in r.terms.keys() {
            for m in [l, r] {
                let k = self.h.mono_loop(m);
                if self.slices[k as usize].ragged {
                    ragged.push(k);
                }
            }
        }
        ragged.sort_unstable();
        ragged.dedup();
        if ragged.is_empty() {
            Membership::NotMember
        } else {
            Membership::Undecidable(format!("ideal slices {ragged:?} cut by the weight window"))
        }
    }
}

/// Reduce `x` so that no pivot monomial remains, largest first.
fn reduce(rows: &BTreeMap<Mono, Element>, x: &mut Element) {
    let mut bound: Option<Mono> = None;
    loop {
        let next = {
            let mut it: Box<dyn Iterator<Item = (&Mono, &Q)>> = match &bound {
                Some(b) => Box::new(x.terms.range(..b.clone()).rev()),
                None => Box::new(x.terms.iter().rev()),
            };
            it.find(|(m, _)| rows.contains_key(*m)).map(|(m, c)| (m.clone(), c.clone()))
        };
        let Some((m, c)) = next else { break };
        x.add_scaled(&rows[&m], &-c);
        bound = Some(m);
    }
}

fn insert_row(rows: &mut BTreeMap<Mono, Element>, mut row: Element) {
    reduce(rows, &mut row);
    let Some((p, c)) = row.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) else { return };
    let inv = Q::one() / c;
    rows.insert(p, row.scale(&inv));
}

/// Monomials in the window grouped by loop number, loop 0 being the unit.
pub(crate) fn monomials_by_loop(h: &Hopf, lmax: u32) -> Vec<Vec<Mono>> {
    let gens: Vec<GenId> = h.all_generators(lmax);
    let mut out: Vec<Vec<Mono>> = (0..=lmax).map(|_| Vec::new()).collect();
    out[0].push(Mono::new());
    // extend multisets in nondecreasing generator order
    fn grow(h: &Hopf, gens: &[GenId], start: usize, cur: &mut Mono, lmax: u32, out: &mut Vec<Vec<Mono>>) {
        for i in start..gens.len() {
            let g = gens[i];
            cur.push(g);
            let mut sorted = cur.clone();
            sorted.sort_unstable();
            let nl = h.mono_loop(&sorted);
            if nl <= lmax && h.in_window(&sorted) {
                out[nl as usize].push(sorted);
                grow(h, gens, i, cur, lmax, out);
            }
            cur.pop();
        }
    }
    let mut cur = Mono::new();
    grow(h, &gens, 0, &mut cur, lmax, &mut out);
    for v in &mut out {
        v.sort();
        v.dedup();
    }
    out
}

impl Hopf {
    /// Monomials of loop `l` inside the window.
    pub fn monomials_of_loop(&self, l: u32) -> Vec<Mono> {
        monomials_by_loop(self, l).pop().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Model;
    use crate::theory::TheorySpec;

    #[test]
    fn membership_basics() {
        let h = Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2));
        let glu = h.model.spec.residue_by_name("glu").unwrap();
        let g1 = h.generators(glu, 1);
        let a = Element::gen(g1[0]);
        let b = Element::gen(g1[1]);
        let diff = a.sub(&b);
        let ideal = GradedIdeal::new(&h, vec![diff.clone()]).unwrap();
        assert_eq!(ideal.contains(&Element::zero()), Membership::Member);
        assert_eq!(ideal.contains(&diff), Membership::Member);
        assert_eq!(ideal.contains(&a), Membership::NotMember);
        // a² − b² = (a+b)(a−b)
        let sq = h.mul(&a, &a).sub(&h.mul(&b, &b));
        assert_eq!(ideal.contains(&sq), Membership::Member);
        assert_eq!(ideal.normal_form(&a).unwrap(), ideal.normal_form(&b).unwrap());
        assert_eq!(ideal.slice_dims()[1], 1);
    }

    #[test]
    fn mixed_loop_generator_rejected() {
        let h = Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2));
        let glu = h.model.spec.residue_by_name("glu").unwrap();
        let x = Element::gen(h.generators(glu, 1)[0]).add(&Element::gen(h.generators(glu, 2)[0]));
        assert!(GradedIdeal::new(&h, vec![x]).is_err());
    }
}
