//! Green's functions, their rational powers, `C^φ`, `Y_v`, `X`, and the
//! coproduct identities they satisfy. Also the Slavnov–Taylor ideal `J′`
//! and identities in the quotient by it.
//!
//! Every series is an [`Element`] truncated to the window of the underlying
//! [`Hopf`]. Components inside the window are exact because loop number and
//! weight are both additive and nonnegative on monomials.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num::{One, Zero};

use crate::hopf::{first_mismatch, Element, GenId, GradedIdeal, Hopf, Membership, Mono, Tensor};
use crate::rational::{binomial, factorial, fmt_q};
use crate::report::{Check, Status};
use crate::theory::{y_monomial, CPhiExpr, Res};
use crate::Q;

/// `1/Sym` summed over leg orderings: `Π_φ N_φ(r)! / |Aut|`, with the
/// automorphisms allowed to permute equal-field legs.
pub fn green_coefficient(h: &Hopf, id: GenId) -> Q {
    let info = h.info(id);
    let mut c = Q::one();
    for n in h.model.spec.leg_counts(info.res) {
        c *= factorial(n);
    }
    c / Q::from_integer(info.aut_free.into())
}

/// `(1 + a)^α` by the binomial series, `a` without constant term.
pub fn power(h: &Hopf, x: &Element, alpha: &Q) -> Element {
    assert_eq!(x.counit(), Q::one(), "power of a series not starting at 1");
    if alpha.is_zero() {
        return Element::one();
    }
    if alpha.is_one() {
        return x.clone();
    }
    let a = x.sub(&Element::one());
    let mut out = Element::one();
    let mut ak = Element::one();
    for k in 1..=h.lmax() {
        ak = h.mul(&ak, &a);
        if ak.is_zero() {
            break;
        }
        out.add_scaled(&ak, &binomial(alpha, k));
    }
    out
}

/// Green's-function series over one [`Hopf`], with memoized powers.
pub struct Greens<'h> {
    pub h: &'h Hopf,
    green: Mutex<HashMap<Res, Arc<Element>>>,
    pows: Mutex<HashMap<(Res, Q), Arc<Element>>>,
    exprs: Mutex<HashMap<String, Arc<Element>>>,
}

impl<'h> Greens<'h> {
    pub fn new(h: &'h Hopf) -> Self {
        Greens {
            h,
            green: Mutex::new(HashMap::new()),
            pows: Mutex::new(HashMap::new()),
            exprs: Mutex::new(HashMap::new()),
        }
    }

    fn sign(r: Res) -> Q {
        match r {
            Res::V(_) => Q::one(),
            Res::E(_) => -Q::one(),
        }
    }

    /// `G^e = 1 − Σ Γ/Sym`, `G^v = 1 + Σ Γ/Sym`.
    pub fn green(&self, r: Res) -> Arc<Element> {
        if let Some(g) = self.green.lock().unwrap().get(&r) {
            return g.clone();
        }
        let s = Self::sign(r);
        let mut g = Element::one();
        for l in 1..=self.h.lmax() {
            for &id in self.h.generators(r, l).iter() {
                g.add_term(smallvec::smallvec![id], &s * green_coefficient(self.h, id));
            }
        }
        let g = Arc::new(g);
        self.green.lock().unwrap().insert(r, g.clone());
        g
    }

    /// Loop-`l` slice of `G^r`.
    pub fn green_slice(&self, r: Res, l: u32) -> Element {
        self.h.project_loop(&self.green(r), l)
    }

    pub fn green_pow(&self, r: Res, alpha: &Q) -> Arc<Element> {
        let key = (r, alpha.clone());
        if let Some(g) = self.pows.lock().unwrap().get(&key) {
            return g.clone();
        }
        let p = Arc::new(power(self.h, &self.green(r), alpha));
        self.pows.lock().unwrap().insert(key, p.clone());
        p
    }

    /// Product of Green's-function powers named by residue.
    pub fn expand(&self, e: &CPhiExpr) -> Arc<Element> {
        let key = e.render();
        if let Some(x) = self.exprs.lock().unwrap().get(&key) {
            return x.clone();
        }
        let spec = &self.h.model.spec;
        let mut out = Element::one();
        for (name, a) in &e.factors {
            let r = spec.residue_by_name(name).unwrap_or_else(|| panic!("unknown residue {name}"));
            out = self.h.mul(&out, &self.green_pow(r, a));
        }
        let out = Arc::new(out);
        self.exprs.lock().unwrap().insert(key, out.clone());
        out
    }

    pub fn cphi_expr(&self, field: &str) -> CPhiExpr {
        self.h.model.spec.cphi.get(field).cloned().unwrap_or_default()
    }

    /// `(C^φ)^α`.
    pub fn cphi(&self, field: &str, alpha: &Q) -> Arc<Element> {
        self.expand(&self.cphi_expr(field).pow(alpha))
    }

    pub fn y_expr(&self, v: usize) -> CPhiExpr {
        y_monomial(&self.h.model.spec, v)
    }

    /// `Y_v^α`.
    pub fn y(&self, v: usize, alpha: &Q) -> Arc<Element> {
        self.expand(&self.y_expr(v).pow(alpha))
    }

    /// The vertex defining `X`: lowest valence above 2, first in spec order.
    pub fn x_vertex(&self) -> Option<usize> {
        let m = &self.h.model;
        (0..m.k()).filter(|&v| m.valence(v) > 2).min_by_key(|&v| (m.valence(v), v))
    }

    /// `X_v = Y_v^{1/(N(v)−2)}`.
    pub fn x(&self, v: usize) -> Arc<Element> {
        let n = self.h.model.valence(v) as i64 - 2;
        self.y(v, &Q::new(1.into(), n.into()))
    }

    /// `Π_i Y_{v_i}^{n_i}` for a multidegree.
    pub fn y_product(&self, n: &[i32]) -> Arc<Element> {
        let mut e = CPhiExpr::one();
        for (v, &k) in n.iter().enumerate() {
            if k != 0 {
                e = e.mul(&self.y_expr(v).pow(&Q::from_integer(k.into())));
            }
        }
        self.expand(&e)
    }
}

/// Drop tensor terms whose combined loop number or weight leaves the window.
pub fn truncate_tensor(h: &Hopf, t: &Tensor) -> Tensor {
    let mut out = Tensor::zero();
    for ((l, r), c) in &t.terms {
        let mut both: Mono = l.clone();
        both.extend_from_slice(r);
        if h.in_window(&both) {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
    }
    out
}

/// `a ⊗ b` restricted to the window.
fn outer_window(h: &Hopf, a: &Element, b: &Element) -> Tensor {
    let mut out = Tensor::zero();
    for (l, cl) in &a.terms {
        for (r, cr) in &b.terms {
            let mut both: Mono = l.clone();
            both.extend_from_slice(r);
            if h.in_window(&both) {
                out.add_term(l.clone(), r.clone(), cl * cr);
            }
        }
    }
    out
}

/// Compare two tensors slice by slice in combined loop number.
fn compare_by_loop(h: &Hopf, check: &mut Check, label: &str, lhs: &Tensor, rhs: &Tensor) {
    let split = |t: &Tensor| {
        let mut m: BTreeMap<u32, Tensor> = BTreeMap::new();
        for ((l, r), c) in &t.terms {
            m.entry(h.mono_loop(l) + h.mono_loop(r)).or_default().add_term(l.clone(), r.clone(), c.clone());
        }
        m
    };
    let (a, b) = (split(lhs), split(rhs));
    for l in 0..=h.lmax() {
        let x = a.get(&l).cloned().unwrap_or_default();
        let y = b.get(&l).cloned().unwrap_or_default();
        let s = match first_mismatch(h, &x, &y) {
            None => Status::Pass,
            Some(d) => Status::Fail(d),
        };
        check.push(format!("{label} l={l}"), s);
    }
}

/// `Δ(G^r) = G^r⊗1 + Σ_Γ ± G^r Π_v Y_v^{d_v(Γ)} ⊗ Γ/Sym`, with the right-hand
/// coefficient of each graph supplied by `coef`.
pub fn check_cop_green_with(gr: &Greens, r: Res, coef: &dyn Fn(GenId) -> Q) -> Check {
    let h = gr.h;
    let name = h.model.spec.res_name(r).to_string();
    let mut check = Check::new(format!("cop-green {name}"));
    let g = gr.green(r);
    let lhs = h.coproduct(&g);
    let mut rhs = Tensor::outer(&g, &Element::one());
    let sign = Greens::sign(r);
    let mut by_degree: BTreeMap<Vec<i32>, Element> = BTreeMap::new();
    for l in 1..=h.lmax() {
        for &id in h.generators(r, l).iter() {
            by_degree.entry(h.info(id).d.clone()).or_default().add_term(smallvec::smallvec![id], &sign * coef(id));
        }
    }
    for (d, right) in &by_degree {
        let left = h.mul(&g, &gr.y_product(d));
        rhs.add_scaled(&outer_window(h, &left, right), &Q::one());
    }
    compare_by_loop(h, &mut check, &name, &lhs, &truncate_tensor(h, &rhs));
    check
}

pub fn check_cop_green(gr: &Greens, r: Res) -> Check {
    check_cop_green_with(gr, r, &|id| green_coefficient(gr.h, id))
}

/// `Δ(x) = Σ_n x Π Y_{v_i}^{n_i} ⊗ p_n(x)` for `x` a product of powers of
/// Green's functions.
pub fn check_cop_power(gr: &Greens, label: &str, e: &CPhiExpr) -> Check {
    let h = gr.h;
    let mut check = Check::new(format!("cop-power {label}"));
    let x = gr.expand(e);
    let lhs = h.coproduct(&x);
    let mut rhs = Tensor::zero();
    for (n, part) in h.multidegree_parts(&x) {
        let left = h.mul(&x, &gr.y_product(&n));
        rhs.add_scaled(&outer_window(h, &left, &part), &Q::one());
    }
    compare_by_loop(h, &mut check, label, &lhs, &rhs);
    check
}

/// The coproduct formula for `Y_v^α`, `(G^r)^α` and `(C^φ)^α`.
pub fn check_cop_y(gr: &Greens, alphas: &[Q]) -> Check {
    let spec = &gr.h.model.spec;
    let mut check = Check::new("cop-y");
    for a in alphas {
        let a_s = fmt_q(a);
        for v in 0..spec.k() {
            check.extend(check_cop_power(gr, &format!("Y_{}^{a_s}", spec.vertices[v].name), &gr.y_expr(v).pow(a)));
        }
        for r in spec.residues() {
            let name = spec.res_name(r).to_string();
            check.extend(check_cop_power(gr, &format!("G^{name}^{a_s}"), &CPhiExpr::symbol(&name).pow(a)));
        }
        for f in spec.cphi.keys() {
            check.extend(check_cop_power(gr, &format!("C^{f}^{a_s}"), &gr.cphi_expr(f).pow(a)));
        }
    }
    check
}

/// A labelled generator of `J′`.
#[derive(Clone, Debug)]
pub struct IdealGenerator {
    pub label: String,
    pub element: Element,
}

/// Generators of `J′` inside the window: `q_l(Y_{v'}^{N(v)−2} − Y_v^{N(v')−2})`
/// for pairs of vertices of valence above 2, and, when the theory is
/// massless, the nonconstant multidegree components of `Y_v` for valence-2
/// `v`. Zero elements are dropped.
pub fn st_generators(gr: &Greens) -> Vec<IdealGenerator> {
    let h = gr.h;
    let m = &h.model;
    let names = |v: usize| m.spec.vertices[v].name.clone();
    let mut out = Vec::new();
    let big: Vec<usize> = (0..m.k()).filter(|&v| m.valence(v) > 2).collect();
    for (i, &v) in big.iter().enumerate() {
        for &w in &big[i + 1..] {
            let nv = Q::from_integer((m.valence(v) as i64 - 2).into());
            let nw = Q::from_integer((m.valence(w) as i64 - 2).into());
            let diff = gr.y(w, &nv).sub(&gr.y(v, &nw));
            for (l, part) in h.loop_parts(&diff) {
                out.push(IdealGenerator {
                    label: format!("q_{l}(Y_{}^{} - Y_{}^{})", names(w), fmt_q(&nv), names(v), fmt_q(&nw)),
                    element: part,
                });
            }
        }
    }
    if m.spec.massless {
        for v in m.val2() {
            for (n, part) in h.multidegree_parts(&gr.y(v, &Q::one())) {
                if n.iter().all(|&x| x == 0) {
                    continue;
                }
                let ns: Vec<String> = n.iter().map(|x| x.to_string()).collect();
                out.push(IdealGenerator { label: format!("p_({})(Y_{})", ns.join(","), names(v)), element: part });
            }
        }
    }
    out
}

/// The truncated ideal `J′`.
pub fn st_ideal<'h>(gr: &Greens<'h>) -> GradedIdeal<'h> {
    let gens = st_generators(gr).into_iter().map(|g| g.element).collect();
    GradedIdeal::new(gr.h, gens).expect("J′ generators are loop-homogeneous and inside the window")
}

fn membership_status(m: Membership, detail: impl FnOnce() -> String) -> Status {
    match m {
        Membership::Member => Status::Pass,
        Membership::NotMember => Status::Fail(detail()),
        Membership::Undecidable(w) => Status::Undecidable(w),
    }
}

/// `Δ(g) ∈ J′⊗H + H⊗J′` for every generator `g`, decided by reducing both
/// tensor factors to normal form modulo `J′`.
pub fn check_hopf_ideal_with(gr: &Greens, gens: &[IdealGenerator]) -> Check {
    let h = gr.h;
    let mut check = Check::new("hopf-ideal");
    check.note(format!("generators: {}", gens.len()));
    let ideal = match GradedIdeal::new(h, gens.iter().map(|g| g.element.clone()).collect()) {
        Ok(i) => i,
        Err(e) => {
            check.push("ideal", Status::Undecidable(e));
            return check;
        }
    };
    check.note(format!("slice dimensions: {:?}", ideal.slice_dims()));
    for g in gens {
        let t = h.coproduct(&g.element);
        let m = ideal.tensor_contains(&t);
        let s = membership_status(m, || {
            let r = ideal.tensor_normal_form(&t).unwrap_or_default();
            format!("residual {}", h.render_tensor(&r).chars().take(200).collect::<String>())
        });
        check.push(g.label.clone(), s);
    }
    check
}

pub fn check_hopf_ideal(gr: &Greens) -> Check {
    check_hopf_ideal_with(gr, &st_generators(gr))
}

/// `Δ(X) = Σ_l X^{2l+1} ⊗ q_l(X)` modulo `J′⊗H + H⊗J′`, slice by slice.
pub fn check_quotient_x(gr: &Greens) -> Check {
    let h = gr.h;
    let mut check = Check::new("quotient-x");
    let Some(v) = gr.x_vertex() else {
        check.push("X", Status::Undecidable("no vertex of valence above 2".into()));
        return check;
    };
    check.note(format!("X = Y_{}^(1/{})", h.model.spec.vertices[v].name, h.model.valence(v) - 2));
    let ideal = st_ideal(gr);
    let x = gr.x(v);
    let lhs = h.coproduct(&x);
    let mut rhs = Tensor::zero();
    for l in 0..=h.lmax() {
        let left = gr.expand(&gr.y_expr(v).pow(&Q::new((2 * l as i64 + 1).into(), (h.model.valence(v) as i64 - 2).into())));
        rhs.add_scaled(&outer_window(h, &left, &h.project_loop(&x, l)), &Q::one());
    }
    let diff = lhs.sub(&rhs);
    let mut slices: BTreeMap<u32, Tensor> = BTreeMap::new();
    for ((a, b), c) in &diff.terms {
        slices.entry(h.mono_loop(b)).or_default().add_term(a.clone(), b.clone(), c.clone());
    }
    for l in 0..=h.lmax() {
        let t = slices.remove(&l).unwrap_or_default();
        let s = membership_status(ideal.tensor_contains(&t), || {
            let r = ideal.tensor_normal_form(&t).unwrap_or_default();
            first_mismatch(h, &r, &Tensor::zero()).unwrap_or_default()
        });
        check.push(format!("(x) q_{l}(X)"), s);
    }
    // X_v = X_w in the quotient
    for w in 0..h.model.k() {
        if w == v || h.model.valence(w) <= 2 {
            continue;
        }
        let d = gr.x(w).sub(&x);
        for l in 1..=h.lmax() {
            let part = h.project_loop(&d, l);
            let s = membership_status(ideal.contains(&part), || h.render(&ideal.normal_form(&part).unwrap_or_default()));
            check.push(format!("q_{l}(X_{} - X_{})", h.model.spec.vertices[w].name, h.model.spec.vertices[v].name), s);
        }
    }
    check
}

/// An identity `lhs = rhs` between products of Green's-function powers.
#[derive(Clone, Debug)]
pub struct QuotientIdentity {
    pub label: String,
    pub lhs: CPhiExpr,
    pub rhs: CPhiExpr,
}

/// Check each identity in `H/J′`, one loop slice at a time.
pub fn check_quotient_identities(gr: &Greens, ids: &[QuotientIdentity]) -> Check {
    let h = gr.h;
    let mut check = Check::new("st");
    let ideal = st_ideal(gr);
    for id in ids {
        let d = gr.expand(&id.lhs).sub(&gr.expand(&id.rhs));
        for l in 0..=h.lmax() {
            let part = h.project_loop(&d, l);
            let s = membership_status(ideal.contains(&part), || h.render(&ideal.normal_form(&part).unwrap_or_default()));
            check.push(format!("{} l={l}", id.label), s);
        }
    }
    check
}

/// Slavnov–Taylor identities for a simple theory, written in Green's
/// functions: `Y_v = Y_x^{(N(v)−2)/(N(x)−2)}` for every vertex `v` of valence
/// above 2, and `G^v = G^w` whenever `v` and `w` carry the same wave-function
/// factor and valence.
pub fn st_identities(gr: &Greens) -> Vec<QuotientIdentity> {
    let spec = &gr.h.model.spec;
    let m = &gr.h.model;
    let Some(x) = gr.x_vertex() else { return Vec::new() };
    let nx = Q::from_integer((m.valence(x) as i64 - 2).into());
    let big: Vec<usize> = (0..m.k()).filter(|&v| m.valence(v) > 2).collect();
    let mut out = Vec::new();
    for &v in &big {
        if v == x {
            continue;
        }
        let ratio = Q::from_integer((m.valence(v) as i64 - 2).into()) / &nx;
        let (lhs, rhs) = (gr.y_expr(v), gr.y_expr(x).pow(&ratio));
        out.push(QuotientIdentity { label: format!("{} = {}", lhs.render(), rhs.render()), lhs, rhs });
    }
    let wave = |v: usize| CPhiExpr::symbol(&spec.vertices[v].name).mul(&gr.y_expr(v).pow(&-Q::one()));
    for (i, &v) in big.iter().enumerate() {
        for &w in &big[i + 1..] {
            if m.valence(v) == m.valence(w) && wave(v) == wave(w) {
                let (lhs, rhs) = (CPhiExpr::symbol(&spec.vertices[v].name), CPhiExpr::symbol(&spec.vertices[w].name));
                out.push(QuotientIdentity { label: format!("{} = {}", lhs.render(), rhs.render()), lhs, rhs });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Model;
    use crate::theory::TheorySpec;
    use crate::{q, qi};

    fn ym(l: u32) -> Hopf {
        Hopf::new(Model::with_window(TheorySpec::yang_mills(), l, l))
    }

    fn qed(l: u32, w: u32) -> Hopf {
        Hopf::new(Model::with_window(TheorySpec::qed(), l, w))
    }

    #[test]
    fn one_loop_green_functions() {
        let h = qed(1, 1);
        let gr = Greens::new(&h);
        let spec = &h.model.spec;
        let photon = gr.green_slice(spec.residue_by_name("photon").unwrap(), 1);
        // 1 − (fermion loop)/1
        assert_eq!(photon.len(), 1);
        assert_eq!(photon.terms.values().next().unwrap(), &qi(-1));
        let vertex = gr.green_slice(spec.residue_by_name("psibarApsi").unwrap(), 1);
        assert_eq!(vertex.len(), 1);
        assert_eq!(vertex.terms.values().next().unwrap(), &qi(1));
        for r in spec.residues() {
            assert_eq!(gr.green_slice(r, 0), Element::one());
        }
    }

    #[test]
    fn ym_one_loop_gluon_weights() {
        let h = ym(1);
        let gr = Greens::new(&h);
        let glu = gr.green_slice(h.model.spec.residue_by_name("glu").unwrap(), 1);
        let mut cs: Vec<Q> = glu.terms.values().cloned().collect();
        cs.sort();
        // ghost loop −1, gluon bubble and quartic tadpole −1/2
        assert_eq!(cs, vec![qi(-1), q(-1, 2), q(-1, 2)]);
    }

    #[test]
    fn powers_invert() {
        let h = ym(2);
        let gr = Greens::new(&h);
        for r in h.model.spec.residues() {
            for a in [qi(1), q(1, 2), qi(2)] {
                let p = h.mul(&gr.green_pow(r, &a), &gr.green_pow(r, &-a.clone()));
                assert_eq!(p, Element::one());
            }
        }
        // (C^A)² = G^glu
        let ca = gr.cphi("A", &qi(1));
        let glu = h.model.spec.residue_by_name("glu").unwrap();
        assert_eq!(h.mul(&ca, &ca), *gr.green(glu));
        // C^{K_φ} C^φ = 1
        for f in ["A", "omega", "omegabar", "h"] {
            let k = gr.cphi(&format!("K_{f}"), &qi(1));
            assert_eq!(h.mul(&k, &gr.cphi(f, &qi(1))), Element::one());
        }
    }

    #[test]
    fn cop_green_and_corruption() {
        let h = qed(2, 2);
        let gr = Greens::new(&h);
        let photon = h.model.spec.residue_by_name("photon").unwrap();
        assert!(check_cop_green(&gr, photon).passed());
        let bad = check_cop_green_with(&gr, photon, &|id| {
            let c = green_coefficient(&h, id);
            if h.info(id).loop_number == 2 {
                c * qi(2)
            } else {
                c
            }
        });
        assert!(!bad.passed());
    }

    #[test]
    fn y_starts_at_one_and_ideal_generators_vanish_under_counit() {
        let h = ym(2);
        let gr = Greens::new(&h);
        for v in 0..h.model.k() {
            assert_eq!(h.project_multidegree(&gr.y(v, &qi(1)), &vec![0; h.model.k()]), Element::one());
        }
        let gens = st_generators(&gr);
        // 10 pairs, loops 1 and 2
        assert_eq!(gens.len(), 20);
        for g in &gens {
            assert!(g.element.counit().is_zero());
        }
        let ideal = st_ideal(&gr);
        for g in &gens {
            assert_eq!(ideal.contains(&g.element), Membership::Member);
        }
    }
}
