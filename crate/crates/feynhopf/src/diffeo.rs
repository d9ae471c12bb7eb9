//! Truncated formal power series, formal diffeomorphisms tangent to the
//! identity, the Faà di Bruno coordinates, the wave-function/diffeomorphism
//! semidirect product, and the coaction of graphs on couplings and fields.
//!
//! Conventions:
//! - `(f∘g)(x) = f(g(x))`.
//! - A diffeomorphism component is `f_i(x) = x_i Σ_n a^{(i)}_n x^n`, so the
//!   coordinate `a^{(i)}_n` is the coefficient of `x^{n+e_i}`.
//! - The Faà di Bruno coproduct pairs as `⟨Δa, f⊗g⟩ = a(g∘f)`.
//! - Graph characters map to diffeomorphisms contravariantly:
//!   `f_{χ⋆ψ} = f_ψ ∘ f_χ`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::green::{st_ideal, Greens};
use crate::hopf::{mono_mul, Element, GenId, GradedIdeal, Hopf, Membership, Mono, Tensor};
use crate::poly::{grlex_key, render_mono, Exps, MPoly, Ring};
use crate::rational::fmt_q;
use crate::report::{Check, Status};
use crate::Q;

/// Multivariate series truncated by weighted total degree.
///
/// Each variable carries a positive integer weight (all 1 by default);
/// monomials whose weighted degree exceeds `order` are dropped. A weight of
/// 0 is allowed for bookkeeping variables that only ever appear
/// polynomially, such as field symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<R: Ring> {
    pub weights: Vec<u32>,
    pub order: u32,
    pub terms: BTreeMap<Exps, R>,
    /// Unit of the coefficient ring; fixes its shape for `zero_like`.
    pub one: R,
}

impl<R: Ring> Series<R> {
    pub fn zero(weights: Vec<u32>, order: u32, one: R) -> Self {
        Series { weights, order, terms: BTreeMap::new(), one }
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn wdeg(&self, e: &[u32]) -> u32 {
        e.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    fn like(&self) -> Self {
        Series::zero(self.weights.clone(), self.order, self.one.clone())
    }

    pub fn constant(&self, c: R) -> Self {
        let mut s = self.like();
        s.add_term(vec![0; self.k()], c);
        s
    }

    pub fn var(&self, i: usize) -> Self {
        let mut e = vec![0; self.k()];
        e[i] = 1;
        let mut s = self.like();
        s.add_term(e, self.one.clone());
        s
    }

    /// Adds `c·x^e`, dropping it if it is beyond the truncation.
    pub fn add_term(&mut self, e: Exps, c: R) {
        if c.is_zero_r() || self.wdeg(&e) > self.order {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.add_r(&c);
                if v.is_zero_r() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn coeff(&self, e: &[u32]) -> R {
        self.terms.get(e).cloned().unwrap_or_else(|| self.one.zero_like())
    }

    pub fn constant_term(&self) -> R {
        self.coeff(&vec![0; self.k()])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        let mut r = self.like();
        r.terms = self.terms.iter().map(|(e, c)| (e.clone(), c.neg_r())).collect();
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut r = self.like();
        for (e, v) in &self.terms {
            r.add_term(e.clone(), v.mul_r(c));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = self.like();
        for (e1, c1) in &self.terms {
            let d1 = self.wdeg(e1);
            for (e2, c2) in &o.terms {
                if d1 + self.wdeg(e2) > self.order {
                    continue;
                }
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1.mul_r(c2));
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = self.constant(self.one.clone());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Substitute `subs[i]` for `x_i`. The result lives in the variables of
    /// the substituted series. Exact up to the target order when every
    /// substituted series has weighted valuation at least the weight of the
    /// variable it replaces.
    pub fn compose(&self, subs: &[Series<R>]) -> Series<R> {
        assert_eq!(subs.len(), self.k(), "one substitution per variable");
        let target = subs.first().map(|s| s.like()).expect("at least one variable");
        let mut powers: Vec<Vec<Series<R>>> = subs.iter().map(|s| vec![s.constant(s.one.clone())]).collect();
        let mut out = target.clone();
        for (e, c) in &self.terms {
            let mut t = target.constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&subs[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Drop terms above a lower order.
    pub fn truncate(&self, order: u32) -> Self {
        let mut r = Series::zero(self.weights.clone(), order, self.one.clone());
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    /// Terms in graded-lex order.
    pub fn sorted_terms(&self) -> Vec<(&Exps, &R)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_key(a.0).cmp(&grlex_key(b.0)));
        v
    }
}

impl Series<Q> {
    pub fn new(weights: Vec<u32>, order: u32) -> Self {
        Series::zero(weights, order, Q::one())
    }

    /// Unit-weight series in `k` variables.
    pub fn unit_weights(k: usize, order: u32) -> Self {
        Series::new(vec![1; k], order)
    }

    /// Multiplicative inverse; the constant term must be nonzero and every
    /// weight positive.
    pub fn inverse(&self) -> Option<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() || self.weights.contains(&0) {
            return None;
        }
        let inv0 = Q::one() / &c0;
        // 1/s = c0⁻¹ Σ_j (1 − s/c0)^j; the bracket has no constant term.
        let u = self.constant(Q::one()).sub(&self.scale(&inv0));
        let mut out = self.constant(Q::one());
        let mut p = self.constant(Q::one());
        for _ in 0..self.order {
            p = p.mul(&u);
            if p.is_zero() {
                break;
            }
            out = out.add(&p);
        }
        Some(out.scale(&inv0))
    }

    /// Partial derivative in `x_i`.
    pub fn diff(&self, i: usize) -> Self {
        let mut r = self.like();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                r.add_term(e2, c * Q::from_integer(e[i].into()));
            }
        }
        r
    }

    /// One `monomial: coefficient` line per term, graded-lex order.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (e, c) in self.sorted_terms() {
            let m = render_mono(e, names);
            writeln!(out, "{}: {}", if m.is_empty() { "1" } else { &m }, fmt_q(c)).unwrap();
        }
        out
    }

    /// Parse the output of [`Series::render`].
    pub fn parse(text: &str, names: &[String], weights: Vec<u32>, order: u32) -> Result<Self, String> {
        let mut s = Series::new(weights, order);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (m, c) = line.split_once(':').ok_or_else(|| format!("missing ':' in {line:?}"))?;
            let c = crate::rational::parse_q(c.trim()).ok_or_else(|| format!("bad coefficient in {line:?}"))?;
            let mut e = vec![0u32; names.len()];
            let m = m.trim();
            if m != "1" {
                for f in m.split('*') {
                    let (v, p) = match f.split_once('^') {
                        Some((v, p)) => (v, p.parse::<u32>().map_err(|_| format!("bad exponent in {line:?}"))?),
                        None => (f, 1),
                    };
                    let i = names.iter().position(|n| n == v).ok_or_else(|| format!("unknown variable {v:?}"))?;
                    e[i] += p;
                }
            }
            s.add_term(e, c);
        }
        Ok(s)
    }
}

pub fn default_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

fn unit_exps(k: usize, i: usize) -> Exps {
    let mut e = vec![0; k];
    e[i] = 1;
    e
}

/// A diffeomorphism of `(ℂ^k, 0)` stored by its component series.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalDiffeo {
    pub comps: Vec<Series<Q>>,
}

impl FormalDiffeo {
    /// Identity with unit weights; `order` bounds the degree of the component
    /// series, so coordinates `a^{(i)}_n` with `|n| < order` are kept.
    pub fn identity(k: usize, order: u32) -> Self {
        Self::identity_weighted(vec![1; k], order)
    }

    pub fn identity_weighted(weights: Vec<u32>, order: u32) -> Self {
        let proto = Series::new(weights, order);
        FormalDiffeo { comps: (0..proto.k()).map(|i| proto.var(i)).collect() }
    }

    pub fn k(&self) -> usize {
        self.comps.len()
    }

    pub fn order(&self) -> u32 {
        self.comps[0].order
    }

    /// `a^{(i)}_n`: the coefficient of `x^{n+e_i}` in `f_i`.
    pub fn coord(&self, i: usize, n: &[u32]) -> Q {
        let mut e = n.to_vec();
        e[i] += 1;
        self.comps[i].coeff(&e)
    }

    /// Set `a^{(i)}_n`.
    pub fn set_coord(&mut self, i: usize, n: &[u32], c: Q) {
        let mut e = n.to_vec();
        e[i] += 1;
        let old = self.comps[i].coeff(&e);
        self.comps[i].add_term(e, c - old);
    }

    /// Every `f_i` has linear part `x_i`.
    pub fn is_tangent_to_identity(&self) -> bool {
        let k = self.k();
        self.comps.iter().enumerate().all(|(i, f)| {
            f.constant_term().is_zero()
                && (0..k).all(|j| f.coeff(&unit_exps(k, j)) == if i == j { Q::one() } else { Q::zero() })
        })
    }

    /// `(self∘g)(x) = self(g(x))`.
    pub fn compose(&self, g: &FormalDiffeo) -> FormalDiffeo {
        FormalDiffeo { comps: self.comps.iter().map(|f| f.compose(&g.comps)).collect() }
    }

    /// Apply to a series in the same variables: `s(f(x))`.
    pub fn act(&self, s: &Series<Q>) -> Series<Q> {
        s.compose(&self.comps)
    }

    /// Compositional inverse by fixed-point iteration
    /// `g ← g − (f(g) − x)`; each round fixes one more weighted degree.
    pub fn invert(&self) -> FormalDiffeo {
        let id = FormalDiffeo { comps: (0..self.k()).map(|i| self.comps[i].var(i)).collect() };
        let mut g = id.clone();
        for _ in 0..=self.order() {
            let fg = self.compose(&g);
            let next = FormalDiffeo {
                comps: g.comps.iter().zip(fg.comps.iter().zip(&id.comps)).map(|(gi, (fi, xi))| gi.sub(&fi.sub(xi))).collect(),
            };
            if next == g {
                break;
            }
            g = next;
        }
        g
    }

    /// Component-wise rendering with `[f_i]` headers.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, f) in self.comps.iter().enumerate() {
            writeln!(out, "[f_{}]", names[i]).unwrap();
            out.push_str(&f.render(names));
        }
        out
    }
}

/// One-variable inverse by Lagrange inversion:
/// `[x^n] f⁻¹ = (1/n) [w^{n−1}] (w/f(w))^n`.
pub fn lagrange_invert_1d(f: &FormalDiffeo) -> FormalDiffeo {
    assert_eq!(f.k(), 1, "Lagrange inversion is one-dimensional here");
    let order = f.order();
    let s = &f.comps[0];
    // f(w)/w
    let mut h = Series::unit_weights(1, order);
    for (e, c) in &s.terms {
        assert!(e[0] >= 1, "no constant term");
        h.add_term(vec![e[0] - 1], c.clone());
    }
    let hinv = h.inverse().expect("f'(0) ≠ 0");
    let mut out = Series::unit_weights(1, order);
    let mut p = hinv.constant(Q::one());
    for n in 1..=order {
        p = p.mul(&hinv);
        out.add_term(vec![n], p.coeff(&[n - 1]) / Q::from_integer(n.into()));
    }
    FormalDiffeo { comps: vec![out] }
}

/// One-variable inverse by Newton's iteration
/// `g ← g − (f(g) − x)/f′(g)`, doubling the correct order each round.
pub fn newton_invert_1d(f: &FormalDiffeo) -> FormalDiffeo {
    assert_eq!(f.k(), 1);
    let s = &f.comps[0];
    let x = s.var(0);
    let ds = s.diff(0);
    let mut g = x.clone();
    let mut correct = 1;
    while correct < s.order {
        let fg = s.compose(std::slice::from_ref(&g));
        let dfg = ds.compose(std::slice::from_ref(&g));
        let step = fg.sub(&x).mul(&dfg.inverse().expect("f'(0) ≠ 0"));
        g = g.sub(&step);
        correct *= 2;
    }
    FormalDiffeo { comps: vec![g] }
}

/// Random diffeomorphism tangent to the identity with small rational
/// coefficients.
pub fn random_diffeo(rng: &mut impl Rng, k: usize, order: u32) -> FormalDiffeo {
    let mut f = FormalDiffeo::identity(k, order);
    for i in 0..k {
        for n in multi_indices(k, order.saturating_sub(1)) {
            if n.iter().sum::<u32>() == 0 {
                continue;
            }
            f.set_coord(i, &n, random_q(rng));
        }
    }
    f
}

/// Random invertible series (nonzero constant term).
pub fn random_unit_series(rng: &mut impl Rng, k: usize, order: u32) -> Series<Q> {
    let mut s = Series::unit_weights(k, order);
    for n in multi_indices(k, order) {
        let c = if n.iter().all(|&x| x == 0) {
            Q::from_integer(rng.gen_range(1..=3i64).into()) * if rng.gen_bool(0.5) { Q::one() } else { -Q::one() }
        } else {
            random_q(rng)
        };
        s.add_term(n, c);
    }
    s
}

fn random_q(rng: &mut impl Rng) -> Q {
    Q::new(rng.gen_range(-3i64..=3).into(), rng.gen_range(1i64..=2).into())
}

/// All multi-indices in `k` variables of total degree at most `d`, graded
/// lexicographically.
pub fn multi_indices(k: usize, d: u32) -> Vec<Exps> {
    fn rec(k: usize, left: u32, cur: &mut Exps, out: &mut Vec<Exps>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(k, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, d, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| grlex_key(a).cmp(&grlex_key(b)));
    out
}

/// Coordinates `a^{(i)}_n`, `1 ≤ |n| ≤ d`, of the Faà di Bruno Hopf algebra
/// in `k` variables, numbered as polynomial variables.
pub struct FdbCoords {
    pub k: usize,
    pub d: u32,
    pub vars: Vec<(usize, Exps)>,
    index: HashMap<(usize, Exps), usize>,
}

/// `Δ(a^{(i)}_n) = Σ_m left_m ⊗ a^{(i)}_m`, keyed by `m` (`m = 0` is the unit).
pub type FdbTensor = BTreeMap<Exps, MPoly>;

impl FdbCoords {
    pub fn new(k: usize, d: u32) -> Self {
        let mut vars = Vec::new();
        for i in 0..k {
            for n in multi_indices(k, d) {
                if n.iter().sum::<u32>() > 0 {
                    vars.push((i, n));
                }
            }
        }
        let index = vars.iter().enumerate().map(|(j, v)| (v.clone(), j)).collect();
        FdbCoords { k, d, vars, index }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// `a^{(i)}_n` as a polynomial (1 for `n = 0`).
    pub fn coord(&self, i: usize, n: &[u32]) -> MPoly {
        if n.iter().all(|&x| x == 0) {
            return MPoly::one(self.nvars());
        }
        MPoly::var(self.nvars(), self.index[&(i, n.to_vec())])
    }

    /// Generating series `A_i(x) = x_i Σ_n a^{(i)}_n x^n` with polynomial
    /// coefficients, truncated at degree `d + 1`.
    pub fn generating(&self, i: usize) -> Series<MPoly> {
        let mut s = Series::zero(vec![1; self.k], self.d + 1, MPoly::one(self.nvars()));
        for n in multi_indices(self.k, self.d) {
            let mut e = n.clone();
            e[i] += 1;
            s.add_term(e, self.coord(i, &n));
        }
        s
    }

    /// Coproduct of `a^{(i)}_n` from
    /// `Δ A_i(x) = Σ_m A_i(x) Π_j A_j(x)^{m_j} ⊗ a^{(i)}_m`.
    pub fn coproduct(&self, i: usize, n: &[u32]) -> FdbTensor {
        let s: u32 = n.iter().sum();
        assert!(s <= self.d);
        let gens: Vec<Series<MPoly>> = (0..self.k).map(|j| self.generating(j).truncate(s + 1)).collect();
        let mut target = n.to_vec();
        target[i] += 1;
        let mut out = FdbTensor::new();
        for m in multi_indices(self.k, s) {
            let mut p = gens[i].clone();
            for (j, &mj) in m.iter().enumerate() {
                p = p.mul(&gens[j].pow(mj));
            }
            let c = p.coeff(&target);
            if !c.is_zero() {
                out.insert(m, c);
            }
        }
        out
    }

    /// Values of all coordinates on a diffeomorphism.
    pub fn point(&self, f: &FormalDiffeo) -> Vec<Q> {
        self.vars.iter().map(|(i, n)| f.coord(*i, n)).collect()
    }

    /// `⟨Δa^{(i)}_n, f⊗g⟩`.
    pub fn pair(&self, t: &FdbTensor, i: usize, f: &FormalDiffeo, g: &FormalDiffeo) -> Q {
        let pf = self.point(f);
        t.iter().map(|(m, left)| left.eval(&pf) * g.coord(i, m)).sum()
    }

    /// Render a coproduct as `left (x) a^(i)_m` terms.
    pub fn render_tensor(&self, t: &FdbTensor, i: usize) -> String {
        let names: Vec<String> = self.vars.iter().map(|(j, n)| coord_name(*j, n)).collect();
        let parts: Vec<String> = t
            .iter()
            .map(|(m, left)| {
                let r = if m.iter().all(|&x| x == 0) { "1".to_string() } else { coord_name(i, m) };
                format!("({}) (x) {}", left.render(&names), r)
            })
            .collect();
        parts.join(" + ")
    }
}

fn coord_name(i: usize, n: &[u32]) -> String {
    let ns: Vec<String> = n.iter().map(|x| x.to_string()).collect();
    format!("a{}_{}", i + 1, ns.join("_"))
}

/// Faà di Bruno checks: the pairing against composition on random
/// one-variable pairs and on two-variable pairs, and three routes to the
/// one-variable inverse.
pub fn check_fdb(seed: u64, pairs: usize, d1: u32, d2: u32) -> Check {
    let mut check = Check::new("fdb");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check.note(format!("seed {seed}; {pairs} random pairs, k=1 to n<={d1}, k=2 to |n|<={d2}"));
    for (k, d) in [(1usize, d1), (2, d2)] {
        let coords = FdbCoords::new(k, d);
        let cops: Vec<(usize, Exps, FdbTensor)> =
            coords.vars.iter().map(|(i, n)| (*i, n.clone(), coords.coproduct(*i, n))).collect();
        let n_pairs = if k == 1 { pairs } else { pairs.min(10) };
        let mut bad = None;
        for trial in 0..n_pairs {
            let f = random_diffeo(&mut rng, k, d + 1);
            let g = random_diffeo(&mut rng, k, d + 1);
            let gf = g.compose(&f);
            for (i, n, t) in &cops {
                let lhs = coords.pair(t, *i, &f, &g);
                let rhs = gf.coord(*i, n);
                if lhs != rhs && bad.is_none() {
                    bad = Some(format!("pair {trial}, {}: <D a, f(x)g> = {} but a(g.f) = {}", coord_name(*i, n), fmt_q(&lhs), fmt_q(&rhs)));
                }
            }
        }
        let label = format!("k={k} pairing <Da, f(x)g> = a(g.f), |n|<={d}");
        match bad {
            None => check.push(label, Status::Pass),
            Some(b) => check.push(label, Status::Fail(b)),
        }
        // counit and primitive low coordinates
        let t = coords.coproduct(0, &unit_exps(k, 0));
        let one = vec![0; k];
        let ok = t.len() == 2 && t.get(&one) == Some(&coords.coord(0, &unit_exps(k, 0))) && t.get(&unit_exps(k, 0)) == Some(&MPoly::one(coords.nvars()));
        check.push(format!("k={k} D(a_e1) = a_e1 (x) 1 + 1 (x) a_e1"), Status::from_bool(ok, || coords.render_tensor(&t, 0)));
    }
    let mut bad = None;
    for trial in 0..pairs.min(20) {
        let f = random_diffeo(&mut rng, 1, d1 + 1);
        let lg = lagrange_invert_1d(&f);
        let ng = newton_invert_1d(&f);
        let fp = f.invert();
        if (lg != ng || lg != fp || f.compose(&lg) != FormalDiffeo::identity(1, d1 + 1)) && bad.is_none() {
            bad = Some(format!("trial {trial}: Lagrange {} vs Newton {}", lg.comps[0].render(&default_names(1)).replace('\n', "; "), ng.comps[0].render(&default_names(1)).replace('\n', "; ")));
        }
    }
    check.push(format!("k=1 inverse: Lagrange = Newton = fixed point, order {}", d1 + 1), bad.map_or(Status::Pass, Status::Fail));
    check
}

/// Image of a graph character: `f_i = Σ_m χ(p_{m−e_i}(Y_{v_i})) x^m`.
///
/// The variable weights are `N(v) − 2`, so a monomial `x^m` of `f_i` of
/// weighted degree `w` carries loop number `(w − N(v_i) + 2)/2`. The
/// truncation is the largest order whose coefficients all lie in the
/// window. Theories with valence-2 vertices have no such finite truncation
/// and are rejected.
pub fn character_to_diffeo(gr: &Greens, chi: &dyn Fn(GenId) -> Q) -> Result<FormalDiffeo, String> {
    let h = gr.h;
    let m = &h.model;
    let k = m.k();
    if !m.val2().is_empty() {
        return Err("valence-2 vertices leave the loop number unbounded at fixed degree".into());
    }
    let weights: Vec<u32> = (0..k).map(|v| m.valence(v) as u32 - 2).collect();
    let wmin = *weights.iter().min().unwrap();
    let lmax = h.lmax().min(h.wmax());
    let order = 2 * lmax + wmin;
    let mut f = FormalDiffeo::identity_weighted(weights.clone(), order);
    for i in 0..k {
        let mut fi = Series::new(weights.clone(), order);
        for (n, part) in h.multidegree_parts(&gr.y(i, &Q::one())) {
            let mut e = Vec::with_capacity(k);
            for (j, &x) in n.iter().enumerate() {
                let x = x + i32::from(j == i);
                if x < 0 {
                    return Err(format!("multidegree {n:?} of Y_{i} below the expected range"));
                }
                e.push(x as u32);
            }
            fi.add_term(e, h.eval(chi, &part, &Q::one()));
        }
        f.comps[i] = fi;
    }
    Ok(f)
}

/// `λ`-monomial exponent paired with a graph monomial.
pub type CoKey = (Exps, Mono);

/// Element of `A ⊗ H` where the `A` side is a monomial in the couplings
/// (times an implicit field symbol for field coactions).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoTensor {
    pub terms: BTreeMap<CoKey, Q>,
}

impl CoTensor {
    pub fn unit(k: usize) -> Self {
        let mut t = CoTensor::default();
        t.terms.insert((vec![0; k], Mono::new()), Q::one());
        t
    }

    pub fn add_term(&mut self, e: Exps, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = (e, m);
        let v = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Product in `A ⊗ H`, truncated to the window on the graph side.
    pub fn mul(&self, o: &CoTensor, h: &Hopf) -> CoTensor {
        let mut r = CoTensor::default();
        for ((e1, m1), c1) in &self.terms {
            for ((e2, m2), c2) in &o.terms {
                let m = mono_mul(m1, m2);
                if !h.in_window(&m) {
                    continue;
                }
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, m, c1 * c2);
            }
        }
        r
    }

    /// The graph-side element attached to one coupling monomial.
    pub fn graph_part(&self, e: &[u32]) -> Element {
        let mut x = Element::zero();
        for ((e2, m), c) in &self.terms {
            if e2.as_slice() == e {
                x.add_term(m.clone(), c.clone());
            }
        }
        x
    }
}

/// Attach `λ^{shift + n}` to every multidegree-`n` component of `x`.
fn graded(h: &Hopf, x: &Element, shift: &[u32]) -> CoTensor {
    let mut t = CoTensor::default();
    for (n, part) in h.multidegree_parts(x) {
        let e: Exps = n
            .iter()
            .zip(shift)
            .map(|(&a, &s)| u32::try_from(a + s as i32).expect("coupling exponent stays nonnegative"))
            .collect();
        for (m, c) in part.terms {
            t.add_term(e.clone(), m, c);
        }
    }
    t
}

/// `ρ(λ_v) = Σ_n λ_v λ^n ⊗ p_n(Y_v)`.
pub fn coaction_coupling(gr: &Greens, v: usize) -> CoTensor {
    let k = gr.h.model.k();
    graded(gr.h, &gr.y(v, &Q::one()), &unit_exps(k, v))
}

/// `ρ(φ) = Σ_n φ λ^n ⊗ p_n(C^φ)`, the field symbol left implicit.
pub fn coaction_field(gr: &Greens, field: &str) -> CoTensor {
    graded(gr.h, &gr.cphi(field, &Q::one()), &vec![0; gr.h.model.k()])
}

/// Coaction of the whole cast of generators of `A`, cached by coupling
/// monomial.
struct Coaction<'a, 'h> {
    gr: &'a Greens<'h>,
    lambdas: Vec<CoTensor>,
    pows: HashMap<Exps, CoTensor>,
}

impl<'a, 'h> Coaction<'a, 'h> {
    fn new(gr: &'a Greens<'h>) -> Self {
        let lambdas = (0..gr.h.model.k()).map(|v| coaction_coupling(gr, v)).collect();
        Coaction { gr, lambdas, pows: HashMap::new() }
    }

    /// `ρ(λ^e)`.
    fn monomial(&mut self, e: &Exps) -> CoTensor {
        if let Some(t) = self.pows.get(e) {
            return t.clone();
        }
        let h = self.gr.h;
        let mut t = CoTensor::unit(e.len());
        for (j, &a) in e.iter().enumerate() {
            for _ in 0..a {
                t = t.mul(&self.lambdas[j], h);
            }
        }
        self.pows.insert(e.clone(), t.clone());
        t
    }

    /// `(ρ⊗1)(x)` for `x = prefix · Σ λ^e ⊗ m`; `prefix` is the coaction of
    /// the implicit field symbol, if any.
    fn apply_left(&mut self, x: &CoTensor, prefix: Option<&CoTensor>) -> BTreeMap<(Exps, Mono, Mono), Q> {
        let h = self.gr.h;
        let mut out = BTreeMap::new();
        for ((e, m), c) in &x.terms {
            let mut left = self.monomial(e);
            if let Some(p) = prefix {
                left = left.mul(p, h);
            }
            for ((e2, m2), c2) in &left.terms {
                if !h.in_window(&mono_mul(m2, m)) {
                    continue;
                }
                add3(&mut out, (e2.clone(), m2.clone(), m.clone()), c * c2);
            }
        }
        out
    }
}

fn add3(t: &mut BTreeMap<(Exps, Mono, Mono), Q>, key: (Exps, Mono, Mono), c: Q) {
    if c.is_zero() {
        return;
    }
    let v = t.entry(key.clone()).or_insert_with(Q::zero);
    *v += c;
    if v.is_zero() {
        t.remove(&key);
    }
}

/// `(1⊗Δ)(x)`.
fn apply_right(h: &Hopf, x: &CoTensor) -> BTreeMap<(Exps, Mono, Mono), Q> {
    let mut out = BTreeMap::new();
    for ((e, m), c) in &x.terms {
        for ((a, b), c2) in &h.coproduct_mono(m).terms {
            add3(&mut out, (e.clone(), a.clone(), b.clone()), c * c2);
        }
    }
    out
}

fn compare3(h: &Hopf, check: &mut Check, label: &str, a: &BTreeMap<(Exps, Mono, Mono), Q>, b: &BTreeMap<(Exps, Mono, Mono), Q>) {
    for l in 0..=h.lmax() {
        let slice = |t: &BTreeMap<(Exps, Mono, Mono), Q>| -> BTreeMap<(Exps, Mono, Mono), Q> {
            t.iter().filter(|((_, x, y), _)| h.mono_loop(x) + h.mono_loop(y) == l).map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        let (sa, sb) = (slice(a), slice(b));
        let status = if sa == sb {
            Status::Pass
        } else {
            let key = sa.keys().chain(sb.keys()).find(|k| sa.get(*k) != sb.get(*k)).unwrap();
            let z = Q::zero();
            Status::Fail(format!(
                "lambda^{:?} * {} (x) {}: {} vs {}",
                key.0,
                h.render_mono(&key.1),
                h.render_mono(&key.2),
                fmt_q(sa.get(key).unwrap_or(&z)),
                fmt_q(sb.get(key).unwrap_or(&z))
            ))
        };
        check.push(format!("{label} loop {l}"), status);
    }
}

/// Comodule axiom `(ρ⊗1)ρ = (1⊗Δ)ρ` on every coupling and field, and the
/// interaction monomials `ρ(λ_v ι(v))` reproducing `G^v`.
pub fn check_comodule(gr: &Greens) -> Check {
    let h = gr.h;
    let spec = &h.model.spec;
    let k = h.model.k();
    let mut check = Check::new("comodule");
    let mut co = Coaction::new(gr);
    for v in 0..k {
        let rho = coaction_coupling(gr, v);
        let lhs = co.apply_left(&rho, None);
        let rhs = apply_right(h, &rho);
        compare3(h, &mut check, &format!("rho(lambda_{})", spec.vertices[v].name), &lhs, &rhs);
    }
    for f in &spec.fields {
        let rho = coaction_field(gr, &f.name);
        let lhs = co.apply_left(&rho, Some(&rho));
        let rhs = apply_right(h, &rho);
        compare3(h, &mut check, &format!("rho({})", f.name), &lhs, &rhs);
    }
    for v in 0..k {
        let mut t = coaction_coupling(gr, v);
        for leg in &spec.vertices[v].legs {
            t = t.mul(&coaction_field(gr, leg), h);
        }
        let expect = graded(h, &gr.green(crate::theory::Res::V(v)), &unit_exps(k, v));
        let ok = t == expect;
        check.push(
            format!("rho(lambda_{0} iota({0})) = sum lambda^n (x) p_n(G^{0})", spec.vertices[v].name),
            Status::from_bool(ok, || "graph parts differ".into()),
        );
    }
    check
}

/// Projection `q_l` onto loop `l` with zero degree in every valence-2
/// coupling.
fn q_l(h: &Hopf, x: &Element, l: u32) -> Element {
    let val2 = h.model.val2();
    x.filter(|m| h.mono_loop(m) == l && val2.iter().all(|&v| h.mono_degree(m)[v] == 0))
}

/// The single-coupling coaction `g ↦ Σ_l g^{2l+1} ⊗ q_l(X)`,
/// `φ ↦ Σ_l g^{2l} φ ⊗ q_l(C^φ)`, as one-variable [`CoTensor`]s.
pub fn simple_coaction(gr: &Greens) -> Result<(CoTensor, BTreeMap<String, CoTensor>), String> {
    let h = gr.h;
    let v = gr.x_vertex().ok_or("no vertex of valence above 2")?;
    let x = gr.x(v);
    let mut g = CoTensor::default();
    for l in 0..=h.lmax() {
        for (m, c) in q_l(h, &x, l).terms {
            g.add_term(vec![2 * l + 1], m, c);
        }
    }
    let mut fields = BTreeMap::new();
    for f in &h.model.spec.fields {
        let cp = gr.cphi(&f.name, &Q::one());
        let mut t = CoTensor::default();
        for l in 0..=h.lmax() {
            for (m, c) in q_l(h, &cp, l).terms {
                t.add_term(vec![2 * l], m, c);
            }
        }
        fields.insert(f.name.clone(), t);
    }
    Ok((g, fields))
}

/// Comodule axiom for the single-coupling coaction, modulo `J′` in both
/// graph factors.
pub fn check_simple_coaction(gr: &Greens) -> Check {
    let h = gr.h;
    let mut check = Check::new("simple-coaction");
    if !h.model.val2().is_empty() && !h.model.spec.massless {
        check.push("theory", Status::Undecidable("massive theory is not simple".into()));
        return check;
    }
    let (g, fields) = match simple_coaction(gr) {
        Ok(x) => x,
        Err(e) => {
            check.push("X", Status::Undecidable(e));
            return check;
        }
    };
    let ideal = st_ideal(gr);
    let mut gpows: Vec<CoTensor> = vec![CoTensor::unit(1)];
    let power = |gpows: &mut Vec<CoTensor>, n: usize| -> CoTensor {
        while gpows.len() <= n {
            let next = gpows.last().unwrap().mul(&g, h);
            gpows.push(next);
        }
        gpows[n].clone()
    };
    let mut cases: Vec<(String, &CoTensor, Option<&CoTensor>)> = vec![("g".into(), &g, None)];
    for (name, t) in &fields {
        cases.push((name.clone(), t, Some(t)));
    }
    for (name, rho, prefix) in cases {
        let mut diff: BTreeMap<u32, Tensor> = BTreeMap::new();
        for ((e, m), c) in &rho.terms {
            let mut left = power(&mut gpows, e[0] as usize);
            if let Some(p) = prefix {
                left = left.mul(p, h);
            }
            for ((e2, m2), c2) in &left.terms {
                if h.in_window(&mono_mul(m2, m)) {
                    diff.entry(e2[0]).or_default().add_term(m2.clone(), m.clone(), c * c2);
                }
            }
            for ((a, b), c2) in &h.coproduct_mono(m).terms {
                diff.entry(e[0]).or_default().add_term(a.clone(), b.clone(), -(c * c2));
            }
        }
        let base = u32::from(prefix.is_none());
        for l in 0..=h.lmax() {
            let t = diff.remove(&(2 * l + base)).unwrap_or_default();
            let status = membership(&ideal, &t);
            check.push(format!("rho'({name}) at g^{}", 2 * l + base), status);
        }
    }
    check
}

fn membership(ideal: &GradedIdeal, t: &Tensor) -> Status {
    match ideal.tensor_contains(t) {
        Membership::Member => Status::Pass,
        Membership::NotMember => {
            let r = ideal.tensor_normal_form(t).unwrap_or_default();
            Status::Fail(ideal.h.render_tensor(&r).chars().take(200).collect())
        }
        Membership::Undecidable(w) => Status::Undecidable(w),
    }
}

/// Element of `(ℂ[[λ]]^×)^{|R_E|} ⋊ Diff`: wave-function series for the
/// fields and a diffeomorphism of the couplings. It acts on `ℂ[[λ, φ]]` by
/// `λ ↦ diffeo(λ)`, `φ_j ↦ φ_j · wave_j(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemidirectElement {
    pub wave: Vec<Series<Q>>,
    pub diffeo: FormalDiffeo,
}

impl SemidirectElement {
    pub fn identity(n_wave: usize, k: usize, order: u32) -> Self {
        let one = Series::unit_weights(k, order).constant(Q::one());
        SemidirectElement { wave: vec![one; n_wave], diffeo: FormalDiffeo::identity(k, order) }
    }

    pub fn random(rng: &mut impl Rng, n_wave: usize, k: usize, order: u32) -> Self {
        SemidirectElement {
            wave: (0..n_wave).map(|_| random_unit_series(rng, k, order)).collect(),
            diffeo: random_diffeo(rng, k, order),
        }
    }

    /// Composition of the algebra maps, `self` applied last:
    /// `(w1, d1)(w2, d2) = (w1 · (w2∘d1), d2∘d1)`.
    pub fn mul(&self, o: &Self) -> Self {
        SemidirectElement {
            wave: self.wave.iter().zip(&o.wave).map(|(w1, w2)| w1.mul(&self.diffeo.act(w2))).collect(),
            diffeo: o.diffeo.compose(&self.diffeo),
        }
    }

    pub fn inverse(&self) -> Self {
        let dinv = self.diffeo.invert();
        SemidirectElement {
            wave: self.wave.iter().map(|w| dinv.act(&w.inverse().expect("invertible wave series"))).collect(),
            diffeo: dinv,
        }
    }

    pub fn is_pure_wave(&self) -> bool {
        self.diffeo == FormalDiffeo::identity(self.diffeo.k(), self.diffeo.order())
    }

    /// Action on a series in `k` couplings followed by one variable per
    /// field; field variables must have weight 0.
    pub fn act(&self, s: &Series<Q>) -> Series<Q> {
        let k = self.diffeo.k();
        let n = self.wave.len();
        let weights = s.weights.clone();
        let order = s.order;
        let widen = |x: &Series<Q>| {
            let mut r = Series::new(weights.clone(), order);
            for (e, c) in &x.terms {
                let mut e2 = e.clone();
                e2.resize(k + n, 0);
                r.add_term(e2, c.clone());
            }
            r
        };
        let proto = Series::new(weights.clone(), order);
        let mut subs: Vec<Series<Q>> = self.diffeo.comps.iter().map(widen).collect();
        for (j, w) in self.wave.iter().enumerate() {
            subs.push(proto.var(k + j).mul(&widen(w)));
        }
        s.compose(&subs)
    }
}

/// Group law, associativity, inverses, normality of the wave subgroup and
/// the map to diffeomorphisms on random elements; the law is also checked
/// against composing the actions on a test series.
pub fn check_semidirect(seed: u64, count: usize, k: usize, n_wave: usize, order: u32) -> Check {
    let mut check = Check::new("semidirect");
    check.note(format!("seed {seed}; {count} random elements, k={k}, {n_wave} fields, order {order}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let els: Vec<SemidirectElement> = (0..count).map(|_| SemidirectElement::random(&mut rng, n_wave, k, order)).collect();
    let id = SemidirectElement::identity(n_wave, k, order);
    let mut weights = vec![1; k];
    weights.extend(std::iter::repeat(0).take(n_wave));
    let mut probe = Series::new(weights, order);
    for n in multi_indices(k, 2) {
        for j in 0..n_wave {
            let mut e = n.clone();
            e.resize(k + n_wave, 0);
            e[k + j] = 1;
            probe.add_term(e, random_q(&mut rng));
        }
        let mut e = n.clone();
        e.resize(k + n_wave, 0);
        probe.add_term(e, random_q(&mut rng));
    }
    let mut rows: Vec<(String, Option<String>)> = Vec::new();
    let mut record = |label: &str, ok: bool, i: usize| {
        if let Some(r) = rows.iter_mut().find(|r| r.0 == label) {
            if !ok && r.1.is_none() {
                r.1 = Some(format!("element {i}"));
            }
        } else {
            rows.push((label.to_string(), if ok { None } else { Some(format!("element {i}")) }));
        }
    };
    for i in 0..count {
        let (a, b, c) = (&els[i], &els[(i + 1) % count], &els[(i + 2) % count]);
        record("identity is neutral", a.mul(&id) == *a && id.mul(a) == *a, i);
        record("associativity", a.mul(b).mul(c) == a.mul(&b.mul(c)), i);
        let inv = a.inverse();
        record("inverse", a.mul(&inv) == id && inv.mul(a) == id, i);
        let pure = SemidirectElement { wave: b.wave.clone(), diffeo: FormalDiffeo::identity(k, order) };
        record("conjugate of a pure wave element is pure wave", a.mul(&pure).mul(&inv).is_pure_wave(), i);
        record("forgetting waves: diffeo(ab) = diffeo(b).diffeo(a)", a.mul(b).diffeo == b.diffeo.compose(&a.diffeo), i);
        record("law matches composed actions on a probe series", a.mul(b).act(&probe) == a.act(&b.act(&probe)), i);
    }
    for (l, bad) in rows {
        check.push(l, bad.map_or(Status::Pass, Status::Fail));
    }
    check
}

/// Render a [`CoTensor`] with coupling names; one line per term.
pub fn render_cotensor(h: &Hopf, t: &CoTensor, names: &[String]) -> String {
    let mut out = String::new();
    for ((e, m), c) in &t.terms {
        let lam = render_mono(e, names);
        let sign = if c.is_negative() { "-" } else { "+" };
        writeln!(out, "{sign} {} * {} (x) {}", fmt_q(&c.abs()), if lam.is_empty() { "1" } else { &lam }, h.render_mono(m)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Model;
    use crate::rational::qi;
    use crate::theory::TheorySpec;

    fn x1(order: u32, coeffs: &[(u32, i64)]) -> FormalDiffeo {
        let mut s = Series::unit_weights(1, order);
        for &(p, c) in coeffs {
            s.add_term(vec![p], qi(c));
        }
        FormalDiffeo { comps: vec![s] }
    }

    #[test]
    fn composition_example() {
        let f = x1(8, &[(1, 1), (2, 1)]);
        let g = x1(8, &[(1, 1), (3, 1)]);
        let fg = f.compose(&g);
        // (x + x³) + (x + x³)² expanded by hand
        assert_eq!(fg, x1(8, &[(1, 1), (2, 1), (3, 1), (4, 2), (6, 1)]));
        assert_eq!(f.compose(&FormalDiffeo::identity(1, 8)), f);
    }

    #[test]
    fn inverse_is_signed_catalan() {
        let f = x1(6, &[(1, 1), (2, 1)]);
        let want = x1(6, &[(1, 1), (2, -1), (3, 2), (4, -5), (5, 14), (6, -42)]);
        assert_eq!(f.invert(), want);
        assert_eq!(lagrange_invert_1d(&f), want);
        assert_eq!(newton_invert_1d(&f), want);
        assert_eq!(f.invert().invert(), f);
    }

    #[test]
    fn series_inverse_and_render() {
        let mut s = Series::unit_weights(2, 3);
        s.add_term(vec![0, 0], qi(2));
        s.add_term(vec![1, 0], qi(1));
        s.add_term(vec![0, 1], Q::new(3.into(), 4.into()));
        let inv = s.inverse().unwrap();
        assert_eq!(s.mul(&inv), s.constant(qi(1)));
        let names = default_names(2);
        let text = s.render(&names);
        assert_eq!(text, "1: 2\nx1: 1\nx2: 3/4\n");
        assert_eq!(Series::parse(&text, &names, vec![1, 1], 3).unwrap(), s);
    }

    #[test]
    fn fdb_low_coproducts() {
        let c = FdbCoords::new(1, 3);
        let t = c.coproduct(0, &[2]);
        // Δa_2 = a_2⊗1 + 2a_1⊗a_1 + 1⊗a_2
        assert_eq!(t.len(), 3);
        assert_eq!(t[&vec![0]], c.coord(0, &[2]));
        assert_eq!(t[&vec![1]], c.coord(0, &[1]).scale(&qi(2)));
        assert_eq!(t[&vec![2]], MPoly::one(c.nvars()));
        let t0 = c.coproduct(0, &[0]);
        assert_eq!(t0.len(), 1);
    }

    #[test]
    fn fdb_suite_passes_small() {
        let c = check_fdb(7, 5, 5, 3);
        assert!(c.passed(), "{}", c.render_text());
    }

    #[test]
    fn semidirect_small() {
        let c = check_semidirect(3, 4, 2, 2, 3);
        assert!(c.passed(), "{}", c.render_text());
    }

    fn ym() -> Hopf {
        Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2))
    }

    #[test]
    fn character_map_reverses_convolution() {
        let h = ym();
        let gr = Greens::new(&h);
        let chi = |g: GenId| Q::new((g as i64 % 5 + 1).into(), 2.into());
        let psi = |g: GenId| Q::from_integer((3 - g as i64 % 4).into());
        let conv = |g: GenId| h.convolve(&chi, &psi, &Element::gen(g), &Q::one());
        let f_chi = character_to_diffeo(&gr, &chi).unwrap();
        let f_psi = character_to_diffeo(&gr, &psi).unwrap();
        let f_conv = character_to_diffeo(&gr, &conv).unwrap();
        assert_eq!(f_conv, f_psi.compose(&f_chi));
        let counit = |_: GenId| Q::zero();
        let id = character_to_diffeo(&gr, &counit).unwrap();
        assert_eq!(id, FormalDiffeo::identity_weighted(id.comps[0].weights.clone(), id.order()));
    }

    #[test]
    fn coaction_leading_terms() {
        let h = ym();
        let gr = Greens::new(&h);
        let t = coaction_coupling(&gr, 0);
        assert_eq!(t.graph_part(&[1, 0, 0, 0, 0]), Element::one());
        let a = coaction_field(&gr, "A");
        assert_eq!(a.graph_part(&[0, 0, 0, 0, 0]), Element::one());
        let (g, _) = simple_coaction(&gr).unwrap();
        assert_eq!(g.graph_part(&[1]), Element::one());
    }

    #[test]
    fn comodule_and_simple_coaction_ym() {
        let h = ym();
        let gr = Greens::new(&h);
        let c = check_comodule(&gr);
        assert!(c.passed(), "{}", c.render_text());
        let s = check_simple_coaction(&gr);
        assert!(s.passed(), "{}", s.render_text());
    }
}
