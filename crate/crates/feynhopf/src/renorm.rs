//! Laurent-series characters, toy Feynman rules with a mass scale, the
//! algebraic Birkhoff decomposition by the counterterm recursion, the
//! renormalization group `F_t` and its generator `β`.
//!
//! Scale dependence is carried symbolically: coefficients are polynomials
//! in two formal parameters `t` and `s`, with `μ = e^t`. Toy rules assign
//! `U(Γ)(z) = e^{t z L(Γ)} B_Γ(z)` with `B_Γ` built from seeded data so
//! that the counterterms are local (see [`ToyRules`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Mutex;

use num::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::green::{st_generators, Greens};
use crate::hopf::{Element, GenId, Hopf, Mono};
use crate::poly::{MPoly, Ring};
use crate::rational::fmt_q;
use crate::report::{Check, Status};
use crate::Q;

/// Number of formal scale parameters (`t`, `s`).
pub const NPARAMS: usize = 2;
pub const T: usize = 0;
pub const S: usize = 1;

fn param_names() -> Vec<String> {
    vec!["t".into(), "s".into()]
}

fn pconst(c: Q) -> MPoly {
    MPoly::constant(NPARAMS, c)
}

/// Laurent series in `z` with coefficients in `ℚ[t, s]`, exact through the
/// power `top` (`i32::MAX` when exact to all orders).
#[derive(Clone, Debug)]
pub struct Laurent {
    pub terms: BTreeMap<i32, MPoly>,
    pub top: i32,
}

/// Equal through the common exactness bound.
impl PartialEq for Laurent {
    fn eq(&self, o: &Self) -> bool {
        let t = self.top.min(o.top);
        self.terms.range(..=t).eq(o.terms.range(..=t))
    }
}

/// `top + v` where either may be `i32::MAX` (exact).
fn shift_top(top: i32, v: i32) -> i32 {
    if top == i32::MAX || v == i32::MAX {
        i32::MAX
    } else {
        top.saturating_add(v)
    }
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent { terms: BTreeMap::new(), top: i32::MAX }
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(0, pconst(c))
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn monomial(p: i32, c: MPoly) -> Self {
        let mut l = Self::zero();
        l.add_term(p, c);
        l
    }

    pub fn add_term(&mut self, p: i32, c: MPoly) {
        if c.is_zero() || p > self.top {
            return;
        }
        match self.terms.get_mut(&p) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&p);
                }
            }
            None => {
                self.terms.insert(p, c);
            }
        }
    }

    pub fn coeff(&self, p: i32) -> MPoly {
        self.terms.get(&p).cloned().unwrap_or_else(|| MPoly::zero(NPARAMS))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest power present; `top` for the zero series.
    pub fn valuation(&self) -> i32 {
        self.terms.keys().next().copied().unwrap_or(self.top)
    }

    pub fn with_top(mut self, top: i32) -> Self {
        self.top = self.top.min(top);
        let t = self.top;
        self.terms.retain(|&p, _| p <= t);
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone().with_top(o.top);
        for (&p, c) in &o.terms {
            r.add_term(p, c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        Laurent { terms: self.terms.iter().map(|(&p, c)| (p, c.neg())).collect(), top: self.top }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut r = Laurent { terms: BTreeMap::new(), top: self.top };
        for (&p, v) in &self.terms {
            r.add_term(p, v.scale(c));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let top = shift_top(self.top, o.valuation()).min(shift_top(o.top, self.valuation()));
        let mut r = Laurent { terms: BTreeMap::new(), top };
        for (&p1, c1) in &self.terms {
            for (&p2, c2) in &o.terms {
                r.add_term(p1 + p2, c1.mul(c2));
            }
        }
        r
    }

    /// Pole part: negative powers of `z`.
    pub fn pole_part(&self) -> Self {
        Laurent { terms: self.terms.range(..0).map(|(&p, c)| (p, c.clone())).collect(), top: self.top }
    }

    /// Nonnegative powers of `z`.
    pub fn regular_part(&self) -> Self {
        Laurent { terms: self.terms.range(0..).map(|(&p, c)| (p, c.clone())).collect(), top: self.top }
    }

    pub fn is_regular(&self) -> bool {
        self.terms.range(..0).next().is_none()
    }

    /// Value at `z = 0`, failing if a pole survives or the truncation does
    /// not reach `z^0`.
    pub fn at_zero(&self) -> Result<MPoly, String> {
        if let Some((p, c)) = self.terms.range(..0).next() {
            return Err(format!("pole z^{p} with coefficient {} at z = 0", c.render(&param_names())));
        }
        if self.top < 0 {
            return Err("z-truncation does not reach z^0".into());
        }
        Ok(self.coeff(0))
    }

    /// Largest degree in `t` over all coefficients.
    pub fn t_degree(&self) -> u32 {
        self.terms.values().map(|c| c.degree_in(T)).max().unwrap_or(0)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let names = param_names();
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&p, c)| {
                let z = match p {
                    0 => String::new(),
                    1 => "z".into(),
                    _ => format!("z^{p}"),
                };
                let c = c.render(&names);
                let c = if c.contains(' ') { format!("({c})") } else { c };
                if z.is_empty() {
                    c
                } else {
                    format!("{c}*{z}")
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl Ring for Laurent {
    fn zero_like(&self) -> Self {
        Laurent::zero()
    }
    fn one_like(&self) -> Self {
        Laurent::one()
    }
    fn from_q_like(&self, c: &Q) -> Self {
        Laurent::constant(c.clone())
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

/// `exp(a z L)` for a linear form `a` in the parameters, exact through
/// `z^top`.
pub fn exp_scale(a: &MPoly, loops: u32, top: i32) -> Laurent {
    let mut out = Laurent::one().with_top(top);
    if loops == 0 {
        return Laurent::one();
    }
    let step = a.scale(&Q::from_integer(loops.into()));
    let mut term = pconst(Q::one());
    for k in 1..=top.max(0) {
        term = term.mul(&step).scale(&Q::new(1.into(), k.into()));
        out.add_term(k, term.clone());
    }
    out
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn seeded_rng(key: &str, seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv1a(key) ^ seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn small_nonzero(rng: &mut ChaCha8Rng) -> Q {
    let c: i64 = rng.gen_range(1..=3);
    let c = if rng.gen_bool(0.5) { -c } else { c };
    Q::new(c.into(), rng.gen_range(1i64..=2).into())
}

/// Seeded residue on one generator.
fn seed_beta(key: &str, seed: u64) -> Q {
    small_nonzero(&mut seeded_rng(key, seed, 1))
}

/// Seeded regular value `Π_{i=1}^{L} (a_i + b_i z)`, `a_i ≠ 0`.
fn seed_plus(key: &str, loops: u32, seed: u64) -> Laurent {
    let mut rng = seeded_rng(key, seed, 2);
    let mut v = Laurent::one();
    for _ in 0..loops {
        let a = small_nonzero(&mut rng);
        let b = Q::from_integer(rng.gen_range(-2i64..=2).into());
        v = v.mul(&Laurent::constant(a).add(&Laurent::monomial(1, pconst(b))));
    }
    v
}

/// `L` factors `c_i/z + a_i + b_i z`, independent per graph.
fn seed_nonlocal(key: &str, loops: u32, seed: u64) -> Laurent {
    let mut rng = seeded_rng(key, seed, 3);
    let mut b = Laurent::one();
    for _ in 0..loops {
        let f = Laurent::monomial(-1, pconst(small_nonzero(&mut rng)))
            .add(&Laurent::constant(Q::new(rng.gen_range(-3i64..=3).into(), 2.into())))
            .add(&Laurent::monomial(1, pconst(Q::from_integer(rng.gen_range(-2i64..=2).into()))));
        b = b.mul(&f);
    }
    b
}

/// Deterministic toy Feynman rules keyed by canonical graph strings, with
/// `U(Γ) = e^{t z L(Γ)} B_Γ(z)`.
///
/// Local rules (the default) build `B = (γ_−∘S) ⋆ γ_+` from a seeded
/// regular character `γ_+` and the counterterm `γ_−` generated by a seeded
/// residue `β` through `z L(Γ) γ_−(Γ) = −β(Γ) − Σ′ β(Γ′) γ_−(Γ/Γ′)`, so
/// that `β` is the generator of the renormalization group. This
/// is what makes `γ_−` independent of `μ`; per-graph factors chosen
/// independently of each other are not, and are kept as
/// [`ToyRules::nonlocal`] for comparison.
pub struct ToyRules<'h> {
    pub h: &'h Hopf,
    pub seed: u64,
    /// Top power of `z` kept.
    pub zmax: i32,
    /// Seeded residue on generators; empty for nonlocal rules.
    pub beta: HashMap<GenId, Q>,
    plus: HashMap<GenId, Laurent>,
    local: bool,
    minus: Mutex<HashMap<GenId, Laurent>>,
    base: Mutex<HashMap<GenId, Laurent>>,
}

impl<'h> ToyRules<'h> {
    pub fn new(h: &'h Hopf, seed: u64, zmax: i32) -> Self {
        let gens = h.all_generators(h.lmax());
        let beta = gens.iter().map(|&g| (g, seed_beta(&h.info(g).key, seed))).collect();
        let plus = gens.iter().map(|&g| (g, seed_plus(&h.info(g).key, h.info(g).loop_number, seed))).collect();
        Self::from_parts(h, seed, zmax, beta, plus)
    }

    /// Local rules from a given residue and regular character.
    pub fn from_parts(h: &'h Hopf, seed: u64, zmax: i32, beta: HashMap<GenId, Q>, plus: HashMap<GenId, Laurent>) -> Self {
        ToyRules { h, seed, zmax, beta, plus, local: true, minus: Mutex::new(HashMap::new()), base: Mutex::new(HashMap::new()) }
    }

    pub fn nonlocal(h: &'h Hopf, seed: u64, zmax: i32) -> Self {
        ToyRules {
            h,
            seed,
            zmax,
            beta: HashMap::new(),
            plus: HashMap::new(),
            local: false,
            minus: Mutex::new(HashMap::new()),
            base: Mutex::new(HashMap::new()),
        }
    }

    /// Local rules vanishing on `J′`: the residue and the regular character
    /// are solved on one pivot graph per independent generator of `J′`.
    pub fn st_compatible(gr: &Greens<'h>, seed: u64, zmax: i32) -> Result<Self, String> {
        let h = gr.h;
        let beta = solve_on_quotient(gr, &|g| seed_beta(&h.info(g).key, seed), &Q::one(), true)?;
        let plus = solve_on_quotient(gr, &|g| seed_plus(&h.info(g).key, h.info(g).loop_number, seed), &Laurent::one(), false)?;
        Ok(Self::from_parts(h, seed, zmax, beta, plus))
    }

    pub fn is_local(&self) -> bool {
        self.local
    }

    /// The counterterm generated by the seeded residue.
    pub fn seeded_minus(&self, id: GenId) -> Laurent {
        if let Some(v) = self.minus.lock().unwrap().get(&id) {
            return v.clone();
        }
        let h = self.h;
        let beta = |g: GenId| self.beta.get(&g).cloned().unwrap_or_else(Q::zero);
        let mut acc = Laurent::constant(beta(id));
        for ((l, r), c) in &h.coproduct_gen(id).terms {
            if l.len() != 1 || r.is_empty() {
                continue;
            }
            let right = r.iter().fold(Laurent::one(), |a, &x| a.mul(&self.seeded_minus(x)));
            acc = acc.add(&right.scale(&(c * beta(l[0]))));
        }
        let loops = Q::from_integer(h.info(id).loop_number.into());
        let v = acc.scale(&(-Q::one() / loops)).mul(&Laurent::monomial(-1, pconst(Q::one())));
        self.minus.lock().unwrap().insert(id, v.clone());
        v
    }

    /// `B_Γ`, the value at `μ = 1`.
    pub fn base(&self, id: GenId) -> Laurent {
        if let Some(b) = self.base.lock().unwrap().get(&id) {
            return b.clone();
        }
        let h = self.h;
        let info = h.info(id);
        let b = if self.local {
            let minus = |g: GenId| self.seeded_minus(g);
            let inv = |g: GenId| h.eval(&minus, &h.antipode_gen(g), &Laurent::one());
            let plus = |g: GenId| self.plus.get(&g).cloned().unwrap_or_else(Laurent::zero);
            h.convolve(&inv, &plus, &Element::gen(id), &Laurent::one())
        } else {
            seed_nonlocal(&info.key, info.loop_number, self.seed)
        };
        self.base.lock().unwrap().insert(id, b.clone());
        b
    }

    /// `U(Γ) = e^{a z L(Γ)} B_Γ(z)` at scale parameter `a` (a linear form in
    /// `t, s`; `None` is `μ = 1`).
    pub fn value(&self, id: GenId, a: Option<&MPoly>) -> Laurent {
        let b = self.base(id);
        let l = self.h.info(id).loop_number;
        match a {
            None => b.with_top(self.zmax),
            Some(a) => exp_scale(a, l, self.zmax + l as i32).mul(&b),
        }
    }
}

pub fn param(i: usize) -> MPoly {
    MPoly::var(NPARAMS, i)
}

/// `θ_{az}`: multiply the value on a loop-`L` monomial by `e^{a z L}`.
pub fn theta(h: &Hopf, m: &Mono, value: &Laurent, a: &MPoly, zmax: i32) -> Laurent {
    let l = h.mono_loop(m);
    exp_scale(a, l, zmax + 2 * h.lmax() as i32).mul(value)
}

/// Subtraction operator of the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Minimal subtraction: the full pole part (a Rota–Baxter operator).
    Minimal,
    /// Simple pole only; not Rota–Baxter, kept as a negative control.
    SimplePoleOnly,
}

impl Projection {
    fn apply(self, x: &Laurent) -> Laurent {
        match self {
            Projection::Minimal => x.pole_part(),
            Projection::SimplePoleOnly => Laurent::monomial(-1, x.coeff(-1)),
        }
    }
}

/// Counterterm recursion `γ_−(x) = −T[γ(x) + Σ′ γ_−(x′) γ(x″)]`,
/// `γ_+(x) = (1−T)[…]`, run directly on monomials.
pub struct Birkhoff<'a> {
    pub h: &'a Hopf,
    gamma: &'a dyn Fn(GenId) -> Laurent,
    pub proj: Projection,
    memo: Mutex<HashMap<Mono, (Laurent, Laurent)>>,
}

impl<'a> Birkhoff<'a> {
    pub fn new(h: &'a Hopf, gamma: &'a dyn Fn(GenId) -> Laurent, proj: Projection) -> Self {
        Birkhoff { h, gamma, proj, memo: Mutex::new(HashMap::new()) }
    }

    pub fn gamma_mono(&self, m: &Mono) -> Laurent {
        m.iter().fold(Laurent::one(), |acc, &g| acc.mul(&(self.gamma)(g)))
    }

    /// `(γ_−(x), γ_+(x))` for a monomial.
    pub fn split(&self, m: &Mono) -> (Laurent, Laurent) {
        if m.is_empty() {
            return (Laurent::one(), Laurent::one());
        }
        if let Some(v) = self.memo.lock().unwrap().get(m) {
            return v.clone();
        }
        let mut bar = self.gamma_mono(m);
        for ((l, r), c) in &self.h.coproduct_mono(m).terms {
            if l.is_empty() || r.is_empty() {
                continue;
            }
            bar = bar.add(&self.split(l).0.mul(&self.gamma_mono(r)).scale(c));
        }
        let t = self.proj.apply(&bar);
        let out = (t.neg(), bar.sub(&t));
        self.memo.lock().unwrap().insert(m.clone(), out.clone());
        out
    }

    pub fn minus(&self, m: &Mono) -> Laurent {
        self.split(m).0
    }

    pub fn plus(&self, m: &Mono) -> Laurent {
        self.split(m).1
    }

    pub fn minus_gen(&self, g: GenId) -> Laurent {
        self.minus(&smallvec::smallvec![g])
    }

    pub fn plus_gen(&self, g: GenId) -> Laurent {
        self.plus(&smallvec::smallvec![g])
    }
}

fn mono1(g: GenId) -> Mono {
    smallvec::smallvec![g]
}

/// Random monomial pairs with combined loop number within the window.
fn monomial_pairs(h: &Hopf, n: usize, seed: u64) -> Vec<(Mono, Mono)> {
    let lmax = h.lmax();
    // monomials of at most two factors, by loop number
    let mut by_loop: Vec<Vec<Mono>> = vec![Vec::new(); lmax as usize + 1];
    let gens = h.all_generators(lmax.saturating_sub(1));
    for (i, &a) in gens.iter().enumerate() {
        by_loop[h.info(a).loop_number as usize].push(Mono::from_slice(&[a]));
        for &b in &gens[i..] {
            let m = crate::hopf::mono_mul(&Mono::from_slice(&[a]), &Mono::from_slice(&[b]));
            let l = h.mono_loop(&m);
            if l < lmax && h.in_window(&m) {
                by_loop[l as usize].push(m);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut tries = 0;
    while out.len() < n && tries < 100 * n && lmax >= 2 {
        tries += 1;
        let la = rng.gen_range(1..lmax) as usize;
        let lb = rng.gen_range(1..=lmax as usize - la);
        if by_loop[la].is_empty() || by_loop[lb].is_empty() {
            continue;
        }
        let a = by_loop[la][rng.gen_range(0..by_loop[la].len())].clone();
        let b = by_loop[lb][rng.gen_range(0..by_loop[lb].len())].clone();
        if h.in_window(&crate::hopf::mono_mul(&a, &b)) && seen.insert((a.clone(), b.clone())) {
            out.push((a, b));
        }
    }
    out
}

/// Factorization, Rota–Baxter splitting, multiplicativity of the
/// counterterm on monomial pairs, `μ`-independence of `γ_−`, and the
/// grading-flow identity `γ_{e^s μ} = θ_{sz}(γ_μ)`.
pub fn check_birkhoff(rules: &ToyRules, pairs: usize, seed: u64) -> Check {
    let h = rules.h;
    let mut check = Check::new("birkhoff");
    check.note(format!("toy rules seed {}, z truncation {}", rules.seed, rules.zmax));
    let gamma = |g: GenId| rules.value(g, None);
    let b = Birkhoff::new(h, &gamma, Projection::Minimal);
    let gens = h.all_generators(h.lmax());
    let minus = |g: GenId| b.minus_gen(g);
    let minus_inv = |g: GenId| h.eval(&minus, &h.antipode_gen(g), &Laurent::one());
    let plus = |g: GenId| b.plus_gen(g);
    for l in 1..=h.lmax() {
        let mut fact = Status::Pass;
        let mut plus_conv = Status::Pass;
        let mut split = Status::Pass;
        for &g in gens.iter().filter(|&&g| h.info(g).loop_number == l) {
            let x = Element::gen(g);
            let lhs = h.convolve(&minus, &gamma, &x, &Laurent::one());
            if lhs != plus(g) && plus_conv == Status::Pass {
                plus_conv = Status::Fail(format!("{}: {} vs {}", h.info(g).key, lhs.render(), plus(g).render()));
            }
            let back = h.convolve(&minus_inv, &plus, &x, &Laurent::one());
            if back != gamma(g).with_top(back.top) && fact == Status::Pass {
                fact = Status::Fail(format!("{}: {} vs {}", h.info(g).key, back.render(), gamma(g).render()));
            }
            let (m, p) = b.split(&mono1(g));
            if (!p.is_regular() || m.terms.range(0..).next().is_some()) && split == Status::Pass {
                split = Status::Fail(format!("{}: gamma_- = {}, gamma_+ = {}", h.info(g).key, m.render(), p.render()));
            }
        }
        check.push(format!("gamma_+ = gamma_- * gamma, loop {l}"), plus_conv);
        check.push(format!("gamma = (gamma_- o S) * gamma_+, loop {l}"), fact);
        check.push(format!("gamma_+ regular, gamma_- pure pole, loop {l}"), split);
    }
    let mut mult = Status::Pass;
    let prs = monomial_pairs(h, pairs, seed);
    for (x, y) in &prs {
        let xy = crate::hopf::mono_mul(x, y);
        let lhs = b.minus(&xy);
        let rhs = b.minus(x).mul(&b.minus(y));
        if lhs != rhs {
            mult = Status::Fail(format!("{} . {}: {} vs {}", h.render_mono(x), h.render_mono(y), lhs.render(), rhs.render()));
            break;
        }
    }
    check.push(format!("gamma_-(xy) = gamma_-(x) gamma_-(y) on {} monomial pairs", prs.len()), mult);
    let tvar = param(T);
    let gamma_t = |g: GenId| rules.value(g, Some(&tvar));
    let bt = Birkhoff::new(h, &gamma_t, Projection::Minimal);
    let mut indep = Status::Pass;
    for &g in &gens {
        let m = bt.minus_gen(g);
        if m.t_degree() != 0 || m != b.minus_gen(g) {
            indep = Status::Fail(format!("{}: {}", h.info(g).key, m.render()));
            break;
        }
    }
    check.push("gamma_- independent of mu", indep);
    if rules.is_local() {
        let mut st = Status::Pass;
        for &g in &gens {
            if b.minus_gen(g) != rules.seeded_minus(g) {
                st = Status::Fail(format!("{}: {} vs {}", h.info(g).key, b.minus_gen(g).render(), rules.seeded_minus(g).render()));
                break;
            }
        }
        check.push("gamma_- = seeded counterterm", st);
    }
    let ts = param(T).add(&param(S));
    let svar = param(S);
    let mut flow = Status::Pass;
    for &g in &gens {
        let lhs = rules.value(g, Some(&ts));
        let rhs = theta(h, &mono1(g), &gamma_t(g), &svar, rules.zmax);
        let top = lhs.top.min(rhs.top);
        if lhs.clone().with_top(top) != rhs.clone().with_top(top) {
            flow = Status::Fail(format!("{}", h.info(g).key));
            break;
        }
    }
    check.push("gamma_{e^s mu} = theta_{sz}(gamma_mu)", flow);
    check
}

/// The renormalization group element `F_t` and the generator `β`, on
/// generators.
pub struct RgFlow {
    /// `F_t(Γ)`, polynomial in `t`.
    pub f: HashMap<GenId, MPoly>,
    /// `β(Γ)`: the `t`-linear coefficient.
    pub beta: HashMap<GenId, Q>,
}

/// `F_t = lim_{z→0} γ_−(z) ⋆ θ_{tz}(γ_−(z)^{−1})`; a surviving pole is an
/// error.
pub fn rg_flow(h: &Hopf, minus: &dyn Fn(GenId) -> Laurent, zmax: i32) -> Result<RgFlow, String> {
    let tvar = param(T);
    let inv = |g: GenId| h.eval(minus, &h.antipode_gen(g), &Laurent::one());
    let mut f = HashMap::new();
    let mut beta = HashMap::new();
    for g in h.all_generators(h.lmax()) {
        let mut acc = Laurent::zero();
        for ((l, r), c) in &h.coproduct_gen(g).terms {
            let left = l.iter().fold(Laurent::one(), |a, &x| a.mul(&minus(x)));
            let right = r.iter().fold(Laurent::one(), |a, &x| a.mul(&inv(x)));
            acc = acc.add(&left.mul(&theta(h, r, &right, &tvar, zmax)).scale(c));
        }
        let v = acc.at_zero().map_err(|e| format!("F_t({}): {e}", h.info(g).key))?;
        let mut e1 = vec![0; NPARAMS];
        e1[T] = 1;
        beta.insert(g, v.coeff(&e1));
        f.insert(g, v);
    }
    Ok(RgFlow { f, beta })
}

fn poly_char(map: HashMap<GenId, MPoly>) -> impl Fn(GenId) -> MPoly {
    move |g| map.get(&g).cloned().unwrap_or_else(|| MPoly::zero(NPARAMS))
}

/// `β` applied to the single-generator part of `x` (a derivation vanishes on
/// products of augmentation-ideal elements).
pub fn beta_linear(beta: &HashMap<GenId, Q>, x: &Element) -> Q {
    x.terms.iter().filter(|(m, _)| m.len() == 1).map(|(m, c)| c * beta.get(&m[0]).cloned().unwrap_or_else(Q::zero)).sum()
}

/// Renormalization group checks for one character: pole cancellation in
/// `F_t`, `F_0 = ε`, `deg_t F_t(Γ) ≤ L(Γ)`, the one-parameter group law,
/// `γ_{e^t μ,+}(0) = F_t ⋆ γ_{μ,+}(0)`, and its `t`-derivative at `t = 0`.
pub fn check_rg(rules: &ToyRules) -> (Check, Option<RgFlow>) {
    let h = rules.h;
    let zmax = rules.zmax;
    let gamma_at = |g: GenId, a: Option<&MPoly>| rules.value(g, a);
    let mut check = Check::new("rg");
    let gamma0 = |g: GenId| gamma_at(g, None);
    let b0 = Birkhoff::new(h, &gamma0, Projection::Minimal);
    let minus = |g: GenId| b0.minus_gen(g);
    let flow = match rg_flow(h, &minus, zmax) {
        Ok(f) => f,
        Err(e) => {
            check.push("F_t poles cancel", Status::Fail(e));
            return (check, None);
        }
    };
    check.push("F_t poles cancel", Status::Pass);
    let gens = h.all_generators(h.lmax());
    if rules.is_local() {
        let mut st = Status::Pass;
        for &g in &gens {
            let want = rules.beta.get(&g).cloned().unwrap_or_else(Q::zero);
            if flow.beta[&g] != want {
                st = Status::Fail(format!("{}: {} vs {}", h.info(g).key, fmt_q(&flow.beta[&g]), fmt_q(&want)));
                break;
            }
        }
        check.push("beta = seeded residue", st);
    }
    let zero_t = [pconst(Q::zero()), param(S)];
    let mut f0 = Status::Pass;
    let mut deg = Status::Pass;
    for &g in &gens {
        let v = &flow.f[&g];
        if !v.substitute(&zero_t).is_zero() && f0 == Status::Pass {
            f0 = Status::Fail(format!("{}: {}", h.info(g).key, v.render(&param_names())));
        }
        if v.degree_in(T) > h.info(g).loop_number && deg == Status::Pass {
            deg = Status::Fail(format!("{}: {}", h.info(g).key, v.render(&param_names())));
        }
    }
    check.push("F_0 = counit", f0);
    check.push("deg_t F_t(G) <= L(G)", deg);
    let ft = poly_char(flow.f.clone());
    let fs = |g: GenId| ft(g).substitute(&[param(S), param(S)]);
    let fts = |g: GenId| ft(g).substitute(&[param(T).add(&param(S)), param(S)]);
    let one = pconst(Q::one());
    let mut group = Status::Pass;
    for &g in &gens {
        let lhs = fts(g);
        let rhs = h.convolve(&ft, &fs, &Element::gen(g), &one);
        if lhs != rhs {
            group = Status::Fail(format!("{}: {} vs {}", h.info(g).key, lhs.render(&param_names()), rhs.render(&param_names())));
            break;
        }
    }
    check.push("F_{t+s} = F_t * F_s", group);
    let tvar = param(T);
    let gamma_t = |g: GenId| gamma_at(g, Some(&tvar));
    let bt = Birkhoff::new(h, &gamma_t, Projection::Minimal);
    let plus0 = |g: GenId| b0.plus_gen(g).at_zero().unwrap_or_else(|_| MPoly::zero(NPARAMS));
    let mut scale = Status::Pass;
    let mut deriv = Status::Pass;
    let mut e1 = vec![0; NPARAMS];
    e1[T] = 1;
    for &g in &gens {
        let lhs = match bt.plus_gen(g).at_zero() {
            Ok(v) => v,
            Err(e) => {
                scale = Status::Fail(format!("{}: {e}", h.info(g).key));
                break;
            }
        };
        let rhs = h.convolve(&ft, &plus0, &Element::gen(g), &one);
        if lhs != rhs && scale == Status::Pass {
            scale = Status::Fail(format!("{}: {} vs {}", h.info(g).key, lhs.render(&param_names()), rhs.render(&param_names())));
        }
        // (β ⋆ γ_+(0))(Γ): β sees only single-generator left factors
        let mut d = Q::zero();
        for ((l, r), c) in &h.coproduct_gen(g).terms {
            if l.len() == 1 {
                let p = r.iter().fold(one.clone(), |a, &x| a.mul(&plus0(x)));
                d += c * &flow.beta[&l[0]] * p.constant_term();
            }
        }
        if lhs.coeff(&e1) != d && deriv == Status::Pass {
            deriv = Status::Fail(format!("{}: {} vs {}", h.info(g).key, fmt_q(&lhs.coeff(&e1)), fmt_q(&d)));
        }
    }
    check.push("gamma_{e^t mu,+}(0) = F_t * gamma_{mu,+}(0)", scale);
    check.push("d/dt gamma_{e^t mu,+}(0) at t=0 = beta * gamma_{mu,+}(0)", deriv);
    (check, Some(flow))
}

/// Values on generators making a character (or, with `derivation`, an
/// infinitesimal character) vanish on `J′`. Loop by loop, every graph takes
/// `free(g)` except one pivot graph per independent generator, which is
/// solved for.
pub fn solve_on_quotient<R: Ring>(gr: &Greens, free: &dyn Fn(GenId) -> R, unit: &R, derivation: bool) -> Result<HashMap<GenId, R>, String> {
    let h = gr.h;
    let gens = st_generators(gr);
    let zero = unit.zero_like();
    let mut values: HashMap<GenId, R> = HashMap::new();
    for l in 1..=h.lmax() {
        let cols: Vec<GenId> = h.all_generators(l).into_iter().filter(|&g| h.info(g).loop_number == l).collect();
        let col_of: HashMap<GenId, usize> = cols.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        // linear part over loop-l graphs, value of the nonlinear part
        let mut rows: Vec<(Vec<Q>, R)> = Vec::new();
        for g in gens.iter().filter(|g| h.loop_parts(&g.element).keys().next() == Some(&l)) {
            let mut lin = vec![Q::zero(); cols.len()];
            let mut rest = zero.clone();
            for (m, c) in &g.element.terms {
                if m.len() == 1 {
                    lin[col_of[&m[0]]] += c;
                } else if !derivation {
                    let v = m.iter().fold(unit.clone(), |acc, x| acc.mul_r(&values[x]));
                    rest = rest.add_r(&v.mul_r(&unit.from_q_like(c)));
                }
            }
            rows.push((lin, rest));
        }
        // reduced row echelon form over ℚ, same operations on the values
        let mut piv_cols: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..cols.len() {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else { continue };
            rows.swap(r, p);
            let inv = Q::one() / &rows[r].0[c];
            rows[r].0.iter_mut().for_each(|x| *x *= &inv);
            rows[r].1 = rows[r].1.mul_r(&unit.from_q_like(&inv));
            let (plin, pval) = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && !row.0[c].is_zero() {
                    let f = row.0[c].clone();
                    for (x, y) in row.0.iter_mut().zip(&plin) {
                        *x -= &f * y;
                    }
                    row.1 = row.1.sub_r(&pval.mul_r(&unit.from_q_like(&f)));
                }
            }
            piv_cols.push(c);
            r += 1;
        }
        for (i, &g) in cols.iter().enumerate() {
            if !piv_cols.contains(&i) {
                values.insert(g, free(g));
            }
        }
        for (ri, (lin, val)) in rows.iter().enumerate() {
            let Some(&pc) = piv_cols.get(ri) else {
                if !val.is_zero_r() {
                    return Err(format!("inconsistent J' relation at loop {l}"));
                }
                continue;
            };
            let mut v = val.clone();
            for (c, coef) in lin.iter().enumerate() {
                if c != pc && !coef.is_zero() {
                    v = v.add_r(&values[&cols[c]].mul_r(&unit.from_q_like(coef)));
                }
            }
            values.insert(cols[pc], v.neg_r());
        }
    }
    Ok(values)
}

/// With ST-compatible rules: `γ`, `γ_−`, `γ_+` and `β` vanish on every
/// `J′` generator, and `β(q_l(Y_v)) = (N(v)−2) β(q_l(X))` so that
/// `β(λ_v) = β(g^{N(v)−2})` modulo `I′`.
pub fn check_st_rg(gr: &Greens, seed: u64, zmax: i32) -> Check {
    let h = gr.h;
    let mut check = Check::new("st-rg");
    let rules = match ToyRules::st_compatible(gr, seed, zmax) {
        Ok(r) => r,
        Err(e) => {
            check.push("ST-compatible rules", Status::Fail(e));
            return check;
        }
    };
    let gamma = |g: GenId| rules.value(g, None);
    let b = Birkhoff::new(h, &gamma, Projection::Minimal);
    let minus = |g: GenId| b.minus_gen(g);
    let plus = |g: GenId| b.plus_gen(g);
    let gens = st_generators(gr);
    for (name, f) in [("gamma", &gamma as &dyn Fn(GenId) -> Laurent), ("gamma_-", &minus), ("gamma_+", &plus)] {
        let mut st = Status::Pass;
        for g in &gens {
            let v = h.eval(f, &g.element, &Laurent::one());
            if !v.is_zero() {
                st = Status::Fail(format!("{}: {}", g.label, v.render()));
                break;
            }
        }
        check.push(format!("{name} vanishes on J'"), st);
    }
    check.extend(check_birkhoff(&rules, 10, seed));
    let (rg, flow) = check_rg(&rules);
    check.extend(rg);
    let Some(flow) = flow else { return check };
    let mut bst = Status::Pass;
    for g in &gens {
        let v = beta_linear(&flow.beta, &g.element);
        if !v.is_zero() {
            bst = Status::Fail(format!("{}: {}", g.label, fmt_q(&v)));
            break;
        }
    }
    check.push("beta vanishes on J'", bst);
    let Some(xv) = gr.x_vertex() else { return check };
    let x = gr.x(xv);
    let val2 = h.model.val2();
    let q = |e: &Element, l: u32| e.filter(|m| h.mono_loop(m) == l && val2.iter().all(|&v| h.mono_degree(m)[v] == 0));
    for v in 0..h.model.k() {
        let n = h.model.valence(v);
        if n <= 2 {
            continue;
        }
        let y = gr.y(v, &Q::one());
        let name = &h.model.spec.vertices[v].name;
        let mut lines = Vec::new();
        let mut st = Status::Pass;
        for l in 0..=h.lmax() {
            let lhs = beta_linear(&flow.beta, &q(&y, l));
            let rhs = Q::from_integer((n as i64 - 2).into()) * beta_linear(&flow.beta, &q(&x, l));
            lines.push(format!("g^{}: {}", n - 2 + 2 * l as usize, fmt_q(&lhs)));
            if lhs != rhs && st == Status::Pass {
                st = Status::Fail(format!("g^{}: {} vs {}", n - 2 + 2 * l as usize, fmt_q(&lhs), fmt_q(&rhs)));
            }
        }
        check.note(format!("beta(lambda_{name}) mod I' = {}", lines.join(", ")));
        check.push(format!("beta(lambda_{name}) = beta(g^{}) mod I'", n - 2), st);
    }
    check
}

/// Per-generator table of `γ`, `γ_−`, `γ_+`.
pub fn birkhoff_table(rules: &ToyRules) -> String {
    let h = rules.h;
    let gamma = |g: GenId| rules.value(g, None);
    let b = Birkhoff::new(h, &gamma, Projection::Minimal);
    let mut out = String::new();
    for g in h.all_generators(h.lmax()) {
        let info = h.info(g);
        writeln!(out, "[{}] L={}", info.key, info.loop_number).unwrap();
        writeln!(out, "  gamma   = {}", gamma(g).render()).unwrap();
        writeln!(out, "  gamma_- = {}", b.minus_gen(g).render()).unwrap();
        writeln!(out, "  gamma_+ = {}", b.plus_gen(g).render()).unwrap();
    }
    out
}

/// `β` per generator, sorted by canonical key.
pub fn beta_table(h: &Hopf, flow: &RgFlow) -> String {
    let mut rows: Vec<(String, Q)> = flow.beta.iter().map(|(&g, b)| (h.info(g).key.clone(), b.clone())).collect();
    rows.sort();
    let mut out = String::new();
    for (k, b) in rows {
        let sign = if b.is_negative() { "-" } else { "" };
        writeln!(out, "beta([{k}]) = {sign}{}", fmt_q(&b.abs())).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Model;
    use crate::rational::qi;
    use crate::theory::TheorySpec;

    fn lq(p: i32, c: i64) -> Laurent {
        Laurent::monomial(p, pconst(qi(c)))
    }

    #[test]
    fn laurent_arithmetic_tracks_exactness() {
        let a = lq(-1, 2).add(&lq(0, 1)).with_top(3);
        let b = lq(-2, 1);
        let p = a.mul(&b);
        assert_eq!(p.top, 1);
        assert_eq!(p.coeff(-3), pconst(qi(2)));
        assert_eq!(p.pole_part().regular_part(), Laurent { terms: BTreeMap::new(), top: 1 });
        assert!(lq(1, 1).at_zero().unwrap().is_zero());
        assert!(lq(-1, 1).at_zero().is_err());
    }

    #[test]
    fn exp_scale_series() {
        let e = exp_scale(&param(T), 2, 3);
        // e^{2tz} = 1 + 2t z + 2t² z² + 4/3 t³ z³
        assert_eq!(e.coeff(2), MPoly::monomial(vec![2, 0], qi(2)));
        assert_eq!(e.coeff(3), MPoly::monomial(vec![3, 0], Q::new(4.into(), 3.into())));
    }

    fn qed() -> Hopf {
        Hopf::new(Model::with_window(TheorySpec::qed(), 2, 2))
    }

    #[test]
    fn primitive_minimal_subtraction() {
        let h = qed();
        let photon = h.model.spec.residue_by_name("photon").unwrap();
        let g = h.generators(photon, 1)[0];
        let gamma = |_: GenId| lq(-1, 3).add(&lq(0, 5));
        let b = Birkhoff::new(&h, &gamma, Projection::Minimal);
        assert_eq!(b.minus_gen(g), lq(-1, -3));
        assert_eq!(b.plus_gen(g).at_zero().unwrap(), pconst(qi(5)));
        let regular = |_: GenId| lq(0, 7);
        let b = Birkhoff::new(&h, &regular, Projection::Minimal);
        assert!(b.minus_gen(g).is_zero());
        assert_eq!(b.plus_gen(g), lq(0, 7));
    }

    #[test]
    fn nested_cross_term_by_hand() {
        let h = qed();
        let fermion = h.model.spec.residue_by_name("fermion").unwrap();
        // a two-loop graph whose only proper divergent subgraphs are one-loop
        let g = *h
            .generators(fermion, 2)
            .iter()
            .find(|&&g| {
                let t = h.coproduct_gen(g);
                t.terms.keys().filter(|(l, r)| !l.is_empty() && !r.is_empty()).count() == 1
            })
            .unwrap();
        let t = h.coproduct_gen(g);
        let ((sub, quo), c) = t.terms.iter().find(|((l, r), _)| !l.is_empty() && !r.is_empty()).unwrap();
        assert_eq!(sub.len(), 1);
        let u = |x: GenId| if h.info(x).loop_number == 1 { lq(-1, 1).add(&lq(0, 2)) } else { lq(-2, 1).add(&lq(-1, 1)).add(&lq(0, 1)) };
        let b = Birkhoff::new(&h, &u, Projection::Minimal);
        // γ_−(γ′) = −1/z, γ(Γ/γ′) = 1/z + 2
        // bar = (1/z² + 1/z + 1) + c·(−1/z)(1/z + 2) = (1−c)/z² + (1−2c)/z + 1
        let want = lq(-2, -1).add(&lq(-1, -1)).add(&Laurent::monomial(-2, pconst(c.clone()))).add(&Laurent::monomial(-1, pconst(c * qi(2))));
        assert_eq!(b.minus_gen(g), want);
        assert_eq!(quo.len(), 1);
    }

    #[test]
    fn birkhoff_and_rg_suites_pass_on_qed() {
        let h = qed();
        let rules = ToyRules::new(&h, 11, 6);
        let c = check_birkhoff(&rules, 20, 5);
        assert!(c.passed(), "{}", c.render_text());
        let (rg, flow) = check_rg(&rules);
        assert!(rg.passed(), "{}", rg.render_text());
        let flow = flow.unwrap();
        assert!(flow.beta.values().any(|b| !b.is_zero()));
    }

    #[test]
    fn nonlocal_rules_fail_mu_independence() {
        let h = qed();
        let rules = ToyRules::nonlocal(&h, 11, 6);
        let c = check_birkhoff(&rules, 10, 5);
        assert!(c.rows.iter().any(|(l, s)| l == "gamma_- independent of mu" && matches!(s, Status::Fail(_))));
    }

    #[test]
    fn corrupted_projection_breaks_multiplicativity() {
        let h = qed();
        let rules = ToyRules::new(&h, 11, 6);
        let gamma = |g: GenId| rules.value(g, None);
        let b = Birkhoff::new(&h, &gamma, Projection::SimplePoleOnly);
        let pairs = monomial_pairs(&h, 30, 2);
        let broken = pairs.iter().any(|(x, y)| b.minus(&crate::hopf::mono_mul(x, y)) != b.minus(x).mul(&b.minus(y)));
        assert!(broken);
        let m = Birkhoff::new(&h, &gamma, Projection::Minimal);
        assert_eq!(m.minus(&Mono::new()), Laurent::one());
    }

    #[test]
    fn st_rules_on_yang_mills() {
        let h = Hopf::new(Model::with_window(TheorySpec::yang_mills(), 2, 2));
        let gr = Greens::new(&h);
        let c = check_st_rg(&gr, 3, 6);
        assert!(c.passed(), "{}", c.render_text());
    }
}
