//! Local functionals of pure Yang–Mills theory as graded trace words, the
//! antibracket, the BRST differential and the constraints imposed on the
//! couplings by the classical master equation.
//!
//! Symbols are `𝔤`-valued forms graded by total degree (form plus ghost).
//! Lie polynomials are expanded into associative words, so graded
//! antisymmetry and Jacobi hold identically. An integrand is either a plain
//! trace `tr(W)` or a Hodge pairing `tr(L * R)` of two words of equal form
//! degree.
//!
//! Pairings are stored in a component frame where every letter is written
//! `dx^I c` with a Grassmann coefficient `c`. There
//! `tr(L * R) = ε(L) ε(R) (−1)^{gh(L) p} ⟨dx^L, dx^R⟩ tr(c_L c_R)`, with
//! `ε(W) = Π_{i<j} (−1)^{gh(w_i) form(w_j)}` and `p` the common form degree
//! (spacetime dimension even). In this frame the integrand is a cyclic
//! word with two markers (trace start and star); markers slide freely across
//! 0-form letters, and rotating the word costs the ghost-parity sign of the
//! moved block. Integration by parts never relates two such words, since it
//! would introduce a codifferential outside the alphabet.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::groebner::{groebner_basis, ideal_contains, monic, same_ideal};
use crate::poly::MPoly;
use crate::rational::{fmt_q, q, qi};
use crate::report::{Check, Status};
use crate::theory::TheorySpec;
use crate::Q;

/// Coefficient variables, in order.
pub const COUPLINGS: [&str; 6] = ["lambda_A3", "lambda_A4", "lambda_omegabarAomega", "lambda_AomegaK_A", "lambda_omega2K_omega", "xi"];
pub const NC: usize = COUPLINGS.len();
pub const L3: usize = 0;
pub const L4: usize = 1;
pub const LG: usize = 2;
pub const LA: usize = 3;
pub const LW: usize = 4;
pub const XI: usize = 5;

pub fn coupling_names() -> Vec<String> {
    COUPLINGS.iter().map(|s| s.to_string()).collect()
}

pub fn cvar(i: usize) -> MPoly {
    MPoly::var(NC, i)
}

pub fn cconst(c: Q) -> MPoly {
    MPoly::constant(NC, c)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BvError {
    #[error("pairing of a {0}-form with a {1}-form")]
    FormMismatch(i32, i32),
    #[error("source appears nonlinearly in {0}")]
    NonlinearSource(String),
    #[error("unsupported word shape: {0}")]
    Unsupported(String),
    #[error("inhomogeneous expression: {0}")]
    Inhomogeneous(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Field and source symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    A,
    Omega,
    OmegaBar,
    H,
    KA,
    KOmega,
    KOmegaBar,
    KH,
}

impl Sym {
    pub const ALL: [Sym; 8] = [Sym::A, Sym::Omega, Sym::OmegaBar, Sym::H, Sym::KA, Sym::KOmega, Sym::KOmegaBar, Sym::KH];
    pub const FIELDS: [Sym; 4] = [Sym::A, Sym::Omega, Sym::OmegaBar, Sym::H];

    pub fn name(self) -> &'static str {
        match self {
            Sym::A => "A",
            Sym::Omega => "omega",
            Sym::OmegaBar => "omegabar",
            Sym::H => "h",
            Sym::KA => "K_A",
            Sym::KOmega => "K_omega",
            Sym::KOmegaBar => "K_omegabar",
            Sym::KH => "K_h",
        }
    }

    pub fn from_name(s: &str) -> Option<Sym> {
        Sym::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn form(self) -> i32 {
        match self {
            Sym::A | Sym::KA => 1,
            _ => 0,
        }
    }

    pub fn ghost(self) -> i32 {
        match self {
            Sym::A | Sym::H | Sym::KOmegaBar => 0,
            Sym::Omega => 1,
            Sym::OmegaBar | Sym::KA | Sym::KH => -1,
            Sym::KOmega => -2,
        }
    }

    pub fn is_source(self) -> bool {
        matches!(self, Sym::KA | Sym::KOmega | Sym::KOmegaBar | Sym::KH)
    }

    /// The field a source is paired with.
    pub fn field_of(self) -> Option<Sym> {
        match self {
            Sym::KA => Some(Sym::A),
            Sym::KOmega => Some(Sym::Omega),
            Sym::KOmegaBar => Some(Sym::OmegaBar),
            Sym::KH => Some(Sym::H),
            _ => None,
        }
    }

    pub fn source(self) -> Option<Sym> {
        Sym::ALL.into_iter().find(|k| k.field_of() == Some(self))
    }
}

/// A symbol or its exterior derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub sym: Sym,
    pub d: bool,
}

impl Letter {
    pub fn new(sym: Sym) -> Self {
        Letter { sym, d: false }
    }

    pub fn dsym(sym: Sym) -> Self {
        Letter { sym, d: true }
    }

    pub fn form(self) -> i32 {
        self.sym.form() + self.d as i32
    }

    pub fn ghost(self) -> i32 {
        self.sym.ghost()
    }

    pub fn total(self) -> i32 {
        self.form() + self.ghost()
    }

    pub fn render(self) -> String {
        if self.d {
            format!("d{}", self.sym.name())
        } else {
            self.sym.name().to_string()
        }
    }
}

pub type Word = Vec<Letter>;

fn odd(k: i32) -> bool {
    k.rem_euclid(2) == 1
}

fn sign(neg: bool) -> Q {
    if neg {
        -Q::one()
    } else {
        Q::one()
    }
}

fn form_of(w: &[Letter]) -> i32 {
    w.iter().map(|l| l.form()).sum()
}

fn ghost_of(w: &[Letter]) -> i32 {
    w.iter().map(|l| l.ghost()).sum()
}

fn total_of(w: &[Letter]) -> i32 {
    w.iter().map(|l| l.total()).sum()
}

/// Parity of `ε(W)`, the sign collecting the form parts of a word to the left.
fn eps(w: &[Letter]) -> bool {
    let mut n = 0;
    for (i, a) in w.iter().enumerate() {
        for b in &w[i + 1..] {
            n += a.ghost() * b.form();
        }
    }
    odd(n)
}

fn rotate(w: &[Letter], k: usize) -> Word {
    w[k..].iter().chain(&w[..k]).copied().collect()
}

fn render_word(w: &[Letter]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|l| l.render()).collect::<Vec<_>>().join(" ")
}

fn render_coeff(c: &MPoly) -> String {
    let s = c.render(&coupling_names());
    if c.terms.len() > 1 {
        format!("({s})")
    } else {
        s
    }
}

/// Noncommutative polynomial in letters with coupling-polynomial
/// coefficients: a `𝔤`-valued local form.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FormPoly {
    pub terms: BTreeMap<Word, MPoly>,
}

impl FormPoly {
    pub fn zero() -> Self {
        FormPoly::default()
    }

    pub fn scalar(c: MPoly) -> Self {
        let mut f = Self::zero();
        f.add_term(Word::new(), c);
        f
    }

    pub fn letter(l: Letter) -> Self {
        let mut f = Self::zero();
        f.add_term(vec![l], cconst(Q::one()));
        f
    }

    pub fn sym(s: Sym) -> Self {
        Self::letter(Letter::new(s))
    }

    pub fn dsym(s: Sym) -> Self {
        Self::letter(Letter::dsym(s))
    }

    pub fn add_term(&mut self, w: Word, c: MPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w).or_insert_with(|| MPoly::zero(NC));
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        FormPoly { terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale_q(&self, c: &Q) -> Self {
        self.scale(&cconst(c.clone()))
    }

    pub fn scale(&self, c: &MPoly) -> Self {
        let mut r = Self::zero();
        for (w, v) in &self.terms {
            r.add_term(w.clone(), v.mul(c));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                r.add_term(a.iter().chain(b).copied().collect(), ca.mul(cb));
            }
        }
        r
    }

    /// Graded commutator `[X,Y] = XY − (−1)^{|X||Y|} YX`, word by word.
    pub fn bracket(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let c = ca.mul(cb);
                r.add_term(a.iter().chain(b).copied().collect(), c.clone());
                let s = if odd(total_of(a) * total_of(b)) { c } else { c.neg() };
                r.add_term(b.iter().chain(a).copied().collect(), s);
            }
        }
        r
    }

    /// Exterior derivative: `d(X) = dX` on symbols, `d(dX) = 0`.
    pub fn d(&self) -> Self {
        let mut r = Self::zero();
        for (w, c) in &self.terms {
            let mut before = 0;
            for (i, l) in w.iter().enumerate() {
                if !l.d {
                    let mut nw = w.clone();
                    nw[i] = Letter::dsym(l.sym);
                    r.add_term(nw, if odd(before) { c.neg() } else { c.clone() });
                }
                before += l.total();
            }
        }
        r
    }

    /// Total degree if homogeneous.
    pub fn degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|w| total_of(w));
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn substitute(&self, vals: &[MPoly]) -> Self {
        let mut r = Self::zero();
        for (w, c) in &self.terms {
            r.add_term(w.clone(), c.substitute(vals));
        }
        r
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms.iter().map(|(w, c)| format!("{} {}", render_coeff(c), render_word(w))).collect::<Vec<_>>().join(" + ")
    }
}

/// A derivation of the given total degree, defined by its values on
/// symbols and extended by the graded Leibniz rule and
/// `D ∘ d = (−1)^{deg D} d ∘ D`. Symbols without an image go to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub degree: i32,
    pub images: BTreeMap<Sym, FormPoly>,
}

impl Derivation {
    pub fn letter(&self, l: Letter) -> FormPoly {
        let Some(img) = self.images.get(&l.sym) else { return FormPoly::zero() };
        if l.d {
            let di = img.d();
            if odd(self.degree) {
                di.neg()
            } else {
                di
            }
        } else {
            img.clone()
        }
    }

    pub fn apply(&self, x: &FormPoly) -> FormPoly {
        let mut r = FormPoly::zero();
        for (w, c) in &x.terms {
            let mut before = 0;
            for (i, &l) in w.iter().enumerate() {
                let img = self.letter(l);
                let c = if odd(self.degree * before) { c.neg() } else { c.clone() };
                for (m, v) in &img.terms {
                    let nw: Word = w[..i].iter().chain(m).chain(&w[i + 1..]).copied().collect();
                    r.add_term(nw, v.mul(&c));
                }
                before += l.total();
            }
        }
        r
    }

    /// Action on integrated functionals.
    pub fn apply_expr(&self, e: &BvExpr) -> Result<BvExpr, BvError> {
        let mut out = BvExpr::zero();
        for (key, c) in &e.terms {
            match key.star {
                None => {
                    let w = FormPoly { terms: [(key.letters.clone(), c.clone())].into() };
                    out = out.add(&BvExpr::trace(&self.apply(&w)));
                }
                Some(_) => {
                    let (neg, l, r) = key.to_pair();
                    let lp = FormPoly { terms: [(l.clone(), cconst(sign(neg)))].into() };
                    let rp = FormPoly { terms: [(r, cconst(Q::one()))].into() };
                    let first = BvExpr::pair(&self.apply(&lp), &rp)?;
                    let second = BvExpr::pair(&lp, &self.apply(&rp))?;
                    let s = sign(odd(self.degree * total_of(&l)));
                    out = out.add(&first.add(&second.scale(&cconst(s))).scale(c));
                }
            }
        }
        Ok(out)
    }

    pub fn substitute(&self, vals: &[MPoly]) -> Self {
        Derivation { degree: self.degree, images: self.images.iter().map(|(s, f)| (*s, f.substitute(vals))).collect() }
    }
}

/// Canonical integrand key: a plain trace (`star = None`) or a Hodge pairing
/// in the component frame with the star marker at `star`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceWord {
    pub letters: Word,
    pub star: Option<usize>,
}

impl TraceWord {
    /// `(neg, L, R)` with `key = (−1)^neg tr(L * R)`.
    pub fn to_pair(&self) -> (bool, Word, Word) {
        let m = self.star.unwrap_or(0);
        let l = self.letters[..m].to_vec();
        let r = self.letters[m..].to_vec();
        let neg = eps(&l) ^ eps(&r) ^ odd(ghost_of(&l) * form_of(&l));
        (neg, l, r)
    }

    pub fn render(&self) -> String {
        match self.star {
            None => format!("int tr( {} )", render_word(&self.letters)),
            Some(_) => {
                let (neg, l, r) = self.to_pair();
                let s = if neg { "-" } else { "" };
                format!("{s}int tr( {} * {} )", render_word(&l), render_word(&r))
            }
        }
    }
}

/// Least rotation of a cyclic word, each rotation by a block `a` costing
/// `(−1)^{cost(a, rest)}`; `None` if the word equals minus itself.
fn canon_cyclic(w: &[Letter], cost: impl Fn(&[Letter], &[Letter]) -> i32) -> Option<(bool, Word)> {
    let n = w.len();
    if n == 0 {
        return Some((false, Word::new()));
    }
    let mut best: Option<(Word, bool)> = None;
    for r in 0..n {
        let rot = rotate(w, r);
        let neg = odd(cost(&w[..r], &w[r..]));
        match &best {
            Some((b, bn)) if *b == rot => {
                if *bn != neg {
                    return None;
                }
            }
            Some((b, _)) if *b < rot => {}
            _ => best = Some((rot, neg)),
        }
    }
    // a self-rotation with opposite sign may sit at a later index than the minimum
    let (b, bn) = best.unwrap();
    for r in 0..n {
        if rotate(w, r) == b && odd(cost(&w[..r], &w[r..])) != bn {
            return None;
        }
    }
    Some((bn, b))
}

/// Canonical key of the component-frame symbol with markers at `0` and `m`.
fn canon_pair(w: Word, m: usize) -> Option<(bool, TraceWord)> {
    let n = w.len();
    let g_all = ghost_of(&w);
    let Some(k) = w.iter().position(|l| l.form() > 0) else {
        return canon_cyclic(&w, |a, b| ghost_of(a) * ghost_of(b)).map(|(neg, letters)| (neg, TraceWord { letters, star: Some(0) }));
    };
    debug_assert!(m > k, "left side without positive forms");
    let gk = ghost_of(&w[..k]);
    let neg1 = odd(gk * (g_all - gk));
    let w1 = rotate(&w, k);
    let mut m1 = (m + n - k) % n;
    while w1[m1].form() == 0 {
        m1 = (m1 + 1) % n;
    }
    debug_assert!(m1 != 0, "right side without positive forms");
    let gl = ghost_of(&w1[..m1]);
    let w2 = rotate(&w1, m1);
    let m2 = n - m1;
    let neg2 = neg1 ^ odd(gl * (g_all - gl));
    let c1 = (w1, m1);
    let c2 = (w2, m2);
    let (neg, (letters, star)) = match c1.cmp(&c2) {
        std::cmp::Ordering::Equal => {
            if neg1 != neg2 {
                return None;
            }
            (neg1, c1)
        }
        std::cmp::Ordering::Less => (neg1, c1),
        std::cmp::Ordering::Greater => (neg2, c2),
    };
    Some((neg, TraceWord { letters, star: Some(star) }))
}

/// Integrated local functional: a combination of canonical trace words.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BvExpr {
    pub terms: BTreeMap<TraceWord, MPoly>,
}

impl BvExpr {
    pub fn zero() -> Self {
        BvExpr::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: TraceWord, c: MPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k.clone()).or_insert_with(|| MPoly::zero(NC));
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&cconst(-Q::one()))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &MPoly) -> Self {
        let mut r = Self::zero();
        for (k, v) in &self.terms {
            r.add_term(k.clone(), v.mul(c));
        }
        r
    }

    /// `∫ tr(X)`.
    pub fn trace(x: &FormPoly) -> Self {
        let mut r = Self::zero();
        for (w, c) in &x.terms {
            if let Some((neg, letters)) = canon_cyclic(w, |a, b| total_of(a) * total_of(b)) {
                r.add_term(TraceWord { letters, star: None }, if neg { c.neg() } else { c.clone() });
            }
        }
        r
    }

    /// `∫ tr(X * Y)`.
    pub fn pair(x: &FormPoly, y: &FormPoly) -> Result<Self, BvError> {
        let mut r = Self::zero();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                let p = form_of(a);
                if p != form_of(b) {
                    return Err(BvError::FormMismatch(p, form_of(b)));
                }
                let neg0 = eps(a) ^ eps(b) ^ odd(ghost_of(a) * p);
                let w: Word = a.iter().chain(b).copied().collect();
                if let Some((neg1, key)) = canon_pair(w, a.len()) {
                    let c = ca.mul(cb);
                    r.add_term(key, if neg0 ^ neg1 { c.neg() } else { c });
                }
            }
        }
        Ok(r)
    }

    /// Ghost degree if homogeneous; `None` for zero or mixed expressions.
    pub fn ghost_degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|k| ghost_of(&k.letters));
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn substitute(&self, vals: &[MPoly]) -> Self {
        let mut r = Self::zero();
        for (k, c) in &self.terms {
            r.add_term(k.clone(), c.substitute(vals));
        }
        r
    }

    /// Coefficient of each source `K_φ` as a form, keyed by the field `φ`:
    /// `F = F_0 + Σ ∫ tr(X_φ * K_φ)`.
    pub fn source_coefficients(&self) -> Result<BTreeMap<Sym, FormPoly>, BvError> {
        let mut out: BTreeMap<Sym, FormPoly> = BTreeMap::new();
        for (key, c) in &self.terms {
            let ks: Vec<usize> = key.letters.iter().enumerate().filter(|(_, l)| l.sym.is_source()).map(|(i, _)| i).collect();
            match ks.len() {
                0 => continue,
                1 => {}
                _ => return Err(BvError::NonlinearSource(key.render())),
            }
            let j = ks[0];
            let kl = key.letters[j];
            let star = key.star.ok_or_else(|| BvError::Unsupported(key.render()))?;
            if kl.d {
                return Err(BvError::Unsupported(key.render()));
            }
            let n = key.letters.len();
            if kl.form() > 0 {
                // K must be the only positive-form letter on its side
                let next = (1..n).map(|s| (j + s) % n).find(|&i| key.letters[i].form() > 0).unwrap_or(j);
                let markers = [0, star];
                if !(markers.contains(&j) && markers.contains(&next)) || next == j {
                    return Err(BvError::Unsupported(key.render()));
                }
            } else if key.letters.iter().any(|l| l.form() > 0) {
                return Err(BvError::Unsupported(key.render()));
            }
            let g_all = ghost_of(&key.letters);
            let gp = ghost_of(&key.letters[..=j]);
            let rot = rotate(&key.letters, j + 1);
            let lw = rot[..n - 1].to_vec();
            let neg = odd(gp * (g_all - gp)) ^ eps(&lw) ^ odd(ghost_of(&lw) * form_of(&lw));
            let field = kl.sym.field_of().unwrap();
            out.entry(field).or_default().add_term(lw, if neg { c.neg() } else { c.clone() });
        }
        out.retain(|_, f| !f.is_zero());
        Ok(out)
    }

    /// `D_F`: the derivation replacing each field `φ` by `δF/δK_φ`.
    pub fn pairing_derivation(&self) -> Result<Derivation, BvError> {
        let images = self.source_coefficients()?;
        let mut degree = None;
        for (s, f) in &images {
            let d = f.degree().ok_or_else(|| BvError::Inhomogeneous(f.render()))? - Letter::new(*s).total();
            if degree.is_some_and(|x| x != d) {
                return Err(BvError::Inhomogeneous(self.render()));
            }
            degree = Some(d);
        }
        Ok(Derivation { degree: degree.unwrap_or(0), images })
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0\n".into();
        }
        let mut out = String::new();
        for (k, c) in &self.terms {
            writeln!(out, "{}  {}", render_coeff(c), k.render()).unwrap();
        }
        out
    }
}

/// The antibracket `(F, G) = D_G(F) − (−1)^{(|F|+1)(|G|+1)} D_F(G)`, where
/// `D_G` grafts `δG/δK_φ` into every occurrence of `φ`: the pairing
/// `(K_φ, φ) = δ` extended by the graded Leibniz rule. Degrees are ghost
/// degrees; both arguments must be at most linear in the sources.
pub fn antibracket(f: &BvExpr, g: &BvExpr) -> Result<BvExpr, BvError> {
    let (Some(df), Some(dg)) = (f.ghost_degree(), g.ghost_degree()) else {
        if f.is_zero() || g.is_zero() {
            return Ok(BvExpr::zero());
        }
        return Err(BvError::Inhomogeneous("antibracket argument".into()));
    };
    let a = g.pairing_derivation()?.apply_expr(f)?;
    let b = f.pairing_derivation()?.apply_expr(g)?;
    let s = if odd((df + 1) * (dg + 1)) { Q::one() } else { -Q::one() };
    Ok(a.add(&b.scale(&cconst(s))))
}

/// One term `c ∫ tr(L * R)` of an action.
#[derive(Clone, Debug)]
pub struct ActionTerm {
    pub coeff: MPoly,
    pub left: FormPoly,
    pub right: FormPoly,
}

/// An action as a list of pairings; at most linear in the sources.
#[derive(Clone, Debug, Default)]
pub struct ActionSpec {
    pub terms: Vec<ActionTerm>,
}

fn sym(s: Sym) -> FormPoly {
    FormPoly::sym(s)
}

fn dsym(s: Sym) -> FormPoly {
    FormPoly::dsym(s)
}

fn cq(n: i64, d: i64) -> MPoly {
    cconst(q(n, d))
}

impl ActionSpec {
    pub fn push(&mut self, coeff: MPoly, left: FormPoly, right: FormPoly) {
        self.terms.push(ActionTerm { coeff, left, right });
    }

    /// Pure Yang–Mills with an independent coupling per interaction.
    pub fn yang_mills() -> Self {
        use Sym::*;
        let mut s = ActionSpec::default();
        let aa = sym(A).bracket(&sym(A));
        s.push(cq(-1, 1), dsym(A), dsym(A));
        s.push(cvar(L3).neg(), dsym(A), aa.clone());
        s.push(cvar(L4).scale(&q(-1, 4)), aa.clone(), aa);
        s.push(cq(-1, 1), sym(A), dsym(H));
        s.push(cq(1, 1), dsym(OmegaBar), dsym(Omega));
        s.push(cvar(XI).scale(&q(1, 2)), sym(H), sym(H));
        s.push(cvar(LG), dsym(OmegaBar), sym(A).bracket(&sym(Omega)));
        s.push(cq(-1, 1), dsym(Omega), sym(KA));
        s.push(cvar(LA).neg(), sym(A).bracket(&sym(Omega)), sym(KA));
        s.push(cq(-1, 1), sym(H), sym(KOmegaBar));
        s.push(cvar(LW).scale(&q(-1, 2)), sym(Omega).bracket(&sym(Omega)), sym(KOmega));
        s
    }

    /// The same action with every interaction coupling set to zero.
    pub fn free_yang_mills() -> Self {
        let mut vals: Vec<MPoly> = (0..NC).map(|_| cconst(Q::zero())).collect();
        vals[XI] = cvar(XI);
        Self::yang_mills().substitute(&vals)
    }

    pub fn substitute(&self, vals: &[MPoly]) -> Self {
        ActionSpec {
            terms: self
                .terms
                .iter()
                .map(|t| ActionTerm { coeff: t.coeff.substitute(vals), left: t.left.clone(), right: t.right.clone() })
                .filter(|t| !t.coeff.is_zero())
                .collect(),
        }
    }

    pub fn expr(&self) -> Result<BvExpr, BvError> {
        let mut e = BvExpr::zero();
        for t in &self.terms {
            e = e.add(&BvExpr::pair(&t.left, &t.right)?.scale(&t.coeff));
        }
        Ok(e)
    }

    /// Source-free part `S_0`.
    pub fn source_free(&self) -> ActionSpec {
        let has_source = |f: &FormPoly| f.terms.keys().any(|w| w.iter().any(|l| l.sym.is_source()));
        ActionSpec { terms: self.terms.iter().filter(|t| !has_source(&t.left) && !has_source(&t.right)).cloned().collect() }
    }

    /// `s` applied term by term at the level of forms, then canonicalized.
    pub fn apply_s(&self, s: &Derivation) -> Result<BvExpr, BvError> {
        let mut e = BvExpr::zero();
        for t in &self.terms {
            for (w, c) in &t.left.terms {
                let l = FormPoly { terms: [(w.clone(), c.clone())].into() };
                let sg = sign(odd(s.degree * total_of(w)));
                let a = BvExpr::pair(&s.apply(&l), &t.right)?;
                let b = BvExpr::pair(&l, &s.apply(&t.right))?;
                e = e.add(&a.add(&b.scale(&cconst(sg))).scale(&t.coeff));
            }
        }
        Ok(e)
    }
}

/// `sφ`, read off as the coefficient of `K_φ`; an empty map for an action
/// without sources.
pub fn brst_from_action(s: &ActionSpec) -> Result<Derivation, BvError> {
    s.expr()?.pairing_derivation()
}

/// The Yang–Mills BRST rules, written out by hand.
pub fn yang_mills_brst() -> Derivation {
    use Sym::*;
    let mut images = BTreeMap::new();
    images.insert(A, dsym(Omega).neg().sub(&sym(A).bracket(&sym(Omega)).scale(&cvar(LA))));
    images.insert(Omega, sym(Omega).bracket(&sym(Omega)).scale(&cvar(LW).scale(&q(-1, 2))));
    images.insert(OmegaBar, sym(H).neg());
    Derivation { degree: 1, images }
}

/// Coefficient polynomials of `(S,S)` on independent trace words, monic and
/// deduplicated.
pub fn master_constraints(s: &ActionSpec) -> Result<Vec<MPoly>, BvError> {
    let e = s.expr()?;
    let ss = antibracket(&e, &e)?;
    let mut out: Vec<MPoly> = ss.terms.values().map(monic).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Outcome of comparing master-equation constraints with the simple-theory
/// ideal `I′ = ⟨λ_{v′}^{N(v)−2} − λ_v^{N(v′)−2}⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleTheoryReport {
    pub simple: bool,
    /// Coupling of the first valence-3 vertex.
    pub fundamental: Option<String>,
    /// `λ_v ↦ g^{N(v)−2}`, each verified in the constraint ideal.
    pub substitution: Vec<(String, String)>,
}

/// Generators of `I′` for the couplings of vertices of valence > 2, in the
/// variables `names`.
pub fn simple_ideal(spec: &TheorySpec, names: &[String]) -> Vec<MPoly> {
    let n = names.len();
    let big: Vec<(usize, u32)> = spec
        .vertices
        .iter()
        .filter(|v| v.legs.len() > 2)
        .filter_map(|v| names.iter().position(|x| *x == v.coupling).map(|i| (i, v.legs.len() as u32)))
        .collect();
    let mut out = Vec::new();
    for (a, &(i, ni)) in big.iter().enumerate() {
        for &(j, nj) in &big[a + 1..] {
            out.push(MPoly::var(n, j).pow(ni - 2).sub(&MPoly::var(n, i).pow(nj - 2)));
        }
    }
    out
}

pub fn simple_theory_check(constraints: &[MPoly], names: &[String], spec: &TheorySpec) -> SimpleTheoryReport {
    let n = names.len();
    let ip = simple_ideal(spec, names);
    let simple = same_ideal(constraints, &ip);
    let fund = spec.vertices.iter().find(|v| v.legs.len() == 3).and_then(|v| names.iter().position(|x| *x == v.coupling));
    let mut substitution = Vec::new();
    if let Some(g) = fund {
        let gb = groebner_basis(constraints);
        for v in spec.vertices.iter().filter(|v| v.legs.len() > 2) {
            let Some(i) = names.iter().position(|x| *x == v.coupling) else { continue };
            let target = MPoly::var(n, g).pow(v.legs.len() as u32 - 2);
            if ideal_contains(&gb, &MPoly::var(n, i).sub(&target)) {
                substitution.push((v.coupling.clone(), target.render(names)));
            }
        }
    }
    SimpleTheoryReport { simple, fundamental: fund.map(|g| names[g].clone()), substitution }
}

/// `λ_v ↦ g^{N(v)−2}` with `g = λ_{A3}`.
pub fn ym_couplings() -> Vec<MPoly> {
    let g = cvar(L3);
    vec![g.clone(), g.pow(2), g.clone(), g.clone(), g, cvar(XI)]
}

/// The coupling relations expected from the Yang–Mills master equation, written out by hand.
pub fn expected_ym_relations() -> Vec<MPoly> {
    vec![
        cvar(LA).sub(&cvar(LW)),
        cvar(LA).sub(&cvar(L3)),
        cvar(L4).sub(&cvar(L3).mul(&cvar(LA))),
        cvar(LA).sub(&cvar(LG)),
        cvar(LW).sub(&cvar(LG)),
    ]
}

/// `s²(A)` written out by hand: `(λ_a − λ_w)[dω,ω] + ½(λ_a² − λ_a λ_w)[A,[ω,ω]]`.
pub fn expected_s2_a() -> FormPoly {
    use Sym::*;
    let (la, lw) = (cvar(LA), cvar(LW));
    let t1 = dsym(Omega).bracket(&sym(Omega)).scale(&la.sub(&lw));
    let t2 = sym(A).bracket(&sym(Omega).bracket(&sym(Omega))).scale(&la.mul(&la).sub(&la.mul(&lw)).scale(&q(1, 2)));
    t1.add(&t2)
}

/// If `x = c·y` for a rational `c`, that `c`.
fn ratio(x: &BvExpr, y: &BvExpr) -> Option<Q> {
    if x.terms.len() != y.terms.len() {
        return None;
    }
    let mut r: Option<Q> = None;
    for (k, cy) in &y.terms {
        let cx = x.terms.get(k)?;
        let (e, v) = cy.terms.iter().next()?;
        let c = cx.coeff(e) / v;
        if cx != &cy.scale(&c) || r.as_ref().is_some_and(|r| *r != c) {
            return None;
        }
        r = Some(c);
    }
    r
}

/// Same for forms.
fn form_ratio(x: &FormPoly, y: &FormPoly) -> Option<Q> {
    let ex = BvExpr { terms: x.terms.iter().map(|(w, c)| (TraceWord { letters: w.clone(), star: None }, c.clone())).collect() };
    let ey = BvExpr { terms: y.terms.iter().map(|(w, c)| (TraceWord { letters: w.clone(), star: None }, c.clone())).collect() };
    ratio(&ex, &ey)
}

fn render_polys(ps: &[MPoly]) -> String {
    ps.iter().map(|p| p.render(&coupling_names())).collect::<Vec<_>>().join(", ")
}

/// Whether the built-in Yang–Mills action covers every coupling of `spec`.
pub fn has_bv_action(spec: &TheorySpec) -> bool {
    spec.couplings().iter().all(|c| COUPLINGS.contains(&c.as_str()))
}

/// The Yang–Mills master-equation computation: BRST rules, `s²`, `sS_0`,
/// the constraints from `(S,S) = 0`, and the reduction to a simple theory.
pub fn check_master(spec: &TheorySpec) -> Check {
    let mut check = Check::new("master");
    let action = ActionSpec::yang_mills();
    let fail = |e: BvError| Status::Fail(e.to_string());
    let s = match brst_from_action(&action) {
        Ok(s) => s,
        Err(e) => {
            check.push("BRST differential read off from S", fail(e));
            return check;
        }
    };
    check.push(
        "BRST differential read off from S matches the hand-written rules",
        Status::from_bool(s == yang_mills_brst(), || format!("{:?}", s.images.iter().map(|(k, v)| (k.name(), v.render())).collect::<Vec<_>>())),
    );
    let d = |x: &FormPoly| x.d();
    let mut anti = Status::Pass;
    for sy in Sym::ALL {
        let x = FormPoly::sym(sy);
        let lhs = s.apply(&d(&x)).add(&d(&s.apply(&x)));
        if !lhs.is_zero() {
            anti = Status::Fail(format!("{}: {}", sy.name(), lhs.render()));
            break;
        }
    }
    check.push("sd + ds = 0 on every symbol", anti);
    let s2a = s.apply(&s.apply(&sym(Sym::A)));
    check.note(format!("s^2(A) = {}", s2a.render()));
    let want = expected_s2_a();
    check.push(
        "s^2(A) = (l_a - l_w)[domega,omega] + 1/2 (l_a^2 - l_a l_w)[A,[omega,omega]]",
        Status::from_bool(s2a == want, || match form_ratio(&s2a, &want) {
            Some(r) => format!("equal up to the factor {}", fmt_q(&r)),
            None => s2a.render(),
        }),
    );
    let mut tied: Vec<MPoly> = (0..NC).map(cvar).collect();
    tied[LW] = cvar(LA);
    let st = s.substitute(&tied);
    let mut nil = Status::Pass;
    for sy in Sym::ALL {
        for x in [FormPoly::sym(sy), FormPoly::dsym(sy)] {
            let v = st.apply(&st.apply(&x));
            if !v.is_zero() && nil == Status::Pass {
                nil = Status::Fail(format!("s^2({}) = {}", render_word(x.terms.keys().next().unwrap()), v.render()));
            }
        }
    }
    check.push("s^2 = 0 on every symbol once l_AomegaK_A = l_omega2K_omega", nil);
    // sS_0 for the two groups of source-free terms
    let s0 = action.source_free();
    let group = |idx: &[usize]| ActionSpec { terms: idx.iter().map(|&i| s0.terms[i].clone()).collect() };
    let g1 = group(&[0, 1, 2]);
    let g2 = group(&[3, 4, 5, 6]);
    let pairs = || -> Result<(BvExpr, BvExpr, BvExpr, BvExpr), BvError> {
        use Sym::*;
        let e1 = BvExpr::pair(&dsym(A), &sym(A).bracket(&dsym(Omega)))?.scale(&cvar(LA).sub(&cvar(L3)).scale(&qi(2))).add(
            &BvExpr::pair(&dsym(Omega).bracket(&sym(A)), &sym(A).bracket(&sym(A)))?.scale(&cvar(L4).sub(&cvar(L3).mul(&cvar(LA)))),
        );
        let e2 = BvExpr::pair(&sym(A).bracket(&sym(Omega)), &dsym(H))?
            .scale(&cvar(LA).sub(&cvar(LG)))
            .add(&BvExpr::pair(&dsym(OmegaBar), &dsym(Omega).bracket(&sym(Omega)))?.scale(&cvar(LW).sub(&cvar(LG))));
        Ok((g1.apply_s(&s)?, e1, g2.apply_s(&s)?, e2))
    };
    match pairs() {
        Ok((s1, e1, s2, e2)) => {
            check.note(format!("s(-dA*dA - l_A3 dA*[A,A] - 1/4 l_A4 [A,A]*[A,A]) =\n{}", indent(&s1.render())));
            check.push(
                "s(gauge terms) = 2(l_a - l_A3) dA*[A,domega] + (l_A4 - l_A3 l_a)[domega,A]*[A,A]",
                Status::from_bool(s1 == e1, || s1.render().replace('\n', "; ")),
            );
            // e2 leaves out a term proportional to l_ghost (l_a - l_w), which vanishes once l_a = l_w
            let rest = s2.sub(&e2);
            check.note(format!("s(gauge-fixing and ghost terms) - expected =\n{}", indent(&rest.render())));
            check.push(
                "s(gauge-fixing and ghost terms) = (l_a - l_ghost)[A,omega]*dh + (l_w - l_ghost) domegabar*[domega,omega] mod l_a = l_w",
                Status::from_bool(rest.substitute(&tied).is_zero(), || rest.render().replace('\n', "; ")),
            );
        }
        Err(e) => check.push("sS_0", fail(e)),
    }
    // (S,S) two ways
    let both = || -> Result<(BvExpr, BvExpr), BvError> {
        let e = action.expr()?;
        let ss = antibracket(&e, &e)?;
        let mut via_s = s0.apply_s(&s)?;
        for (phi, img) in &s.images {
            let k = phi.source().unwrap();
            via_s = via_s.add(&BvExpr::pair(&s.apply(img), &FormPoly::sym(k))?);
        }
        Ok((ss, via_s.scale(&cconst(qi(2)))))
    };
    match both() {
        Ok((ss, via)) => check.push("(S,S) = 2 (s S_0 + sum <s^2 phi, K_phi>)", Status::from_bool(ss == via, || ss.sub(&via).render())),
        Err(e) => check.push("(S,S)", fail(e)),
    }
    let cons = match master_constraints(&action) {
        Ok(c) => c,
        Err(e) => {
            check.push("master constraints", fail(e));
            return check;
        }
    };
    check.note(format!("master constraints: {}", render_polys(&cons)));
    let gb = groebner_basis(&cons);
    check.note(format!("reduced Groebner basis: {}", render_polys(&gb)));
    check.push(
        "constraint ideal = <l_a - l_w, l_a - l_A3, l_A4 - l_A3 l_a, l_a - l_ghost, l_w - l_ghost>",
        Status::from_bool(same_ideal(&cons, &expected_ym_relations()), || render_polys(&gb)),
    );
    let names = coupling_names();
    let rep = simple_theory_check(&cons, &names, spec);
    check.note(format!(
        "fundamental coupling g = {}; {}",
        rep.fundamental.clone().unwrap_or_else(|| "none".into()),
        rep.substitution.iter().map(|(a, b)| format!("{a} -> {b}")).collect::<Vec<_>>().join(", ")
    ));
    check.push("constraint ideal = I' (simple theory)", Status::from_bool(rep.simple, || render_polys(&simple_ideal(spec, &names))));
    check.push(
        "every coupling is a power of g = lambda_A3",
        Status::from_bool(rep.fundamental.as_deref() == Some("lambda_A3") && rep.substitution.len() == 5, || format!("{:?}", rep.substitution)),
    );
    let sub = action.substitute(&ym_couplings());
    let after = sub.expr().and_then(|e| antibracket(&e, &e));
    check.push(
        "(S,S) = 0 after l_A4 = g^2, l_ghost = l_a = l_w = g",
        match after {
            Ok(x) => Status::from_bool(x.is_zero(), || x.render().replace('\n', "; ")),
            Err(e) => fail(e),
        },
    );
    let sg = s.substitute(&ym_couplings());
    let nil = Sym::ALL.iter().all(|&sy| sg.apply(&sg.apply(&FormPoly::sym(sy))).is_zero() && sg.apply(&sg.apply(&FormPoly::dsym(sy))).is_zero());
    check.push("s^2 = 0 after the substitution", Status::from_bool(nil, || "nonzero".into()));
    check.push(
        "free action: no constraints",
        match master_constraints(&ActionSpec::free_yang_mills()) {
            Ok(c) => Status::from_bool(c.is_empty(), || render_polys(&c)),
            Err(e) => fail(e),
        },
    );
    check
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}

/// Parse `int tr( <factor> * <factor> )` or `int tr( <factor> )`, where a
/// factor is a product of `sym`, `d sym` (or `dsym`) and `[f, g]`.
pub fn parse_trace(text: &str) -> Result<BvExpr, BvError> {
    let toks = tokenize(text);
    let mut p = Parser { toks, pos: 0 };
    p.expect("int")?;
    p.expect("tr")?;
    p.expect("(")?;
    let left = p.product()?;
    let out = if p.peek() == Some("*") {
        p.pos += 1;
        let right = p.product()?;
        BvExpr::pair(&left, &right)?
    } else {
        BvExpr::trace(&left)
    };
    p.expect(")")?;
    if p.pos != p.toks.len() {
        return Err(BvError::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        if ch.is_whitespace() || "[],*()".contains(ch) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct Parser {
    toks: Vec<String>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|s| s.as_str())
    }

    fn expect(&mut self, t: &str) -> Result<(), BvError> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(BvError::Parse(format!("expected `{t}` at token {}, found {:?}", self.pos, self.peek())))
        }
    }

    fn product(&mut self) -> Result<FormPoly, BvError> {
        let mut f = self.factor()?;
        while matches!(self.peek(), Some(t) if t != "*" && t != ")" && t != "," && t != "]") {
            f = f.mul(&self.factor()?);
        }
        Ok(f)
    }

    fn factor(&mut self) -> Result<FormPoly, BvError> {
        let t = self.peek().ok_or_else(|| BvError::Parse("unexpected end".into()))?.to_string();
        self.pos += 1;
        if t == "[" {
            let a = self.product()?;
            self.expect(",")?;
            let b = self.product()?;
            self.expect("]")?;
            return Ok(a.bracket(&b));
        }
        if t == "d" {
            let n = self.peek().ok_or_else(|| BvError::Parse("`d` without symbol".into()))?.to_string();
            self.pos += 1;
            let s = Sym::from_name(&n).ok_or_else(|| BvError::Parse(format!("unknown symbol `{n}`")))?;
            return Ok(FormPoly::dsym(s));
        }
        if let Some(s) = Sym::from_name(&t) {
            return Ok(FormPoly::sym(s));
        }
        if let Some(s) = t.strip_prefix('d').and_then(Sym::from_name) {
            return Ok(FormPoly::dsym(s));
        }
        Err(BvError::Parse(format!("unknown symbol `{t}`")))
    }
}

/// A finite-dimensional BV algebra: polynomials in fields `φ_i` of ghost
/// degree `gh_i` and sources `K_i` of ghost degree `−gh_i − 1`, with the
/// antibracket and `Δ̃` built from left and right partial derivatives.
pub mod toy {
    use super::*;

    /// Exponent vector over `φ_0..φ_{n−1}, K_0..K_{n−1}`; odd variables have
    /// exponent at most one and are ordered by index.
    pub type Mono = Vec<u32>;

    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct SPoly {
        pub terms: BTreeMap<Mono, Q>,
    }

    #[derive(Clone, Debug)]
    pub struct ToyBv {
        pub ghosts: Vec<i32>,
    }

    impl ToyBv {
        pub fn new(ghosts: Vec<i32>) -> Self {
            ToyBv { ghosts }
        }

        pub fn n(&self) -> usize {
            self.ghosts.len()
        }

        pub fn ghost(&self, v: usize) -> i32 {
            let n = self.n();
            if v < n {
                self.ghosts[v]
            } else {
                -self.ghosts[v - n] - 1
            }
        }

        fn is_odd(&self, v: usize) -> bool {
            odd(self.ghost(v))
        }

        pub fn zero(&self) -> SPoly {
            SPoly { terms: BTreeMap::new() }
        }

        pub fn one(&self) -> SPoly {
            self.mono(vec![0; 2 * self.n()], Q::one())
        }

        pub fn var(&self, v: usize) -> SPoly {
            let mut e = vec![0; 2 * self.n()];
            e[v] = 1;
            self.mono(e, Q::one())
        }

        fn mono(&self, e: Mono, c: Q) -> SPoly {
            let mut p = self.zero();
            add_term(&mut p, e, c);
            p
        }

        pub fn degree_of(&self, e: &Mono) -> i32 {
            e.iter().enumerate().map(|(v, &k)| k as i32 * self.ghost(v)).sum()
        }

        /// Ghost degree if homogeneous.
        pub fn degree(&self, p: &SPoly) -> Option<i32> {
            let mut it = p.terms.keys().map(|e| self.degree_of(e));
            let d = it.next()?;
            it.all(|x| x == d).then_some(d)
        }

        pub fn add(&self, a: &SPoly, b: &SPoly) -> SPoly {
            let mut r = a.clone();
            for (e, c) in &b.terms {
                add_term(&mut r, e.clone(), c.clone());
            }
            r
        }

        pub fn scale(&self, a: &SPoly, c: &Q) -> SPoly {
            let mut r = self.zero();
            for (e, v) in &a.terms {
                add_term(&mut r, e.clone(), v * c);
            }
            r
        }

        pub fn sub(&self, a: &SPoly, b: &SPoly) -> SPoly {
            self.add(a, &self.scale(b, &-Q::one()))
        }

        pub fn mul(&self, a: &SPoly, b: &SPoly) -> SPoly {
            let mut r = self.zero();
            for (ea, ca) in &a.terms {
                'pairs: for (eb, cb) in &b.terms {
                    let mut swaps = 0;
                    for v in 0..ea.len() {
                        if self.is_odd(v) {
                            if ea[v] > 0 && eb[v] > 0 {
                                continue 'pairs;
                            }
                            if eb[v] > 0 {
                                swaps += (v + 1..ea.len()).filter(|&u| self.is_odd(u) && ea[u] > 0).count();
                            }
                        }
                    }
                    let e: Mono = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    let c = ca * cb;
                    add_term(&mut r, e, if swaps % 2 == 1 { -c } else { c });
                }
            }
            r
        }

        fn deriv(&self, p: &SPoly, v: usize, left: bool) -> SPoly {
            let mut r = self.zero();
            for (e, c) in &p.terms {
                if e[v] == 0 {
                    continue;
                }
                let mut f = Q::from_integer(e[v].into()) * c;
                if self.is_odd(v) {
                    let range: Vec<usize> = if left { (0..v).collect() } else { (v + 1..e.len()).collect() };
                    if range.iter().filter(|&&u| self.is_odd(u) && e[u] > 0).count() % 2 == 1 {
                        f = -f;
                    }
                }
                let mut ne = e.clone();
                ne[v] -= 1;
                add_term(&mut r, ne, f);
            }
            r
        }

        pub fn dl(&self, p: &SPoly, v: usize) -> SPoly {
            self.deriv(p, v, true)
        }

        pub fn dr(&self, p: &SPoly, v: usize) -> SPoly {
            self.deriv(p, v, false)
        }

        /// `(F,G) = Σ_i ∂_R F/∂φ_i ∂_L G/∂K_i − ∂_R F/∂K_i ∂_L G/∂φ_i`.
        pub fn bracket(&self, f: &SPoly, g: &SPoly) -> SPoly {
            let n = self.n();
            let mut r = self.zero();
            for i in 0..n {
                r = self.add(&r, &self.mul(&self.dr(f, i), &self.dl(g, n + i)));
                r = self.sub(&r, &self.mul(&self.dr(f, n + i), &self.dl(g, i)));
            }
            r
        }

        /// `Δ̃F = Σ_i (−1)^{gh_i} ∂_L/∂K_i ∂_L/∂φ_i F`.
        pub fn delta(&self, f: &SPoly) -> SPoly {
            let n = self.n();
            let mut r = self.zero();
            for i in 0..n {
                r = self.add(&r, &self.scale(&self.dl(&self.dl(f, i), n + i), &pm(self.ghosts[i])));
            }
            r
        }

        /// Random homogeneous element of ghost degree `deg` with at most
        /// `terms` monomials of polynomial degree ≤ 3.
        pub fn random(&self, rng: &mut ChaCha8Rng, deg: i32, terms: usize) -> SPoly {
            let nv = 2 * self.n();
            let mut p = self.zero();
            for _ in 0..terms * 20 {
                if p.terms.len() >= terms {
                    break;
                }
                let k = rng.gen_range(0..=3);
                let mut e = vec![0u32; nv];
                for _ in 0..k {
                    let v = rng.gen_range(0..nv);
                    if self.is_odd(v) && e[v] > 0 {
                        continue;
                    }
                    e[v] += 1;
                }
                if self.degree_of(&e) == deg {
                    add_term(&mut p, e, Q::from_integer(rng.gen_range(-3i64..=3).into()));
                }
            }
            p
        }
    }

    fn add_term(p: &mut SPoly, e: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let v = p.terms.entry(e.clone()).or_insert_with(Q::zero);
        *v += c;
        if v.is_zero() {
            p.terms.remove(&e);
        }
    }

    fn pm(k: i32) -> Q {
        if odd(k) {
            -Q::one()
        } else {
            Q::one()
        }
    }

    /// Gerstenhaber and BV identities on random homogeneous triples.
    pub fn check_toy(seed: u64, samples: usize) -> Check {
        let mut check = Check::new("bv-toy");
        let alg = ToyBv::new(vec![0, 1, -1]);
        check.note(format!("fields of ghost degree {:?}, sources of ghost degree {:?}", alg.ghosts, alg.ghosts.iter().map(|g| -g - 1).collect::<Vec<_>>()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<(&str, Status)> = vec![
            ("graded antisymmetry (x,y) = -(-1)^{(|x|+1)(|y|+1)} (y,x)", Status::Pass),
            ("graded Leibniz (x,yz) = (x,y)z + (-1)^{(|x|+1)|y|} y(x,z)", Status::Pass),
            ("graded Jacobi (x,(y,z)) = ((x,y),z) + (-1)^{(|x|+1)(|y|+1)} (y,(x,z))", Status::Pass),
            ("Delta^2 = 0", Status::Pass),
            ("(-1)^{|x|} (x,y) = Delta(xy) - Delta(x)y - (-1)^{|x|} x Delta(y)", Status::Pass),
        ];
        let mut tested = 0;
        for _ in 0..samples {
            let (dx, dy, dz) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            let x = alg.random(&mut rng, dx, 3);
            let y = alg.random(&mut rng, dy, 3);
            let z = alg.random(&mut rng, dz, 3);
            if x.terms.is_empty() || y.terms.is_empty() || z.terms.is_empty() {
                continue;
            }
            tested += 1;
            let b = |a: &SPoly, c: &SPoly| alg.bracket(a, c);
            let m = |a: &SPoly, c: &SPoly| alg.mul(a, c);
            let sc = |a: &SPoly, k: i32| alg.scale(a, &pm(k));
            let results = [
                b(&x, &y) == alg.scale(&sc(&b(&y, &x), (dx + 1) * (dy + 1)), &-Q::one()),
                b(&x, &m(&y, &z)) == alg.add(&m(&b(&x, &y), &z), &sc(&m(&y, &b(&x, &z)), (dx + 1) * dy)),
                b(&x, &b(&y, &z)) == alg.add(&b(&b(&x, &y), &z), &sc(&b(&y, &b(&x, &z)), (dx + 1) * (dy + 1))),
                alg.delta(&alg.delta(&x)).terms.is_empty(),
                sc(&b(&x, &y), dx) == alg.sub(&alg.sub(&alg.delta(&m(&x, &y)), &m(&alg.delta(&x), &y)), &sc(&m(&x, &alg.delta(&y)), dx)),
            ];
            for (row, ok) in rows.iter_mut().zip(results) {
                if !ok && row.1 == Status::Pass {
                    row.1 = Status::Fail(format!("degrees ({dx},{dy},{dz})"));
                }
            }
        }
        check.note(format!("{tested} random homogeneous triples"));
        for (l, s) in rows {
            check.push(l, s);
        }
        check
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sym::*;

    fn one() -> MPoly {
        cconst(Q::one())
    }

    #[test]
    fn degree_tables() {
        let rows: Vec<(i32, i32, i32)> = [A, Omega, OmegaBar, H, KA, KOmega, KOmegaBar, KH]
            .iter()
            .map(|&s| (s.ghost(), s.form(), s.ghost() + s.form()))
            .collect();
        assert_eq!(rows, vec![(0, 1, 1), (1, 0, 1), (-1, 0, -1), (0, 0, 0), (-1, 1, 0), (-2, 0, -2), (0, 0, 0), (-1, 0, -1)]);
        assert_eq!(Letter::dsym(A).form(), 2);
        assert!(FormPoly::dsym(A).d().is_zero());
    }

    #[test]
    fn graded_bracket_identities() {
        let (a, w) = (sym(A), sym(Omega));
        // [ω,ω] = 2ω², [A,A] = 2A²
        assert_eq!(w.bracket(&w), w.mul(&w).scale_q(&qi(2)));
        // [A, ω] = −(−1)^{1·1}[ω, A]
        assert_eq!(a.bracket(&w), w.bracket(&a));
        assert!(sym(H).bracket(&sym(H)).is_zero());
    }

    #[test]
    fn trace_of_commutator_vanishes() {
        let x = sym(A).mul(&sym(Omega));
        let y = dsym(OmegaBar).mul(&sym(A));
        assert!(BvExpr::trace(&x.bracket(&y)).is_zero());
        assert!(BvExpr::trace(&sym(Omega).bracket(&dsym(A))).is_zero());
    }

    #[test]
    fn pairing_swap_sign() {
        // dω*dh = −dh*dω, dA*dA symmetric, dω̄*dω = −dω*dω̄
        let a = BvExpr::pair(&dsym(Omega), &dsym(H)).unwrap();
        let b = BvExpr::pair(&dsym(H), &dsym(Omega)).unwrap();
        assert_eq!(a, b.neg());
        let c = BvExpr::pair(&dsym(OmegaBar), &dsym(Omega)).unwrap();
        let d = BvExpr::pair(&dsym(Omega), &dsym(OmegaBar)).unwrap();
        assert_eq!(c, d.neg());
        assert!(BvExpr::pair(&sym(A), &sym(Omega)).is_err());
    }

    #[test]
    fn brst_rules_from_action() {
        let s = brst_from_action(&ActionSpec::yang_mills()).unwrap();
        assert_eq!(s.images[&OmegaBar], sym(H).neg());
        assert!(!s.images.contains_key(&H));
        assert_eq!(s.images[&Omega], sym(Omega).bracket(&sym(Omega)).scale(&cvar(LW).scale(&q(-1, 2))));
        assert_eq!(s, yang_mills_brst());
        let mut no_sources = ActionSpec::default();
        no_sources.push(one(), dsym(A), dsym(A));
        assert!(brst_from_action(&no_sources).unwrap().images.is_empty());
        let s = yang_mills_brst();
        assert!(s.apply(&sym(H)).is_zero());
        assert!(s.apply(&FormPoly::scalar(cvar(L3))).is_zero());
    }

    #[test]
    fn s_squared_on_a() {
        let s = yang_mills_brst();
        assert_eq!(s.apply(&s.apply(&sym(A))), expected_s2_a());
    }

    #[test]
    fn antibracket_grafts_by_leibniz() {
        // (∫A*A, ∫⟨dω,K_A⟩): A ↦ dω in both slots, and dω*A = −A*dω·(−1)
        let f = BvExpr::pair(&sym(A), &sym(A)).unwrap();
        let g = BvExpr::pair(&dsym(Omega), &sym(KA)).unwrap();
        let hand = BvExpr::pair(&dsym(Omega), &sym(A)).unwrap().add(&BvExpr::pair(&sym(A), &dsym(Omega)).unwrap().neg());
        assert_eq!(antibracket(&f, &g).unwrap(), hand);
        assert_eq!(hand, BvExpr::pair(&dsym(Omega), &sym(A)).unwrap().scale(&cconst(qi(2))));
        // no complementary pairs
        let e = BvExpr::pair(&dsym(A), &dsym(A)).unwrap();
        assert!(antibracket(&e, &f).unwrap().is_zero());
    }

    #[test]
    fn antibracket_antisymmetry_witness() {
        let s = ActionSpec::yang_mills().expr().unwrap();
        let f = BvExpr::pair(&sym(A).bracket(&sym(A)), &sym(A).bracket(&sym(A))).unwrap();
        let (df, ds) = (f.ghost_degree().unwrap(), s.ghost_degree().unwrap());
        let ab = antibracket(&f, &s).unwrap();
        let ba = antibracket(&s, &f).unwrap();
        assert!(!ab.is_zero());
        let sg = if odd((df + 1) * (ds + 1)) { Q::one() } else { -Q::one() };
        assert_eq!(ab, ba.scale(&cconst(sg)));
    }

    #[test]
    fn nonlinear_source_rejected() {
        let e = BvExpr::pair(&sym(KOmegaBar).mul(&sym(KOmegaBar)), &sym(H)).unwrap();
        assert!(matches!(e.source_coefficients(), Err(BvError::NonlinearSource(_))));
    }

    #[test]
    fn master_equation_on_yang_mills() {
        let spec = TheorySpec::yang_mills();
        let c = check_master(&spec);
        assert!(c.passed(), "{}", c.render_text());
    }

    #[test]
    fn simple_theory_edge_cases() {
        let spec = TheorySpec::yang_mills();
        let names = coupling_names();
        assert!(!simple_theory_check(&[], &names, &spec).simple);
        let single: TheorySpec = crate::theory::parse_theory(
            r#"{"name":"phi3","fields":[{"name":"phi","ghost_degree":0,"statistics":"bosonic","propagates":true},
            {"name":"K_phi","ghost_degree":-1,"is_source":true,"partner":"phi","statistics":"fermionic"}],
            "vertices":[{"name":"v","legs":["phi","phi","phi"],"coupling":"g"}],
            "edges":[{"name":"prop","field":"phi","conjugate_field":"phi"}],"cphi":{"phi":[["prop",1,2]],"K_phi":[["prop",-1,2]]},"loop_cutoff":2}"#,
        )
        .unwrap();
        let r = simple_theory_check(&[], &["g".to_string()], &single);
        assert!(r.simple);
        assert_eq!(r.fundamental.as_deref(), Some("g"));
    }

    #[test]
    fn parse_and_render() {
        let e = parse_trace("int tr( d omegabar * [A, omega] )").unwrap();
        let want = BvExpr::pair(&dsym(OmegaBar), &sym(A).bracket(&sym(Omega))).unwrap();
        assert_eq!(e, want);
        let back = e.terms.keys().next().unwrap().render();
        assert!(back.starts_with("int tr(") || back.starts_with("-int tr("), "{back}");
        assert!(parse_trace("int tr( [omega, omega] )").unwrap().is_zero());
        assert!(!parse_trace("int tr( omega omegabar )").unwrap().is_zero());
        assert!(parse_trace("int tr( B * A )").is_err());
    }

    #[test]
    fn toy_bv_identities() {
        let c = toy::check_toy(5, 60);
        assert!(c.passed(), "{}", c.render_text());
    }
}
