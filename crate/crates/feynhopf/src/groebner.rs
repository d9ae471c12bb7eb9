//! Buchberger's algorithm over `ℚ` in the graded order of [`grlex_key`],
//! enough to compare the small coupling-constant ideals of the BV module.

use num::{One, Zero};

use crate::poly::{grlex_key, Exps, MPoly};
use crate::Q;

/// Leading exponent and coefficient.
pub fn leading(p: &MPoly) -> Option<(&Exps, &Q)> {
    p.terms.iter().max_by(|a, b| grlex_key(a.0).cmp(&grlex_key(b.0)))
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn shift(p: &MPoly, e: &[u32], c: &Q) -> MPoly {
    let mut out = MPoly::zero(p.nvars);
    for (m, v) in &p.terms {
        out.add_term(m.iter().zip(e).map(|(x, y)| x + y).collect(), v * c);
    }
    out
}

/// Monic multiple of `p`.
pub fn monic(p: &MPoly) -> MPoly {
    match leading(p) {
        Some((_, c)) => p.scale(&(Q::one() / c)),
        None => p.clone(),
    }
}

/// Fully reduce `p` modulo `basis`.
pub fn reduce(p: &MPoly, basis: &[MPoly]) -> MPoly {
    let mut p = p.clone();
    let mut r = MPoly::zero(p.nvars);
    while let Some((e, c)) = leading(&p).map(|(e, c)| (e.clone(), c.clone())) {
        let hit = basis.iter().find_map(|g| {
            let (ge, gc) = leading(g)?;
            divides(ge, &e).then(|| (g, ge.clone(), gc.clone()))
        });
        match hit {
            Some((g, ge, gc)) => {
                let q: Exps = e.iter().zip(&ge).map(|(x, y)| x - y).collect();
                p = p.sub(&shift(g, &q, &(&c / &gc)));
            }
            None => {
                r.add_term(e.clone(), c.clone());
                p.add_term(e, -c);
            }
        }
    }
    r
}

/// Reduced Gröbner basis, monic and sorted.
pub fn groebner_basis(gens: &[MPoly]) -> Vec<MPoly> {
    let mut g: Vec<MPoly> = gens.iter().filter(|p| !p.is_zero()).map(monic).collect();
    let mut pairs: Vec<(usize, usize)> = (0..g.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    while let Some((i, j)) = pairs.pop() {
        let (ei, _) = leading(&g[i]).unwrap();
        let (ej, _) = leading(&g[j]).unwrap();
        let l = lcm(ei, ej);
        if ei.iter().zip(ej.iter()).all(|(x, y)| x.min(y).is_zero()) {
            // coprime leading monomials reduce to zero
            continue;
        }
        let qi: Exps = l.iter().zip(ei).map(|(x, y)| x - y).collect();
        let qj: Exps = l.iter().zip(ej).map(|(x, y)| x - y).collect();
        let s = shift(&g[i], &qi, &Q::one()).sub(&shift(&g[j], &qj, &Q::one()));
        let r = reduce(&s, &g);
        if !r.is_zero() {
            g.push(monic(&r));
            let n = g.len() - 1;
            pairs.extend((0..n).map(|k| (k, n)));
        }
    }
    // minimize, then reduce each element by the others
    let mut min: Vec<MPoly> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let e = leading(p).unwrap().0;
        let redundant = g.iter().enumerate().any(|(m, q)| {
            let f = leading(q).unwrap().0;
            m != k && divides(f, e) && (f != e || m < k)
        });
        if !redundant {
            min.push(p.clone());
        }
    }
    let mut out: Vec<MPoly> = (0..min.len())
        .map(|k| {
            let others: Vec<MPoly> = min.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, q)| q.clone()).collect();
            monic(&reduce(&min[k], &others))
        })
        .collect();
    out.sort();
    out
}

pub fn ideal_contains(basis: &[MPoly], p: &MPoly) -> bool {
    reduce(p, basis).is_zero()
}

pub fn same_ideal(a: &[MPoly], b: &[MPoly]) -> bool {
    groebner_basis(a) == groebner_basis(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn x(i: usize) -> MPoly {
        MPoly::var(3, i)
    }

    #[test]
    fn twisted_cubic() {
        // ⟨y − x², z − x³⟩ contains xz − y²
        let gens = vec![x(1).sub(&x(0).pow(2)), x(2).sub(&x(0).pow(3))];
        let gb = groebner_basis(&gens);
        assert!(ideal_contains(&gb, &x(0).mul(&x(2)).sub(&x(1).pow(2))));
        assert!(!ideal_contains(&gb, &x(0)));
        assert!(same_ideal(&gens, &[x(2).sub(&x(0).pow(3)), x(1).sub(&x(0).pow(2)).scale(&qi(3))]));
    }

    #[test]
    fn unit_ideal() {
        let gens = vec![x(0).sub(&MPoly::one(3)), x(0).clone()];
        assert_eq!(groebner_basis(&gens), vec![MPoly::one(3)]);
    }
}
