//! Exact rational helpers.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Q = BigRational;

/// `n/d` as a rational. Panics if `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Generalized binomial coefficient `alpha choose k`.
pub fn binomial(alpha: &Q, k: u32) -> Q {
    let mut acc = Q::one();
    for j in 0..k {
        acc = acc * (alpha - qi(j as i64)) / qi(j as i64 + 1);
    }
    acc
}

/// `n!` as a rational.
pub fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(Q::one(), |a, j| a * qi(j))
}

/// `n!` as a machine integer.
pub fn factorial_u64(n: u64) -> u64 {
    (1..=n).product()
}

/// Renders `3`, `-1/2`, ...
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `3`, `-1/2`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

/// Integer value if `x` is an integer fitting in `i64`.
pub fn to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}

/// `true` if `x` is a nonnegative integer.
pub fn is_nat(x: &Q) -> bool {
    x.is_integer() && !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_half() {
        // (1/2 choose 2) = (1/2)(-1/2)/2 = -1/8
        assert_eq!(binomial(&q(1, 2), 2), q(-1, 8));
        assert_eq!(binomial(&qi(-1), 3), qi(-1));
        assert_eq!(binomial(&qi(5), 2), qi(10));
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["3", "-1/2", "0", "7/3"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
        assert!(parse_q("1/0").is_none());
    }
}
