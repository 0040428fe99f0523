//! Exact rational scalars.
//!
//! Every coefficient in the kernel is a `BigRational`: arithmetic is exact,
//! comparisons are decidable, and identity checks are zero-tolerance. The
//! helpers here exist so the rest of the crate never spells out
//! `BigInt::from(..)` conversions by hand.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Arbitrary-precision rational scalar. Always stored reduced with a
/// positive denominator (`num-rational` maintains both invariants).
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Generalized binomial coefficient `C(m, i)` for integer `m` (possibly
/// negative) and `i >= 0`: `m (m-1) ... (m-i+1) / i!`, and `1` for `i = 0`.
pub fn binomial(m: i64, i: u32) -> Scalar {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..i as i64 {
        num *= BigInt::from(m - k);
        den *= BigInt::from(k + 1);
    }
    BigRational::new(num, den)
}

/// Renders a scalar as `p` or `p/q`, matching the report grammar.
pub fn fmt_scalar(s: &Scalar) -> String {
    if s.denom().is_one() {
        format!("{}", s.numer())
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Parity sign `(-1)^k` where only `k mod 2` matters; accepts negative
/// degrees (exterior gradings frequently are).
pub fn parity_sign(k: i64) -> Scalar {
    if k.rem_euclid(2) == 0 {
        one()
    } else {
        -one()
    }
}

pub fn is_odd(k: i64) -> bool {
    k.rem_euclid(2) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_nonnegative_m() {
        assert_eq!(binomial(4, 2), int(6));
        assert_eq!(binomial(4, 0), int(1));
        assert_eq!(binomial(3, 5), int(0));
    }

    #[test]
    fn binomial_negative_m() {
        // C(-1, i) = (-1)^i, C(-2, i) = (-1)^i (i+1)
        assert_eq!(binomial(-1, 3), int(-1));
        assert_eq!(binomial(-2, 2), int(3));
        assert_eq!(binomial(-2, 3), int(-4));
    }

    #[test]
    fn parity_handles_negatives() {
        assert_eq!(parity_sign(-1), int(-1));
        assert_eq!(parity_sign(-2), int(1));
        assert!(is_odd(-3));
    }

    #[test]
    fn scalar_formatting() {
        assert_eq!(fmt_scalar(&ratio(3, 2)), "3/2");
        assert_eq!(fmt_scalar(&int(-7)), "-7");
        assert_eq!(fmt_scalar(&ratio(4, 2)), "2");
    }
}
