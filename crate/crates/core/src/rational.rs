//! Small exact-arithmetic helpers shared by the exact and bounds modules.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn from_biguint(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// Renders `r` with `places` decimals, rounding half to even. Exact.
pub fn round_half_even(r: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let frac = &scaled - BigRational::from_integer(floor.clone());
    let half = ratio(1, 2);
    let mut q = floor;
    if frac > half || (frac == half && q.is_odd()) {
        q += 1;
    }
    let (int_part, dec_part) = q.div_rem(&scale);
    let sign = if r.is_negative() && !(int_part.is_zero() && dec_part.is_zero()) {
        "-"
    } else {
        ""
    };
    if places == 0 {
        return format!("{sign}{int_part}");
    }
    format!(
        "{sign}{int_part}.{:0>width$}",
        dec_part.to_string(),
        width = places as usize
    )
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round_half_even(&ratio(19, 30), 3), "0.633");
        assert_eq!(round_half_even(&ratio(53, 90), 3), "0.589");
        assert_eq!(round_half_even(&ratio(1, 8), 2), "0.12");
        assert_eq!(round_half_even(&ratio(3, 8), 2), "0.38");
        assert_eq!(round_half_even(&ratio(2, 1), 3), "2.000");
        assert_eq!(round_half_even(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(round_half_even(&ratio(-1, 10000), 3), "0.000");
        assert_eq!(round_half_even(&ratio(9995, 10000), 3), "1.000");
        assert_eq!(round_half_even(&ratio(7, 2), 0), "4");
    }

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(14), BigUint::from(87_178_291_200u64));
        assert_eq!(binomial(9, 4), BigUint::from(126u32));
        assert_eq!(binomial(14, 7), BigUint::from(3432u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }
}
