//! Logarithms of exact integers and rationals.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Natural log of a positive integer. Depends only on the value, so two
/// backends that reach the same exact degree report the same float.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits in 64 bits") as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("top 64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive integer.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert_eq!(n.sign(), Sign::Plus, "logarithm of a non-positive integer");
    ln_biguint(n.magnitude())
}

/// Natural log of a positive rational.
pub fn ln_rational(q: &BigRational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// `ln Π dᵢ^{kᵢ}` for `(dᵢ, kᵢ)` pairs, through the exact product.
pub fn ln_degree_product(factors: &[(u32, u64)]) -> f64 {
    let mut acc = BigUint::from(1u32);
    for &(d, k) in factors {
        if k > 0 && d > 1 {
            acc *= num_traits::pow(BigUint::from(d), k as usize);
        }
    }
    ln_biguint(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_are_plain_logs() {
        assert_eq!(ln_bigint(&BigInt::from(1)), 0.0);
        assert_eq!(ln_bigint(&BigInt::from(144)), 144f64.ln());
    }

    #[test]
    fn large_powers_match_multiples_of_ln() {
        let v = ln_degree_product(&[(2, 10_000)]);
        assert!((v - 10_000.0 * 2f64.ln()).abs() < 1e-9);
        let v = ln_degree_product(&[(2, 300), (3, 500)]);
        assert!((v - 300.0 * 2f64.ln() - 500.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(ln_degree_product(&[]), 0.0);
    }

    #[test]
    fn rationals() {
        let q = BigRational::new(1.into(), 3.into());
        assert!((ln_rational(&q) + 3f64.ln()).abs() < 1e-15);
    }
}
