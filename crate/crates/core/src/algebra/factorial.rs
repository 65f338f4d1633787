use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Falling factorial `(n)_j = n (n-1) ... (n-j+1)`, exact.
pub fn falling_factorial(n: u64, j: u64) -> Result<BigUint> {
    if j > n {
        return Err(Error::InvalidInput(format!(
            "falling factorial needs j <= n, got n = {n}, j = {j}"
        )));
    }
    Ok((0..j).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i)))
}

/// `(n)_j / (n)_k` for `j <= k <= n`, computed exactly and rounded once.
pub fn falling_ratio(n: u64, j: u64, k: u64) -> Result<f64> {
    if j > k || k > n {
        return Err(Error::InvalidInput(format!(
            "falling ratio needs j <= k <= n, got n = {n}, j = {j}, k = {k}"
        )));
    }
    let num = falling_factorial(n, j)?;
    let den = falling_factorial(n, k)?;
    let ratio = BigRational::new(num.into(), den.into());
    ratio
        .to_f64()
        .ok_or_else(|| Error::InvalidInput("falling ratio not representable".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(falling_factorial(5, 2).unwrap(), BigUint::from(20u32));
        assert_eq!(falling_factorial(7, 3).unwrap(), BigUint::from(210u32));
        assert_eq!(falling_factorial(9, 0).unwrap(), BigUint::one());
        assert_eq!(falling_factorial(0, 0).unwrap(), BigUint::one());
        assert!(falling_factorial(2, 3).is_err());
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let big = falling_factorial(1_000_000, 64).unwrap();
        assert!(big.bits() > 64 * 19);
    }

    #[test]
    fn ratio_is_reciprocal_of_tail() {
        assert_eq!(falling_ratio(100, 1, 2).unwrap(), 1.0 / 99.0);
        assert_eq!(falling_ratio(10, 2, 2).unwrap(), 1.0);
        let r = falling_ratio(1_000_000, 0, 3).unwrap();
        let expect = 1.0 / (1e6 * 999_999.0 * 999_998.0);
        assert!((r - expect).abs() <= 1e-15 * expect);
    }
}
