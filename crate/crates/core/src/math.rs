//! Binomial coefficients and the hypergeometric law, in log space, floats
//! and exact big integers.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .sum()
}

pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= BigUint::from(n - k + i);
        acc /= BigUint::from(i);
    }
    acc
}

/// `Pr[k ones]` when drawing `s` items without replacement from an urn of
/// `ones` ones and `zeros` zeros.
pub fn hypergeometric_pmf(ones: usize, zeros: usize, s: usize, k: usize) -> f64 {
    if k > s || k > ones || s - k > zeros || s > ones + zeros {
        return 0.0;
    }
    (ln_binomial(ones, k) + ln_binomial(zeros, s - k) - ln_binomial(ones + zeros, s)).exp()
}

pub fn hypergeometric_pmf_exact(ones: usize, zeros: usize, s: usize, k: usize) -> BigRational {
    if k > s || s > ones + zeros {
        return BigRational::zero();
    }
    let num = binomial_big(ones, k) * binomial_big(zeros, s - k);
    BigRational::new(num.into(), binomial_big(ones + zeros, s).into())
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_agree() {
        for n in 0..40 {
            for k in 0..=n {
                let exact: f64 = binomial_big(n, k).to_string().parse().unwrap();
                assert!((ln_binomial(n, k) - exact.ln()).abs() < 1e-10, "C({n},{k})");
            }
        }
        assert_eq!(binomial_big(8, 2), BigUint::from(28u32));
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn hypergeometric_sums_to_one() {
        for (a, b, s) in [(3, 5, 2), (1, 4, 1), (10, 0, 3), (0, 7, 4), (6, 6, 6)] {
            let total: f64 = (0..=s).map(|k| hypergeometric_pmf(a, b, s, k)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let exact: BigRational = (0..=s).map(|k| hypergeometric_pmf_exact(a, b, s, k)).sum();
            assert!(exact.is_one());
        }
        // two dummies among six positions, both sampled
        assert!((hypergeometric_pmf(2, 4, 2, 2) - 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn divisors_sorted() {
        assert_eq!(divisors(100), vec![1, 2, 4, 5, 10, 20, 25, 50, 100]);
        assert_eq!(divisors(9), vec![1, 3, 9]);
        assert_eq!(divisors(1), vec![1]);
    }
}
