//! Exact rational versions of the step law and of `C̃`, for golden values at
//! small perimeters.
//!
//! The forward recursion `C̃_{p+1} = (C̃_p − Σ q_{-k} C̃_{p-k}) / q_1` cancels
//! badly in floating point; here it is evaluated verbatim in `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest perimeter the exact mode is meant for.
pub const EXACT_P_MAX: usize = 64;

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3/4"` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

fn check_alpha(alpha: &BigRational) -> Result<()> {
    if *alpha < rat(2, 3) || *alpha >= BigRational::one() {
        return Err(Error::Domain(format!("alpha = {alpha} outside [2/3, 1)")));
    }
    Ok(())
}

/// κ = α²(1−α)/2.
pub fn kappa_from_alpha(alpha: &BigRational) -> BigRational {
    alpha * alpha * (BigRational::one() - alpha) / rat(2, 1)
}

/// `q_{-k}` for `k ≥ 1`.
pub fn q_neg(k: usize, alpha: &BigRational) -> Result<BigRational> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::Domain("q_{-k} needs k >= 1".into()));
    }
    let rho = rat(2, 1) / alpha - rat(2, 1);
    let catalan_like = BigRational::new(factorial(2 * k - 2), factorial(k - 1) * factorial(k + 1));
    let four_k = BigRational::from_integer(BigInt::from(4).pow(k as u32));
    let lin = (rat(3, 1) * alpha - rat(2, 1)) * rat(k as i64, 1) + BigRational::one();
    Ok(rat(2, 1) / four_k * catalan_like * num_traits::pow(rho, k) * lin)
}

/// `C̃_2 … C̃_{p_max}` by the forward recursion.
pub fn c_tilde_table(alpha: &BigRational, p_max: usize) -> Result<Vec<BigRational>> {
    check_alpha(alpha)?;
    if p_max < 3 {
        return Err(Error::Domain(format!("p_max = {p_max} must be at least 3")));
    }
    let q: Vec<BigRational> = (1..=p_max).map(|k| q_neg(k, alpha)).collect::<Result<_>>()?;
    let inv = alpha.recip();
    let mut c = vec![inv.clone() * &inv];
    for p in 2..p_max {
        let mut acc = c[p - 2].clone();
        for k in 1..=p - 2 {
            acc -= &q[k - 1] * &c[p - k - 2];
        }
        c.push(acc / alpha);
    }
    Ok(c)
}

/// Fresh-vertex probability `α C̃_{p+1} / C̃_p` from an exact table.
pub fn fresh_probability(alpha: &BigRational, c: &[BigRational], p: usize) -> BigRational {
    alpha * &c[p - 1] / &c[p - 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values_at_three_quarters() {
        let a = rat(3, 4);
        assert_eq!(q_neg(1, &a).unwrap(), rat(5, 24));
        assert_eq!(q_neg(2, &a).unwrap(), rat(1, 36));
        let c = c_tilde_table(&a, 4).unwrap();
        assert_eq!(c, vec![rat(16, 9), rat(64, 27), rat(8, 3)]);
        assert_eq!(fresh_probability(&a, &c, 3), rat(27, 32));
        assert_eq!(kappa_from_alpha(&a), rat(9, 128));
    }

    #[test]
    fn exact_table_is_positive_and_non_decreasing() {
        for a in [rat(2, 3), rat(7, 10), rat(3, 4), rat(9, 10)] {
            let c = c_tilde_table(&a, 40).unwrap();
            for w in c.windows(2) {
                assert!(w[0] > BigRational::zero() && w[1] >= w[0], "alpha {a}");
            }
        }
    }

    #[test]
    fn parse() {
        assert_eq!(parse_rational("9/128").unwrap(), rat(9, 128));
        assert!(parse_rational("1/0").is_err());
    }
}
