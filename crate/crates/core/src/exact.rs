//! Exact rational and Gaussian-rational helpers.
//!
//! Every finite `f64` is a dyadic rational, so conversions from floats are
//! exact. Conversions back to floats round to nearest.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type ExactComplex = Complex<BigRational>;

/// `q^k` as an exact rational, for any integer `k`.
pub fn q_pow(q: u32, k: i64) -> Rational {
    let base = BigInt::from(q).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rational::from_integer(base)
    } else {
        Rational::new(BigInt::one(), base)
    }
}

pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or(Error::NonFinite)
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn exact_from_complex(z: Complex64) -> Result<ExactComplex> {
    Ok(ExactComplex::new(rational_from_f64(z.re)?, rational_from_f64(z.im)?))
}

pub fn exact_to_complex(z: &ExactComplex) -> Complex64 {
    Complex64::new(rational_to_f64(&z.re), rational_to_f64(&z.im))
}

pub fn exact_zero() -> ExactComplex {
    ExactComplex::new(Rational::zero(), Rational::zero())
}

pub fn is_exact_zero(z: &ExactComplex) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

pub fn norm_sqr(z: &ExactComplex) -> Rational {
    &z.re * &z.re + &z.im * &z.im
}

/// Exact sum of real parts; an error if any value is negative or has a
/// nonzero imaginary part.
pub fn nonnegative_reals(values: &[Complex64]) -> Result<Vec<Rational>> {
    values
        .iter()
        .enumerate()
        .map(|(i, z)| {
            if z.im != 0.0 || !z.re.is_finite() || z.re < 0.0 {
                return Err(Error::NotNonnegative(i));
            }
            rational_from_f64(z.re)
        })
        .collect()
}

pub fn abs_rational(x: &Rational) -> Rational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_pow_negative_and_positive() {
        assert_eq!(q_pow(3, 2), Rational::from_integer(9.into()));
        assert_eq!(q_pow(2, -3), Rational::new(1.into(), 8.into()));
        assert_eq!(q_pow(5, 0), Rational::one());
    }

    #[test]
    fn float_round_trip_is_exact() {
        let x = 0.1_f64;
        let r = rational_from_f64(x).unwrap();
        assert_eq!(rational_to_f64(&r), x);
        assert!(rational_from_f64(f64::NAN).is_err());
    }
}
