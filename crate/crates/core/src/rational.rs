//! Exact rational scalars.
//!
//! Every coordinate in the core is a [`Rational`]. Floats only appear when a
//! logarithm is taken.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Builds `num/den` from machine integers.
///
/// Panics if `den == 0`.
pub fn r(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    r(1, 2)
}

/// Formats as `num/den`, including `0/1` and `1/1`.
pub fn fmt_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse {
        line: 0,
        msg: format!("not a rational: {s:?}"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // magnitudes far outside f64 range
        let l = ln_abs(q);
        if q.is_negative() {
            -l.exp()
        } else {
            l.exp()
        }
    })
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 900 {
        n.to_f64().map(|v| v.abs().ln()).unwrap_or(f64::NAN)
    } else {
        let shift = bits - 64;
        let top: BigInt = n.abs() >> shift;
        top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of `|q|`, accurate even when numerator and denominator exceed
/// the f64 range. `q` must be nonzero.
pub fn ln_abs(q: &Rational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Bit size of the larger of numerator and denominator.
pub fn bit_size(q: &Rational) -> u64 {
    q.numer().bits().max(q.denom().bits())
}

/// Rational approximation of a float with denominator `2^bits`.
pub fn from_f64_dyadic(v: f64, bits: u32) -> Rational {
    let scale = (2f64).powi(bits as i32);
    let n = (v * scale).round();
    Rational::new(BigInt::from(n as i128), BigInt::from(1u8) << bits as usize)
}

/// Formats a float with 12 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        return format!("{v:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn min_r<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_r<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}
