//! Rational literals and a few exact helpers on [`BigRational`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
}

/// Shorthand for `p/q`. Panics when `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    BigRational::from_integer(BigInt::from(p))
}

/// Parses `"p/q"`, an integer, or a decimal literal such as `"0.6"`,
/// `"-1.25e-3"`. Decimals are converted exactly (`0.6` is `3/5`).
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = parse_int(num.trim()).ok_or_else(|| invalid(s))?;
        let d: BigInt = parse_int(den.trim()).ok_or_else(|| invalid(s))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| invalid(s))
}

fn invalid(s: &str) -> ParseRationalError {
    ParseRationalError::Invalid(s.to_string())
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.strip_prefix('+').unwrap_or(s).parse().ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .bytes()
        .chain(frac.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
    let scale = exponent - i32::try_from(frac.len()).ok()?;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(Pow::pow(&ten, scale as u32));
    } else {
        value /= BigRational::from_integer(Pow::pow(&ten, (-scale) as u32));
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Encloses `x^(1/root)` for `x >= 0`: returns `(lo, hi)` with
/// `lo^root <= x <= hi^root` and `hi - lo = 2^-bits`.
pub fn nth_root_bounds(x: &Rational, root: u32, bits: u32) -> (Rational, Rational) {
    debug_assert!(!x.is_negative() && root > 0);
    let scale = BigInt::one() << (bits as usize);
    // floor(x * 2^(bits*root))
    let scaled = (x.numer() << (bits as usize * root as usize)) / x.denom();
    let r = scaled.nth_root(root);
    let lo = BigRational::new(r.clone(), scale.clone());
    let hi = BigRational::new(r + 1, scale);
    (lo, hi)
}

/// Encloses `x^(num/den)` for `x >= 0`, `num >= 0`, `den > 0`.
pub fn rational_power_bounds(x: &Rational, num: u32, den: u32, bits: u32) -> (Rational, Rational) {
    if x.is_zero() {
        let z = Rational::zero();
        return (z.clone(), z);
    }
    if den == 1 {
        let p = Pow::pow(x, num);
        return (p.clone(), p);
    }
    let (lo, hi) = nth_root_bounds(x, den, bits);
    (Pow::pow(&lo, num), Pow::pow(&hi, num))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_rational("0.6").unwrap(), ratio(3, 5));
        assert_eq!(parse_rational("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("4/6").unwrap(), ratio(2, 3));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_rational(""), Err(ParseRationalError::Empty)));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        for bad in ["abc", "1/", "/2", "1.2.3", "--1", "0x10", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn format_round_trips() {
        for r in [ratio(1, 3), int(7), ratio(-9, 4), int(0)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn root_bounds_enclose() {
        let two = int(2);
        let (lo, hi) = nth_root_bounds(&two, 2, 40);
        assert!(&lo * &lo <= two && two <= &hi * &hi);
        assert_eq!(
            &hi - &lo,
            BigRational::new(1.into(), BigInt::one() << 40usize)
        );
        let (lo, hi) = nth_root_bounds(&int(9), 2, 10);
        assert_eq!(lo, int(3));
        assert!(hi > int(3));
    }
}
