//! Welfare functions over utility vectors with exact comparison.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::Sign;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::rational::{format_rational, parse_rational, rational_power_bounds};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WelfareFn {
    /// `((1/n) Σ u_i^p)^(1/p)`.
    PMean(Rational),
    Nash,
    Egalitarian,
    Utilitarian,
}

/// Value of a welfare function. Roots that are not rational are reported
/// as floats; comparisons never go through this type.
#[derive(Debug, Clone, PartialEq)]
pub enum WelfareValue {
    Exact(Rational),
    Approx(f64),
}

impl WelfareValue {
    pub fn approx(&self) -> f64 {
        match self {
            WelfareValue::Exact(r) => r.approx_f64(),
            WelfareValue::Approx(x) => *x,
        }
    }
}

impl WelfareFn {
    /// Members with `p <= 1` satisfy the Pigou-Dalton principle.
    pub fn in_pigou_dalton_family(&self) -> bool {
        match self {
            WelfareFn::PMean(p) => *p <= Rational::one(),
            _ => true,
        }
    }

    /// Folds limit cases of the p-mean onto their named members.
    fn normalized(&self) -> WelfareFn {
        match self {
            WelfareFn::PMean(p) if p.is_zero() => WelfareFn::Nash,
            WelfareFn::PMean(p) if p.is_one() => WelfareFn::Utilitarian,
            other => other.clone(),
        }
    }
}

impl fmt::Display for WelfareFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WelfareFn::PMean(p) => write!(f, "p-mean={}", format_rational(p)),
            WelfareFn::Nash => write!(f, "nash"),
            WelfareFn::Egalitarian => write!(f, "egalitarian"),
            WelfareFn::Utilitarian => write!(f, "utilitarian"),
        }
    }
}

impl FromStr for WelfareFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nash" => Ok(WelfareFn::Nash),
            "egalitarian" => Ok(WelfareFn::Egalitarian),
            "utilitarian" => Ok(WelfareFn::Utilitarian),
            _ => {
                let p = s
                    .strip_prefix("p-mean=")
                    .or_else(|| s.strip_prefix("p-mean:"))
                    .ok_or_else(|| format!("unknown welfare function `{s}`"))?;
                parse_rational(p)
                    .map(WelfareFn::PMean)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

fn to_rationals<T: Scalar>(u: &[T]) -> Vec<Rational> {
    u.iter()
        .map(|x| x.to_rational().expect("finite utility"))
        .collect()
}

fn sum(u: &[Rational]) -> Rational {
    u.iter().fold(Rational::zero(), |a, b| a + b)
}

fn product(u: &[Rational]) -> Rational {
    u.iter().fold(Rational::one(), |a, b| a * b)
}

fn min(u: &[Rational]) -> Rational {
    u.iter().min().cloned().unwrap_or_else(Rational::zero)
}

/// Welfare of a utility vector. Nash welfare is reported as the product of
/// utilities, which orders profiles exactly like the geometric mean.
/// A p-mean with `p < 0` and a zero entry is 0 (its limit).
pub fn welfare_value<T: Scalar>(w: &WelfareFn, u: &[T]) -> WelfareValue {
    let u = to_rationals(u);
    let n = u.len().max(1);
    match w {
        WelfareFn::Utilitarian => WelfareValue::Exact(sum(&u)),
        WelfareFn::Egalitarian => WelfareValue::Exact(min(&u)),
        WelfareFn::Nash => WelfareValue::Exact(product(&u)),
        WelfareFn::PMean(p) => {
            if p.is_negative() && u.iter().any(Zero::is_zero) {
                return WelfareValue::Exact(Rational::zero());
            }
            if p.is_one() {
                return WelfareValue::Exact(sum(&u) / Rational::from_integer(n.into()));
            }
            if p.is_zero() {
                let log_mean = u.iter().map(|x| x.approx_f64().ln()).sum::<f64>() / n as f64;
                return WelfareValue::Approx(log_mean.exp());
            }
            let pf = p.approx_f64();
            let mean = u.iter().map(|x| x.approx_f64().powf(pf)).sum::<f64>() / n as f64;
            WelfareValue::Approx(mean.powf(1.0 / pf))
        }
    }
}

/// Exact comparison `w(a)` vs `w(b)`.
pub fn compare_welfare<T: Scalar>(w: &WelfareFn, a: &[T], b: &[T]) -> Ordering {
    let w = w.normalized();
    // float filter first; exact fallback only for near-ties
    if let Some(ord) = filtered_cmp(&w, a, b) {
        return ord;
    }
    let (a, b) = (to_rationals(a), to_rationals(b));
    match w {
        WelfareFn::Utilitarian => sum(&a).cmp(&sum(&b)),
        WelfareFn::Egalitarian => min(&a).cmp(&min(&b)),
        WelfareFn::Nash => product(&a).cmp(&product(&b)),
        WelfareFn::PMean(p) => exact_pmean_cmp(&p, &a, &b),
    }
}

/// Relative gap below which the float comparison is not trusted.
const FILTER_EPS: f64 = 1e-9;

/// Float evaluation of the comparison, `None` when the two sides are too
/// close (or too small) for the rounding error bound to settle it.
/// Utilities are nonnegative, so sums and products carry only a small
/// relative error.
fn filtered_cmp<T: Scalar>(w: &WelfareFn, a: &[T], b: &[T]) -> Option<Ordering> {
    let approx = |u: &[T]| -> Option<Vec<f64>> {
        u.iter()
            .map(|x| {
                let f = x.approx_f64();
                (f == 0.0 || (f.is_finite() && f.abs() > 1e-300)).then_some(f)
            })
            .collect()
    };
    let (fa, fb) = (approx(a)?, approx(b)?);
    let (va, vb, reverse) = match w {
        WelfareFn::Utilitarian => (fa.iter().sum::<f64>(), fb.iter().sum::<f64>(), false),
        WelfareFn::Egalitarian => (
            fa.iter().copied().fold(f64::INFINITY, f64::min),
            fb.iter().copied().fold(f64::INFINITY, f64::min),
            false,
        ),
        WelfareFn::Nash => (
            fa.iter().product::<f64>(),
            fb.iter().product::<f64>(),
            false,
        ),
        WelfareFn::PMean(p) => {
            let pf = p.approx_f64();
            let power_sum = |u: &[f64]| -> Option<f64> {
                let mut s = 0.0;
                for &x in u {
                    if x == 0.0 {
                        if pf < 0.0 {
                            return None;
                        }
                        continue;
                    }
                    s += x.powf(pf);
                }
                Some(s)
            };
            (power_sum(&fa)?, power_sum(&fb)?, pf < 0.0)
        }
    };
    if !va.is_finite() || !vb.is_finite() {
        return None;
    }
    let scale = va.abs().max(vb.abs());
    if scale < 1e-300 || (va - vb).abs() <= FILTER_EPS * scale {
        return None;
    }
    let ord = va.partial_cmp(&vb)?;
    Some(if reverse { ord.reverse() } else { ord })
}

fn exact_pmean_cmp(p: &Rational, a: &[Rational], b: &[Rational]) -> Ordering {
    if p.is_negative() {
        let (za, zb) = (a.iter().any(Zero::is_zero), b.iter().any(Zero::is_zero));
        match (za, zb) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // the outer power 1/p is decreasing
        return power_sum_cmp(&(-p), a, b, true).reverse();
    }
    power_sum_cmp(p, a, b, false)
}

/// Compares `Σ a_i^q` with `Σ b_i^q` (or with reciprocals when `invert`),
/// `q > 0` rational.
fn power_sum_cmp(q: &Rational, a: &[Rational], b: &[Rational], invert: bool) -> Ordering {
    let prep = |u: &[Rational]| -> Vec<Rational> {
        let mut v: Vec<Rational> = if invert {
            u.iter().map(|x| x.recip()).collect()
        } else {
            u.to_vec()
        };
        v.sort();
        v
    };
    let (a, b) = (prep(a), prep(b));
    if a == b {
        return Ordering::Equal;
    }
    let (num, den) = match (q.numer().to_u32(), q.denom().to_u32()) {
        (Some(n), Some(d)) if q.numer().sign() == Sign::Plus => (n, d),
        _ => panic!("unsupported welfare exponent {q}"),
    };
    if den == 1 {
        let s = |u: &[Rational]| {
            u.iter()
                .fold(Rational::zero(), |acc, x| acc + Pow::pow(x, num))
        };
        return s(&a).cmp(&s(&b));
    }
    for bits in [64u32, 128, 256, 512, 1024] {
        let bounds = |u: &[Rational]| {
            u.iter()
                .fold((Rational::zero(), Rational::zero()), |(lo, hi), x| {
                    let (l, h) = rational_power_bounds(x, num, den, bits);
                    (lo + l, hi + h)
                })
        };
        let (alo, ahi) = bounds(&a);
        let (blo, bhi) = bounds(&b);
        if alo > bhi {
            return Ordering::Greater;
        }
        if ahi < blo {
            return Ordering::Less;
        }
    }
    // Indistinguishable at 2^-1024 resolution: treated as a tie.
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn value_examples() {
        assert_eq!(
            welfare_value(&WelfareFn::Utilitarian, &v(&[3, 5])),
            WelfareValue::Exact(int(8))
        );
        assert_eq!(
            welfare_value(&WelfareFn::PMean(int(1)), &v(&[2, 4])),
            WelfareValue::Exact(int(3))
        );
        assert_eq!(
            welfare_value(&WelfareFn::Egalitarian, &v(&[5, 1])),
            WelfareValue::Exact(int(1))
        );
        assert_eq!(
            welfare_value(&WelfareFn::PMean(int(-1)), &v(&[0, 4])),
            WelfareValue::Exact(int(0))
        );
        let half = welfare_value(&WelfareFn::PMean(ratio(1, 2)), &v(&[4, 4]));
        assert!((half.approx() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn nash_zero_annihilates() {
        let b = ratio(3, 5);
        let one_minus_y = ratio(7, 10);
        assert_eq!(
            compare_welfare(&WelfareFn::Nash, &[int(1), int(0)], &[b, one_minus_y]),
            Ordering::Less
        );
    }

    #[test]
    fn pmean_half_detects_exact_ties() {
        // sqrt(8) + 0 == sqrt(2) + sqrt(2)
        let w = WelfareFn::PMean(ratio(1, 2));
        assert_eq!(
            compare_welfare(&w, &v(&[8, 0]), &v(&[2, 2])),
            Ordering::Equal
        );
        assert_eq!(
            compare_welfare(&w, &v(&[1, 4]), &v(&[4, 1])),
            Ordering::Equal
        );
        assert_eq!(
            compare_welfare(&w, &v(&[9, 0]), &v(&[2, 2])),
            Ordering::Greater
        );
        assert_eq!(
            compare_welfare(&w, &v(&[4, 4]), &v(&[8, 0])),
            Ordering::Greater
        );
    }

    #[test]
    fn negative_p_prefers_equal_profiles() {
        let w = WelfareFn::PMean(int(-2));
        assert_eq!(
            compare_welfare(&w, &v(&[2, 2]), &v(&[1, 3])),
            Ordering::Greater
        );
        assert_eq!(
            compare_welfare(&w, &v(&[0, 9]), &v(&[1, 1])),
            Ordering::Less
        );
        assert_eq!(
            compare_welfare(&w, &v(&[0, 9]), &v(&[0, 1])),
            Ordering::Equal
        );
    }

    #[test]
    fn parse_round_trip() {
        for w in [
            WelfareFn::Nash,
            WelfareFn::Egalitarian,
            WelfareFn::Utilitarian,
            WelfareFn::PMean(ratio(1, 2)),
        ] {
            assert_eq!(w.to_string().parse::<WelfareFn>().unwrap(), w);
        }
        assert!(WelfareFn::PMean(ratio(1, 2)).in_pigou_dalton_family());
        assert!(!WelfareFn::PMean(int(2)).in_pigou_dalton_family());
    }
}
