//! Exact rational scalars and their textual form.
//!
//! Every utility, endpoint and density value in the crate is a
//! [`BigRational`]. On the wire they are strings: `"p/q"`, `"p"`, or a
//! terminating decimal such as `"0.499"` (converted exactly).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

pub type Scalar = BigRational;

/// Value tolerance used when a cut point has to be approximated (linear
/// density segments with an irrational root): `2^-64`.
pub fn cut_tolerance() -> Scalar {
    Scalar::new(BigInt::one(), BigInt::one() << 64usize)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {text:?}: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: &'static str,
}

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

pub fn parse_scalar(text: &str) -> Result<Scalar, ParseScalarError> {
    let err = |reason| ParseScalarError {
        text: text.to_string(),
        reason,
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Scalar::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal fraction"));
        }
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal integer part"));
        }
        let joined: BigInt = format!("{}{}", if digits.is_empty() { "0" } else { digits }, frac)
            .parse()
            .map_err(|_| err("bad decimal"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let v = Scalar::new(joined, scale);
        return Ok(if negative { -v } else { v });
    }
    let p: BigInt = s.parse().map_err(|_| err("not an integer, p/q or decimal"))?;
    Ok(Scalar::from_integer(p))
}

pub fn format_scalar(v: &Scalar) -> String {
    v.to_string()
}

/// Lossy conversion for display and for ordering pre-checks; never used to
/// decide a verdict.
pub fn to_f64(v: &Scalar) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn midpoint(a: &Scalar, b: &Scalar) -> Scalar {
    (a + b) / int(2)
}

/// Exact comparison that settles most cases with an `f64` pre-check.
///
/// The fallback is the exact rational comparison, so the ordering is total
/// and agrees with `Ord` for `Scalar`.
pub fn fast_cmp(a: &Scalar, a_approx: f64, b: &Scalar, b_approx: f64) -> std::cmp::Ordering {
    let gap = (a_approx - b_approx).abs();
    let scale = a_approx.abs().max(b_approx.abs());
    if gap > scale * 1e-9 && gap > 1e-300 {
        a_approx.partial_cmp(&b_approx).unwrap_or_else(|| cmp(a, b))
    } else {
        cmp(a, b)
    }
}

/// Exact comparison by cross multiplication; much cheaper than `Ord` on
/// `BigRational` for the small operands that dominate here.
pub fn cmp(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    if let (Some(an), Some(ad), Some(bn), Some(bd)) =
        (a.numer().to_i64(), a.denom().to_i64(), b.numer().to_i64(), b.denom().to_i64())
    {
        return (i128::from(an) * i128::from(bd)).cmp(&(i128::from(bn) * i128::from(ad)));
    }
    if a.denom() == b.denom() {
        a.numer().cmp(b.numer())
    } else {
        (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
    }
}

/// Sorts `items` by the scalar `key`, using `f64` approximations to settle
/// most comparisons.
pub fn sort_by_scalar<T>(items: &mut Vec<T>, key: impl Fn(&T) -> &Scalar) {
    if items.windows(2).all(|w| cmp(key(&w[0]), key(&w[1])).is_le()) {
        return;
    }
    let mut keyed: Vec<(f64, T)> = items.drain(..).map(|x| (to_f64(key(&x)), x)).collect();
    keyed.sort_by(|(fa, a), (fb, b)| fast_cmp(key(a), *fa, key(b), *fb));
    items.extend(keyed.into_iter().map(|(_, x)| x));
}

/// Serde adapter: a single rational as a string.
pub mod serde_scalar {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        d.deserialize_any(ScalarVisitor)
    }

    struct ScalarVisitor;

    impl<'de> Visitor<'de> for ScalarVisitor {
        type Value = Scalar;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\", an integer, or a decimal string")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
            parse_scalar(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
            Ok(Scalar::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, _: f64) -> Result<Scalar, E> {
            Err(E::custom(
                "floating-point literal; write rationals as strings (\"2/5\" or \"0.4\")",
            ))
        }
    }
}

/// Serde adapter: an optional rational.
pub mod serde_opt_scalar {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&format_scalar(v)),
            None => s.serialize_none(),
        }
    }
}
