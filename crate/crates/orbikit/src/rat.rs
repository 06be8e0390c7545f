use num_bigint::BigInt;

use crate::error::Error;

/// Exact rational number with arbitrary-precision numerator and denominator.
///
/// Always kept in lowest terms with a positive denominator (guaranteed by
/// `num_rational::Ratio`).
pub type Rational = num_rational::BigRational;

/// The integer `n` as a [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The fraction `n/d` as a [`Rational`], reduced to lowest terms.
///
/// Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"num/den"` or `"num"` (optionally signed) into a [`Rational`].
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = match den {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if den == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Serde helpers storing an `Option<Rational>` as its `"num/den"` string
/// form.
pub mod serde_opt_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, ser: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => ser.serialize_some(&r.to_string()),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(de)?
            .map(|s| super::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
