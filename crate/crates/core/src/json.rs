//! Arbitrary-precision integers as bare JSON numbers.
//!
//! Reports carry sphere counts and SDR-sized coefficients that overflow `i64`
//! quickly, so they are written through `serde_json::Number` (built with
//! `arbitrary_precision`) instead of as strings or digit arrays.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Number;

pub fn number_from_display(value: &impl std::fmt::Display) -> Number {
    value
        .to_string()
        .parse()
        .expect("decimal integer is a valid JSON number")
}

pub fn bigint_to_number(value: &BigInt) -> Number {
    number_from_display(value)
}

pub fn biguint_to_number(value: &BigUint) -> Number {
    number_from_display(value)
}

pub fn number_to_bigint(number: &Number) -> Option<BigInt> {
    number.to_string().parse().ok()
}

pub fn number_to_biguint(number: &Number) -> Option<BigUint> {
    number.to_string().parse().ok()
}

/// Exact rational as `"p/q"` (or `"p"` when integral).
pub fn rational_string(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// `f64` approximation of an exact rational, tolerant of huge operands.
pub fn rational_to_f64(value: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = value.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to scaling by bit lengths when numerator or denominator overflow f64.
    let numer = value.numer();
    let denom = value.denom();
    let shift_n = numer.bits().saturating_sub(60);
    let shift_d = denom.bits().saturating_sub(60);
    let n = (numer >> shift_n).to_f64().unwrap_or(f64::NAN);
    let d = (denom >> shift_d).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

pub mod biguint {
    use super::*;

    pub fn serialize<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
        biguint_to_number(value).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigUint, D::Error> {
        let number = Number::deserialize(deserializer)?;
        number_to_biguint(&number)
            .ok_or_else(|| D::Error::custom(format!("expected a non-negative integer, got {number}")))
    }
}

pub mod opt_biguint {
    use super::*;

    pub fn serialize<S: Serializer>(
        value: &Option<BigUint>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        value.as_ref().map(biguint_to_number).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Option<BigUint>, D::Error> {
        let number = Option::<Number>::deserialize(deserializer)?;
        number
            .map(|n| {
                number_to_biguint(&n)
                    .ok_or_else(|| D::Error::custom(format!("expected a non-negative integer, got {n}")))
            })
            .transpose()
    }
}

pub mod bigint {
    use super::*;

    pub fn serialize<S: Serializer>(value: &BigInt, serializer: S) -> Result<S::Ok, S::Error> {
        bigint_to_number(value).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigInt, D::Error> {
        let number = Number::deserialize(deserializer)?;
        number_to_bigint(&number)
            .ok_or_else(|| D::Error::custom(format!("expected an integer, got {number}")))
    }
}
