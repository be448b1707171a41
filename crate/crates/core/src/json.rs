//! Canonical JSON output: sorted keys, no insignificant whitespace.

use serde::{Serialize, Serializer};

/// Serializes `value` as canonical JSON.
///
/// Going through [`serde_json::Value`] sorts object keys, since the map type
/// behind it is ordered.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let value = serde_json::to_value(value)?;
    serde_json::to_string(&value)
}

/// Rounds to four decimal places, ties to even.
///
/// Float formatting in std rounds the exact binary value and breaks exact
/// ties towards the even digit, so formatting and re-parsing gives the
/// nearest representable value of the rounded decimal.
pub fn round4(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.4}").parse().unwrap_or(x)
}

pub(crate) fn serialize_round4<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round4(*x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted() {
        let mut m = HashMap::new();
        m.insert("zeta", 1);
        m.insert("alpha", 2);
        m.insert("mid", 3);
        assert_eq!(to_canonical_string(&m).unwrap(), r#"{"alpha":2,"mid":3,"zeta":1}"#);
    }

    #[test]
    fn round4_ties_to_even() {
        assert_eq!(round4(0.03125), 0.0312);
        assert_eq!(round4(0.375), 0.375);
        assert_eq!(round4(2.0 / 3.0), 0.6667);
        assert_eq!(round4(1.0), 1.0);
    }
}
