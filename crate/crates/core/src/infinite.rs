//! Serde adapters writing ±∞ as the strings `"inf"` and `"-inf"`.
//!
//! Use as `#[serde(with = "relbound::infinite")]` on `f64` fields and
//! `#[serde(with = "relbound::infinite::vec")]` on `Vec<f64>` fields.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::Deserialize;
use std::fmt;

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(ValueVisitor)
}

/// Parses `inf`, `-inf` and ordinary numbers.
pub fn parse(text: &str) -> Option<f64> {
    match text.trim() {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// Formats with `inf` for infinities and shortest round-trip digits otherwise.
pub fn format(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

struct ValueVisitor;

impl<'de> Visitor<'de> for ValueVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse(v).ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Wrapped(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Wrapped>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

/// An `f64` that serializes through this module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wrapped(pub f64);

impl serde::Serialize for Wrapped {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Wrapped {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize(d).map(Wrapped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    struct Row {
        #[serde(with = "super")]
        value: f64,
        #[serde(with = "super::vec")]
        values: Vec<f64>,
    }

    #[test]
    fn infinity_round_trips_as_string() {
        let row = Row { value: f64::INFINITY, values: vec![1.5, f64::INFINITY] };
        let text = serde_json::to_string(&row).unwrap();
        assert_eq!(text, r#"{"value":"inf","values":[1.5,"inf"]}"#);
        assert_eq!(serde_json::from_str::<Row>(&text).unwrap(), row);
    }

    #[test]
    fn finite_values_stay_numeric() {
        let row = Row { value: 0.1, values: vec![] };
        let text = serde_json::to_string(&row).unwrap();
        assert_eq!(text, r#"{"value":0.1,"values":[]}"#);
    }

    #[test]
    fn text_forms() {
        assert_eq!(parse("inf"), Some(f64::INFINITY));
        assert_eq!(parse(" 0.25 "), Some(0.25));
        assert_eq!(parse("x"), None);
        assert_eq!(format(f64::INFINITY), "inf");
        assert_eq!(format(0.1), "0.1");
    }
}
