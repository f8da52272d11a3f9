//! JSON encoding for exact values.
//!
//! Rationals are strings `"num/den"`; a point is an array of those; a
//! polytope is `{"d": <int>, "vertices": [[...], ...]}` in canonical order.
//! Maps keyed by node id are written as arrays of `[node, value]` pairs so
//! they survive serde's buffering of internally tagged enums.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry;
use crate::scalar::{format_rational, parse_rational, Rational};

impl Serialize for geometry::Point<Rational> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coords: Vec<String> = self.coords().iter().map(format_rational).collect();
        coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for geometry::Point<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<RationalLiteral> = Vec::deserialize(d)?;
        Ok(geometry::Point::new(raw.into_iter().map(|r| r.0).collect()))
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    d: usize,
    vertices: Vec<geometry::Point<Rational>>,
}

impl Serialize for geometry::Polytope<Rational> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolytopeRepr {
            d: self.dim(),
            vertices: self.vertices().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for geometry::Polytope<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PolytopeRepr::deserialize(d)?;
        geometry::Polytope::from_points(repr.d, &repr.vertices).map_err(D::Error::custom)
    }
}

/// Accepts `"num/den"`, decimal strings, or bare JSON integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLiteral(pub Rational);

impl<'de> Deserialize<'de> for RationalLiteral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => parse_rational(&s)
                .map(RationalLiteral)
                .map_err(D::Error::custom),
            Raw::Int(i) => Ok(RationalLiteral(crate::scalar::rational_from_i64(i))),
        }
    }
}

/// `#[serde(with = "crate::codec::rational")]` for bare `Rational` fields.
pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        format_rational(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        Ok(RationalLiteral::deserialize(d)?.0)
    }
}

/// `#[serde(with = "crate::codec::pairs")]` for `BTreeMap<K, V>` fields.
pub mod pairs {
    use super::*;

    pub fn serialize<K, V, S>(map: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        V: Serialize,
        S: Serializer,
    {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        let entries: Vec<(K, V)> = Vec::deserialize(d)?;
        let len = entries.len();
        let map: BTreeMap<K, V> = entries.into_iter().collect();
        if map.len() != len {
            return Err(D::Error::custom("duplicate key in entry list"));
        }
        Ok(map)
    }
}
