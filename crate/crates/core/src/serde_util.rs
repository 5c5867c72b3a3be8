//! String encodings for exact numbers in JSON. Inputs accept either a JSON
//! string or a JSON integer; outputs are always strings.

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

use crate::num::{parse_integer, parse_rational, Integer, Rational};

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Str(String),
    Int(i64),
}

impl Scalar {
    fn text(self) -> String {
        match self {
            Scalar::Str(s) => s,
            Scalar::Int(n) => n.to_string(),
        }
    }
}

/// A count written as a JSON number (on output) or as a number or string (on input).
pub mod count {
    use super::*;

    pub fn serialize<S: Serializer>(n: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*n as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let text = Scalar::deserialize(d)?.text();
        text.trim()
            .parse()
            .map_err(|_| D::Error::custom(format!("not a nonnegative integer: `{text}`")))
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = Scalar::deserialize(d)?.text();
        parse_rational(&text).map_err(D::Error::custom)
    }
}

pub mod rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&q.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<Scalar>::deserialize(d)?
            .into_iter()
            .map(|x| parse_rational(&x.text()).map_err(D::Error::custom))
            .collect()
    }
}

pub mod rational_matrix {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(m.len()))?;
        for row in m {
            let row: Vec<String> = row.iter().map(ToString::to_string).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        Vec::<Vec<Scalar>>::deserialize(d)?
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| parse_rational(&x.text()).map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

pub mod integer {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        let text = Scalar::deserialize(d)?.text();
        parse_integer(&text).map_err(D::Error::custom)
    }
}

pub mod integer_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for n in v {
            seq.serialize_element(&n.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Integer>, D::Error> {
        Vec::<Scalar>::deserialize(d)?
            .into_iter()
            .map(|x| parse_integer(&x.text()).map_err(D::Error::custom))
            .collect()
    }
}

pub mod integer_matrix {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(m: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(m.len()))?;
        for row in m {
            let row: Vec<String> = row.iter().map(ToString::to_string).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Integer>>, D::Error> {
        Vec::<Vec<Scalar>>::deserialize(d)?
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| parse_integer(&x.text()).map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

pub mod integer_pair {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt; 2], s: S) -> Result<S::Ok, S::Error> {
        super::integer_vec::serialize(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Integer; 2], D::Error> {
        let v = super::integer_vec::deserialize(d)?;
        <[Integer; 2]>::try_from(v).map_err(|_| D::Error::custom("expected two integers"))
    }
}
