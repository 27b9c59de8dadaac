//! Serde adapters writing rationals as `"p/q"` strings.

use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

use super::{parse_rat, rat_to_string, Rat};

pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    rat_to_string(r).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
    parse_rat(&String::deserialize(d)?).map_err(D::Error::custom)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(rat_to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|x| parse_rat(x).map_err(D::Error::custom))
            .collect()
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(rat_to_string).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|x| parse_rat(&x).map_err(D::Error::custom))
            .transpose()
    }
}

pub mod triple {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<[Rat; 3]>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|t| t.iter().map(rat_to_string).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[Rat; 3]>, D::Error> {
        let Some(v) = Option::<Vec<String>>::deserialize(d)? else {
            return Ok(None);
        };
        let parsed: Vec<Rat> = v
            .iter()
            .map(|x| parse_rat(x).map_err(D::Error::custom))
            .collect::<Result<_, _>>()?;
        <[Rat; 3]>::try_from(parsed)
            .map(Some)
            .map_err(|_| D::Error::custom("expected three entries"))
    }
}

pub mod rows {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|r| r.iter().map(rat_to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
        Vec::<Vec<String>>::deserialize(d)?
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| parse_rat(x).map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}
