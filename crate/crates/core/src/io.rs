//! JSON instance files.
//!
//! ```text
//! {"agents": n, "items": m, "values": [[rat, ...], ...]}
//! {"agents": n, "densities": [[{"l": rat, "r": rat, "a": rat, "b": rat}, ...], ...]}
//! ```
//!
//! `rat` is `"p/q"`, an integer or a decimal, as a string or a bare number.
//! Decimals are converted exactly, so `0.6` becomes `3/5`.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cake::{CakeError, PiecewiseDensity, Segment};
use crate::model::{Allocation, ModelError, Profile};
use crate::rational::{parse_rational, ParseRationalError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("malformed instance: {0}")]
    Format(String),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cake(#[from] CakeError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Goods(Profile<Rational>),
    Cake(Vec<PiecewiseDensity>),
}

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

fn rational(v: &Value) -> Result<Rational, IoError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) => Ok(parse_rational(&n.to_string())?),
        other => Err(format_err(format!("expected a rational, got {other}"))),
    }
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array()
        .ok_or_else(|| format_err(format!("`{what}` must be an array")))
}

fn declared(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>, IoError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| format_err(format!("`{key}` must be a nonnegative integer"))),
    }
}

fn check_declared(obj: &Map<String, Value>, key: &str, actual: usize) -> Result<(), IoError> {
    match declared(obj, key)? {
        Some(d) if d != actual => Err(format_err(format!(
            "`{key}` is {d} but the data has {actual}"
        ))),
        _ => Ok(()),
    }
}

/// Parses either instance kind, chosen by the presence of `values` or
/// `densities`.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| format_err("top level must be an object"))?;
    match (obj.get("values"), obj.get("densities")) {
        (Some(values), None) => {
            let rows = array(values, "values")?
                .iter()
                .map(|row| array(row, "values[i]")?.iter().map(rational).collect())
                .collect::<Result<Vec<Vec<Rational>>, IoError>>()?;
            let profile = Profile::new(rows)?;
            check_declared(obj, "agents", profile.agents())?;
            check_declared(obj, "items", profile.items())?;
            Ok(Instance::Goods(profile))
        }
        (None, Some(densities)) => {
            let fs = array(densities, "densities")?
                .iter()
                .map(|f| {
                    let segs = array(f, "densities[i]")?
                        .iter()
                        .map(|s| {
                            let field = |k: &str| {
                                s.get(k)
                                    .ok_or_else(|| format_err(format!("segment is missing `{k}`")))
                                    .and_then(rational)
                            };
                            Ok(Segment::new(
                                field("l")?,
                                field("r")?,
                                field("a")?,
                                field("b")?,
                            ))
                        })
                        .collect::<Result<Vec<_>, IoError>>()?;
                    Ok(PiecewiseDensity::new(segs)?)
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            if fs.is_empty() {
                return Err(format_err("no densities"));
            }
            check_declared(obj, "agents", fs.len())?;
            Ok(Instance::Cake(fs))
        }
        (Some(_), Some(_)) => Err(format_err("both `values` and `densities` present")),
        (None, None) => Err(format_err("missing `values` or `densities`")),
    }
}

pub fn parse_profile(text: &str) -> Result<Profile<Rational>, IoError> {
    match parse_instance(text)? {
        Instance::Goods(p) => Ok(p),
        Instance::Cake(_) => Err(format_err("expected a goods instance, found densities")),
    }
}

pub fn parse_cake(text: &str) -> Result<Vec<PiecewiseDensity>, IoError> {
    match parse_instance(text)? {
        Instance::Cake(fs) => Ok(fs),
        Instance::Goods(_) => Err(format_err("expected a cake instance, found values")),
    }
}

fn rat(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn profile_to_json(profile: &Profile<Rational>) -> Value {
    json!({
        "agents": profile.agents(),
        "items": profile.items(),
        "values": profile.rows().iter().map(|r| r.iter().map(rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn cake_to_json(densities: &[PiecewiseDensity]) -> Value {
    let fs: Vec<Value> = densities
        .iter()
        .map(|f| {
            Value::Array(
                f.segments()
                    .iter()
                    .map(
                        |s| json!({"l": rat(&s.l), "r": rat(&s.r), "a": rat(&s.a), "b": rat(&s.b)}),
                    )
                    .collect(),
            )
        })
        .collect();
    json!({ "agents": densities.len(), "densities": fs })
}

pub fn serialize_instance(instance: &Instance) -> String {
    let v = match instance {
        Instance::Goods(p) => profile_to_json(p),
        Instance::Cake(fs) => cake_to_json(fs),
    };
    serde_json::to_string(&v).expect("JSON values always serialize")
}

/// Parses a 1-based owner list such as `"1,1,2,2"`.
pub fn parse_owner_list(text: &str, agents: usize) -> Result<Allocation, IoError> {
    let owners = text
        .split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(format_err(format!(
                    "bad owner `{t}` (owners are 1-based agent numbers)"
                ))),
            }
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(Allocation::new(owners, agents)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn parses_goods() {
        let p = parse_profile(r#"{"values":[["5","4"],["6","1"]]}"#).unwrap();
        assert_eq!((p.agents(), p.items()), (2, 2));
        assert_eq!(p.value(1, 0), &int(6));
        let p = parse_profile(r#"{"values":[["1/3","2/3"]]}"#).unwrap();
        assert_eq!(p.row(0), &[ratio(1, 3), ratio(2, 3)]);
        let p = parse_profile(r#"{"agents":1,"items":3,"values":[[0.6, 2, "1e-1"]]}"#).unwrap();
        assert_eq!(p.row(0), &[ratio(3, 5), int(2), ratio(1, 10)]);
    }

    #[test]
    fn rejects_bad_goods() {
        assert!(matches!(parse_profile("{"), Err(IoError::Json(_))));
        assert!(matches!(
            parse_profile(r#"{"values":[["-1"]]}"#),
            Err(IoError::Model(_))
        ));
        assert!(matches!(
            parse_profile(r#"{"values":[["1","2"],["3"]]}"#),
            Err(IoError::Model(_))
        ));
        assert!(matches!(
            parse_profile(r#"{"agents":3,"values":[["1"]]}"#),
            Err(IoError::Format(_))
        ));
        assert!(matches!(
            parse_profile(r#"{"values":[["x"]]}"#),
            Err(IoError::Rational(_))
        ));
        assert!(matches!(
            parse_profile(r#"{"values":[[true]]}"#),
            Err(IoError::Format(_))
        ));
    }

    #[test]
    fn parses_cake() {
        let fs = parse_cake(
            r#"{"agents":2,"densities":[[{"l":"0","r":"1","a":"1","b":"0"}],
                [{"l":0,"r":"1/2","a":2,"b":0},{"l":"1/2","r":1,"a":0,"b":0}]]}"#,
        )
        .unwrap();
        assert_eq!(fs[0], PiecewiseDensity::uniform());
        assert_eq!(fs[1].segments().len(), 2);
    }

    #[test]
    fn unnormalized_density_is_reported() {
        let err = parse_cake(r#"{"densities":[[{"l":0,"r":1,"a":2,"b":0}]]}"#).unwrap_err();
        assert_eq!(err.to_string(), "unnormalized density");
    }

    #[test]
    fn round_trip() {
        let p = Profile::new(vec![vec![ratio(1, 3), int(0)], vec![int(7), ratio(22, 7)]]).unwrap();
        let text = serialize_instance(&Instance::Goods(p.clone()));
        assert_eq!(parse_instance(&text).unwrap(), Instance::Goods(p));
        let fs = vec![
            PiecewiseDensity::uniform(),
            PiecewiseDensity::linear(int(0), int(2)).unwrap(),
        ];
        let text = serialize_instance(&Instance::Cake(fs.clone()));
        assert_eq!(parse_instance(&text).unwrap(), Instance::Cake(fs));
    }

    #[test]
    fn owner_lists() {
        let a = parse_owner_list("1,1,2,2", 2).unwrap();
        assert_eq!(a.owners(), &[0, 0, 1, 1]);
        assert!(parse_owner_list("1,0", 2).is_err());
        assert!(parse_owner_list("1,3", 2).is_err());
    }
}
