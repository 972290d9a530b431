//! Canonical JSON: sorted keys, integers only, `"schema_version": 1` at the
//! top level, two-space indentation and a trailing newline.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

fn reject_floats(v: &Value, path: &mut String) -> Result<()> {
    match v {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => Err(Error::Format(format!("non-integer number at {path}"))),
        Value::Array(items) => items.iter().enumerate().try_for_each(|(i, item)| {
            let len = path.len();
            path.push_str(&format!("[{i}]"));
            reject_floats(item, path)?;
            path.truncate(len);
            Ok(())
        }),
        Value::Object(map) => map.iter().try_for_each(|(k, item)| {
            let len = path.len();
            path.push('.');
            path.push_str(k);
            reject_floats(item, path)?;
            path.truncate(len);
            Ok(())
        }),
        _ => Ok(()),
    }
}

/// Serialize `value` (which must serialize to an object) canonically.
pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    let mut v = serde_json::to_value(value)?;
    let Value::Object(map) = &mut v else {
        return Err(Error::Format("top-level value must be an object".into()));
    };
    if map.contains_key("schema_version") {
        return Err(Error::Format("schema_version is reserved".into()));
    }
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    reject_floats(&v, &mut String::from("$"))?;
    let mut out = serde_json::to_string_pretty(&v)?;
    out.push('\n');
    Ok(out)
}

/// Parse a canonical document, checking and stripping its schema version.
pub fn from_canonical_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut v: Value = serde_json::from_str(text)?;
    let Value::Object(map) = &mut v else {
        return Err(Error::Format("top-level value must be an object".into()));
    };
    match map.remove("schema_version").and_then(|s| s.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(Error::Format(format!("unsupported schema_version {other}"))),
        None => return Err(Error::Format("missing schema_version".into())),
    }
    Ok(serde_json::from_value(v)?)
}

/// `{"num": .., "den": ..}` for rationals; both parts must fit in 64 bits.
pub mod rational_json {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Rational;

    #[derive(Serialize, Deserialize)]
    struct Parts {
        num: i64,
        den: i64,
    }

    pub fn serialize<S: Serializer>(r: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        let num = r.numer().to_i64().ok_or_else(|| serde::ser::Error::custom("numerator exceeds 64 bits"))?;
        let den = r.denom().to_i64().ok_or_else(|| serde::ser::Error::custom("denominator exceeds 64 bits"))?;
        Parts { num, den }.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let p = Parts::deserialize(deserializer)?;
        if p.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(BigInt::from(p.num), BigInt::from(p.den)))
    }
}
