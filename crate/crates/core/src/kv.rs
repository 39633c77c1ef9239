//! Flat `key = value` config text shared by the pipeline and scene-spec
//! parsers. One assignment per line, `#` starts a comment, blank lines
//! ignored. Parsing is strict: malformed lines, duplicate keys, and (at
//! the consumer level) unknown keys are errors rather than warnings.

use crate::error::{Error, Result};
use std::fmt::Display;
use std::str::FromStr;

pub(crate) fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected `key = value`, got `{}`",
                i + 1,
                raw.trim_end()
            )));
        };
        let key = k.trim();
        let val = v.trim();
        if key.is_empty() || val.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "line {}: empty key or value",
                i + 1
            )));
        }
        if out.iter().any(|(existing, _)| existing == key) {
            return Err(Error::InvalidConfig(format!(
                "line {}: duplicate key `{key}`",
                i + 1
            )));
        }
        out.push((key.to_string(), val.to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_num<T>(key: &str, val: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    val.parse().map_err(|e| {
        Error::InvalidConfig(format!("key `{key}`: cannot parse `{val}`: {e}"))
    })
}

pub(crate) fn parse_bool(key: &str, val: &str) -> Result<bool> {
    match val {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::InvalidConfig(format!(
            "key `{key}`: expected `true` or `false`, got `{val}`"
        ))),
    }
}

pub(crate) fn unknown_key(key: &str) -> Error {
    Error::InvalidConfig(format!("unknown key `{key}`"))
}
