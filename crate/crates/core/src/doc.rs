//! Flat `key=value` text documents shared by specs, approximants, measures,
//! chains and cut solutions.
//!
//! One entry per line; `#` starts a comment line. Complex numbers are written
//! as `re,im` and lists are `;`-separated. Floats use the shortest
//! representation that round-trips.

use std::fmt::Write as _;

use crate::error::{LabError, Result};
use crate::num::C64;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, String)>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn push_f64(&mut self, key: &str, v: f64) {
        self.push(key, fmt_f64(v));
    }

    pub fn push_complexes(&mut self, key: &str, zs: &[C64]) {
        self.push(key, fmt_complex_list(zs));
    }

    pub fn push_reals(&mut self, key: &str, xs: &[f64]) {
        self.push(key, xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";"));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| LabError::Parse(format!("missing key `{key}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.require(key)?)
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.require(key)?
            .trim()
            .parse()
            .map_err(|_| LabError::Parse(format!("`{key}` is not a count")))
    }

    pub fn get_complexes(&self, key: &str) -> Result<Vec<C64>> {
        parse_complex_list(self.require(key)?)
    }

    pub fn get_reals(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?.trim();
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(';').map(parse_f64).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDoc::new();
        for (ln, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| LabError::Parse(format!("line {}: expected key=value", ln + 1)))?;
            let k = k.trim();
            if doc.get(k).is_some() {
                return Err(LabError::Parse(format!("line {}: duplicate key `{k}`", ln + 1)));
            }
            doc.push(k, v.trim());
        }
        Ok(doc)
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => t.parse().map_err(|_| LabError::Parse(format!("`{t}` is not a number"))),
    }
}

pub fn fmt_complex(z: C64) -> String {
    format!("{},{}", fmt_f64(z.re), fmt_f64(z.im))
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| LabError::Parse(format!("`{s}` is not a re,im pair")))?;
    Ok(C64::new(parse_f64(a)?, parse_f64(b)?))
}

pub fn fmt_complex_list(zs: &[C64]) -> String {
    zs.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(";")
}

pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(';').map(parse_complex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_render() {
        let mut d = KvDoc::new();
        d.push("kind", "x");
        d.push_complexes("pts", &[C64::new(0.1, -2.0), C64::new(1e-300, 3.5)]);
        d.push_f64("r", 0.1 + 0.2);
        let back = KvDoc::parse(&d.render()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.get_f64("r").unwrap(), 0.1 + 0.2);
        assert!(KvDoc::parse("a=1\na=2").is_err());
        assert!(KvDoc::parse("novalue").is_err());
    }
}
