use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use gcmds::space::io::fmt_f64;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: u64 = 1;

/// Named outputs of one command. The first one goes to stdout when no
/// output directory is given.
#[derive(Default)]
pub struct Artifacts {
    items: Vec<(String, String)>,
}

impl Artifacts {
    pub fn push(&mut self, name: &str, body: String) {
        self.items.push((name.to_string(), body));
    }

    pub fn json(&mut self, name: &str, doc: Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.push(name, text);
        Ok(())
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        match out {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for (name, body) in &self.items {
                    let path = dir.join(name);
                    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                }
            }
            None => {
                if let Some((_, body)) = self.items.first() {
                    let mut stdout = std::io::stdout().lock();
                    stdout.write_all(body.as_bytes())?;
                    stdout.flush()?;
                }
            }
        }
        Ok(())
    }
}

/// A float as a JSON number with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float is a JSON number"))
}

pub fn nums<'a>(xs: impl IntoIterator<Item = &'a f64>) -> Value {
    Value::Array(xs.into_iter().map(|x| num(*x)).collect())
}

/// Serializes `v` and rewrites every float in the fixed format.
pub fn to_value(v: &impl Serialize) -> Result<Value> {
    let mut value = serde_json::to_value(v)?;
    normalize(&mut value);
    Ok(value)
}

fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            *v = num(n.as_f64().unwrap_or(f64::NAN));
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

/// Starts a document with the schema version and command name.
pub fn document(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("command".into(), command.into());
    m
}

pub fn csv_matrix(m: &DMatrix<f64>, comment: Option<&str>) -> String {
    let mut buf = Vec::new();
    if let Some(c) = comment {
        buf.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    gcmds::space::io::write_csv_matrix(&mut buf, m, None).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn csv_weights(w: &[f64]) -> String {
    let mut buf = Vec::new();
    gcmds::space::io::write_weights(&mut buf, w).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// CSV table with a header row; floats in the fixed format.
pub struct Table {
    text: String,
}

pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Table {
    pub fn new(comment: Option<&str>, header: &[&str]) -> Self {
        let mut text = String::new();
        if let Some(c) = comment {
            text.push_str(&format!("# {c}\n"));
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Table { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) if x.is_finite() => fmt_f64(*x),
                Cell::Float(_) => String::new(),
                Cell::Bool(b) => b.to_string(),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_rewritten() {
        let v = to_value(&serde_json::json!({"a": 0.1, "b": [1, 2.5], "c": "x"})).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"a":1.0000000000000001e-1,"b":[1,2.5000000000000000e+0],"c":"x"}"#);
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
