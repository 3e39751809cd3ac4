//! Output records. Every command produces a [`Table`] with a fixed column
//! list, its rows in deterministic order and an optional summary line.
//!
//! * `jsonl`: one object per row with keys in column order, then the summary object.
//! * `csv`: header row and data rows; the summary goes to stderr as `# key=value`.
//! * `table`: aligned columns, then `key: value` summary lines.
//!
//! Rationals are strings `p/q` (`p` for integers); floats carry 12
//! significant digits; non-finite floats are `null`.

use std::fmt::Write as _;
use std::io::{self, Write};

use nilgeom_core::rational::{fmt_q, Q};

#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Rat(Q),
    Str(String),
    List(Vec<Val>),
}

impl From<&str> for Val {
    fn from(s: &str) -> Self {
        Val::Str(s.to_string())
    }
}

impl From<String> for Val {
    fn from(s: String) -> Self {
        Val::Str(s)
    }
}

impl From<usize> for Val {
    fn from(v: usize) -> Self {
        Val::Int(v as i64)
    }
}

impl From<f64> for Val {
    fn from(v: f64) -> Self {
        Val::Float(v)
    }
}

impl From<bool> for Val {
    fn from(v: bool) -> Self {
        Val::Bool(v)
    }
}

impl From<&Q> for Val {
    fn from(v: &Q) -> Self {
        Val::Rat(v.clone())
    }
}

pub fn rats(v: &[Q]) -> Val {
    Val::List(v.iter().map(Val::from).collect())
}

pub fn floats(v: &[f64]) -> Val {
    Val::List(v.iter().map(|&x| Val::Float(x)).collect())
}

/// Shortest decimal of `x` rounded to 12 significant digits.
pub fn fmt_float(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some("0".to_string());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float");
    let s = format!("{rounded}");
    // `{}` never uses exponents; switch for very large or small magnitudes
    if s.len() > 20 {
        let e = format!("{rounded:e}");
        return Some(e);
    }
    Some(s)
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Val>>,
    pub summary: Option<Vec<(&'static str, Val)>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: None,
        }
    }

    pub fn push(&mut self, row: Vec<Val>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Table) {
        self.rows.extend(other.rows);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Jsonl,
    Csv,
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

pub fn to_json(v: &Val) -> String {
    match v {
        Val::Null => "null".into(),
        Val::Bool(b) => b.to_string(),
        Val::Int(i) => i.to_string(),
        Val::Float(x) => fmt_float(*x).unwrap_or_else(|| "null".into()),
        Val::Rat(q) => json_string(&fmt_q(q)),
        Val::Str(s) => json_string(s),
        Val::List(items) => {
            let parts: Vec<String> = items.iter().map(to_json).collect();
            format!("[{}]", parts.join(","))
        }
    }
}

fn json_object(keys: &[&str], vals: &[Val]) -> String {
    let mut s = String::from("{");
    for (i, (k, v)) in keys.iter().zip(vals).enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}:{}", json_string(k), to_json(v));
    }
    s.push('}');
    s
}

/// Plain text for csv cells and table columns; lists are `[a;b;…]`.
pub fn to_text(v: &Val) -> String {
    match v {
        Val::Null => String::new(),
        Val::Bool(b) => b.to_string(),
        Val::Int(i) => i.to_string(),
        Val::Float(x) => fmt_float(*x).unwrap_or_else(|| "nan".into()),
        Val::Rat(q) => fmt_q(q),
        Val::Str(s) => s.clone(),
        Val::List(items) => {
            let parts: Vec<String> = items.iter().map(to_text).collect();
            format!("[{}]", parts.join(";"))
        }
    }
}

pub fn emit(t: &Table, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Jsonl => {
            for r in &t.rows {
                writeln!(out, "{}", json_object(&t.columns, r))?;
            }
            if let Some(s) = &t.summary {
                let (k, v): (Vec<&str>, Vec<Val>) = s.iter().cloned().unzip();
                writeln!(out, "{}", json_object(&k, &v))?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.columns)?;
            for r in &t.rows {
                w.write_record(r.iter().map(to_text))?;
            }
            let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
            out.write_all(&bytes)?;
            if let Some(s) = &t.summary {
                for (k, v) in s {
                    writeln!(err, "# {k}={}", to_text(v))?;
                }
            }
        }
        Format::Table => {
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(to_text).collect()).collect();
            let widths: Vec<usize> = t
                .columns
                .iter()
                .enumerate()
                .map(|(j, c)| cells.iter().map(|r| r[j].chars().count()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |items: Vec<&str>| {
                let padded: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:<w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(t.columns.clone()))?;
            for r in &cells {
                writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
            }
            if let Some(s) = &t.summary {
                for (k, v) in s {
                    writeln!(out, "{k}: {}", to_text(v))?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nilgeom_core::rational::qr;

    #[test]
    fn floats_keep_twelve_digits() {
        assert_eq!(fmt_float(1.0).unwrap(), "1");
        assert_eq!(fmt_float(0.1 + 0.2).unwrap(), "0.3");
        assert_eq!(fmt_float(1.0 / 3.0).unwrap(), "0.333333333333");
        assert_eq!(fmt_float(-2.5e-13).unwrap(), "-0.00000000000025");
        assert_eq!(fmt_float(1e300).unwrap(), "1e300");
        assert!(fmt_float(f64::NAN).is_none());
    }

    #[test]
    fn json_values() {
        assert_eq!(to_json(&Val::Rat(qr(-3, 4))), "\"-3/4\"");
        assert_eq!(to_json(&Val::List(vec![Val::Int(1), Val::Null, "a\"b".into()])), "[1,null,\"a\\\"b\"]");
    }
}
