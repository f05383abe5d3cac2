//! Rectangular result tables with deterministic CSV and JSON emission.
//!
//! Floating-point values are written with 17 significant digits so every
//! number round-trips to the same double. Emission is byte-deterministic
//! for identical inputs, which makes golden-file testing valid.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Str(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite number in row {row}")]
    NonFinite { row: usize },
}

#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ResultTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: impl IntoIterator<Item = Value>) -> Result<(), TableError> {
        let row: Vec<Value> = row.into_iter().collect();
        if row.len() != self.columns.len() {
            return Err(TableError::RaggedRow {
                row: self.rows.len(),
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        for v in &row {
            if let Value::Num(x) = v {
                if !x.is_finite() {
                    return Err(TableError::NonFinite {
                        row: self.rows.len(),
                    });
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn emit(&self, dialect: Dialect) -> String {
        match dialect {
            Dialect::Csv => self.to_csv(),
            Dialect::Json => self.to_json(),
        }
    }

    /// Header row plus one comma-separated line per row, `\n` endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| csv_escape(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match v {
                    Value::Num(x) => {
                        let _ = write!(out, "{}", format_num(*x));
                    }
                    Value::Int(x) => {
                        let _ = write!(out, "{x}");
                    }
                    Value::Str(s) => out.push_str(&csv_escape(s)),
                }
            }
            out.push('\n');
        }
        out
    }

    /// JSON array of objects, one per row, keys in column order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n  {");
            for (j, (col, v)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: ", json_string(col));
                match v {
                    Value::Num(x) => {
                        let _ = write!(out, "{}", format_num(*x));
                    }
                    Value::Int(x) => {
                        let _ = write!(out, "{x}");
                    }
                    Value::Str(s) => {
                        let _ = write!(out, "{}", json_string(s));
                    }
                }
            }
            out.push('}');
        }
        out.push_str("\n]\n");
        out
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn format_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_table() {
        let mut t = ResultTable::new(["x"]);
        t.push_row([Value::Num(1.5)]).unwrap();
        assert_eq!(t.to_csv(), "x\n1.5000000000000000e0\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = ResultTable::new(["a", "b"]);
        assert_eq!(
            t.push_row([Value::Int(1)]),
            Err(TableError::RaggedRow {
                row: 0,
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn csv_numbers_round_trip() {
        let values = [
            2.5,
            1.0 / 3.0,
            -1.2345678901234567e-300,
            6.02214076e23,
            0.1 + 0.2,
        ];
        for &v in &values {
            let s = format_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn json_parses_with_a_standard_parser() {
        let mut t = ResultTable::new(["t", "label"]);
        t.push_row([Value::Num(0.5), Value::Str("a \"b\"\n".into())])
            .unwrap();
        t.push_row([Value::Num(-1.25e-7), Value::Str("c".into())])
            .unwrap();
        let json = t.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = parsed.as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["t"].as_f64().unwrap(), 0.5);
        assert_eq!(rows[0]["label"].as_str().unwrap(), "a \"b\"\n");
        assert_eq!(rows[1]["t"].as_f64().unwrap(), -1.25e-7);
    }

    #[test]
    fn emission_is_deterministic() {
        let build = || {
            let mut t = ResultTable::new(["a", "b"]);
            t.push_row([Value::Num(1.0 / 7.0), Value::Int(-3)]).unwrap();
            t
        };
        assert_eq!(build().to_csv(), build().to_csv());
        assert_eq!(build().to_json(), build().to_json());
    }
}
