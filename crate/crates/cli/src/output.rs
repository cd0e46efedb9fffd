//! Deterministic CSV and JSON writers. Floats always carry 17 significant
//! digits so identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

/// `x` with 17 significant digits in scientific notation, exponent always
/// signed (the form serde_json emits, so CSV and JSON agree).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma separated, a `# config_sha256=...` line, then the header row.
    pub fn render(&self, config_hash: &str) -> String {
        let mut out = format!("# config_sha256={config_hash}\n");
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(x) => fmt_f64(*x),
                    Cell::I(i) => i.to_string(),
                    Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                    Cell::S(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rewrites every non-integer number with 17 significant digits; non-finite
/// values become null.
pub fn normalize_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x.is_finite() {
                serde_json::from_str(&fmt_f64(x)).expect("formatted float parses")
            } else {
                Value::Null
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize_json(v))).collect()),
        other => other,
    }
}

pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub struct Writer {
    pub dir: PathBuf,
    pub config_hash: String,
    pub written: Vec<String>,
}

impl Writer {
    pub fn new(dir: &Path, config_hash: String) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf(), config_hash, written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> std::io::Result<()> {
        let file = format!("{name}.csv");
        fs::write(self.dir.join(&file), table.render(&self.config_hash))?;
        self.written.push(file);
        Ok(())
    }

    pub fn json(&mut self, name: &str, mut value: Value) -> std::io::Result<()> {
        if let Value::Object(o) = &mut value {
            o.insert("config_sha256".into(), Value::String(self.config_hash.clone()));
        }
        let file = format!("{name}.json");
        let mut text = serde_json::to_string_pretty(&normalize_json(value)).expect("json serializes");
        text.push('\n');
        fs::write(self.dir.join(&file), text)?;
        self.written.push(file);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e+0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn json_numbers_are_fixed_width() {
        let v = normalize_json(serde_json::json!({"a": 0.5, "b": [1, 2.0], "c": f64::NAN}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":5.0000000000000000e-1,"b":[1,2.0000000000000000e+0],"c":null}"#);
    }

    #[test]
    fn csv_quotes_and_hash_line() {
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![1.0.into(), "a,b".into()]);
        assert_eq!(t.render("abc"), "# config_sha256=abc\nx,label\n1.0000000000000000e+0,\"a,b\"\n");
    }
}
