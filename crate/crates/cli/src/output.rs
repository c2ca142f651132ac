//! Table, JSON and text renderings of command results.

use serde_json::{json, Map, Value};
use trapmeasure_core::exact::{sig_decimal, to_f64};
use trapmeasure_core::Rational;

pub fn decimal(r: &Rational) -> String {
    sig_decimal(to_f64(r), 15)
}

pub fn float(x: f64) -> String {
    sig_decimal(x, 15)
}

/// A CSV table: header row plus string cells.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Header names for a rational column: numerator, denominator, decimal.
    pub fn rational_headers(prefix: &str) -> [String; 3] {
        [
            format!("{prefix}_num"),
            format!("{prefix}_den"),
            format!("{prefix}_decimal"),
        ]
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Accumulates one row, expanding rationals into three cells.
#[derive(Debug, Default)]
pub struct Row(Vec<String>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }

    pub fn cell(mut self, v: impl ToString) -> Self {
        self.0.push(v.to_string());
        self
    }

    pub fn rational(mut self, r: &Rational) -> Self {
        self.0.push(r.numer().to_string());
        self.0.push(r.denom().to_string());
        self.0.push(decimal(r));
        self
    }

    pub fn float(self, x: f64) -> Self {
        self.cell(float(x))
    }

    pub fn done(self) -> Vec<String> {
        self.0
    }
}

/// Headers mixing plain and rational columns; rational ones are marked with a leading `=`.
pub fn headers(spec: &[&str]) -> Vec<String> {
    spec.iter()
        .flat_map(|h| match h.strip_prefix('=') {
            Some(prefix) => Table::rational_headers(prefix).to_vec(),
            None => vec![h.to_string()],
        })
        .collect()
}

/// Inserts `key` as an exact `"p/q"` string followed by `key_decimal`.
pub fn put_rational(map: &mut Map<String, Value>, key: &str, r: &Rational) {
    map.insert(key.to_string(), json!(r.to_string()));
    map.insert(format!("{key}_decimal"), json!(decimal(r)));
}

pub fn rational_object(pairs: &[(&str, &Rational)]) -> Map<String, Value> {
    let mut m = Map::new();
    for (k, r) in pairs {
        put_rational(&mut m, k, r);
    }
    m
}

/// What a command produced, in every format it supports.
#[derive(Debug)]
pub struct Output {
    pub table: Table,
    pub json: Value,
    /// Plain-text rendering used when no format is requested, if the command has one.
    pub text: Option<String>,
    /// Diagnostic lines for stderr (never part of the artifact).
    pub notes: Vec<String>,
    /// Set by verification commands when any row failed.
    pub violated: bool,
    pub default_format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
    Svg,
}

impl Output {
    pub fn new(table: Table, json: Value, default_format: Format) -> Self {
        Output {
            table,
            json,
            text: None,
            notes: Vec::new(),
            violated: false,
            default_format,
        }
    }

    pub fn render(&self, format: Option<Format>) -> anyhow::Result<String> {
        match format.unwrap_or(self.default_format) {
            Format::Text | Format::Svg => match &self.text {
                Some(t) => Ok(t.clone()),
                None => self.table.to_csv(),
            },
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trapmeasure_core::exact::rat;

    #[test]
    fn csv_quotes_permutations() {
        let mut t = Table::new(&["n", "argmin"]);
        t.rows.push(Row::new().cell(2).cell("2,1").done());
        assert_eq!(t.to_csv().unwrap(), "n,argmin\n2,\"2,1\"\n");
    }

    #[test]
    fn rational_cells() {
        let row = Row::new().rational(&rat(3, 4)).done();
        assert_eq!(row, vec!["3", "4", "0.75"]);
        assert_eq!(
            headers(&["n", "=alpha"]),
            vec!["n", "alpha_num", "alpha_den", "alpha_decimal"]
        );
    }
}
