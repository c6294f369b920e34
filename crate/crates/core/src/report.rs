//! CSV tables with `#` metadata lines and `%.12e` floats.

use std::fmt::Write as _;

/// `%.12e` formatting: `-1.234567890123e+05`, `nan`, `inf`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").expect("string write");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 fields"));
        out
    }
}

/// Reads a rendered table back: metadata pairs, header and rows.
pub fn parse(text: &str) -> Table {
    let mut t = Table::default();
    for line in text.lines() {
        if let Some(m) = line.strip_prefix("# ") {
            let (k, v) = m.split_once(": ").unwrap_or((m, ""));
            t.metadata.push((k.into(), v.into()));
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    if let Ok(h) = r.headers() {
        t.header = h.iter().map(String::from).collect();
    }
    t.rows = r
        .records()
        .filter_map(|rec| rec.ok())
        .map(|rec| rec.iter().map(String::from).collect())
        .collect();
    t
}
