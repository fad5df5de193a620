//! Interaction JSON and the CSV dialect of every table the lab writes.

use latticetherm_core::Interaction;
use serde::Serialize;
use serde_json::Value;

use crate::config::Source;
use crate::error::{LabError, Result};
use crate::locate::FieldPath;

#[derive(Serialize)]
struct InteractionDoc {
    site_dim: usize,
    terms: Vec<TermDoc>,
}

#[derive(Serialize)]
struct TermDoc {
    shape: Vec<Vec<i64>>,
    matrix: Vec<[f64; 2]>,
}

/// `{site_dim, terms: [{shape, matrix}]}` with row-major `[re, im]` entries.
///
/// Floats are written in shortest round-trip form, so
/// `interaction_from_json(&interaction_to_json(φ))` reproduces every bit.
pub fn interaction_to_json(phi: &Interaction) -> String {
    let terms = phi
        .terms()
        .map(|(shape, m)| TermDoc {
            shape: shape.points().iter().map(|p| p.coords().to_vec()).collect(),
            matrix: (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]).collect(),
        })
        .collect();
    let doc = InteractionDoc { site_dim: phi.site_dim(), terms };
    let mut out = serde_json::to_string_pretty(&doc).expect("interaction serializes");
    out.push('\n');
    out
}

/// Parses the format of [`interaction_to_json`]. An empty term list yields a
/// one-dimensional zero interaction.
pub fn interaction_from_json(text: &str) -> Result<Interaction> {
    let src = Source::new(text);
    let doc: Value = src.parse()?;
    let root = FieldPath::root();
    let obj = doc.as_object().ok_or_else(|| src.err(&root, "expected an object"))?;
    src.explicit(obj, &root, 1)
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A CSV table: comma separated, header row, LF line endings, UTF-8.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 input")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| LabError::io("csv header", e))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(|e| LabError::io("csv row", e))?.iter().map(String::from).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn has_columns(&self, names: &[&str]) -> bool {
        self.header.iter().map(String::as_str).eq(names.iter().copied())
    }
}

/// Rows of a thermo/certificate table: `(L, sites, value, bound)`.
pub fn thermo_table(rows: impl IntoIterator<Item = (usize, usize, f64, f64)>) -> Table {
    let mut t = Table::new(&["L", "sites", "value", "bound"]);
    for (l, sites, value, bound) in rows {
        t.push(vec![l.to_string(), sites.to_string(), fmt_f64(value), fmt_f64(bound)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [std::f64::consts::LN_2, -1e-300, 1.0 / 3.0, 0.1 + 0.2, f64::MAX, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            assert_eq!(s.split('e').next().unwrap().replace(['-', '.'], "").len(), 17, "{s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY).parse::<f64>().unwrap(), f64::INFINITY);
    }

    #[test]
    fn csv_dialect() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let text = t.to_csv();
        assert_eq!(text, "a,b\n1,\"x,y\"\n");
        assert_eq!(Table::from_csv(&text).unwrap(), t);
    }
}
