//! Report emitters: canonical JSON, a CSV summary and TSV plot data.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// Pretty JSON whose floats always carry 17 significant digits.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with sorted object keys and fixed float formatting, so equal
/// values always produce equal bytes. Non-finite floats become `null`.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    // going through Value sorts every object's keys
    let value = serde_json::to_value(value).expect("report serializes");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("writing to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// One row of the summary table; `None` columns mark a failed metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: String,
    pub stats: Option<(f64, f64, f64)>,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("metric,min,max,mean\n");
    for r in rows {
        match r.stats {
            Some((min, max, mean)) => {
                let _ = writeln!(out, "{},{min:.16e},{max:.16e},{mean:.16e}", r.metric);
            }
            None => {
                let _ = writeln!(out, "{},,,", r.metric);
            }
        }
    }
    out
}

/// Columns `component`, `ratio`, `random_ratio`; a shorter series leaves its
/// cell empty.
pub fn spectrum_tsv(spectrum: &[f64], random: &[f64]) -> String {
    let mut out = String::from("component\tratio\trandom_ratio\n");
    for i in 0..spectrum.len().max(random.len()) {
        let cell = |s: &[f64]| s.get(i).map(|x| format!("{x:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "{}\t{}\t{}", i + 1, cell(spectrum), cell(random));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionRow {
    pub word: String,
    pub label: String,
    pub cluster: usize,
    pub x: f64,
    pub y: f64,
}

pub fn projection_tsv(rows: &[ProjectionRow]) -> String {
    let mut out = String::from("word\tlabel\tcluster\tx\ty\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{:.16e}\t{:.16e}", r.word, r.label, r.cluster, r.x, r.y);
    }
    out
}

/// Reads a float field back out of a report value.
pub fn get_f64(v: &Value, pointer: &str) -> Option<f64> {
    v.pointer(pointer).and_then(Value::as_f64)
}
