//! JSON and CSV output with floats written to 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::hyperbolic::{Branch, ManifoldSegment, Side};

pub const SCHEMA_VERSION: u32 = 1;

/// `1.2345678901234567e0` style; non-finite values become `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, serde_json::Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope<'a, M: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub metadata: M,
    pub result: R,
}

impl<'a, M: Serialize, R: Serialize> Envelope<'a, M, R> {
    pub fn new(command: &'a str, metadata: M, result: R) -> Self {
        Self { schema_version: SCHEMA_VERSION, command, metadata, result }
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Stable => "stable",
        Branch::Unstable => "unstable",
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Plus => "+",
        Side::Minus => "-",
    }
}

/// Polylines as rows `branch,side,index,phi,p`.
pub fn write_manifold_csv<W: Write>(out: W, segments: &[ManifoldSegment]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["branch", "side", "index", "phi", "p"])?;
    for seg in segments {
        for (i, x) in seg.points.iter().enumerate() {
            w.write_record([
                branch_name(seg.branch),
                side_name(seg.side),
                &i.to_string(),
                &fmt_f64(x.phi),
                &fmt_f64(x.p),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
