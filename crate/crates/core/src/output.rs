//! JSON and CSV emission with a fixed number of significant digits.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const DEFAULT_DIGITS: usize = 17;

/// `v` in scientific notation with `digits` significant digits; `nan`/`inf`
/// spelled as Rust prints them.
pub fn fmt_f64(v: f64, digits: usize) -> String {
    if v.is_finite() {
        format!("{:.*e}", digits.saturating_sub(1), v)
    } else {
        v.to_string()
    }
}

/// Pretty printer that writes floats with a fixed number of significant
/// digits. Non-finite floats become `null`.
struct Precise<'a> {
    pretty: PrettyFormatter<'a>,
    digits: usize,
}

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v, self.digits).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T, digits: usize) -> String {
    let mut buf = Vec::new();
    let fmt = Precise {
        pretty: PrettyFormatter::with_indent(b"  "),
        digits,
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T, digits: usize) -> io::Result<()> {
    std::fs::write(path, to_json(value, digits))
}

/// CSV text from a header and rows of already formatted fields.
pub fn to_csv<I, R>(header: &[&str], rows: I) -> io::Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("fields are UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        let x = 0.1 + 0.2;
        let s = fmt_f64(x, DEFAULT_DIGITS);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_uses_fixed_digits_and_null_for_nan() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: f64,
            c: Vec<f64>,
        }
        let s = to_json(
            &R {
                a: 1.5,
                b: f64::NAN,
                c: vec![-2.0],
            },
            5,
        );
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"], 1.5);
        assert!(v["b"].is_null());
        assert!(s.contains("1.5000e0"));
        assert!(s.contains("-2.0000e0"));
    }

    #[test]
    fn csv_quotes_when_needed() {
        let s = to_csv(
            &["kind", "x"],
            vec![vec!["a,b".to_string(), "1".to_string()]],
        )
        .unwrap();
        assert_eq!(s, "kind,x\n\"a,b\",1\n");
    }
}
