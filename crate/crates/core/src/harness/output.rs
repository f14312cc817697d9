use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::Trajectory;

pub const CSV_HEADER: [&str; 11] = [
    "case", "epsilon", "beta", "k", "x", "error", "A", "rhs", "margin", "iters", "ms",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format '{s}' (csv | json)"))),
        }
    }
}

/// One output line. Failed solves keep their row with `NaN` in the numeric
/// columns they could not fill.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case: String,
    #[serde(with = "lenient_f64")]
    pub epsilon: f64,
    #[serde(with = "lenient_f64")]
    pub beta: f64,
    pub k: u32,
    #[serde(with = "lenient_f64")]
    pub x: f64,
    #[serde(with = "lenient_f64")]
    pub error: f64,
    #[serde(rename = "A", with = "lenient_f64")]
    pub a: f64,
    #[serde(with = "lenient_f64")]
    pub rhs: f64,
    #[serde(with = "lenient_f64")]
    pub margin: f64,
    pub iters: usize,
    #[serde(with = "lenient_f64")]
    pub ms: f64,
}

/// Doubles that may be non-finite: JSON has no NaN or infinity, so those
/// are written as the strings `"NaN"`, `"inf"` and `"-inf"`.
mod lenient_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, \"NaN\", \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                v.parse()
                    .map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(V)
    }
}

/// 17 significant digits, enough to parse back to the same double.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.case.clone(),
            num(r.epsilon),
            num(r.beta),
            r.k.to_string(),
            num(r.x),
            num(r.error),
            num(r.a),
            num(r.rhs),
            num(r.margin),
            r.iters.to_string(),
            num(r.ms),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("unexpected csv header {header:?}")));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn render_json(rows: &[ResultRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|source| Error::Json {
        path: "<memory>".into(),
        source,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<Vec<ResultRow>> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        path: "<memory>".into(),
        source,
    })
}

pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows),
    }
}

/// Write rows to `path`, or to stdout when no path is given.
pub fn emit(rows: &[ResultRow], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("nothing to emit".into()));
    }
    write_text(&render(rows, format)?, path)
}

/// Write `text` to `path`, or to stdout.
pub fn write_text(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

/// Long-format dump `case,x,mode,u,ux` of a trajectory pair.
pub fn render_trajectory(
    case: &str,
    u: &Trajectory,
    ux: &Trajectory,
    format: OutputFormat,
) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["case", "x", "mode", "u", "ux"])?;
            for (i, (row, drow)) in u.values.iter().zip(&ux.values).enumerate() {
                for (p, (v, d)) in row.coeffs.iter().zip(&drow.coeffs).enumerate() {
                    w.write_record([
                        case.to_string(),
                        num(u.xs[i]),
                        p.to_string(),
                        num(*v),
                        num(*d),
                    ])?;
                }
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::Csv(e.into_error().into()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::Json => {
            let value = serde_json::json!({ "case": case, "u": u, "ux": ux });
            let mut s = serde_json::to_string_pretty(&value).map_err(|source| Error::Json {
                path: "<memory>".into(),
                source,
            })?;
            s.push('\n');
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(v: f64) -> ResultRow {
        ResultRow {
            case: "linear3".into(),
            epsilon: 1e-3,
            beta: 1e-3,
            k: 2,
            x: 0.125,
            error: v,
            a: 12.5,
            rhs: 40.0,
            margin: 27.5,
            iters: 0,
            ms: 0.0,
        }
    }

    #[test]
    fn one_row_is_two_lines() {
        let text = render_csv(&[row(0.1)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("linear3,1.0000000000000000e-3,"));
    }

    #[test]
    fn json_round_trip() {
        let rows = vec![row(0.1), row(2.5e-17), row(f64::INFINITY)];
        assert_eq!(parse_json(&render_json(&rows).unwrap()).unwrap(), rows);
        let nan = parse_json(&render_json(&[row(f64::NAN)]).unwrap()).unwrap();
        assert!(nan[0].error.is_nan());
    }

    #[test]
    fn failure_markers_survive_csv() {
        let back = parse_csv(&render_csv(&[row(f64::NAN)]).unwrap()).unwrap();
        assert!(back[0].error.is_nan());
    }

    #[test]
    fn emit_rejects_empty() {
        assert!(emit(&[], OutputFormat::Csv, None).is_err());
    }

    proptest! {
        #[test]
        fn csv_values_parse_back_bit_identical(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back = parse_csv(&render_csv(&[row(v)]).unwrap()).unwrap();
            prop_assert_eq!(back[0].error.to_bits(), v.to_bits());
        }
    }
}
