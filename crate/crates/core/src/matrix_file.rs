//! Text formats read from the command line: matrix documents of the form
//! `{"rows": [[[re, im], ...], ...]}` and real literals such as `2.5` or
//! `8/3`.
//!
//! Locations in error messages are 1-based.

use serde_json::{Map, Value};

use crate::error::{input, Result};
use crate::linalg::{Complex, ComplexMatrix};

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        input(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| input("top level must be an object with a \"rows\" field"))?;
    let rows = rows_field(obj)?;
    if let Some(extra) = obj.keys().find(|k| k.as_str() != "rows") {
        return Err(input(format!("unexpected field {extra:?}")));
    }
    if rows.is_empty() {
        return Err(input("\"rows\" is empty"));
    }
    let mut cols = None;
    let mut data = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let r = i + 1;
        let entries = row
            .as_array()
            .ok_or_else(|| input(format!("row {r}: expected an array of [re, im] pairs")))?;
        if entries.is_empty() {
            return Err(input(format!("row {r}: empty row")));
        }
        match cols {
            None => cols = Some(entries.len()),
            Some(c) if c != entries.len() => {
                return Err(input(format!(
                    "row {r}: has {} entries, row 1 has {c}",
                    entries.len()
                )))
            }
            Some(_) => {}
        }
        for (j, entry) in entries.iter().enumerate() {
            data.push(parse_entry(entry).map_err(|msg| input(format!("row {r}, column {}: {msg}", j + 1)))?);
        }
    }
    let cols = cols.expect("at least one row");
    ComplexMatrix::from_vec(rows.len(), cols, data)
}

fn rows_field(obj: &Map<String, Value>) -> Result<&Vec<Value>> {
    obj.get("rows")
        .ok_or_else(|| input("missing \"rows\" field"))?
        .as_array()
        .ok_or_else(|| input("\"rows\" must be an array"))
}

fn parse_entry(entry: &Value) -> std::result::Result<Complex, String> {
    let pair = match entry.as_array() {
        Some(p) if p.len() == 2 => p,
        _ => return Err(format!("expected [re, im], got {entry}")),
    };
    let part = |v: &Value| {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("expected a finite number, got {v}"))
    };
    Ok(Complex::new(part(&pair[0])?, part(&pair[1])?))
}

/// Serializes `m` in the format read by [`parse_matrix`]. Numbers use
/// shortest round-trip form, so parsing the result gives back `m` exactly.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let rows: Vec<Vec<[f64; 2]>> = m
        .to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect();
    serde_json::json!({ "rows": rows }).to_string()
}

/// A decimal literal or a fraction `p/q` of two decimals, finite either way.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let number = |t: &str| -> Result<f64> {
        let t = t.trim();
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(input(format!("invalid number {t:?}"))),
        }
    };
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (number(p)?, number(q)?);
            if q == 0.0 {
                return Err(input(format!("zero denominator in {s:?}")));
            }
            p / q
        }
        None => number(s)?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(input(format!("{s:?} is not finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    fn message(r: Result<ComplexMatrix>) -> String {
        match r {
            Err(Error::Input(msg)) => msg,
            other => panic!("expected an input error, got {other:?}"),
        }
    }

    #[test]
    fn documented_examples() {
        let id = parse_matrix(r#"{"rows": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert_eq!(id, ComplexMatrix::identity(2));
        let i = parse_matrix(r#"{"rows": [[[0,1]]]}"#).unwrap();
        assert_eq!(i[(0, 0)], Complex::new(0.0, 1.0));
        assert!(message(parse_matrix(r#"{"cols": []}"#)).contains("missing \"rows\""));
    }

    #[test]
    fn errors_carry_locations() {
        let ragged = message(parse_matrix(r#"{"rows": [[[1,0],[2,0]],[[3,0]]]}"#));
        assert!(ragged.starts_with("row 2:"), "{ragged}");
        let bad = message(parse_matrix(r#"{"rows": [[[1,0],[2,"x"]]]}"#));
        assert!(bad.starts_with("row 1, column 2:"), "{bad}");
        let short = message(parse_matrix(r#"{"rows": [[[1,0]],[[1]]]}"#));
        assert!(short.starts_with("row 2, column 1:"), "{short}");
        let syntax = message(parse_matrix("{\"rows\": [\n[[1,0]]"));
        assert!(syntax.starts_with("line 2"), "{syntax}");
        assert!(parse_matrix(r#"{"rows": []}"#).is_err());
        assert!(parse_matrix(r#"{"rows": [[]]}"#).is_err());
        assert!(parse_matrix(r#"{"rows": [[[1,0]]], "extra": 1}"#).is_err());
        assert!(parse_matrix("[1, 2]").is_err());
        assert!(parse_matrix(r#"{"rows": [[[1e400,0]]]}"#).is_err());
    }

    #[test]
    fn rectangular_matrices_parse() {
        let m = parse_matrix(r#"{"rows": [[[1,0],[2,0],[3,0]]]}"#).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (1, 3));
    }

    #[test]
    fn real_literals() {
        assert_eq!(parse_real("8/3").unwrap(), 8.0 / 3.0);
        assert_eq!(parse_real(" 2.6667 ").unwrap(), 2.6667);
        assert_eq!(parse_real("-1e-3").unwrap(), -1e-3);
        for bad in ["", "1/0", "abc", "nan", "inf", "1/", "/2", "1/2/3", "1e400"] {
            assert!(parse_real(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn json_round_trip(
            rows in 1usize..4,
            cols in 1usize..4,
            seed in prop::collection::vec(-1e12f64..1e12, 18),
        ) {
            let data: Vec<Complex> = (0..rows * cols)
                .map(|k| Complex::new(seed[2 * k], seed[2 * k + 1] * 1e-9))
                .collect();
            let m = ComplexMatrix::from_vec(rows, cols, data).unwrap();
            prop_assert_eq!(parse_matrix(&matrix_to_json(&m)).unwrap(), m);
        }

        #[test]
        fn arbitrary_text_never_panics(s in ".{0,64}") {
            let _ = parse_matrix(&s);
            let _ = parse_real(&s);
        }
    }
}
