//! Shared JSON text format and the canonical writer.
//!
//! Matrices are `{"rows":N,"cols":M,"data":[[re,im],...]}` in row-major order.
//! States add `"dim"`, channels add `"in_dim"`, `"out_dim"` and `"kraus"`.

use serde_json::{json, Map, Value};

use super::{CMat, DensityMatrix, QError, QuantumChannel, C64};

pub fn matrix_to_json(m: &CMat) -> Value {
    let mut data = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            data.push(json!([z.re, z.im]));
        }
    }
    json!({"rows": m.nrows(), "cols": m.ncols(), "data": data})
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, QError> {
    v.get(key).ok_or_else(|| QError::Malformed(format!("missing field `{key}`")))
}

fn count(v: &Value, key: &str) -> Result<usize, QError> {
    field(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| QError::Malformed(format!("`{key}` must be a non-negative integer")))
}

fn number(v: &Value) -> Result<f64, QError> {
    v.as_f64().ok_or_else(|| QError::Malformed("matrix entry is not a number".into()))
}

pub fn matrix_from_json(v: &Value) -> Result<CMat, QError> {
    let rows = count(v, "rows")?;
    let cols = count(v, "cols")?;
    let data = field(v, "data")?
        .as_array()
        .ok_or_else(|| QError::Malformed("`data` must be an array".into()))?;
    if data.len() != rows * cols {
        return Err(QError::Malformed(format!(
            "`data` has {} entries, expected {}",
            data.len(),
            rows * cols
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (k, e) in data.iter().enumerate() {
        let z = match e {
            Value::Array(p) if p.len() == 2 => C64::new(number(&p[0])?, number(&p[1])?),
            Value::Number(_) => C64::new(number(e)?, 0.0),
            _ => return Err(QError::Malformed(format!("entry {k} is not [re, im]"))),
        };
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(QError::NonFinite);
        }
        m[(k / cols, k % cols)] = z;
    }
    Ok(m)
}

pub fn state_to_json(rho: &DensityMatrix) -> Value {
    let mut v = matrix_to_json(rho.matrix());
    v["dim"] = json!(rho.dim());
    v
}

pub fn state_from_json(v: &Value) -> Result<DensityMatrix, QError> {
    let m = matrix_from_json(v)?;
    if let Some(d) = v.get("dim") {
        if d.as_u64() != Some(m.nrows() as u64) {
            return Err(QError::Malformed("`dim` disagrees with `rows`".into()));
        }
    }
    DensityMatrix::new(m)
}

pub fn channel_to_json(ch: &QuantumChannel) -> Value {
    json!({
        "in_dim": ch.in_dim(),
        "out_dim": ch.out_dim(),
        "kraus": ch.kraus().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn channel_from_json(v: &Value) -> Result<QuantumChannel, QError> {
    let ks = field(v, "kraus")?
        .as_array()
        .ok_or_else(|| QError::Malformed("`kraus` must be an array".into()))?;
    let kraus = ks.iter().map(matrix_from_json).collect::<Result<Vec<_>, _>>()?;
    let ch = QuantumChannel::new(kraus)?;
    for (key, want) in [("in_dim", ch.in_dim()), ("out_dim", ch.out_dim())] {
        if let Some(d) = v.get(key) {
            if d.as_u64() != Some(want as u64) {
                return Err(QError::Malformed(format!("`{key}` disagrees with Kraus shape")));
            }
        }
    }
    Ok(ch)
}

/// Sorted keys, no whitespace, floats with 17 significant digits.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(0.0);
                out.push_str(&format!("{x:.16e}"));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => write_object(m, out),
    }
}

fn write_object(m: &Map<String, Value>, out: &mut String) {
    let mut keys: Vec<&String> = m.keys().collect();
    keys.sort();
    out.push('{');
    for (i, k) in keys.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&Value::String(k.clone()).to_string());
        out.push(':');
        write_value(&m[k], out);
    }
    out.push('}');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::PureState;

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_row_slice(2, 3, &[
            C64::new(1.0, 0.5), C64::new(0.0, -1.0), C64::new(0.1, 0.0),
            C64::new(-2.0, 0.0), C64::new(0.0, 0.0), C64::new(1e-17, 3.0),
        ]);
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn canonical_text_round_trips_bitwise() {
        let rho = PureState::from_real(&[1.0, 2.0, -0.3]).unwrap().density();
        let text = to_canonical_string(&state_to_json(&rho));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(state_from_json(&back).unwrap(), rho);
        assert_eq!(to_canonical_string(&back), text);
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({"b": 1, "a": [0.5, 2], "c": {"z": null, "y": true}});
        assert_eq!(to_canonical_string(&v), r#"{"a":[5.0000000000000000e-1,2],"b":1,"c":{"y":true,"z":null}}"#);
    }

    #[test]
    fn short_data_rejected() {
        let v = json!({"rows": 2, "cols": 2, "data": [[1.0, 0.0]]});
        assert!(matrix_from_json(&v).is_err());
    }
}
