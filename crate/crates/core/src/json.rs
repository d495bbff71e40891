//! JSON encoding of supernumbers, matrices, and Γ forms.
//!
//! A supernumber is a list of terms `{"index": [1, 3], "coeff": c}` with
//! 1-based generator labels; `c` is a JSON number in float mode and a
//! `"p/q"` string in rational mode (either form is accepted on input).
//! A matrix is `{"shape": {"m", "n"}, "parity", "entries"}` with row-major
//! supernumber entries.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraConfig, MultiIndex, Supernumber};
use crate::isometry::GammaForm;
use crate::scalar::{RealMatrix, Scalar};
use crate::supermatrix::{BlockShape, ParityClass, SuperMatrix};

fn parse_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(path, format!("missing field {key:?}")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

pub fn supernumber_to_json<S: Scalar>(z: &Supernumber<S>) -> Value {
    Value::Array(
        z.terms()
            .map(|(mi, c)| json!({ "index": mi.labels(), "coeff": c.to_json() }))
            .collect(),
    )
}

pub fn supernumber_from_json<S: Scalar>(v: &Value, config: AlgebraConfig, path: &str) -> Result<Supernumber<S>> {
    // A bare number is accepted as a real supernumber.
    if v.is_number() || v.is_string() {
        let c = S::from_json(v).map_err(|e| parse_err(path, e))?;
        return Ok(Supernumber::scalar(config, c));
    }
    let mut terms = Vec::new();
    for (t, term) in as_array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{t}]");
        let labels: Vec<usize> = as_array(field(term, "index", &tp)?, &tp)?
            .iter()
            .map(|l| as_usize(l, &tp))
            .collect::<Result<_>>()?;
        let index = MultiIndex::from_generators(&labels).map_err(|e| parse_err(&tp, e))?;
        if index.max_label() > config.generators() {
            return Err(parse_err(&tp, format!("generator {} exceeds L = {}", index.max_label(), config.generators())));
        }
        let coeff = S::from_json(field(term, "coeff", &tp)?).map_err(|e| parse_err(&tp, e))?;
        terms.push((index, coeff));
    }
    Supernumber::from_terms(config, terms)
}

fn parity_name(p: ParityClass) -> &'static str {
    match p {
        ParityClass::Even => "even",
        ParityClass::Odd => "odd",
        ParityClass::General => "general",
    }
}

pub fn matrix_to_json<S: Scalar>(m: &SuperMatrix<S>) -> Value {
    let shape = m.shape();
    json!({
        "shape": { "m": shape.m, "n": shape.n },
        "parity": parity_name(m.parity()),
        "entries": m.entries().iter().map(supernumber_to_json).collect::<Vec<_>>(),
    })
}

pub fn matrix_from_json<S: Scalar>(v: &Value, config: AlgebraConfig, path: &str) -> Result<SuperMatrix<S>> {
    let shape_v = field(v, "shape", path)?;
    let sp = format!("{path}.shape");
    let shape = BlockShape::new(as_usize(field(shape_v, "m", &sp)?, &sp)?, as_usize(field(shape_v, "n", &sp)?, &sp)?);
    let parity = match v.get("parity").and_then(Value::as_str).unwrap_or("even") {
        "even" => ParityClass::Even,
        "odd" => ParityClass::Odd,
        "general" => ParityClass::General,
        other => return Err(parse_err(path, format!("unknown parity {other:?}"))),
    };
    let raw = as_array(field(v, "entries", path)?, path)?;
    let entries = raw
        .iter()
        .enumerate()
        .map(|(i, e)| supernumber_from_json(e, config, &format!("{path}.entries[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    SuperMatrix::from_entries(config, shape, parity, entries)
}

pub fn real_matrix_to_json<S: Scalar>(m: &RealMatrix<S>) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|row| Value::Array(row.iter().map(Scalar::to_json).collect()))
            .collect(),
    )
}

pub fn real_matrix_from_json<S: Scalar>(v: &Value, path: &str) -> Result<RealMatrix<S>> {
    let rows = as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = format!("{path}[{i}]");
            as_array(row, &rp)?
                .iter()
                .map(|x| S::from_json(x).map_err(|e| parse_err(&rp, e)))
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RealMatrix::from_rows(rows)
}

pub fn gamma_to_json<S: Scalar>(g: &GammaForm<S>) -> Value {
    json!({
        "eta": g.eta().iter().map(supernumber_to_json).collect::<Vec<_>>(),
        "n": g.n(),
    })
}

/// Accepts `{"eta": [...], "n": n}` or `{"p": p, "q": q, "n": n}`.
pub fn gamma_from_json<S: Scalar>(v: &Value, config: AlgebraConfig, path: &str) -> Result<GammaForm<S>> {
    let n = as_usize(field(v, "n", path)?, path)?;
    if let Some(eta) = v.get("eta") {
        let eta = as_array(eta, path)?
            .iter()
            .enumerate()
            .map(|(i, e)| supernumber_from_json(e, config, &format!("{path}.eta[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        return GammaForm::new(config, eta, n);
    }
    let p = v.get("p").map(|x| as_usize(x, path)).transpose()?.unwrap_or(0);
    let q = v.get("q").map(|x| as_usize(x, path)).transpose()?.unwrap_or(0);
    GammaForm::signature(config, p, q, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CoefficientMode;
    use num_rational::BigRational;

    #[test]
    fn supernumber_round_trip() {
        let c = AlgebraConfig::new(4, CoefficientMode::Rational).unwrap();
        let z = Supernumber::<BigRational>::from_terms(
            c,
            [
                (MultiIndex::EMPTY, BigRational::from_ratio(-3, 7)),
                (MultiIndex::from_generators(&[1, 3]).unwrap(), BigRational::from_ratio(5, 1)),
            ],
        )
        .unwrap();
        let v = supernumber_to_json(&z);
        assert_eq!(v, json!([{"index": [], "coeff": "-3/7"}, {"index": [1, 3], "coeff": "5"}]));
        assert_eq!(supernumber_from_json::<BigRational>(&v, c, "z").unwrap(), z);

        let cf = AlgebraConfig::new(4, CoefficientMode::Float64).unwrap();
        let w = Supernumber::<f64>::from_terms(cf, [(MultiIndex::generator(2), 0.1 + 0.2)]).unwrap();
        let text = serde_json::to_string(&supernumber_to_json(&w)).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(supernumber_from_json::<f64>(&back, cf, "w").unwrap(), w);
    }

    #[test]
    fn matrix_round_trip_and_errors() {
        let c = AlgebraConfig::new(2, CoefficientMode::Rational).unwrap();
        let m = SuperMatrix::<BigRational>::from_fn(c, BlockShape::new(1, 2), ParityClass::Even, |i, j| {
            if (i < 1) == (j < 1) {
                Supernumber::scalar(c, BigRational::from_ratio((i + 2 * j) as i64, 3))
            } else {
                Supernumber::generator(c, 1 + (i + j) % 2)
            }
        })
        .unwrap();
        let v = matrix_to_json(&m);
        assert_eq!(matrix_from_json::<BigRational>(&v, c, "M").unwrap(), m);

        let bad = json!({"shape": {"m": 1, "n": 0}, "entries": [[{"index": [3], "coeff": 1}]]});
        let err = matrix_from_json::<BigRational>(&bad, c, "M").unwrap_err();
        assert!(matches!(err, Error::Parse(ref s) if s.contains("M.entries[0][0]")), "{err}");
    }
}
