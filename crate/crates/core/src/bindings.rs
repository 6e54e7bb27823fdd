//! JSON bindings files.
//!
//! ```json
//! { "A": { "shape": [2, 2], "values": [1, 2, 3, 4] },
//!   "d": { "shape": [2], "values": [0, "inf"] } }
//! ```
//!
//! Values are row-major. Integers, floats, booleans and the string `"inf"`
//! are accepted where the chosen semiring has a matching element.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::BindingsError;
use crate::eval::Bindings;
use crate::semiring::{Literal, Semiring};
use crate::tensor::{Shape, Tensor};
use crate::validate::ShapeEnv;

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    shape: Vec<usize>,
    values: Vec<Value>,
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>, BindingsError> {
    Ok(serde_json::from_str(text)?)
}

fn literal(value: &Value) -> Option<Literal> {
    match value {
        Value::Bool(b) => Some(Literal::Bool(*b)),
        Value::Number(n) => n
            .as_i64()
            .map(Literal::Int)
            .or_else(|| n.as_f64().map(Literal::Float)),
        Value::String(s) if matches!(s.as_str(), "inf" | "+inf" | "infinity") => {
            Some(Literal::Infinity)
        }
        _ => None,
    }
}

fn to_json(lit: &Literal) -> Value {
    match *lit {
        Literal::Int(n) => Value::from(n),
        Literal::Float(x) if x.is_finite() => Value::from(x),
        Literal::Float(x) => Value::from(x.to_string()),
        Literal::Bool(b) => Value::from(b),
        Literal::Infinity => Value::from("inf"),
    }
}

/// Parses a bindings document into tensors over `sr`.
pub fn parse_bindings<S: Semiring>(text: &str, sr: &S) -> Result<Bindings<S::Elem>, BindingsError> {
    parse_entries(text)?
        .into_iter()
        .map(|(name, entry)| {
            let values = entry
                .values
                .iter()
                .enumerate()
                .map(|(index, v)| {
                    let invalid = |reason: String| BindingsError::Value {
                        name: name.clone(),
                        index,
                        value: v.to_string(),
                        reason,
                    };
                    let lit = literal(v)
                        .ok_or_else(|| invalid("not a number, boolean or \"inf\"".into()))?;
                    sr.from_literal(&lit).map_err(|e| invalid(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let tensor = Shape::new(entry.shape)
                .and_then(|shape| Tensor::new(shape, values))
                .map_err(|source| BindingsError::Tensor {
                    name: name.clone(),
                    source,
                })?;
            Ok((name, tensor))
        })
        .collect()
}

pub fn load_bindings<S: Semiring>(path: &Path, sr: &S) -> Result<Bindings<S::Elem>, BindingsError> {
    parse_bindings(&std::fs::read_to_string(path)?, sr)
}

/// Only the shapes of a bindings document; values are not interpreted.
pub fn parse_shapes(text: &str) -> Result<ShapeEnv, BindingsError> {
    parse_entries(text)?
        .into_iter()
        .map(|(name, entry)| {
            let shape = Shape::new(entry.shape).map_err(|source| BindingsError::Tensor {
                name: name.clone(),
                source,
            })?;
            Ok((name, shape))
        })
        .collect()
}

/// A tensor as `{"shape": [...], "values": [...]}`.
pub fn tensor_to_json<S: Semiring>(tensor: &Tensor<S::Elem>, sr: &S) -> Value {
    serde_json::json!({
        "shape": tensor.shape().dims(),
        "values": tensor.data().iter().map(|e| to_json(&sr.to_literal(e))).collect::<Vec<_>>(),
    })
}

/// Bindings in the same format [`parse_bindings`] reads.
pub fn bindings_to_json<S: Semiring>(bindings: &Bindings<S::Elem>, sr: &S) -> Value {
    Value::Object(
        bindings
            .iter()
            .map(|(name, t)| (name.clone(), tensor_to_json(t, sr)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{Arithmetic, Boolean, MinPlus, Real, Tropical};

    const DOC: &str = r#"{"A": {"shape": [2, 2], "values": [1, 2, 3, 4]}, "v": {"shape": [2], "values": [0, "inf"]}}"#;

    #[test]
    fn integer_document() {
        let doc = r#"{"A": {"shape": [2, 2], "values": [1, 2, 3, 4]}}"#;
        let b = parse_bindings(doc, &Arithmetic).unwrap();
        assert_eq!(b["A"].data(), &[1, 2, 3, 4]);
        assert_eq!(b["A"].shape(), &Shape(vec![2, 2]));
    }

    #[test]
    fn infinity_only_where_it_exists() {
        let b = parse_bindings(DOC, &MinPlus).unwrap();
        assert_eq!(b["v"].data(), &[Tropical::Finite(0), Tropical::Infinity]);
        assert!(matches!(
            parse_bindings(DOC, &Arithmetic),
            Err(BindingsError::Value { index: 1, .. })
        ));
        assert!(parse_bindings(DOC, &Real::default()).is_ok());
    }

    #[test]
    fn malformed() {
        assert!(matches!(
            parse_bindings("{", &Arithmetic),
            Err(BindingsError::Json(_))
        ));
        let short = r#"{"A": {"shape": [2, 2], "values": [1, 2, 3]}}"#;
        assert!(matches!(
            parse_bindings(short, &Arithmetic),
            Err(BindingsError::Tensor { .. })
        ));
        let zero = r#"{"A": {"shape": [0], "values": []}}"#;
        assert!(matches!(
            parse_bindings(zero, &Arithmetic),
            Err(BindingsError::Tensor { .. })
        ));
    }

    #[test]
    fn shapes_only() {
        let s = parse_shapes(DOC).unwrap();
        assert_eq!(s["v"], Shape(vec![2]));
    }

    #[test]
    fn round_trip() {
        let b = parse_bindings(DOC, &MinPlus).unwrap();
        let text = bindings_to_json(&b, &MinPlus).to_string();
        assert_eq!(parse_bindings(&text, &MinPlus).unwrap(), b);
        let bools =
            parse_bindings(r#"{"m": {"shape": [2], "values": [true, 0]}}"#, &Boolean).unwrap();
        assert_eq!(bools["m"].data(), &[true, false]);
    }
}
