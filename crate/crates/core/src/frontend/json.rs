//! JSON output. Rationals are always strings such as `"3"` or `"-1/2"`.

use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::formula::{Assignment, BijunctiveFormula};
use crate::num::Rational;

pub fn witness_json(phi: &BijunctiveFormula, a: &Assignment) -> Value {
    let map: Map<String, Value> = a
        .iter()
        .map(|(v, q)| (phi.name(v).to_string(), Value::String(q.to_string())))
        .collect();
    Value::Object(map)
}

/// `{"status": "sat", "witness": {...}}`; the witness only when given.
pub fn sat_json(phi: &BijunctiveFormula, witness: Option<&Assignment>) -> Value {
    let mut out = json!({ "status": "sat" });
    if let Some(a) = witness {
        out["witness"] = witness_json(phi, a);
    }
    out
}

/// `{"status": "unsat"}` with `"certificate"` (text or null) when requested.
pub fn unsat_json(certificate: Option<Option<String>>) -> Value {
    let mut out = json!({ "status": "unsat" });
    if let Some(c) = certificate {
        out["certificate"] = c.map(Value::String).unwrap_or(Value::Null);
    }
    out
}

fn json_err(msg: impl Into<String>) -> Error {
    Error::Parse {
        location: crate::error::SourceLocation {
            file: "<witness>".into(),
            line: 1,
            column: 1,
        },
        message: msg.into(),
    }
}

/// Reads a witness, either a bare `{var: value}` object or one under a
/// `"witness"` key. Values are rational strings or JSON integers.
pub fn parse_witness(text: &str, phi: &BijunctiveFormula) -> Result<Assignment, Error> {
    let value: Value = serde_json::from_str(text).map_err(|e| json_err(e.to_string()))?;
    let obj = match value.get("witness") {
        Some(Value::Object(w)) => w,
        Some(_) => return Err(json_err("\"witness\" must be an object")),
        None => value.as_object().ok_or_else(|| json_err("expected a JSON object"))?,
    };
    let mut a = Assignment::new();
    for (name, v) in obj {
        let var = phi.lookup(name).ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        let q: Rational = match v {
            Value::String(s) => s.trim().parse().map_err(|_| json_err(format!("'{s}' is not a rational")))?,
            Value::Number(n) if n.is_i64() => Rational::from_integer(n.as_i64().expect("checked")),
            other => return Err(json_err(format!("value {other} for {name} must be a rational string"))),
        };
        a.set(var, q);
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse::parse;

    #[test]
    fn witness_values_are_strings() {
        let phi = parse("x >= 0\ny <= 1").unwrap();
        let a: Assignment = [(phi.lookup("x").unwrap(), Rational::new(1, 2)), (phi.lookup("y").unwrap(), Rational::from_integer(-3))]
            .into_iter()
            .collect();
        let out = sat_json(&phi, Some(&a)).to_string();
        assert_eq!(out, r#"{"status":"sat","witness":{"x":"1/2","y":"-3"}}"#);
        assert_eq!(parse_witness(&out, &phi).unwrap(), a);
    }

    #[test]
    fn unsat_shapes() {
        assert_eq!(unsat_json(None).to_string(), r#"{"status":"unsat"}"#);
        assert_eq!(unsat_json(Some(None)).to_string(), r#"{"status":"unsat","certificate":null}"#);
    }

    #[test]
    fn witness_input_forms() {
        let phi = parse("x >= 0").unwrap();
        let x = phi.lookup("x").unwrap();
        assert_eq!(parse_witness(r#"{"x": 2}"#, &phi).unwrap().get(x), Some(&Rational::from_integer(2)));
        assert!(parse_witness(r#"{"x": 0.5}"#, &phi).is_err());
        assert!(parse_witness(r#"{"z": "1"}"#, &phi).is_err());
        assert!(parse_witness(r#"{"x": "1/0"}"#, &phi).is_err());
    }
}
