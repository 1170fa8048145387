//! Exact-expression scalars such as `"(149+18*sqrt(2)*sqrt(3))/9"`.
//!
//! Data files keep radical constants as strings; they are evaluated once, in
//! double precision, when the file is loaded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluates an arithmetic expression (`+ - * / ^`, parentheses, `sqrt`, `pi`).
pub fn eval_expr(expr: &str) -> Result<f64> {
    let value = meval::eval_str(expr).map_err(|e| Error::Expression {
        expr: expr.to_string(),
        reason: e.to_string(),
    })?;
    if !value.is_finite() {
        return Err(Error::Expression {
            expr: expr.to_string(),
            reason: "not finite".into(),
        });
    }
    Ok(value)
}

/// A real number given either as a JSON number or as an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Expr(s) => eval_expr(s),
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Number(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radicals() {
        let v = eval_expr("sqrt(2)*sqrt(3)").unwrap();
        assert!((v - 6f64.sqrt()).abs() < 1e-15);
        let w = eval_expr("(149+18*sqrt(2)*sqrt(3))/9").unwrap();
        assert!((w - (149.0 + 18.0 * 6f64.sqrt()) / 9.0).abs() < 1e-13);
    }

    #[test]
    fn scalar_from_json() {
        let xs: Vec<Scalar> =
            serde_json::from_str(r#"[1.5, "-2/3", "6+sqrt(2)*sqrt(3)"]"#).unwrap();
        assert_eq!(xs[0].value().unwrap(), 1.5);
        assert!((xs[1].value().unwrap() + 2.0 / 3.0).abs() < 1e-15);
        assert!((xs[2].value().unwrap() - 6.0 - 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn garbage_is_an_error() {
        assert!(eval_expr("sqrt(").is_err());
        assert!(eval_expr("1/0").is_err());
    }
}
