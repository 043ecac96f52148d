//! The potential specification file format.
//!
//! ```json
//! { "alphabet": ["-1", "1"], "kind": "finite-depth", "log_g0": 0.0, "factors": [[-0.5, 0.5]] }
//! { "kind": "dyson", "gamma": 1.8, "scale": -1.0 }
//! { "alphabet": ["a", "b"], "kind": "table", "factors": [[0.1, -0.1]],
//!   "tail_bound": { "type": "power-law", "C": 0.5, "exponent": 1.5 } }
//! ```

use crate::dyson::DysonFamily;
use crate::error::{Error, Result};
use crate::potential::{Alphabet, PotentialKind, PowerLawTail, ProductPotential};
use serde::{Deserialize, Serialize};

/// A symbol label; numbers are accepted and kept in their JSON spelling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TailBoundSpec {
    PowerLaw {
        #[serde(rename = "C")]
        constant: f64,
        exponent: f64,
    },
}

/// The on-disk form of a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<Label>>,
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<TailBoundSpec>,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn forbid<T>(field: &Option<T>, name: &str, kind: &str) -> Result<()> {
    match field {
        Some(_) => Err(schema(name, format!("not allowed for kind `{kind}`"))),
        None => Ok(()),
    }
}

fn finite(v: f64, path: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(schema(path, "must be a finite number"))
    }
}

impl PotentialSpec {
    /// Validates the specification and builds the potential.
    pub fn build(self) -> Result<ProductPotential> {
        let log_g0 = finite(self.log_g0.unwrap_or(0.0), "log_g0")?;
        match self.kind {
            PotentialKind::Dyson => {
                forbid(&self.factors, "factors", "dyson")?;
                forbid(&self.tail_bound, "tail_bound", "dyson")?;
                if let Some(labels) = self.alphabet {
                    let labels: Vec<String> = labels.into_iter().map(Label::into_string).collect();
                    if labels != ["-1", "1"] {
                        return Err(schema("alphabet", "dyson alphabet is [-1, 1]"));
                    }
                }
                let gamma = finite(
                    self.gamma
                        .ok_or_else(|| schema("gamma", "required for kind `dyson`"))?,
                    "gamma",
                )?;
                let scale = finite(self.scale.unwrap_or(1.0), "scale")?;
                let family =
                    DysonFamily::new(gamma, scale).map_err(|e| schema("gamma", e.to_string()))?;
                Ok(ProductPotential::from_dyson(family, log_g0))
            }
            kind => {
                let tag = if kind == PotentialKind::Table {
                    "table"
                } else {
                    "finite-depth"
                };
                forbid(&self.gamma, "gamma", tag)?;
                forbid(&self.scale, "scale", tag)?;
                let labels = self
                    .alphabet
                    .ok_or_else(|| schema("alphabet", "required"))?;
                let labels: Vec<String> = labels.into_iter().map(Label::into_string).collect();
                let alphabet =
                    Alphabet::new(labels).map_err(|e| schema("alphabet", e.to_string()))?;
                let rows = self.factors.unwrap_or_default();
                for (n, row) in rows.iter().enumerate() {
                    if row.len() != alphabet.len() {
                        return Err(schema(
                            &format!("factors[{n}]"),
                            format!("expected {} entries, got {}", alphabet.len(), row.len()),
                        ));
                    }
                    if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                        return Err(schema(
                            &format!("factors[{n}][{j}]"),
                            "must be a finite number",
                        ));
                    }
                }
                if kind == PotentialKind::FiniteDepth {
                    forbid(&self.tail_bound, "tail_bound", tag)?;
                    return ProductPotential::finite_depth(alphabet, log_g0, rows);
                }
                let TailBoundSpec::PowerLaw { constant, exponent } = self
                    .tail_bound
                    .ok_or_else(|| schema("tail_bound", "required for kind `table`"))?;
                ProductPotential::table(alphabet, log_g0, rows, PowerLawTail { constant, exponent })
                    .map_err(|e| schema("tail_bound", e.to_string()))
            }
        }
    }

    /// The specification that rebuilds `p`.
    pub fn from_potential(p: &ProductPotential) -> Self {
        let log_g0 = Some(p.log_g0());
        let labels = || {
            Some(
                p.alphabet()
                    .symbols()
                    .iter()
                    .cloned()
                    .map(Label::Text)
                    .collect(),
            )
        };
        match p.dyson_family() {
            Some(d) => PotentialSpec {
                alphabet: None,
                kind: PotentialKind::Dyson,
                log_g0,
                factors: None,
                gamma: Some(d.gamma()),
                scale: Some(d.coeff()),
                tail_bound: None,
            },
            None => PotentialSpec {
                alphabet: labels(),
                kind: p.kind(),
                log_g0,
                factors: Some(p.factor_rows(p.explicit_depth().unwrap_or(0))),
                gamma: None,
                scale: None,
                tail_bound: p.remainder().map(|t| TailBoundSpec::PowerLaw {
                    constant: t.constant,
                    exponent: t.exponent,
                }),
            },
        }
    }
}

/// Parses a potential file; schema violations carry the JSON path of the offending value.
pub fn parse_potential(text: &str) -> Result<ProductPotential> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: PotentialSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner().to_string())
    })?;
    spec.build()
}

/// Serialises a potential in the file format.
pub fn potential_to_json(p: &ProductPotential) -> String {
    serde_json::to_string_pretty(&PotentialSpec::from_potential(p))
        .expect("potential spec serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_depth_roundtrip() {
        let text = r#"{"alphabet":[-1,1],"kind":"finite-depth","log_g0":0.5,"factors":[[0.2,-0.2],[1,0]]}"#;
        let p = parse_potential(text).unwrap();
        assert_eq!(p.depth(), Some(2));
        assert_eq!(p.alphabet().label(0), "-1");
        let q = parse_potential(&potential_to_json(&p)).unwrap();
        assert_eq!(q.factor_rows(2), p.factor_rows(2));
        assert_eq!(q.log_g0(), 0.5);
    }

    #[test]
    fn dyson_and_table() {
        let p = parse_potential(r#"{"kind":"dyson","gamma":1.8,"scale":-1}"#).unwrap();
        assert_eq!(p.dyson_family().unwrap().coeff(), -1.0);
        let t = r#"{"alphabet":["a","b"],"kind":"table","factors":[[0.1,-0.1]],
                    "tail_bound":{"type":"power-law","C":0.5,"exponent":1.5}}"#;
        let p = parse_potential(t).unwrap();
        assert_eq!(p.kind(), PotentialKind::Table);
        assert!(parse_potential(&potential_to_json(&p)).is_ok());
    }

    #[test]
    fn errors_carry_paths() {
        let bad = |t: &str| match parse_potential(t) {
            Err(Error::Schema { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        assert_eq!(
            bad(r#"{"alphabet":["a","b"],"kind":"finite-depth","factors":[[0.1,"x"]]}"#),
            "factors[0][1]"
        );
        assert_eq!(
            bad(r#"{"alphabet":["a","b"],"kind":"finite-depth","factors":[[0.1]]}"#),
            "factors[0]"
        );
        assert_eq!(bad(r#"{"kind":"dyson"}"#), "gamma");
        assert_eq!(bad(r#"{"kind":"dyson","gamma":0.9}"#), "gamma");
        assert_eq!(bad(r#"{"kind":"sparse"}"#), "kind");
        assert_eq!(
            bad(r#"{"alphabet":["a","b"],"kind":"table"}"#),
            "tail_bound"
        );
        assert_eq!(
            bad(r#"{"alphabet":["a"],"kind":"finite-depth"}"#),
            "alphabet"
        );
        assert_eq!(bad(r#"{"kind":"dyson","gamma":2,"extra":1}"#), "extra");
    }
}
