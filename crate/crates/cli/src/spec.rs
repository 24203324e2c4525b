//! Pair specification files.

use std::path::Path;

use isopair_core::bcl::{build_multipliers, BCLData};
use isopair_core::bidisc::{pair_from_spec, BidiscSpec, TruncatedSubspace};
use isopair_core::json;
use isopair_core::linalg::CMatrix;
use isopair_core::model::GradedPair;
use isopair_core::TolerancePolicy;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const DEFAULT_DEGREE: usize = 12;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BclFile {
    #[serde(rename = "U", with = "json::matrix")]
    u: CMatrix,
    #[serde(rename = "P", with = "json::matrix")]
    p: CMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryFile {
    #[serde(rename = "U1", with = "json::matrix")]
    u1: CMatrix,
    #[serde(rename = "U2", with = "json::matrix")]
    u2: CMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BidiscFile {
    generators: Vec<isopair_core::bidisc::BivariatePoly>,
    degree: usize,
    #[serde(default)]
    guard: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SumFile {
    parts: Vec<Value>,
}

#[derive(Clone, Debug)]
pub enum PairSpec {
    Bcl { u: CMatrix, p: CMatrix },
    Bidisc(BidiscSpec),
    MatrixUnitary { u1: CMatrix, u2: CMatrix },
    DirectSum(Vec<PairSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Bcl,
    Bidisc,
    MatrixUnitary,
    DirectSum,
}

impl PairSpec {
    pub fn kind(&self) -> Kind {
        match self {
            PairSpec::Bcl { .. } => Kind::Bcl,
            PairSpec::Bidisc(_) => Kind::Bidisc,
            PairSpec::MatrixUnitary { .. } => Kind::MatrixUnitary,
            PairSpec::DirectSum(_) => Kind::DirectSum,
        }
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn infer_kind(obj: &Map<String, Value>) -> Result<Kind, CliError> {
    if let Some(k) = obj.get("kind") {
        return match k.as_str() {
            Some("bcl") => Ok(Kind::Bcl),
            Some("bidisc") => Ok(Kind::Bidisc),
            Some("matrix-unitary") => Ok(Kind::MatrixUnitary),
            Some("direct-sum") => Ok(Kind::DirectSum),
            _ => Err(schema(format!("unknown kind {k}"))),
        };
    }
    if obj.contains_key("U") && obj.contains_key("P") {
        Ok(Kind::Bcl)
    } else if obj.contains_key("generators") {
        Ok(Kind::Bidisc)
    } else if obj.contains_key("U1") && obj.contains_key("U2") {
        Ok(Kind::MatrixUnitary)
    } else if obj.contains_key("parts") {
        Ok(Kind::DirectSum)
    } else {
        Err(schema("cannot infer the kind of pair specification"))
    }
}

fn typed<T: for<'de> Deserialize<'de>>(obj: Map<String, Value>, kind: &str) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| schema(format!("{kind}: {e}")))
}

pub fn parse_value(value: Value) -> Result<PairSpec, CliError> {
    let Value::Object(mut obj) = value else {
        return Err(schema("a pair specification must be a JSON object"));
    };
    let kind = infer_kind(&obj)?;
    obj.remove("kind");
    obj.remove("meta");
    Ok(match kind {
        Kind::Bcl => {
            let f: BclFile = typed(obj, "bcl")?;
            PairSpec::Bcl { u: f.u, p: f.p }
        }
        Kind::MatrixUnitary => {
            let f: UnitaryFile = typed(obj, "matrix-unitary")?;
            PairSpec::MatrixUnitary { u1: f.u1, u2: f.u2 }
        }
        Kind::Bidisc => {
            let f: BidiscFile = typed(obj, "bidisc")?;
            PairSpec::Bidisc(BidiscSpec {
                generators: f.generators,
                degree: f.degree,
                guard: f.guard.unwrap_or(isopair_core::bidisc::DEFAULT_GUARD),
            })
        }
        Kind::DirectSum => {
            let f: SumFile = typed(obj, "direct-sum")?;
            if f.parts.is_empty() {
                return Err(schema("direct-sum: no parts"));
            }
            PairSpec::DirectSum(f.parts.into_iter().map(parse_value).collect::<Result<_, _>>()?)
        }
    })
}

pub fn read_spec(path: &Path) -> Result<PairSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?;
    parse_value(value)
}

/// A model ready for analysis, with what is needed to describe it.
pub struct Built {
    pub pair: GradedPair,
    pub bcl: Option<BCLData>,
    pub bidisc: Option<TruncatedSubspace>,
    pub summary: Value,
}

/// `degree` overrides the truncation degree of every part; bidisc parts
/// otherwise keep the degree of their generator file.
pub fn build(spec: &PairSpec, degree: Option<usize>, tol: &TolerancePolicy) -> Result<Built, CliError> {
    match spec {
        PairSpec::Bcl { u, p } => {
            let data = BCLData::new(u.clone(), p.clone(), tol).map_err(CliError::Validation)?;
            let n = degree.unwrap_or(DEFAULT_DEGREE);
            let pair = build_multipliers(&data).graded(n, tol).map_err(CliError::Validation)?;
            Ok(Built {
                pair,
                summary: serde_json::json!({"kind": "bcl", "dim": data.dim(), "degree": n}),
                bcl: Some(data),
                bidisc: None,
            })
        }
        PairSpec::Bidisc(b) => {
            let mut b = b.clone();
            if let Some(n) = degree {
                b.degree = n;
            }
            let (s, pair) = pair_from_spec(&b, tol).map_err(CliError::from_core)?;
            Ok(Built {
                pair,
                summary: serde_json::json!({
                    "kind": "bidisc",
                    "generators": b.generators,
                    "degree": b.degree,
                    "guard": b.guard,
                    "subspace_dim": s.dim(),
                }),
                bcl: None,
                bidisc: Some(s),
            })
        }
        PairSpec::MatrixUnitary { u1, u2 } => {
            let pair = GradedPair::unitary_pair(u1, u2, tol).map_err(CliError::Validation)?;
            Ok(Built {
                pair,
                summary: serde_json::json!({"kind": "matrix-unitary", "dim": u1.nrows()}),
                bcl: None,
                bidisc: None,
            })
        }
        PairSpec::DirectSum(parts) => {
            let built = parts
                .iter()
                .map(|p| build(p, degree, tol))
                .collect::<Result<Vec<_>, _>>()?;
            let pairs: Vec<GradedPair> = built.iter().map(|b| b.pair.clone()).collect();
            let pair = GradedPair::direct_sum(&pairs).map_err(CliError::Validation)?;
            let summaries: Vec<Value> = built.into_iter().map(|b| b.summary).collect();
            Ok(Built {
                pair,
                summary: serde_json::json!({"kind": "direct-sum", "parts": summaries}),
                bcl: None,
                bidisc: None,
            })
        }
    }
}
