//! JSON input and output schemas.
//!
//! Rationals are decimal strings "a/b" (or "a"); capped p-adic values
//! serialize as objects with a valuation, digit list, and precision.
//! Matrices act on column vectors, and column j of "N" is the image of the
//! j-th basis vector. A filtration is a list of steps {"jump", "basis"},
//! each recording Fil^jump; between jumps the filtration is constant, below
//! the first jump it is everything, above the last it is zero.

use crate::engine::{ConditionReport, LInvariantInput, LInvariantReport, PipelineStatus};
use crate::filtered::{FilteredPhiNModule, Filtration};
use crate::linalg::{QpMatrix, QpVector, Subspace};
use crate::scalar::{parse_rational, PadicScalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("cannot parse rational at {field}: {value:?}")]
    Rational { field: String, value: String },
    #[error("json syntax: {0}")]
    Json(#[from] serde_json::Error),
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FiltrationStepJson {
    pub jump: i64,
    pub basis: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModuleJson {
    pub p: u64,
    pub dim: usize,
    pub phi: Vec<Vec<String>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<String>>,
    pub filtration: Vec<FiltrationStepJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub basis: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InputJson {
    #[serde(flatten)]
    pub module: ModuleJson,
    #[serde(rename = "D")]
    pub d: SubspaceJson,
    #[serde(default)]
    pub assert_c1c2: bool,
    #[serde(default)]
    pub global_subspace: Option<Vec<Vec<String>>>,
    /// Optional full stable flag for triangulation requests: a list of
    /// bases of the flag steps, strictly increasing.
    #[serde(default)]
    pub flag: Option<Vec<Vec<Vec<String>>>>,
}

fn parse_matrix(p: u64, rows: &[Vec<String>], field: &str, square_dim: Option<usize>) -> Result<QpMatrix, IoError> {
    if rows.is_empty() {
        return Err(schema(field, "matrix has no rows"));
    }
    let cols = rows[0].len();
    if let Some(d) = square_dim {
        if rows.len() != d || cols != d {
            return Err(schema(
                field,
                format!("expected a {d} x {d} matrix, got {} x {}", rows.len(), cols),
            ));
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(schema(field, format!("ragged row {i}")));
        }
        let mut r: QpVector = Vec::with_capacity(cols);
        for (j, cell) in row.iter().enumerate() {
            r.push(parse_rational(p, cell).map_err(|_| IoError::Rational {
                field: format!("{field}[{i}][{j}]"),
                value: cell.clone(),
            })?);
        }
        out.push(r);
    }
    Ok(QpMatrix::from_rows(p, out))
}

fn parse_subspace(p: u64, dim: usize, rows: &[Vec<String>], field: &str) -> Result<Subspace, IoError> {
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(schema(
                field,
                format!("basis vector {i} has length {}, ambient is {dim}", row.len()),
            ));
        }
        let mut r: QpVector = Vec::with_capacity(dim);
        for (j, cell) in row.iter().enumerate() {
            r.push(parse_rational(p, cell).map_err(|_| IoError::Rational {
                field: format!("{field}[{i}][{j}]"),
                value: cell.clone(),
            })?);
        }
        out.push(r);
    }
    Subspace::from_rows(p, dim, out).map_err(|e| schema(field, e.to_string()))
}

pub fn module_from_json(mj: &ModuleJson) -> Result<FilteredPhiNModule, IoError> {
    let p = mj.p;
    crate::scalar::check_prime(p).map_err(|e| schema("p", e.to_string()))?;
    let phi = parse_matrix(p, &mj.phi, "phi", Some(mj.dim))?;
    let n = parse_matrix(p, &mj.n, "N", Some(mj.dim))?;
    if mj.filtration.is_empty() {
        return Err(schema("filtration", "at least one step is required"));
    }
    let mut steps = Vec::new();
    for (t, step) in mj.filtration.iter().enumerate() {
        let s = parse_subspace(p, mj.dim, &step.basis, &format!("filtration[{t}].basis"))?;
        steps.push((step.jump, s));
    }
    let fil = Filtration::new(p, mj.dim, steps).map_err(|e| schema("filtration", e.to_string()))?;
    FilteredPhiNModule::new(p, phi, n, fil).map_err(|e| schema("module", e.to_string()))
}

pub fn input_from_json(ij: &InputJson) -> Result<LInvariantInput, IoError> {
    let module = module_from_json(&ij.module)?;
    let p = module.prime();
    let d_sub = parse_subspace(p, module.dim(), &ij.d.basis, "D.basis")?;
    let global_subspace = match &ij.global_subspace {
        None => None,
        Some(rows) => Some(parse_matrix(p, rows, "global_subspace", None)?),
    };
    Ok(LInvariantInput {
        module,
        d_sub,
        assert_c1c2: ij.assert_c1c2,
        global_subspace,
    })
}

pub fn parse_input_str(s: &str) -> Result<(LInvariantInput, Option<Vec<Subspace>>), IoError> {
    let ij: InputJson = serde_json::from_str(s)?;
    let input = input_from_json(&ij)?;
    let flag = match &ij.flag {
        None => None,
        Some(steps) => {
            let p = input.module.prime();
            let dim = input.module.dim();
            let mut out = Vec::new();
            for (t, rows) in steps.iter().enumerate() {
                out.push(parse_subspace(p, dim, rows, &format!("flag[{t}]"))?);
            }
            Some(out)
        }
    };
    Ok((input, flag))
}

pub fn parse_module_str(s: &str) -> Result<FilteredPhiNModule, IoError> {
    let mj: ModuleJson = serde_json::from_str(s)?;
    module_from_json(&mj)
}

/// Serializes a scalar: exact values as "a/b" strings, capped values as
/// {"valuation", "digits", "precision"} expansions.
pub fn scalar_to_json(x: &PadicScalar) -> serde_json::Value {
    match x.precision_floor() {
        None => serde_json::Value::String(x.approx().to_string()),
        Some(floor) => {
            let count = match x.val() {
                Some(v) => (floor - v).max(0) as usize,
                None => 0,
            };
            match x.digits(count.max(1)) {
                Some((v, digits)) => serde_json::json!({
                    "valuation": v,
                    "digits": digits,
                    "precision": floor,
                }),
                None => serde_json::json!({
                    "valuation": null,
                    "digits": [],
                    "precision": floor,
                }),
            }
        }
    }
}

fn conditions_to_json(rep: &ConditionReport) -> serde_json::Value {
    serde_json::Value::Array(
        rep.items
            .iter()
            .map(|i| {
                serde_json::json!({
                    "name": i.name,
                    "pass": i.pass,
                    "detail": i.detail,
                })
            })
            .collect(),
    )
}

pub fn report_to_json(rep: &LInvariantReport) -> serde_json::Value {
    serde_json::json!({
        "status": match rep.status {
            PipelineStatus::Complete => "complete",
            PipelineStatus::DualizeFirst => "dualize-first",
            PipelineStatus::ConditionsFailed => "conditions-failed",
        },
        "conditions": conditions_to_json(&rep.conditions),
        "canonical_filtration_dims": rep.filtration_dims.map(|(a, b, c)| vec![a, b, c]),
        "r": rep.r,
        "s": rep.s,
        "w0_rank": rep.w0_rank,
        "l_local": rep.l_local.as_ref().map(scalar_to_json),
        "l_global": rep.l_global.as_ref().map(scalar_to_json),
        "l_invariant": rep.l_full.as_ref().map(scalar_to_json),
        "needs_global_data": rep.needs_global_data,
        "interpolation_factor": rep.interpolation.as_ref().map(scalar_to_json),
        "precision_floor": rep.precision_floor,
    })
}

/// Round-trip serialization of a module to its JSON schema.
pub fn module_to_json(m: &FilteredPhiNModule) -> ModuleJson {
    let d = m.dim();
    let mat = |q: &QpMatrix| -> Vec<Vec<String>> {
        (0..q.rows())
            .map(|i| (0..q.cols()).map(|j| q.get(i, j).approx().to_string()).collect())
            .collect()
    };
    ModuleJson {
        p: m.prime(),
        dim: d,
        phi: mat(m.phi()),
        n: mat(m.n_op()),
        filtration: m
            .filtration()
            .steps()
            .iter()
            .map(|(j, s)| FiltrationStepJson {
                jump: *j,
                basis: s
                    .basis_rows()
                    .iter()
                    .map(|row| row.iter().map(|x| x.approx().to_string()).collect())
                    .collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::modular_form_module;

    #[test]
    fn fixture_round_trip() {
        let p = 3;
        let lambda = PadicScalar::from_ratio(p, 2, 1);
        let input = modular_form_module(p, 1, &lambda);
        let mj = module_to_json(&input.module);
        let s = serde_json::to_string(&mj).unwrap();
        let back = parse_module_str(&s).unwrap();
        assert_eq!(back, input.module);
    }

    #[test]
    fn documented_sample_parses_to_the_demo_module() {
        let sample = r#"{
            "p": 3, "dim": 2,
            "phi": [["1/3", "0"], ["0", "1"]],
            "N":   [["0", "1"], ["0", "0"]],
            "filtration": [
                {"jump": -1, "basis": [["1", "0"], ["0", "1"]]},
                {"jump": 0,  "basis": [["-2", "1"]]}
            ],
            "D": {"basis": [["1", "0"]]},
            "assert_c1c2": true,
            "global_subspace": null
        }"#;
        let (input, flag) = parse_input_str(sample).unwrap();
        assert!(flag.is_none());
        let expected = modular_form_module(3, 1, &PadicScalar::from_ratio(3, 2, 1));
        assert_eq!(input.module, expected.module);
        assert_eq!(input.d_sub, expected.d_sub);
        assert!(input.assert_c1c2);
    }

    #[test]
    fn missing_field_is_named() {
        let bad = r#"{"p": 3, "dim": 2, "phi": [["1","0"],["0","1"]],
                      "filtration": [], "D": {"basis": [["1","0"]]}}"#;
        let err = parse_input_str(bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("N"), "{msg}");
    }

    #[test]
    fn non_square_phi_rejected() {
        let bad = r#"{"p": 3, "dim": 2, "phi": [["1","0","0"],["0","1","0"]],
                      "N": [["0","0"],["0","0"]],
                      "filtration": [{"jump": 0, "basis": [["1","0"],["0","1"]]}],
                      "D": {"basis": [["1","0"]]}}"#;
        let err = parse_input_str(bad).unwrap_err();
        assert!(matches!(err, IoError::Schema { ref field, .. } if field == "phi"));
    }

    #[test]
    fn capped_scalar_serializes_as_expansion() {
        let x = PadicScalar::capped(3, num_rational::BigRational::from_integer(10.into()), 5);
        let v = scalar_to_json(&x);
        assert_eq!(v["valuation"], 0);
        assert_eq!(v["precision"], 5);
        // 10 = 1 + 0*3 + 1*9
        assert_eq!(v["digits"][0], 1);
        assert_eq!(v["digits"][1], 0);
        assert_eq!(v["digits"][2], 1);
    }
}
