//! JSON formats. Complex numbers are `[re, im]`, matrices are row-major
//! nested arrays of those, and every float is written with 17 significant
//! digits so reports are byte-stable and round-trip exactly.

use std::io::Write;

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::equivalence::{
    DifferentialModule, EquivalenceError, ModuleConvention, RationalFunction, RationalMatrix,
    ScalarEquation,
};
use crate::inverse::{InverseProblemInstance, InverseSolution};
use crate::linalg::{ComplexMatrix, JordanStructure, LinalgError};
use crate::monodromy::{MonodromyRepresentation, PoleStatus, TheoremReport, LOOP_CONVENTION};
use crate::system::{
    validate_system, FuchsianSystem, GaloisGenerators, LeveltData, NonResonanceReport, SystemError,
};

pub const REPORT_SCHEMA: &str = "fuchsia-report/1";
pub const INSTANCE_SCHEMA: &str = "fuchsia-inverse/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
}

fn format_err(path: &str, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Compact JSON with floats as `{:.16e}`, followed by a newline.
pub fn to_string(v: &Value) -> String {
    struct Fixed;
    impl serde_json::ser::Formatter for Fixed {
        fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
            write!(w, "{value:.16e}")
        }
    }
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed);
    serde::Serialize::serialize(v, &mut ser).expect("serializing a Value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Non-finite values become `null`.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex_json(c: Complex64) -> Value {
    json!([num(c.re), num(c.im)])
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.to_rows()
            .into_iter()
            .map(|r| Value::Array(r.into_iter().map(complex_json).collect()))
            .collect(),
    )
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, IoError> {
    obj.get(key)
        .ok_or_else(|| format_err(path, format!("missing field {key:?}")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array()
        .ok_or_else(|| format_err(path, "expected an array"))
}

fn float(v: &Value, path: &str) -> Result<f64, IoError> {
    v.as_f64()
        .ok_or_else(|| format_err(path, "expected a number"))
}

pub fn parse_complex(v: &Value, path: &str) -> Result<Complex64, IoError> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Complex64::new(float(re, path)?, float(im, path)?)),
        _ => Err(format_err(path, "expected [re, im]")),
    }
}

pub fn parse_matrix(v: &Value, path: &str) -> Result<ComplexMatrix, IoError> {
    let rows = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let p = format!("{path}[{i}]");
            array(row, &p)?
                .iter()
                .enumerate()
                .map(|(j, c)| parse_complex(c, &format!("{p}[{j}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComplexMatrix::from_rows(&rows)?)
}

fn parse_complex_list(v: &Value, path: &str) -> Result<Vec<Complex64>, IoError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, c)| parse_complex(c, &format!("{path}[{i}]")))
        .collect()
}

fn parse_matrix_list(v: &Value, path: &str) -> Result<Vec<ComplexMatrix>, IoError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, m)| parse_matrix(m, &format!("{path}[{i}]")))
        .collect()
}

/// Complex literal such as `2`, `-1.5i`, `3+4i`, `1e-3-2e-2i`.
pub fn parse_complex_literal(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let split = body
            .char_indices()
            .filter(|&(k, c)| (c == '+' || c == '-') && k > 0 && !body[..k].ends_with(['e', 'E']))
            .map(|(k, _)| k)
            .next_back();
        let (re, im) = match split {
            Some(k) => (body[..k].parse().ok()?, &body[k..]),
            None => (0.0, body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => t.parse().ok()?,
        };
        Some(Complex64::new(re, im))
    } else {
        Some(Complex64::new(s.parse().ok()?, 0.0))
    }
}

pub struct SystemFile {
    pub poles: Vec<Complex64>,
    pub residues: Vec<ComplexMatrix>,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let v: Value = serde_json::from_str(text)?;
        let dimension = field(&v, "dimension", "$")?
            .as_u64()
            .ok_or_else(|| format_err("$.dimension", "expected a positive integer"))?
            as usize;
        let poles = parse_complex_list(field(&v, "poles", "$")?, "$.poles")?;
        let residues = parse_matrix_list(field(&v, "residues", "$")?, "$.residues")?;
        if let Some((i, b)) = residues
            .iter()
            .enumerate()
            .find(|(_, b)| b.dim() != dimension)
        {
            return Err(format_err(
                &format!("$.residues[{i}]"),
                format!("is {0}x{0} but dimension is {dimension}", b.dim()),
            ));
        }
        Ok(Self { poles, residues })
    }

    pub fn validate(self, tol: f64) -> Result<FuchsianSystem, IoError> {
        Ok(validate_system(self.poles, self.residues, tol)?)
    }
}

pub fn system_json(sys: &FuchsianSystem) -> Value {
    json!({
        "dimension": sys.dimension(),
        "poles": sys.poles().iter().map(|&a| complex_json(a)).collect::<Vec<_>>(),
        "residues": sys.residues().iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

/// Inverse-problem input: either an instance file or a monodromy report.
#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub poles: Vec<Complex64>,
    pub targets: Vec<ComplexMatrix>,
    pub convention: String,
    pub base_point: Option<Complex64>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let v: Value = serde_json::from_str(text)?;
        let schema = field(&v, "schema", "$")?
            .as_str()
            .ok_or_else(|| format_err("$.schema", "expected a string"))?;
        let convention = match v.get("loop_convention") {
            Some(c) => c
                .as_str()
                .ok_or_else(|| format_err("$.loop_convention", "expected a string"))?
                .to_string(),
            None => LOOP_CONVENTION.to_string(),
        };
        let base_point = match v.get("base_point") {
            Some(b) => Some(parse_complex(b, "$.base_point")?),
            None => None,
        };
        let targets_key = match schema {
            INSTANCE_SCHEMA => "targets",
            REPORT_SCHEMA => "monodromy",
            other => {
                return Err(format_err(
                    "$.schema",
                    format!("unsupported schema {other:?}"),
                ))
            }
        };
        Ok(Self {
            poles: parse_complex_list(field(&v, "poles", "$")?, "$.poles")?,
            targets: parse_matrix_list(field(&v, targets_key, "$")?, &format!("$.{targets_key}"))?,
            convention,
            base_point,
        })
    }
}

pub fn instance_json(inst: &InverseProblemInstance) -> Value {
    json!({
        "schema": INSTANCE_SCHEMA,
        "loop_convention": LOOP_CONVENTION,
        "base_point": complex_json(inst.base_point()),
        "poles": inst.poles().iter().map(|&a| complex_json(a)).collect::<Vec<_>>(),
        "targets": inst.targets().iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

fn report_header(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(REPORT_SCHEMA));
    m.insert("kind".into(), json!(kind));
    m.insert("loop_convention".into(), json!(LOOP_CONVENTION));
    m
}

fn complex_list(cs: &[Complex64]) -> Value {
    Value::Array(cs.iter().map(|&c| complex_json(c)).collect())
}

fn matrix_list(ms: &[ComplexMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix_json).collect())
}

fn jordan_json(s: &JordanStructure) -> Value {
    Value::Array(
        s.blocks
            .iter()
            .map(|b| json!({"eigenvalue": complex_json(b.eigenvalue), "sizes": b.sizes}))
            .collect(),
    )
}

pub fn check_report(
    sys: &FuchsianSystem,
    resonance: &NonResonanceReport,
    levelt: &LeveltData,
) -> Value {
    let mut m = report_header("check");
    m.insert("poles".into(), complex_list(sys.poles()));
    m.insert("residue_sum_defect".into(), num(sys.residue_sum_defect()));
    m.insert("non_resonant".into(), json!(resonance.is_non_resonant()));
    let per_pole: Vec<Value> = resonance
        .poles
        .iter()
        .zip(&levelt.poles)
        .enumerate()
        .map(|(j, (r, l))| {
            json!({
                "index": j,
                "eigenvalues": r.eigenvalues.iter().map(|&(e, k)| json!({"value": complex_json(e), "multiplicity": k})).collect::<Vec<_>>(),
                "resonant": r.is_resonant(),
                "witnesses": r.witnesses.iter().map(|w| json!({
                    "lower": complex_json(w.lower), "upper": complex_json(w.upper), "shift": w.shift,
                })).collect::<Vec<_>>(),
                "levelt": l.records.iter().map(|rec| json!({
                    "exponent": complex_json(rec.lambda),
                    "integer_part": rec.integer_part,
                    "normalized_part": complex_json(rec.normalized_part),
                    "multiplicity": rec.multiplicity,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    m.insert("pole_data".into(), Value::Array(per_pole));
    Value::Object(m)
}

pub fn galois_report(sys: &FuchsianSystem, g: &GaloisGenerators) -> Value {
    let mut m = report_header("galois");
    m.insert("poles".into(), complex_list(sys.poles()));
    m.insert("generators".into(), matrix_list(&g.generators));
    m.insert("resonant_poles".into(), json!(g.resonant_poles));
    Value::Object(m)
}

pub fn monodromy_report(sys: &FuchsianSystem, rep: &MonodromyRepresentation, tol: f64) -> Value {
    let mut m = report_header("monodromy");
    m.insert("tol".into(), num(tol));
    m.insert("base_point".into(), complex_json(rep.base_point));
    m.insert("poles".into(), complex_list(sys.poles()));
    m.insert(
        "composition_order".into(),
        json!(rep.loops.composition_order),
    );
    m.insert("monodromy".into(), matrix_list(&rep.matrices));
    m.insert(
        "error_estimates".into(),
        Value::Array(rep.error_estimates.iter().map(|&e| num(e)).collect()),
    );
    m.insert("product_defect".into(), num(rep.product_defect()));
    m.insert("product_bound".into(), num(rep.product_bound()));
    Value::Object(m)
}

pub fn status_name(s: PoleStatus) -> &'static str {
    match s {
        PoleStatus::Pass => "pass",
        PoleStatus::Fail => "fail",
        PoleStatus::HypothesisUnmet => "hypothesis-unmet",
    }
}

pub fn verify_report(sys: &FuchsianSystem, r: &TheoremReport) -> Value {
    let mut m = report_header("verify");
    let o = &r.options;
    m.insert(
        "options".into(),
        json!({
            "tol": num(o.tol),
            "integration_tol": num(o.integration_tol),
            "structure_tol": num(o.structure_tol),
            "resonance_tol": num(o.resonance_tol),
        }),
    );
    m.insert("base_point".into(), complex_json(r.monodromy.base_point));
    m.insert("poles".into(), complex_list(sys.poles()));
    m.insert("verdict".into(), json!(r.verdict));
    m.insert(
        "cross_check_difference".into(),
        num(r.cross_check_difference),
    );
    m.insert("product_defect".into(), num(r.monodromy.product_defect()));
    let verdicts: Vec<Value> = r
        .poles
        .iter()
        .enumerate()
        .map(|(j, v)| {
            json!({
                "index": j,
                "status": status_name(v.status),
                "non_resonant": v.non_resonant,
                "spectrum_match": v.spectrum_match,
                "structure_match": v.structure_match,
                "monodromy_structure": jordan_json(&v.monodromy_structure),
                "generator_structure": jordan_json(&v.generator_structure),
                "conjugator_residual": v.conjugator_residual.map_or(Value::Null, num),
            })
        })
        .collect();
    m.insert("pole_verdicts".into(), Value::Array(verdicts));
    m.insert("monodromy".into(), matrix_list(&r.monodromy.matrices));
    m.insert("generators".into(), matrix_list(&r.generators));
    Value::Object(m)
}

/// Solver summary; the residues themselves go out in the system format.
pub fn inverse_report(sol: &InverseSolution, tol: f64) -> Value {
    let mut m = report_header("invert");
    m.insert("tol".into(), num(tol));
    m.insert("converged".into(), json!(sol.converged));
    m.insert("iterations".into(), json!(sol.iterations));
    m.insert("residual".into(), num(sol.residual));
    m.insert(
        "residual_history".into(),
        Value::Array(sol.residual_history.iter().map(|&x| num(x)).collect()),
    );
    m.insert("non_resonant".into(), json!(sol.non_resonant));
    m.insert("residues".into(), matrix_list(&sol.residues));
    Value::Object(m)
}

fn parse_rational_entry(v: &Value, path: &str) -> Result<RationalFunction, IoError> {
    let s = v
        .as_str()
        .ok_or_else(|| format_err(path, "expected a string"))?;
    crate::equivalence::parse_rational(s).map_err(|e| format_err(path, e.to_string()))
}

fn parse_rational_matrix(v: &Value, path: &str) -> Result<RationalMatrix, IoError> {
    let rows = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            array(row, path)?
                .iter()
                .enumerate()
                .map(|(j, e)| parse_rational_entry(e, &format!("{path}[{i}][{j}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalMatrix::from_rows(rows)?)
}

fn dimension_field(v: &Value) -> Result<usize, IoError> {
    Ok(field(v, "dimension", "$")?
        .as_u64()
        .ok_or_else(|| format_err("$.dimension", "expected a positive integer"))? as usize)
}

fn check_dimension(declared: usize, m: &RationalMatrix) -> Result<(), IoError> {
    if declared == m.dim() {
        Ok(())
    } else {
        Err(format_err(
            "$.dimension",
            format!("declared {declared} but the matrix is {0}x{0}", m.dim()),
        ))
    }
}

/// `{"order": n, "coeffs": ["a_0", ..., "a_{n-1}"]}`.
pub fn parse_scalar_equation(text: &str) -> Result<ScalarEquation, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let order = field(&v, "order", "$")?
        .as_u64()
        .ok_or_else(|| format_err("$.order", "expected a positive integer"))?
        as usize;
    let coeffs = array(field(&v, "coeffs", "$")?, "$.coeffs")?
        .iter()
        .enumerate()
        .map(|(k, c)| parse_rational_entry(c, &format!("$.coeffs[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() != order {
        return Err(format_err(
            "$.coeffs",
            format!("order is {order} but {} coefficients given", coeffs.len()),
        ));
    }
    Ok(ScalarEquation::new(coeffs)?)
}

pub fn scalar_equation_json(eq: &ScalarEquation) -> Value {
    json!({
        "order": eq.order(),
        "coeffs": eq.coeffs().iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

/// `{"dimension": n, "matrix": [["...", ...], ...]}`.
pub fn parse_rational_system(text: &str) -> Result<RationalMatrix, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let m = parse_rational_matrix(field(&v, "matrix", "$")?, "$.matrix")?;
    check_dimension(dimension_field(&v)?, &m)?;
    Ok(m)
}

pub fn rational_system_json(a: &RationalMatrix) -> Value {
    json!({"dimension": a.dim(), "matrix": a.to_strings()})
}

/// `{"dimension": n, "convention": "neg-transpose", "action": [[...]]}`;
/// `action[i][j]` is the coefficient of `e_j` in `∂e_i`.
pub fn parse_module(text: &str) -> Result<DifferentialModule, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let action = parse_rational_matrix(field(&v, "action", "$")?, "$.action")?;
    check_dimension(dimension_field(&v)?, &action)?;
    let name = field(&v, "convention", "$")?
        .as_str()
        .ok_or_else(|| format_err("$.convention", "expected a string"))?;
    let convention = ModuleConvention::from_name(name)
        .ok_or_else(|| format_err("$.convention", format!("unknown convention {name:?}")))?;
    Ok(DifferentialModule::new(action, convention))
}

pub fn module_json(m: &DifferentialModule) -> Value {
    json!({
        "dimension": m.dimension(),
        "convention": m.convention().name(),
        "action": m.action().to_strings(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_string(&json!({"x": 0.1, "y": [1.0, -2.5e-300]}));
        assert_eq!(
            s,
            "{\"x\":1.0000000000000001e-1,\"y\":[1.0000000000000000e0,-2.5000000000000000e-300]}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn complex_literals() {
        let c = |re, im| Some(Complex64::new(re, im));
        assert_eq!(parse_complex_literal("3+4i"), c(3.0, 4.0));
        assert_eq!(parse_complex_literal("-1.5i"), c(0.0, -1.5));
        assert_eq!(parse_complex_literal("2"), c(2.0, 0.0));
        assert_eq!(parse_complex_literal("1e-3-2e-2i"), c(1e-3, -2e-2));
        assert_eq!(parse_complex_literal("2.5e+1+i"), c(25.0, 1.0));
        assert_eq!(parse_complex_literal(" 1 - i "), c(1.0, -1.0));
        assert_eq!(parse_complex_literal("i"), c(0.0, 1.0));
        assert_eq!(parse_complex_literal("x"), None);
        assert_eq!(parse_complex_literal("1+2j"), None);
    }

    #[test]
    fn system_round_trip() {
        let text = r#"{"dimension": 1, "poles": [[0, 0], [1, 0.5]], "residues": [[[[0.25, 0]]], [[[-0.25, 0]]]]}"#;
        let sys = SystemFile::parse(text).unwrap().validate(1e-12).unwrap();
        let again = SystemFile::parse(&to_string(&system_json(&sys)))
            .unwrap()
            .validate(1e-12)
            .unwrap();
        assert_eq!(sys, again);
    }

    #[test]
    fn system_errors() {
        let bad_dim =
            r#"{"dimension": 2, "poles": [[0, 0], [1, 0]], "residues": [[[[1, 0]]], [[[-1, 0]]]]}"#;
        assert!(matches!(
            SystemFile::parse(bad_dim),
            Err(IoError::Format { .. })
        ));
        let bad_sum = r#"{"dimension": 1, "poles": [[0, 0], [1, 0]], "residues": [[[[1, 0]]], [[[-0.5, 0]]]]}"#;
        let err = SystemFile::parse(bad_sum)
            .unwrap()
            .validate(1e-9)
            .unwrap_err();
        assert!(matches!(
            err,
            IoError::System(SystemError::ResidueSum { .. })
        ));
        assert!(matches!(SystemFile::parse("{"), Err(IoError::Json(_))));
    }

    #[test]
    fn scalar_equation_format() {
        let eq =
            parse_scalar_equation(r#"{"order": 2, "coeffs": ["1/z", "(z^2+1)/(z-1)"]}"#).unwrap();
        assert_eq!(
            to_string(&scalar_equation_json(&eq)),
            "{\"order\":2,\"coeffs\":[\"1/z\",\"(z^2+1)/(z-1)\"]}\n"
        );
        assert!(parse_scalar_equation(r#"{"order": 3, "coeffs": ["1"]}"#).is_err());
        assert!(parse_scalar_equation(r#"{"order": 1, "coeffs": ["1/"]}"#).is_err());
    }
}
