//! JSON encodings for inputs and reports.
//!
//! Conventions, fixed so that reruns are byte-identical and files are
//! hand-editable:
//! - complex numbers are `[re, im]` pairs; matrices are row-major nested
//!   arrays of those pairs;
//! - exact rationals are strings `"p/q"` (or `"p"` for integers), never
//!   floats;
//! - groups are arrays of cyclic factor orders; group elements and
//!   characters are coordinate arrays;
//! - set expressions are tagged objects (`kind` field);
//! - multiplicity values are numbers or the string `"infinity"`.
//!
//! All object construction goes through `serde_json::Map` with sorted
//! keys (the default), so serialization order never depends on hashing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::arcs::ArcSet;
use crate::error::{Error, Result};
use crate::group::{Character, Element, FiniteAbelianGroup};
use crate::linalg::{c, CMatrix, C64};
use crate::multiplicity::{FatCantor, MeasurableSetExpr, MultValue, StepMultiplicityFn};
use crate::proper::FiniteProperAction;

fn bad(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value) -> Result<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad("complex number must be a [re, im] pair"))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| bad("complex real part must be a number"))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| bad("complex imaginary part must be a number"))?;
    Ok(c(re, im))
}

pub fn rational_to_string(q: &BigRational) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_from_string(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| bad(format!("invalid integer {t:?} in rational")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let denom = parse_int(q)?;
            if denom.is_zero() {
                return Err(bad("rational with zero denominator"));
            }
            Ok(BigRational::new(parse_int(p)?, denom))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn rational_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => rational_from_string(s),
        Value::Number(n) => n
            .as_i64()
            .map(|k| BigRational::from_integer(BigInt::from(k)))
            .ok_or_else(|| bad("rational numbers must be integers or \"p/q\" strings")),
        _ => Err(bad("rational must be an integer or a \"p/q\" string")),
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            Value::Array(
                (0..m.cols())
                    .map(|j| complex_to_json(m.data()[i * m.cols() + j]))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad("matrix must be an array of rows"))?;
    if rows.is_empty() {
        return Err(bad("matrix must have at least one row"));
    }
    let mut parsed: Vec<Vec<C64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let entries = row
            .as_array()
            .ok_or_else(|| bad("matrix row must be an array"))?;
        parsed.push(
            entries
                .iter()
                .map(complex_from_json)
                .collect::<Result<Vec<C64>>>()?,
        );
    }
    let width = parsed[0].len();
    if width == 0 || parsed.iter().any(|r| r.len() != width) {
        return Err(bad("matrix rows must be nonempty and of equal length"));
    }
    Ok(CMatrix::from_rows(parsed))
}

// ---------------------------------------------------------------------------
// Groups
// ---------------------------------------------------------------------------

pub fn group_to_json(g: &FiniteAbelianGroup) -> Value {
    Value::Array(
        g.factors()
            .iter()
            .map(|&n| Value::Number(n.into()))
            .collect(),
    )
}

pub fn group_from_json(v: &Value) -> Result<FiniteAbelianGroup> {
    let factors = v
        .as_array()
        .ok_or_else(|| bad("group must be an array of cyclic factor orders"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .filter(|&n| n > 0)
                .ok_or_else(|| bad("group factors must be positive integers"))
        })
        .collect::<Result<Vec<u64>>>()?;
    FiniteAbelianGroup::new(factors)
}

pub fn character_to_json(chi: &Character) -> Value {
    Value::Array(chi.0.iter().map(|&k| Value::Number(k.into())).collect())
}

pub fn element_to_json(t: &Element) -> Value {
    Value::Array(t.0.iter().map(|&k| Value::Number(k.into())).collect())
}

// ---------------------------------------------------------------------------
// Arc sets and set expressions
// ---------------------------------------------------------------------------

pub fn arcset_to_json(s: &ArcSet) -> Value {
    let arcs: Vec<Value> = s
        .arcs()
        .iter()
        .map(|(a, b)| {
            json!([
                rational_to_string(a),
                rational_to_string(b)
            ])
        })
        .collect();
    let punctures: Vec<Value> = s
        .punctures()
        .iter()
        .map(|p| Value::String(rational_to_string(p)))
        .collect();
    let mut obj = Map::new();
    obj.insert("arcs".to_string(), Value::Array(arcs));
    if !punctures.is_empty() {
        obj.insert("punctures".to_string(), Value::Array(punctures));
    }
    Value::Object(obj)
}

pub fn arcset_from_json(v: &Value) -> Result<ArcSet> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("arc set must be an object with an \"arcs\" field"))?;
    let arcs_val = obj
        .get("arcs")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("arc set needs an \"arcs\" array"))?;
    let mut arcs = Vec::with_capacity(arcs_val.len());
    for pair in arcs_val {
        let ends = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| bad("each arc must be a [start, end] pair"))?;
        arcs.push((rational_from_json(&ends[0])?, rational_from_json(&ends[1])?));
    }
    let set = ArcSet::new(arcs)?;
    match obj.get("punctures") {
        None => Ok(set),
        Some(Value::Array(ps)) => {
            let points = ps
                .iter()
                .map(rational_from_json)
                .collect::<Result<Vec<BigRational>>>()?;
            Ok(set.puncture(&points))
        }
        Some(_) => Err(bad("punctures must be an array of rationals")),
    }
}

pub fn set_expr_to_json(e: &MeasurableSetExpr) -> Value {
    match e {
        MeasurableSetExpr::FiniteArcs(s) => {
            let mut obj = Map::new();
            obj.insert("kind".to_string(), Value::String("arcs".to_string()));
            obj.insert("set".to_string(), arcset_to_json(s));
            Value::Object(obj)
        }
        MeasurableSetExpr::FatCantor(fc) => {
            let mut obj = Map::new();
            obj.insert("kind".to_string(), Value::String("fat_cantor".to_string()));
            obj.insert(
                "ratio".to_string(),
                Value::String(rational_to_string(fc.ratio())),
            );
            Value::Object(obj)
        }
        MeasurableSetExpr::Complement(inner) => {
            let mut obj = Map::new();
            obj.insert("kind".to_string(), Value::String("complement".to_string()));
            obj.insert("of".to_string(), set_expr_to_json(inner));
            Value::Object(obj)
        }
        MeasurableSetExpr::Union(parts) => {
            let mut obj = Map::new();
            obj.insert("kind".to_string(), Value::String("union".to_string()));
            obj.insert(
                "parts".to_string(),
                Value::Array(parts.iter().map(set_expr_to_json).collect()),
            );
            Value::Object(obj)
        }
        MeasurableSetExpr::Intersection(parts) => {
            let mut obj = Map::new();
            obj.insert(
                "kind".to_string(),
                Value::String("intersection".to_string()),
            );
            obj.insert(
                "parts".to_string(),
                Value::Array(parts.iter().map(set_expr_to_json).collect()),
            );
            Value::Object(obj)
        }
    }
}

pub fn set_expr_from_json(v: &Value) -> Result<MeasurableSetExpr> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("set expression must be a tagged object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("set expression needs a string \"kind\""))?;
    match kind {
        "arcs" => {
            let set = obj
                .get("set")
                .ok_or_else(|| bad("arcs expression needs a \"set\""))?;
            Ok(MeasurableSetExpr::FiniteArcs(arcset_from_json(set)?))
        }
        "fat_cantor" => {
            let ratio = match obj.get("ratio") {
                Some(r) => rational_from_json(r)?,
                None => return Ok(MeasurableSetExpr::FatCantor(FatCantor::standard())),
            };
            Ok(MeasurableSetExpr::FatCantor(FatCantor::new(ratio)?))
        }
        "complement" => {
            let inner = obj
                .get("of")
                .ok_or_else(|| bad("complement needs an \"of\" expression"))?;
            Ok(MeasurableSetExpr::Complement(Box::new(set_expr_from_json(
                inner,
            )?)))
        }
        "union" | "intersection" => {
            let parts = obj
                .get("parts")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("union/intersection needs a \"parts\" array"))?
                .iter()
                .map(set_expr_from_json)
                .collect::<Result<Vec<MeasurableSetExpr>>>()?;
            if kind == "union" {
                Ok(MeasurableSetExpr::Union(parts))
            } else {
                Ok(MeasurableSetExpr::Intersection(parts))
            }
        }
        other => Err(bad(format!("unknown set expression kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Multiplicity functions
// ---------------------------------------------------------------------------

pub fn mult_value_to_json(v: MultValue) -> Value {
    match v {
        MultValue::Finite(n) => Value::Number(n.into()),
        MultValue::Infinite => Value::String("infinity".to_string()),
    }
}

pub fn mult_value_from_json(v: &Value) -> Result<MultValue> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(MultValue::Finite)
            .ok_or_else(|| bad("multiplicity values must be nonnegative integers")),
        Value::String(s) if s == "infinity" => Ok(MultValue::Infinite),
        _ => Err(bad("multiplicity value must be an integer or \"infinity\"")),
    }
}

pub fn step_fn_to_json(d: &StepMultiplicityFn) -> Value {
    let pieces: Vec<Value> = d
        .pieces()
        .iter()
        .map(|(expr, v)| {
            let mut obj = Map::new();
            obj.insert("set".to_string(), set_expr_to_json(expr));
            obj.insert("value".to_string(), mult_value_to_json(*v));
            Value::Object(obj)
        })
        .collect();
    json!({ "pieces": pieces })
}

pub fn step_fn_from_json(v: &Value) -> Result<StepMultiplicityFn> {
    let pieces_val = v
        .get("pieces")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("multiplicity function needs a \"pieces\" array"))?;
    let mut pieces = Vec::with_capacity(pieces_val.len());
    for p in pieces_val {
        let set = p
            .get("set")
            .ok_or_else(|| bad("each piece needs a \"set\""))?;
        let value = p
            .get("value")
            .ok_or_else(|| bad("each piece needs a \"value\""))?;
        pieces.push((set_expr_from_json(set)?, mult_value_from_json(value)?));
    }
    StepMultiplicityFn::new(pieces)
}

// ---------------------------------------------------------------------------
// Proper actions
// ---------------------------------------------------------------------------

pub fn proper_action_to_json(a: &FiniteProperAction) -> Value {
    json!({
        "group": group_to_json(a.group()),
        "points": a.n_points(),
        "table": a.table(),
    })
}

pub fn proper_action_from_json(v: &Value) -> Result<FiniteProperAction> {
    let group = group_from_json(
        v.get("group")
            .ok_or_else(|| bad("proper action needs a \"group\""))?,
    )?;
    let n_points = v
        .get("points")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("proper action needs a \"points\" count"))? as usize;
    let parse_perm_rows = |val: &Value, what: &str| -> Result<Vec<Vec<usize>>> {
        val.as_array()
            .ok_or_else(|| bad(format!("{what} must be an array of permutations")))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad(format!("{what} rows must be arrays")))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|k| k as usize)
                            .ok_or_else(|| bad(format!("{what} entries must be indices")))
                    })
                    .collect()
            })
            .collect()
    };
    if let Some(table) = v.get("table") {
        return FiniteProperAction::new(group, n_points, parse_perm_rows(table, "table")?);
    }
    if let Some(perms) = v.get("generator_perms") {
        return FiniteProperAction::from_generator_perms(
            group,
            n_points,
            parse_perm_rows(perms, "generator_perms")?,
        );
    }
    Err(bad(
        "proper action needs either a \"table\" or \"generator_perms\"",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::rat;

    #[test]
    fn matrices_roundtrip_through_json() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, -2.0), c(0.5, 0.0)],
            vec![c(0.0, 3.25), c(-1.0, 1.0)],
        ]);
        let v = matrix_to_json(&m);
        let back = matrix_from_json(&v).unwrap();
        assert_eq!(back.shape(), (2, 2));
        assert!((&back - &m).max_abs() == 0.0);
    }

    #[test]
    fn ragged_matrices_are_rejected() {
        let v = json!([[[1.0, 0.0]], [[1.0, 0.0], [2.0, 0.0]]]);
        assert!(matrix_from_json(&v).is_err());
    }

    #[test]
    fn rationals_roundtrip_as_strings() {
        for q in [rat(3, 4), rat(-7, 2), rat(5, 1), rat(0, 1)] {
            let s = rational_to_string(&q);
            assert_eq!(rational_from_string(&s).unwrap(), q);
        }
        assert!(rational_from_string("1/0").is_err());
        assert!(rational_from_string("a/b").is_err());
    }

    #[test]
    fn arcsets_with_punctures_roundtrip() {
        let s = ArcSet::full_minus_points(&[rat(1, 3)]);
        let v = arcset_to_json(&s);
        let back = arcset_from_json(&v).unwrap();
        assert_eq!(back.arcs(), s.arcs());
        assert_eq!(back.punctures(), s.punctures());
    }

    #[test]
    fn set_expressions_roundtrip() {
        let expr = MeasurableSetExpr::Union(vec![
            MeasurableSetExpr::Complement(Box::new(MeasurableSetExpr::FatCantor(
                FatCantor::standard(),
            ))),
            MeasurableSetExpr::FiniteArcs(ArcSet::new(vec![(rat(0, 1), rat(1, 4))]).unwrap()),
        ]);
        let v = set_expr_to_json(&expr);
        let back = set_expr_from_json(&v).unwrap();
        assert_eq!(back, expr);
    }

    #[test]
    fn multiplicity_functions_roundtrip() {
        let d = StepMultiplicityFn::new(vec![
            (
                MeasurableSetExpr::FiniteArcs(ArcSet::new(vec![(rat(0, 1), rat(1, 2))]).unwrap()),
                MultValue::Infinite,
            ),
            (
                MeasurableSetExpr::FiniteArcs(ArcSet::new(vec![(rat(1, 2), rat(1, 1))]).unwrap()),
                MultValue::Finite(2),
            ),
        ])
        .unwrap();
        let v = step_fn_to_json(&d);
        let back = step_fn_from_json(&v).unwrap();
        assert_eq!(back.pieces().len(), 2);
        assert_eq!(back.pieces()[0].1, MultValue::Infinite);
    }

    #[test]
    fn proper_actions_roundtrip_and_validate() {
        let group = FiniteAbelianGroup::new(vec![2]).unwrap();
        let action =
            FiniteProperAction::from_generator_perms(group, 2, vec![vec![1, 0]]).unwrap();
        let v = proper_action_to_json(&action);
        let back = proper_action_from_json(&v).unwrap();
        assert_eq!(back.table(), action.table());

        let bad_input = json!({
            "group": [2],
            "points": 2,
            "table": [[0, 1], [0, 0]],
        });
        assert!(proper_action_from_json(&bad_input).is_err());
    }

    #[test]
    fn serialized_objects_have_deterministic_bytes() {
        let expr = MeasurableSetExpr::FatCantor(FatCantor::standard());
        let a = serde_json::to_string(&set_expr_to_json(&expr)).unwrap();
        let b = serde_json::to_string(&set_expr_to_json(&expr)).unwrap();
        assert_eq!(a, b);
    }
}
