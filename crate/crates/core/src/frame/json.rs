//! JSON exchange format for frame algebras and named forms.
//!
//! ```json
//! { "dim": 3, "coframe": ["e1", "e2", "e3"],
//!   "structure": { "e3": [["1", [1, 2]]] },
//!   "generators": { "s": { "positive": true, "d": [["(* 2 s)", [1]]] } },
//!   "orientation": [1, 2, 3] }
//! ```
//!
//! Indices are 1-based. Coefficients use the prefix grammar of
//! [`crate::expr::parse`]. Optional keys: `name`, a per-generator `sample`
//! (`{"uniform": [lo, hi]}` or `{"defined": expr}`) and `forms`, a map from
//! names to `{"degree": k, "terms": [[expr, [i, ...]], ...]}`.

use super::{basis_sign, AlgebraBuilder, Form, FrameAlgebra, Sampler, Terms};
use crate::expr::{parse, Expr};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("in {path}: {message}")]
    Schema { path: String, message: String },
    #[error("in {path}: expression error at column {column}: {message}")]
    Expr {
        path: String,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Frame(#[from] super::FrameError),
}

fn schema(path: &str, message: impl Into<String>) -> JsonError {
    JsonError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn parse_expr(path: &str, v: &Value) -> Result<Expr, JsonError> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(schema(path, "coefficient must be a string")),
    };
    parse(&s).map_err(|e| JsonError::Expr {
        path: path.to_string(),
        column: e.column,
        message: e.message,
    })
}

fn parse_terms(path: &str, v: &Value, deg: Option<usize>, dim: usize) -> Result<(usize, Terms), JsonError> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected a list of terms"))?;
    let mut out = Terms::new();
    let mut seen_deg = deg;
    for (k, item) in arr.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let pair = item
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| schema(&p, "term must be [coef, [indices]]"))?;
        let c = parse_expr(&p, &pair[0])?;
        let idx: Vec<usize> = pair[1]
            .as_array()
            .ok_or_else(|| schema(&p, "indices must be a list"))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| schema(&p, "indices must be positive integers"))?;
        if idx.iter().any(|&i| i == 0 || i > dim) {
            return Err(schema(&p, format!("index out of range 1..{dim}")));
        }
        match seen_deg {
            Some(d) if d != idx.len() => return Err(schema(&p, format!("expected {d} indices"))),
            _ => seen_deg = Some(idx.len()),
        }
        let zero_based: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        let (m, s) = basis_sign(&zero_based).ok_or_else(|| schema(&p, "repeated index"))?;
        let c = if s < 0 { c.neg() } else { c };
        let entry = out.entry(m).or_insert_with(Expr::zero);
        *entry = &*entry + &c;
    }
    out.retain(|_, c| !c.is_zero());
    Ok((seen_deg.unwrap_or(0), out))
}

fn terms_json(t: &Terms, dim: usize) -> Value {
    Value::Array(
        t.iter()
            .map(|(m, c)| {
                let idx: Vec<usize> = (0..dim).filter(|i| m & (1 << i) != 0).map(|i| i + 1).collect();
                json!([c.to_string(), idx])
            })
            .collect(),
    )
}

fn permutation_sign(p: &[usize]) -> i32 {
    let mut s = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// A parsed document: the algebra plus any named forms.
pub struct Document {
    pub algebra: Arc<FrameAlgebra>,
    pub forms: BTreeMap<String, Form>,
}

pub fn import(text: &str) -> Result<Document, JsonError> {
    let v: Value = serde_json::from_str(text).map_err(|e| JsonError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = v.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    let dim = obj
        .get("dim")
        .and_then(|d| d.as_u64())
        .ok_or_else(|| schema("$.dim", "missing or not an integer"))? as usize;
    if dim == 0 || dim > 16 {
        return Err(schema("$.dim", "dimension must be in 1..16"));
    }
    let labels: Vec<String> = obj
        .get("coframe")
        .and_then(|c| c.as_array())
        .ok_or_else(|| schema("$.coframe", "missing list of labels"))?
        .iter()
        .map(|x| x.as_str().map(|s| s.to_string()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| schema("$.coframe", "labels must be strings"))?;
    if labels.len() != dim {
        return Err(schema("$.coframe", format!("expected {dim} labels")));
    }
    let name = obj.get("name").and_then(|n| n.as_str()).unwrap_or("imported");
    let mut b = AlgebraBuilder::with_labels(name, labels.clone());
    if let Some(o) = obj.get("orientation") {
        let perm: Vec<usize> = o
            .as_array()
            .ok_or_else(|| schema("$.orientation", "expected a permutation"))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| schema("$.orientation", "expected integers"))?;
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted != (1..=dim).collect::<Vec<_>>() {
            return Err(schema("$.orientation", "not a permutation of 1..dim"));
        }
        b = b.orientation(permutation_sign(&perm));
    }
    if let Some(st) = obj.get("structure") {
        let st = st.as_object().ok_or_else(|| schema("$.structure", "expected an object"))?;
        for (label, terms) in st {
            let a = labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| schema("$.structure", format!("unknown coframe label `{label}`")))?;
            let (_, t) = parse_terms(&format!("$.structure.{label}"), terms, Some(2), dim)?;
            b = b.structure_terms(a, t);
        }
    }
    if let Some(gs) = obj.get("generators") {
        let gs = gs.as_object().ok_or_else(|| schema("$.generators", "expected an object"))?;
        for (g, info) in gs {
            let path = format!("$.generators.{g}");
            let info = info.as_object().ok_or_else(|| schema(&path, "expected an object"))?;
            let positive = info.get("positive").and_then(|p| p.as_bool()).unwrap_or(false);
            let d = match info.get("d") {
                Some(d) => parse_terms(&format!("{path}.d"), d, Some(1), dim)?.1,
                None => Terms::new(),
            };
            let sampler = match info.get("sample") {
                None => {
                    if positive {
                        Sampler::Uniform(0.5, 2.0)
                    } else {
                        Sampler::Uniform(-1.0, 1.0)
                    }
                }
                Some(s) => {
                    if let Some(u) = s.get("uniform").and_then(|u| u.as_array()) {
                        let lo = u.first().and_then(|x| x.as_f64());
                        let hi = u.get(1).and_then(|x| x.as_f64());
                        match (lo, hi) {
                            (Some(lo), Some(hi)) if lo < hi => Sampler::Uniform(lo, hi),
                            _ => return Err(schema(&path, "uniform range must be [lo, hi] with lo < hi")),
                        }
                    } else if let Some(e) = s.get("defined") {
                        Sampler::Defined(parse_expr(&format!("{path}.sample.defined"), e)?)
                    } else {
                        return Err(schema(&path, "unknown sampler"));
                    }
                }
            };
            b = b.generator_terms(g, positive, sampler, d);
        }
    }
    let algebra = b.build()?;
    let mut forms = BTreeMap::new();
    if let Some(fs) = obj.get("forms") {
        let fs = fs.as_object().ok_or_else(|| schema("$.forms", "expected an object"))?;
        for (fname, f) in fs {
            let path = format!("$.forms.{fname}");
            let deg = f
                .get("degree")
                .and_then(|d| d.as_u64())
                .ok_or_else(|| schema(&path, "missing degree"))? as usize;
            let terms = f.get("terms").ok_or_else(|| schema(&path, "missing terms"))?;
            let (_, t) = parse_terms(&format!("{path}.terms"), terms, Some(deg), dim)?;
            for c in t.values() {
                for g in c.gens() {
                    if !algebra.has_generator(g.as_str()) {
                        return Err(schema(&path, format!("unknown generator `{g}`")));
                    }
                }
            }
            forms.insert(fname.clone(), Form::from_terms(&algebra, deg, t));
        }
    }
    Ok(Document { algebra, forms })
}

pub fn export(alg: &FrameAlgebra, forms: &BTreeMap<String, Form>) -> String {
    let dim = alg.dim();
    let mut structure = Map::new();
    for a in 0..dim {
        let t = alg.structure_terms(a);
        if !t.is_empty() {
            structure.insert(alg.labels()[a].clone(), terms_json(t, dim));
        }
    }
    let mut gens = Map::new();
    for (s, info) in alg.generators() {
        let sample = match &info.sampler {
            Sampler::Uniform(lo, hi) => json!({ "uniform": [lo, hi] }),
            Sampler::Defined(e) => json!({ "defined": e.to_string() }),
        };
        gens.insert(
            s.to_string(),
            json!({ "positive": info.positive, "d": terms_json(&info.d, dim), "sample": sample }),
        );
    }
    let mut orientation: Vec<usize> = (1..=dim).collect();
    if alg.orientation() < 0 && dim >= 2 {
        orientation.swap(0, 1);
    }
    let mut doc = json!({
        "name": alg.name(),
        "dim": dim,
        "coframe": alg.labels(),
        "structure": structure,
        "generators": gens,
        "orientation": orientation,
    });
    if !forms.is_empty() {
        let mut fm = Map::new();
        for (k, f) in forms {
            fm.insert(k.clone(), json!({ "degree": f.deg(), "terms": terms_json(f.terms(), dim) }));
        }
        doc["forms"] = Value::Object(fm);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

/// Structural equality of two algebras (labels, orientation, structure
/// forms and generator data), independent of identity.
pub fn same_structure(a: &FrameAlgebra, b: &FrameAlgebra) -> bool {
    if a.labels() != b.labels() || a.orientation() != b.orientation() {
        return false;
    }
    if (0..a.dim()).any(|i| a.structure_terms(i) != b.structure_terms(i)) {
        return false;
    }
    let ga: BTreeMap<_, _> = a.generators().map(|(s, g)| (s.clone(), g.clone())).collect();
    let gb: BTreeMap<_, _> = b.generators().map(|(s, g)| (s.clone(), g.clone())).collect();
    ga.len() == gb.len()
        && ga.iter().all(|(s, g)| {
            gb.get(s)
                .map(|h| h.positive == g.positive && h.d == g.d && h.sampler == g.sampler)
                .unwrap_or(false)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEIS: &str = r#"{
        "dim": 3, "coframe": ["e1", "e2", "e3"],
        "structure": {"e3": [["1", [1, 2]]]},
        "generators": {"s": {"positive": true, "d": [["(* 2 s)", [1]]]}},
        "orientation": [1, 2, 3]
    }"#;

    #[test]
    fn import_export_round_trip() {
        let doc = import(HEIS).unwrap();
        let text = export(&doc.algebra, &BTreeMap::new());
        let again = import(&text).unwrap();
        assert!(same_structure(&doc.algebra, &again.algebra));
        assert_eq!(text, export(&again.algebra, &BTreeMap::new()));
    }

    #[test]
    fn syntax_errors_report_line_and_column() {
        let err = import("{\n  \"dim\": 3,\n  oops }").err().unwrap();
        match err {
            JsonError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn expression_errors_report_column() {
        let bad = HEIS.replace("(* 2 s)", "(* 2 $)");
        match import(&bad).err().unwrap() {
            JsonError::Expr { column, .. } => assert_eq!(column, 6),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn odd_orientation_is_kept() {
        let text = HEIS.replace("[1, 2, 3]", "[2, 1, 3]");
        let doc = import(&text).unwrap();
        assert_eq!(doc.algebra.orientation(), -1);
    }
}
