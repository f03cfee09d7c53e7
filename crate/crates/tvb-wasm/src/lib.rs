//! Browser bindings for the interactive demo page: validate a project,
//! render a slice of its divisorial fan, and tabulate graded section
//! dimensions. Everything works on JSON strings so the page needs no
//! framework and no generated glue beyond wasm-bindgen itself.

use wasm_bindgen::prelude::*;

use tvb_core::apps::sections::{global_sections, sections_bundle_on_y, weight_box};
use tvb_core::apps::split::{split_check, SplitResult};
use tvb_core::curve::{fmt_ratfunc, PointP1};
use tvb_core::project::load_str;
use tvb_core::support::fmt_weight;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Validation report as JSON: {valid, failures, warnings}.
#[wasm_bindgen]
pub fn validate_report(project_json: &str) -> Result<String, JsValue> {
    let project = load_str(project_json).map_err(err)?;
    let (failures, warnings) = match &project.support {
        Some(h) => {
            let r = h.validate();
            (r.failures, r.warnings)
        }
        None => {
            let r = project.fan.validate();
            (r.failures, r.warnings)
        }
    };
    serde_json::to_string_pretty(&serde_json::json!({
        "valid": failures.is_empty(),
        "failures": failures,
        "warnings": warnings,
    }))
    .map_err(err)
}

/// The slice at a point as an SVG document.
#[wasm_bindgen]
pub fn render_slice(project_json: &str, point: &str) -> Result<String, JsValue> {
    let project = load_str(project_json).map_err(err)?;
    let p = PointP1::parse(point).map_err(err)?;
    tvb_core::render::render_slice(&project.fan, &p).map_err(err)
}

/// Points of the curve the fan mentions explicitly, plus one generic point,
/// as a JSON list of strings.
#[wasm_bindgen]
pub fn slice_points(project_json: &str) -> Result<String, JsValue> {
    let project = load_str(project_json).map_err(err)?;
    let mut pts: Vec<String> = project
        .fan
        .explicit_points()
        .iter()
        .map(|p| p.to_string())
        .collect();
    let fresh = project.fan.fresh_point().to_string();
    if !pts.contains(&fresh) {
        pts.push(fresh);
    }
    serde_json::to_string(&pts).map_err(err)
}

/// Per-weight section dimensions over the character box, with bases, plus
/// the curve-side cross dimensions: JSON {weights: [...], total}.
#[wasm_bindgen]
pub fn sections_table(project_json: &str) -> Result<String, JsValue> {
    let project = load_str(project_json).map_err(err)?;
    let support = project
        .support
        .as_ref()
        .ok_or_else(|| JsValue::from_str("file carries no bundle data"))?;
    let mut rows = Vec::new();
    let mut total = 0usize;
    for u in weight_box(support) {
        let space = global_sections(support, &u).map_err(err)?;
        let cross = sections_bundle_on_y(support, &u).map_err(err)?;
        total += space.dim();
        rows.push(serde_json::json!({
            "weight": fmt_weight(&u),
            "dimension": space.dim(),
            "curve_side": cross.dim,
            "basis": space
                .basis
                .iter()
                .map(|b| b.iter().map(fmt_ratfunc).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }));
    }
    serde_json::to_string_pretty(&serde_json::json!({
        "weights": rows,
        "total": total,
    }))
    .map_err(err)
}

/// Splitting decision as JSON: {result, witness?/reason?/candidates_tried?}.
#[wasm_bindgen]
pub fn split_report(project_json: &str) -> Result<String, JsValue> {
    let project = load_str(project_json).map_err(err)?;
    let support = project
        .support
        .as_ref()
        .ok_or_else(|| JsValue::from_str("file carries no bundle data"))?;
    let value = match split_check(support).map_err(err)? {
        SplitResult::Split { witness } => serde_json::json!({
            "result": "split",
            "witness": (0..witness.cols)
                .map(|j| (0..witness.rows)
                    .map(|i| fmt_ratfunc(&witness[(i, j)]))
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        SplitResult::NotSplit { reason } => {
            serde_json::json!({"result": "not split", "reason": reason})
        }
        SplitResult::Unknown { candidates_tried } => serde_json::json!({
            "result": "unknown",
            "candidates_tried": candidates_tried,
        }),
    };
    serde_json::to_string_pretty(&value).map_err(err)
}

#[cfg(test)]
mod tests {
    // The bindings are thin wrappers over tvb-core; exercising one end to
    // end keeps the host-side build honest.
    #[test]
    fn render_wraps_core() {
        let json = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/character_bundle.json"
        ))
        .unwrap();
        let svg = super::render_slice(&json, "0").unwrap();
        assert!(svg.starts_with("<svg"));
        let report = super::validate_report(&json).unwrap();
        assert!(report.contains("\"valid\": true"));
    }
}
