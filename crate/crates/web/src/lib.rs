//! Browser bindings for the placement demo in `www/index.html`.
//!
//! Three operations are exported: solving a placement for a set of segment
//! weights, sampling the objective on a grid for the heat map, and checking a
//! placement against the grid-search oracle. Each wrapper forwards to a plain
//! Rust function so the logic is testable off the browser.

use serde_json::json;
use stationfit::geometry::{Point2, PolygonRegion};
use stationfit::oracle::{grid_minimize, SearchBox};
use stationfit::traffic::{load_region, PlacementReport, RegionDocument, SegmentResidual};
use stationfit::wls::{assemble, objective, solve_wls, LineSystem, WeightVector};
use stationfit::{cli, fixtures};
use wasm_bindgen::prelude::*;

fn parse(region_json: &str) -> Result<(PolygonRegion, LineSystem), String> {
    let region = load_region(region_json).map_err(|e| e.to_string())?;
    let system = assemble(region.lines().to_vec()).map_err(|e| e.to_string())?;
    Ok((region, system))
}

/// Empty `weights` means all ones.
fn weight_vector(weights: &[f64], rows: usize) -> Result<WeightVector, String> {
    let w = if weights.is_empty() {
        WeightVector::uniform(rows, 1.0)
    } else {
        WeightVector::new(weights.to_vec())
    };
    w.map_err(|e| e.to_string())
}

pub fn placement(region_json: &str, weights: &[f64]) -> Result<PlacementReport, String> {
    let (region, system) = parse(region_json)?;
    let w = weight_vector(weights, system.len())?;
    let sol = solve_wls(&system, &w).map_err(|e| e.to_string())?;
    let per_segment = region
        .segment_ids()
        .zip(w.values())
        .zip(&sol.residuals)
        .map(|((segment, &weight), &distance)| SegmentResidual {
            segment: segment.into(),
            weight,
            distance,
        })
        .collect();
    Ok(PlacementReport {
        window: if weights.is_empty() {
            "unweighted"
        } else {
            "custom"
        }
        .into(),
        location: sol.point,
        objective: sol.objective,
        inside_region: region.contains(sol.point),
        condition: sol.condition,
        per_segment,
    })
}

/// Objective sampled on an `nx × ny` grid, row by row from `ymin` upward.
pub fn field(
    region_json: &str,
    weights: &[f64],
    (xmin, xmax): (f64, f64),
    (ymin, ymax): (f64, f64),
    (nx, ny): (usize, usize),
) -> Result<Vec<f64>, String> {
    if nx < 2 || ny < 2 {
        return Err("grid needs at least 2 samples per axis".into());
    }
    let (_, system) = parse(region_json)?;
    let w = weight_vector(weights, system.len())?;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = ymin + (ymax - ymin) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x = xmin + (xmax - xmin) * i as f64 / (nx - 1) as f64;
            out.push(objective(&system, &w, Point2::new(x, y)).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

pub fn oracle_check(region_json: &str, weights: &[f64]) -> Result<serde_json::Value, String> {
    let (region, system) = parse(region_json)?;
    let w = weight_vector(weights, system.len())?;
    let sol = solve_wls(&system, &w).map_err(|e| e.to_string())?;
    let search: SearchBox = cli::search_box_for(&region);
    let found = grid_minimize(|p| objective(&system, &w, p).unwrap_or(f64::NAN), &search)
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "solver": sol.point,
        "oracle": found.point,
        "delta": sol.point.distance(found.point),
        "resolution": found.resolution,
    }))
}

/// Solves the placement and returns the report as JSON.
#[wasm_bindgen(js_name = solvePlacement)]
pub fn solve_placement(region_json: &str, weights: &[f64]) -> Result<String, JsError> {
    let report = placement(region_json, weights).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&report).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = objectiveField)]
#[allow(clippy::too_many_arguments)]
pub fn objective_field(
    region_json: &str,
    weights: &[f64],
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>, JsError> {
    field(region_json, weights, (xmin, xmax), (ymin, ymax), (nx, ny)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = verifyPlacement)]
pub fn verify_placement(region_json: &str, weights: &[f64]) -> Result<String, JsError> {
    oracle_check(region_json, weights)
        .map(|v| v.to_string())
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bundledRegion)]
pub fn bundled_region() -> String {
    fixtures::POWER_AND_LIGHT_JSON.to_string()
}

/// Segment weights for a bundled window (`morning` or `afternoon`); empty otherwise.
#[wasm_bindgen(js_name = bundledWeights)]
pub fn bundled_weights(window: &str) -> Vec<f64> {
    match window {
        "morning" => fixtures::MORNING_WEIGHTS.to_vec(),
        "afternoon" => fixtures::AFTERNOON_WEIGHTS.to_vec(),
        _ => Vec::new(),
    }
}

#[wasm_bindgen(js_name = regionName)]
pub fn region_name(region_json: &str) -> Result<String, JsError> {
    RegionDocument::parse(region_json)
        .map(|d| d.name)
        .map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_morning_placement() {
        let r = placement(&bundled_region(), &bundled_weights("morning")).unwrap();
        assert!(r.location.distance(Point2::new(16.7575, 4.5093)) < 1e-3);
        assert!(r.inside_region);
        assert_eq!(r.per_segment.len(), 7);
    }

    #[test]
    fn empty_weights_mean_unweighted() {
        let r = placement(&bundled_region(), &[]).unwrap();
        assert_eq!(r.window, "unweighted");
        assert!(r.location.distance(Point2::new(7.5671, 6.2128)) < 1e-3);
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(placement("{}", &[]).is_err());
        assert!(placement(&bundled_region(), &[1.0, 2.0]).is_err());
        assert!(placement(&bundled_region(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(field(&bundled_region(), &[], (0.0, 1.0), (0.0, 1.0), (1, 5)).is_err());
    }

    #[test]
    fn field_is_smallest_near_placement() {
        let w = bundled_weights("afternoon");
        let values = field(&bundled_region(), &w, (0.0, 20.0), (0.0, 20.0), (81, 81)).unwrap();
        assert_eq!(values.len(), 81 * 81);
        let (k, _) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let p = Point2::new(0.25 * (k % 81) as f64, 0.25 * (k / 81) as f64);
        assert!(p.distance(Point2::new(6.5775, 10.2603)) < 0.25, "{p}");
    }

    #[test]
    fn oracle_agrees() {
        let v = oracle_check(&bundled_region(), &bundled_weights("morning")).unwrap();
        assert!(v["delta"].as_f64().unwrap() < 0.01);
    }
}
