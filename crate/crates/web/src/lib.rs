//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every entry point takes plain numbers or strings and returns a JSON
//! string, so the page needs no generated type glue beyond `wasm-bindgen`.

use qmap_cones::cones::{cone_membership, BodySpec, ConeId, OracleParams, Slice};
use qmap_cones::geometry::{section_bounds, vrad_cp_base};
use qmap_cones::matcore::{matrix_from_json, matrix_to_json, ChoiMat};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest N the page accepts; separability beyond this is out of reach.
pub const MAX_N: usize = 3;

const CONES: [ConeId; 5] = [ConeId::SP, ConeId::T, ConeId::CP, ConeId::D, ConeId::P];

type Out = Result<Value, String>;

fn check_n(n: usize) -> Result<(), String> {
    if (2..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("N must be between 2 and {MAX_N}, got {n}"))
    }
}

fn params(seed: u64) -> OracleParams {
    OracleParams {
        seed,
        ..OracleParams::default()
    }
}

/// `p` times the maximally entangled projector plus `1 − p` times the
/// completely depolarizing channel.
pub fn isotropic(n: usize, p: f64) -> Result<ChoiMat, String> {
    let mut d = ChoiMat::depolarizing(n).mat().scale(1.0 - p);
    d.axpy(p, ChoiMat::max_entangled(n).mat());
    ChoiMat::new(n, d).map_err(|e| e.to_string())
}

pub fn membership_json(matrix: &str, cone: &str, seed: u64) -> Out {
    let m = matrix_from_json(matrix).map_err(|e| e.to_string())?;
    let d = m.dim();
    let n = (d as f64).sqrt().round() as usize;
    if n * n != d {
        return Err(format!("matrix is {d}×{d}, not N²×N²"));
    }
    check_n(n)?;
    let cone: ConeId = cone.parse().map_err(|e: qmap_cones::Error| e.to_string())?;
    let choi = ChoiMat::new(n, m).map_err(|e| e.to_string())?;
    let verdict = cone_membership(&choi, cone, &params(seed)).map_err(|e| e.to_string())?;
    Ok(json!({ "n": n, "cone": cone.to_string(), "verdict": verdict }))
}

pub fn isotropic_sweep_json(n: usize, p: f64, seed: u64) -> Out {
    check_n(n)?;
    let nn = (n * n) as f64;
    // positivity of the Choi matrix needs p ≥ −1/(N²−1)
    if !(-1.0 / (nn - 1.0)..=1.0).contains(&p) {
        return Err(format!("p must lie in [{:.4}, 1]", -1.0 / (nn - 1.0)));
    }
    let choi = isotropic(n, p)?;
    let mut rows = Vec::new();
    for cone in CONES {
        let v = cone_membership(&choi, cone, &params(seed)).map_err(|e| e.to_string())?;
        rows.push(json!({
            "cone": cone.to_string(),
            "status": v.status,
            "margin": v.margin,
            "heuristic": v.heuristic,
        }));
    }
    Ok(json!({
        "n": n,
        "p": p,
        "ppt_threshold": 1.0 / (n as f64 + 1.0),
        "choi": serde_json::from_str::<Value>(&matrix_to_json(choi.mat())).map_err(|e| e.to_string())?,
        "cones": rows,
    }))
}

pub fn cp_base_json(n: usize) -> Out {
    if !(2..=8).contains(&n) {
        return Err(format!("N must be between 2 and 8, got {n}"));
    }
    let e = |e: qmap_cones::Error| e.to_string();
    let base = BodySpec::new(ConeId::CP, n, Slice::Base).map_err(e)?;
    let tp = BodySpec::new(ConeId::CP, n, Slice::TP).map_err(e)?;
    let (r, big_r) = base.radii().ok_or("base without radii")?;
    let vrad = vrad_cp_base(n).map_err(e)?;
    let (lo, hi) = section_bounds(vrad, r, big_r, base.dimension(), tp.dimension()).map_err(e)?;
    Ok(json!({
        "n": n,
        "dimension": base.dimension(),
        "vrad": vrad,
        "inradius": r,
        "outradius": big_r,
        "tp_dimension": tp.dimension(),
        "tp_lower": lo,
        "tp_upper": hi,
    }))
}

fn to_js(out: Out) -> Result<String, JsValue> {
    out.map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e))
}

/// Verdict for a Choi matrix given as `{"dim","re","im"}` JSON.
#[wasm_bindgen]
pub fn membership(matrix: &str, cone: &str, seed: u32) -> Result<String, JsValue> {
    to_js(membership_json(matrix, cone, seed as u64))
}

/// Verdicts of the isotropic map with weight `p` in all five cones.
#[wasm_bindgen(js_name = isotropicSweep)]
pub fn isotropic_sweep(n: u32, p: f64, seed: u32) -> Result<String, JsValue> {
    to_js(isotropic_sweep_json(n as usize, p, seed as u64))
}

/// Exact volume radius and radii of the CP base, with the bracket for its
/// trace-preserving section.
#[wasm_bindgen(js_name = cpBase)]
pub fn cp_base(n: u32) -> Result<String, JsValue> {
    to_js(cp_base_json(n as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn statuses(v: &Value) -> Vec<(String, String)> {
        v["cones"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    r["cone"].as_str().unwrap().into(),
                    r["status"].as_str().unwrap().into(),
                )
            })
            .collect()
    }

    #[test]
    fn sweep_crosses_the_ppt_threshold() {
        let below = isotropic_sweep_json(2, 0.3, 1).unwrap();
        assert!(statuses(&below).iter().all(|(_, s)| s == "In"), "{below}");
        let above = isotropic_sweep_json(2, 0.4, 1).unwrap();
        for (cone, s) in statuses(&above) {
            let want = if cone == "SP" || cone == "T" {
                "Out"
            } else {
                "In"
            };
            assert_eq!(s, want, "{cone}");
        }
    }

    #[test]
    fn membership_round_trips_matrix_json() {
        let m = matrix_to_json(isotropic(2, 0.4).unwrap().mat());
        let v = membership_json(&m, "T", 1).unwrap();
        assert_eq!(v["verdict"]["status"], "Out");
        assert!(membership_json(&m, "XY", 1).is_err());
        assert!(membership_json("{\"dim\":3,\"re\":[],\"im\":[]}", "CP", 1).is_err());
    }

    #[test]
    fn cp_base_values() {
        let v = cp_base_json(2).unwrap();
        assert!((v["vrad"].as_f64().unwrap() - 0.855961150431).abs() < 1e-10);
        assert!((v["tp_lower"].as_f64().unwrap() - 0.573775).abs() < 1e-5);
        assert!(cp_base_json(1).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(isotropic_sweep_json(4, 0.2, 1).is_err());
        assert!(isotropic_sweep_json(2, 1.5, 1).is_err());
    }
}
