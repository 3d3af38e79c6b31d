//! Browser bindings. Each exported function runs a small experiment and
//! returns JSON for the page to draw; the `*_json` functions hold the logic
//! and run natively too.

use locadapt::bench::{
    gen_stream, regret_curve, run_hm, run_la, Comparator, LaConfig, StreamSpec, TargetFunction,
    TargetPreset,
};
use locadapt::domain::LossKind;
use locadapt::net::RadiusSchedule;
use locadapt::pruning::{best_pruning, stats};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

pub const MAX_HORIZON: usize = 20_000;
const DEPTH: usize = 5;
const CURVE_POINTS: usize = 400;

fn grid() -> Vec<f64> {
    (1..=DEPTH).map(|k| 2f64.powi(k as i32)).collect()
}

fn check(horizon: usize, noise: f64) -> Result<(), String> {
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(format!("horizon must lie in 1..={MAX_HORIZON}"));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err("noise must lie in [0, 1]".into());
    }
    Ok(())
}

fn target(preset: &str) -> Result<TargetFunction, String> {
    let p: TargetPreset = preset.parse().map_err(|e| format!("{e}"))?;
    let g = grid();
    TargetFunction::preset(p, g[0], g[DEPTH - 1]).map_err(|e| e.to_string())
}

/// Every `step`-th entry plus the last one, as `[t, value]` pairs.
fn thin(curve: &[f64]) -> Vec<[f64; 2]> {
    let step = curve.len().div_ceil(CURVE_POINTS).max(1);
    let mut out: Vec<[f64; 2]> = curve
        .iter()
        .enumerate()
        .step_by(step)
        .map(|(i, v)| [(i + 1) as f64, *v])
        .collect();
    if (curve.len() - 1) % step != 0 {
        out.push([curve.len() as f64, curve[curve.len() - 1]]);
    }
    out
}

/// Cumulative regret of the locally adaptive learner and of the flat
/// baseline against the clean target, on a 1-d stream.
pub fn compare_json(preset: &str, horizon: usize, seed: u64, noise: f64) -> Result<Value, String> {
    check(horizon, noise)?;
    let f = target(preset)?;
    let mut spec = StreamSpec::new(horizon, 1, seed);
    spec.noise = noise;
    let xs = gen_stream(&spec, &f).map_err(|e| e.to_string())?.examples;
    let s = RadiusSchedule::lipschitz(grid(), 1).map_err(|e| e.to_string())?;
    let la = run_la(&xs, &LaConfig::new(s, LossKind::Square)).map_err(|e| e.to_string())?;
    let hm = run_hm(&xs, grid()[DEPTH - 1], 1, LossKind::Square).map_err(|e| e.to_string())?;
    let eval = |x: &[f64]| f.eval(x);
    let cmp = Comparator::Target(&eval);
    let la_curve = regret_curve(&la, &cmp).map_err(|e| e.to_string())?;
    let hm_curve = regret_curve(&hm, &cmp).map_err(|e| e.to_string())?;
    Ok(json!({
        "la": thin(&la_curve),
        "hm": thin(&hm_curve),
        "la_nodes": la.node_count(),
        "hm_nodes": hm.node_count(),
        "target": f.knots().iter().map(|(x, y)| [*x, *y]).collect::<Vec<_>>(),
    }))
}

/// Where the hindsight-best pruning cuts the tree: its leaves with their
/// level and center, and the per-level counts.
pub fn pruning_json(preset: &str, horizon: usize, seed: u64, noise: f64) -> Result<Value, String> {
    check(horizon, noise)?;
    let f = target(preset)?;
    let mut spec = StreamSpec::new(horizon, 1, seed);
    spec.noise = noise;
    let xs = gen_stream(&spec, &f).map_err(|e| e.to_string())?.examples;
    let s = RadiusSchedule::lipschitz(grid(), 1).map_err(|e| e.to_string())?;
    let log = run_la(&xs, &LaConfig::new(s.clone(), LossKind::Square)).map_err(|e| e.to_string())?;
    let (best, _) = best_pruning(&log.tree, &log).map_err(|e| e.to_string())?;
    let st = stats(&log.tree, &best, &log).map_err(|e| e.to_string())?;
    let leaves: Vec<Value> = best
        .leaves()
        .iter()
        .map(|&n| {
            let node = log.tree.node(n);
            json!({
                "level": node.level(),
                "x": node.center[0],
                "r": s.radius(node.level(), horizon),
            })
        })
        .collect();
    Ok(json!({
        "level_counts": log.tree.level_counts(),
        "leaves_per_level": best.level_sizes(),
        "rounds_per_level": st.visits,
        "leaves": leaves,
        "target": f.knots().iter().map(|(x, y)| [*x, *y]).collect::<Vec<_>>(),
    }))
}

/// The net grown over a uniform 2-d stream: every node's center, level,
/// parent and radius at the horizon.
pub fn net_json(horizon: usize, seed: u64, depth: usize) -> Result<Value, String> {
    check(horizon, 0.0)?;
    if !(1..=DEPTH).contains(&depth) {
        return Err(format!("depth must lie in 1..={DEPTH}"));
    }
    let f = TargetFunction::constant(0.5).map_err(|e| e.to_string())?;
    let xs = gen_stream(&StreamSpec::new(horizon, 2, seed), &f)
        .map_err(|e| e.to_string())?
        .examples;
    let s = RadiusSchedule::lipschitz(grid()[..depth].to_vec(), 2).map_err(|e| e.to_string())?;
    let log = run_la(&xs, &LaConfig::new(s.clone(), LossKind::Square)).map_err(|e| e.to_string())?;
    let nodes: Vec<Value> = log
        .tree
        .nodes()
        .iter()
        .map(|n| {
            json!({
                "level": n.level(),
                "birth": n.birth(),
                "x": n.center[0],
                "y": n.center[1],
                "parent": n.parent,
                "r": s.radius(n.level(), horizon),
            })
        })
        .collect();
    Ok(json!({ "nodes": nodes, "level_counts": log.tree.level_counts() }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare(preset: &str, horizon: usize, seed: u64, noise: f64) -> Result<String, JsValue> {
    to_js(compare_json(preset, horizon, seed, noise))
}

#[wasm_bindgen]
pub fn best_pruning_profile(
    preset: &str,
    horizon: usize,
    seed: u64,
    noise: f64,
) -> Result<String, JsValue> {
    to_js(pruning_json(preset, horizon, seed, noise))
}

#[wasm_bindgen]
pub fn net_snapshot(horizon: usize, seed: u64, depth: usize) -> Result<String, JsValue> {
    to_js(net_json(horizon, seed, depth))
}
