//! Browser front end: three small experiments on desk-scale channels,
//! each returning JSON for the page to plot.

use iosvb::baselines::Algorithm;
use iosvb::harness::{cmd_se_vs_snr, cmd_sweep_gamma, cmd_verify_bound, ExperimentConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_REALIZATIONS: usize = 2000;

fn config(seed: u32, realizations: u32, clusters: u32) -> Result<ExperimentConfig, String> {
    let realizations = realizations as usize;
    if realizations == 0 || realizations > MAX_REALIZATIONS {
        return Err(format!("realizations must be between 1 and {MAX_REALIZATIONS}"));
    }
    let mut cfg = ExperimentConfig {
        seed: seed as u64,
        realizations,
        ..ExperimentConfig::desk()
    };
    cfg.channel.clusters = clusters as usize;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Scatter {
    delta: Vec<f64>,
    bound: Vec<f64>,
    pearson_r: Option<f64>,
}

pub fn bound_scatter_json(seed: u32, realizations: u32, gamma: f64, clusters: u32) -> Result<String, String> {
    let cfg = ExperimentConfig {
        gamma,
        ..config(seed, realizations, clusters)?
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let r = cmd_verify_bound(&cfg).map_err(|e| e.to_string())?;
    let out = Scatter {
        delta: r.rows.iter().map(|b| b.delta).collect(),
        bound: r.rows.iter().map(|b| b.bound).collect(),
        pearson_r: r.pearson_r,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct GammaSweep {
    gamma: Vec<f64>,
    mean_se: Vec<f64>,
    mean_iterations: Vec<f64>,
}

pub fn gamma_sweep_json(seed: u32, realizations: u32, n_c: u32) -> Result<String, String> {
    let mut cfg = config(seed, realizations, 3)?;
    cfg.n_c = n_c as usize;
    cfg.validate().map_err(|e| e.to_string())?;
    let r = cmd_sweep_gamma(&cfg).map_err(|e| e.to_string())?;
    let out = GammaSweep {
        gamma: r.iter().map(|x| x.gamma.unwrap_or_default()).collect(),
        mean_se: r.iter().map(|x| x.mean_se).collect(),
        mean_iterations: r.iter().map(|x| x.mean_iterations.unwrap_or_default()).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Series {
    algorithm: String,
    mean_se: Vec<f64>,
}

#[derive(Serialize)]
struct SnrSweep {
    snr_db: Vec<f64>,
    series: Vec<Series>,
}

/// `algorithms` is a comma-separated tag list, e.g. `"iosvb,mrt,bd"`.
pub fn se_vs_snr_json(seed: u32, realizations: u32, gamma: f64, algorithms: &str) -> Result<String, String> {
    let algos = algorithms
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Algorithm>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = ExperimentConfig {
        gamma,
        algorithms: algos.clone(),
        snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        ..config(seed, realizations, 3)?
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let r = cmd_se_vs_snr(&cfg).map_err(|e| e.to_string())?;
    let series = algos
        .iter()
        .map(|a| Series {
            algorithm: a.to_string(),
            mean_se: r.iter().filter(|x| x.algorithm == *a).map(|x| x.mean_se).collect(),
        })
        .collect();
    serde_json::to_string(&SnrSweep {
        snr_db: cfg.snr_grid_db,
        series,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn bound_scatter(seed: u32, realizations: u32, gamma: f64, clusters: u32) -> Result<String, JsValue> {
    bound_scatter_json(seed, realizations, gamma, clusters).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn gamma_sweep(seed: u32, realizations: u32, n_c: u32) -> Result<String, JsValue> {
    gamma_sweep_json(seed, realizations, n_c).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn se_vs_snr(seed: u32, realizations: u32, gamma: f64, algorithms: &str) -> Result<String, JsValue> {
    se_vs_snr_json(seed, realizations, gamma, algorithms).map_err(|e| JsValue::from_str(&e))
}
