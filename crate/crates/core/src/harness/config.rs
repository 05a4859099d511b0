use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{Algorithm, DEFAULT_EXHAUSTIVE_BUDGET, DEFAULT_WMMSE_MAX_ITERS, DEFAULT_WMMSE_TOL};
use crate::channel::{ArrayGeometry, ChannelModelConfig};
use crate::error::{Error, Result};

/// Fixed-size instance used by `bench-time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub k: usize,
    pub n_s: usize,
    pub n_c: usize,
    pub geometry: ArrayGeometry,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub realizations: usize,
    pub k: usize,
    pub n_s: usize,
    pub n_c: usize,
    pub gamma: f64,
    /// SNR used by commands without an SNR axis.
    pub snr_db: f64,
    pub snr_grid_db: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub n_c_grid: Vec<usize>,
    pub n_s_grid: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub output_dir: PathBuf,
    /// Read realizations from channel files in this directory (sorted by
    /// name) instead of generating them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels_dir: Option<PathBuf>,
    /// Exhaustive search must be enabled explicitly at large scale.
    pub allow_exhaustive: bool,
    pub exhaustive_budget: u64,
    pub wmmse_max_iters: usize,
    pub wmmse_tol: f64,
    pub channel: ChannelModelConfig,
    pub bench: BenchConfig,
}

fn gamma_sweep() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
}

impl ExperimentConfig {
    /// 4x4 transmit array, 2x2 receivers, three users: `N_ex = 216`.
    pub fn desk() -> Self {
        Self {
            seed: 0,
            realizations: 1000,
            k: 3,
            n_s: 2,
            n_c: 4,
            gamma: 0.8,
            snr_db: 10.0,
            snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            gamma_grid: gamma_sweep(),
            n_c_grid: vec![1, 2, 3, 4],
            n_s_grid: vec![1, 2, 3],
            algorithms: vec![
                Algorithm::Exhaustive,
                Algorithm::Iosvb,
                Algorithm::Mrt,
                Algorithm::Bd,
                Algorithm::Wmmse,
            ],
            output_dir: PathBuf::from("out"),
            channels_dir: None,
            allow_exhaustive: true,
            exhaustive_budget: DEFAULT_EXHAUSTIVE_BUDGET,
            wmmse_max_iters: DEFAULT_WMMSE_MAX_ITERS,
            wmmse_tol: DEFAULT_WMMSE_TOL,
            channel: ChannelModelConfig::clustered(ArrayGeometry::new((4, 4), (2, 2))),
            bench: BenchConfig {
                k: 5,
                n_s: 3,
                n_c: 5,
                geometry: ArrayGeometry::new((4, 4), (3, 3)),
                runs: 5,
            },
        }
    }

    /// 12x12 transmit array, 6x6 receivers, five users.
    pub fn full_scale() -> Self {
        let geometry = ArrayGeometry::new((12, 12), (6, 6));
        Self {
            realizations: 100,
            k: 5,
            n_s: 3,
            n_c: 5,
            n_c_grid: (2..=10).collect(),
            n_s_grid: vec![2, 3, 4, 5],
            allow_exhaustive: false,
            channel: ChannelModelConfig::clustered(geometry),
            bench: BenchConfig {
                k: 5,
                n_s: 3,
                n_c: 5,
                geometry,
                runs: 5,
            },
            ..Self::desk()
        }
    }

    /// Preset, overlaid with a TOML file, overlaid with `key=value`
    /// assignments (dotted keys, TOML values).
    pub fn resolve(paper_scale: bool, file: Option<&Path>, sets: &[String]) -> Result<Self> {
        let base = if paper_scale { Self::full_scale() } else { Self::desk() };
        let mut value = toml::Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let overlay: toml::Table =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge(&mut value, toml::Value::Table(overlay));
        }
        for assignment in sets {
            apply_assignment(&mut value, assignment)?;
        }
        let cfg: Self = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
            return bad(format!("gamma_grid value {g} outside (0, 1)"));
        }
        if self.snr_grid_db.is_empty()
            || self.gamma_grid.is_empty()
            || self.n_c_grid.is_empty()
            || self.n_s_grid.is_empty()
            || self.algorithms.is_empty()
        {
            return bad("snr_grid_db, gamma_grid, n_c_grid, n_s_grid and algorithms must be nonempty".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) || !self.snr_db.is_finite() {
            return bad("SNR values must be finite".into());
        }
        if self.n_s == 0 || self.n_s > self.n_c {
            return bad(format!("need 1 <= n_s <= n_c, got n_s={} n_c={}", self.n_s, self.n_c));
        }
        if self.n_c_grid.contains(&0) || self.n_s_grid.contains(&0) {
            return bad("grid entries must be positive".into());
        }
        if self.bench.runs == 0 || self.bench.k == 0 || self.bench.n_s == 0 || self.bench.n_s > self.bench.n_c {
            return bad("bench needs runs >= 1, k >= 1 and 1 <= n_s <= n_c".into());
        }
        if self.wmmse_max_iters == 0 || self.wmmse_tol.is_nan() || self.wmmse_tol <= 0.0 {
            return bad("wmmse_max_iters must be >= 1 and wmmse_tol positive".into());
        }
        self.channel.validate()?;
        self.bench.geometry.validate()?;
        Ok(())
    }

    /// Fails when exhaustive search is requested but not enabled.
    pub fn check_exhaustive_allowed(&self, algorithms: &[Algorithm]) -> Result<()> {
        if algorithms.contains(&Algorithm::Exhaustive) && !self.allow_exhaustive {
            return Err(Error::Config(
                "exhaustive search is disabled for this configuration; pass --allow-exhaustive or set allow_exhaustive = true"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Seed of realization `idx`.
    pub fn realization_seed(&self, idx: usize) -> u64 {
        self.seed.wrapping_add(idx as u64)
    }
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn apply_assignment(value: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
    let key = key.trim();
    // Parse the value as TOML; bare words fall back to strings.
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let mut overlay = parsed;
    for part in key.rsplit('.') {
        if part.is_empty() {
            return Err(Error::Config(format!("empty key segment in {key:?}")));
        }
        let mut t = toml::Table::new();
        t.insert(part.to_string(), overlay);
        overlay = toml::Value::Table(t);
    }
    merge(value, overlay);
    Ok(())
}
