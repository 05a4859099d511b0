//! Monte-Carlo experiment drivers. Each command computes a report in
//! memory; [`CommandReport::write`] serializes it to CSV under the output
//! directory. Realization `i` uses seed `seed + i`; realizations may run in
//! parallel but every reduction happens in index order.

mod config;
mod csvout;

pub use config::{BenchConfig, ExperimentConfig};
pub use csvout::{fmt_opt, fmt_sig12, Table};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{run, Algorithm, AlgoParams, Stopwatch};
use crate::beamcore::{
    build_candidates, correlation_matrix, interference_upper_bound, rebuild_candidates, selection_count, submatrix,
    IosvbSearch,
};
use crate::channel::{generate, load, save, ChannelModelConfig, ChannelRealization};
use crate::error::{Error, Result};
use crate::metrics::{sum_rate_value, total_interference, LinkBudget};
use crate::numkernel::{median, pearson};

/// Tolerance for the per-realization `Δ ≤ f²` assertion.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    VerifyBound,
    SweepNcGamma,
    SweepGamma,
    SeVsSnr,
    TableNc,
    BenchTime,
    GenChannels,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyBound,
        Command::SweepNcGamma,
        Command::SweepGamma,
        Command::SeVsSnr,
        Command::TableNc,
        Command::BenchTime,
        Command::GenChannels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyBound => "verify-bound",
            Command::SweepNcGamma => "sweep-nc-gamma",
            Command::SweepGamma => "sweep-gamma",
            Command::SeVsSnr => "se-vs-snr",
            Command::TableNc => "table-nc",
            Command::BenchTime => "bench-time",
            Command::GenChannels => "gen-channels",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown command {s:?}")))
    }
}

/// Where realizations come from: the configured generator or a directory
/// of channel files.
#[derive(Clone, Debug)]
pub enum ChannelSource {
    Generate { model: ChannelModelConfig, k: usize },
    Files(Vec<PathBuf>),
}

impl ChannelSource {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        match &cfg.channels_dir {
            None => Ok(Self::Generate {
                model: cfg.channel.clone(),
                k: cfg.k,
            }),
            Some(dir) => {
                let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "bin"))
                    .collect();
                files.sort();
                if files.len() < cfg.realizations {
                    return Err(Error::Config(format!(
                        "{} holds {} channel files but {} realizations were requested",
                        dir.display(),
                        files.len(),
                        cfg.realizations
                    )));
                }
                Ok(Self::Files(files))
            }
        }
    }

    pub fn get(&self, cfg: &ExperimentConfig, idx: usize) -> Result<ChannelRealization> {
        match self {
            Self::Generate { model, k } => generate(model, *k, cfg.realization_seed(idx)),
            Self::Files(files) => {
                let ch = load(&files[idx])?;
                if ch.num_users() != cfg.k {
                    return Err(Error::Config(format!(
                        "{} holds {} users but k = {}",
                        files[idx].display(),
                        ch.num_users(),
                        cfg.k
                    )));
                }
                Ok(ch)
            }
        }
    }
}

/// Maps `f` over `0..n`, in parallel when enabled; output is in index order.
fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn mean_in_order(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}

/// One aggregated point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub algorithm: Algorithm,
    pub n_s: usize,
    pub n_c: Option<usize>,
    pub gamma: Option<f64>,
    pub snr_db: f64,
    /// Mean sum spectral efficiency, bits/s/Hz.
    pub mean_se: f64,
    pub mean_iterations: Option<f64>,
    /// Realizations on which the algorithm raised its flag.
    pub flagged: usize,
    pub mean_wall_time: f64,
}

const SWEEP_HEADER: [&str; 9] = [
    "algorithm",
    "n_s",
    "n_c",
    "gamma",
    "snr_db",
    "mean_se",
    "mean_iterations",
    "flagged",
    "mean_wall_time",
];

fn sweep_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(SWEEP_HEADER.to_vec());
    for r in records {
        t.push(vec![
            r.algorithm.to_string(),
            r.n_s.to_string(),
            r.n_c.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(r.gamma),
            fmt_sig12(r.snr_db),
            fmt_sig12(r.mean_se),
            fmt_opt(r.mean_iterations),
            r.flagged.to_string(),
            fmt_sig12(r.mean_wall_time),
        ]);
    }
    t
}

/// Per-point result of one IOSVB run inside a sweep.
#[derive(Clone, Copy, Debug)]
struct Point {
    se: f64,
    iterations: u64,
    flagged: bool,
    time: f64,
}

fn aggregate_points(per_real: &[Vec<Point>], j: usize) -> (f64, f64, usize, f64) {
    (
        mean_in_order(per_real.iter().map(|v| v[j].se)),
        mean_in_order(per_real.iter().map(|v| v[j].iterations as f64)),
        per_real.iter().filter(|v| v[j].flagged).count(),
        mean_in_order(per_real.iter().map(|v| v[j].time)),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub realization: usize,
    pub delta: f64,
    pub bound: f64,
    pub objective_f: f64,
    pub iterations: u64,
    pub constraint_satisfied: bool,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// `None` when the correlation is undefined (e.g. a single user, where
    /// every `Δ` is zero).
    pub pearson_r: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TableNcRow {
    pub n_s: usize,
    pub required_n_c: usize,
    pub max_n_c: usize,
    pub se_required: f64,
    pub se_max: f64,
}

#[derive(Clone, Debug)]
pub struct TableNcReport {
    pub rows: Vec<TableNcRow>,
    pub curve: Vec<SweepRecord>,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub times: Vec<f64>,
    pub median_time: f64,
    pub sum_rate: f64,
    pub iterations: u64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub k: usize,
    pub n_s: usize,
    pub n_c: usize,
    pub n_ex: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn median(&self, algo: Algorithm) -> Option<f64> {
        self.rows.iter().find(|r| r.algorithm == algo).map(|r| r.median_time)
    }

    /// Median exhaustive time over median IOSVB time.
    pub fn speedup(&self) -> Option<f64> {
        Some(self.median(Algorithm::Exhaustive)? / self.median(Algorithm::Iosvb)?)
    }
}

#[derive(Clone, Debug)]
pub enum CommandReport {
    VerifyBound(BoundReport),
    SweepNcGamma(Vec<SweepRecord>),
    SweepGamma(Vec<SweepRecord>),
    SeVsSnr(Vec<SweepRecord>),
    TableNc(TableNcReport),
    BenchTime(BenchReport),
    GenChannels(Vec<PathBuf>),
}

impl CommandReport {
    /// CSV files produced by this report, as `(file name, table)`.
    pub fn tables(&self) -> Vec<(&'static str, Table)> {
        match self {
            Self::VerifyBound(r) => {
                let mut rows = Table::new(vec![
                    "realization",
                    "delta",
                    "bound",
                    "objective_f",
                    "iterations",
                    "constraint_satisfied",
                ]);
                for b in &r.rows {
                    rows.push(vec![
                        b.realization.to_string(),
                        fmt_sig12(b.delta),
                        fmt_sig12(b.bound),
                        fmt_sig12(b.objective_f),
                        b.iterations.to_string(),
                        b.constraint_satisfied.to_string(),
                    ]);
                }
                let mut summary = Table::new(vec!["realizations", "pearson_r", "max_delta_over_bound"]);
                let worst = r
                    .rows
                    .iter()
                    .filter(|b| b.bound > 0.0)
                    .map(|b| b.delta / b.bound)
                    .fold(0.0, f64::max);
                summary.push(vec![
                    r.rows.len().to_string(),
                    r.pearson_r.map(fmt_sig12).unwrap_or_else(|| "degenerate".into()),
                    fmt_sig12(worst),
                ]);
                vec![("verify_bound.csv", rows), ("verify_bound_summary.csv", summary)]
            }
            Self::SweepNcGamma(r) => vec![("sweep_nc_gamma.csv", sweep_table(r))],
            Self::SweepGamma(r) => vec![("sweep_gamma.csv", sweep_table(r))],
            Self::SeVsSnr(r) => vec![("se_vs_snr.csv", sweep_table(r))],
            Self::TableNc(r) => {
                let mut t = Table::new(vec!["n_s", "required_n_c", "max_n_c", "se_required", "se_max"]);
                for row in &r.rows {
                    t.push(vec![
                        row.n_s.to_string(),
                        row.required_n_c.to_string(),
                        row.max_n_c.to_string(),
                        fmt_sig12(row.se_required),
                        fmt_sig12(row.se_max),
                    ]);
                }
                vec![("table_nc.csv", t), ("table_nc_sweep.csv", sweep_table(&r.curve))]
            }
            Self::BenchTime(r) => {
                let mut t = Table::new(vec![
                    "algorithm",
                    "k",
                    "n_s",
                    "n_c",
                    "n_ex",
                    "runs",
                    "sum_rate",
                    "iterations",
                    "median_time",
                    "time_ratio_vs_iosvb",
                ]);
                let base = r.median(Algorithm::Iosvb);
                for row in &r.rows {
                    t.push(vec![
                        row.algorithm.to_string(),
                        r.k.to_string(),
                        r.n_s.to_string(),
                        r.n_c.to_string(),
                        r.n_ex.to_string(),
                        row.times.len().to_string(),
                        fmt_sig12(row.sum_rate),
                        row.iterations.to_string(),
                        fmt_sig12(row.median_time),
                        fmt_opt(base.map(|b| row.median_time / b)),
                    ]);
                }
                vec![("bench_time.csv", t)]
            }
            Self::GenChannels(_) => Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        match self {
            Self::GenChannels(paths) => Ok(paths.clone()),
            _ => self.tables().iter().map(|(name, t)| t.write(&dir.join(name))).collect(),
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        match self {
            Self::VerifyBound(r) => format!(
                "{} realizations, delta <= bound on all, pearson r = {}",
                r.rows.len(),
                r.pearson_r.map(fmt_sig12).unwrap_or_else(|| "degenerate".into())
            ),
            Self::SweepNcGamma(r) | Self::SweepGamma(r) | Self::SeVsSnr(r) => format!("{} sweep points", r.len()),
            Self::TableNc(r) => r
                .rows
                .iter()
                .map(|row| format!("N_s={} -> N_c={}", row.n_s, row.required_n_c))
                .collect::<Vec<_>>()
                .join(", "),
            Self::BenchTime(r) => match r.speedup() {
                Some(s) => format!("N_ex = {}, exhaustive/iosvb median time ratio = {:.1}", r.n_ex, s),
                None => format!("N_ex = {}", r.n_ex),
            },
            Self::GenChannels(p) => format!("wrote {} channel files", p.len()),
        }
    }
}

pub fn run_command(cmd: Command, cfg: &ExperimentConfig) -> Result<CommandReport> {
    Ok(match cmd {
        Command::VerifyBound => CommandReport::VerifyBound(cmd_verify_bound(cfg)?),
        Command::SweepNcGamma => CommandReport::SweepNcGamma(cmd_sweep_nc_gamma(cfg)?),
        Command::SweepGamma => CommandReport::SweepGamma(cmd_sweep_gamma(cfg)?),
        Command::SeVsSnr => CommandReport::SeVsSnr(cmd_se_vs_snr(cfg)?),
        Command::TableNc => CommandReport::TableNc(cmd_table_nc(cfg)?),
        Command::BenchTime => CommandReport::BenchTime(cmd_bench_time(cfg)?),
        Command::GenChannels => CommandReport::GenChannels(gen_channels(cfg)?),
    })
}

/// Interference `Δ` against its bound `f²` for the IOSVB solution of every
/// realization, with their Pearson correlation.
pub fn cmd_verify_bound(cfg: &ExperimentConfig) -> Result<BoundReport> {
    let src = ChannelSource::from_config(cfg)?;
    let rows = par_map(cfg.realizations, |i| {
        let ch = src.get(cfg, i)?;
        let cs = build_candidates(&ch, cfg.n_c, cfg.n_s)?;
        let sol = IosvbSearch::new(&cs).run(cfg.gamma)?;
        let lambda = submatrix(&correlation_matrix(&cs), &sol.selection)?;
        Ok(BoundRow {
            realization: i,
            delta: total_interference(&ch, &sol.beams),
            bound: interference_upper_bound(&lambda),
            objective_f: sol.objective_f,
            iterations: sol.iterations_used,
            constraint_satisfied: sol.constraint_satisfied,
        })
    })?;
    if let Some(b) = rows.iter().find(|b| b.delta > b.bound + BOUND_SLACK) {
        return Err(Error::Assertion(format!(
            "realization {}: interference {} exceeds bound {}",
            b.realization, b.delta, b.bound
        )));
    }
    let deltas: Vec<f64> = rows.iter().map(|b| b.delta).collect();
    let bounds: Vec<f64> = rows.iter().map(|b| b.bound).collect();
    let pearson_r = match pearson(&deltas, &bounds) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundReport { rows, pearson_r })
}

/// Candidate counts usable with `n_s` streams, ascending and deduplicated.
fn usable_n_c(grid: &[usize], n_s: usize) -> Vec<usize> {
    let mut v: Vec<usize> = grid.iter().copied().filter(|&n| n >= n_s).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// IOSVB at every `(N_c, γ)` for one realization, SVDs computed once.
fn iosvb_grid(
    ch: &ChannelRealization,
    n_s: usize,
    n_cs: &[usize],
    gammas: &[f64],
    lb: &LinkBudget,
) -> Result<Vec<Point>> {
    let full = build_candidates(ch, *n_cs.last().expect("nonempty grid"), n_s)?;
    let mut out = Vec::with_capacity(n_cs.len() * gammas.len());
    for &n_c in n_cs {
        let cs = rebuild_candidates(&full, n_c, n_s)?;
        let search = IosvbSearch::new(&cs);
        for &g in gammas {
            let clock = Stopwatch::start();
            let sol = search.run(g)?;
            let time = clock.seconds();
            out.push(Point {
                se: sum_rate_value(ch, &sol.beams, lb)?,
                iterations: sol.iterations_used,
                flagged: !sol.constraint_satisfied,
                time,
            });
        }
    }
    Ok(out)
}

/// Mean sum SE of IOSVB over the `(N_c, γ)` grid at the reference SNR.
pub fn cmd_sweep_nc_gamma(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let n_cs = usable_n_c(&cfg.n_c_grid, cfg.n_s);
    if n_cs.is_empty() {
        return Err(Error::Config(format!("no n_c_grid value is >= n_s = {}", cfg.n_s)));
    }
    let src = ChannelSource::from_config(cfg)?;
    let lb = LinkBudget::from_snr_db(cfg.snr_db);
    let per_real = par_map(cfg.realizations, |i| {
        iosvb_grid(&src.get(cfg, i)?, cfg.n_s, &n_cs, &cfg.gamma_grid, &lb)
    })?;
    let mut records = Vec::new();
    for (a, &n_c) in n_cs.iter().enumerate() {
        for (b, &g) in cfg.gamma_grid.iter().enumerate() {
            let (se, it, flagged, time) = aggregate_points(&per_real, a * cfg.gamma_grid.len() + b);
            records.push(SweepRecord {
                algorithm: Algorithm::Iosvb,
                n_s: cfg.n_s,
                n_c: Some(n_c),
                gamma: Some(g),
                snr_db: cfg.snr_db,
                mean_se: se,
                mean_iterations: Some(it),
                flagged,
                mean_wall_time: time,
            });
        }
    }
    Ok(records)
}

/// Mean SE and mean objective evaluations versus `γ`. Fails if, for any
/// realization, the evaluation count increases with `γ`.
pub fn cmd_sweep_gamma(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let src = ChannelSource::from_config(cfg)?;
    let lb = LinkBudget::from_snr_db(cfg.snr_db);
    let mut order: Vec<usize> = (0..cfg.gamma_grid.len()).collect();
    order.sort_by(|&a, &b| cfg.gamma_grid[a].total_cmp(&cfg.gamma_grid[b]));
    let per_real = par_map(cfg.realizations, |i| {
        let pts = iosvb_grid(&src.get(cfg, i)?, cfg.n_s, &[cfg.n_c], &cfg.gamma_grid, &lb)?;
        for w in order.windows(2) {
            if pts[w[1]].iterations > pts[w[0]].iterations {
                return Err(Error::Assertion(format!(
                    "realization {i}: iterations rose from {} at gamma {} to {} at gamma {}",
                    pts[w[0]].iterations, cfg.gamma_grid[w[0]], pts[w[1]].iterations, cfg.gamma_grid[w[1]]
                )));
            }
        }
        Ok(pts)
    })?;
    Ok(cfg
        .gamma_grid
        .iter()
        .enumerate()
        .map(|(j, &g)| {
            let (se, it, flagged, time) = aggregate_points(&per_real, j);
            SweepRecord {
                algorithm: Algorithm::Iosvb,
                n_s: cfg.n_s,
                n_c: Some(cfg.n_c),
                gamma: Some(g),
                snr_db: cfg.snr_db,
                mean_se: se,
                mean_iterations: Some(it),
                flagged,
                mean_wall_time: time,
            }
        })
        .collect())
}

fn algo_params(cfg: &ExperimentConfig, n_s: usize, snr_db: f64) -> AlgoParams {
    AlgoParams {
        exhaustive_budget: cfg.exhaustive_budget,
        wmmse_max_iters: cfg.wmmse_max_iters,
        wmmse_tol: cfg.wmmse_tol,
        ..AlgoParams::new(n_s, cfg.n_c, cfg.gamma, LinkBudget::from_snr_db(snr_db))
    }
}

/// Mean sum SE of every configured algorithm over the SNR grid. Fails if
/// exhaustive search is beaten by IOSVB on any realization.
pub fn cmd_se_vs_snr(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.check_exhaustive_allowed(&cfg.algorithms)?;
    let src = ChannelSource::from_config(cfg)?;
    let algos = &cfg.algorithms;
    let snrs = &cfg.snr_grid_db;
    // per_real[i][a][s]
    let per_real = par_map(cfg.realizations, |i| {
        let ch = src.get(cfg, i)?;
        let mut by_algo = Vec::with_capacity(algos.len());
        for &algo in algos {
            let snr_dependent = matches!(algo, Algorithm::Exhaustive | Algorithm::Wmmse);
            let mut fixed = None;
            let mut pts = Vec::with_capacity(snrs.len());
            for &snr in snrs {
                let p = algo_params(cfg, cfg.n_s, snr);
                let res = if snr_dependent {
                    run(algo, &ch, &p)?
                } else {
                    match &fixed {
                        Some(r) => Clone::clone(r),
                        None => fixed.insert(run(algo, &ch, &p)?).clone(),
                    }
                };
                pts.push(Point {
                    se: sum_rate_value(&ch, &res.beams, &p.link)?,
                    iterations: res.iterations,
                    flagged: res.flagged,
                    time: res.wall_time,
                });
            }
            by_algo.push(pts);
        }
        let pos = |a: Algorithm| algos.iter().position(|&x| x == a);
        if let (Some(e), Some(o)) = (pos(Algorithm::Exhaustive), pos(Algorithm::Iosvb)) {
            for (s, &snr) in snrs.iter().enumerate() {
                if by_algo[e][s].se < by_algo[o][s].se {
                    return Err(Error::Assertion(format!(
                        "realization {i}, {snr} dB: exhaustive {} below iosvb {}",
                        by_algo[e][s].se, by_algo[o][s].se
                    )));
                }
            }
        }
        Ok(by_algo)
    })?;
    let mut records = Vec::new();
    for (a, &algo) in algos.iter().enumerate() {
        let selection_based = matches!(algo, Algorithm::Exhaustive | Algorithm::Iosvb);
        for (s, &snr) in snrs.iter().enumerate() {
            let col: Vec<Point> = per_real.iter().map(|r| r[a][s]).collect();
            records.push(SweepRecord {
                algorithm: algo,
                n_s: cfg.n_s,
                n_c: selection_based.then_some(cfg.n_c),
                gamma: (algo == Algorithm::Iosvb).then_some(cfg.gamma),
                snr_db: snr,
                mean_se: mean_in_order(col.iter().map(|p| p.se)),
                mean_iterations: matches!(algo, Algorithm::Iosvb | Algorithm::Wmmse)
                    .then(|| mean_in_order(col.iter().map(|p| p.iterations as f64))),
                flagged: col.iter().filter(|p| p.flagged).count(),
                mean_wall_time: mean_in_order(col.iter().map(|p| p.time)),
            });
        }
    }
    Ok(records)
}

/// For each `N_s`, the smallest `N_c` whose mean IOSVB SE reaches 95% of
/// the SE at the largest usable `N_c`.
pub fn cmd_table_nc(cfg: &ExperimentConfig) -> Result<TableNcReport> {
    let src = ChannelSource::from_config(cfg)?;
    let lb = LinkBudget::from_snr_db(cfg.snr_db);
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for &n_s in &cfg.n_s_grid {
        let n_cs = usable_n_c(&cfg.n_c_grid, n_s);
        if n_cs.is_empty() {
            return Err(Error::Config(format!("no n_c_grid value is >= n_s = {n_s}")));
        }
        let per_real = par_map(cfg.realizations, |i| {
            iosvb_grid(&src.get(cfg, i)?, n_s, &n_cs, &[cfg.gamma], &lb)
        })?;
        let means: Vec<f64> = (0..n_cs.len()).map(|j| aggregate_points(&per_real, j).0).collect();
        let se_max = *means.last().expect("nonempty");
        let j = means
            .iter()
            .position(|&m| m >= 0.95 * se_max)
            .expect("the last point always qualifies");
        rows.push(TableNcRow {
            n_s,
            required_n_c: n_cs[j],
            max_n_c: *n_cs.last().expect("nonempty"),
            se_required: means[j],
            se_max,
        });
        for (j, &n_c) in n_cs.iter().enumerate() {
            let (se, it, flagged, time) = aggregate_points(&per_real, j);
            curve.push(SweepRecord {
                algorithm: Algorithm::Iosvb,
                n_s,
                n_c: Some(n_c),
                gamma: Some(cfg.gamma),
                snr_db: cfg.snr_db,
                mean_se: se,
                mean_iterations: Some(it),
                flagged,
                mean_wall_time: time,
            });
        }
    }
    Ok(TableNcReport { rows, curve })
}

/// Median-of-`runs` wall time per algorithm on one fixed instance.
pub fn cmd_bench_time(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.check_exhaustive_allowed(&cfg.algorithms)?;
    let b = &cfg.bench;
    let model = ChannelModelConfig {
        geometry: b.geometry,
        ..cfg.channel.clone()
    };
    let ch = generate(&model, b.k, cfg.seed)?;
    let n_ex = selection_count(b.n_c, b.n_s, b.k)?;
    let p = AlgoParams {
        n_c: b.n_c,
        ..algo_params(cfg, b.n_s, cfg.snr_db)
    };
    let mut rows = Vec::new();
    for &algo in &cfg.algorithms {
        let mut times = Vec::with_capacity(b.runs);
        let mut last = None;
        for _ in 0..b.runs {
            let res = run(algo, &ch, &p)?;
            times.push(res.wall_time);
            last = Some(res);
        }
        let res = last.expect("runs >= 1");
        rows.push(BenchRow {
            algorithm: algo,
            median_time: median(&times),
            times,
            sum_rate: sum_rate_value(&ch, &res.beams, &p.link)?,
            iterations: res.iterations,
        });
    }
    Ok(BenchReport {
        k: b.k,
        n_s: b.n_s,
        n_c: b.n_c,
        n_ex,
        rows,
    })
}

/// Writes `channel_NNNNN.bin` for each realization into the output
/// directory.
pub fn gen_channels(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let model = &cfg.channel;
    par_map(cfg.realizations, |i| {
        let ch = generate(model, cfg.k, cfg.realization_seed(i))?;
        let path = cfg.output_dir.join(format!("channel_{i:05}.bin"));
        save(&ch, &path)?;
        Ok(path)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamcore::iosvb;

    fn small(realizations: usize) -> ExperimentConfig {
        ExperimentConfig {
            realizations,
            ..ExperimentConfig::desk()
        }
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("sweep".parse::<Command>().is_err());
    }

    #[test]
    fn verify_bound_holds_and_single_user_is_degenerate() {
        let r = cmd_verify_bound(&small(40)).unwrap();
        assert_eq!(r.rows.len(), 40);
        assert!(r.pearson_r.unwrap() > 0.5);
        let one = ExperimentConfig { k: 1, ..small(10) };
        let r = cmd_verify_bound(&one).unwrap();
        assert!(r.rows.iter().all(|b| b.delta == 0.0));
        assert!(r.pearson_r.is_none());
        let s = CommandReport::VerifyBound(r).tables()[1].1.to_csv_string().unwrap();
        assert!(s.contains("degenerate"));
    }

    #[test]
    fn sweep_gamma_endpoints() {
        let cfg = ExperimentConfig {
            gamma_grid: vec![1e-9, 0.5, 1.0 - 1e-12],
            ..small(20)
        };
        let r = cmd_sweep_gamma(&cfg).unwrap();
        assert_eq!(r[0].mean_iterations, Some(216.0));
        assert_eq!(r[2].mean_iterations, Some(1.0));
    }

    #[test]
    fn sweep_nc_gamma_with_n_c_equal_n_s_is_the_top_selection() {
        let cfg = ExperimentConfig {
            n_c_grid: vec![2, 3],
            gamma_grid: vec![0.5, 0.8],
            ..small(10)
        };
        let r = cmd_sweep_nc_gamma(&cfg).unwrap();
        assert_eq!(r.len(), 4);
        let lb = LinkBudget::from_snr_db(cfg.snr_db);
        let expect = mean_in_order((0..10).map(|i| {
            let ch = generate(&cfg.channel, 3, i as u64).unwrap();
            let cs = build_candidates(&ch, 2, 2).unwrap();
            let b = crate::beamcore::extract_beamformers(&cs, &cs.top_selection());
            sum_rate_value(&ch, &b, &lb).unwrap()
        }));
        assert_eq!(r[0].n_c, Some(2));
        assert!((r[0].mean_se - expect).abs() <= 1e-12 * expect);
        assert_eq!(r[0].mean_iterations, Some(1.0));
    }

    #[test]
    fn se_vs_snr_runs_every_algorithm() {
        let cfg = ExperimentConfig {
            snr_grid_db: vec![0.0, 20.0],
            ..small(6)
        };
        let r = cmd_se_vs_snr(&cfg).unwrap();
        assert_eq!(r.len(), 10);
        let get = |a: Algorithm, s: f64| r.iter().find(|x| x.algorithm == a && x.snr_db == s).unwrap().mean_se;
        for s in [0.0, 20.0] {
            assert!(get(Algorithm::Exhaustive, s) >= get(Algorithm::Iosvb, s));
        }
        assert!(get(Algorithm::Bd, 20.0) > get(Algorithm::Bd, 0.0));
    }

    #[test]
    fn paper_scale_gates_exhaustive() {
        let cfg = ExperimentConfig {
            realizations: 1,
            ..ExperimentConfig::full_scale()
        };
        assert!(matches!(cmd_se_vs_snr(&cfg), Err(Error::Config(_))));
        assert!(matches!(cmd_bench_time(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn table_nc_single_point_grid() {
        let cfg = ExperimentConfig {
            n_c_grid: vec![3],
            n_s_grid: vec![2],
            ..small(5)
        };
        let r = cmd_table_nc(&cfg).unwrap();
        assert_eq!(r.rows[0].required_n_c, 3);
        assert_eq!(r.curve.len(), 1);
    }

    #[test]
    fn channels_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let gen_cfg = ExperimentConfig {
            output_dir: dir.path().to_path_buf(),
            ..small(4)
        };
        let paths = gen_channels(&gen_cfg).unwrap();
        assert_eq!(paths.len(), 4);
        let from_files = ExperimentConfig {
            channels_dir: Some(dir.path().to_path_buf()),
            ..small(4)
        };
        let a = cmd_verify_bound(&gen_cfg).unwrap();
        let b = cmd_verify_bound(&from_files).unwrap();
        assert_eq!(a.rows, b.rows);
        let too_many = ExperimentConfig {
            channels_dir: Some(dir.path().to_path_buf()),
            ..small(5)
        };
        assert!(matches!(cmd_verify_bound(&too_many), Err(Error::Config(_))));
    }

    #[test]
    fn bench_reports_ratio() {
        let mut cfg = small(1);
        cfg.algorithms = vec![Algorithm::Iosvb, Algorithm::Exhaustive];
        cfg.bench = BenchConfig {
            k: 3,
            n_s: 2,
            n_c: 4,
            geometry: cfg.channel.geometry,
            runs: 3,
        };
        let r = cmd_bench_time(&cfg).unwrap();
        assert_eq!(r.n_ex, 216);
        assert!(r.speedup().unwrap() > 0.0);
        let ch = generate(&cfg.channel, 3, 0).unwrap();
        let expect = sum_rate_value(&ch, &iosvb(&ch, 2, 4, 0.8).unwrap().beams, &LinkBudget::from_snr_db(10.0));
        assert_eq!(r.rows[0].sum_rate, expect.unwrap());
    }

    #[test]
    fn output_is_independent_of_run() {
        let cfg = ExperimentConfig {
            gamma_grid: vec![0.5, 0.9],
            ..small(12)
        };
        let a = CommandReport::SweepGamma(cmd_sweep_gamma(&cfg).unwrap());
        let b = CommandReport::SweepGamma(cmd_sweep_gamma(&cfg).unwrap());
        let strip = |r: &CommandReport| {
            let mut t = r.tables()[0].1.clone();
            t.header.pop();
            for row in &mut t.rows {
                row.pop();
            }
            t.to_csv_string().unwrap()
        };
        assert_eq!(strip(&a), strip(&b));
    }
}
