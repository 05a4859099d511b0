//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities, then asserts. Tests hold a shared lock so wall-time
//! limits and the timing benchmark are not skewed by each other.

use std::path::Path;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use iosvb::baselines::{exhaustive_search, mrt, Algorithm};
use iosvb::beamcore::{
    build_candidates, correlation_matrix, enumerate_selections, extract_beamformers, interference_upper_bound,
    iosvb_with_candidates, selection_count, submatrix, CandidateSet, IndexSelection, IosvbSearch,
};
use iosvb::channel::{generate, ArrayGeometry, ChannelModelConfig, ChannelRealization};
use iosvb::harness::{cmd_bench_time, cmd_table_nc, cmd_verify_bound, run_command, Command, ExperimentConfig};
use iosvb::metrics::{sum_rate_value, total_interference, verify_corollary1, verify_lemma1, verify_lemma2, LinkBudget};
use iosvb::numkernel::{frobenius_norm, mean, svd};

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, pass: bool, detail: String, started: Instant) {
    println!(
        "ACCEPTANCE {id:>2} {name}: {} {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

fn desk_model() -> ChannelModelConfig {
    ExperimentConfig::desk().channel
}

fn desk(seed: u64) -> ChannelRealization {
    generate(&desk_model(), 3, seed).unwrap()
}

#[test]
fn criterion_01_bound_validity() {
    let _g = serial();
    let t = Instant::now();
    let cfg = ExperimentConfig {
        realizations: 1000,
        ..ExperimentConfig::desk()
    };
    // Fails with an assertion error if any IOSVB solution breaks the bound.
    let solutions_ok = cmd_verify_bound(&cfg).is_ok();

    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0u64;
    for seed in 0..50 {
        let ch = desk(seed);
        let cs = build_candidates(&ch, 4, 2).unwrap();
        let lc = correlation_matrix(&cs);
        for sel in enumerate_selections(4, 2, 3).unwrap() {
            let delta = total_interference(&ch, &extract_beamformers(&cs, &sel));
            let bound = interference_upper_bound(&submatrix(&lc, &sel).unwrap());
            worst = worst.max(delta - bound);
            checked += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = solutions_ok && worst <= 1e-9 && secs <= 120.0;
    report(
        1,
        "bound validity",
        pass,
        format!("1000 solutions ok={solutions_ok}, {checked} selections max(delta-bound)={worst:.3e}"),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_02_bound_tightness() {
    let _g = serial();
    let t = Instant::now();
    let cfg = ExperimentConfig {
        realizations: 1000,
        ..ExperimentConfig::desk()
    };
    let r = cmd_verify_bound(&cfg).unwrap().pearson_r.unwrap_or(f64::NAN);
    let pass = r >= 0.95 && t.elapsed().as_secs_f64() <= 120.0;
    report(2, "bound tightness", pass, format!("pearson r = {r:.6} (need >= 0.95)"), t);
    assert!(pass);
}

#[test]
fn criterion_03_identity_residuals() {
    let _g = serial();
    let t = Instant::now();
    let rayleigh = |k: usize, seed: u64| {
        generate(&ChannelModelConfig::rayleigh(ArrayGeometry::new((4, 4), (2, 2))), k, seed).unwrap()
    };
    let (mut c1, mut l1, mut l2) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..100 {
        // Selected columns of the unitary V of a random channel.
        let ch = rayleigh(1, 10_000 + seed);
        let v = svd(ch.user(0)).unwrap().v();
        let idx = [(seed % 4) as usize, 4 + (seed % 12) as usize];
        c1 = c1.max(verify_corollary1(&v, &idx));

        // Per-user bound on K = 4 with random selections.
        let ch = rayleigh(4, 20_000 + seed);
        let cs = build_candidates(&ch, 4, 2).unwrap();
        let sel = enumerate_selections(4, 2, 4).unwrap().nth((seed as usize * 37) % 1296).unwrap();
        let b = extract_beamformers(&cs, &sel);
        for k in 0..4 {
            let scale = frobenius_norm(&iosvb::metrics::interference_matrix(k, &ch, &b)).max(1.0);
            l1 = l1.max(verify_lemma1(&b.combiners[k], ch.user(k), &b.precoders, k) / scale);
        }

        // Cross-user bound on every ordered pair of a clustered instance.
        let ch = desk(30_000 + seed);
        let cs = build_candidates(&ch, 4, 2).unwrap();
        let sel = enumerate_selections(4, 2, 3).unwrap().nth((seed as usize * 13) % 216).unwrap();
        let b = extract_beamformers(&cs, &sel);
        for k in 0..3 {
            for j in (0..3).filter(|&j| j != k) {
                let lhs = b.combiners[k].adjoint_mul(ch.user(k)).matmul(&b.precoders[j]).frobenius_norm_sqr();
                l2 = l2.max(verify_lemma2(&ch, &cs, &sel, k, j).unwrap() / lhs.max(1.0));
            }
        }
    }
    let pass = c1 <= 1e-9 && l1 <= 1e-9 && l2 <= 1e-9 && t.elapsed().as_secs_f64() <= 30.0;
    report(
        3,
        "identity residuals",
        pass,
        format!("max relative residuals: corollary1 {c1:.2e}, lemma1 {l1:.2e}, lemma2 {l2:.2e}"),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_04_near_optimality() {
    let _g = serial();
    let t = Instant::now();
    let lb = LinkBudget::from_snr_db(10.0);
    let (mut io, mut ex) = (Vec::new(), Vec::new());
    let mut dominated = 0;
    for seed in 0..500 {
        let ch = desk(seed);
        let cs = build_candidates(&ch, 4, 2).unwrap();
        let ri = sum_rate_value(&ch, &iosvb_with_candidates(&cs, 0.8).unwrap().beams, &lb).unwrap();
        let re = sum_rate_value(&ch, &exhaustive_search(&ch, 2, 4, &lb).unwrap().beams, &lb).unwrap();
        if re >= ri {
            dominated += 1;
        }
        io.push(ri);
        ex.push(re);
    }
    let ratio = mean(&io) / mean(&ex);
    let pass = ratio >= 0.95 && dominated == 500 && t.elapsed().as_secs_f64() <= 300.0;
    report(
        4,
        "near-optimality",
        pass,
        format!(
            "mean SE iosvb {:.4} / exhaustive {:.4} = {ratio:.4} (need >= 0.95); exhaustive >= iosvb on {dominated}/500",
            mean(&io),
            mean(&ex)
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_05_ordering_vs_mrt() {
    let _g = serial();
    let t = Instant::now();
    let chans: Vec<ChannelRealization> = (0..500).map(desk).collect();
    let beams: Vec<_> = chans
        .iter()
        .map(|ch| {
            let cs = build_candidates(ch, 4, 2).unwrap();
            let lb = LinkBudget::from_snr_db(0.0);
            (iosvb_with_candidates(&cs, 0.8).unwrap().beams, mrt(ch, 2, &lb).unwrap().beams)
        })
        .collect();
    let mut all = true;
    let mut parts = Vec::new();
    for snr in [0.0, 10.0, 20.0] {
        let lb = LinkBudget::from_snr_db(snr);
        let io: Vec<f64> = chans.iter().zip(&beams).map(|(c, b)| sum_rate_value(c, &b.0, &lb).unwrap()).collect();
        let mr: Vec<f64> = chans.iter().zip(&beams).map(|(c, b)| sum_rate_value(c, &b.1, &lb).unwrap()).collect();
        let ok = mean(&io) >= mean(&mr);
        all &= ok;
        parts.push(format!(
            "{snr} dB iosvb {:.4} vs mrt {:.4} {}",
            mean(&io),
            mean(&mr),
            if ok { "ok" } else { "below" }
        ));
    }
    report(5, "ordering vs MRT", all, parts.join("; "), t);
    assert!(all);
}

#[test]
fn criterion_06_gamma_iteration_monotonicity() {
    let _g = serial();
    let t = Instant::now();
    let gammas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
    let n_ex = selection_count(4, 2, 3).unwrap();
    let (mut monotone, mut full, mut single, mut distinct) = (0, 0, 0, 0);
    let seeds = 200;
    for seed in 0..seeds {
        let cs = build_candidates(&desk(seed), 4, 2).unwrap();
        let search = IosvbSearch::new(&cs);
        let iters: Vec<u64> = gammas.iter().map(|&g| search.run(g).unwrap().iterations_used).collect();
        if iters.windows(2).all(|w| w[0] >= w[1]) {
            monotone += 1;
        }
        if search.run(1e-12).unwrap().iterations_used == n_ex {
            full += 1;
        }
        if has_distinct_singular_values(&cs) {
            distinct += 1;
            if search.run(1.0 - 1e-12).unwrap().iterations_used == 1 {
                single += 1;
            }
        }
    }
    let pass = monotone == seeds && full == seeds && single == distinct;
    report(
        6,
        "gamma/iteration monotonicity",
        pass,
        format!(
            "non-increasing on {monotone}/{seeds} seeds; N_ex={n_ex} at gamma->0 on {full}/{seeds}; one iteration at gamma->1 on {single}/{distinct} with distinct singular values"
        ),
        t,
    );
    assert!(pass);
}

fn has_distinct_singular_values(cs: &CandidateSet) -> bool {
    (0..cs.num_users()).all(|k| {
        let s = &cs.sigma()[k * cs.n_c()..(k + 1) * cs.n_c()];
        s.windows(2).all(|w| w[0] - w[1] > 1e-9 * w[0])
    })
}

/// Brute-force argmin built from the singular vectors alone: each entry
/// `σ_a ⟨v_a, v_b⟩` is formed directly, with no shared objective code.
fn oracle_argmin(cs: &CandidateSet, gamma: f64) -> IndexSelection {
    let (n_c, n_s, k) = (cs.n_c(), cs.n_s(), cs.num_users());
    let cols: Vec<Vec<num_complex::Complex64>> = (0..k)
        .flat_map(|u| (0..n_c).map(move |i| (u, i)))
        .map(|(u, i)| cs.v(u).column(i))
        .collect();
    let sigma = cs.sigma();
    let sigma_max: f64 = (0..k).map(|u| (0..n_s).map(|i| sigma[u * n_c + i]).sum::<f64>()).sum();
    let mut best: Option<(IndexSelection, f64)> = None;
    let mut fallback: Option<(IndexSelection, f64)> = None;
    for sel in enumerate_selections(n_c, n_s, k).unwrap() {
        let g: Vec<usize> = (0..k).flat_map(|u| sel.user(u).iter().map(move |&i| u * n_c + i)).collect();
        let gain: f64 = g.iter().map(|&a| sigma[a]).sum();
        let mut acc = 0.0;
        for &a in &g {
            for &b in &g {
                if a != b {
                    let dot: num_complex::Complex64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum();
                    acc += (dot * sigma[a]).norm_sqr();
                }
            }
        }
        let f = acc.sqrt();
        let slot = if gain > gamma * sigma_max { &mut best } else { &mut fallback };
        if slot.as_ref().is_none_or(|(_, b)| f < *b) {
            *slot = Some((sel, f));
        }
    }
    best.or(fallback).unwrap().0
}

#[test]
fn criterion_07_oracle_equivalence() {
    let _g = serial();
    let t = Instant::now();
    let mut matched = 0;
    let mut first_mismatch = None;
    for seed in 0..200 {
        let cs = build_candidates(&desk(50_000 + seed), 4, 2).unwrap();
        let got = iosvb_with_candidates(&cs, 0.8).unwrap().selection;
        let want = oracle_argmin(&cs, 0.8);
        if got == want {
            matched += 1;
        } else if first_mismatch.is_none() {
            first_mismatch = Some((seed, got, want));
        }
    }
    let pass = matched == 200;
    report(
        7,
        "oracle equivalence",
        pass,
        format!("{matched}/200 exact matches; first mismatch {first_mismatch:?}"),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_08_timing() {
    let _g = serial();
    let t = Instant::now();
    let cfg = ExperimentConfig {
        algorithms: vec![Algorithm::Iosvb, Algorithm::Exhaustive],
        ..ExperimentConfig::desk()
    };
    let r = cmd_bench_time(&cfg).unwrap();
    let ratio = r.speedup().unwrap();
    let pass = r.n_ex == 100_000 && r.rows.iter().all(|x| x.times.len() == 5) && ratio >= 50.0;
    report(
        8,
        "timing",
        pass,
        format!(
            "N_ex = {}, median exhaustive {:.4}s, iosvb {:.6}s, ratio {ratio:.1} (need >= 50)",
            r.n_ex,
            r.median(Algorithm::Exhaustive).unwrap(),
            r.median(Algorithm::Iosvb).unwrap()
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_09_table_nc_trend() {
    let _g = serial();
    let t = Instant::now();
    let cfg = ExperimentConfig {
        realizations: 300,
        ..ExperimentConfig::desk()
    };
    let r = cmd_table_nc(&cfg).unwrap();
    let req: Vec<usize> = r.rows.iter().map(|x| x.required_n_c).collect();
    let ns: Vec<usize> = r.rows.iter().map(|x| x.n_s).collect();
    let non_decreasing = req.windows(2).all(|w| w[0] <= w[1]);
    let growth = req.last().unwrap() - req.first().unwrap();
    let ns_growth = ns.last().unwrap() - ns.first().unwrap();
    let pass = ns.len() >= 2 && non_decreasing && growth < ns_growth;
    report(
        9,
        "table N_c trend",
        pass,
        format!("N_s {ns:?} -> required N_c {req:?}; N_c grows by {growth} while N_s grows by {ns_growth}"),
        t,
    );
    assert!(pass);
}

/// CSV text with columns whose header mentions "time" removed.
fn without_timing(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !header[i].contains("time")).collect();
    std::iter::once(header.join(","))
        .chain(lines.map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| cells[i]).collect::<Vec<_>>().join(",")
        }))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_all(cfg: &ExperimentConfig) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for cmd in Command::ALL {
        let files = run_command(cmd, cfg).unwrap().write(&cfg.output_dir).unwrap();
        for f in files {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            let content = if name.ends_with(".csv") {
                without_timing(&f).into_bytes()
            } else {
                std::fs::read(&f).unwrap()
            };
            out.push((format!("{cmd}/{name}"), content));
        }
    }
    out
}

#[test]
fn criterion_10_determinism() {
    let _g = serial();
    let t = Instant::now();
    let base = |dir: &Path| {
        let mut cfg = ExperimentConfig {
            realizations: 12,
            seed: 77,
            output_dir: dir.to_path_buf(),
            snr_grid_db: vec![0.0, 10.0],
            ..ExperimentConfig::desk()
        };
        cfg.bench.runs = 2;
        cfg
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_all(&base(a.path()));
    let second = run_all(&base(b.path()));
    let mut identical = first == second;
    let mut detail = format!("{} output files compared across reruns", first.len());

    #[cfg(feature = "parallel")]
    {
        let c = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| run_all(&base(c.path())));
        identical &= single == first;
        detail.push_str(", and against a single worker thread");
    }
    let pass = identical && !first.is_empty();
    report(10, "determinism", pass, detail, t);
    assert!(pass);
}
