//! Acceptance checks, run in sequence so that timings do not overlap.
//! One line per criterion; the process fails if any criterion fails.

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensorsched::environment::EnvConfig;
use sensorsched::experiment::{
    emit_online, generate_synthetic, grid_scenario, nine_room_instance, run_benchmark, run_online_experiment, run_seed,
    write_benchmark_csv, BenchmarkConfig, OnlineExperiment, OutputFormat, SyntheticSpec,
};
use sensorsched::online::{
    estimate_matrix_homogeneous, run_heterogeneous, run_homogeneous, HeterogeneousConfig, HomogeneousConfig,
    LearnerKind, OnlineTrace, PolicySpec,
};
use sensorsched::payoff::{save_instance, zero_sum_transform};
use sensorsched::solvers::{
    dwm_beta, dwm_solve, exploitability_gap, iterations_for_epsilon, solve_exact, DwmState, WeightedMajority,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<f64, String> {
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < budget.as_secs_f64(), || format!("took {secs:.2}s, budget {}s", budget.as_secs()))?;
    Ok(secs)
}

fn zero_sum_identity() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..10_000 {
        let p_miss: f64 = 1.0 - rng.random::<f64>();
        let c = rng.random_range(0.0..10.0);
        let r = rng.random_range(0.0..10.0);
        let (a, b) = zero_sum_transform(p_miss.ln() + c, -p_miss.ln() + r, c, r).map_err(|e| format!("tuple {k}: {e}"))?;
        ensure(a + b == 0.0, || format!("tuple {k}: A'+B' = {}", a + b))?;
        ensure((a - (p_miss.ln() + c - r)).abs() <= 1e-12, || format!("tuple {k}: A' = {a}"))?;
    }
    let secs = within_budget(start, Duration::from_secs(1))?;
    Ok(format!("10000 tuples exact in {secs:.3}s"))
}

fn dwm_wm_equivalence() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for sensors in 1..=5 {
        let inst = fixture_instance(sensors, 10).normalize().map_err(|e| e.to_string())?;
        let (p, d, n) = inst.dims();
        ensure(d == 4 && n == 10, || format!("fixture dims {:?}", inst.dims()))?;
        let beta = dwm_beta(200.0, p, d).map_err(|e| e.to_string())?;
        let mut wm = WeightedMajority::new(&inst, beta).map_err(|e| e.to_string())?;
        let mut dwm = DwmState::new(&inst, beta).map_err(|e| e.to_string())?;
        for round in 0..=200 {
            let joint = dwm.strategy().to_joint().map_err(|e| e.to_string())?;
            let tv = 0.5 * joint.probs().iter().zip(wm.strategy()).map(|(a, b)| (a - b).abs()).sum::<f64>();
            worst = worst.max(tv);
            ensure(tv <= 1e-9, || format!("|S|={sensors} round {round}: TV {tv:e}"))?;
            if round == 200 {
                break;
            }
            let j = dwm.best_response();
            ensure(j == wm.best_response(), || format!("|S|={sensors} round {round}: best responses differ"))?;
            wm.update(j);
            dwm.update(j);
        }
    }
    let secs = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("max TV {worst:.1e} over 5 fixtures x 200 rounds in {secs:.2}s"))
}

fn convergence_targets() -> Check {
    let inst = nine_room_instance(2).and_then(|i| i.normalize()).map_err(|e| e.to_string())?;
    let (p, d, _) = inst.dims();
    let exact = solve_exact(&inst).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for eps in [0.01, 0.005, 0.001] {
        let start = Instant::now();
        let t = iterations_for_epsilon(eps, p, d).map_err(|e| e.to_string())?;
        let beta = dwm_beta(t as f64, p, d).map_err(|e| e.to_string())?;
        let res = dwm_solve(&inst, beta, t).map_err(|e| e.to_string())?;
        let gap = exploitability_gap(&inst, &res.defender, &res.intruder).map_err(|e| e.to_string())?;
        let err = (res.value_estimate - exact.value_estimate).abs();
        ensure(gap <= eps, || format!("eps {eps}: gap {gap:e}"))?;
        ensure(err <= 1e-6 + eps, || format!("eps {eps}: value error {err:e}"))?;
        within_budget(start, Duration::from_secs(300))?;
        parts.push(format!("eps {eps}: T {t} gap {gap:.2e}"));
    }
    Ok(parts.join(", "))
}

fn scaling_trend() -> Check {
    let start = Instant::now();
    let eps = 0.01;
    let cfg = BenchmarkConfig { sensor_counts: vec![2, 6, 8], eps, repeats: 5, ..BenchmarkConfig::default() };
    let rows = run_benchmark(&fixture_env(), &EnvConfig::default(), &cfg).map_err(|e| e.to_string())?;
    let by = |s: usize| rows.iter().find(|r| r.sensors == s).ok_or(format!("no row for |S|={s}"));
    let (r2, r6, r8) = (by(2)?, by(6)?, by(8)?);
    for r in &rows {
        for gap in [r.gap_exact, r.gap_wm, r.gap_dwm].into_iter().flatten() {
            ensure(gap <= eps, || format!("|S|={}: gap {gap:e} above {eps}", r.sensors))?;
        }
    }
    let need = |v: Option<f64>, what: &str| v.ok_or(format!("{what} missing"));
    let dwm_ratio = need(r8.dwm_s, "dwm |S|=8")? / need(r2.dwm_s, "dwm |S|=2")?;
    let wm_ratio = need(r6.wm_s, "wm |S|=6")? / need(r2.wm_s, "wm |S|=2")?;
    ensure(dwm_ratio < 10.0, || format!("DWM time ratio 8/2 = {dwm_ratio:.2}"))?;
    ensure(wm_ratio > 20.0, || format!("WM time ratio 6/2 = {wm_ratio:.2}"))?;
    let secs = within_budget(start, Duration::from_secs(900))?;
    Ok(format!("DWM 8/2 = {dwm_ratio:.2}x, WM 6/2 = {wm_ratio:.0}x, sweep {secs:.1}s"))
}

fn perturbation_bound() -> Check {
    let start = Instant::now();
    let problem = regret_problem(0);
    let a = problem.truth.dense().map_err(|e| e.to_string())?.to_vec();
    let p = problem.p_true()[0];
    let scale = problem.v_max() / (1.0 - problem.p_max());
    let mut checked = 0;
    let mut tightest: f64 = 0.0;
    for spec in [PolicySpec::Ne, PolicySpec::Random] {
        let trace = run_homogeneous(&problem, &problem.policy(spec), 1000, 7, &HomogeneousConfig::default())
            .map_err(|e| e.to_string())?;
        for r in &trace.rounds {
            let p_hat = r.p_hat[0];
            let est = estimate_matrix_homogeneous(&problem.truth, p_hat).map_err(|e| e.to_string())?;
            let dev = est.dense().map_err(|e| e.to_string())?.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let bound = scale * (p_hat - p).abs();
            ensure(dev <= bound + 1e-12, || format!("{spec} round {}: {dev:e} > {bound:e}", r.t))?;
            if bound > 0.0 {
                tightest = tightest.max(dev / bound);
            }
            checked += 1;
        }
    }
    let secs = within_budget(start, Duration::from_secs(120))?;
    Ok(format!("{checked} rounds, largest deviation/bound {tightest:.3}, {secs:.2}s"))
}

fn regret_study_ordering() -> Check {
    let start = Instant::now();
    let (mut ne100, mut ne1000, mut rnd1000) = (0.0, 0.0, 0.0);
    for seed in 0..20u64 {
        let problem = regret_problem(seed);
        let cfg = OnlineExperiment { rounds: 1000, runs: 1, master_seed: seed, ..OnlineExperiment::default() };
        let curves = run_online_experiment(&problem, &cfg).map_err(|e| e.to_string())?;
        let ne = curves.iter().find(|c| c.policy == "ne").ok_or("no ne curve")?;
        let rnd = curves.iter().find(|c| c.policy == "random").ok_or("no random curve")?;
        ne100 += ne.mean[99] / 20.0;
        ne1000 += ne.mean[999] / 20.0;
        rnd1000 += rnd.mean[999] / 20.0;
    }
    let (early, late) = (ne100 / 100.0, ne1000 / 1000.0);
    ensure(late < 0.5 * early, || format!("R_T/T: {late:e} at 1000 vs {early:e} at 100"))?;
    ensure(ne1000 > rnd1000, || format!("mean R_T: ne {ne1000} vs random {rnd1000}"))?;
    let secs = within_budget(start, Duration::from_secs(600))?;
    Ok(format!("R_T/T {early:.2e} -> {late:.2e}; R_T ne {ne1000:.3} > random {rnd1000:.1}; {secs:.1}s"))
}

fn homogeneous_bound_coverage() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for spec in [PolicySpec::Ne, PolicySpec::Random] {
        let mut covered = 0;
        for seed in 0..100u64 {
            let problem = regret_problem(seed);
            let trace = run_homogeneous(&problem, &problem.policy(spec), 1000, run_seed(7, seed as usize), &HomogeneousConfig::default())
                .map_err(|e| e.to_string())?;
            if trace.final_regret() <= trace.bound {
                covered += 1;
            }
        }
        ensure(covered >= 90, || format!("{spec}: {covered} of 100 seeds within the bound"))?;
        parts.push(format!("{spec} {covered}/100"));
    }
    let secs = within_budget(start, Duration::from_secs(1800))?;
    Ok(format!("{} within the case bound, {secs:.1}s", parts.join(", ")))
}

/// Bonus at each visit of (i, j, l) must drop whenever the count grows past one.
fn bonuses_shrink(trace: &OnlineTrace) -> Result<(), String> {
    let mut last: HashMap<(usize, usize, usize), (u64, f64)> = HashMap::new();
    for r in &trace.rounds {
        for (l, (&c, &b)) in r.counts.iter().zip(&r.bonus).enumerate() {
            if let Some(&(c0, b0)) = last.get(&(r.i, r.j, l)) {
                let ok = if c == c0 || c0 == 0 && c == 1 { b == b0 } else { c > c0 && b < b0 };
                ensure(ok, || format!("pair ({}, {}) sensor {l}: count {c0} -> {c}, bonus {b0} -> {b}", r.i, r.j))?;
            }
            last.insert((r.i, r.j, l), (c, b));
        }
    }
    Ok(())
}

fn heterogeneous_suite() -> Check {
    let start = Instant::now();
    let problem = problem_for("two-sensor", &two_sensor_game());
    let dims = problem.truth.dims();
    ensure(dims == (2, 2, 4), || format!("fixture dims {dims:?}"))?;
    let mut parts = Vec::new();
    for spec in [PolicySpec::Ne, PolicySpec::Random] {
        let mut covered = 0;
        for k in 0..50 {
            let trace = run_heterogeneous(&problem, &problem.policy(spec), 2000, run_seed(11, k), &HeterogeneousConfig::default())
                .map_err(|e| e.to_string())?;
            for r in &trace.rounds {
                let b = r.min_bonus.ok_or("missing min_bonus")?;
                ensure(b >= 0.0, || format!("{spec} seed {k} round {}: min bonus {b}", r.t))?;
            }
            bonuses_shrink(&trace).map_err(|e| format!("{spec} seed {k}: {e}"))?;
            if trace.final_regret() <= trace.bound {
                covered += 1;
            }
        }
        ensure(covered >= 45, || format!("{spec}: {covered} of 50 seeds within the bound"))?;
        parts.push(format!("{spec} {covered}/50"));
    }
    let secs = within_budget(start, Duration::from_secs(1200))?;
    Ok(format!("upper >= mean every round; bonuses shrink; {} within {:.0}; {secs:.1}s", parts.join(", "), problem.heterogeneous_bound(2000)))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let instances: Vec<_> = (1..=6).map(|s| fixture_instance(s, 20)).collect();
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let inst = &instances[k % instances.len()];
        let (p, d, n) = inst.dims();
        ensure(inst.num_joint().map_err(|e| e.to_string())? <= 4096, || "instance too large".into())?;
        let x = random_product(&mut rng, p, d);
        let dense = dense_column_payoffs(inst, &x);
        for (j, &v) in dense.iter().enumerate() {
            let f = inst.expected_column_payoff(&x, j).map_err(|e| e.to_string())?;
            worst = worst.max((f - v).abs());
        }
        let y = random_mixed(&mut rng, n);
        let (v, _) = inst.expected_row_payoff_min(&y).map_err(|e| e.to_string())?;
        worst = worst.max((v - dense_row_min(inst, &y).0).abs());
        ensure(worst <= 1e-10, || format!("strategy {k}: difference {worst:e}"))?;
    }
    let secs = within_budget(start, Duration::from_secs(60))?;
    Ok(format!("1000 strategies, max difference {worst:.1e}, {secs:.2}s"))
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn seeded_outputs(dir: &Path, threads: usize) -> Result<(), String> {
    let err = |e: sensorsched::Error| e.to_string();
    let synth = generate_synthetic(&SyntheticSpec::regret_study(3)).map_err(err)?;
    save_instance(&synth, dir.join("synthetic.json")).map_err(err)?;
    let grid = grid_scenario(&fixture_env(), &fixture_config(30), Some(3)).map_err(err)?;
    save_instance(&grid.instance, dir.join("grid.json")).map_err(err)?;
    let cases = [
        ("hom", LearnerKind::Homogeneous, regret_problem(3)),
        ("het", LearnerKind::Heterogeneous, problem_for("two-sensor", &two_sensor_game())),
    ];
    for (name, kind, problem) in cases {
        let cfg = OnlineExperiment { kind, rounds: 200, runs: 4, master_seed: 5, threads: Some(threads), ..OnlineExperiment::default() };
        let curves = run_online_experiment(&problem, &cfg).map_err(err)?;
        emit_online(&dir.join(name), &curves, OutputFormat::Both, &[("instance".into(), problem.label.clone())]).map_err(err)?;
    }
    let cfg = BenchmarkConfig { sensor_counts: vec![1, 2], eps: 0.05, repeats: 1, ..BenchmarkConfig::default() };
    let mut rows = run_benchmark(&fixture_env(), &EnvConfig::default(), &cfg).map_err(err)?;
    for r in &mut rows {
        for t in [&mut r.exact_s, &mut r.wm_s, &mut r.dwm_s] {
            *t = t.map(|_| 0.0);
        }
    }
    let file = std::fs::File::create(dir.join("bench-untimed.csv")).map_err(|e| e.to_string())?;
    write_benchmark_csv(&rows, file, &[]).map_err(err)
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, threads) in [(&a, 1), (&b, 2)] {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        seeded_outputs(dir, threads)?;
    }
    let (fa, fb) = (files_under(&a), files_under(&b));
    ensure(fa.len() > 10, || format!("only {} files written", fa.len()))?;
    ensure(fa.iter().map(|f| &f.0).eq(fb.iter().map(|f| &f.0)), || "file sets differ".into())?;
    for ((name, x), (_, y)) in fa.iter().zip(&fb) {
        ensure(x == y, || format!("{name} differs between repeats"))?;
    }
    Ok(format!("{} files byte-identical across repeats and thread counts", fa.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("zero-sum transform identity", zero_sum_identity),
        ("DWM and WM play the same distributions", dwm_wm_equivalence),
        ("DWM reaches each epsilon target", convergence_targets),
        ("solver scaling trend", scaling_trend),
        ("estimate perturbation bound", perturbation_bound),
        ("regret study ordering", regret_study_ordering),
        ("homogeneous regret bound coverage", homogeneous_bound_coverage),
        ("heterogeneous learner suite", heterogeneous_suite),
        ("factorized oracles match dense", oracle_equivalence),
        ("seeded outputs are deterministic", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
