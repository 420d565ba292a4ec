//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavplace_core::baselines::{greedy_cover, GreedyMode};
use uavplace_core::channel::{
    access_path_loss, backhaul_path_loss, coverage_radii, snr, ChannelParams, LinkThresholds,
};
use uavplace_core::exact::{solve_exact, DEFAULT_CANDIDATE_LIMIT};
use uavplace_core::harness::{run_on_graph, run_sweep, SweepResult, SweepSpec, SweepVariable, TrialOptions, TrialOutcome};
use uavplace_core::netgraph::{build_graph, DeploymentGraph};
use uavplace_core::plan::{verify_plan, AlgorithmTag, Plan};
use uavplace_core::planner::prune;
use uavplace_core::scenario::ScenarioConfig;

/// Tally of plans from backhaul-aware algorithms checked across all suites.
#[derive(Default)]
struct Invariants {
    plans: usize,
    violations: Vec<String>,
}

impl Invariants {
    fn check(&mut self, graph: &DeploymentGraph, plan: &Plan, context: &str) {
        if !plan.algorithm_tag.requires_backhaul() {
            return;
        }
        self.plans += 1;
        let report = verify_plan(graph, plan);
        let full = graph.coverage_complete(&plan.selected) && graph.is_connected(&plan.selected);
        if !report.passed() || !full {
            self.violations.push(format!("{context}: {}", plan.algorithm_tag));
        }
    }

    fn absorb_sweep(&mut self, result: &SweepResult, context: &str) {
        for t in &result.trials {
            if !t.algorithm.requires_backhaul() {
                continue;
            }
            match &t.outcome {
                TrialOutcome::Ok { covered: true, connected: true, .. } => self.plans += 1,
                TrialOutcome::Skipped { .. } => {}
                other => {
                    self.plans += 1;
                    self.violations.push(format!("{context} value {} rep {}: {} {other:?}", t.value, t.rep, t.algorithm));
                }
            }
        }
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn within_time(v: Verdict, elapsed: Duration, limit: Duration) -> Verdict {
    let ok = elapsed < limit;
    let detail = format!("{}; {:.2} s (limit {} s)", v.detail, elapsed.as_secs_f64(), limit.as_secs());
    verdict(v.passed && ok, detail)
}

fn complete_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect()
}

fn backhaul_radius_criterion() -> Verdict {
    let params = ChannelParams::suburban();
    let geometry = coverage_radii(&params, &LinkThresholds::new(4.0, 15.0), 1500.0).expect("radii");
    let r = geometry.backhaul_radius;
    let rel = (r - 8300.0).abs() / 8300.0;
    verdict(rel <= 0.10, format!("R' = {r:.1} m, {:.1}% from 8.3 km", 100.0 * rel))
}

fn worked_example_criterion(inv: &mut Invariants) -> Verdict {
    let covered = vec![vec![0, 1, 2], vec![1, 2, 3, 4], vec![3, 4, 5]];
    let g = DeploymentGraph::from_parts(6, vec![[0.0; 3]; 3], covered, &complete_pairs(3)).unwrap();
    let greedy = greedy_cover(&g, GreedyMode::Adaptive).unwrap();
    let proposed = prune(&g).unwrap();
    let (exact, cert) = solve_exact(&g, DEFAULT_CANDIDATE_LIMIT).unwrap();
    inv.check(&g, &proposed, "worked example");
    inv.check(&g, &exact, "worked example");
    let ok = greedy.len() == 3 && greedy.selected.contains(&1) && proposed.selected == [0, 2] && cert.optimum == 2;
    verdict(
        ok,
        format!(
            "greedy {:?}, proposed {:?}, exact optimum {} {:?}",
            greedy.selected, proposed.selected, cert.optimum, exact.selected
        ),
    )
}

fn approximation_bound_criterion(inv: &mut Invariants) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B0);
    let (mut feasible, mut attempts, mut violations, mut worst_ratio, mut gap_sum) = (0, 0, 0, 1.0f64, 0);
    while feasible < 250 && attempts < 5000 {
        attempts += 1;
        let cfg = ScenarioConfig {
            area_width: rng.gen_range(3_000.0..9_300.0),
            area_height: rng.gen_range(3_000.0..11_600.0),
            n_users: rng.gen_range(1..=60),
            thresholds: LinkThresholds::new(4.0, rng.gen_range(10.0..28.0)),
            ..Default::default()
        };
        let scenario = cfg.generate(rng.gen()).expect("scenario");
        let g = build_graph(&scenario);
        if g.n_candidates() > 18 || g.n_nodes() > 61 {
            continue;
        }
        let Ok((exact, cert)) = solve_exact(&g, DEFAULT_CANDIDATE_LIMIT) else { continue };
        feasible += 1;
        let proposed = prune(&g).expect("feasible instance");
        inv.check(&g, &proposed, "bound suite");
        inv.check(&g, &exact, "bound suite");
        let (opt, got) = (cert.optimum, proposed.len());
        if !(opt <= got && got <= 20 * opt + 4) {
            violations += 1;
        }
        gap_sum += got.saturating_sub(opt);
        if opt > 0 {
            worst_ratio = worst_ratio.max(got as f64 / opt as f64);
        }
    }
    verdict(
        feasible >= 200 && violations == 0,
        format!(
            "{feasible} feasible instances, {violations} violations, mean gap {:.3}, worst ratio {worst_ratio:.2}",
            gap_sum as f64 / feasible.max(1) as f64
        ),
    )
}

fn small_scenario_criterion(inv: &mut Invariants) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for users in [20, 40, 60] {
        let (mut within, mut gaps, mut pattern_45) = (0, [0usize; 4], 0);
        for seed in 0..50u64 {
            let cfg = ScenarioConfig { area_width: 9_000.0, area_height: 9_000.0, n_users: users, ..Default::default() };
            let scenario = cfg.generate(1_000 + seed).expect("scenario");
            let g = build_graph(&scenario);
            assert_eq!(g.n_candidates(), 16);
            let proposed = prune(&g).expect("proposed");
            let (exact, cert) = solve_exact(&g, DEFAULT_CANDIDATE_LIMIT).expect("exact");
            inv.check(&g, &proposed, "small scenarios");
            inv.check(&g, &exact, "small scenarios");
            let gap = proposed.len() - cert.optimum;
            within += usize::from(gap <= 2);
            gaps[gap.min(3)] += 1;
            pattern_45 += usize::from(cert.optimum == 4 && proposed.len() == 5);
        }
        ok &= within * 10 >= 9 * 50;
        parts.push(format!("{users} users: {within}/50 within +2 (gaps 0/1/2/3+: {gaps:?}, optimum 4 vs 5 on {pattern_45})"));
    }
    verdict(ok, parts.join("; "))
}

fn sweep_spec(users: usize) -> SweepSpec {
    let mut spec = SweepSpec::new(
        SweepVariable::BackhaulSnr,
        vec![10.0, 15.0, 20.0],
        vec![AlgorithmTag::Proposed, AlgorithmTag::GreedyNoBackhaul, AlgorithmTag::BackhaulGreedy, AlgorithmTag::Random],
    );
    spec.fixed.area_width = 50_000.0;
    spec.fixed.area_height = 50_000.0;
    spec.fixed.n_users = users;
    spec.repetitions = 20;
    spec.base_seed = 0x5EED_0000 + users as u64;
    spec
}

fn run_trend_sweeps(inv: &mut Invariants) -> Vec<(usize, SweepResult)> {
    [50, 100, 200]
        .into_iter()
        .map(|users| {
            let result = run_sweep(&sweep_spec(users), 0).expect("sweep");
            inv.absorb_sweep(&result, &format!("{users}-user sweep"));
            (users, result)
        })
        .collect()
}

fn mean(result: &SweepResult, value: f64, alg: AlgorithmTag) -> f64 {
    result.summary(value, alg).and_then(|s| s.mean).unwrap_or(f64::NAN)
}

fn trends_criterion(sweeps: &[(usize, SweepResult)]) -> Verdict {
    let (mut ordered, mut cells, mut save_bag, mut save_rnd) = (true, 0, 0.0, 0.0);
    let mut rows = Vec::new();
    for (users, r) in sweeps {
        for &v in &r.spec.values {
            let p = mean(r, v, AlgorithmTag::Proposed);
            let b = mean(r, v, AlgorithmTag::BackhaulGreedy);
            let q = mean(r, v, AlgorithmTag::Random);
            ordered &= p <= b && b <= q;
            cells += 1;
            save_bag += (b - p) / b;
            save_rnd += (q - p) / q;
            rows.push(format!("{users}u/{v}dB {p:.2}/{b:.2}/{q:.2}"));
        }
    }
    let (sb, sr) = (save_bag / cells as f64, save_rnd / cells as f64);
    verdict(
        ordered && sb >= 0.05 && sr >= 0.40,
        format!(
            "ordering at all {cells} cells: {ordered}; mean saving vs BaG {:.1}%, vs random {:.1}% [proposed/BaG/random: {}]",
            100.0 * sb,
            100.0 * sr,
            rows.join(", ")
        ),
    )
}

fn greedy_invariance_criterion(sweeps: &[(usize, SweepResult)]) -> Verdict {
    let mut constant = true;
    let mut means = Vec::new();
    for (users, r) in sweeps {
        let m: Vec<f64> = r.spec.values.iter().map(|&v| mean(r, v, AlgorithmTag::GreedyNoBackhaul)).collect();
        constant &= m.iter().all(|x| x.to_bits() == m[0].to_bits());
        means.push(format!("{users}u {m:?}"));
    }
    let (_, dense) = sweeps.iter().find(|(u, _)| *u >= 200).expect("200-user sweep");
    let per_rep = |alg| -> Vec<Option<usize>> {
        dense.records(alg).filter(|t| t.value == 10.0).map(|t| t.uavs()).collect()
    };
    let (prop, greedy) = (per_rep(AlgorithmTag::Proposed), per_rep(AlgorithmTag::GreedyNoBackhaul));
    let wins = prop.iter().zip(&greedy).filter(|(p, g)| matches!((p, g), (Some(p), Some(g)) if p <= g)).count();
    let majority = 2 * wins > prop.len();
    verdict(
        constant && majority,
        format!(
            "greedy means {}; proposed <= greedy in {wins}/{} reps at 200 users, 10 dB",
            means.join(", "),
            prop.len()
        ),
    )
}

fn invariants_criterion(inv: &Invariants) -> Verdict {
    let shown: Vec<&String> = inv.violations.iter().take(5).collect();
    verdict(
        inv.violations.is_empty() && inv.plans > 0,
        format!("{} backhaul-aware plans checked, {} violations {shown:?}", inv.plans, inv.violations.len()),
    )
}

/// Straight-line evaluation of the air-to-ground mixture loss.
fn oracle_access_loss(p: &ChannelParams, r: f64, h: f64) -> f64 {
    let d = (r * r + h * h).sqrt();
    let theta = if r == 0.0 { 90.0 } else { (h / r).atan() * 180.0 / PI };
    let p_los = 1.0 / (1.0 + p.env_a * (-p.env_b * (theta - p.env_a)).exp());
    let fspl = 20.0 * (4.0 * PI * p.carrier_frequency * d / p.light_speed).log10();
    p_los * (fspl + p.loss_los) + (1.0 - p_los) * (fspl + p.loss_nlos)
}

fn oracle_backhaul_loss(p: &ChannelParams, d: f64) -> f64 {
    20.0 * (4.0 * PI * p.backhaul_frequency * d / p.light_speed).log10()
}

fn oracle_snr(p: &ChannelParams, loss: f64) -> f64 {
    p.tx_power - loss - (p.noise_psd + 10.0 * p.bandwidth.log10())
}

fn channel_oracle_criterion() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4A2);
    let (mut worst, mut bracket_checks, mut bracket_fail) = (0.0f64, 0, 0);
    for draw in 0..10_000 {
        let fc = rng.gen_range(0.5e9..6e9);
        let loss_los = rng.gen_range(0.0..3.0);
        let p = ChannelParams {
            carrier_frequency: fc,
            backhaul_frequency: fc,
            env_a: rng.gen_range(1.0..20.0),
            env_b: rng.gen_range(0.05..1.0),
            loss_los,
            loss_nlos: rng.gen_range(loss_los..40.0),
            tx_power: rng.gen_range(10.0..40.0),
            ..ChannelParams::suburban()
        };
        let r = if draw % 50 == 0 { 0.0 } else { rng.gen_range(0.0..20_000.0) };
        let h = rng.gen_range(10.0..5_000.0);
        let d = rng.gen_range(1.0..50_000.0);
        let la = access_path_loss(&p, r, h).unwrap();
        let lb = backhaul_path_loss(&p, d).unwrap();
        worst = worst
            .max((la - oracle_access_loss(&p, r, h)).abs())
            .max((lb - oracle_backhaul_loss(&p, d)).abs())
            .max((snr(&p, la).unwrap() - oracle_snr(&p, la)).abs());

        if draw % 10 == 0 {
            let thresholds = LinkThresholds::new(rng.gen_range(-5.0..20.0), 15.0);
            if let Ok(geo) = coverage_radii(&p, &thresholds, h) {
                bracket_checks += 1;
                let snr_at = |x: f64| oracle_snr(&p, oracle_access_loss(&p, x, h));
                let inner = (geo.ground_radius - 1.0).max(0.0);
                if !(snr_at(inner) >= thresholds.access_snr_min && snr_at(geo.ground_radius + 1.0) < thresholds.access_snr_min) {
                    bracket_fail += 1;
                }
            }
        }
    }
    verdict(
        worst <= 1e-9 && bracket_fail == 0 && bracket_checks > 0,
        format!("max deviation {worst:.2e} dB over 10^4 draws; {bracket_checks} radius brackets, {bracket_fail} failures"),
    )
}

fn scaling_criterion(inv: &mut Invariants) -> Verdict {
    let cfg = ScenarioConfig { area_width: 100_000.0, area_height: 100_000.0, n_users: 500, ..Default::default() };
    let scenario = cfg.generate(0x5CA1E).expect("scenario");
    let g = build_graph(&scenario);
    let opts = TrialOptions::for_scenario(&scenario);
    let start = Instant::now();
    let proposed = run_on_graph(&g, AlgorithmTag::Proposed, &opts);
    let elapsed = start.elapsed();
    if let Ok(plan) = &proposed {
        inv.check(&g, plan, "scaling");
    }

    let mut spec = SweepSpec::new(SweepVariable::AreaSide, vec![100_000.0], vec![AlgorithmTag::Exact]);
    spec.fixed.n_users = 500;
    spec.repetitions = 1;
    let sweep = run_sweep(&spec, 1).expect("sweep");
    let skipped = matches!(sweep.trials[0].outcome, TrialOutcome::Skipped { .. });
    let ok = proposed.is_ok() && elapsed < Duration::from_secs(30) && skipped;
    verdict(
        ok,
        format!(
            "{} candidates, {} ground nodes: proposed {} UAVs in {:.2} s; exact skipped: {skipped}",
            g.n_candidates(),
            g.n_nodes(),
            proposed.as_ref().map_or(0, Plan::len),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let mut inv = Invariants::default();
    let mut lines = Vec::new();
    let mut record = |id: u32, name: &str, limit: Option<u64>, run: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let mut v = run();
        if let Some(secs) = limit {
            v = within_time(v, start.elapsed(), Duration::from_secs(secs));
        }
        let line = format!("{} [{id}] {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        println!("{line}");
        lines.push(v.passed);
    };

    record(1, "backhaul radius", Some(1), &mut backhaul_radius_criterion);
    record(2, "worked example", Some(1), &mut || worked_example_criterion(&mut inv));
    record(3, "approximation bound", Some(300), &mut || approximation_bound_criterion(&mut inv));
    record(4, "small-scenario gap", Some(600), &mut || small_scenario_criterion(&mut inv));
    let start = Instant::now();
    let sweeps = run_trend_sweeps(&mut inv);
    let sweep_time = start.elapsed();
    record(5, "ordering and savings", None, &mut || {
        within_time(trends_criterion(&sweeps), sweep_time, Duration::from_secs(900))
    });
    record(6, "greedy threshold invariance", None, &mut || greedy_invariance_criterion(&sweeps));
    record(8, "channel oracles", Some(10), &mut channel_oracle_criterion);
    record(9, "scaling smoke test", None, &mut || scaling_criterion(&mut inv));
    record(7, "universal invariants", None, &mut || invariants_criterion(&inv));

    let failed = lines.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
