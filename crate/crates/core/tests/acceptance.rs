//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion fails that is not listed in
//! `EXPECTED_FAILURES` (see the README for the analysis behind that list).

use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qrep::bounds::{bounds_report, eta, lemma2_bound, std_rate};
use qrep::chain::{chain_standard, chain_standard_cycle_mean, run_chain};
use qrep::engine::{run, run_standard, Repeater, RoundOutcome, SimSummary};
use qrep::oracle::{binomial_pmf, build_chain, l1_distance, stationary_stats};
use qrep::stats::BatchMeans;
use qrep::stochastics::{binomial, BinomialTable, Geometric, Purpose, StreamKey};
use qrep::{ChainConfig, PolicyKind, RepeaterConfig, RoundState};

const SEED: u64 = 0x5eed_2026;
const PROPERTY_CASES: u32 = 10_000;
const EXPECTED_FAILURES: &[u32] = &[7, 8, 9];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn single(n: usize, d: (f64, f64), kind: PolicyKind) -> RepeaterConfig {
    RepeaterConfig::new(n, d.0, d.1, kind).unwrap()
}

fn sim(cfg: &RepeaterConfig, rounds: u64, experiment: u64) -> SimSummary {
    run(cfg, rounds, rounds / 20, SEED ^ experiment.wrapping_mul(0x9e37_79b9)).unwrap()
}

/// Separation of two independent estimates in units of their joint error.
fn z(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    (a - b) / (se_a * se_a + se_b * se_b).sqrt()
}

fn oracle_equivalence() -> Verdict {
    let mut cases = Vec::new();
    for n in [2usize, 4, 6, 8, 10, 12] {
        for d in [(20.0, 30.0), (20.0, 40.0), (10.0, 30.0)] {
            for kind in PolicyKind::ALL {
                cases.push((n, d, kind));
            }
        }
    }
    let results: Vec<(f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, d, kind))| {
            let cfg = single(n, d, kind);
            let s = run(&cfg, 10_100_000, 100_000, SEED + i as u64).unwrap();
            let chain = build_chain(n, cfg.left.success_prob, cfg.right.success_prob, kind).unwrap();
            let exact = stationary_stats(&chain);
            let l1 = l1_distance(&s.empirical_alpha_pmf, &chain.pmf());
            (l1, (s.mean_matched_per_round - exact.e_matched) / s.matched_se)
        })
        .collect();
    let worst_l1 = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_z = results.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let over: Vec<String> = cases
        .iter()
        .zip(&results)
        .filter(|(_, r)| r.0 >= 0.01 || r.1.abs() > 3.0)
        .map(|((n, d, k), r)| format!("N={n} {d:?} {k}: L1={:.4} z={:.2}", r.0, r.1))
        .collect();
    verdict(
        over.is_empty(),
        format!("{} cases, worst L1 {worst_l1:.4}, worst |z| {worst_z:.2}{}", cases.len(), fmt_list(&over)),
    )
}

fn fmt_list(items: &[String]) -> String {
    if items.is_empty() { String::new() } else { format!("; outside: {}", items.join(", ")) }
}

fn lemma2_dominance() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut cases = Vec::new();
    for d in [(20.0, 30.0), (10.0, 30.0)] {
        for n in [8usize, 16, 32, 64, 128] {
            cases.push((n, d));
        }
    }
    let sims: Vec<SimSummary> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, d))| sim(&single(n, d, PolicyKind::Optimal), 2_000_000, 200 + i as u64))
        .collect();
    let mut worst_margin = f64::INFINITY;
    for (&(n, d), s) in cases.iter().zip(&sims) {
        let cfg = single(n, d, PolicyKind::Optimal);
        let bound = lemma2_bound(n, cfg.left.success_prob, cfg.right.success_prob);
        let margin = (s.mean_matched_per_round - bound) / s.matched_se;
        worst_margin = worst_margin.min(margin);
        if margin < -3.0 {
            pass = false;
            notes.push(format!("N={n} {d:?} below bound by {:.2} SE", -margin));
        }
        if n == 128 {
            let ratio = bound / s.mean_matched_per_round;
            notes.push(format!("ratio at N=128 {d:?}: {ratio:.3}"));
            pass &= ratio >= 0.9;
        }
    }
    let mut exact_ok = true;
    for d in [(20.0, 30.0), (10.0, 30.0)] {
        for n in [2usize, 4, 6, 8, 10, 12] {
            let cfg = single(n, d, PolicyKind::Optimal);
            let (p_l, p_r) = (cfg.left.success_prob, cfg.right.success_prob);
            let exact = stationary_stats(&build_chain(n, p_l, p_r, PolicyKind::Optimal).unwrap());
            if exact.e_matched < lemma2_bound(n, p_l, p_r) {
                exact_ok = false;
                notes.push(format!("oracle below bound at N={n} {d:?}"));
            }
        }
    }
    verdict(
        pass && exact_ok,
        format!("worst simulated margin {worst_margin:.1} SE, oracle N<=12 exact {}; {}", exact_ok, notes.join(", ")),
    )
}

fn symmetric_identity() -> Verdict {
    let mut cases = Vec::new();
    for n in [4usize, 16, 64] {
        for kind in [PolicyKind::Optimal, PolicyKind::Equal] {
            for d in [25.0, 40.0] {
                cases.push((n, d, kind));
            }
        }
    }
    let zs: Vec<f64> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, d, kind))| {
            let cfg = single(n, (d, d), kind);
            let p = cfg.left.success_prob;
            let mut rep = Repeater::new(cfg).unwrap();
            let mut rng = StreamKey::new(SEED, 300 + i as u64, 0, Purpose::Balanced).stream();
            let mut state = RoundState::new();
            let mut out = RoundOutcome::default();
            for _ in 0..50_000 {
                rep.step(&mut state, &mut rng, &mut out);
            }
            let rounds = 1_000_000;
            let mut diff = BatchMeans::new(rounds);
            for _ in 0..rounds {
                let abs_alpha = state.alpha.unsigned_abs() as f64;
                rep.step(&mut state, &mut rng, &mut out);
                diff.push(out.matched as f64 - 0.5 * p * (n as f64 - abs_alpha));
            }
            diff.mean() / diff.std_error()
        })
        .collect();
    let worst = zs.iter().map(|z| z.abs()).fold(0.0, f64::max);
    verdict(worst <= 3.0, format!("{} cases, worst |z| of E[M] - p(N - E|a|)/2: {worst:.2}", cases.len()))
}

fn standard_closed_form() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for (i, d) in [(20.0, 30.0), (20.0, 40.0), (10.0, 30.0)].into_iter().enumerate() {
        let cfg = single(16, d, PolicyKind::Optimal);
        let s = run_standard(&cfg, 1_000_000, SEED + 400 + i as u64).unwrap();
        let (l, r) = (cfg.left, cfg.right);
        let cycle = l.trip_time_s / l.success_prob + r.trip_time_s / r.success_prob;
        let rel = (s.mean_cycle_time_s.unwrap() / cycle - 1.0).abs();
        let floor = eta(l.success_prob, r.success_prob) * 16.0 / cfg.tau_round();
        let (exact, lower) = std_rate(16, &l, &r);
        let ok = rel < 0.01 && s.rate_per_s + 3.0 * s.rate_se >= floor && exact >= lower;
        pass &= ok;
        notes.push(format!("{d:?}: cycle off by {:.3}%, rate/bound {:.3}", 100.0 * rel, s.rate_per_s / floor));
    }
    verdict(pass, notes.join(", "))
}

fn fidelity_dominance() -> Verdict {
    let mut cases = Vec::new();
    for d_r in [30.0, 40.0] {
        for t_c in [1e-3, 1e-2] {
            for n in [8usize, 16, 32, 64, 128] {
                cases.push((n, d_r, t_c));
            }
        }
    }
    let margins: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, d_r, t_c))| {
            let cfg = single(n, (20.0, d_r), PolicyKind::Optimal).with_coherence_time(t_c);
            let s = sim(&cfg, 2_000_000, 500 + i as u64);
            let b = bounds_report(n, &cfg.left, &cfg.right, t_c, 1.0).unwrap();
            ((s.mean_swap_fidelity - b.swap_fidelity_bound) / s.fidelity_se, s.mean_swap_fidelity, b.swap_fidelity_bound)
        })
        .collect();
    let worst = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let below: Vec<String> = cases
        .iter()
        .zip(&margins)
        .filter(|(_, m)| m.0 < -3.0)
        .map(|((n, d, t), m)| format!("N={n} d_r={d} t_c={t}: F={:.4} bound={:.4}", m.1, m.2))
        .collect();
    verdict(below.is_empty(), format!("{} cases, worst margin {worst:.1} SE{}", cases.len(), fmt_list(&below)))
}

fn qualitative_orderings() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for n in [16usize, 64] {
        let kinds = [PolicyKind::Optimal, PolicyKind::Proportional, PolicyKind::Equal];
        let runs: Vec<SimSummary> = kinds
            .par_iter()
            .enumerate()
            .map(|(i, &k)| {
                let cfg = single(n, (20.0, 40.0), k).with_coherence_time(1e-3);
                sim(&cfg, 2_000_000, 600 + 10 * n as u64 + i as u64)
            })
            .collect();
        let cfg = single(n, (20.0, 40.0), PolicyKind::Optimal).with_coherence_time(1e-3);
        let std = run_standard(&cfg, 2_000_000, SEED + 700 + n as u64).unwrap();
        let (opt, prop, eq) = (&runs[0], &runs[1], &runs[2]);
        let f = |s: &SimSummary| (s.mean_swap_fidelity, s.fidelity_se);
        let zf = |a: &SimSummary, b: &SimSummary| z(f(a).0, f(a).1, f(b).0, f(b).1);
        let (r_std, _) = std_rate(n, &cfg.left, &cfg.right);
        let gap = |s: &SimSummary| ((r_std - s.rate_per_s) / r_std, s.rate_se / r_std);
        let zg = |a: &SimSummary, b: &SimSummary| z(gap(a).0, gap(a).1, gap(b).0, gap(b).1);
        let checks = [
            ("F opt>prop", zf(opt, prop)),
            ("F prop>std", zf(prop, &std)),
            ("F prop>eq", zf(prop, eq)),
            ("gap eq>prop", zg(eq, prop)),
            ("gap prop>opt", zg(prop, opt)),
        ];
        for (name, zv) in checks {
            pass &= zv > 3.0;
            notes.push(format!("N={n} {name} z={zv:.1}"));
        }
    }
    verdict(pass, notes.join(", "))
}

fn hard_cutoff_shape() -> Verdict {
    let ns = [2usize, 4, 8, 16, 32, 64];
    let runs: Vec<(SimSummary, SimSummary)> = ns
        .par_iter()
        .map(|&n| {
            let base = single(n, (20.0, 40.0), PolicyKind::Optimal).with_coherence_time(1e-3);
            let opt = sim(&base, 2_000_000, 800 + n as u64);
            let cut = sim(&base.with_policy(PolicyKind::HardCutoff), 2_000_000, 900 + n as u64);
            (opt, cut)
        })
        .collect();
    let mut pass = true;
    let mut notes = Vec::new();
    for (&n, (opt, cut)) in ns.iter().zip(&runs) {
        let ratio = cut.rate_per_s / opt.rate_per_s;
        let zf = z(cut.mean_swap_fidelity, cut.fidelity_se, opt.mean_swap_fidelity, opt.fidelity_se);
        let ok = if n < 10 {
            ratio < 0.5 && zf > 3.0
        } else {
            (ratio - 1.0).abs() < 0.05 && zf > -3.0
        };
        pass &= ok;
        notes.push(format!("N={n} rate ratio {ratio:.3} F z={zf:.1}{}", if ok { "" } else { " (x)" }));
    }
    verdict(pass, notes.join(", "))
}

fn zero_mean_drift() -> Verdict {
    let mut cases = Vec::new();
    for d in [(20.0, 30.0), (20.0, 40.0), (10.0, 30.0)] {
        for n in [16usize, 64, 128] {
            cases.push((n, d));
        }
    }
    let runs: Vec<SimSummary> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, d))| sim(&single(n, d, PolicyKind::Optimal), 1_050_000, 1000 + i as u64))
        .collect();
    let mut pass = true;
    let mut notes = Vec::new();
    for (&(n, d), s) in cases.iter().zip(&runs) {
        let cfg = single(n, d, PolicyKind::Optimal);
        let (p_l, p_r) = (cfg.left.success_prob, cfg.right.success_prob);
        let floor_residual = s.mean_conditional_drift.unwrap();
        let noise = s.drift_residual.unwrap() / s.drift_residual_se.unwrap();
        pass &= s.violation_fraction == Some(0.0);
        pass &= floor_residual.abs() <= p_l.max(p_r) + p_l;
        pass &= noise.abs() <= 3.0;
        if n == 128 {
            pass &= floor_residual.abs() <= 0.05;
            notes.push(format!(
                "N=128 {d:?}: mean residual {floor_residual:.3} (limit 0.05), realised-minus-expected z={noise:.1}"
            ));
        }
    }
    let worst = runs.iter().map(|s| s.mean_conditional_drift.unwrap().abs()).fold(0.0, f64::max);
    verdict(pass, format!("worst |mean residual| {worst:.3} within floor bound; {}", notes.join(", ")))
}

fn chain_reproduction() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [16usize, 64] {
        let cfg = |k| ChainConfig::new(n, [20.0, 30.0, 20.0], k).unwrap().with_coherence_time(1e-3);
        let opt = run_chain(&cfg(PolicyKind::Optimal), 2_000_000, 100_000, SEED + 1100 + n as u64).unwrap();
        let eq = run_chain(&cfg(PolicyKind::Equal), 2_000_000, 100_000, SEED + 1200 + n as u64).unwrap();
        let std = chain_standard(&cfg(PolicyKind::Optimal), 2_000_000, SEED + 1300 + n as u64).unwrap();
        let z_eq = z(opt.mean_swap_fidelity, opt.fidelity_se, eq.mean_swap_fidelity, eq.fidelity_se);
        let z_std = z(opt.mean_swap_fidelity, opt.fidelity_se, std.mean_swap_fidelity, std.fidelity_se);
        let r_chain_std = n as f64 / chain_standard_cycle_mean(&cfg(PolicyKind::Optimal)).unwrap();
        let chain_gap = (r_chain_std - opt.rate_per_s) / r_chain_std;
        let single_cfg = single(n, (20.0, 30.0), PolicyKind::Optimal);
        let s = sim(&single_cfg, 2_000_000, 1400 + n as u64);
        let (r_std, _) = std_rate(n, &single_cfg.left, &single_cfg.right);
        let single_gap = (r_std - s.rate_per_s) / r_std;
        pass &= z_eq > 3.0 && z_std > 3.0 && chain_gap > single_gap;
        notes.push(format!(
            "N={n}: F opt>eq z={z_eq:.1}, F opt>std z={z_std:.1}, rate gap chain {chain_gap:.3} vs single {single_gap:.3}"
        ));
    }
    verdict(pass, notes.join(", "))
}

fn property_suite() -> Verdict {
    let config = Config { cases: PROPERTY_CASES, failure_persistence: None, ..Config::default() };
    let runner_for = |property: u64| {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&SEED.to_le_bytes());
        seed[8..16].copy_from_slice(&property.to_le_bytes());
        TestRunner::new_with_rng(config.clone(), TestRng::from_seed(RngAlgorithm::ChaCha, &seed))
    };
    let scenario = (
        2usize..48,
        1.0f64..80.0,
        1.0f64..80.0,
        prop::sample::select(PolicyKind::ALL.to_vec()),
        any::<u64>(),
    );
    let mut results = Vec::new();

    let mut runner = runner_for(1);
    let conservation = runner.run(&scenario, |(n, d_l, d_r, kind, seed)| {
        let mut rep = Repeater::new(single(n, (d_l, d_r), kind).with_coherence_time(1e-3)).unwrap();
        let mut rng = StreamKey::new(seed, 0, 0, Purpose::Test).stream();
        let mut state = RoundState::new();
        let mut out = RoundOutcome::default();
        for _ in 0..30 {
            rep.step(&mut state, &mut rng, &mut out);
            let lhs = 2 * out.matched as i64;
            let rhs = (out.x_left + out.x_right) as i64 + out.alpha_clipped.abs() - out.alpha_after.abs();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(out.alpha_after, out.alpha_clipped + out.x_left as i64 - out.x_right as i64);
        }
        Ok(())
    });
    results.push(("conservation", conservation.map_err(|e| e.to_string())));

    let mut runner = runner_for(2);
    let fifo = runner.run(&scenario, |(n, d_l, d_r, kind, seed)| {
        let mut rep = Repeater::new(single(n, (d_l, d_r), kind)).unwrap();
        let mut rng = StreamKey::new(seed, 1, 0, Purpose::Test).stream();
        let mut state = RoundState::new();
        let mut out = RoundOutcome::default();
        for _ in 0..30 {
            let before: Vec<u64> = state.ages().collect();
            let sign = state.alpha.signum();
            rep.step(&mut state, &mut rng, &mut out);
            // matched stored entanglements are the oldest of those kept after the cutoff
            let kept = &before[out.dropped..];
            let from_queue: Vec<u64> = out.matched_ages.iter().copied().filter(|&a| a > 0).collect();
            prop_assert_eq!(&from_queue[..], &kept[..from_queue.len()]);
            let after: Vec<u64> = state.ages().collect();
            prop_assert!(after.windows(2).all(|w| w[0] >= w[1]));
            if sign != 0 && state.alpha.signum() == sign {
                // survivors are the youngest of the old queue, one round older
                let carried = kept.len() - from_queue.len();
                let survivors: Vec<u64> = kept[from_queue.len()..].iter().map(|a| a + 1).collect();
                prop_assert_eq!(&after[..carried.min(after.len())], &survivors[..carried.min(after.len())]);
            }
        }
        Ok(())
    });
    results.push(("fifo", fifo.map_err(|e| e.to_string())));

    let mut runner = runner_for(3);
    let determinism = runner.run(&scenario, |(n, d_l, d_r, kind, seed)| {
        let trace = |seed: u64| {
            let mut rep = Repeater::new(single(n, (d_l, d_r), kind).with_coherence_time(1e-3)).unwrap();
            let mut rng = StreamKey::new(seed, 2, 0, Purpose::Test).stream();
            let mut state = RoundState::new();
            (0..20)
                .map(|_| {
                    let mut out = RoundOutcome::default();
                    rep.step(&mut state, &mut rng, &mut out);
                    out
                })
                .collect::<Vec<_>>()
        };
        let here = trace(seed);
        prop_assert_eq!(&here, &std::thread::scope(|s| s.spawn(|| trace(seed)).join().unwrap()));
        Ok(())
    });
    results.push(("determinism", determinism.map_err(|e| e.to_string())));

    let mut runner = runner_for(4);
    let gof_cases = (1usize..40, 0.02f64..0.98, any::<u64>(), any::<bool>());
    let gof = runner.run(&gof_cases, |(n, p, seed, tabulated)| {
        let mut rng = StreamKey::new(seed, 3, 0, Purpose::Test).stream();
        let table = BinomialTable::new(p, n).unwrap();
        let draws = 2000;
        let mut counts = vec![0u64; n + 1];
        for _ in 0..draws {
            let x = if tabulated { table.sample(n, &mut rng) } else { binomial(n as u64, p, &mut rng) as usize };
            counts[x] += 1;
        }
        let pv = gof_p_value(&counts, &binomial_pmf(n, p));
        prop_assert!(pv > 1e-7, "binomial({}, {}) p-value {}", n, p, pv);

        let geo = Geometric::new(p).unwrap();
        let mut counts = vec![0u64; 64];
        let pmf: Vec<f64> = (1..=64).map(|k: i32| p * (1.0 - p).powi(k - 1)).collect();
        let mut tail = pmf.clone();
        tail[63] = 1.0 - pmf[..63].iter().sum::<f64>();
        for _ in 0..draws {
            let k = geo.sample(&mut rng).min(64);
            counts[k as usize - 1] += 1;
        }
        let pv = gof_p_value(&counts, &tail);
        prop_assert!(pv > 1e-7, "geometric({}) p-value {}", p, pv);
        Ok(())
    });
    results.push(("rng gof", gof.map_err(|e| e.to_string())));

    let failed: Vec<String> =
        results.iter().filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}"))).collect();
    verdict(
        failed.is_empty(),
        format!(
            "{} properties x {PROPERTY_CASES} cases{}",
            results.len(),
            if failed.is_empty() { String::new() } else { format!("; {}", failed.join("; ")) }
        ),
    )
}

fn gof_p_value(counts: &[u64], pmf: &[f64]) -> f64 {
    let total = counts.iter().sum::<u64>() as f64;
    // pool adjacent bins until each expects at least 5; the tail joins the last cell
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(pmf) {
        obs += c as f64;
        exp += p * total;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => return 1.0,
    }
    if cells.len() < 2 {
        return 1.0;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((cells.len() - 1) as f64).unwrap().cdf(stat)
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "Lemma 2 dominance", lemma2_dominance),
        (3, "symmetric-case identity", symmetric_identity),
        (4, "standard repeater closed form", standard_closed_form),
        (5, "fidelity bound dominance", fidelity_dominance),
        (6, "qualitative orderings", qualitative_orderings),
        (7, "hard-cutoff regime shape", hard_cutoff_shape),
        (8, "zero-mean drift", zero_mean_drift),
        (9, "chain qualitative reproduction", chain_reproduction),
        (10, "invariant property suite", property_suite),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    let (mut passed, mut failed) = (0, 0);
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        let note = if !v.pass && EXPECTED_FAILURES.contains(&id) { " [expected]" } else { "" };
        println!("{status} {id:>2} {name}{note} ({:.0}s): {}", start.elapsed().as_secs_f64(), v.detail);
        if v.pass {
            passed += 1;
        } else {
            failed += 1;
            if !EXPECTED_FAILURES.contains(&id) {
                unexpected += 1;
            }
        }
    }
    println!("acceptance: {passed} passed, {failed} failed, {unexpected} unexpected");
    if unexpected == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
