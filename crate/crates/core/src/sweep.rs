//! Runs an [`ExperimentSpec`] over its grid and tabulates the results.
//!
//! Every (grid point, policy, replication) job owns its own random stream,
//! keyed by its position in the grid, so results do not depend on how the
//! worker pool schedules them. Rows come back in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::PolicyKind;
use crate::bounds::{bounds_report, std_rate};
use crate::chain::{chain_standard_cycle_mean, chain_standard_with, run_chain_with};
use crate::config::{ExperimentSpec, GridPoint, PolicyChoice, ScenarioKind};
use crate::engine::{run_standard_with, run_with, SimSummary};
use crate::error::{Error, Result};
use crate::oracle::{build_chain, stationary_stats};
use crate::stats::mean_se;
use crate::stochastics::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Run,
    Mean,
}

/// One output row. Columns that do not apply to a scenario or policy are
/// `None`; an infinite coherence time is written as `None` too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario: ScenarioKind,
    pub policy: PolicyChoice,
    pub row_kind: RowKind,
    pub replication: Option<u32>,
    pub n_memories: usize,
    pub d_left_km: f64,
    pub d_mid_km: Option<f64>,
    pub d_right_km: f64,
    pub coherence_time_s: Option<f64>,
    pub initial_fidelity: f64,
    pub seed: u64,
    pub rounds: u64,
    pub warmup: u64,
    pub tau_round_s: f64,
    pub mean_matched: Option<f64>,
    pub matched_se: Option<f64>,
    pub rate_per_s: Option<f64>,
    pub rate_se: Option<f64>,
    pub mean_fidelity: Option<f64>,
    pub fidelity_se: Option<f64>,
    pub mean_abs_alpha: Option<f64>,
    pub mean_age: Option<f64>,
    pub drops_per_round: Option<f64>,
    pub violation_fraction: Option<f64>,
    pub drift_residual: Option<f64>,
    pub mean_cycle_time_s: Option<f64>,
    pub idle_link1: Option<f64>,
    pub idle_link2: Option<f64>,
    pub idle_link3: Option<f64>,
    /// Exact rate of the sequential baseline for the same point.
    pub std_rate_per_s: Option<f64>,
    /// `(std_rate_per_s - rate_per_s) / std_rate_per_s`.
    pub rel_diff: Option<f64>,
    pub matched_lower_bound: Option<f64>,
    pub rate_lower_bound_per_s: Option<f64>,
    pub std_rate_lower_bound_per_s: Option<f64>,
    pub swap_fidelity_bound: Option<f64>,
}

fn fin(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn rel_diff(std: Option<f64>, rate: Option<f64>) -> Option<f64> {
    match (std, rate) {
        (Some(s), Some(r)) if s != 0.0 => fin((s - r) / s),
        _ => None,
    }
}

struct Job {
    point_index: usize,
    policy_index: usize,
    point: GridPoint,
    policy: PolicyChoice,
    replication: u32,
}

/// Analytical columns shared by every row of a point.
#[derive(Clone, Copy, Default)]
struct PointColumns {
    tau_round_s: f64,
    std_rate_per_s: Option<f64>,
    matched_lower_bound: Option<f64>,
    rate_lower_bound_per_s: Option<f64>,
    std_rate_lower_bound_per_s: Option<f64>,
    swap_fidelity_bound: Option<f64>,
}

fn point_columns(kind: ScenarioKind, point: &GridPoint) -> Result<PointColumns> {
    if kind == ScenarioKind::Chain {
        let cfg = point.chain(PolicyKind::Optimal)?;
        let n = point.n_memories as f64;
        return Ok(PointColumns {
            tau_round_s: cfg.tau_round()?,
            std_rate_per_s: fin(n / chain_standard_cycle_mean(&cfg)?),
            ..Default::default()
        });
    }
    let cfg = point.single(PolicyKind::Optimal)?;
    let rep = bounds_report(point.n_memories, &cfg.left, &cfg.right, point.coherence_time_s, point.initial_fidelity)?;
    let (exact, lower) = std_rate(point.n_memories, &cfg.left, &cfg.right);
    Ok(PointColumns {
        tau_round_s: cfg.tau_round(),
        std_rate_per_s: fin(exact),
        matched_lower_bound: fin(rep.matched_lower_bound),
        rate_lower_bound_per_s: fin(rep.rate_lower_bound_per_s),
        std_rate_lower_bound_per_s: fin(lower),
        swap_fidelity_bound: fin(rep.swap_fidelity_bound),
    })
}

fn purpose(kind: ScenarioKind, policy: PolicyChoice) -> Purpose {
    match (kind, policy) {
        (ScenarioKind::Chain, PolicyChoice::Standard) => Purpose::ChainStandard,
        (ScenarioKind::Chain, _) => Purpose::Chain,
        (_, PolicyChoice::Standard) => Purpose::Standard,
        _ => Purpose::Balanced,
    }
}

fn run_job(spec: &ExperimentSpec, job: &Job) -> Result<SimSummary> {
    let kind = spec.scenario.kind;
    let experiment = (job.point_index * spec.scenario.policies.len() + job.policy_index) as u64;
    let mut rng = StreamKey::new(spec.seed, experiment, job.replication as u64, purpose(kind, job.policy)).stream();
    let (rounds, warmup) = (spec.rounds, spec.warmup());
    match (kind, job.policy.kind()) {
        (ScenarioKind::Chain, Some(k)) => run_chain_with(&job.point.chain(k)?, rounds, warmup, spec.seed, &mut rng),
        (ScenarioKind::Chain, None) => {
            let cfg = job.point.chain(PolicyKind::Optimal)?;
            chain_standard_with(&cfg, rounds, spec.seed, &mut rng)
        }
        (_, Some(k)) => run_with(&job.point.single(k)?, rounds, warmup, spec.seed, &mut rng),
        (_, None) => {
            let cfg = job.point.single(PolicyKind::Optimal)?;
            run_standard_with(&cfg, rounds, spec.seed, &mut rng)
        }
    }
}

fn run_row(spec: &ExperimentSpec, job: &Job, s: &SimSummary, cols: &PointColumns) -> Row {
    let p = &job.point;
    let chain = spec.scenario.kind == ScenarioKind::Chain;
    let idle = |i: usize| s.idle_per_round.as_ref().and_then(|v| v.get(i).copied());
    let rate = fin(s.rate_per_s);
    Row {
        scenario: spec.scenario.kind,
        policy: job.policy,
        row_kind: RowKind::Run,
        replication: Some(job.replication),
        n_memories: p.n_memories,
        d_left_km: p.distances_km[0],
        d_mid_km: chain.then_some(p.distances_km[1]),
        d_right_km: if chain { p.distances_km[2] } else { p.distances_km[1] },
        coherence_time_s: fin(p.coherence_time_s),
        initial_fidelity: p.initial_fidelity,
        seed: spec.seed,
        rounds: s.rounds,
        warmup: s.warmup,
        tau_round_s: cols.tau_round_s,
        mean_matched: fin(s.mean_matched_per_round),
        matched_se: fin(s.matched_se),
        rate_per_s: rate,
        rate_se: fin(s.rate_se),
        mean_fidelity: fin(s.mean_swap_fidelity),
        fidelity_se: fin(s.fidelity_se),
        mean_abs_alpha: s.mean_abs_alpha.and_then(fin),
        mean_age: s.mean_age.and_then(fin),
        drops_per_round: s.drops_per_round.and_then(fin),
        violation_fraction: s.violation_fraction.and_then(fin),
        drift_residual: s.drift_residual.and_then(fin),
        mean_cycle_time_s: s.mean_cycle_time_s.and_then(fin),
        idle_link1: idle(0),
        idle_link2: idle(1),
        idle_link3: idle(2),
        std_rate_per_s: cols.std_rate_per_s,
        rel_diff: rel_diff(cols.std_rate_per_s, rate),
        matched_lower_bound: cols.matched_lower_bound,
        rate_lower_bound_per_s: cols.rate_lower_bound_per_s,
        std_rate_lower_bound_per_s: cols.std_rate_lower_bound_per_s,
        swap_fidelity_bound: cols.swap_fidelity_bound,
    }
}

/// Mean over replications; standard errors come from the spread across
/// replications when there are at least two, otherwise from the single run.
fn aggregate(runs: &[Row]) -> Row {
    let mut out = runs[0].clone();
    out.row_kind = RowKind::Mean;
    out.replication = None;
    let avg = |f: fn(&Row) -> Option<f64>| -> Option<f64> {
        let xs: Option<Vec<f64>> = runs.iter().map(f).collect();
        xs.map(|xs| mean_se(&xs).0)
    };
    let with_se = |f: fn(&Row) -> Option<f64>, se: fn(&Row) -> Option<f64>| -> (Option<f64>, Option<f64>) {
        let xs: Option<Vec<f64>> = runs.iter().map(f).collect();
        match xs {
            Some(xs) if xs.len() >= 2 => {
                let (m, e) = mean_se(&xs);
                (Some(m), Some(e))
            }
            Some(xs) => (Some(xs[0]), se(&runs[0])),
            None => (None, None),
        }
    };
    (out.mean_matched, out.matched_se) = with_se(|r| r.mean_matched, |r| r.matched_se);
    (out.rate_per_s, out.rate_se) = with_se(|r| r.rate_per_s, |r| r.rate_se);
    (out.mean_fidelity, out.fidelity_se) = with_se(|r| r.mean_fidelity, |r| r.fidelity_se);
    out.mean_abs_alpha = avg(|r| r.mean_abs_alpha);
    out.mean_age = avg(|r| r.mean_age);
    out.drops_per_round = avg(|r| r.drops_per_round);
    out.violation_fraction = avg(|r| r.violation_fraction);
    out.drift_residual = avg(|r| r.drift_residual);
    out.mean_cycle_time_s = avg(|r| r.mean_cycle_time_s);
    out.idle_link1 = avg(|r| r.idle_link1);
    out.idle_link2 = avg(|r| r.idle_link2);
    out.idle_link3 = avg(|r| r.idle_link3);
    out.rel_diff = rel_diff(out.std_rate_per_s, out.rate_per_s);
    out
}

/// Runs every job of `spec` and returns per-replication rows, each group
/// followed by its aggregate row.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let kind = spec.scenario.kind;
    let points = spec.points();
    let columns: Vec<PointColumns> = points.iter().map(|p| point_columns(kind, p)).collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (point_index, point) in points.iter().enumerate() {
        for (policy_index, &policy) in spec.scenario.policies.iter().enumerate() {
            for replication in 0..spec.replications {
                jobs.push(Job { point_index, policy_index, point: *point, policy, replication });
            }
        }
    }
    let runs: Vec<Row> = jobs
        .par_iter()
        .map(|job| run_job(spec, job).map(|s| run_row(spec, job, &s, &columns[job.point_index])))
        .collect::<Result<_>>()?;

    let reps = spec.replications as usize;
    let mut rows = Vec::with_capacity(runs.len() + runs.len() / reps);
    for group in runs.chunks(reps) {
        rows.extend_from_slice(group);
        rows.push(aggregate(group));
    }
    Ok(rows)
}

/// Analytical bounds for each single-repeater grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n_memories: usize,
    pub d_left_km: f64,
    pub d_right_km: f64,
    pub coherence_time_s: Option<f64>,
    pub initial_fidelity: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub tau_round_s: f64,
    pub eta: f64,
    pub expected_n_left: f64,
    pub expected_n_right: f64,
    pub matched_lower_bound: f64,
    pub vacuous_bound: bool,
    pub rate_lower_bound_per_s: f64,
    pub std_rate_per_s: f64,
    pub std_rate_lower_bound_per_s: f64,
    pub var_alpha_upper: f64,
    pub age_bound: f64,
    pub fidelity_bound: f64,
    pub swap_fidelity_bound: f64,
}

pub fn bounds_table(spec: &ExperimentSpec) -> Result<Vec<BoundsRow>> {
    spec.validate()?;
    if spec.scenario.kind == ScenarioKind::Chain {
        return Err(Error::config("scenario.kind", "bounds are defined for a single repeater"));
    }
    spec.points()
        .iter()
        .map(|p| {
            let cfg = p.single(PolicyKind::Optimal)?;
            let r = bounds_report(p.n_memories, &cfg.left, &cfg.right, p.coherence_time_s, p.initial_fidelity)?;
            Ok(BoundsRow {
                n_memories: p.n_memories,
                d_left_km: p.distances_km[0],
                d_right_km: p.distances_km[1],
                coherence_time_s: fin(p.coherence_time_s),
                initial_fidelity: p.initial_fidelity,
                p_left: r.p_left,
                p_right: r.p_right,
                tau_round_s: r.tau_round_s,
                eta: r.eta,
                expected_n_left: r.expected_n_left,
                expected_n_right: r.expected_n_right,
                matched_lower_bound: r.matched_lower_bound,
                vacuous_bound: r.vacuous_bound,
                rate_lower_bound_per_s: r.rate_lower_bound_per_s,
                std_rate_per_s: r.std_rate_per_s,
                std_rate_lower_bound_per_s: r.std_rate_lower_bound_per_s,
                var_alpha_upper: r.var_alpha_upper,
                age_bound: r.age_bound,
                fidelity_bound: r.fidelity_bound,
                swap_fidelity_bound: r.swap_fidelity_bound,
            })
        })
        .collect()
}

/// Exact stationary mismatch law, one row per reachable mismatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n_memories: usize,
    pub d_left_km: f64,
    pub d_right_km: f64,
    pub policy: PolicyChoice,
    pub alpha: i64,
    pub probability: f64,
    pub ergodic: bool,
    pub e_matched: f64,
    pub e_abs_alpha: f64,
    pub var_alpha: f64,
    pub violation_prob: f64,
    pub e_dropped: f64,
}

pub fn oracle_table(spec: &ExperimentSpec) -> Result<Vec<OracleRow>> {
    spec.validate()?;
    if spec.scenario.kind == ScenarioKind::Chain {
        return Err(Error::config("scenario.kind", "the oracle covers a single repeater"));
    }
    let mut rows = Vec::new();
    let mut seen = Vec::new();
    for p in spec.points() {
        // the mismatch law ignores coherence time and initial fidelity
        let key = (p.n_memories, p.distances_km[0].to_bits(), p.distances_km[1].to_bits());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let cfg = p.single(PolicyKind::Optimal)?;
        for &policy in &spec.scenario.policies {
            let Some(kind) = policy.kind() else { continue };
            let chain = build_chain(p.n_memories, cfg.left.success_prob, cfg.right.success_prob, kind)?;
            let st = stationary_stats(&chain);
            for (alpha, prob) in chain.pmf() {
                rows.push(OracleRow {
                    n_memories: p.n_memories,
                    d_left_km: p.distances_km[0],
                    d_right_km: p.distances_km[1],
                    policy,
                    alpha,
                    probability: prob,
                    ergodic: st.ergodic,
                    e_matched: st.e_matched,
                    e_abs_alpha: st.e_abs_alpha,
                    var_alpha: st.var_alpha,
                    violation_prob: st.violation_prob,
                    e_dropped: st.e_dropped,
                });
            }
        }
    }
    Ok(rows)
}
