//! Round-based simulation of the balanced repeater and the sequential
//! standard-repeater baseline.
//!
//! A balanced round has two phases. Both banks attempt generation in
//! parallel, then every available left entanglement is paired with a right
//! one. Stored (unmatched) entanglements always sit on one side, given by the
//! sign of the mismatch, and are paired oldest first with fresh partners.

use std::collections::{BTreeMap, VecDeque};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Decision, Policy, PolicyKind};
use crate::error::{Error, Result};
use crate::fidelity::{decay_after, swap_fidelity, AgeFidelityTable};
use crate::link::{round_time, LinkParams};
use crate::stats::{BatchMeans, RatioBatches, Welford};
use crate::stochastics::{BinomialTable, Geometric, Purpose, Stream, StreamKey};

/// Which link a standard-repeater memory serves first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardOrder {
    #[default]
    LeftFirst,
    RightFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeaterConfig {
    pub n_memories: usize,
    pub left: LinkParams<f64>,
    pub right: LinkParams<f64>,
    pub coherence_time_s: f64,
    pub initial_fidelity: f64,
    pub policy: PolicyKind,
    #[serde(default)]
    pub standard_order: StandardOrder,
}

impl RepeaterConfig {
    /// Fiber links at default attenuation, `F0 = 1`, no decoherence.
    pub fn new(n_memories: usize, d_left_km: f64, d_right_km: f64, policy: PolicyKind) -> Result<Self> {
        let cfg = RepeaterConfig {
            n_memories,
            left: LinkParams::fiber(d_left_km)?,
            right: LinkParams::fiber(d_right_km)?,
            coherence_time_s: f64::INFINITY,
            initial_fidelity: 1.0,
            policy,
            standard_order: StandardOrder::LeftFirst,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Arbitrary links, `F0 = 1`, no decoherence.
    pub fn from_links(n_memories: usize, left: LinkParams<f64>, right: LinkParams<f64>, policy: PolicyKind) -> Self {
        RepeaterConfig {
            n_memories,
            left,
            right,
            coherence_time_s: f64::INFINITY,
            initial_fidelity: 1.0,
            policy,
            standard_order: StandardOrder::LeftFirst,
        }
    }

    pub fn with_coherence_time(mut self, t_c_s: f64) -> Self {
        self.coherence_time_s = t_c_s;
        self
    }

    pub fn with_initial_fidelity(mut self, f0: f64) -> Self {
        self.initial_fidelity = f0;
        self
    }

    pub fn with_policy(mut self, policy: PolicyKind) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_memories < 2 {
            return Err(Error::param("n_memories", format!("need at least 2 memories, got {}", self.n_memories)));
        }
        if !(self.coherence_time_s > 0.0) {
            return Err(Error::param("coherence_time_s", format!("must be > 0, got {}", self.coherence_time_s)));
        }
        if !(0.25..=1.0).contains(&self.initial_fidelity) {
            return Err(Error::param(
                "initial_fidelity",
                format!("must lie in [0.25, 1], got {}", self.initial_fidelity),
            ));
        }
        Ok(())
    }

    pub fn tau_round(&self) -> f64 {
        round_time(&self.left, &self.right)
    }
}

/// Mismatch and FIFO of stored entanglements entering a round.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundState {
    pub alpha: i64,
    // Round index at which each stored entanglement was generated, oldest
    // first; its age at round t is t - birth.
    births: VecDeque<u64>,
    pub round_index: u64,
}

impl RoundState {
    pub fn new() -> Self {
        Self::default()
    }

    /// State with `alpha` stored entanglements of the given ages (oldest
    /// first) at round `round_index`.
    pub fn with_stored(alpha: i64, ages: &[u64], round_index: u64) -> Result<Self> {
        if ages.len() as u64 != alpha.unsigned_abs() {
            return Err(Error::Invariant(format!("{} ages for mismatch {alpha}", ages.len())));
        }
        if ages.iter().any(|&a| a == 0 || a > round_index) || ages.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invariant(format!("ages {ages:?} not a FIFO at round {round_index}")));
        }
        Ok(RoundState { alpha, births: ages.iter().map(|a| round_index - a).collect(), round_index })
    }

    /// Ages in rounds, oldest first.
    pub fn ages(&self) -> impl Iterator<Item = u64> + '_ {
        self.births.iter().map(move |b| self.round_index - b)
    }

    pub fn stored(&self) -> usize {
        self.births.len()
    }

    pub fn check(&self, n_memories: usize) -> Result<()> {
        if self.births.len() as u64 != self.alpha.unsigned_abs() {
            return Err(Error::Invariant(format!(
                "queue holds {} entanglements but mismatch is {}",
                self.births.len(),
                self.alpha
            )));
        }
        if self.alpha.unsigned_abs() as usize >= n_memories {
            return Err(Error::Invariant(format!("mismatch {} with {n_memories} memories", self.alpha)));
        }
        if self.births.iter().any(|&b| b >= self.round_index)
            || self.births.iter().zip(self.births.iter().skip(1)).any(|(a, b)| a > b)
        {
            return Err(Error::Invariant("stored ages are not a FIFO".into()));
        }
        Ok(())
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundOutcome {
    /// Mismatch entering the round, before any cutoff.
    pub alpha_before: i64,
    /// Mismatch after the cutoff, the one generation was conditioned on.
    pub alpha_clipped: i64,
    pub alpha_after: i64,
    pub dropped: usize,
    pub allocation: Allocation,
    pub free_left: usize,
    pub free_right: usize,
    pub x_left: usize,
    pub x_right: usize,
    pub matched: usize,
    pub swapped_fidelities: Vec<f64>,
    /// Age of the older partner of each match; 0 for two fresh entanglements.
    pub matched_ages: Vec<u64>,
    pub violated: bool,
}

/// A configured balanced repeater: policy, samplers and fidelity cache.
#[derive(Debug, Clone)]
pub struct Repeater {
    cfg: RepeaterConfig,
    policy: Policy<f64>,
    tau_round: f64,
    left_gen: BinomialTable,
    right_gen: BinomialTable,
    fidelity: AgeFidelityTable,
}

impl Repeater {
    pub fn new(cfg: RepeaterConfig) -> Result<Self> {
        cfg.validate()?;
        let (p_l, p_r) = (cfg.left.success_prob, cfg.right.success_prob);
        let tau_round = cfg.tau_round();
        Ok(Repeater {
            policy: Policy::new(cfg.policy, cfg.n_memories, p_l, p_r)?,
            tau_round,
            left_gen: BinomialTable::new(p_l, cfg.n_memories)?,
            right_gen: BinomialTable::new(p_r, cfg.n_memories)?,
            fidelity: AgeFidelityTable::new(tau_round, cfg.coherence_time_s, cfg.initial_fidelity)?,
            cfg,
        })
    }

    pub fn config(&self) -> &RepeaterConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &Policy<f64> {
        &self.policy
    }

    pub fn tau_round(&self) -> f64 {
        self.tau_round
    }

    /// Start-of-round phase: hard cutoff (dropping the oldest) and
    /// allocation. Mutates the state only when entanglements are dropped.
    pub fn prepare(&self, state: &mut RoundState) -> Decision {
        let decision = self.policy.decide(state.alpha);
        if decision.dropped > 0 {
            state.births.drain(..decision.dropped);
            state.alpha = decision.alpha;
        }
        decision
    }

    /// Matching and swapping phase for given generation counts. Clears and
    /// fills `out`.
    pub fn settle(
        &mut self,
        state: &mut RoundState,
        decision: &Decision,
        x_left: usize,
        x_right: usize,
        out: &mut RoundOutcome,
    ) {
        debug_assert_eq!(state.alpha, decision.alpha);
        debug_assert!(x_left <= decision.free_left && x_right <= decision.free_right);
        let t = state.round_index;
        let alpha = state.alpha;
        let stored = state.births.len();
        let (same_fresh, opposite_fresh) = if alpha >= 0 { (x_left, x_right) } else { (x_right, x_left) };

        out.swapped_fidelities.clear();
        out.matched_ages.clear();
        // stored entanglements first, oldest first, each with a fresh partner
        let from_queue = stored.min(opposite_fresh);
        for birth in state.births.drain(..from_queue) {
            let age = t - birth;
            out.matched_ages.push(age);
            out.swapped_fidelities.push(self.fidelity.with_fresh(age));
        }
        let fresh_pairs = same_fresh.min(opposite_fresh - from_queue);
        if fresh_pairs > 0 {
            let f0 = self.fidelity.initial();
            let fresh = swap_fidelity(f0, f0);
            out.matched_ages.extend(std::iter::repeat_n(0, fresh_pairs));
            out.swapped_fidelities.extend(std::iter::repeat_n(fresh, fresh_pairs));
        }

        let alpha_after = alpha + x_left as i64 - x_right as i64;
        let newcomers = alpha_after.unsigned_abs() as usize - state.births.len();
        state.births.extend(std::iter::repeat_n(t, newcomers));
        state.alpha = alpha_after;
        state.round_index += 1;

        out.alpha_clipped = alpha;
        out.alpha_after = alpha_after;
        out.dropped = decision.dropped;
        out.allocation = decision.allocation;
        out.free_left = decision.free_left;
        out.free_right = decision.free_right;
        out.x_left = x_left;
        out.x_right = x_right;
        out.matched = from_queue + fresh_pairs;
        out.violated = decision.violated;
    }

    /// One full round: cutoff, allocation, generation, matching.
    pub fn step<R: RngCore + ?Sized>(&mut self, state: &mut RoundState, rng: &mut R, out: &mut RoundOutcome) {
        let alpha_before = state.alpha;
        let decision = self.prepare(state);
        let x_left = self.left_gen.sample(decision.free_left, rng);
        let x_right = self.right_gen.sample(decision.free_right, rng);
        self.settle(state, &decision, x_left, x_right, out);
        out.alpha_before = alpha_before;
    }

    /// `E[alpha(t+1) | alpha(t)]` for the decision taken this round.
    pub fn conditional_mean(&self, decision_alpha: i64, free_left: usize, free_right: usize) -> f64 {
        decision_alpha as f64 + self.cfg.left.success_prob * free_left as f64
            - self.cfg.right.success_prob * free_right as f64
    }
}

pub fn step_round<R: RngCore + ?Sized>(state: &mut RoundState, repeater: &mut Repeater, rng: &mut R) -> RoundOutcome {
    let mut out = RoundOutcome::default();
    repeater.step(state, rng, &mut out);
    out
}

/// Stationary estimates from one run. Fields that do not apply to a scenario
/// are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    /// Measured rounds (balanced) or cycles (standard), after warmup.
    pub rounds: u64,
    pub warmup: u64,
    pub seed: u64,
    pub tau_round_s: f64,
    /// Matched pairs per balanced round; for the standard baseline this is
    /// the rate times the balanced round time.
    pub mean_matched_per_round: f64,
    pub matched_se: f64,
    pub rate_per_s: f64,
    pub rate_se: f64,
    pub mean_swap_fidelity: f64,
    pub fidelity_se: f64,
    pub mean_abs_alpha: Option<f64>,
    pub abs_alpha_se: Option<f64>,
    /// Mean age (rounds) of the older partner over all matches.
    pub mean_age: Option<f64>,
    /// Distribution of the mismatch entering a round.
    pub empirical_alpha_pmf: BTreeMap<i64, f64>,
    pub drops_per_round: Option<f64>,
    pub violation_fraction: Option<f64>,
    /// Mean of `alpha(t+1) - E[alpha(t+1) | alpha(t)]`.
    pub drift_residual: Option<f64>,
    pub drift_residual_se: Option<f64>,
    /// Time average of `E[alpha(t+1) | alpha(t)]` itself.
    pub mean_conditional_drift: Option<f64>,
    pub mean_cycle_time_s: Option<f64>,
    pub cycle_time_se: Option<f64>,
    /// Mean idle memories per round on each chain link.
    pub idle_per_round: Option<Vec<f64>>,
}

impl SimSummary {
    pub(crate) fn empty(rounds: u64, warmup: u64, seed: u64, tau_round_s: f64) -> Self {
        SimSummary {
            rounds,
            warmup,
            seed,
            tau_round_s,
            mean_matched_per_round: f64::NAN,
            matched_se: f64::NAN,
            rate_per_s: f64::NAN,
            rate_se: f64::NAN,
            mean_swap_fidelity: f64::NAN,
            fidelity_se: f64::NAN,
            mean_abs_alpha: None,
            abs_alpha_se: None,
            mean_age: None,
            empirical_alpha_pmf: BTreeMap::new(),
            drops_per_round: None,
            violation_fraction: None,
            drift_residual: None,
            drift_residual_se: None,
            mean_conditional_drift: None,
            mean_cycle_time_s: None,
            cycle_time_se: None,
            idle_per_round: None,
        }
    }
}

/// Warmup used when none is given: 10% of the rounds, at least 1000, and
/// always leaving at least one measured round.
pub fn default_warmup(rounds: u64) -> u64 {
    (rounds / 10).max(1000).min(rounds.saturating_sub(1))
}

/// Runs the balanced repeater from an empty state for `rounds` rounds,
/// discarding the first `warmup`.
pub fn run(cfg: &RepeaterConfig, rounds: u64, warmup: u64, seed: u64) -> Result<SimSummary> {
    let mut rng = StreamKey::new(seed, 0, 0, Purpose::Balanced).stream();
    run_with(cfg, rounds, warmup, seed, &mut rng)
}

/// [`run`] on a caller-provided stream; `seed` is only recorded.
pub fn run_with(cfg: &RepeaterConfig, rounds: u64, warmup: u64, seed: u64, rng: &mut Stream) -> Result<SimSummary> {
    if rounds <= warmup {
        return Err(Error::param("rounds", format!("rounds ({rounds}) must exceed warmup ({warmup})")));
    }
    let mut rep = Repeater::new(*cfg)?;
    let n = cfg.n_memories;
    let measured = rounds - warmup;
    let mut state = RoundState::new();
    let mut out = RoundOutcome::default();
    for _ in 0..warmup {
        rep.step(&mut state, rng, &mut out);
    }
    state.check(n)?;

    let mut matched = BatchMeans::new(measured);
    let mut abs_alpha = BatchMeans::new(measured);
    let mut residual = BatchMeans::new(measured);
    let mut fidelity = RatioBatches::new(measured);
    let mut cond_sum = 0.0;
    let mut age_sum = 0.0f64;
    let mut match_count = 0u64;
    let mut drops = 0u64;
    let mut violations = 0u64;
    let mut pmf = vec![0u64; 2 * n - 1];
    let offset = n as i64 - 1;

    for _ in 0..measured {
        pmf[(state.alpha + offset) as usize] += 1;
        rep.step(&mut state, rng, &mut out);
        if out.alpha_after.unsigned_abs() as usize >= n {
            return Err(Error::Invariant(format!("mismatch {} reached N = {n}", out.alpha_after)));
        }
        let cond = rep.conditional_mean(out.alpha_clipped, out.free_left, out.free_right);
        cond_sum += cond;
        residual.push(out.alpha_after as f64 - cond);
        matched.push(out.matched as f64);
        abs_alpha.push(out.alpha_before.unsigned_abs() as f64);
        fidelity.push(out.swapped_fidelities.iter().sum(), out.matched as f64);
        age_sum += out.matched_ages.iter().sum::<u64>() as f64;
        match_count += out.matched as u64;
        drops += out.dropped as u64;
        violations += out.violated as u64;
    }
    state.check(n)?;

    let tau = rep.tau_round();
    let m = measured as f64;
    let mut s = SimSummary::empty(measured, warmup, seed, tau);
    s.mean_matched_per_round = matched.mean();
    s.matched_se = matched.std_error();
    s.rate_per_s = s.mean_matched_per_round / tau;
    s.rate_se = s.matched_se / tau;
    s.mean_swap_fidelity = fidelity.mean();
    s.fidelity_se = fidelity.std_error();
    s.mean_abs_alpha = Some(abs_alpha.mean());
    s.abs_alpha_se = Some(abs_alpha.std_error());
    s.mean_age = Some(if match_count > 0 { age_sum / match_count as f64 } else { f64::NAN });
    s.empirical_alpha_pmf = pmf
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as i64 - offset, c as f64 / m))
        .collect();
    s.drops_per_round = Some(drops as f64 / m);
    s.violation_fraction = Some(violations as f64 / m);
    s.drift_residual = Some(residual.mean());
    s.drift_residual_se = Some(residual.std_error());
    s.mean_conditional_drift = Some(cond_sum / m);
    Ok(s)
}

/// One standard-repeater memory cycle: first link, then the second, then swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardCycle {
    pub cycle_time_s: f64,
    /// Time the first entanglement waited for the second.
    pub wait_s: f64,
    pub swapped_fidelity: f64,
}

/// Sequential standard repeater.
#[derive(Debug, Clone)]
pub struct StandardRepeater {
    first: (Geometric, f64),
    second: (Geometric, f64),
    t_c: f64,
    f0: f64,
}

impl StandardRepeater {
    pub fn new(cfg: &RepeaterConfig) -> Result<Self> {
        cfg.validate()?;
        let left = (Geometric::new(cfg.left.success_prob)?, cfg.left.trip_time_s);
        let right = (Geometric::new(cfg.right.success_prob)?, cfg.right.trip_time_s);
        let (first, second) = match cfg.standard_order {
            StandardOrder::LeftFirst => (left, right),
            StandardOrder::RightFirst => (right, left),
        };
        Ok(StandardRepeater { first, second, t_c: cfg.coherence_time_s, f0: cfg.initial_fidelity })
    }

    pub fn cycle<R: RngCore + ?Sized>(&self, rng: &mut R) -> StandardCycle {
        let t_first = self.first.0.sample(rng) as f64 * self.first.1;
        let wait = self.second.0.sample(rng) as f64 * self.second.1;
        let stored = decay_after(wait, self.t_c, self.f0);
        StandardCycle { cycle_time_s: t_first + wait, wait_s: wait, swapped_fidelity: swap_fidelity(stored, self.f0) }
    }
}

/// Simulates `n_pairs` cycles of one standard-repeater memory. The `N`
/// memories run independent copies of the same renewal process, so the rate
/// is `N / mean cycle time`.
pub fn run_standard(cfg: &RepeaterConfig, n_pairs: u64, seed: u64) -> Result<SimSummary> {
    let mut rng = StreamKey::new(seed, 0, 0, Purpose::Standard).stream();
    run_standard_with(cfg, n_pairs, seed, &mut rng)
}

pub fn run_standard_with(cfg: &RepeaterConfig, n_pairs: u64, seed: u64, rng: &mut Stream) -> Result<SimSummary> {
    if n_pairs == 0 {
        return Err(Error::param("n_pairs", "need at least one cycle"));
    }
    let std_rep = StandardRepeater::new(cfg)?;
    let mut cycle = Welford::default();
    let mut fid = Welford::default();
    for _ in 0..n_pairs {
        let c = std_rep.cycle(rng);
        cycle.push(c.cycle_time_s);
        fid.push(c.swapped_fidelity);
    }
    let n = cfg.n_memories as f64;
    let tau = cfg.tau_round();
    let mean_cycle = cycle.mean();
    let mut s = SimSummary::empty(n_pairs, 0, seed, tau);
    s.rate_per_s = n / mean_cycle;
    s.rate_se = n * cycle.std_error() / (mean_cycle * mean_cycle);
    s.mean_matched_per_round = s.rate_per_s * tau;
    s.matched_se = s.rate_se * tau;
    s.mean_swap_fidelity = fid.mean();
    s.fidelity_se = fid.std_error();
    s.mean_cycle_time_s = Some(mean_cycle);
    s.cycle_time_se = Some(cycle.std_error());
    Ok(s)
}
