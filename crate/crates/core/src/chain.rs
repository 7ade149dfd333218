//! Two-repeater chain `Q1 - R1 - R2 - Q2` under the greedy synchronous
//! protocol, and its sequential standard-repeater counterpart.
//!
//! Links are indexed `0 = Q1R1`, `1 = R1R2`, `2 = R2Q2`. Every round each
//! repeater splits its memories between its two links from its local
//! mismatch, each link attempts generation with the smaller of the two
//! offers (the excess idles), and an end-to-end pair completes whenever all
//! three links hold an entanglement.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Policy, PolicyKind};
use crate::engine::SimSummary;
use crate::error::{Error, Result};
use crate::fidelity::{decay_after, swap_fidelity, AgeFidelityTable};
use crate::link::{make_link, LinkParams, DEFAULT_ATTENUATION_DB_PER_KM, FIBER_LIGHT_SPEED_KM_PER_S};
use crate::stats::{BatchMeans, RatioBatches, Welford};
use crate::stochastics::{BinomialTable, Geometric, Purpose, Stream, StreamKey};

pub const LINKS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_memories: usize,
    pub distances_km: [f64; LINKS],
    pub attenuation_db_per_km: f64,
    pub light_speed_km_per_s: f64,
    pub coherence_time_s: f64,
    pub initial_fidelity: f64,
    pub policy: PolicyKind,
}

impl ChainConfig {
    pub fn new(n_memories: usize, distances_km: [f64; LINKS], policy: PolicyKind) -> Result<Self> {
        let cfg = ChainConfig {
            n_memories,
            distances_km,
            attenuation_db_per_km: DEFAULT_ATTENUATION_DB_PER_KM,
            light_speed_km_per_s: FIBER_LIGHT_SPEED_KM_PER_S,
            coherence_time_s: f64::INFINITY,
            initial_fidelity: 1.0,
            policy,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_coherence_time(mut self, t_c_s: f64) -> Self {
        self.coherence_time_s = t_c_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_memories < 2 {
            return Err(Error::param("n_memories", format!("need at least 2 memories, got {}", self.n_memories)));
        }
        if self.policy == PolicyKind::HardCutoff {
            return Err(Error::param("policy", "hard_cutoff is only defined for a single repeater"));
        }
        if !(self.coherence_time_s > 0.0) {
            return Err(Error::param("coherence_time_s", format!("must be > 0, got {}", self.coherence_time_s)));
        }
        if !(0.25..=1.0).contains(&self.initial_fidelity) {
            return Err(Error::param("initial_fidelity", format!("must lie in [0.25, 1], got {}", self.initial_fidelity)));
        }
        self.links().map(|_| ())
    }

    pub fn links(&self) -> Result<[LinkParams<f64>; LINKS]> {
        let mut out = [LinkParams::fiber(1.0)?; LINKS];
        for (slot, &d) in out.iter_mut().zip(&self.distances_km) {
            *slot = make_link(d, self.attenuation_db_per_km, self.light_speed_km_per_s)?;
        }
        Ok(out)
    }

    /// Synchronous round: the slowest link sets the pace.
    pub fn tau_round(&self) -> Result<f64> {
        Ok(self.links()?.iter().map(|l| l.trip_time_s).fold(0.0, f64::max))
    }
}

/// Live entanglements per link, as FIFO birth rounds (oldest first).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkPool {
    pools: [VecDeque<u64>; LINKS],
    pub round_index: u64,
}

impl LinkPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sizes(&self) -> [usize; LINKS] {
        [self.pools[0].len(), self.pools[1].len(), self.pools[2].len()]
    }

    pub fn ages(&self, link: usize) -> impl Iterator<Item = u64> + '_ {
        self.pools[link].iter().map(move |b| self.round_index - b)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainRoundOutcome {
    /// Bank split at R1 and R2 (left = towards Q1).
    pub allocations: [Allocation; 2],
    /// Free memories each endpoint offers a link: `[near Q1 side, near Q2 side]`.
    pub offers: [[usize; 2]; LINKS],
    pub attempts: [usize; LINKS],
    pub idle: [usize; LINKS],
    pub generated: [usize; LINKS],
    pub completions: usize,
    pub fidelities: Vec<f64>,
}

/// A configured chain.
#[derive(Debug, Clone)]
pub struct Chain {
    cfg: ChainConfig,
    repeaters: [Policy<f64>; 2],
    generators: Arc<[BinomialTable; LINKS]>,
    fidelity: AgeFidelityTable,
    tau_round: f64,
}

impl Chain {
    pub fn new(cfg: ChainConfig) -> Result<Self> {
        cfg.validate()?;
        let links = cfg.links()?;
        let p = links.map(|l| l.success_prob);
        let n = cfg.n_memories;
        let tau_round = cfg.tau_round()?;
        Ok(Chain {
            repeaters: [Policy::new(cfg.policy, n, p[0], p[1])?, Policy::new(cfg.policy, n, p[1], p[2])?],
            generators: Arc::new([BinomialTable::new(p[0], n)?, BinomialTable::new(p[1], n)?, BinomialTable::new(p[2], n)?]),
            fidelity: AgeFidelityTable::new(tau_round, cfg.coherence_time_s, cfg.initial_fidelity)?,
            tau_round,
            cfg,
        })
    }

    pub fn tau_round(&self) -> f64 {
        self.tau_round
    }

    /// Bank split at a repeater holding `left` and `right` stored
    /// entanglements: the policy's choice for the local mismatch, widened so
    /// both stored sets fit.
    fn split(&self, which: usize, left: usize, right: usize) -> Allocation {
        let n = self.cfg.n_memories;
        let alpha = left as i64 - right as i64;
        let requested = self.repeaters[which].decide(alpha).requested;
        let n_left = requested.n_left.clamp(left, n - right);
        Allocation { n_left, n_right: n - n_left }
    }

    fn fidelity_at(&mut self, age: u64) -> f64 {
        self.fidelity.stored(age)
    }

    /// Runs one round with generation counts drawn by `generate(link, attempts)`.
    pub fn step_with(
        &mut self,
        state: &mut LinkPool,
        mut generate: impl FnMut(usize, usize) -> usize,
        out: &mut ChainRoundOutcome,
    ) {
        let n = self.cfg.n_memories;
        let [s0, s1, s2] = state.sizes();
        let r1 = self.split(0, s0, s1);
        let r2 = self.split(1, s1, s2);
        out.allocations = [r1, r2];
        out.offers = [
            [n - s0, r1.n_left - s0],
            [r1.n_right - s1, r2.n_left - s1],
            [r2.n_right - s2, n - s2],
        ];
        let t = state.round_index;
        for link in 0..LINKS {
            let [a, b] = out.offers[link];
            out.attempts[link] = a.min(b);
            out.idle[link] = a.abs_diff(b);
            let x = generate(link, out.attempts[link]);
            out.generated[link] = x;
            state.pools[link].extend(std::iter::repeat_n(t, x));
        }

        let m = state.sizes().into_iter().min().unwrap_or(0);
        out.completions = m;
        out.fidelities.clear();
        for _ in 0..m {
            let mut f = [0.0; LINKS];
            for (link, slot) in f.iter_mut().enumerate() {
                let birth = state.pools[link].pop_front().expect("pool holds at least m entanglements");
                *slot = self.fidelity_at(t - birth);
            }
            out.fidelities.push(swap_fidelity(swap_fidelity(f[0], f[1]), f[2]));
        }
        state.round_index += 1;
    }

    pub fn step<R: RngCore + ?Sized>(&mut self, state: &mut LinkPool, rng: &mut R, out: &mut ChainRoundOutcome) {
        let generators = Arc::clone(&self.generators);
        self.step_with(state, |link, attempts| generators[link].sample(attempts, rng), out);
    }
}

pub fn chain_step<R: RngCore + ?Sized>(state: &mut LinkPool, chain: &mut Chain, rng: &mut R) -> ChainRoundOutcome {
    let mut out = ChainRoundOutcome::default();
    chain.step(state, rng, &mut out);
    out
}

pub fn run_chain(cfg: &ChainConfig, rounds: u64, warmup: u64, seed: u64) -> Result<SimSummary> {
    let mut rng = StreamKey::new(seed, 0, 0, Purpose::Chain).stream();
    run_chain_with(cfg, rounds, warmup, seed, &mut rng)
}

pub fn run_chain_with(cfg: &ChainConfig, rounds: u64, warmup: u64, seed: u64, rng: &mut Stream) -> Result<SimSummary> {
    if rounds <= warmup {
        return Err(Error::param("rounds", format!("rounds ({rounds}) must exceed warmup ({warmup})")));
    }
    let mut chain = Chain::new(*cfg)?;
    let generators = Arc::clone(&chain.generators);
    let measured = rounds - warmup;
    let mut state = LinkPool::new();
    let mut out = ChainRoundOutcome::default();
    for _ in 0..warmup {
        chain.step_with(&mut state, |l, a| generators[l].sample(a, rng), &mut out);
    }
    let mut completions = BatchMeans::new(measured);
    let mut fidelity = RatioBatches::new(measured);
    let mut idle = [0u64; LINKS];
    for _ in 0..measured {
        chain.step_with(&mut state, |l, a| generators[l].sample(a, rng), &mut out);
        completions.push(out.completions as f64);
        fidelity.push(out.fidelities.iter().sum(), out.completions as f64);
        for (acc, &i) in idle.iter_mut().zip(&out.idle) {
            *acc += i as u64;
        }
        if state.sizes().iter().any(|&s| s > cfg.n_memories) {
            return Err(Error::Invariant(format!("link pool exceeds {} memories", cfg.n_memories)));
        }
    }
    let tau = chain.tau_round();
    let m = measured as f64;
    let mut s = SimSummary::empty(measured, warmup, seed, tau);
    s.mean_matched_per_round = completions.mean();
    s.matched_se = completions.std_error();
    s.rate_per_s = s.mean_matched_per_round / tau;
    s.rate_se = s.matched_se / tau;
    s.mean_swap_fidelity = fidelity.mean();
    s.fidelity_se = fidelity.std_error();
    s.idle_per_round = Some(idle.iter().map(|&i| i as f64 / m).collect());
    Ok(s)
}

/// One sequential chain cycle: both outer links in parallel, then the middle
/// link, then the double swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCycle {
    pub cycle_time_s: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct StandardChain {
    geo: [Geometric; LINKS],
    tau: [f64; LINKS],
    t_c: f64,
    f0: f64,
}

impl StandardChain {
    pub fn new(cfg: &ChainConfig) -> Result<Self> {
        cfg.validate()?;
        let links = cfg.links()?;
        Ok(StandardChain {
            geo: [
                Geometric::new(links[0].success_prob)?,
                Geometric::new(links[1].success_prob)?,
                Geometric::new(links[2].success_prob)?,
            ],
            tau: links.map(|l| l.trip_time_s),
            t_c: cfg.coherence_time_s,
            f0: cfg.initial_fidelity,
        })
    }

    pub fn cycle<R: RngCore + ?Sized>(&self, rng: &mut R) -> ChainCycle {
        let outer_left = self.geo[0].sample(rng) as f64 * self.tau[0];
        let outer_right = self.geo[2].sample(rng) as f64 * self.tau[2];
        let stage1 = outer_left.max(outer_right);
        let cycle = stage1 + self.geo[1].sample(rng) as f64 * self.tau[1];
        let f_left = decay_after(cycle - outer_left, self.t_c, self.f0);
        let f_right = decay_after(cycle - outer_right, self.t_c, self.f0);
        ChainCycle { cycle_time_s: cycle, fidelity: swap_fidelity(swap_fidelity(f_left, self.f0), f_right) }
    }
}

/// Sequential standard chain over `n_cycles` cycles of one memory pair; the
/// rate scales with the `N` independent memories.
pub fn chain_standard(cfg: &ChainConfig, n_cycles: u64, seed: u64) -> Result<SimSummary> {
    let mut rng = StreamKey::new(seed, 0, 0, Purpose::ChainStandard).stream();
    chain_standard_with(cfg, n_cycles, seed, &mut rng)
}

pub fn chain_standard_with(cfg: &ChainConfig, n_cycles: u64, seed: u64, rng: &mut Stream) -> Result<SimSummary> {
    if n_cycles == 0 {
        return Err(Error::param("n_cycles", "need at least one cycle"));
    }
    let chain = StandardChain::new(cfg)?;
    let mut cycle = Welford::default();
    let mut fid = Welford::default();
    for _ in 0..n_cycles {
        let c = chain.cycle(rng);
        cycle.push(c.cycle_time_s);
        fid.push(c.fidelity);
    }
    let n = cfg.n_memories as f64;
    let tau = cfg.tau_round()?;
    let mean_cycle = cycle.mean();
    let mut s = SimSummary::empty(n_cycles, 0, seed, tau);
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

/// Exact mean cycle of the sequential chain,
/// `E[max(G_1 tau_1, G_3 tau_3)] + tau_2 / p_2` with geometric `G`.
pub fn chain_standard_cycle_mean(cfg: &ChainConfig) -> Result<f64> {
    let links = cfg.links()?;
    let (p1, t1) = (links[0].success_prob, links[0].trip_time_s);
    let (p3, t3) = (links[2].success_prob, links[2].trip_time_s);
    // E[min] = integral of P[X > t] P[Y > t]; both survival functions are
    // step functions, constant between consecutive multiples of t1 and t3.
    let (q1, q3) = (1.0 - p1, 1.0 - p3);
    let (mut i, mut j) = (0u32, 0u32);
    let mut at = 0.0;
    let mut e_min = 0.0;
    loop {
        let surv = q1.powi(i as i32) * q3.powi(j as i32);
        if surv < 1e-18 || i > 1_000_000 || j > 1_000_000 {
            break;
        }
        let next1 = (i + 1) as f64 * t1;
        let next3 = (j + 1) as f64 * t3;
        let next = next1.min(next3);
        e_min += surv * (next - at);
        at = next;
        if next1 <= next {
            i += 1;
        }
        if next3 <= next {
            j += 1;
        }
    }
    let e_max = t1 / p1 + t3 / p3 - e_min;
    Ok(e_max + links[1].trip_time_s / links[1].success_prob)
}
