//! Exact stationary analysis of the mismatch chain for small repeaters.
//!
//! The mismatch entering a round is a finite Markov chain on
//! `[-(N-1), N-1]`: from `alpha` the policy fixes the free memories on each
//! side, generation adds independent binomial counts, and
//! `alpha' = alpha + X_l - X_r`. The transition matrix is built from exact
//! binomial pmfs, restricted to the states reachable from `alpha = 0`, and
//! solved directly.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::allocation::{Decision, Policy, PolicyKind};
use crate::error::{Error, Result};

/// Largest memory count the oracle accepts.
pub const MAX_ORACLE_MEMORIES: usize = 16;

const POWER_TOL: f64 = 1e-12;

/// Binomial pmf with exact integer coefficients (floating point once they
/// outgrow 128 bits); independent of the log-space tables the simulator
/// samples from.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut exact: Option<u128> = Some(1);
    let mut approx = 1.0f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                let (num, den) = ((n - k + 1) as u128, k as u128);
                exact = exact.and_then(|c| c.checked_mul(num)).map(|c| c / den);
                approx = approx * num as f64 / den as f64;
            }
            let coef = exact.map_or(approx, |c| c as f64);
            coef * p.powi(k as i32) * q.powi((n - k) as i32)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AlphaChain {
    pub n_memories: usize,
    pub p_left: f64,
    pub p_right: f64,
    pub policy: PolicyKind,
    /// Reachable mismatch values, ascending.
    pub states: Vec<i64>,
    /// Row-stochastic transition matrix over `states`.
    pub transition: DMatrix<f64>,
    /// Stationary distribution over `states`; zero on transient states.
    pub stationary: Vec<f64>,
    /// Closed communicating classes, as mismatch values.
    pub recurrent_classes: Vec<Vec<i64>>,
    /// The class the stationary distribution lives on.
    pub solved_class: usize,
    decisions: Vec<Decision>,
}

/// Exact stationary moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryStats {
    pub e_abs_alpha: f64,
    pub e_alpha: f64,
    pub var_alpha: f64,
    /// `E[min(left available, right available)]` per round.
    pub e_matched: f64,
    /// `(E[X_l] + E[X_r]) / 2`; equals `e_matched` when nothing is dropped.
    pub e_matched_generation: f64,
    /// Matched count rebuilt from bank-size means and the one-sided mismatch
    /// means of the clipped chain.
    pub e_matched_bank_form: f64,
    pub e_x_left: f64,
    pub e_x_right: f64,
    /// Exact policy expectations of the bank sizes actually used.
    pub e_n_left: f64,
    pub e_n_right: f64,
    /// `E[|alpha| ; alpha >= 0]` and `E[|alpha| ; alpha < 0]` after cutoff.
    pub e_abs_alpha_nonneg: f64,
    pub e_abs_alpha_neg: f64,
    pub e_dropped: f64,
    pub violation_prob: f64,
    pub ergodic: bool,
}

impl AlphaChain {
    pub fn index_of(&self, alpha: i64) -> Option<usize> {
        self.states.binary_search(&alpha).ok()
    }

    pub fn pmf(&self) -> BTreeMap<i64, f64> {
        self.states.iter().copied().zip(self.stationary.iter().copied()).collect()
    }

    pub fn is_ergodic(&self) -> bool {
        self.recurrent_classes.len() == 1
    }

    /// `|| pi P - pi ||_inf`.
    pub fn balance_residual(&self) -> f64 {
        let pi = DVector::from_column_slice(&self.stationary);
        let moved = self.transition.transpose() * &pi;
        (moved - pi).amax()
    }

    pub fn max_row_error(&self) -> f64 {
        self.transition.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    fn decision(&self, i: usize) -> &Decision {
        &self.decisions[i]
    }
}

pub fn build_chain(n: usize, p_l: f64, p_r: f64, kind: PolicyKind) -> Result<AlphaChain> {
    if n > MAX_ORACLE_MEMORIES {
        return Err(Error::Size { n, limit: MAX_ORACLE_MEMORIES });
    }
    let policy = Policy::new(kind, n, p_l, p_r)?;
    let offset = n as i64 - 1;
    let full = 2 * n - 1;

    let mut rows = vec![vec![0.0; full]; full];
    let mut decisions = Vec::with_capacity(full);
    for (i, row) in rows.iter_mut().enumerate() {
        let d = policy.decide(i as i64 - offset);
        let left = binomial_pmf(d.free_left, p_l);
        let right = binomial_pmf(d.free_right, p_r);
        for (j, pj) in left.iter().enumerate() {
            for (k, pk) in right.iter().enumerate() {
                let next = d.alpha + j as i64 - k as i64;
                let idx = usize::try_from(next + offset)
                    .ok()
                    .filter(|&x| x < full)
                    .ok_or_else(|| Error::Invariant(format!("transition to mismatch {next} with N = {n}")))?;
                row[idx] += pj * pk;
            }
        }
        decisions.push(d);
    }

    // keep what the chain can reach from an empty repeater
    let mut reachable = vec![false; full];
    let mut stack = vec![offset as usize];
    reachable[offset as usize] = true;
    while let Some(i) = stack.pop() {
        for (j, &p) in rows[i].iter().enumerate() {
            if p > 0.0 && !reachable[j] {
                reachable[j] = true;
                stack.push(j);
            }
        }
    }
    let keep: Vec<usize> = (0..full).filter(|&i| reachable[i]).collect();
    let m = keep.len();
    let transition = DMatrix::from_fn(m, m, |r, c| rows[keep[r]][keep[c]]);
    let states: Vec<i64> = keep.iter().map(|&i| i as i64 - offset).collect();
    let decisions: Vec<Decision> = keep.iter().map(|&i| decisions[i]).collect();

    let classes = closed_classes(&transition);
    let zero = states.binary_search(&0).expect("zero is reachable from itself");
    let solved_class = classes.iter().position(|c| c.contains(&zero)).unwrap_or(0);
    let class = &classes[solved_class];
    let sub = DMatrix::from_fn(class.len(), class.len(), |r, c| transition[(class[r], class[c])]);
    let pi_class = solve_stationary(&sub);
    let mut stationary = vec![0.0; m];
    for (&i, &p) in class.iter().zip(pi_class.iter()) {
        stationary[i] = p;
    }

    Ok(AlphaChain {
        n_memories: n,
        p_left: p_l,
        p_right: p_r,
        policy: kind,
        recurrent_classes: classes.iter().map(|c| c.iter().map(|&i| states[i]).collect()).collect(),
        states,
        transition,
        stationary,
        solved_class,
        decisions,
    })
}

/// Closed communicating classes of a finite chain, each sorted, ordered by
/// smallest member.
fn closed_classes(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let m = p.nrows();
    let mut reach = vec![vec![false; m]; m];
    for i in 0..m {
        reach[i][i] = true;
        for j in 0..m {
            if p[(i, j)] > 0.0 {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..m {
        for i in 0..m {
            if reach[i][k] {
                let via = reach[k].clone();
                for (to, &hop) in reach[i].iter_mut().zip(&via) {
                    *to |= hop;
                }
            }
        }
    }
    let recurrent = |i: usize| (0..m).all(|j| !reach[i][j] || reach[j][i]);
    let mut seen = vec![false; m];
    let mut classes = Vec::new();
    for i in 0..m {
        if seen[i] || !recurrent(i) {
            continue;
        }
        let class: Vec<usize> = (0..m).filter(|&j| reach[i][j] && reach[j][i]).collect();
        class.iter().for_each(|&j| seen[j] = true);
        classes.push(class);
    }
    classes
}

/// Stationary vector of an irreducible stochastic matrix: direct solve of
/// `(P^T - I) pi = 0` with one equation replaced by normalization, falling
/// back to lazy power iteration.
fn solve_stationary(p: &DMatrix<f64>) -> Vec<f64> {
    let m = p.nrows();
    if m == 1 {
        return vec![1.0];
    }
    let mut a = p.transpose() - DMatrix::identity(m, m);
    a.row_mut(m - 1).fill(1.0);
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    let direct = a.lu().solve(&b).filter(|pi| {
        let residual = (p.transpose() * pi - pi).amax();
        pi.iter().all(|&x| x > -1e-12) && residual < 1e-10
    });
    let pi = direct.unwrap_or_else(|| power_iteration(p));
    let clipped: Vec<f64> = pi.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    clipped.into_iter().map(|x| x / total).collect()
}

fn power_iteration(p: &DMatrix<f64>) -> DVector<f64> {
    let m = p.nrows();
    let pt = p.transpose();
    let mut pi = DVector::from_element(m, 1.0 / m as f64);
    for _ in 0..10_000_000 {
        // averaging with the identity removes periodicity
        let next = (&pt * &pi + &pi) * 0.5;
        let delta = (&next - &pi).amax();
        pi = next;
        if delta < POWER_TOL {
            break;
        }
    }
    pi
}

pub fn stationary_stats(chain: &AlphaChain) -> StationaryStats {
    let (p_l, p_r) = (chain.p_left, chain.p_right);
    let mut s = StationaryStats {
        e_abs_alpha: 0.0,
        e_alpha: 0.0,
        var_alpha: 0.0,
        e_matched: 0.0,
        e_matched_generation: 0.0,
        e_matched_bank_form: 0.0,
        e_x_left: 0.0,
        e_x_right: 0.0,
        e_n_left: 0.0,
        e_n_right: 0.0,
        e_abs_alpha_nonneg: 0.0,
        e_abs_alpha_neg: 0.0,
        e_dropped: 0.0,
        violation_prob: 0.0,
        ergodic: chain.is_ergodic(),
    };
    let mut e_alpha_sq = 0.0;
    for (i, (&alpha, &pi)) in chain.states.iter().zip(&chain.stationary).enumerate() {
        if pi == 0.0 {
            continue;
        }
        let d = chain.decision(i);
        let a = alpha as f64;
        s.e_alpha += pi * a;
        e_alpha_sq += pi * a * a;
        s.e_abs_alpha += pi * a.abs();
        s.e_x_left += pi * p_l * d.free_left as f64;
        s.e_x_right += pi * p_r * d.free_right as f64;
        s.e_n_left += pi * d.allocation.n_left as f64;
        s.e_n_right += pi * d.allocation.n_right as f64;
        if d.alpha >= 0 {
            s.e_abs_alpha_nonneg += pi * d.alpha as f64;
        } else {
            s.e_abs_alpha_neg += pi * (-d.alpha) as f64;
        }
        s.e_dropped += pi * d.dropped as f64;
        if d.violated {
            s.violation_prob += pi;
        }
        // direct expectation of the matched count
        let (stored_l, stored_r) = if d.alpha >= 0 { (d.alpha as usize, 0) } else { (0, (-d.alpha) as usize) };
        let left = binomial_pmf(d.free_left, p_l);
        let right = binomial_pmf(d.free_right, p_r);
        let mut m = 0.0;
        for (j, pj) in left.iter().enumerate() {
            for (k, pk) in right.iter().enumerate() {
                m += pj * pk * (j + stored_l).min(k + stored_r) as f64;
            }
        }
        s.e_matched += pi * m;
    }
    s.var_alpha = e_alpha_sq - s.e_alpha * s.e_alpha;
    s.e_matched_generation = 0.5 * (s.e_x_left + s.e_x_right);
    s.e_matched_bank_form = 0.5
        * (p_l * s.e_n_left + p_r * s.e_n_right - (p_l * s.e_abs_alpha_nonneg + p_r * s.e_abs_alpha_neg));
    s
}

/// L1 distance between two pmfs on the integers.
pub fn l1_distance(a: &BTreeMap<i64, f64>, b: &BTreeMap<i64, f64>) -> f64 {
    let mut d = 0.0;
    for (k, &pa) in a {
        d += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &pb) in b {
        if !a.contains_key(k) {
            d += pb;
        }
    }
    d
}
