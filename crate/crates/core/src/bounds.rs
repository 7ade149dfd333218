//! Closed-form rate, variance, age and fidelity bounds for a balanced
//! repeater under the optimal allocation, plus the standard-repeater rate.
//!
//! Bank-size expectations use the large-`N` approximation
//! `E[N_r] = p_l N / (p_l + p_r)`, `E[N_l] = p_r N / (p_l + p_r)`; exact
//! policy expectations come from [`crate::oracle`] and are never substituted
//! here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{decay_after, swap_fidelity};
use crate::link::{round_time, LinkParams};
use crate::scalar::Real;

/// Every analytical quantity for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport<T> {
    pub n_memories: usize,
    pub p_left: T,
    pub p_right: T,
    pub tau_round_s: T,
    pub eta: T,
    pub expected_n_left: T,
    pub expected_n_right: T,
    /// Lower bound on matched pairs per round; reported raw even when negative.
    pub matched_lower_bound: T,
    /// Set when `matched_lower_bound` is not positive.
    pub vacuous_bound: bool,
    pub rate_lower_bound_per_s: T,
    pub std_rate_per_s: T,
    pub std_rate_lower_bound_per_s: T,
    pub var_alpha_upper: T,
    /// Bound on the mean age of unmatched entanglements, in rounds.
    pub age_bound: T,
    pub fidelity_bound: T,
    pub swap_fidelity_bound: T,
}

/// Composite success parameter `p_l p_r / (p_l + p_r)`.
pub fn eta<T: Real>(p_l: T, p_r: T) -> T {
    p_l * p_r / (p_l + p_r)
}

/// Approximate stationary `(E[N_l], E[N_r])` under the optimal rule.
pub fn expected_bank_sizes<T: Real>(n: usize, p_l: T, p_r: T) -> (T, T) {
    let n = T::count(n);
    (p_r * n / (p_l + p_r), p_l * n / (p_l + p_r))
}

/// Lower bound on `E[M]` from bank-size means and the mean absolute mismatch.
pub fn matched_bound_general<T: Real>(p_l: T, p_r: T, e_n_left: T, e_n_right: T, e_abs_alpha: T) -> T {
    T::lit(0.5) * (p_l * e_n_left + p_r * e_n_right - p_l.max(p_r) * e_abs_alpha)
}

/// Upper bound on the stationary mismatch variance, `eta (2 - p_l - p_r) N`.
pub fn variance_bound<T: Real>(n: usize, p_l: T, p_r: T) -> T {
    eta(p_l, p_r) * (T::lit(2.0) - p_r - p_l) * T::count(n)
}

/// Lower bound on matched pairs per round under the optimal allocation.
pub fn lemma2_bound<T: Real>(n: usize, p_l: T, p_r: T) -> T {
    let e = eta(p_l, p_r);
    T::lit(0.5) * (T::lit(2.0) * e * T::count(n) - p_l.max(p_r) * variance_bound(n, p_l, p_r).sqrt())
}

/// Standard repeater rate `N / (tau_l / p_l + tau_r / p_r)` and its lower
/// bound `eta N / max(tau_l, tau_r)`.
pub fn std_rate<T: Real>(n: usize, left: &LinkParams<T>, right: &LinkParams<T>) -> (T, T) {
    let nn = T::count(n);
    let cycle = left.trip_time_s / left.success_prob + right.trip_time_s / right.success_prob;
    let lower = eta(left.success_prob, right.success_prob) * nn / round_time(left, right);
    (nn / cycle, lower)
}

/// Bound on the mean age (rounds) of unmatched entanglements.
pub fn age_bound<T: Real>(n: usize, p_l: T, p_r: T) -> T {
    variance_bound(n, p_l, p_r).sqrt() / (eta(p_l, p_r) * T::count(n))
}

/// Returns `(B_F, swap bound)`: the bound on the fidelity of an unmatched
/// entanglement and on the fidelity after swapping it with a fresh pair.
pub fn fidelity_bounds<T: Real>(n: usize, p_l: T, p_r: T, tau_round_s: T, t_c_s: T, f0: T) -> Result<(T, T)> {
    if !(f0 >= T::lit(0.25) && f0 <= T::one()) {
        return Err(Error::param("initial_fidelity", format!("must lie in [0.25, 1], got {f0}")));
    }
    let b_f = decay_after(age_bound(n, p_l, p_r) * tau_round_s, t_c_s, f0);
    Ok((b_f, swap_fidelity(f0, b_f)))
}

pub fn bounds_report<T: Real>(
    n: usize,
    left: &LinkParams<T>,
    right: &LinkParams<T>,
    t_c_s: T,
    f0: T,
) -> Result<BoundsReport<T>> {
    if n < 2 {
        return Err(Error::param("n_memories", format!("need at least 2 memories, got {n}")));
    }
    let (p_l, p_r) = (left.success_prob, right.success_prob);
    let tau = round_time(left, right);
    let (e_l, e_r) = expected_bank_sizes(n, p_l, p_r);
    let matched = lemma2_bound(n, p_l, p_r);
    let (std_exact, std_lower) = std_rate(n, left, right);
    let (b_f, b_swap) = fidelity_bounds(n, p_l, p_r, tau, t_c_s, f0)?;
    Ok(BoundsReport {
        n_memories: n,
        p_left: p_l,
        p_right: p_r,
        tau_round_s: tau,
        eta: eta(p_l, p_r),
        expected_n_left: e_l,
        expected_n_right: e_r,
        matched_lower_bound: matched,
        vacuous_bound: matched <= T::zero(),
        rate_lower_bound_per_s: matched / tau,
        std_rate_per_s: std_exact,
        std_rate_lower_bound_per_s: std_lower,
        var_alpha_upper: variance_bound(n, p_l, p_r),
        age_bound: age_bound(n, p_l, p_r),
        fidelity_bound: b_f,
        swap_fidelity_bound: b_swap,
    })
}
