//! Memory allocation policies for the two banks of a balanced repeater.
//!
//! A policy maps the signed mismatch `alpha` (stored, unmatched entanglements;
//! positive on the left) to bank sizes `(n_left, n_right)` with
//! `n_left + n_right = N`. The bank holding stored entanglements counts them
//! against its size, so only `n_left - alpha` (resp. `n_right + alpha`)
//! memories are free to attempt generation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub n_left: usize,
    pub n_right: usize,
}

impl Allocation {
    pub fn total(&self) -> usize {
        self.n_left + self.n_right
    }

    /// Memories free to attempt generation on each side given the stored
    /// mismatch. `None` if the bank holding the mismatch is smaller than it.
    pub fn free(&self, alpha: i64) -> Option<(usize, usize)> {
        let stored = alpha.unsigned_abs() as usize;
        if alpha >= 0 {
            self.n_left.checked_sub(stored).map(|l| (l, self.n_right))
        } else {
            self.n_right.checked_sub(stored).map(|r| (self.n_left, r))
        }
    }
}

/// Allocation rule. `HardCutoff` is the optimal rule with excess mismatch
/// dropped above the violation thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Optimal,
    Equal,
    Proportional,
    HardCutoff,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Optimal, PolicyKind::Equal, PolicyKind::Proportional, PolicyKind::HardCutoff];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Optimal => "optimal",
            PolicyKind::Equal => "equal",
            PolicyKind::Proportional => "proportional",
            PolicyKind::HardCutoff => "hard_cutoff",
        }
    }

    /// Whether the allocation reacts to the current mismatch.
    pub fn is_dynamic(self) -> bool {
        matches!(self, PolicyKind::Optimal | PolicyKind::HardCutoff)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("policy", format!("unknown policy `{s}`")))
    }
}

/// Mismatch levels above which the optimal rule cannot keep the stored
/// entanglements inside their own bank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffThresholds<T> {
    /// Bound on `alpha` when the surplus sits on the left.
    pub alpha_plus_thr: T,
    /// Bound on `|alpha|` when the surplus sits on the right.
    pub alpha_minus_thr: T,
}

fn check_memories(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("n_memories", format!("need at least 2 memories, got {n}")));
    }
    Ok(())
}

fn check_prob<T: Real>(name: &'static str, p: T) -> Result<()> {
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::param(name, format!("success probability must lie in (0, 1], got {p}")));
    }
    Ok(())
}

fn split_right(n: usize, n_right: i64) -> Allocation {
    let n_right = n_right.clamp(1, n as i64 - 1) as usize;
    Allocation { n_left: n - n_right, n_right }
}

/// Unrounded right-bank size that zeroes the conditional mean of the next
/// mismatch.
pub fn optimal_right_unrounded<T: Real>(n: usize, p_l: T, p_r: T, alpha: i64) -> T {
    let a = T::signed(alpha);
    let g = if alpha >= 0 { p_l } else { p_r };
    p_l / (p_l + p_r) * (T::count(n) + a * (T::one() - g) / p_l)
}

pub fn allocate_optimal<T: Real>(n: usize, p_l: T, p_r: T, alpha: i64) -> Result<Allocation> {
    check_memories(n)?;
    check_prob("p_l", p_l)?;
    check_prob("p_r", p_r)?;
    let floor = snap_floor(optimal_right_unrounded(n, p_l, p_r, alpha));
    let n_right = floor.to_i64().unwrap_or(if floor > T::zero() { i64::MAX } else { i64::MIN });
    Ok(split_right(n, n_right))
}

/// Even split; the left bank takes the extra memory when `n` is odd.
/// Floor that treats values within a few ulps below an integer as that
/// integer, so `p * 2k / (2p)` rounds to `k`.
fn snap_floor<T: Real>(x: T) -> T {
    let nearest = x.round();
    if (x - nearest).abs() <= T::epsilon() * T::lit(16.0) * nearest.abs().max(T::one()) {
        nearest
    } else {
        x.floor()
    }
}

pub fn allocate_equal(n: usize) -> Result<Allocation> {
    check_memories(n)?;
    Ok(Allocation { n_left: n - n / 2, n_right: n / 2 })
}

pub fn allocate_proportional<T: Real>(n: usize, p_l: T, p_r: T) -> Result<Allocation> {
    check_memories(n)?;
    check_prob("p_l", p_l)?;
    check_prob("p_r", p_r)?;
    let n_right = snap_floor(p_l * T::count(n) / (p_l + p_r)).to_i64().unwrap_or(0);
    Ok(split_right(n, n_right))
}

pub fn cutoff_thresholds<T: Real>(n: usize, p_l: T, p_r: T) -> CutoffThresholds<T> {
    let n = T::count(n);
    CutoffThresholds {
        alpha_plus_thr: p_r * n / (p_r + T::one()),
        alpha_minus_thr: p_l * n / (p_l + T::one()),
    }
}

/// Clips the mismatch to the floor of the threshold on its side. Returns the
/// clipped mismatch and how many stored entanglements must be dropped.
pub fn apply_hard_cutoff<T: Real>(alpha: i64, thr: &CutoffThresholds<T>) -> (i64, usize) {
    let magnitude = T::signed(alpha.abs());
    let limit = match alpha.signum() {
        1 => thr.alpha_plus_thr,
        -1 => thr.alpha_minus_thr,
        _ => return (0, 0),
    };
    if magnitude > limit {
        let kept = snap_floor(limit).to_i64().unwrap_or(0).max(0);
        let dropped = (alpha.abs() - kept) as usize;
        (alpha.signum() * kept, dropped)
    } else {
        (alpha, 0)
    }
}

/// Bank-size violation: the bank holding the mismatch is smaller than it.
pub fn is_violating(alloc: &Allocation, alpha: i64) -> bool {
    let stored = alpha.unsigned_abs() as usize;
    (alpha < 0 && alloc.n_right < stored) || (alpha > 0 && alloc.n_left < stored)
}

/// True when the zero-mean right-bank size lies outside `[1, N - 1]`, so no
/// admissible allocation (even mixing floor and ceiling) centers the next
/// mismatch. Catches the case `N = 2, p_l = 2 p_r, alpha = 0`, which
/// [`is_violating`] cannot see.
pub fn zero_mean_unattainable<T: Real>(n: usize, p_l: T, p_r: T, alpha: i64) -> bool {
    let x = optimal_right_unrounded(n, p_l, p_r, alpha);
    x < T::one() || x > T::count(n) - T::one()
}

/// `E[alpha(t+1) | alpha(t)]` for a real-valued right-bank size with the
/// left bank taking the rest of the `n` memories.
pub fn zero_mean_residual<T: Real>(n: usize, p_l: T, p_r: T, alpha: i64, n_right: T) -> T {
    let a = T::signed(alpha);
    let n_left = T::count(n) - n_right;
    let (pos, neg) = if alpha >= 0 { (a, T::zero()) } else { (T::zero(), a) };
    a + p_l * (n_left - pos) - p_r * (n_right + neg)
}

/// `E[alpha(t+1) | alpha(t)]` under a concrete allocation.
pub fn conditional_mean<T: Real>(alloc: &Allocation, alpha: i64, p_l: T, p_r: T) -> T {
    zero_mean_residual(alloc.total(), p_l, p_r, alpha, T::count(alloc.n_right))
}

/// Grows the bank that holds the mismatch until the stored entanglements fit.
/// Stored entanglements occupy their memories, so a requested allocation
/// smaller than the mismatch leaves that bank with zero free memories.
pub fn accommodate(alloc: Allocation, alpha: i64) -> Allocation {
    let n = alloc.total();
    let stored = alpha.unsigned_abs() as usize;
    if alpha > 0 && alloc.n_left < stored {
        Allocation { n_left: stored, n_right: n - stored }
    } else if alpha < 0 && alloc.n_right < stored {
        Allocation { n_left: n - stored, n_right: stored }
    } else {
        alloc
    }
}

/// Outcome of applying a policy at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    /// Mismatch after the hard cutoff (equal to the input otherwise).
    pub alpha: i64,
    pub dropped: usize,
    /// Bank sizes the rule asked for.
    pub requested: Allocation,
    /// Bank sizes actually used, after [`accommodate`].
    pub allocation: Allocation,
    pub free_left: usize,
    pub free_right: usize,
    pub violated: bool,
}

/// A policy bound to a repeater's memory count and link probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy<T> {
    pub kind: PolicyKind,
    pub n: usize,
    pub p_l: T,
    pub p_r: T,
    thresholds: Option<CutoffThresholds<T>>,
    fixed: Option<Allocation>,
}

impl<T: Real> Policy<T> {
    pub fn new(kind: PolicyKind, n: usize, p_l: T, p_r: T) -> Result<Self> {
        check_memories(n)?;
        check_prob("p_l", p_l)?;
        check_prob("p_r", p_r)?;
        let fixed = match kind {
            PolicyKind::Equal => Some(allocate_equal(n)?),
            PolicyKind::Proportional => Some(allocate_proportional(n, p_l, p_r)?),
            PolicyKind::Optimal | PolicyKind::HardCutoff => None,
        };
        let thresholds = (kind == PolicyKind::HardCutoff).then(|| cutoff_thresholds(n, p_l, p_r));
        Ok(Policy { kind, n, p_l, p_r, thresholds, fixed })
    }

    pub fn thresholds(&self) -> Option<&CutoffThresholds<T>> {
        self.thresholds.as_ref()
    }

    /// Applies the policy to the mismatch entering a round.
    pub fn decide(&self, alpha: i64) -> Decision {
        let (alpha, dropped) = match &self.thresholds {
            Some(thr) => apply_hard_cutoff(alpha, thr),
            None => (alpha, 0),
        };
        let requested = match self.fixed {
            Some(a) => a,
            None => allocate_optimal(self.n, self.p_l, self.p_r, alpha)
                .expect("parameters validated at construction"),
        };
        let mut violated = is_violating(&requested, alpha);
        if self.kind.is_dynamic() {
            violated |= zero_mean_unattainable(self.n, self.p_l, self.p_r, alpha);
        }
        let allocation = accommodate(requested, alpha);
        let (free_left, free_right) =
            allocation.free(alpha).expect("accommodated allocation holds the mismatch");
        Decision { alpha, dropped, requested, allocation, free_left, free_right, violated }
    }
}
