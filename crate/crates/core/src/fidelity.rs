//! Werner-state fidelity kernels.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fidelity of the maximally mixed two-qubit state.
pub const MIXED_FIDELITY: f64 = 0.25;

fn check_initial<T: Real>(f0: T) -> Result<()> {
    if !(f0 >= T::lit(MIXED_FIDELITY) && f0 <= T::one()) {
        return Err(Error::param("initial_fidelity", format!("must lie in [0.25, 1], got {f0}")));
    }
    Ok(())
}

/// Fidelity after `elapsed_s` seconds in memory with coherence time `t_c_s`.
/// An infinite coherence time means no decay.
pub fn decay_after<T: Real>(elapsed_s: T, t_c_s: T, f0: T) -> T {
    let quarter = T::lit(MIXED_FIDELITY);
    quarter + (f0 - quarter) * (-elapsed_s / t_c_s).exp()
}

/// Fidelity of an entanglement stored for `age_rounds` rounds.
pub fn fidelity_decay<T: Real>(age_rounds: u64, tau_round_s: T, t_c_s: T, f0: T) -> Result<T> {
    check_initial(f0)?;
    if !(t_c_s > T::zero()) {
        return Err(Error::param("coherence_time_s", format!("must be > 0, got {t_c_s}")));
    }
    let age = T::from_u64(age_rounds).expect("age representable");
    Ok(decay_after(age * tau_round_s, t_c_s, f0))
}

/// Fidelity after swapping two Werner pairs.
pub fn swap_fidelity<T: Real>(f1: T, f2: T) -> T {
    f1 * f2 + (T::one() - f1) * (T::one() - f2) / T::lit(3.0)
}

/// Caches the swapped fidelity of a stored entanglement of a given age with
/// a fresh partner; ages are small integers in practice.
#[derive(Debug, Clone)]
pub struct AgeFidelityTable {
    tau_round_s: f64,
    t_c_s: f64,
    f0: f64,
    stored: Vec<f64>,
}

impl AgeFidelityTable {
    const LIMIT: usize = 1 << 16;

    pub fn new(tau_round_s: f64, t_c_s: f64, f0: f64) -> Result<Self> {
        // validates the parameters once
        fidelity_decay(0, tau_round_s, t_c_s, f0)?;
        let mut table = AgeFidelityTable { tau_round_s, t_c_s, f0, stored: Vec::new() };
        table.extend_to(64);
        Ok(table)
    }

    fn extend_to(&mut self, len: usize) {
        for age in self.stored.len()..len {
            self.stored.push(decay_after(age as f64 * self.tau_round_s, self.t_c_s, self.f0));
        }
    }

    pub fn initial(&self) -> f64 {
        self.f0
    }

    /// Stored fidelity at `age` rounds.
    pub fn stored(&mut self, age: u64) -> f64 {
        let idx = age as usize;
        if idx < self.stored.len() {
            return self.stored[idx];
        }
        if idx < Self::LIMIT {
            self.extend_to((idx + 1).next_power_of_two().min(Self::LIMIT));
            return self.stored[idx];
        }
        decay_after(age as f64 * self.tau_round_s, self.t_c_s, self.f0)
    }

    /// Swapped fidelity of an `age`-round-old entanglement and a fresh one.
    pub fn with_fresh(&mut self, age: u64) -> f64 {
        swap_fidelity(self.stored(age), self.f0)
    }
}
