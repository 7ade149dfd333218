//! Seeded random streams and exact discrete samplers.
//!
//! Every stream is a ChaCha8 generator. The 256-bit key is expanded from
//! `(master_seed, experiment)` with SplitMix64 and the ChaCha stream id packs
//! `(replication, purpose)`, so a lane always sees the same draws no matter
//! which worker runs it or in what order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator family recorded in output metadata.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9) keyed by SplitMix64(master_seed, experiment), stream = replication << 16 | purpose";

pub type Stream = ChaCha8Rng;

/// What a stream is used for; part of the lane so that, e.g., the balanced
/// and standard repeaters of the same sweep point never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u16)]
pub enum Purpose {
    Balanced = 1,
    Standard = 2,
    Chain = 3,
    ChainStandard = 4,
    Test = 0xff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub experiment: u64,
    pub replication: u64,
    pub purpose: Purpose,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(master_seed: u64, experiment: u64, replication: u64, purpose: Purpose) -> Self {
        assert!(replication < 1 << 48, "replication index exceeds the stream id range");
        StreamKey { master_seed, experiment, replication, purpose }
    }

    pub fn stream(&self) -> Stream {
        let mut state = self.master_seed;
        let mut seed = [0u8; 32];
        let mut mix = self.experiment.wrapping_mul(0xd605_bbb5_8c8a_bbf5);
        for chunk in seed.chunks_exact_mut(8) {
            let word = splitmix64(&mut state) ^ splitmix64(&mut mix);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.replication << 16 | self.purpose as u64);
        rng
    }
}

/// Uniform draw in `[0, 1)`.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// One exact Binomial(n, p) draw.
pub fn binomial<R: RngCore + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p checked to lie in (0, 1)").sample(rng)
}

/// Number of Bernoulli(p) trials up to and including the first success.
pub fn geometric_attempts<R: RngCore + ?Sized>(p: f64, rng: &mut R) -> Result<u64> {
    Ok(Geometric::new(p)?.sample(rng))
}

/// Geometric sampler with the log of the failure probability precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometric {
    p: f64,
    ln_fail: f64,
}

impl Geometric {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param("p", format!("geometric success probability must lie in (0, 1], got {p}")));
        }
        Ok(Geometric { p, ln_fail: (-p).ln_1p() })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.p >= 1.0 {
            return 1;
        }
        // P[X > k] = (1 - p)^k  <=>  X = floor(ln V / ln(1 - p)) + 1, V in (0, 1]
        let v = 1.0 - uniform(rng);
        (v.ln() / self.ln_fail).floor() as u64 + 1
    }
}

/// Inversion sampler for Binomial(n, p) at a fixed `p` and every
/// `n <= n_max`, one uniform per draw.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    p: f64,
    // cdf[n][k] = P[X <= k], last entry forced to 1
    cdf: Vec<Vec<f64>>,
}

impl BinomialTable {
    /// Trials beyond this fall back to [`binomial`].
    pub const MAX_TABULATED: usize = 2048;

    pub fn new(p: f64, n_max: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("binomial probability must lie in [0, 1], got {p}")));
        }
        let n_max = n_max.min(Self::MAX_TABULATED);
        let mut ln_fact = vec![0.0f64; n_max + 1];
        for i in 1..=n_max {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
        let cdf = (0..=n_max)
            .map(|n| {
                let mut acc = 0.0;
                let mut row: Vec<f64> = (0..=n)
                    .map(|k| {
                        let pmf = if p <= 0.0 {
                            if k == 0 { 1.0 } else { 0.0 }
                        } else if p >= 1.0 {
                            if k == n { 1.0 } else { 0.0 }
                        } else {
                            (ln_fact[n] - ln_fact[k] - ln_fact[n - k]
                                + k as f64 * ln_p
                                + (n - k) as f64 * ln_q)
                                .exp()
                        };
                        acc += pmf;
                        acc
                    })
                    .collect();
                *row.last_mut().expect("row has n + 1 entries") = 1.0;
                row
            })
            .collect();
        Ok(BinomialTable { p, cdf })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> usize {
        match self.cdf.get(n) {
            Some(row) => {
                if n == 0 {
                    return 0;
                }
                let u = uniform(rng);
                row.partition_point(|&c| c <= u)
            }
            None => binomial(n as u64, self.p, rng) as usize,
        }
    }
}
