//! Running estimators with batch-means standard errors.
//!
//! Round-to-round observations of the repeater are autocorrelated, so the
//! naive `sd / sqrt(n)` understates the error. Observations are grouped into
//! a fixed number of contiguous batches and the spread of batch means is used
//! instead.

/// Default number of batches for a run.
pub const BATCHES: u64 = 100;

#[derive(Debug, Clone)]
pub struct BatchMeans {
    batch_size: u64,
    cur_sum: f64,
    cur_n: u64,
    batches: Vec<f64>,
    sum: f64,
    n: u64,
}

impl BatchMeans {
    /// Estimator expecting about `expected` observations.
    pub fn new(expected: u64) -> Self {
        BatchMeans {
            batch_size: (expected / BATCHES).max(1),
            cur_sum: 0.0,
            cur_n: 0,
            batches: Vec::with_capacity(BATCHES as usize + 1),
            sum: 0.0,
            n: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.n += 1;
        self.cur_sum += x;
        self.cur_n += 1;
        if self.cur_n == self.batch_size {
            self.batches.push(self.cur_sum / self.cur_n as f64);
            self.cur_sum = 0.0;
            self.cur_n = 0;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 { f64::NAN } else { self.sum / self.n as f64 }
    }

    /// Batch-means standard error of [`mean`](Self::mean). Falls back to
    /// zero spread when fewer than two batches completed.
    pub fn std_error(&self) -> f64 {
        batch_se(&self.batches)
    }
}

/// Ratio estimator `sum(num) / sum(den)` with batch-means error, used for
/// per-match averages collected round by round.
#[derive(Debug, Clone)]
pub struct RatioBatches {
    batch_size: u64,
    rounds_in_batch: u64,
    cur_num: f64,
    cur_den: f64,
    batches: Vec<f64>,
    num: f64,
    den: f64,
}

impl RatioBatches {
    pub fn new(expected_rounds: u64) -> Self {
        RatioBatches {
            batch_size: (expected_rounds / BATCHES).max(1),
            rounds_in_batch: 0,
            cur_num: 0.0,
            cur_den: 0.0,
            batches: Vec::with_capacity(BATCHES as usize + 1),
            num: 0.0,
            den: 0.0,
        }
    }

    /// Adds one round's numerator and denominator.
    #[inline]
    pub fn push(&mut self, num: f64, den: f64) {
        self.num += num;
        self.den += den;
        self.cur_num += num;
        self.cur_den += den;
        self.rounds_in_batch += 1;
        if self.rounds_in_batch == self.batch_size {
            if self.cur_den > 0.0 {
                self.batches.push(self.cur_num / self.cur_den);
            }
            self.cur_num = 0.0;
            self.cur_den = 0.0;
            self.rounds_in_batch = 0;
        }
    }

    pub fn mean(&self) -> f64 {
        if self.den > 0.0 { self.num / self.den } else { f64::NAN }
    }

    pub fn std_error(&self) -> f64 {
        batch_se(&self.batches)
    }
}

fn batch_se(batches: &[f64]) -> f64 {
    let b = batches.len();
    if b < 2 {
        return 0.0;
    }
    let m = batches.iter().sum::<f64>() / b as f64;
    let var = batches.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Mean and standard error of independent samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// Streaming mean/variance for independent samples (Welford).
#[derive(Debug, Clone, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 { f64::NAN } else { self.mean }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.m2 / (self.n - 1) as f64 }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 { f64::NAN } else { (self.variance() / self.n as f64).sqrt() }
    }
}
