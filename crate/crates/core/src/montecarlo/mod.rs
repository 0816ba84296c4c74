//! Trajectory sampling.
//!
//! Every replica owns the ChaCha8 stream `(seed, replica)`, so results do not
//! depend on how replicas are split across worker threads. Replicas are
//! processed in fixed chunks and the per-chunk accumulators are merged in
//! chunk order.

mod excursion;
mod occupation;
mod range;
mod space;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use excursion::{
    excursion_stats, run_excursion, run_excursion_from, run_excursions, sample_trajectory, ExcursionRecord,
    ExcursionStats, MHistogram, Sandwich,
};
pub use occupation::{
    coin_turning, exact_coin_turning, exact_small_n, inf_imp_occupation, ks_uniform, srw_occupation,
    EXACT_MAX_N,
};
pub use range::{range_trace, Position, RangeSample, RangeTrace};
pub use space::{space_dependent_excursion, SpaceStats};

/// Master seed plus the stream convention: replica `r` uses stream `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngContract {
    pub seed: u64,
}

impl RngContract {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// Streaming mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = (self.n + o.n) as f64;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n;
        self.n += o.n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        self.m2 / (self.n - 1) as f64
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

const CHUNK: u64 = 4096;

/// Run `work(acc, replica)` for every replica and merge the chunk
/// accumulators in chunk order.
pub(crate) fn over_replicas<A, W, M>(replicas: u64, init: impl Fn() -> A + Sync, work: W, merge: M) -> crate::Result<A>
where
    A: Send,
    W: Fn(&mut A, u64) -> crate::Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks: Vec<(u64, u64)> = (0..replicas.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(replicas))).collect();
    let run = |&(a, b): &(u64, u64)| -> crate::Result<A> {
        let mut acc = init();
        for r in a..b {
            work(&mut acc, r)?;
        }
        Ok(acc)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<crate::Result<A>> = {
        use rayon::prelude::*;
        chunks.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<crate::Result<A>> = chunks.iter().map(run).collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 * 0.37).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.n, all.n);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9 * all.variance());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let c = RngContract::new(42);
        let a: u64 = c.stream(3).random();
        let b: u64 = c.stream(3).random();
        let d: u64 = c.stream(4).random();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn chunked_reduction_is_ordered() {
        let v = over_replicas(10_000, Vec::new, |acc: &mut Vec<u64>, r| {
            acc.push(r);
            Ok(())
        }, |t, p| t.extend(p))
        .unwrap();
        assert_eq!(v, (0..10_000).collect::<Vec<_>>());
    }
}
