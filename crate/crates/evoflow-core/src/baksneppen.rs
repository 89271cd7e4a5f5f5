//! Bak-Sneppen dynamics on a ring: every update locates the least-fit site
//! and redraws it together with both neighbors. Used for empirical
//! comparison against the birth-death chain's above-threshold behavior.

use crate::error::{Error, Result};
use crate::law::FitnessLaw;
use crate::stats::quantile_sorted;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed-size ring of species fitnesses under least-fit-neighborhood
/// replacement.
#[derive(Debug, Clone)]
pub struct Ring {
    fitness: Vec<f64>,
    law: FitnessLaw,
    rng: ChaCha8Rng,
    updates: u64,
}

/// Sites touched by one update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateRecord {
    pub argmin: usize,
    /// The replaced triple (argmin and both neighbors), ascending site index.
    pub replaced: [usize; 3],
}

impl Ring {
    /// Ring of `sites` i.i.d. samples from `law`, drawn in site order.
    pub fn new(sites: usize, law: FitnessLaw, seed: u64) -> Result<Self> {
        if sites < 3 {
            return Err(Error::RingTooSmall(sites));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fitness = (0..sites).map(|_| law.sample(&mut rng)).collect();
        Ok(Ring {
            fitness,
            law,
            rng,
            updates: 0,
        })
    }

    /// Ring with explicit initial fitnesses (tests and replays).
    pub fn from_fitness(fitness: Vec<f64>, law: FitnessLaw, seed: u64) -> Result<Self> {
        if fitness.len() < 3 {
            return Err(Error::RingTooSmall(fitness.len()));
        }
        Ok(Ring {
            fitness,
            law,
            rng: ChaCha8Rng::seed_from_u64(seed),
            updates: 0,
        })
    }

    pub fn sites(&self) -> usize {
        self.fitness.len()
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn law(&self) -> FitnessLaw {
        self.law
    }

    /// One update: find the minimum-fitness site (ties break to the lowest
    /// index) and redraw it plus both neighbors, sampling in ascending site
    /// order.
    pub fn step(&mut self) -> UpdateRecord {
        let n = self.fitness.len();
        let mut argmin = 0;
        for i in 1..n {
            if self.fitness[i] < self.fitness[argmin] {
                argmin = i;
            }
        }
        let mut replaced = [(argmin + n - 1) % n, argmin, (argmin + 1) % n];
        replaced.sort_unstable();
        for &site in &replaced {
            self.fitness[site] = self.law.sample(&mut self.rng);
        }
        self.updates += 1;
        UpdateRecord { argmin, replaced }
    }

    /// Run `updates` steps; after the first `burn_in`, record the full
    /// fitness vector every `sample_every` updates. Returns the pooled
    /// samples in recording order.
    pub fn run_sampling(
        &mut self,
        updates: u64,
        burn_in: u64,
        sample_every: u64,
    ) -> Result<Vec<f64>> {
        if updates < burn_in || sample_every == 0 {
            return Err(Error::InvalidSamplingPlan {
                updates,
                burn_in,
                sample_every,
            });
        }
        let mut samples = Vec::new();
        for u in 1..=updates {
            self.step();
            if u > burn_in && (u - burn_in).is_multiple_of(sample_every) {
                samples.extend_from_slice(&self.fitness);
            }
        }
        Ok(samples)
    }
}

/// Threshold estimators for pooled stationary samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEstimate {
    /// Moment inversion under the uniform-on-(f, 1) hypothesis: 2*mean - 1.
    pub moment: f64,
    /// The 1% sample quantile, a distribution-shape-free cross-check.
    pub lower_quantile: f64,
}

const MIN_THRESHOLD_SAMPLES: usize = 1000;

/// Estimate the self-organized threshold from pooled samples. Both
/// estimators are heuristics: the moment form assumes the stationary bulk is
/// uniform between the threshold and 1, the quantile form only assumes the
/// sub-threshold mass is small.
pub fn threshold_estimate(samples: &[f64]) -> Result<ThresholdEstimate> {
    if samples.len() < MIN_THRESHOLD_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_THRESHOLD_SAMPLES,
            got: samples.len(),
        });
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(ThresholdEstimate {
        moment: 2.0 * mean - 1.0,
        lower_quantile: quantile_sorted(&sorted, 0.01),
    })
}
