use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::law::FitnessLaw;
use crate::params::ModelParams;
use crate::population::Population;
use crate::trackers::Trackers;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of a single chain step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepEvent {
    /// A new species appeared with the given fitness.
    Birth { fitness: f64 },
    /// The least-fit species died.
    Death { fitness: f64 },
    /// A death event landed on an empty population; nothing changed.
    NullDeath,
}

impl StepEvent {
    /// Short tag used by the event-log stream (`birth`, `death`, `null_death`).
    pub fn tag(&self) -> &'static str {
        match self {
            StepEvent::Birth { .. } => "birth",
            StepEvent::Death { .. } => "death",
            StepEvent::NullDeath => "null_death",
        }
    }

    pub fn fitness(&self) -> Option<f64> {
        match *self {
            StepEvent::Birth { fitness } | StepEvent::Death { fitness } => Some(fitness),
            StepEvent::NullDeath => None,
        }
    }
}

/// The evolution chain: each step is a birth with probability `p` (inserting
/// one freshly sampled fitness) and otherwise a death that removes the
/// least-fit living species, or nothing if none are alive.
///
/// Deterministic: the same seed, parameters, and law reproduce the same
/// trajectory bit for bit. The RNG is consumed in a fixed order — first the
/// event coin, then (for births only) exactly one fitness draw.
pub struct Chain<R = ChaCha8Rng> {
    params: ModelParams,
    law: FitnessLaw,
    critical_value: Option<f64>,
    population: Population,
    below_critical: u64,
    step_index: u64,
    rng: R,
}

impl Chain<ChaCha8Rng> {
    /// Fresh chain: step 0, empty population, RNG derived from `seed`.
    pub fn new(params: ModelParams, law: FitnessLaw, seed: u64) -> Self {
        Self::with_rng(params, law, ChaCha8Rng::seed_from_u64(seed))
    }
}

impl<R: Rng> Chain<R> {
    pub fn with_rng(params: ModelParams, law: FitnessLaw, rng: R) -> Self {
        let critical_value = if params.is_supercritical() {
            Some(law.quantile(params.critical_fitness()))
        } else {
            None
        };
        Chain {
            params,
            law,
            critical_value,
            population: Population::new(law),
            below_critical: 0,
            step_index: 0,
            rng,
        }
    }

    /// Advance by one event.
    #[inline]
    pub fn step(&mut self) -> StepEvent {
        self.step_index += 1;
        let coin: f64 = self.rng.random();
        if coin < self.params.p() {
            let fitness = self.law.sample(&mut self.rng);
            self.population.insert(fitness);
            if let Some(vc) = self.critical_value {
                if fitness < vc {
                    self.below_critical += 1;
                }
            }
            StepEvent::Birth { fitness }
        } else if let Some(fitness) = self.population.remove_min() {
            // the population minimum sits below the critical value exactly
            // when the below-critical set is nonempty
            if self.below_critical > 0 {
                self.below_critical -= 1;
            }
            StepEvent::Death { fitness }
        } else {
            StepEvent::NullDeath
        }
    }

    /// Advance by `steps` events, feeding each to `trackers`.
    pub fn run(&mut self, steps: u64, trackers: &mut Trackers) {
        self.run_with(steps, trackers, |_, _, _| {});
    }

    /// Like `run`, with a per-step hook called after the trackers observe
    /// the event. Checkpoint writers and event logs hang off this.
    pub fn run_with(
        &mut self,
        steps: u64,
        trackers: &mut Trackers,
        mut hook: impl FnMut(&Self, &Trackers, StepEvent),
    ) {
        for _ in 0..steps {
            let event = self.step();
            trackers
                .observe(self.step_index, event, self.below_critical)
                .expect("run feeds events in step order");
            hook(self, trackers, event);
        }
    }

    /// Steps taken so far.
    pub fn n(&self) -> u64 {
        self.step_index
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn law(&self) -> FitnessLaw {
        self.law
    }

    /// The law's critical value (its `f_c`-quantile); `None` when `p <= 1/2`.
    pub fn critical_value(&self) -> Option<f64> {
        self.critical_value
    }

    /// Living species count.
    pub fn size(&self) -> u64 {
        self.population.len()
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    /// Number of living species with fitness strictly below the critical
    /// value. Maintained incrementally, so this is O(1); it always equals
    /// `population().count_below(critical_value)`.
    pub fn l_size(&self) -> Result<u64> {
        match self.critical_value {
            Some(_) => Ok(self.below_critical),
            None => Err(Error::NoCriticalValue(self.params.p())),
        }
    }

    /// Living species with fitness strictly inside (a, b).
    pub fn count_in(&self, a: f64, b: f64) -> Result<u64> {
        self.population.count_in(a, b)
    }

    /// Histogram of living fitnesses over [lo, hi).
    pub fn snapshot_histogram(&self, bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
        let mut h = Histogram::new(bins, lo, hi)?;
        for v in self.population.iter() {
            h.record(v);
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trackers::TrackerConfig;

    /// Replays a fixed list of uniform draws; panics when exhausted.
    pub(crate) struct ScriptedRng {
        words: Vec<u64>,
        next: usize,
    }

    impl ScriptedRng {
        /// Each value v in [0, 1) is encoded so that `random::<f64>()`
        /// reproduces it up to the 53-bit grid.
        pub(crate) fn from_uniforms(values: &[f64]) -> Self {
            let words = values
                .iter()
                .map(|&v| {
                    assert!((0.0..1.0).contains(&v));
                    ((v * (1u64 << 53) as f64) as u64) << 11
                })
                .collect();
            ScriptedRng { words, next: 0 }
        }
    }

    impl rand::TryRng for ScriptedRng {
        type Error = std::convert::Infallible;

        fn try_next_u32(&mut self) -> std::result::Result<u32, Self::Error> {
            Ok(self.try_next_u64()? as u32)
        }

        fn try_next_u64(&mut self) -> std::result::Result<u64, Self::Error> {
            let w = self.words[self.next];
            self.next += 1;
            Ok(w)
        }

        fn try_fill_bytes(&mut self, dst: &mut [u8]) -> std::result::Result<(), Self::Error> {
            for chunk in dst.chunks_mut(8) {
                let bytes = self.try_next_u64()?.to_le_bytes();
                chunk.copy_from_slice(&bytes[..chunk.len()]);
            }
            Ok(())
        }
    }

    fn params(p: f64) -> ModelParams {
        ModelParams::new(p).unwrap()
    }

    fn scripted_chain(p: f64, draws: &[f64]) -> Chain<ScriptedRng> {
        Chain::with_rng(
            params(p),
            FitnessLaw::uniform(),
            ScriptedRng::from_uniforms(draws),
        )
    }

    #[test]
    fn scripted_birth() {
        // 0.10 < p forces a birth; the fitness is the next draw
        let mut chain = scripted_chain(2.0 / 3.0, &[0.10, 0.42]);
        match chain.step() {
            StepEvent::Birth { fitness } => assert!((fitness - 0.42).abs() < 1e-12),
            other => panic!("expected birth, got {other:?}"),
        }
        assert_eq!(chain.size(), 1);
        assert_eq!(chain.n(), 1);
    }

    #[test]
    fn scripted_death_removes_minimum() {
        let mut chain = scripted_chain(2.0 / 3.0, &[0.1, 0.3, 0.1, 0.7, 0.90]);
        chain.step(); // birth 0.3
        chain.step(); // birth 0.7
        match chain.step() {
            StepEvent::Death { fitness } => assert!((fitness - 0.3).abs() < 1e-12),
            other => panic!("expected death, got {other:?}"),
        }
        assert_eq!(chain.size(), 1);
    }

    #[test]
    fn scripted_null_death_on_empty_population() {
        let mut chain = scripted_chain(2.0 / 3.0, &[0.90]);
        assert_eq!(chain.step(), StepEvent::NullDeath);
        assert_eq!(chain.size(), 0);
    }

    #[test]
    fn fresh_chain_is_empty() {
        let chain = Chain::new(params(2.0 / 3.0), FitnessLaw::uniform(), 42);
        assert_eq!(chain.n(), 0);
        assert_eq!(chain.size(), 0);
        assert_eq!(chain.l_size().unwrap(), 0);
    }

    #[test]
    fn same_seed_reproduces_trajectory() {
        let mut a = Chain::new(params(0.6), FitnessLaw::uniform(), 42);
        let mut b = Chain::new(params(0.6), FitnessLaw::uniform(), 42);
        for _ in 0..2000 {
            assert_eq!(a.step(), b.step());
        }
        assert_eq!(a.size(), b.size());
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = Chain::new(params(0.6), FitnessLaw::uniform(), 1);
        let mut b = Chain::new(params(0.6), FitnessLaw::uniform(), 2);
        let diverged = (0..100).any(|_| a.step() != b.step());
        assert!(diverged);
    }

    #[test]
    fn run_equals_manual_stepping() {
        let p = params(2.0 / 3.0);
        let mut manual = Chain::new(p, FitnessLaw::uniform(), 42);
        let mut events = Vec::new();
        for _ in 0..10 {
            events.push(manual.step());
        }

        let mut driven = Chain::new(p, FitnessLaw::uniform(), 42);
        let mut trackers = Trackers::new(TrackerConfig::for_params(&p));
        let mut seen = Vec::new();
        driven.run_with(10, &mut trackers, |_, _, e| seen.push(e));

        assert_eq!(events, seen);
        assert_eq!(manual.size(), driven.size());
        assert_eq!(trackers.n(), 10);
    }

    #[test]
    fn zero_step_run_is_a_no_op() {
        let p = params(2.0 / 3.0);
        let mut chain = Chain::new(p, FitnessLaw::uniform(), 7);
        let mut trackers = Trackers::new(TrackerConfig::for_params(&p));
        chain.run(0, &mut trackers);
        assert_eq!(chain.n(), 0);
        assert_eq!(trackers.n(), 0);
    }

    #[test]
    fn event_counts_partition_steps() {
        let p = params(0.6);
        let mut chain = Chain::new(p, FitnessLaw::uniform(), 3);
        let mut trackers = Trackers::new(TrackerConfig::for_params(&p));
        chain.run(5000, &mut trackers);
        assert_eq!(
            trackers.births() + trackers.deaths() + trackers.null_deaths(),
            5000
        );
    }

    #[test]
    fn size_is_a_reflected_walk() {
        let mut chain = Chain::new(params(0.55), FitnessLaw::uniform(), 11);
        let mut prev = 0i64;
        for _ in 0..5000 {
            chain.step();
            let size = chain.size() as i64;
            assert!((size - prev).abs() <= 1);
            prev = size;
        }
    }

    #[test]
    fn l_size_examples() {
        let mut chain = scripted_chain(2.0 / 3.0, &[0.1, 0.3, 0.1, 0.55, 0.1, 0.7]);
        for _ in 0..3 {
            chain.step();
        }
        assert_eq!(chain.l_size().unwrap(), 1); // only 0.3 < 0.5

        let mut above = scripted_chain(2.0 / 3.0, &[0.1, 0.6, 0.1, 0.9]);
        above.step();
        above.step();
        assert_eq!(above.l_size().unwrap(), 0);
        let vc = above.critical_value().unwrap();
        assert_eq!(above.count_in(vc, 1.0).unwrap(), 2);
    }

    #[test]
    fn l_size_requires_supercritical_p() {
        let chain = Chain::new(params(0.4), FitnessLaw::uniform(), 0);
        assert!(matches!(chain.l_size(), Err(Error::NoCriticalValue(_))));
        assert_eq!(chain.critical_value(), None);
    }

    #[test]
    fn incremental_l_size_matches_population_query() {
        for law in [FitnessLaw::uniform(), FitnessLaw::exponential(1.0).unwrap()] {
            let mut chain = Chain::new(params(2.0 / 3.0), law, 19);
            let vc = chain.critical_value().unwrap();
            for i in 0..20_000 {
                chain.step();
                if i % 500 == 0 {
                    assert_eq!(chain.l_size().unwrap(), chain.population().count_below(vc));
                }
            }
            assert_eq!(chain.l_size().unwrap(), chain.population().count_below(vc));
        }
    }

    #[test]
    fn snapshot_histogram_counts_living_species() {
        let mut chain = scripted_chain(2.0 / 3.0, &[0.1, 0.25, 0.1, 0.75]);
        chain.step();
        chain.step();
        let h = chain.snapshot_histogram(2, 0.0, 1.0).unwrap();
        assert_eq!(h.counts(), &[1, 1]);
        assert_eq!(h.total(), chain.size());

        let empty = Chain::new(params(0.6), FitnessLaw::uniform(), 0);
        let h = empty.snapshot_histogram(5, 0.0, 1.0).unwrap();
        assert!(h.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn event_tags() {
        assert_eq!(StepEvent::Birth { fitness: 0.5 }.tag(), "birth");
        assert_eq!(StepEvent::NullDeath.tag(), "null_death");
        assert_eq!(StepEvent::NullDeath.fitness(), None);
        assert_eq!(StepEvent::Death { fitness: 0.2 }.fitness(), Some(0.2));
    }
}
