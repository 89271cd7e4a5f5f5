use crate::chain::{Chain, StepEvent};
use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::params::ModelParams;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a tracker collects. Two trackers merge only if their configurations
/// are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Open intervals whose birth counts are recorded (the upper half of the
    /// per-run density bracket).
    pub intervals: Vec<(f64, f64)>,
    /// Record below-critical statistics: empty-set step counts, returns to
    /// empty, and stretch lengths. Off for sub-critical runs, where no
    /// finite critical value exists.
    pub below_critical_stats: bool,
    /// Cap on retained stretch-length samples; counts and sums stay exact
    /// past the cap, the samples become a reservoir.
    pub stretch_sample_cap: usize,
    /// Optional histogram of birth fitnesses: (bins, lo, hi).
    pub birth_histogram: Option<(usize, f64, f64)>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            intervals: Vec::new(),
            below_critical_stats: true,
            stretch_sample_cap: 1_000_000,
            birth_histogram: None,
        }
    }
}

impl TrackerConfig {
    /// Default configuration with below-critical statistics gated on the
    /// supercritical flag.
    pub fn for_params(params: &ModelParams) -> Self {
        TrackerConfig {
            below_critical_stats: params.is_supercritical(),
            ..TrackerConfig::default()
        }
    }

    pub fn with_intervals(mut self, intervals: Vec<(f64, f64)>) -> Self {
        self.intervals = intervals;
        self
    }

    pub fn with_birth_histogram(mut self, bins: usize, lo: f64, hi: f64) -> Self {
        self.birth_histogram = Some((bins, lo, hi));
        self
    }
}

/// Which stretch of time the below-critical set is currently in.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// Set empty; `len` steps so far in this stretch.
    Gap { len: u64 },
    /// Set nonempty. `discard` marks a stretch whose start was not observed
    /// (tracker attached mid-run); its length is not recorded.
    Excursion { len: u64, discard: bool },
    /// Result of a merge; aggregation only, no further observation.
    Sealed { in_progress: u64 },
}

impl Phase {
    fn in_progress(&self) -> u64 {
        match *self {
            Phase::Gap { len } => len,
            Phase::Excursion { len, .. } => len,
            Phase::Sealed { in_progress } => in_progress,
        }
    }
}

/// Streaming per-step statistics of one run: step counts with the
/// below-critical set empty, returns of that set to empty, completed
/// empty/nonempty stretch lengths, births per configured interval, and an
/// optional birth-fitness histogram.
///
/// Trackers from independent runs combine with [`Trackers::merge`], which is
/// associative on all counters with the fresh tracker as identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Trackers {
    config: TrackerConfig,
    /// Absolute step index just before the first observed step.
    start: Option<u64>,
    last: u64,
    n: u64,
    births: u64,
    deaths: u64,
    null_deaths: u64,
    /// t_n: observed steps after which the below-critical set was empty.
    empty_steps: u64,
    /// k_n: observed transitions of the below-critical count from 1 to 0.
    empty_returns: u64,
    prev_below: u64,
    phase: Phase,
    gap_count: u64,
    gap_sum: u64,
    excursion_count: u64,
    excursion_sum: u64,
    /// Lengths of stretches whose start was not observed; keeps the time
    /// partition exact for mid-run attachment.
    discarded_sum: u64,
    gap_samples: SampleLog,
    excursion_samples: SampleLog,
    births_in: Vec<u64>,
    birth_histogram: Option<Histogram>,
}

impl Trackers {
    pub fn new(config: TrackerConfig) -> Self {
        let birth_histogram = config
            .birth_histogram
            .map(|(bins, lo, hi)| Histogram::new(bins, lo, hi).expect("invalid histogram config"));
        let cap = config.stretch_sample_cap;
        let intervals = config.intervals.len();
        Trackers {
            config,
            start: None,
            last: 0,
            n: 0,
            births: 0,
            deaths: 0,
            null_deaths: 0,
            empty_steps: 0,
            empty_returns: 0,
            prev_below: 0,
            phase: Phase::Gap { len: 0 },
            gap_count: 0,
            gap_sum: 0,
            excursion_count: 0,
            excursion_sum: 0,
            discarded_sum: 0,
            gap_samples: SampleLog::new(cap, 0x9a3f_52c1),
            excursion_samples: SampleLog::new(cap, 0x5d71_e604),
            births_in: vec![0; intervals],
            birth_histogram,
        }
    }

    /// Record the event of absolute step `n` and the below-critical count
    /// after it. Must be called once per step, in order.
    pub fn observe(&mut self, n: u64, event: StepEvent, below_after: u64) -> Result<()> {
        if matches!(self.phase, Phase::Sealed { .. }) {
            return Err(Error::ObserveAfterMerge);
        }
        match self.start {
            Some(_) => {
                if n != self.last + 1 {
                    return Err(Error::ObserveOutOfOrder {
                        expected: self.last + 1,
                        got: n,
                    });
                }
            }
            None => {
                let offset = n.checked_sub(1).ok_or(Error::ObserveOutOfOrder {
                    expected: 1,
                    got: n,
                })?;
                self.start = Some(offset);
                // attaching mid-run: the current stretch started unobserved
                if offset > 0 && below_after > 0 {
                    self.phase = Phase::Excursion {
                        len: 0,
                        discard: true,
                    };
                }
            }
        }
        self.last = n;
        self.n += 1;

        match event {
            StepEvent::Birth { fitness } => {
                self.births += 1;
                for (slot, &(a, b)) in self.births_in.iter_mut().zip(&self.config.intervals) {
                    if a < fitness && fitness < b {
                        *slot += 1;
                    }
                }
                if let Some(h) = &mut self.birth_histogram {
                    h.record(fitness);
                }
            }
            StepEvent::Death { .. } => self.deaths += 1,
            StepEvent::NullDeath => self.null_deaths += 1,
        }

        if self.config.below_critical_stats {
            if below_after == 0 {
                self.empty_steps += 1;
                if self.prev_below == 1 {
                    self.empty_returns += 1;
                }
            }
            self.phase = match self.phase {
                Phase::Gap { len } => {
                    let len = len + 1;
                    if below_after > 0 {
                        self.gap_count += 1;
                        self.gap_sum += len;
                        self.gap_samples.push(len);
                        Phase::Excursion {
                            len: 0,
                            discard: false,
                        }
                    } else {
                        Phase::Gap { len }
                    }
                }
                Phase::Excursion { len, discard } => {
                    let len = len + 1;
                    if below_after == 0 {
                        if discard {
                            self.discarded_sum += len;
                        } else {
                            self.excursion_count += 1;
                            self.excursion_sum += len;
                            self.excursion_samples.push(len);
                        }
                        Phase::Gap { len: 0 }
                    } else {
                        Phase::Excursion { len, discard }
                    }
                }
                Phase::Sealed { .. } => unreachable!("checked above"),
            };
            self.prev_below = below_after;
        }
        Ok(())
    }

    /// Combine two trackers from independent runs. All counters add, stretch
    /// samples concatenate (subsampled once past the cap). The result only
    /// aggregates; feeding it further events is an error. A tracker that has
    /// observed nothing is the exact identity.
    pub fn merge(self, other: Trackers) -> Result<Trackers> {
        if self.config != other.config {
            return Err(Error::TrackerConfigMismatch);
        }
        if self.n == 0 {
            return Ok(other);
        }
        if other.n == 0 {
            return Ok(self);
        }
        let birth_histogram = match (self.birth_histogram, &other.birth_histogram) {
            (Some(mut a), Some(b)) => {
                a.merge(b)?;
                Some(a)
            }
            (None, None) => None,
            _ => return Err(Error::TrackerConfigMismatch),
        };
        Ok(Trackers {
            config: self.config,
            start: None,
            last: 0,
            n: self.n + other.n,
            births: self.births + other.births,
            deaths: self.deaths + other.deaths,
            null_deaths: self.null_deaths + other.null_deaths,
            empty_steps: self.empty_steps + other.empty_steps,
            empty_returns: self.empty_returns + other.empty_returns,
            prev_below: 0,
            phase: Phase::Sealed {
                in_progress: self.phase.in_progress() + other.phase.in_progress(),
            },
            gap_count: self.gap_count + other.gap_count,
            gap_sum: self.gap_sum + other.gap_sum,
            excursion_count: self.excursion_count + other.excursion_count,
            excursion_sum: self.excursion_sum + other.excursion_sum,
            discarded_sum: self.discarded_sum + other.discarded_sum,
            gap_samples: self.gap_samples.merge(other.gap_samples),
            excursion_samples: self.excursion_samples.merge(other.excursion_samples),
            births_in: self
                .births_in
                .iter()
                .zip(&other.births_in)
                .map(|(a, b)| a + b)
                .collect(),
            birth_histogram,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Observed steps.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn births(&self) -> u64 {
        self.births
    }

    pub fn deaths(&self) -> u64 {
        self.deaths
    }

    pub fn null_deaths(&self) -> u64 {
        self.null_deaths
    }

    /// t_n: steps after which the below-critical set was empty.
    pub fn empty_steps(&self) -> u64 {
        self.empty_steps
    }

    /// k_n: completed returns of the below-critical count from 1 to 0.
    pub fn empty_returns(&self) -> u64 {
        self.empty_returns
    }

    /// Births whose fitness fell strictly inside configured interval `i`.
    pub fn births_in(&self, i: usize) -> u64 {
        self.births_in[i]
    }

    pub fn gap_count(&self) -> u64 {
        self.gap_count
    }

    pub fn excursion_count(&self) -> u64 {
        self.excursion_count
    }

    /// Completed empty-stretch lengths (a reservoir once past the cap).
    pub fn gap_samples(&self) -> &[u64] {
        &self.gap_samples.items
    }

    /// Completed nonempty-stretch lengths (a reservoir once past the cap).
    pub fn excursion_samples(&self) -> &[u64] {
        &self.excursion_samples.items
    }

    pub fn birth_histogram(&self) -> Option<&Histogram> {
        self.birth_histogram.as_ref()
    }

    /// Exact integer identity: completed stretches plus the in-progress one
    /// partition every observed step.
    pub fn time_partition_holds(&self) -> bool {
        !self.config.below_critical_stats
            || self.gap_sum + self.excursion_sum + self.discarded_sum + self.phase.in_progress()
                == self.n
    }
}

/// Per-run density estimate for an interval, with its limit target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    /// count_in(a, b) / n.
    pub estimate: f64,
    /// p * P(a < X < b) under the chain's fitness law.
    pub target: f64,
    /// Whether the interval sits strictly above the critical value, where
    /// the estimate converges to the target. The estimate is still returned
    /// when this is false; it just proves nothing.
    pub limit_applies: bool,
}

/// Fraction of steps that left a living species inside the open interval
/// (a, b), together with the law's limit target `p * P(a < X < b)`.
pub fn density_estimate<R: Rng>(chain: &Chain<R>, a: f64, b: f64) -> Result<DensityEstimate> {
    if chain.n() == 0 {
        return Err(Error::EmptyChain);
    }
    let count = chain.count_in(a, b)?;
    let law = chain.law();
    let p = chain.params().p();
    Ok(DensityEstimate {
        estimate: count as f64 / chain.n() as f64,
        target: p * (law.cdf(b) - law.cdf(a)),
        limit_applies: chain.critical_value().map(|vc| vc < a).unwrap_or(false),
    })
}

/// Outcome of the square-root growth check on the empty-step count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundCheck {
    pub eps: f64,
    /// (2 / (p * f_c)) * n^(1/2 + eps).
    pub threshold: f64,
    pub pass: bool,
    /// empty_steps / threshold.
    pub margin: f64,
}

/// Check `empty_steps <= (2/(p*f_c)) * n^(1/2+eps)`: the empty-step count of
/// a supercritical run grows like a square root, not linearly.
pub fn tail_bound_check(
    trackers: &Trackers,
    params: &ModelParams,
    eps: f64,
) -> Result<TailBoundCheck> {
    if !params.is_supercritical() {
        return Err(Error::NoCriticalValue(params.p()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositive {
            name: "eps",
            value: eps,
        });
    }
    let c = 2.0 / (params.p() * params.critical_fitness());
    let threshold = c * (trackers.n() as f64).powf(0.5 + eps);
    let t = trackers.empty_steps() as f64;
    let margin = if threshold > 0.0 {
        t / threshold
    } else if t == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(TailBoundCheck {
        eps,
        threshold,
        pass: t <= threshold,
        margin,
    })
}

/// Summary of completed empty/nonempty stretches.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionSummary {
    /// Completed stretches of either kind.
    pub count: u64,
    pub gap_count: u64,
    pub excursion_count: u64,
    pub mean_gap: Option<f64>,
    pub mean_excursion: Option<f64>,
    /// (length, occurrences) over retained samples, ascending.
    pub gap_histogram: Vec<(u64, u64)>,
    pub excursion_histogram: Vec<(u64, u64)>,
}

/// Means use the exact sums over completed stretches only; the in-progress
/// stretch never biases them. Histograms come from the retained samples.
pub fn excursion_summary(trackers: &Trackers) -> ExcursionSummary {
    let mean = |sum: u64, count: u64| (count > 0).then(|| sum as f64 / count as f64);
    ExcursionSummary {
        count: trackers.gap_count + trackers.excursion_count,
        gap_count: trackers.gap_count,
        excursion_count: trackers.excursion_count,
        mean_gap: mean(trackers.gap_sum, trackers.gap_count),
        mean_excursion: mean(trackers.excursion_sum, trackers.excursion_count),
        gap_histogram: length_histogram(&trackers.gap_samples.items),
        excursion_histogram: length_histogram(&trackers.excursion_samples.items),
    }
}

fn length_histogram(samples: &[u64]) -> Vec<(u64, u64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Bounded sample of a stream (reservoir sampling with a fixed-seed RNG, so
/// runs are reproducible). Counts of items seen stay exact.
#[derive(Debug, Clone)]
struct SampleLog {
    cap: usize,
    seen: u64,
    items: Vec<u64>,
    rng: ChaCha8Rng,
}

impl SampleLog {
    fn new(cap: usize, salt: u64) -> Self {
        SampleLog {
            cap,
            seen: 0,
            items: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(salt),
        }
    }

    fn push(&mut self, v: u64) {
        self.seen += 1;
        if self.items.len() < self.cap {
            self.items.push(v);
        } else {
            let j = self.rng.random_range(0..self.seen);
            if (j as usize) < self.cap {
                self.items[j as usize] = v;
            }
        }
    }

    /// Concatenates while the cap allows; past it, keeps a size-weighted
    /// subsample of both sides.
    fn merge(mut self, mut other: SampleLog) -> SampleLog {
        debug_assert_eq!(self.cap, other.cap);
        let seen = self.seen + other.seen;
        if self.items.len() + other.items.len() <= self.cap {
            self.items.append(&mut other.items);
        } else {
            let take_self = ((self.cap as u128 * self.seen as u128 / seen.max(1) as u128) as usize)
                .min(self.items.len())
                .max(self.cap.saturating_sub(other.items.len()));
            let take_other = self.cap - take_self;
            partial_shuffle(&mut self.items, take_self, &mut self.rng);
            self.items.truncate(take_self);
            partial_shuffle(&mut other.items, take_other, &mut self.rng);
            self.items.extend_from_slice(&other.items[..take_other]);
        }
        self.seen = seen;
        self.items.shrink_to(self.cap);
        other.items = Vec::new();
        self
    }
}

fn partial_shuffle(items: &mut [u64], take: usize, rng: &mut ChaCha8Rng) {
    for i in 0..take.min(items.len()) {
        let j = rng.random_range(i..items.len());
        items.swap(i, j);
    }
}

impl PartialEq for SampleLog {
    fn eq(&self, other: &Self) -> bool {
        (self.cap, self.seen, &self.items) == (other.cap, other.seen, &other.items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::FitnessLaw;
    use proptest::prelude::*;

    fn birth(fitness: f64) -> StepEvent {
        StepEvent::Birth { fitness }
    }

    fn death(fitness: f64) -> StepEvent {
        StepEvent::Death { fitness }
    }

    /// Feed a synthetic below-critical trajectory; births carry fitness 0.9.
    fn feed(config: TrackerConfig, below: &[u64]) -> Trackers {
        let mut t = Trackers::new(config);
        let mut prev = 0u64;
        for (i, &b) in below.iter().enumerate() {
            let event = if b > prev {
                birth(0.3)
            } else if b < prev {
                death(0.3)
            } else {
                birth(0.9)
            };
            t.observe(i as u64 + 1, event, b).unwrap();
            prev = b;
        }
        t
    }

    #[test]
    fn counts_empty_steps_and_returns() {
        let t = feed(TrackerConfig::default(), &[0, 1, 0, 0]);
        assert_eq!(t.empty_steps(), 3);
        assert_eq!(t.empty_returns(), 1);
        assert_eq!(t.n(), 4);
    }

    #[test]
    fn all_empty_trajectory() {
        let t = feed(TrackerConfig::default(), &[0; 10]);
        assert_eq!(t.empty_steps(), 10);
        assert_eq!(t.empty_returns(), 0);
        assert_eq!(t.gap_count(), 0); // gap still in progress
        assert!(t.time_partition_holds());
    }

    #[test]
    fn first_gap_recorded_at_first_nonempty_step() {
        let t = feed(TrackerConfig::default(), &[0, 0, 1]);
        assert_eq!(t.gap_samples(), &[3]);
        assert_eq!(t.gap_count(), 1);
    }

    #[test]
    fn excursion_of_length_one() {
        // enter at step 1, return at step 2
        let t = feed(TrackerConfig::default(), &[1, 0]);
        assert_eq!(t.excursion_samples(), &[1]);
        assert_eq!(t.empty_returns(), 1);
        assert_eq!(excursion_summary(&t).mean_excursion, Some(1.0));
    }

    #[test]
    fn returns_count_equals_completed_excursions() {
        let t = feed(
            TrackerConfig::default(),
            &[0, 1, 2, 1, 0, 0, 1, 0, 1, 1, 0, 1],
        );
        assert_eq!(t.empty_returns(), t.excursion_count());
        assert!(t.time_partition_holds());
        assert!(t.empty_returns() <= t.empty_steps());
    }

    #[test]
    fn interval_birth_counts_are_strict() {
        let config = TrackerConfig::default().with_intervals(vec![(0.2, 0.4), (0.4, 0.9)]);
        let mut t = Trackers::new(config);
        for (i, f) in [0.2, 0.3, 0.4, 0.5, 0.9].iter().enumerate() {
            t.observe(i as u64 + 1, birth(*f), 0).unwrap();
        }
        assert_eq!(t.births_in(0), 1); // only 0.3
        assert_eq!(t.births_in(1), 1); // only 0.5
        assert_eq!(t.births(), 5);
    }

    #[test]
    fn birth_histogram_records_births_only() {
        let config = TrackerConfig::default().with_birth_histogram(2, 0.0, 1.0);
        let mut t = Trackers::new(config);
        t.observe(1, birth(0.1), 0).unwrap();
        t.observe(2, death(0.1), 0).unwrap();
        t.observe(3, birth(0.9), 0).unwrap();
        assert_eq!(t.birth_histogram().unwrap().counts(), &[1, 1]);
    }

    #[test]
    fn rejects_out_of_order_observation() {
        let mut t = Trackers::new(TrackerConfig::default());
        t.observe(1, birth(0.5), 0).unwrap();
        assert_eq!(
            t.observe(3, birth(0.5), 0),
            Err(Error::ObserveOutOfOrder {
                expected: 2,
                got: 3
            })
        );
        assert_eq!(
            t.observe(1, birth(0.5), 0),
            Err(Error::ObserveOutOfOrder {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn mid_run_attachment_discards_partial_excursion() {
        let mut t = Trackers::new(TrackerConfig::default());
        // attach at absolute step 100 with the set already nonempty
        t.observe(100, birth(0.9), 2).unwrap();
        t.observe(101, death(0.1), 1).unwrap();
        t.observe(102, death(0.1), 0).unwrap();
        assert_eq!(t.excursion_count(), 0);
        assert!(t.time_partition_holds());
        // the next full excursion is recorded
        t.observe(103, birth(0.1), 1).unwrap();
        t.observe(104, death(0.1), 0).unwrap();
        assert_eq!(t.excursion_samples(), &[1]);
    }

    #[test]
    fn merge_adds_counters() {
        let a = feed(TrackerConfig::default(), &[0, 1, 0, 0]); // t=3, k=1
        let b = feed(TrackerConfig::default(), &[0, 0, 1, 0, 1, 0, 0, 0]); // t=6? k=2
        let (ta, ka) = (a.empty_steps(), a.empty_returns());
        let (tb, kb) = (b.empty_steps(), b.empty_returns());
        let m = a.merge(b).unwrap();
        assert_eq!(m.empty_steps(), ta + tb);
        assert_eq!(m.empty_returns(), ka + kb);
        assert_eq!(m.n(), 12);
        assert!(m.time_partition_holds());
        // merged trackers are aggregation-only
        let mut m = m;
        assert_eq!(
            m.observe(13, birth(0.5), 0),
            Err(Error::ObserveAfterMerge)
        );
    }

    #[test]
    fn merge_identity_is_exact() {
        let t = feed(TrackerConfig::default(), &[0, 1, 1, 0]);
        let empty = Trackers::new(TrackerConfig::default());
        assert_eq!(empty.clone().merge(t.clone()).unwrap(), t);
        assert_eq!(t.clone().merge(empty).unwrap(), t);
    }

    #[test]
    fn merge_requires_equal_configs() {
        let a = Trackers::new(TrackerConfig::default().with_intervals(vec![(0.1, 0.2)]));
        let b = Trackers::new(TrackerConfig::default());
        assert_eq!(a.merge(b), Err(Error::TrackerConfigMismatch));
    }

    proptest! {
        #[test]
        fn merge_is_associative_on_counters(
            xs in prop::collection::vec(0u64..3, 1..40),
            ys in prop::collection::vec(0u64..3, 1..40),
            zs in prop::collection::vec(0u64..3, 1..40),
        ) {
            // force trajectories to move by at most one per step
            let clamp = |v: Vec<u64>| {
                let mut prev = 0u64;
                v.into_iter().map(|x| {
                    let x = x.min(prev + 1);
                    prev = x;
                    x
                }).collect::<Vec<_>>()
            };
            let (xs, ys, zs) = (clamp(xs), clamp(ys), clamp(zs));
            let mk = || TrackerConfig::default();
            let (a, b, c) = (feed(mk(), &xs), feed(mk(), &ys), feed(mk(), &zs));
            let left = a.clone().merge(b.clone()).unwrap().merge(c.clone()).unwrap();
            let right = a.merge(b.merge(c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }

    #[test]
    fn reservoir_caps_memory_but_not_counts() {
        let config = TrackerConfig {
            stretch_sample_cap: 8,
            ..TrackerConfig::default()
        };
        // 50 gap/excursion cycles of lengths 1
        let mut below = Vec::new();
        for _ in 0..50 {
            below.push(1);
            below.push(0);
        }
        let t = feed(config, &below);
        assert_eq!(t.gap_samples().len(), 8);
        assert_eq!(t.gap_count(), 50);
        assert_eq!(excursion_summary(&t).mean_gap, Some(1.0));
        assert!(t.time_partition_holds());
    }

    #[test]
    fn density_estimate_matches_population_count() {
        let params = ModelParams::new(2.0 / 3.0).unwrap();
        let mut chain = Chain::new(params, FitnessLaw::uniform(), 5);
        let mut t = Trackers::new(TrackerConfig::for_params(&params));
        chain.run(10_000, &mut t);
        let d = density_estimate(&chain, 0.6, 0.8).unwrap();
        assert_eq!(
            d.estimate,
            chain.count_in(0.6, 0.8).unwrap() as f64 / 10_000.0
        );
        assert!(d.limit_applies);
        assert!((d.target - params.p() * 0.2).abs() < 1e-12);
        // below the critical value the estimate is returned but flagged
        let d2 = density_estimate(&chain, 0.1, 0.3).unwrap();
        assert!(!d2.limit_applies);
    }

    #[test]
    fn density_targets_for_general_laws() {
        let params = ModelParams::new(2.0 / 3.0).unwrap();
        let law = FitnessLaw::exponential(1.0).unwrap();
        let mut chain = Chain::new(params, law, 5);
        let mut t = Trackers::new(TrackerConfig::for_params(&params));
        chain.run(100, &mut t);
        let d = density_estimate(&chain, 1.0, 2.0).unwrap();
        let want = (2.0 / 3.0) * ((-1.0f64).exp() - (-2.0f64).exp());
        assert!((d.target - want).abs() < 1e-12);
    }

    #[test]
    fn density_estimate_requires_steps() {
        let params = ModelParams::new(0.6).unwrap();
        let chain = Chain::new(params, FitnessLaw::uniform(), 0);
        assert_eq!(density_estimate(&chain, 0.6, 0.8), Err(Error::EmptyChain));
    }

    #[test]
    fn tail_bound_examples() {
        let params = ModelParams::new(2.0 / 3.0).unwrap();
        // t_n = 1200 out of n = 10^6
        let mut below = vec![0u64; 1200];
        below.extend(std::iter::repeat_n(1, 1_000_000 - 1200));
        // keep |below| steps of 1: the trajectory 0...0,1,1,...,1 moves once
        let t = feed(TrackerConfig::default(), &below);
        assert_eq!(t.empty_steps(), 1200);
        let check = tail_bound_check(&t, &params, 0.1).unwrap();
        let expect_threshold = 6.0 * 1e6f64.powf(0.6);
        assert!((check.threshold - expect_threshold).abs() / expect_threshold < 1e-12);
        assert!(check.pass);
        assert!((check.margin - 1200.0 / expect_threshold).abs() < 1e-9);
        assert!((check.margin - 0.050).abs() < 0.001);
    }

    #[test]
    fn tail_bound_edge_cases() {
        let params = ModelParams::new(2.0 / 3.0).unwrap();
        let empty = Trackers::new(TrackerConfig::default());
        let check = tail_bound_check(&empty, &params, 0.1).unwrap();
        assert!(check.pass);
        assert_eq!(check.margin, 0.0);

        // t_n = n fails once n exceeds the threshold curve
        let t = feed(TrackerConfig::default(), &[0; 100]);
        let check = tail_bound_check(&t, &params, 0.1).unwrap();
        assert!(!check.pass);
        assert!(check.margin > 1.0);

        let sub = ModelParams::new(0.4).unwrap();
        assert!(tail_bound_check(&t, &sub, 0.1).is_err());
        assert!(tail_bound_check(&t, &params, 0.0).is_err());
    }

    #[test]
    fn excursion_summary_single_gap() {
        let t = feed(TrackerConfig::default(), &[0, 0, 1]);
        let s = excursion_summary(&t);
        assert_eq!(s.count, 1);
        assert_eq!(s.mean_gap, Some(3.0));
        assert_eq!(s.mean_excursion, None);
        assert_eq!(s.gap_histogram, vec![(3, 1)]);
    }

    #[test]
    fn subcritical_trackers_skip_below_critical_stats() {
        let params = ModelParams::new(0.4).unwrap();
        let config = TrackerConfig::for_params(&params);
        assert!(!config.below_critical_stats);
        let mut t = Trackers::new(config);
        t.observe(1, birth(0.5), 0).unwrap();
        assert_eq!(t.empty_steps(), 0);
        assert!(t.time_partition_holds());
    }
}
