use thiserror::Error;

/// Errors reported by simulator construction, queries, and reference
/// computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("birth probability must lie strictly inside (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),

    #[error("no finite critical value for p = {0}: the critical fitness (1-p)/p is below 1 only when p > 1/2")]
    NoCriticalValue(f64),

    #[error("invalid interval ({0}, {1}): endpoints must satisfy a <= b and not be NaN")]
    InvalidInterval(f64, f64),

    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid histogram: need at least one bin and lo < hi, got {bins} bins over [{lo}, {hi})")]
    InvalidHistogram { bins: usize, lo: f64, hi: f64 },

    #[error("events must be observed in step order: expected step {expected}, got {got}")]
    ObserveOutOfOrder { expected: u64, got: u64 },

    #[error("a merged tracker only aggregates; it cannot observe further events")]
    ObserveAfterMerge,

    #[error("cannot merge trackers with different configurations")]
    TrackerConfigMismatch,

    #[error("statistic undefined on a chain that has taken no steps")]
    EmptyChain,

    #[error("path enumeration costs 3^n and is limited to n <= {max}, got {got}")]
    EnumerationTooLarge { max: u64, got: u64 },

    #[error("pmf index k = {k} outside the support {lo}..={hi}")]
    PmfIndexOutOfRange { k: u64, lo: u64, hi: u64 },

    #[error("threshold estimation needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("ring needs at least 3 sites, got {0}")]
    RingTooSmall(usize),

    #[error("invalid sampling plan: updates ({updates}) must be >= burn_in ({burn_in}) and sample_every ({sample_every}) >= 1")]
    InvalidSamplingPlan {
        updates: u64,
        burn_in: u64,
        sample_every: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
