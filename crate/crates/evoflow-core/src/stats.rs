//! Small statistical helpers shared by the verification suites and the CLI.

/// One-sample Kolmogorov-Smirnov statistic of `samples` against a reference
/// cdf: sup over x of |F_n(x) - F(x)|. Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS statistic needs at least one sample");
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        sup = sup
            .max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs());
    }
    sup
}

/// Empirical quantile of an ascending-sorted slice: the smallest order
/// statistic whose rank fraction reaches `q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile level {q} outside [0, 1]");
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.max(1) - 1]
}
