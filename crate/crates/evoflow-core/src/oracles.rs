//! Exact, simulation-free reference distributions used as ground truth in
//! the verification suites and exposed through the CLI.

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Probability mass function on a contiguous integer support.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePmf {
    /// State value of `probs[0]`.
    pub offset: i64,
    pub probs: Vec<f64>,
    /// Mass pushed past the truncated state space; zero whenever the cap
    /// covers every reachable state.
    pub truncated_mass: f64,
}

impl OraclePmf {
    pub fn prob(&self, state: i64) -> f64 {
        let idx = state - self.offset;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn retained_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (self.offset + i as i64) as f64 * p)
            .sum()
    }

    /// Half the L1 distance to another pmf (supports aligned by state).
    pub fn total_variation(&self, other: &OraclePmf) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = (self.offset + self.probs.len() as i64).max(other.offset + other.probs.len() as i64);
        let mut sum = 0.0;
        for s in lo..hi {
            sum += (self.prob(s) - other.prob(s)).abs();
        }
        sum / 2.0
    }
}

/// One-step transition probabilities of the below-critical species count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LTransition {
    /// Up move: a birth lands below the critical value, probability p*f_c.
    pub up: f64,
    /// Stay (away from zero): a birth lands at or above it.
    pub stay: f64,
    /// Down move: a death, probability q.
    pub down: f64,
    /// Stay at zero: anything but a below-critical birth.
    pub stay_at_zero: f64,
}

/// Transition rates of the below-critical count: up with probability
/// `p*f_c`, down with probability `q` (when nonzero), stay otherwise.
///
/// `p*f_c = q` exactly, so `up` is stored as `q` to keep `up == down`
/// bit-equal, and `stay` as `p - q`; the three rates then sum to exactly 1.
pub fn l_transition_probs(params: &ModelParams) -> Result<LTransition> {
    if !params.is_supercritical() {
        return Err(Error::NoCriticalValue(params.p()));
    }
    let q = params.q();
    Ok(LTransition {
        up: q,
        stay: params.p() - q,
        down: q,
        stay_at_zero: params.p(),
    })
}

/// Exact distribution of the below-critical count after `n` steps from an
/// empty start, by `n` applications of the tridiagonal transition operator
/// on states `0..=cap`. Lossless when `cap >= n` (the count moves up at
/// most once per step); with a smaller cap the leaked mass is reported.
pub fn exact_l_pmf(params: &ModelParams, n: u64, cap: u64) -> Result<OraclePmf> {
    let tr = l_transition_probs(params)?;
    let m = cap as usize;
    let mut cur = vec![0.0f64; m + 1];
    let mut next = vec![0.0f64; m + 1];
    cur[0] = 1.0;
    let mut truncated = 0.0;
    for _ in 0..n {
        next[0] = tr.stay_at_zero * cur[0] + if m >= 1 { tr.down * cur[1] } else { 0.0 };
        for j in 1..=m {
            let from_below = if j == 1 { tr.up * cur[0] } else { tr.up * cur[j - 1] };
            let from_above = if j < m { tr.down * cur[j + 1] } else { 0.0 };
            next[j] = from_below + tr.stay * cur[j] + from_above;
        }
        truncated += tr.up * cur[m];
        std::mem::swap(&mut cur, &mut next);
    }
    // drop the unreachable tail so the support is tight
    let last = cur.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    cur.truncate(last + 1);
    Ok(OraclePmf {
        offset: 0,
        probs: cur,
        truncated_mass: truncated,
    })
}

const ENUMERATION_LIMIT: u64 = 16;

/// Same distribution as [`exact_l_pmf`], by brute force: walk all 3^n
/// sequences of coarse step outcomes (below-critical birth / other birth /
/// death) and add up path probabilities. Costs 3^n, so `n <= 16`.
pub fn enumerate_l_paths(params: &ModelParams, n: u64) -> Result<OraclePmf> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            max: ENUMERATION_LIMIT,
            got: n,
        });
    }
    let tr = l_transition_probs(params)?;
    let mut probs = vec![0.0f64; n as usize + 1];
    walk_outcomes(&tr, n, 0, 1.0, &mut probs);
    Ok(OraclePmf {
        offset: 0,
        probs,
        truncated_mass: 0.0,
    })
}

fn walk_outcomes(tr: &LTransition, left: u64, state: usize, prob: f64, probs: &mut [f64]) {
    if left == 0 {
        probs[state] += prob;
        return;
    }
    walk_outcomes(tr, left - 1, state + 1, prob * tr.up, probs);
    walk_outcomes(tr, left - 1, state, prob * tr.stay, probs);
    walk_outcomes(tr, left - 1, state.saturating_sub(1), prob * tr.down, probs);
}

/// Exact survival P(T > n) of the first hitting time of 0 for the simple
/// symmetric walk started at 1, by dynamic programming with an absorbing
/// barrier. Asymptotically 1/sqrt(pi*n/2).
pub fn srw_survival(n: u64) -> f64 {
    let n = n as usize;
    let mut cur = vec![0.0f64; n + 3];
    let mut next = vec![0.0f64; n + 3];
    cur[1] = 1.0;
    for k in 0..n {
        let top = k + 2;
        for (j, slot) in next.iter_mut().enumerate().take(top + 1).skip(1) {
            let from_left = if j >= 2 { 0.5 * cur[j - 1] } else { 0.0 };
            let from_right = 0.5 * cur[j + 1];
            *slot = from_left + from_right;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.iter().sum()
}

/// Geometric pmf on {1, 2, ...}: P(K = k) = (1-s)^(k-1) * s; mean 1/s.
pub fn geometric_pmf(success: f64, k: u64) -> Result<f64> {
    if !(success > 0.0 && success <= 1.0) {
        return Err(Error::NonPositive {
            name: "geometric success probability",
            value: success,
        });
    }
    if k < 1 {
        return Err(Error::PmfIndexOutOfRange {
            k,
            lo: 1,
            hi: u64::MAX,
        });
    }
    Ok((1.0 - success).powf((k - 1) as f64) * success)
}

/// Binomial pmf C(n, k) p^k (1-p)^(n-k); log-space past n = 50 so large n
/// cannot overflow.
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    if k > n {
        return Err(Error::PmfIndexOutOfRange { k, lo: 0, hi: n });
    }
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    // symmetric in k <-> n-k with p <-> 1-p; use the smaller k
    let (k, p) = if 2 * k > n { (n - k, 1.0 - p) } else { (k, p) };
    if n <= 50 {
        let mut out = p.powf(k as f64) * (1.0 - p).powf((n - k) as f64);
        for i in 1..=k {
            out *= (n - k + i) as f64 / i as f64;
        }
        Ok(out)
    } else {
        let mut log = k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
        for i in 1..=k {
            log += ((n - k + i) as f64 / i as f64).ln();
        }
        Ok(log.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> ModelParams {
        ModelParams::new(p).unwrap()
    }

    #[test]
    fn transition_probs_at_two_thirds() {
        let tr = l_transition_probs(&params(2.0 / 3.0)).unwrap();
        assert!((tr.up - 1.0 / 3.0).abs() < 1e-15);
        assert!((tr.stay - 1.0 / 3.0).abs() < 1e-15);
        assert!((tr.down - 1.0 / 3.0).abs() < 1e-15);
        assert!((tr.stay_at_zero - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn transition_probs_at_three_quarters() {
        let tr = l_transition_probs(&params(0.75)).unwrap();
        assert_eq!(tr.up, 0.25);
        assert_eq!(tr.stay, 0.5);
        assert_eq!(tr.down, 0.25);
    }

    #[test]
    fn up_equals_down_exactly_for_every_p() {
        for i in 1..100 {
            let p = 0.5 + 0.005 * i as f64;
            if p >= 1.0 {
                break;
            }
            let tr = l_transition_probs(&params(p)).unwrap();
            assert_eq!(tr.up, tr.down, "p = {p}");
            assert_eq!(tr.up + tr.stay + tr.down, 1.0, "p = {p}");
            assert_eq!(tr.up + tr.stay_at_zero, 1.0, "p = {p}");
        }
    }

    #[test]
    fn transition_probs_require_supercritical_p() {
        assert!(l_transition_probs(&params(0.5)).is_err());
        assert!(l_transition_probs(&params(0.3)).is_err());
    }

    #[test]
    fn pmf_at_step_zero_is_point_mass() {
        let pmf = exact_l_pmf(&params(2.0 / 3.0), 0, 10).unwrap();
        assert_eq!(pmf.prob(0), 1.0);
        assert_eq!(pmf.truncated_mass, 0.0);
        let brute = enumerate_l_paths(&params(2.0 / 3.0), 0).unwrap();
        assert_eq!(brute.prob(0), 1.0);
    }

    // Hand enumeration for p = 2/3 (up = stay-at-zero-complement = 1/3):
    //   n=1: P(1) = 1/3, P(0) = 2/3
    //   n=2: P(2) = 1/9, P(1) = (1/3)(1/3) + (2/3)(1/3) = 1/3, P(0) = 5/9
    #[test]
    fn pmf_small_cases_match_hand_enumeration() {
        let p = params(2.0 / 3.0);
        let one = exact_l_pmf(&p, 1, 10).unwrap();
        assert!((one.prob(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((one.prob(0) - 2.0 / 3.0).abs() < 1e-15);

        let two = exact_l_pmf(&p, 2, 10).unwrap();
        assert!((two.prob(2) - 1.0 / 9.0).abs() < 1e-15);
        assert!((two.prob(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((two.prob(0) - 5.0 / 9.0).abs() < 1e-15);

        let brute = enumerate_l_paths(&p, 2).unwrap();
        assert!(two.total_variation(&brute) < 1e-15);
    }

    #[test]
    fn operator_power_matches_path_enumeration() {
        for p in [0.55, 2.0 / 3.0, 0.9] {
            let params = params(p);
            for n in 0..=8 {
                let a = exact_l_pmf(&params, n, n.max(1)).unwrap();
                let b = enumerate_l_paths(&params, n).unwrap();
                for s in 0..=n as i64 {
                    assert!(
                        (a.prob(s) - b.prob(s)).abs() < 1e-12,
                        "p = {p}, n = {n}, state {s}: {} vs {}",
                        a.prob(s),
                        b.prob(s)
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_refuses_large_n() {
        assert!(matches!(
            enumerate_l_paths(&params(0.6), 17),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn mass_is_conserved_without_truncation() {
        for n in [1, 10, 100, 1000] {
            let pmf = exact_l_pmf(&params(0.6), n, n).unwrap();
            assert!((pmf.retained_mass() - 1.0).abs() < 1e-12, "n = {n}");
            assert_eq!(pmf.truncated_mass, 0.0);
        }
    }

    #[test]
    fn truncation_mass_is_reported() {
        let pmf = exact_l_pmf(&params(0.9), 50, 3).unwrap();
        assert!(pmf.truncated_mass > 0.0);
        assert!((pmf.retained_mass() + pmf.truncated_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_mean_grows_like_square_root() {
        let p = params(2.0 / 3.0);
        for n in [256u64, 1024] {
            let small = exact_l_pmf(&p, n, n).unwrap().mean();
            let large = exact_l_pmf(&p, 4 * n, 4 * n).unwrap().mean();
            let ratio = large / small;
            assert!(
                (ratio - 2.0).abs() < 0.1,
                "mean({}) / mean({n}) = {ratio}",
                4 * n
            );
        }
    }

    #[test]
    fn srw_survival_small_values() {
        assert_eq!(srw_survival(0), 1.0);
        assert_eq!(srw_survival(1), 0.5);
        assert_eq!(srw_survival(3), 0.375);
    }

    #[test]
    fn srw_survival_nonincreasing_with_parity_plateaus() {
        let values: Vec<f64> = (0..=40).map(srw_survival).collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0]);
        }
        // the hitting time from 1 is odd, so survival cannot drop from an
        // odd index to the next even one
        for m in 1..=19 {
            assert_eq!(values[2 * m - 1], values[2 * m], "m = {m}");
        }
        assert!(values[2] > values[3]);
    }

    #[test]
    fn geometric_pmf_values() {
        assert!((geometric_pmf(1.0 / 3.0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((geometric_pmf(1.0 / 3.0, 2).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!(geometric_pmf(0.0, 1).is_err());
        assert!(geometric_pmf(0.5, 0).is_err());
        let mean: f64 = (1..=200)
            .map(|k| k as f64 * geometric_pmf(1.0 / 3.0, k).unwrap())
            .sum();
        assert!((mean - 3.0).abs() < 1e-10);
    }

    #[test]
    fn binomial_pmf_values() {
        let p = 2.0 / 3.0;
        assert!((binomial_pmf(2, p, 2).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!((binomial_pmf(2, p, 0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((binomial_pmf(2, p, 1).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!(binomial_pmf(2, p, 3).is_err());
        assert!(binomial_pmf(2, 1.5, 1).is_err());
    }

    #[test]
    fn binomial_pmf_normalizes_at_large_n() {
        let total: f64 = (0..=1000).map(|k| binomial_pmf(1000, 0.3, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12, "total = {total}");
        // degenerate edges
        assert_eq!(binomial_pmf(100, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binomial_pmf(100, 1.0, 100).unwrap(), 1.0);
    }
}
