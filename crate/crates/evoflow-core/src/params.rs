use crate::error::{Error, Result};

/// Model parameters: birth probability `p`, death probability `q = 1 - p`,
/// and the derived critical fitness `f_c = (1 - p)/p`.
///
/// `q` is exact in IEEE arithmetic for `p >= 1/2`, and `p * f_c` matches `q`
/// to within one rounding unit for every valid `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
    f_c: f64,
}

impl ModelParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let q = 1.0 - p;
        Ok(Self { p, q, f_c: q / p })
    }

    /// Birth probability.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Death probability `1 - p`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Critical fitness `(1 - p)/p`.
    pub fn critical_fitness(&self) -> f64 {
        self.f_c
    }

    /// True when `p > 1/2`, i.e. when the critical fitness falls inside
    /// (0, 1) and the above-threshold limit statements apply. Statistics
    /// specific to that regime are gated on this flag.
    pub fn is_supercritical(&self) -> bool {
        self.p > 0.5
    }
}

/// Critical fitness `(1 - p)/p` for `p` strictly inside (0, 1).
pub fn critical_fitness(p: f64) -> Result<f64> {
    Ok(ModelParams::new(p)?.critical_fitness())
}
