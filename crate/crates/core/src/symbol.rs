//! The exponential symbol inequality behind the commutator estimate:
//!
//! ```text
//! e^{sigma sum |xi_j|} - e^{sigma |sum xi_j|}
//!     <= [24 sigma xi_*]^theta e^{sigma sum |xi_j|},   theta in [0, 1],
//! ```
//!
//! where `xi_*` is the second-largest of the four magnitudes. The left side is
//! evaluated in the cancellation-free form
//! `e^{sigma |sum xi|} (e^{sigma gap} - 1)` with `gap = sum|xi| - |sum xi|`,
//! and the pass/fail comparison is performed on both sides divided by
//! `e^{sigma sum |xi|}`, which keeps every intermediate in `[0, 1]` and rules
//! out overflow.
//!
//! Note on `xi_*`: with the *third*-largest magnitude in the right-hand side
//! the inequality is false — `(xi, -xi, 0, 0)` makes the right side vanish
//! while the left stays positive. Every pair of frequencies contains one entry
//! of magnitude at most the second largest, which is what the cross-term count
//! behind the constant 24 actually uses, so the bound is stated and checked
//! with the second-largest magnitude.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default seed for randomized sampling; override via the CLI.
pub const DEFAULT_SEED: u64 = 1729;

/// Constant in the right-hand side of the bound.
pub const BOUND_CONSTANT: f64 = 24.0;

/// Four real frequencies, canonicalized by magnitude so that every derived
/// quantity is exactly permutation invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyQuadruple {
    /// The input values sorted by (magnitude, sign): the summation order is a
    /// function of the multiset only.
    values: [f64; 4],
}

impl FrequencyQuadruple {
    pub fn new(values: [f64; 4]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frequency quadruple".into()));
        }
        let mut sorted = values;
        sorted.sort_by(|a, b| {
            a.abs()
                .partial_cmp(&b.abs())
                .expect("finite")
                .then(a.partial_cmp(b).expect("finite"))
        });
        Ok(FrequencyQuadruple { values: sorted })
    }

    pub fn values(&self) -> [f64; 4] {
        self.values
    }

    pub fn min_abs(&self) -> f64 {
        self.values[0].abs()
    }

    pub fn third_largest_abs(&self) -> f64 {
        self.values[1].abs()
    }

    pub fn second_largest_abs(&self) -> f64 {
        self.values[2].abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.values[3].abs()
    }

    pub fn signed_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn sum_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// Triangle-inequality gap `sum |xi| - |sum xi| >= 0`.
    pub fn gap(&self) -> f64 {
        (self.sum_abs() - self.signed_sum().abs()).max(0.0)
    }
}

/// Left-hand side of the bound and `sum |xi_j|`; errors when
/// `sigma * sum |xi_j|` exceeds the overflow guard.
pub fn symbol_gap(q: &FrequencyQuadruple, sigma: f64) -> Result<(f64, f64)> {
    check_sigma(q, sigma)?;
    let sum_abs = q.sum_abs();
    let lhs = (sigma * q.signed_sum().abs()).exp() * (sigma * q.gap()).exp_m1();
    Ok((lhs, sum_abs))
}

fn check_sigma(q: &FrequencyQuadruple, sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be a finite nonnegative real, got {sigma}"
        )));
    }
    let product = sigma * q.sum_abs();
    if product > crate::spectral::SIGMA_GUARD {
        return Err(Error::SigmaOverflow {
            product,
            sigma_max: crate::spectral::SIGMA_GUARD / q.sum_abs(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, for sharpness profiling.
    pub slack: f64,
    /// `lhs / ((sigma xi_*)^theta e^{sigma sum|xi|})`: the constant the sample
    /// actually needs, comparable against `24^theta`.
    pub needed_constant: f64,
}

/// Checks the bound at `(q, sigma, theta)`. The decision is made on the
/// normalized sides `1 - e^{-sigma gap} <= (24 sigma xi_*)^theta`.
pub fn check_symbol_bound(q: &FrequencyQuadruple, sigma: f64, theta: f64) -> Result<BoundCheck> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    check_sigma(q, sigma)?;
    let lhs_norm = -(-sigma * q.gap()).exp_m1(); // 1 - e^{-sigma gap} in [0, 1)
    let rhs_norm = (BOUND_CONSTANT * sigma * q.second_largest_abs()).powf(theta);
    let envelope = (sigma * q.sum_abs()).exp();
    let weighted = (sigma * q.second_largest_abs()).powf(theta);
    Ok(BoundCheck {
        pass: lhs_norm <= rhs_norm,
        lhs: lhs_norm * envelope,
        rhs: rhs_norm * envelope,
        slack: (rhs_norm - lhs_norm) * envelope,
        needed_constant: if weighted > 0.0 {
            lhs_norm / weighted
        } else {
            0.0
        },
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FuzzRanges {
    pub xi: (f64, f64),
    pub sigma: (f64, f64),
}

impl Default for FuzzRanges {
    fn default() -> Self {
        FuzzRanges {
            xi: (-100.0, 100.0),
            sigma: (0.0, 5.0),
        }
    }
}

/// Theta values exercised by the randomized fuzz.
pub const FUZZ_THETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub samples: u64,
    pub seed: u64,
    pub violations: u64,
    /// Largest constant needed at theta = 1; the bound uses 24.
    pub empirical_constant: f64,
    /// Sample attaining the largest `lhs / rhs`.
    pub worst_case_quadruple: [f64; 4],
    pub worst_case_sigma: f64,
    pub worst_case_theta: f64,
    pub worst_lhs_over_rhs: f64,
}

/// Randomized verification: `samples` draws of `(xi_1..4, sigma, theta)`,
/// expecting zero violations. Sigma is truncated per draw so the overflow
/// guard always holds.
pub fn run_fuzz(samples: u64, seed: u64, ranges: &FuzzRanges) -> Result<FuzzReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0u64;
    let mut empirical_constant = 0.0f64;
    let mut worst_ratio = -1.0f64;
    let mut worst = ([0.0; 4], 0.0, 0.0);

    for _ in 0..samples {
        let values = [
            rng.random_range(ranges.xi.0..=ranges.xi.1),
            rng.random_range(ranges.xi.0..=ranges.xi.1),
            rng.random_range(ranges.xi.0..=ranges.xi.1),
            rng.random_range(ranges.xi.0..=ranges.xi.1),
        ];
        let q = FrequencyQuadruple::new(values)?;
        let sigma_cap = (0.999 * crate::spectral::SIGMA_GUARD / q.sum_abs().max(1e-300)).min(ranges.sigma.1);
        let sigma = rng.random_range(ranges.sigma.0..=ranges.sigma.1).min(sigma_cap);
        let theta = FUZZ_THETAS[rng.random_range(0..FUZZ_THETAS.len())];

        let check = check_symbol_bound(&q, sigma, theta)?;
        if !check.pass {
            violations += 1;
        }
        if theta == 1.0 {
            empirical_constant = empirical_constant.max(check.needed_constant);
        }
        let ratio = if check.rhs > 0.0 { check.lhs / check.rhs } else { 0.0 };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst = (q.values(), sigma, theta);
        }
    }

    Ok(FuzzReport {
        samples,
        seed,
        violations,
        empirical_constant,
        worst_case_quadruple: worst.0,
        worst_case_sigma: worst.1,
        worst_case_theta: worst.2,
        worst_lhs_over_rhs: worst_ratio,
    })
}

/// Exhaustive check over the integer grid `{-range..range}^4`,
/// `sigma in {0.1, 1}`, `theta in {0, 1/2, 1}`. Returns the violation count
/// (expected zero) and the number of checks run.
pub fn exhaustive_integer_grid(range: i64) -> Result<(u64, u64)> {
    let mut violations = 0u64;
    let mut checks = 0u64;
    for a in -range..=range {
        for b in -range..=range {
            for c in -range..=range {
                for d in -range..=range {
                    let q = FrequencyQuadruple::new([a as f64, b as f64, c as f64, d as f64])?;
                    for sigma in [0.1, 1.0] {
                        for theta in [0.0, 0.5, 1.0] {
                            checks += 1;
                            if !check_symbol_bound(&q, sigma, theta)?.pass {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((violations, checks))
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessProfile {
    /// Counts of `slack / rhs` in 20 equal bins over `[0, 1]`.
    pub histogram: [u64; 20],
    pub samples: u64,
    /// Largest constant needed at the profiled theta.
    pub empirical_constant: f64,
    pub theta: f64,
}

/// Distribution of relative slack over a random sample battery at fixed theta.
pub fn sharpness_profile(
    samples: u64,
    seed: u64,
    ranges: &FuzzRanges,
    theta: f64,
) -> Result<SharpnessProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = [0u64; 20];
    let mut empirical_constant = 0.0f64;
    for _ in 0..samples {
        let values = [
            rng.random_range(ranges.xi.0..=ranges.xi.1),
            rng.random_range(ranges.xi.0..=ranges.xi.1),
            rng.random_range(ranges.xi.0..=ranges.xi.1),
            rng.random_range(ranges.xi.0..=ranges.xi.1),
        ];
        let q = FrequencyQuadruple::new(values)?;
        let sigma_cap = (0.999 * crate::spectral::SIGMA_GUARD / q.sum_abs().max(1e-300)).min(ranges.sigma.1);
        let sigma = rng.random_range(ranges.sigma.0..=ranges.sigma.1).min(sigma_cap);
        let check = check_symbol_bound(&q, sigma, theta)?;
        empirical_constant = empirical_constant.max(check.needed_constant);
        if check.rhs > 0.0 {
            let rel = (check.slack / check.rhs).clamp(0.0, 1.0);
            let bin = ((rel * 20.0) as usize).min(19);
            histogram[bin] += 1;
        }
    }
    Ok(SharpnessProfile {
        histogram,
        samples,
        empirical_constant,
        theta,
    })
}
