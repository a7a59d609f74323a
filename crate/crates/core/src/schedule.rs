//! Continuation schedule: local existence step `delta = c0 (1 + A0)^{-r}`,
//! strip width `sigma(T) = (delta / (2^{7/2} C T A0^3))^2` (capped at the
//! initial width), step count `n = floor(T / delta)`, and verification of the
//! per-step energy inequalities
//!
//! ```text
//! sup_{[0, k delta]} A_sigma^2 <= A_sigma^2(0) + k C sigma^{1/2} 2^{5/2} A_{sigma0}^5(0)
//! sup_{[0, k delta]} A_sigma^2 <= 2 A_{sigma0}^2(0)
//! ```
//!
//! against measured trajectory norms. The width formula is the equality case
//! of `(2T/delta) C sigma^{1/2} 2^{5/2} A_{sigma0}^3(0) = 1`, which makes the
//! accumulated increment stay below the initial energy over all n steps; it
//! scales as `sigma = c1 T^{-2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gevrey::{gevrey_norm, measure_a, GevreyParams};
use crate::solver::Trajectory;

/// `2^{5/2}`: the energy headroom factor `(2 A^2)^{5/2} / A^5`.
pub const HEADROOM_5_2: f64 = 5.656854249492381; // 2^{5/2}
/// `2^{7/2}`, the combined factor `2 * 2^{5/2}` in the width condition.
pub const HEADROOM_7_2: f64 = 11.313708498984761; // 2^{7/2}

/// Margin used when comparing measured sups against scheduled bounds: the
/// solver conserves the sigma = 0 energy only to this relative accuracy.
pub const MEASUREMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SchedulerConstants {
    pub c0: f64,
    pub r: f64,
    pub c_const: f64,
}

impl Default for SchedulerConstants {
    fn default() -> Self {
        SchedulerConstants {
            c0: 0.1,
            r: 2.0,
            c_const: 1.0,
        }
    }
}

impl SchedulerConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("c0 must be positive, got {}", self.c0)));
        }
        if !(self.r > 1.0) {
            return Err(Error::InvalidParameter(format!("r must exceed 1, got {}", self.r)));
        }
        if !(self.c_const > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C must be positive, got {}",
                self.c_const
            )));
        }
        Ok(())
    }
}

/// Local existence step `delta = c0 (1 + A0)^{-r}`.
pub fn local_timestep(a0: f64, c0: f64, r: f64) -> Result<f64> {
    if !(a0 >= 0.0) || !a0.is_finite() {
        return Err(Error::InvalidParameter(format!("A0 must be nonnegative, got {a0}")));
    }
    SchedulerConstants {
        c0,
        r,
        c_const: 1.0,
    }
    .validate()?;
    Ok(c0 * (1.0 + a0).powf(-r))
}

/// Strip width for horizon `T`: `(delta / (2^{7/2} C T A0^3))^2`, capped at
/// `sigma0`. Computed with the horizon as the last factor so that doubling `T`
/// quarters the width bit-exactly.
pub fn strip_width(t: f64, delta: f64, a0: f64, c_const: f64, sigma0: f64) -> Result<f64> {
    if !(a0 > 0.0) {
        return Err(Error::InvalidParameter(format!("A0 must be positive, got {a0}")));
    }
    if !(sigma0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma0 must be positive, got {sigma0}"
        )));
    }
    if t < delta {
        return Err(Error::ShortTimeRegime { t, delta });
    }
    let base = HEADROOM_7_2 * c_const * a0.powi(3);
    let sqrt_sigma = delta / (base * t);
    let sigma = sqrt_sigma * sqrt_sigma;
    Ok(sigma.min(sigma0))
}

/// The continuation artifacts for one horizon.
#[derive(Debug, Clone, Serialize)]
pub struct SchedulePlan {
    pub t_horizon: f64,
    /// `A_{sigma0}(0)`, the weighted norm of the datum.
    pub a0: f64,
    pub sigma0: f64,
    pub c0: f64,
    pub r: f64,
    pub c_const: f64,
    /// Local step.
    pub delta: f64,
    /// Step count with `T in [n delta, (n+1) delta)`.
    pub n: u64,
    /// Chosen strip width (capped at `sigma0`).
    pub sigma: f64,
    /// Coefficient of the uncapped width law `sigma = c1 T^{-2}`.
    pub c1: f64,
    /// True when the uncapped formula exceeded `sigma0`.
    pub capped: bool,
}

pub fn make_plan(
    a0: f64,
    sigma0: f64,
    t_horizon: f64,
    constants: &SchedulerConstants,
) -> Result<SchedulePlan> {
    constants.validate()?;
    let delta = local_timestep(a0, constants.c0, constants.r)?;
    if !(a0 > 0.0) {
        return Err(Error::InvalidParameter(
            "plans need a positive datum norm; the zero datum is global as-is".into(),
        ));
    }
    let sigma = strip_width(t_horizon, delta, a0, constants.c_const, sigma0)?;

    let mut n = (t_horizon / delta).floor();
    // repair ulp misalignment at exact multiples
    while (n + 1.0) * delta <= t_horizon {
        n += 1.0;
    }
    while n * delta > t_horizon {
        n -= 1.0;
    }

    let base = HEADROOM_7_2 * constants.c_const * a0.powi(3);
    let c1_sqrt = delta / base;
    let c1 = c1_sqrt * c1_sqrt;

    Ok(SchedulePlan {
        t_horizon,
        a0,
        sigma0,
        c0: constants.c0,
        r: constants.r,
        c_const: constants.c_const,
        delta,
        n: n as u64,
        sigma,
        c1,
        capped: sigma == sigma0 && c1 / (t_horizon * t_horizon) > sigma0,
    })
}

/// Plan for data measured in a Sobolev-weighted norm with `s != 0`: run the
/// `s = 0` machinery at half the initial width (the embedding into the plain
/// exponential class costs half the strip), and report the final width after
/// embedding back, which halves it once more.
#[derive(Debug, Clone, Serialize)]
pub struct GeneralSPlan {
    /// Underlying `s = 0` plan at width `sigma0 / 2`.
    pub base: SchedulePlan,
    pub s: f64,
    /// Strip width certified for the `s`-weighted class: `base.sigma / 2`.
    pub reported_sigma: f64,
}

/// `a0_half` is the datum norm measured at width `sigma0 / 2` with `s = 0`.
pub fn make_plan_general_s(
    a0_half: f64,
    sigma0: f64,
    s: f64,
    t_horizon: f64,
    constants: &SchedulerConstants,
) -> Result<GeneralSPlan> {
    let base = make_plan(a0_half, sigma0 / 2.0, t_horizon, constants)?;
    let reported_sigma = base.sigma / 2.0;
    Ok(GeneralSPlan {
        base,
        s,
        reported_sigma,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InductionStep {
    pub k: u64,
    /// End of the covered interval, `k * delta`.
    pub t_end: f64,
    /// Measured `sup_{[0, k delta]} A_sigma^2`.
    pub sup_a2: f64,
    /// Incremental bound `A_sigma^2(0) + k C sigma^{1/2} 2^{5/2} A_{sigma0}^5(0)`.
    pub bound_incremental: f64,
    /// Uniform bound `2 A_{sigma0}^2(0)`.
    pub bound_uniform: f64,
    pub pass_incremental: bool,
    pub pass_uniform: bool,
    pub margin_incremental: f64,
    pub margin_uniform: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InductionReport {
    pub sigma: f64,
    pub sigma0: f64,
    pub delta: f64,
    pub steps: Vec<InductionStep>,
    pub failures: u64,
    /// `A_sigma^2(0)`.
    pub a2_sigma_0: f64,
    /// `A_{sigma0}^2(0)`.
    pub a2_sigma0_0: f64,
    /// Smallest constant for which every incremental inequality holds.
    pub smallest_passing_c: f64,
}

/// Checks both induction inequalities for every `k <= n` against measured
/// norms. Comparisons carry the solver's conservation tolerance
/// (`MEASUREMENT_TOL * A_sigma^2(0)`); failures are reported, not raised.
pub fn verify_induction(traj: &Trajectory, plan: &SchedulePlan) -> Result<InductionReport> {
    let span_needed = plan.n as f64 * plan.delta;
    if traj.span() < span_needed * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "trajectory spans {:.6} but the plan needs {:.6}",
            traj.span(),
            span_needed
        )));
    }

    let a_sigma = measure_a(traj, plan.sigma)?;
    let a0_sq = a_sigma[0].1 * a_sigma[0].1;
    let a_sigma0_initial = gevrey_norm(traj.initial(), GevreyParams::new(plan.sigma0, 0.0))?;
    let a2_sigma0 = a_sigma0_initial * a_sigma0_initial;
    let increment_unit =
        plan.c_const * plan.sigma.sqrt() * HEADROOM_5_2 * a_sigma0_initial.powi(5);
    let bound_uniform = 2.0 * a2_sigma0;
    let tol = MEASUREMENT_TOL * a0_sq;

    let mut steps = Vec::with_capacity(plan.n as usize);
    let mut failures = 0u64;
    let mut smallest_c = 0.0f64;
    let mut running_sup = a0_sq;
    let mut cursor = 0usize;

    for k in 1..=plan.n {
        let t_end = k as f64 * plan.delta;
        while cursor < a_sigma.len() && a_sigma[cursor].0 <= t_end * (1.0 + 1e-12) {
            let a2 = a_sigma[cursor].1 * a_sigma[cursor].1;
            running_sup = running_sup.max(a2);
            cursor += 1;
        }
        let bound_incremental = a0_sq + k as f64 * increment_unit;
        let pass_incremental = running_sup - bound_incremental <= tol;
        let pass_uniform = running_sup - bound_uniform <= tol;
        if !pass_incremental || !pass_uniform {
            failures += 1;
        }
        if increment_unit > 0.0 {
            let needed =
                (running_sup - a0_sq) / (k as f64 * plan.sigma.sqrt() * HEADROOM_5_2
                    * a_sigma0_initial.powi(5));
            smallest_c = smallest_c.max(needed);
        }
        steps.push(InductionStep {
            k,
            t_end,
            sup_a2: running_sup,
            bound_incremental,
            bound_uniform,
            pass_incremental,
            pass_uniform,
            margin_incremental: bound_incremental - running_sup,
            margin_uniform: bound_uniform - running_sup,
        });
    }

    Ok(InductionReport {
        sigma: plan.sigma,
        sigma0: plan.sigma0,
        delta: plan.delta,
        steps,
        failures,
        a2_sigma_0: a0_sq,
        a2_sigma0_0: a2_sigma0,
        smallest_passing_c: smallest_c.max(0.0),
    })
}
