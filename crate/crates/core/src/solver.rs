//! Time evolution of `u_t + u_xxx + (u^4)_x = 0` by integrating-factor RK4:
//! the dispersive part is advanced exactly by the unimodular symbol
//! `e^{i t k^3}`, only the nonlinear term is handed to the explicit stepper.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Relative L2 drift beyond which a run is treated as an integrator failure.
pub const L2_DRIFT_ABORT: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Requested time step; may be tightened by the CFL-like policy.
    pub dt: f64,
    /// Horizon.
    pub t_final: f64,
    /// Keep a snapshot every `sample_stride` steps (the final state is always kept).
    pub sample_stride: usize,
    pub nonlinearity_enabled: bool,
    pub dealias: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64, sample_stride: usize) -> Result<Self> {
        let cfg = SolverConfig {
            dt,
            t_final,
            sample_stride,
            nonlinearity_enabled: true,
            dealias: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter("sample_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Splits `[0, t_final]` into equal steps no longer than `dt`, so the last
    /// step lands on the horizon exactly.
    pub fn for_span(t_final: f64, dt_target: f64, sample_stride: usize) -> Result<Self> {
        if !(t_final > 0.0) || !(dt_target > 0.0) {
            return Err(Error::InvalidParameter(
                "span and target step must be positive".into(),
            ));
        }
        let steps = (t_final / dt_target).ceil().max(1.0);
        SolverConfig::new(t_final / steps, t_final, sample_stride)
    }
}

/// Time-stamped sequence of spectral snapshots from one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    snapshots: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, snapshots: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(Error::InvalidParameter(
                "trajectory needs matching, nonempty times and snapshots".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter("trajectory must start at t = 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("trajectory times must strictly increase".into()));
        }
        let grid = snapshots[0].grid();
        if snapshots.iter().any(|s| s.grid() != grid) {
            return Err(Error::InvalidParameter("all snapshots must share one grid".into()));
        }
        Ok(Trajectory { times, snapshots })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralField] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial(&self) -> &SpectralField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &SpectralField {
        self.snapshots.last().expect("nonempty")
    }

    pub fn span(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }
}

/// Conserved-quantity diagnostics per snapshot.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyRow {
    pub t: f64,
    /// `integral u dx`
    pub mass: f64,
    /// `||u||_{L2}`
    pub l2: f64,
    /// `integral (u_x^2 / 2 - u^5 / 5) dx`
    pub hamiltonian: f64,
}

/// Exact linear flow: coefficient at `k` multiplied by `e^{i t k^3}`.
/// The unpaired Nyquist mode is zeroed (its complex phase has no conjugate
/// partner on the grid).
pub fn propagator(u: &SpectralField, t: f64) -> SpectralField {
    let grid = u.grid();
    let mut out = u.clone();
    for p in 0..grid.n() {
        let k = grid.wavenumber(p);
        out.coeffs_mut()[p] *= Complex64::from_polar(1.0, t * k * k * k);
    }
    out.coeffs_mut()[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
    out
}

/// Nonlinear right-hand side `-d/dx (u^4)`.
pub fn rhs_nonlinear(u: &SpectralField, dealias: bool) -> SpectralField {
    let pow = if dealias {
        u.nonlinear_power4()
    } else {
        u.power4_aliased()
    };
    pow.derivative(1).scaled(-1.0)
}

/// One integrating-factor RK4 step of size `dt`.
pub fn step(u: &SpectralField, dt: f64, nonlinear: bool, dealias: bool) -> SpectralField {
    if !nonlinear {
        return propagator(u, dt);
    }
    let half = |v: &SpectralField| propagator(v, dt / 2.0);
    let rhs = |v: &SpectralField| rhs_nonlinear(v, dealias);

    let k1 = rhs(u);
    let a = half(&u.add(&k1.scaled(dt / 2.0)));
    let k2 = rhs(&a);
    let eu = half(u);
    let b = eu.add(&k2.scaled(dt / 2.0));
    let k3 = rhs(&b);
    let e2u = half(&eu);
    let c = e2u.add(&half(&k3).scaled(dt));
    let k4 = rhs(&c);

    let mut acc = half(&half(&k1)); // E^2 k1
    acc = acc.add(&half(&k2.add(&k3)).scaled(2.0)); // + 2 E (k2 + k3)
    acc = acc.add(&k4);
    e2u.add(&acc.scaled(dt / 6.0))
}

/// CFL-like bound for the explicit quartic term: `0.5 / (4 |u|_inf^3 k_max)`.
pub fn cfl_timestep(u: &SpectralField) -> f64 {
    let amp = u.inverse().max_abs();
    0.5 / (4.0 * amp.powi(3) * u.grid().k_max())
}

/// Advances `u0` to `config.t_final`, sampling every `sample_stride` steps.
///
/// The requested `dt` is tightened to the CFL-like policy bound computed from
/// the datum, then rounded so an integer number of steps lands exactly on the
/// horizon. Aborts on non-finite snapshots or relative L2 drift beyond 1e-4.
pub fn evolve(u0: &SpectralField, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let dt_policy = if config.nonlinearity_enabled {
        cfl_timestep(u0)
    } else {
        f64::INFINITY
    };
    let dt_target = config.dt.min(dt_policy);
    let steps = (config.t_final / dt_target).ceil().max(1.0);
    if steps > 1e9 {
        return Err(Error::InvalidParameter(format!(
            "step count {steps:.0} is unreasonably large; increase dt or shrink the horizon"
        )));
    }
    let steps = steps as usize;
    let dt = config.t_final / steps as f64;

    let l2_initial = u0.l2_norm();
    let mut times = Vec::with_capacity(steps / config.sample_stride + 2);
    let mut snapshots = Vec::with_capacity(steps / config.sample_stride + 2);
    times.push(0.0);
    snapshots.push(u0.clone());

    let mut u = u0.clone();
    for i in 1..=steps {
        u = step(&u, dt, config.nonlinearity_enabled, config.dealias);
        if i % config.sample_stride == 0 || i == steps {
            let t = i as f64 * dt;
            if !u.is_finite() {
                return Err(Error::SolverAbort {
                    t,
                    reason: "non-finite values in snapshot (blow-up or resolution loss)".into(),
                });
            }
            if l2_initial > 0.0 {
                let drift = (u.l2_norm() - l2_initial).abs() / l2_initial;
                if drift > L2_DRIFT_ABORT {
                    return Err(Error::SolverAbort {
                        t,
                        reason: format!(
                            "relative L2 drift {drift:.3e} exceeds {L2_DRIFT_ABORT:.0e} (integrator failure)"
                        ),
                    });
                }
            }
            times.push(t);
            snapshots.push(u.clone());
        }
    }
    Trajectory::new(times, snapshots)
}

/// Mass, L2 norm and Hamiltonian for every snapshot. All three quadratures are
/// spectral and exact for the dealiased band.
pub fn conservation_report(traj: &Trajectory) -> EnergyReport {
    let rows = traj
        .times()
        .iter()
        .zip(traj.snapshots())
        .map(|(&t, u)| {
            let length = u.grid().length();
            let mass = length * u.mean();
            let l2 = u.l2_norm();
            let ux = u.derivative(1);
            let grad_sq = ux.l2_norm().powi(2);
            // integral u^5 dx = <u, u^4> with the exact dealiased quartic
            let u5 = crate::spectral::inner_l2(u, &u.nonlinear_power4());
            EnergyRow {
                t,
                mass,
                l2,
                hamiltonian: 0.5 * grad_sq - 0.2 * u5,
            }
        })
        .collect();
    EnergyReport { rows }
}
