//! Gevrey norms and radius-of-analyticity estimation from Fourier decay.
//!
//! The discrete norm is `sqrt(L sum_k e^{2 sigma |k|} <k>^{2s} |c_k|^2)` with
//! `<k> = sqrt(1 + k^2)`; at `sigma = s = 0` it reduces to the L2 norm. A field
//! analytic on a strip of half-width `sigma` has `|c_k| ~ e^{-sigma |k|}`, so
//! the strip width is read off as minus the slope of `log |c_k|` against `|k|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy)]
pub struct GevreyParams {
    /// Strip half-width (spatial units), nonnegative.
    pub sigma: f64,
    /// Sobolev index.
    pub s: f64,
}

impl GevreyParams {
    pub fn new(sigma: f64, s: f64) -> Self {
        GevreyParams { sigma, s }
    }
}

/// Weighted spectral norm; see module docs for the normalization.
pub fn gevrey_norm(u: &SpectralField, params: GevreyParams) -> Result<f64> {
    let grid = u.grid();
    grid.check_sigma(params.sigma)?;
    let mut sum = 0.0;
    for p in 0..grid.n() {
        let k = grid.wavenumber(p).abs();
        let weight = (params.sigma * k).exp() * (1.0 + k * k).powf(params.s / 2.0);
        let term = weight * u.coeffs()[p].norm();
        sum += term * term;
    }
    Ok((grid.length() * sum).sqrt())
}

/// `A_sigma(t) = ||u(t)||_{G^sigma}` for every snapshot of a trajectory.
pub fn measure_a(traj: &Trajectory, sigma: f64) -> Result<Vec<(f64, f64)>> {
    let params = GevreyParams::new(sigma, 0.0);
    traj.times()
        .iter()
        .zip(traj.snapshots())
        .map(|(&t, u)| gevrey_norm(u, params).map(|a| (t, a)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    /// Log-magnitude is linear in |k|: plain exponential decay.
    Exponential,
    /// Log-magnitude is concave beyond tolerance: faster than exponential.
    SuperExponential,
    /// No resolvable decay over the usable band.
    AtNoiseFloor,
}

/// Fitted exponential-decay rate of the Fourier coefficients with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusEstimate {
    /// Minus the fitted slope of `log |c_k|` vs `|k|`.
    pub sigma_hat: f64,
    /// Wavenumber band actually used, after the floor cut.
    pub band: (f64, f64),
    /// RMS of the line-fit residual (natural-log units).
    pub residual: f64,
    pub classification: DecayClass,
    /// Number of modes entering the fit.
    pub modes_used: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Band as fractions of `k_max`; defaults to `[1/8, 3/4]`.
    pub band_fraction: (f64, f64),
    /// Coefficients below `floor_rel * max |c_k|` are discarded.
    pub floor_rel: f64,
    /// Minimum usable modes; fewer is an error.
    pub min_modes: usize,
    /// Systematic concave deviation (ln units) above which the decay is
    /// classified super-exponential.
    pub curvature_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            band_fraction: (0.125, 0.75),
            floor_rel: 1e-13,
            min_modes: 8,
            curvature_tol: 0.05,
        }
    }
}

/// Least-squares fit of the coefficient decay rate over the usable band.
///
/// Uses positive modes only (Hermitian symmetry makes the negative side
/// redundant) and is therefore invariant under phase changes of the
/// coefficients.
pub fn estimate_radius(u: &SpectralField, options: &FitOptions) -> Result<RadiusEstimate> {
    let grid = u.grid();
    let max_mag = u
        .coeffs()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.norm()));
    if max_mag == 0.0 {
        return Err(Error::InsufficientBand {
            usable: 0,
            needed: options.min_modes,
        });
    }
    let floor = options.floor_rel * max_mag;
    let (lo_frac, hi_frac) = options.band_fraction;
    let k_lo = lo_frac * grid.k_max();
    let k_hi = hi_frac * grid.k_max();

    let mut ks = Vec::new();
    let mut logs = Vec::new();
    for p in 1..grid.n() / 2 {
        let k = grid.wavenumber(p);
        let mag = u.coeffs()[p].norm();
        if k >= k_lo && k <= k_hi && mag > floor {
            ks.push(k);
            logs.push(mag.ln());
        }
    }
    if ks.len() < options.min_modes {
        return Err(Error::InsufficientBand {
            usable: ks.len(),
            needed: options.min_modes,
        });
    }

    let line = fit_line(&ks, &logs);
    let quad = fit_quadratic(&ks, &logs);

    let band = (ks[0], *ks.last().expect("nonempty"));
    let width = band.1 - band.0;
    // Peak systematic deviation of the quadratic term from its secant line.
    let concave_spread = quad.c2.abs() * width * width / 8.0;
    let concavity_significant = quad.c2 < 0.0
        && concave_spread > options.curvature_tol
        && line.rms > 10.0 * quad.rms.max(1e-300);

    let sigma_hat = -line.slope;
    let classification = if concavity_significant {
        DecayClass::SuperExponential
    } else if sigma_hat <= 0.0 || line.rms > 0.5 * sigma_hat * width {
        // slope indistinguishable from flat over the band
        DecayClass::AtNoiseFloor
    } else {
        DecayClass::Exponential
    };

    Ok(RadiusEstimate {
        sigma_hat,
        band,
        residual: line.rms,
        classification,
        modes_used: ks.len(),
    })
}

struct LineFit {
    slope: f64,
    rms: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    LineFit {
        slope,
        rms: (rss / n).sqrt(),
    }
}

struct QuadFit {
    c2: f64,
    rms: f64,
}

/// Least-squares parabola through centered data (normal equations on the
/// shifted abscissa for conditioning).
fn fit_quadratic(xs: &[f64], ys: &[f64]) -> QuadFit {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let t: Vec<f64> = xs.iter().map(|x| x - xm).collect();
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut sy, mut sty, mut st2y) = (0.0, 0.0, 0.0);
    for (ti, yi) in t.iter().zip(ys) {
        let t2 = ti * ti;
        s1 += ti;
        s2 += t2;
        s3 += t2 * ti;
        s4 += t2 * t2;
        sy += yi;
        sty += ti * yi;
        st2y += t2 * yi;
    }
    // solve the 3x3 normal system for [a, b, c] in y = a + b t + c t^2
    let m = [[n, s1, s2], [s1, s2, s3], [s2, s3, s4]];
    let rhs = [sy, sty, st2y];
    let sol = solve3(m, rhs);
    let (a, b, c) = (sol[0], sol[1], sol[2]);
    let rss: f64 = t
        .iter()
        .zip(ys)
        .map(|(ti, yi)| {
            let r = yi - (a + b * ti + c * ti * ti);
            r * r
        })
        .sum();
    QuadFit {
        c2: c,
        rms: (rss / n).sqrt(),
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c in row + 1..3 {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, RealField};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn cosine_norm_closed_form() {
        // ||cos x||_{G^{1,0}} on L = 2 pi: two modes of 1/2 at |k| = 1,
        // sqrt(2 pi * 2 * e^2 / 4) = e sqrt(pi)
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = crate::datum::cosine_exact(grid, 1.0, 1).unwrap();
        let norm = gevrey_norm(&u, GevreyParams::new(1.0, 0.0)).unwrap();
        let expected = std::f64::consts::E * PI.sqrt();
        assert!((norm - expected).abs() < 1e-10 * expected, "{norm} vs {expected}");
    }

    #[test]
    fn sigma_zero_is_l2() {
        let grid = Grid::new(64, 5.0).unwrap();
        let u = RealField::from_fn(grid, |x| (2.0 * PI * x / 5.0).sin() - 0.4)
            .unwrap()
            .forward();
        let norm = gevrey_norm(&u, GevreyParams::new(0.0, 0.0)).unwrap();
        assert!((norm - u.l2_norm()).abs() < 1e-12 * norm.max(1.0));
    }

    #[test]
    fn zero_field_norm_is_zero() {
        let grid = Grid::new(32, 1.0).unwrap();
        let z = SpectralField::zero(grid);
        assert_eq!(gevrey_norm(&z, GevreyParams::new(0.5, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn norm_monotone_in_sigma_and_s() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin() + 0.3 * (3.0 * x).cos())
            .unwrap()
            .forward();
        let mut prev = 0.0;
        for sigma in [0.0, 0.1, 0.2, 0.4] {
            let v = gevrey_norm(&u, GevreyParams::new(sigma, 0.0)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = 0.0;
        for s in [-1.0, 0.0, 1.0, 2.0] {
            let v = gevrey_norm(&u, GevreyParams::new(0.1, s)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn norm_consistent_with_multiplier_l2() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin() + 0.2 * (4.0 * x).cos())
            .unwrap()
            .forward();
        let sigma = 0.15;
        let a = gevrey_norm(&u, GevreyParams::new(sigma, 0.0)).unwrap();
        let b = u.exp_multiplier(sigma).unwrap().l2_norm();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn measure_a_constant_on_linear_run() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u0 = RealField::from_fn(grid, |x| x.cos()).unwrap().forward();
        let mut cfg = crate::solver::SolverConfig::new(0.01, 1.0, 10).unwrap();
        cfg.nonlinearity_enabled = false;
        let traj = crate::solver::evolve(&u0, &cfg).unwrap();
        let series = measure_a(&traj, 0.3).unwrap();
        let first = series[0].1;
        for (_, a) in &series {
            assert!((a - first).abs() < 1e-12 * first);
        }
        // and each sigma > 0 value dominates the L2 value
        let l2_series = measure_a(&traj, 0.0).unwrap();
        for ((_, a), (_, l2)) in series.iter().zip(&l2_series) {
            assert!(a >= l2);
        }
    }

    fn synthetic_exponential(grid: Grid, rate: f64, phases: bool) -> SpectralField {
        let n = grid.n();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        coeffs[0] = Complex64::new(1.0, 0.0);
        for p in 1..n / 2 {
            let k = grid.wavenumber(p);
            let mag = (-rate * k).exp();
            let phase = if phases { (p as f64 * 2.399963) % (2.0 * PI) } else { 0.0 };
            coeffs[p] = Complex64::from_polar(mag, phase);
            coeffs[n - p] = coeffs[p].conj();
        }
        SpectralField::new(grid, coeffs).unwrap()
    }

    #[test]
    fn synthetic_exponential_recovered_exactly() {
        let grid = Grid::new(256, 2.0 * PI).unwrap();
        let u = synthetic_exponential(grid, 0.7, false);
        let est = estimate_radius(&u, &FitOptions::default()).unwrap();
        assert!((est.sigma_hat - 0.7).abs() < 1e-10, "sigma_hat {}", est.sigma_hat);
        assert_eq!(est.classification, DecayClass::Exponential);
        assert!(est.residual < 1e-10);
    }

    #[test]
    fn estimate_invariant_under_phase_randomization() {
        let grid = Grid::new(256, 2.0 * PI).unwrap();
        let a = estimate_radius(&synthetic_exponential(grid, 0.45, false), &FitOptions::default())
            .unwrap();
        let b = estimate_radius(&synthetic_exponential(grid, 0.45, true), &FitOptions::default())
            .unwrap();
        assert!((a.sigma_hat - b.sigma_hat).abs() < 1e-12);
    }

    #[test]
    fn sech_datum_rate_is_half_pi() {
        // Fourier transform of sech is pi sech(pi xi / 2): decay rate pi/2
        let grid = Grid::new(4096, 40.0 * PI).unwrap();
        let center = grid.length() / 2.0;
        let u = RealField::from_fn(grid, |x| 1.0 / (x - center).cosh())
            .unwrap()
            .forward();
        let est = estimate_radius(&u, &FitOptions::default()).unwrap();
        let target = PI / 2.0;
        assert!(
            (est.sigma_hat - target).abs() < 0.02 * target,
            "sigma_hat {} vs {}",
            est.sigma_hat,
            target
        );
        assert_eq!(est.classification, DecayClass::Exponential);
    }

    #[test]
    fn gaussian_datum_is_super_exponential() {
        let grid = Grid::new(1024, 16.0 * PI).unwrap();
        let center = grid.length() / 2.0;
        let w = 0.5;
        let u = RealField::from_fn(grid, |x| (-(x - center).powi(2) / (2.0 * w * w)).exp())
            .unwrap()
            .forward();
        let est = estimate_radius(&u, &FitOptions::default()).unwrap();
        assert_eq!(est.classification, DecayClass::SuperExponential);
    }

    #[test]
    fn insufficient_band_is_rejected() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        // single low mode: nothing usable inside the default band
        let u = RealField::from_fn(grid, |x| x.cos()).unwrap().forward();
        match estimate_radius(&u, &FitOptions::default()) {
            Err(Error::InsufficientBand { .. }) => {}
            other => panic!("expected insufficient band, got {other:?}"),
        }
        // and the zero field as the degenerate case
        match estimate_radius(&SpectralField::zero(grid), &FitOptions::default()) {
            Err(Error::InsufficientBand { usable: 0, .. }) => {}
            other => panic!("expected empty band, got {other:?}"),
        }
    }

    #[test]
    fn overflow_guard_propagates() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.cos()).unwrap().forward();
        assert!(gevrey_norm(&u, GevreyParams::new(50.0, 0.0)).is_err());
    }
}
