//! Periodic grid, discrete Fourier transforms, spectral multipliers and
//! alias-free quartic products.
//!
//! Conventions, fixed once for the whole crate:
//! * grid points `x_j = j L / N`, wavenumbers `k_m = 2 pi m / L` with
//!   `m in {-N/2+1, ..., N/2}` (the unpaired mode `m = N/2` is the Nyquist mode);
//! * `forward` produces Fourier-series coefficients `c_k = (1/N) sum_j u(x_j) e^{-i k x_j}`,
//!   so `u(x) = sum_k c_k e^{i k x}` and Parseval reads
//!   `integral |u|^2 dx = L sum_k |c_k|^2`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Hard cap on `sigma * k_max`; beyond this `exp` leaves the f64 range.
pub const SIGMA_GUARD: f64 = 700.0;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], direction: FftDirection) {
    PLANNER.with(|planner| {
        let fft = planner.borrow_mut().plan_fft(buf.len(), direction);
        fft.process(buf);
    });
}

/// Uniform periodic grid on `[0, L)` with an even number of collocation points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n % 2 != 0 || n < 8 {
            return Err(Error::InvalidGrid(format!(
                "mode count must be even and at least 8, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `L / N`.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Collocation point `x_j = j L / N`.
    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.length / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Signed mode number for storage index `p`: `p` for `p <= N/2`, else `p - N`.
    pub fn mode(&self, p: usize) -> i64 {
        if p <= self.n / 2 {
            p as i64
        } else {
            p as i64 - self.n as i64
        }
    }

    /// Wavenumber `k = 2 pi m / L` for storage index `p`.
    pub fn wavenumber(&self, p: usize) -> f64 {
        2.0 * PI * self.mode(p) as f64 / self.length
    }

    /// Largest represented wavenumber, `pi N / L` (the Nyquist mode).
    pub fn k_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Storage index of the unpaired Nyquist mode `m = N/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest sigma admissible under the overflow guard.
    pub fn sigma_max(&self) -> f64 {
        SIGMA_GUARD / self.k_max()
    }

    /// Rejects sigma for which `e^{sigma |k|}` can overflow on this grid.
    pub fn check_sigma(&self, sigma: f64) -> Result<()> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be a finite nonnegative real, got {sigma}"
            )));
        }
        let product = sigma * self.k_max();
        if product > SIGMA_GUARD {
            return Err(Error::SigmaOverflow {
                product,
                sigma_max: self.sigma_max(),
            });
        }
        Ok(())
    }
}

/// Real-valued field sampled at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n(),
                got: samples.len(),
            });
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {j} = {}", samples[j])));
        }
        Ok(RealField { grid, samples })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..grid.n()).map(|j| f(grid.point(j))).collect();
        RealField::new(grid, samples)
    }

    pub fn zero(grid: Grid) -> Self {
        RealField {
            grid,
            samples: vec![0.0; grid.n()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Forward transform to Fourier-series coefficients (see module docs).
    pub fn forward(&self) -> SpectralField {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft_in_place(&mut buf, FftDirection::Forward);
        let scale = 1.0 / n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid,
            coeffs: buf,
        }
    }

    /// Trapezoid quadrature of `u^2` on the grid; exact for band-limited fields.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|v| v * v).sum();
        (sum * self.grid.dx()).sqrt()
    }
}

/// Complex Fourier coefficients of a real periodic field, indexed per [`Grid::mode`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n(),
                got: coeffs.len(),
            });
        }
        if let Some(p) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient {p} = {}", coeffs[p])));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zero(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient for signed mode `m` (wrapping into storage order).
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let p = m.rem_euclid(n) as usize;
        self.coeffs[p]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest relative deviation from Hermitian symmetry `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let scale = self
            .coeffs
            .iter()
            .fold(0.0f64, |m, c| m.max(c.norm()))
            .max(f64::MIN_POSITIVE);
        let mut defect = self.coeffs[0].im.abs() / scale;
        defect = defect.max(self.coeffs[n / 2].im.abs() / scale);
        for p in 1..n / 2 {
            let d = (self.coeffs[p] - self.coeffs[n - p].conj()).norm();
            defect = defect.max(d / scale);
        }
        defect
    }

    /// Inverse transform back to physical samples (real part; the imaginary
    /// residue of a Hermitian field is at rounding level).
    pub fn inverse(&self) -> RealField {
        let mut buf = self.coeffs.clone();
        fft_in_place(&mut buf, FftDirection::Inverse);
        RealField {
            grid: self.grid,
            samples: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Discrete L2 norm: `sqrt(L sum_k |c_k|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.length() * sum).sqrt()
    }

    /// Mean value `integral u dx / L = c_0` (real part).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Scales every coefficient by `e^{sigma |k|}`. The multiplier is even and
    /// real, so realness and Hermitian symmetry are preserved; sigma = 0 is the
    /// exact identity.
    pub fn exp_multiplier(&self, sigma: f64) -> Result<SpectralField> {
        self.grid.check_sigma(sigma)?;
        let mut out = self.clone();
        for p in 0..self.grid.n() {
            let k = self.grid.wavenumber(p).abs();
            out.coeffs[p] *= (sigma * k).exp();
        }
        Ok(out)
    }

    /// Spectral derivative of the given order: multiply by `(ik)^order`.
    /// The unpaired Nyquist coefficient is zeroed for odd orders, where the
    /// imaginary symbol has no conjugate partner.
    pub fn derivative(&self, order: u32) -> SpectralField {
        assert!(order >= 1, "derivative order must be at least 1");
        let n = self.grid.n();
        let mut out = self.clone();
        for p in 0..n {
            let ik = Complex64::new(0.0, self.grid.wavenumber(p));
            out.coeffs[p] *= ik.powu(order);
        }
        if order % 2 == 1 {
            out.coeffs[self.grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Pointwise scale by a real factor.
    pub fn scaled(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    /// Coefficient-wise sum; grids must match.
    pub fn add(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        out
    }

    /// Spatial reflection `u(x) -> u(-x)`: `c_k -> c_{-k}`.
    pub fn reflect(&self) -> SpectralField {
        let n = self.grid.n();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        coeffs[0] = self.coeffs[0];
        for p in 1..n {
            coeffs[p] = self.coeffs[n - p];
        }
        // Nyquist keeps its slot (it is its own reflection on the grid).
        coeffs[n / 2] = self.coeffs[n / 2];
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// Translation `u(x) -> u(x - shift)`: `c_k -> c_k e^{-i k shift}`.
    pub fn translate(&self, shift: f64) -> SpectralField {
        let mut out = self.clone();
        for p in 0..self.grid.n() {
            let k = self.grid.wavenumber(p);
            out.coeffs[p] *= Complex64::from_polar(1.0, -k * shift);
        }
        out.coeffs[self.grid.nyquist_index()] = Complex64::new(
            out.coeffs[self.grid.nyquist_index()].re,
            0.0,
        );
        out
    }

    /// Alias-free fourth power `u^4`, truncated to the grid band.
    ///
    /// The quartic product needs a padding factor of at least 5/2; we pad to
    /// 3N and the retained coefficients are exact. The unpaired Nyquist mode is
    /// zeroed before padding (dealiasing policy for all nonlinear products).
    pub fn nonlinear_power4(&self) -> SpectralField {
        let n = self.grid.n();
        let m = 3 * n;
        let mut big = pad_to(&self.coeffs, n, m);
        fft_in_place(&mut big, FftDirection::Inverse);
        for c in big.iter_mut() {
            let v = c.re;
            let v2 = v * v;
            *c = Complex64::new(v2 * v2, 0.0);
        }
        fft_in_place(&mut big, FftDirection::Forward);
        let scale = 1.0 / m as f64;
        for c in big.iter_mut() {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid,
            coeffs: truncate_from(&big, n, m),
        }
    }

    /// Fourth power without dealiasing: pointwise on the native grid. Kept for
    /// side-by-side comparison runs; aliased for generic data.
    pub fn power4_aliased(&self) -> SpectralField {
        let n = self.grid.n();
        let mut buf = self.coeffs.clone();
        fft_in_place(&mut buf, FftDirection::Inverse);
        for c in buf.iter_mut() {
            let v = c.re;
            let v2 = v * v;
            *c = Complex64::new(v2 * v2, 0.0);
        }
        fft_in_place(&mut buf, FftDirection::Forward);
        let scale = 1.0 / n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid,
            coeffs: buf,
        }
    }
}

/// Alias-free pointwise product of four fields on one grid (3N padding).
pub fn dealiased_product4(
    a: &SpectralField,
    b: &SpectralField,
    c: &SpectralField,
    d: &SpectralField,
) -> SpectralField {
    let grid = a.grid();
    assert!(
        b.grid() == grid && c.grid() == grid && d.grid() == grid,
        "grid mismatch"
    );
    let n = grid.n();
    let m = 3 * n;
    let mut prod = vec![1.0f64; m];
    for field in [a, b, c, d] {
        let mut big = pad_to(&field.coeffs, n, m);
        fft_in_place(&mut big, FftDirection::Inverse);
        for (p, v) in prod.iter_mut().zip(&big) {
            *p *= v.re;
        }
    }
    let mut big: Vec<Complex64> = prod.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut big, FftDirection::Forward);
    let scale = 1.0 / m as f64;
    for v in big.iter_mut() {
        *v *= scale;
    }
    SpectralField {
        grid,
        coeffs: truncate_from(&big, n, m),
    }
}

/// Embeds N coefficients into an M-point spectral array (M > N), zeroing the
/// unpaired Nyquist mode.
fn pad_to(coeffs: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    let mut big = vec![Complex64::new(0.0, 0.0); m];
    for p in 0..n {
        if p == n / 2 {
            continue; // dealias policy: drop the unpaired mode
        }
        let mode = if p <= n / 2 { p } else { m - (n - p) };
        big[mode] = coeffs[p];
    }
    big
}

/// Truncates M coefficients back to the N-mode band (Nyquist left at zero).
fn truncate_from(big: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for p in 0..n {
        if p == n / 2 {
            continue;
        }
        let mode = if p <= n / 2 { p } else { m - (n - p) };
        out[p] = big[mode];
    }
    out
}

/// Real L2 inner product `integral u v dx = L sum_k conj(a_k) b_k` (real part).
pub fn inner_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    assert_eq!(a.grid(), b.grid(), "grid mismatch");
    let sum: f64 = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| (x.conj() * y).re)
        .sum();
    a.grid().length() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_field(grid: Grid, mode: i64, amp: f64) -> SpectralField {
        RealField::from_fn(grid, |x| amp * (mode as f64 * 2.0 * PI / grid.length() * x).cos())
            .unwrap()
            .forward()
    }

    #[test]
    fn grid_examples() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        assert!((g.dx() - PI / 4.0).abs() < 1e-15);
        let modes: Vec<i64> = (0..8).map(|p| g.mode(p)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);

        let g = Grid::new(4096, 40.0 * PI).unwrap();
        assert!((g.wavenumber(1) - 0.05).abs() < 1e-15);

        assert!(Grid::new(7, 1.0).is_err());
        assert!(Grid::new(6, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, -1.0).is_err());
    }

    #[test]
    fn cosine_spectrum_closed_form() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = cos_field(grid, 1, 1.0);
        for p in 0..64 {
            let expected = if grid.mode(p).abs() == 1 { 0.5 } else { 0.0 };
            assert!(
                (u.coeffs()[p] - Complex64::new(expected, 0.0)).norm() < 1e-14,
                "mode {} = {}",
                grid.mode(p),
                u.coeffs()[p]
            );
        }
    }

    #[test]
    fn zero_field_zero_coefficients() {
        let grid = Grid::new(32, 1.0).unwrap();
        let u = RealField::zero(grid).forward();
        assert!(u.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn round_trip_identity() {
        let grid = Grid::new(128, 3.0).unwrap();
        // deterministic pseudo-random samples
        let mut state = 0x9e3779b97f4a7c15u64;
        let samples: Vec<f64> = (0..128)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let u = RealField::new(grid, samples.clone()).unwrap();
        let back = u.forward().inverse();
        let scale = u.max_abs();
        for (a, b) in samples.iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval_matches_physical_quadrature() {
        let grid = Grid::new(64, 5.0).unwrap();
        let u = RealField::from_fn(grid, |x| (2.0 * PI * x / 5.0).sin() + 0.3).unwrap();
        let spectral = u.forward();
        assert!((u.l2_norm() - spectral.l2_norm()).abs() < 1e-12 * u.l2_norm());
    }

    #[test]
    fn exp_multiplier_identity_and_doubling() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = cos_field(grid, 1, 1.0);
        let same = u.exp_multiplier(0.0).unwrap();
        assert_eq!(u.coeffs(), same.coeffs());

        let doubled = u.exp_multiplier(2.0f64.ln()).unwrap();
        assert!((doubled.coeff(1).re - 1.0).abs() < 1e-14);
        assert!((doubled.coeff(-1).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_multiplier_keeps_field_real() {
        // moderate sigma: amplified rounding noise stays far below tolerance
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin() + 0.5 * (2.0 * x).cos()).unwrap();
        let w = u.forward().exp_multiplier(0.1).unwrap();
        assert!(w.hermitian_defect() < 1e-12);

        // the even real symbol preserves exact conjugate pairs bitwise
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 64];
        coeffs[3] = Complex64::new(0.2, -0.7);
        coeffs[61] = coeffs[3].conj();
        coeffs[10] = Complex64::new(-1.0, 0.05);
        coeffs[54] = coeffs[10].conj();
        let exact = SpectralField::new(grid, coeffs).unwrap();
        let scaled = exact.exp_multiplier(0.4).unwrap();
        assert_eq!(scaled.hermitian_defect(), 0.0);
    }

    #[test]
    fn exp_multiplier_overflow_guard() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        // k_max = 32, so sigma = 30 pushes sigma*k_max = 960 beyond the guard
        let u = cos_field(grid, 1, 1.0);
        let err = u.exp_multiplier(30.0).unwrap_err();
        match err {
            Error::SigmaOverflow { sigma_max, .. } => {
                assert!((sigma_max - 700.0 / 32.0).abs() < 1e-12);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn exp_multiplier_composes_additively() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin() + 0.2 * (3.0 * x).cos()).unwrap().forward();
        let twice = u.exp_multiplier(0.1).unwrap().exp_multiplier(0.2).unwrap();
        let once = u.exp_multiplier(0.1 + 0.2).unwrap();
        for (a, b) in twice.coeffs().iter().zip(once.coeffs()) {
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin()).unwrap().forward();
        let du = u.derivative(1).inverse();
        for (j, v) in du.samples().iter().enumerate() {
            assert!((v - grid.point(j).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn third_derivative_of_cos2x() {
        // d^3/dx^3 cos(2x) = 8 sin(2x)
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = cos_field(grid, 2, 1.0);
        let d3 = u.derivative(3).inverse();
        for (j, v) in d3.samples().iter().enumerate() {
            assert!((v - 8.0 * (2.0 * grid.point(j)).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let grid = Grid::new(32, 4.0).unwrap();
        let u = RealField::from_fn(grid, |_| 2.5).unwrap().forward();
        for order in 1..=4 {
            assert!(u.derivative(order).l2_norm() < 1e-13);
        }
    }

    #[test]
    fn power4_of_constant() {
        let grid = Grid::new(32, 1.0).unwrap();
        let u = RealField::from_fn(grid, |_| 1.5).unwrap().forward();
        let w = u.nonlinear_power4();
        assert!((w.coeff(0).re - 1.5f64.powi(4)).abs() < 1e-12);
        assert!(w.coeffs().iter().skip(1).all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn power4_of_cosine_closed_form() {
        // cos^4 x = 3/8 + (1/2) cos 2x + (1/8) cos 4x
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let w = cos_field(grid, 1, 1.0).nonlinear_power4();
        assert!((w.coeff(0).re - 0.375).abs() < 1e-14);
        assert!((w.coeff(2).re - 0.25).abs() < 1e-14);
        assert!((w.coeff(-2).re - 0.25).abs() < 1e-14);
        assert!((w.coeff(4).re - 0.0625).abs() < 1e-14);
        assert!((w.coeff(-4).re - 0.0625).abs() < 1e-14);
        for m in [1i64, 3, 5, 6, 7] {
            assert!(w.coeff(m).norm() < 1e-14);
            assert!(w.coeff(-m).norm() < 1e-14);
        }
    }

    /// Oracle: quadruple convolution of the coefficient array, brute force.
    fn convolution4_oracle(u: &SpectralField) -> Vec<Complex64> {
        let grid = u.grid();
        let n = grid.n() as i64;
        let half = n / 2;
        // modes strictly inside the symmetric band; Nyquist dropped by policy
        let band: Vec<i64> = (-half + 1..half).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); grid.n()];
        for &m1 in &band {
            for &m2 in &band {
                for &m3 in &band {
                    for &m4 in &band {
                        let m = m1 + m2 + m3 + m4;
                        if m.abs() < half {
                            let p = m.rem_euclid(n) as usize;
                            out[p] += u.coeff(m1) * u.coeff(m2) * u.coeff(m3) * u.coeff(m4);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn power4_matches_convolution_oracle_small_n() {
        let grid = Grid::new(16, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin() + 0.4 * (2.0 * x).cos() - 0.1).unwrap().forward();
        let fast = u.nonlinear_power4();
        let slow = convolution4_oracle(&u);
        for p in 0..16 {
            assert!(
                (fast.coeffs()[p] - slow[p]).norm() < 1e-13,
                "mode {}: {} vs {}",
                grid.mode(p),
                fast.coeffs()[p],
                slow[p]
            );
        }
    }

    #[test]
    fn power4_matches_oversampled_quadrature() {
        // Evaluate u on a 4N grid, take the fourth power there, transform back.
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| x.sin() + 0.3 * (5.0 * x).cos()).unwrap().forward();
        let fast = u.nonlinear_power4();

        let fine = Grid::new(256, 2.0 * PI).unwrap();
        let u_fine = RealField::from_fn(fine, |x| {
            (0..64)
                .map(|p| {
                    let k = grid.wavenumber(p);
                    (u.coeffs()[p] * Complex64::from_polar(1.0, k * x)).re
                })
                .sum::<f64>()
        })
        .unwrap();
        let pow_fine = RealField::new(
            fine,
            u_fine.samples().iter().map(|v| v.powi(4)).collect(),
        )
        .unwrap()
        .forward();

        for p in 0..64 {
            let m = grid.mode(p);
            if m.abs() == 32 {
                continue; // unpaired mode zeroed by policy
            }
            assert!(
                (fast.coeff(m) - pow_fine.coeff(m)).norm() < 1e-12,
                "mode {m}"
            );
        }
    }

    #[test]
    fn product4_agrees_with_power4_on_equal_args() {
        let grid = Grid::new(32, 2.0 * PI).unwrap();
        let u = RealField::from_fn(grid, |x| (2.0 * x).sin() + 0.25).unwrap().forward();
        let a = u.nonlinear_power4();
        let b = dealiased_product4(&u, &u, &u, &u);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn reflect_then_reflect_is_identity() {
        let grid = Grid::new(32, 2.0).unwrap();
        let u = RealField::from_fn(grid, |x| (PI * x).sin() + 0.7 * (2.0 * PI * x).cos())
            .unwrap()
            .forward();
        let back = u.reflect().reflect();
        for (a, b) in u.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
