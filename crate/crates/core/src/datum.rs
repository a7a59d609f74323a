//! Initial-data families for experiments. All profiles are centered at L/2 so
//! the periodic truncation error sits at the domain boundary.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField, SpectralField};

/// Named datum families accepted by the experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    /// `a sech((x - L/2) / w)`
    Sech { amplitude: f64, width: f64 },
    /// `a exp(-(x - L/2)^2 / (2 w^2))`
    Gaussian { amplitude: f64, width: f64 },
    /// `a cos(2 pi m x / L)`, built with an exact two-mode spectrum.
    Cosine { amplitude: f64, mode: i64 },
    /// Traveling-wave profile of speed `c` (see [`soliton_profile`]).
    Soliton { speed: f64 },
    /// Real samples loaded from a checkpoint file.
    File { path: std::path::PathBuf },
}

impl Datum {
    pub fn build(&self, grid: Grid) -> Result<SpectralField> {
        match self {
            Datum::Sech { amplitude, width } => {
                check_positive("width", *width)?;
                let (a, w) = (*amplitude, *width);
                let center = grid.length() / 2.0;
                Ok(RealField::from_fn(grid, |x| a / ((x - center) / w).cosh())?.forward())
            }
            Datum::Gaussian { amplitude, width } => {
                check_positive("width", *width)?;
                let (a, w) = (*amplitude, *width);
                let center = grid.length() / 2.0;
                Ok(
                    RealField::from_fn(grid, |x| a * (-(x - center).powi(2) / (2.0 * w * w)).exp())?
                        .forward(),
                )
            }
            Datum::Cosine { amplitude, mode } => cosine_exact(grid, *amplitude, *mode),
            Datum::Soliton { speed } => {
                check_positive("speed", *speed)?;
                let c = *speed;
                let center = grid.length() / 2.0;
                Ok(RealField::from_fn(grid, |x| soliton_profile(x - center, c))?.forward())
            }
            Datum::File { path } => {
                let (field, _t) = crate::checkpoint::read(path)?;
                if field.grid() != grid {
                    return Err(Error::Config(format!(
                        "checkpoint grid ({} points, L = {}) does not match configured grid",
                        field.grid().n(),
                        field.grid().length()
                    )));
                }
                Ok(field.forward())
            }
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Cosine with an exact spectrum: `c_{+-m} = a/2`, all other modes zero.
pub fn cosine_exact(grid: Grid, amplitude: f64, mode: i64) -> Result<SpectralField> {
    let half = grid.n() as i64 / 2;
    if mode <= 0 || mode >= half {
        return Err(Error::InvalidParameter(format!(
            "cosine mode must lie in 1..{half}, got {mode}"
        )));
    }
    let n = grid.n();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    coeffs[mode as usize] = Complex64::new(amplitude / 2.0, 0.0);
    coeffs[n - mode as usize] = Complex64::new(amplitude / 2.0, 0.0);
    SpectralField::new(grid, coeffs)
}

/// Solitary-wave profile for `u_t + u_xxx + (u^4)_x = 0`: the decaying
/// solution of `-c phi + phi'' + phi^4 = 0`,
/// `phi_c(x) = (5c/2)^{1/3} sech^{2/3}(3 sqrt(c) x / 2)`.
pub fn soliton_profile(x: f64, c: f64) -> f64 {
    let amplitude = (2.5 * c).cbrt();
    let arg = 1.5 * c.sqrt() * x;
    amplitude * (1.0 / arg.cosh()).powf(2.0 / 3.0)
}
