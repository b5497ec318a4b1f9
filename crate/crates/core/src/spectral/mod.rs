//! Fourier pseudo-spectral operators on the periodic square.
//!
//! All derivatives are taken by multiplying interpolation coefficients with
//! `i kappa l` / `i kappa m` (Nyquist first-derivative coefficient zeroed) or
//! `-kappa^2 (l^2 + m^2)`. Nonlinear products are formed pointwise at the nodes
//! without dealiasing.

mod field;
mod grid;

pub use field::{Field, VectorField};
pub use grid::{Grid, GridSpec};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size of the `(0, 0)` coefficient tolerated by [`solve_poisson`].
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// Which discretization of `u . grad(w)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvectionForm {
    /// `1/2 u . grad(w) + 1/2 div(u w)`, discretely orthogonal to `w`.
    #[default]
    Skew,
    /// `u . grad(w)`.
    Advective,
}

fn map_spectral(f: &Field, mut op: impl FnMut(usize, Complex64) -> Complex64) -> Field {
    let coeffs = f
        .spectral()
        .iter()
        .enumerate()
        .map(|(k, &c)| op(k, c))
        .collect();
    Field::from_spectral(f.grid(), coeffs)
}

pub fn deriv_x(f: &Field) -> Field {
    let grid = f.grid().clone();
    map_spectral(f, |k, c| grid.derivative_symbols(k).0 * c).with_mean_free(true)
}

pub fn deriv_y(f: &Field) -> Field {
    let grid = f.grid().clone();
    map_spectral(f, |k, c| grid.derivative_symbols(k).1 * c).with_mean_free(true)
}

pub fn laplacian(f: &Field) -> Field {
    let grid = f.grid().clone();
    map_spectral(f, |k, c| c * grid.laplacian_symbol(k)).with_mean_free(true)
}

/// Stream function `psi` with `-laplacian(psi) = omega` and zero mean.
///
/// Fails with [`Error::NonZeroMean`] when the mean of `omega` exceeds
/// `1e-10 * ||omega||`, since the periodic problem is then inconsistent.
pub fn solve_poisson(omega: &Field) -> Result<Field> {
    let mean = omega.spectral()[0].norm();
    let limit = MEAN_TOLERANCE * l2_norm(omega).max(f64::MIN_POSITIVE);
    if mean > limit {
        return Err(Error::NonZeroMean { mean, limit });
    }
    let grid = omega.grid().clone();
    Ok(map_spectral(omega, |k, c| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c / (-grid.laplacian_symbol(k))
        }
    })
    .with_mean_free(true))
}

/// `u = (D_y psi, -D_x psi)`.
pub fn velocity(psi: &Field) -> VectorField {
    VectorField {
        u: deriv_y(psi),
        v: deriv_x(psi).scale(-1.0),
    }
}

/// Discrete divergence `D_x u + D_y v`.
pub fn divergence(vel: &VectorField) -> Field {
    let grid = vel.grid().clone();
    let (u, v) = (vel.u.spectral(), vel.v.spectral());
    let coeffs = (0..grid.len())
        .map(|k| {
            let (dx, dy) = grid.derivative_symbols(k);
            dx * u[k] + dy * v[k]
        })
        .collect();
    Field::from_spectral(&grid, coeffs)
}

/// Nonlinear convection term, returned with its `(0, 0)` mode projected out.
pub fn convection(vel: &VectorField, omega: &Field, form: ConvectionForm) -> Result<Field> {
    vel.u.same_grid(omega)?;
    let grid = omega.grid().clone();
    let (u, v) = (vel.u.physical(), vel.v.physical());
    let wx = deriv_x(omega);
    let wy = deriv_y(omega);
    let (wx, wy) = (wx.physical(), wy.physical());
    let advective: Vec<f64> = (0..grid.len()).map(|i| u[i] * wx[i] + v[i] * wy[i]).collect();
    let adv_hat = grid.forward(&advective);

    let mut coeffs = match form {
        ConvectionForm::Advective => adv_hat,
        ConvectionForm::Skew => {
            let w = omega.physical();
            let uw: Vec<f64> = u.iter().zip(w).map(|(a, b)| a * b).collect();
            let vw: Vec<f64> = v.iter().zip(w).map(|(a, b)| a * b).collect();
            let (uw_hat, vw_hat) = (grid.forward(&uw), grid.forward(&vw));
            (0..grid.len())
                .map(|k| {
                    let (dx, dy) = grid.derivative_symbols(k);
                    0.5 * adv_hat[k] + 0.5 * (dx * uw_hat[k] + dy * vw_hat[k])
                })
                .collect()
        }
    };
    coeffs[0] = Complex64::new(0.0, 0.0);
    Ok(Field::from_spectral(&grid, coeffs).with_mean_free(true))
}

/// Discrete inner product `h^2 sum v w`.
pub fn inner(f: &Field, g: &Field) -> f64 {
    let h = f.grid().spacing();
    h * h * f.physical().iter().zip(g.physical()).map(|(a, b)| a * b).sum::<f64>()
}

pub fn l2_norm(f: &Field) -> f64 {
    inner(f, f).sqrt()
}

/// `||grad_h f||`.
pub fn h1_seminorm(f: &Field) -> f64 {
    let (fx, fy) = (deriv_x(f), deriv_y(f));
    (inner(&fx, &fx) + inner(&fy, &fy)).sqrt()
}

/// `||omega||^2` (twice the enstrophy in the usual convention).
pub fn enstrophy(omega: &Field) -> f64 {
    inner(omega, omega)
}

/// `L^2 sum |c|^2` over the coefficients; equals `||f||^2` by Parseval.
pub fn spectral_energy(f: &Field) -> f64 {
    let l = f.grid().length();
    l * l * f.spectral().iter().map(|c| c.norm_sqr()).sum::<f64>()
}
