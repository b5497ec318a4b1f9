use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size of the doubly periodic square `(0, L)^2` sampled on `M x M` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub length: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(length: f64, points: usize) -> Self {
        Self { length, points }
    }

    /// The `(0, 2pi)^2` torus used by all the benchmark cases.
    pub fn periodic_2pi(points: usize) -> Self {
        Self::new(2.0 * PI, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 4 || !self.points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "M must be even and >= 4, got {}",
                self.points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "L must be positive, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

/// A validated grid together with its FFT plans and wavenumber tables.
///
/// Node `(i, j)` sits at `(i h, j h)` and is stored at `j * M + i`. Spectral
/// coefficient `(l, m)` is stored at `q_m * M + q_l`, where an index `q` maps to
/// the wavenumber `q` for `q < M/2` and `q - M` otherwise, so `q = M/2` is the
/// Nyquist mode `-M/2`.
pub struct Grid {
    spec: GridSpec,
    h: f64,
    kappa: f64,
    wavenumbers: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let m = spec.points;
        let mut planner = FftPlanner::new();
        let half = (m / 2) as i64;
        let wavenumbers = (0..m as i64)
            .map(|q| if q < half { q } else { q - m as i64 })
            .collect();
        Ok(Arc::new(Self {
            spec,
            h: spec.length / m as f64,
            kappa: 2.0 * PI / spec.length,
            wavenumbers,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Points per direction `M`.
    pub fn points(&self) -> usize {
        self.spec.points
    }

    /// Total number of nodes `M^2`.
    pub fn len(&self) -> usize {
        self.spec.points * self.spec.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.spec.length
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Base wavenumber `2 pi / L`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Signed wavenumber of storage index `q` along one axis.
    pub fn wavenumber(&self, q: usize) -> i64 {
        self.wavenumbers[q]
    }

    /// Node coordinates of flat index `idx`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        let m = self.points();
        ((idx % m) as f64 * self.h, (idx / m) as f64 * self.h)
    }

    /// Signed `(l, m)` wavenumber pair of a flat spectral index.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let m = self.points();
        (self.wavenumbers[idx % m], self.wavenumbers[idx / m])
    }

    pub fn is_nyquist(&self, k: i64) -> bool {
        k == -((self.points() / 2) as i64)
    }

    /// Eigenvalue of the discrete Laplacian on a flat spectral index: `-kappa^2 (l^2 + m^2)`.
    pub fn laplacian_symbol(&self, idx: usize) -> f64 {
        let (l, m) = self.mode(idx);
        -self.kappa * self.kappa * ((l * l + m * m) as f64)
    }

    /// First-derivative multipliers `(i kappa l, i kappa m)` with the Nyquist entry zeroed.
    pub fn derivative_symbols(&self, idx: usize) -> (Complex64, Complex64) {
        let (l, m) = self.mode(idx);
        let sym = |k: i64| {
            if self.is_nyquist(k) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, self.kappa * k as f64)
            }
        };
        (sym(l), sym(m))
    }

    /// Physical values to interpolation coefficients.
    pub(crate) fn forward(&self, physical: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = physical.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, &self.forward);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Interpolation coefficients to physical values (real part of the trigonometric sum).
    pub(crate) fn inverse(&self, spectral: &[Complex64]) -> Vec<f64> {
        let mut buf = spectral.to_vec();
        self.fft2(&mut buf, &self.inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.points();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows (x direction), transpose, rows again (y direction), transpose back
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, m);
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, m);
    }
}

fn transpose_square(buf: &mut [Complex64], m: usize) {
    for r in 0..m {
        for c in (r + 1)..m {
            buf.swap(r * m + c, c * m + r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(Grid::new(GridSpec::periodic_2pi(7)).is_err());
        assert!(Grid::new(GridSpec::periodic_2pi(2)).is_err());
        assert!(Grid::new(GridSpec::new(-1.0, 8)).is_err());
        assert!(Grid::new(GridSpec::periodic_2pi(4)).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid::new(GridSpec::periodic_2pi(8)).unwrap();
        let ks: Vec<i64> = (0..8).map(|q| g.wavenumber(q)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(-4));
        assert_eq!(g.derivative_symbols(4).0, Complex64::new(0.0, 0.0));
        assert_eq!(g.laplacian_symbol(4), -16.0);
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
    }
}
