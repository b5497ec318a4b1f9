use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// A real grid function on the periodic square, carried lazily in physical values
/// and interpolation coefficients.
///
/// Whichever representation a field was built from is current; the other one is
/// computed on first access and cached. Fields are never mutated after
/// construction, so the cache is safe to share across threads.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    physical: OnceLock<Vec<f64>>,
    spectral: OnceLock<Vec<Complex64>>,
    mean_free: bool,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid.spec())
            .field("physical_current", &self.is_physical_current())
            .field("spectral_current", &self.is_spectral_current())
            .field("mean_free", &self.mean_free)
            .finish()
    }
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let field = Self::from_physical(grid, vec![0.0; grid.len()]);
        let _ = field.spectral.set(vec![Complex64::new(0.0, 0.0); grid.len()]);
        field.with_mean_free(true)
    }

    /// Builds a field from nodal values laid out as `j * M + i`.
    ///
    /// # Panics
    /// If `values.len() != M^2`.
    pub fn from_physical(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "nodal array has wrong length");
        Self {
            grid: Arc::clone(grid),
            physical: OnceLock::from(values),
            spectral: OnceLock::new(),
            mean_free: false,
        }
    }

    /// Builds a field from interpolation coefficients. The caller is responsible for
    /// conjugate symmetry; physical values keep only the real part.
    pub fn from_spectral(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient array has wrong length");
        Self {
            grid: Arc::clone(grid),
            physical: OnceLock::new(),
            spectral: OnceLock::from(coeffs),
            mean_free: false,
        }
    }

    /// Samples `f(x, y)` at the grid nodes.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.node(idx);
                f(x, y)
            })
            .collect();
        Self::from_physical(grid, values)
    }

    pub(crate) fn with_mean_free(mut self, flag: bool) -> Self {
        self.mean_free = flag;
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn physical(&self) -> &[f64] {
        self.physical
            .get_or_init(|| self.grid.inverse(self.spectral.get().expect("field has no representation")))
    }

    pub fn spectral(&self) -> &[Complex64] {
        self.spectral
            .get_or_init(|| self.grid.forward(self.physical.get().expect("field has no representation")))
    }

    pub fn is_physical_current(&self) -> bool {
        self.physical.get().is_some()
    }

    pub fn is_spectral_current(&self) -> bool {
        self.spectral.get().is_some()
    }

    /// A copy with the coefficient representation materialized.
    pub fn to_spectral(&self) -> Field {
        self.spectral();
        self.clone()
    }

    /// A copy with the nodal representation materialized.
    pub fn to_physical(&self) -> Field {
        self.physical();
        self.clone()
    }

    /// Whether the field was produced by an operation that projects out the mean.
    pub fn is_mean_free(&self) -> bool {
        self.mean_free
    }

    /// The `(0, 0)` coefficient, i.e. the grid average.
    pub fn mean(&self) -> f64 {
        if let Some(c) = self.spectral.get() {
            c[0].re
        } else {
            self.physical().iter().sum::<f64>() / self.grid.len() as f64
        }
    }

    /// The same field with its `(0, 0)` coefficient set to zero.
    pub fn project_mean_free(&self) -> Field {
        let mut coeffs = self.spectral().to_vec();
        coeffs[0] = Complex64::new(0.0, 0.0);
        Field::from_spectral(&self.grid, coeffs).with_mean_free(true)
    }

    pub fn max_abs(&self) -> f64 {
        self.physical().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        match (self.physical.get(), self.spectral.get()) {
            (Some(p), _) => p.iter().all(|v| v.is_finite()),
            (None, Some(s)) => s.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            (None, None) => unreachable!("field has no representation"),
        }
    }

    pub(crate) fn same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Pointwise `a * self + b * other`, in whichever representation both share.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.same_grid(other)?;
        if self.is_spectral_current() && other.is_spectral_current() {
            let coeffs = self
                .spectral()
                .iter()
                .zip(other.spectral())
                .map(|(x, y)| x * a + y * b)
                .collect();
            Ok(Field::from_spectral(&self.grid, coeffs))
        } else {
            let values = self
                .physical()
                .iter()
                .zip(other.physical())
                .map(|(x, y)| a * x + b * y)
                .collect();
            Ok(Field::from_physical(&self.grid, values))
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpby(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Field {
        if let Some(c) = self.spectral.get() {
            Field::from_spectral(&self.grid, c.iter().map(|z| z * a).collect())
                .with_mean_free(self.mean_free)
        } else {
            Field::from_physical(&self.grid, self.physical().iter().map(|v| v * a).collect())
                .with_mean_free(self.mean_free)
        }
    }

    /// Pointwise product in physical space.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.same_grid(other)?;
        let values = self
            .physical()
            .iter()
            .zip(other.physical())
            .map(|(x, y)| x * y)
            .collect();
        Ok(Field::from_physical(&self.grid, values))
    }
}

/// Velocity `(u, v)`; both components share one grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub u: Field,
    pub v: Field,
}

impl VectorField {
    pub fn new(u: Field, v: Field) -> Result<Self> {
        u.same_grid(&v)?;
        Ok(Self { u, v })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            u: Field::zeros(grid),
            v: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}
