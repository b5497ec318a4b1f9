//! Shared inputs for the benchmarks.

use std::sync::Arc;

use ierk_core::manufactured::random_band_limited;
use ierk_core::spectral::{solve_poisson, velocity};
use ierk_core::{Field, Grid, GridSpec, SolverState, VectorField};

pub const SIZES: [usize; 3] = [32, 64, 128];

pub fn grid(m: usize) -> Arc<Grid> {
    Grid::new(GridSpec::periodic_2pi(m)).expect("power-of-two grid")
}

/// Smooth mean-free vorticity with a fixed seed.
pub fn vorticity(g: &Arc<Grid>) -> Field {
    random_band_limited(g, 8, 17)
}

pub fn velocity_of(w: &Field) -> VectorField {
    velocity(&solve_poisson(w).expect("mean-free input"))
}

pub fn state(g: &Arc<Grid>) -> SolverState {
    SolverState::new(vorticity(g), 0.0).expect("mean-free input")
}
