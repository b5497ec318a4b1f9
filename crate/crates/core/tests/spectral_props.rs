use std::sync::{Arc, OnceLock};

use ierk_core::spectral::{
    convection, deriv_x, deriv_y, divergence, inner, l2_norm, laplacian, solve_poisson,
    spectral_energy, velocity, ConvectionForm,
};
use ierk_core::{Field, Grid, GridSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid16() -> Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::new(GridSpec::periodic_2pi(16)).unwrap()).clone()
}

fn nodal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 256)
}

fn mean_free(values: Vec<f64>) -> Field {
    Field::from_physical(&grid16(), values).project_mean_free()
}

/// Random trigonometric polynomial with modes strictly below Nyquist.
fn band_limited() -> impl Strategy<Value = Vec<(i32, i32, f64, f64)>> {
    prop::collection::vec((-7..=7i32, -7..=7i32, -1.0..1.0f64, -1.0..1.0f64), 1..6)
}

fn trig(modes: &[(i32, i32, f64, f64)]) -> (Field, Field, Field) {
    let g = grid16();
    let eval = |d: u8| {
        let modes = modes.to_vec();
        Field::from_fn(&g, move |x, y| {
            modes
                .iter()
                .map(|&(l, m, p, q)| {
                    let (l, m) = (f64::from(l), f64::from(m));
                    let (s, c) = (l * x + m * y).sin_cos();
                    match d {
                        0 => p * c + q * s,
                        1 => l * (q * c - p * s),
                        _ => m * (q * c - p * s),
                    }
                })
                .sum()
        })
    };
    (eval(0), eval(1), eval(2))
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().max_abs()
}

proptest! {
    #[test]
    fn round_trip(values in nodal()) {
        let g = grid16();
        let f = Field::from_physical(&g, values.clone());
        let back = Field::from_spectral(&g, f.spectral().to_vec());
        let scale = f.max_abs().max(1e-300);
        prop_assert!(max_diff(&back, &f) <= 100.0 * f64::EPSILON * scale);
    }

    #[test]
    fn conjugate_symmetry(values in nodal()) {
        let g = grid16();
        let f = Field::from_physical(&g, values);
        let s = f.spectral();
        let m = g.points();
        for k in 0..g.len() {
            let (ql, qm) = (k % m, k / m);
            let mirror = ((m - qm) % m) * m + (m - ql) % m;
            prop_assert!((s[k] - s[mirror].conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn parseval(values in nodal()) {
        let f = Field::from_physical(&grid16(), values);
        let (a, b) = (inner(&f, &f), spectral_energy(&f));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn exact_differentiation(modes in band_limited()) {
        let (f, fx, fy) = trig(&modes);
        prop_assert!(max_diff(&deriv_x(&f), &fx) <= 1e-11);
        prop_assert!(max_diff(&deriv_y(&f), &fy) <= 1e-11);
    }

    #[test]
    fn poisson_inverts_laplacian(values in nodal()) {
        let w = mean_free(values);
        let psi = solve_poisson(&w).unwrap();
        let back = laplacian(&psi).scale(-1.0);
        prop_assert!(max_diff(&back, &w) <= 1e-11 * w.max_abs().max(1e-300));
        let psi2 = solve_poisson(&laplacian(&w).scale(-1.0)).unwrap();
        // the Nyquist row of w survives -lap then the inverse unchanged
        prop_assert!(max_diff(&psi2, &w) <= 1e-11 * w.max_abs().max(1e-300));
    }

    #[test]
    fn velocity_is_divergence_free(values in nodal()) {
        let psi = mean_free(values);
        let vel = velocity(&psi);
        let scale = vel.u.max_abs().max(vel.v.max_abs()).max(1e-300);
        prop_assert!(divergence(&vel).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn skew_form_is_orthogonal(wv in nodal(), pv in nodal()) {
        let w = mean_free(wv);
        let vel = velocity(&mean_free(pv));
        let c = convection(&vel, &w, ConvectionForm::Skew).unwrap();
        let denom = (l2_norm(&c) * l2_norm(&w)).max(1e-300);
        prop_assert!(inner(&c, &w).abs() <= 1e-12 * denom);
        prop_assert!(c.mean().abs() <= 1e-13 * l2_norm(&c).max(1e-300));
    }
}

#[test]
fn advective_form_is_not_orthogonal_in_general() {
    let g = grid16();
    let w = Field::from_fn(&g, |x, y| (x + 2.0 * y).sin() + (3.0 * x).cos() * y.sin());
    let psi = Field::from_fn(&g, |x, y| (2.0 * x).sin() * (y + 0.3).cos() + (x - y).cos());
    let vel = velocity(&psi.project_mean_free());
    let skew = convection(&vel, &w, ConvectionForm::Skew).unwrap();
    let adv = convection(&vel, &w, ConvectionForm::Advective).unwrap();
    // both forms agree on band-limited products that do not alias
    assert!(max_diff(&skew, &adv) <= 1e-11);
    assert!(inner(&skew, &w).abs() <= 1e-12 * l2_norm(&skew) * l2_norm(&w));
}

#[test]
fn nonzero_coefficient_input_is_real() {
    let g = grid16();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); g.len()];
    coeffs[1] = Complex64::new(0.0, -0.5);
    coeffs[15] = Complex64::new(0.0, 0.5);
    let f = Field::from_spectral(&g, coeffs);
    assert!(max_diff(&f, &Field::from_fn(&g, |x, _| x.sin())) < 1e-15);
}
