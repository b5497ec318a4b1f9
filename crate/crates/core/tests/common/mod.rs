//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ierk_core::Tableau;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss-Kronrod 7/15 on one interval: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(mid);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let s = f(mid - dx) + f(mid + dx);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod quadrature to relative tolerance `rtol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rtol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut intervals = vec![(a, b, gk15(f, a, b))];
    for _ in 0..20_000 {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if err <= rtol * total.abs().max(f64::MIN_POSITIVE) {
            return total;
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = intervals.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        intervals.push((lo, m, gk15(f, lo, m)));
        intervals.push((m, hi, gk15(f, m, hi)));
    }
    panic!("quadrature did not converge on [{a}, {b}]");
}

/// Amplitude sequence of a single Laplacian eigenmode under the stage recurrence
/// `y_{i} = (y_0 + z sum_{j=1}^{i-1} a_ij y_j) / (1 - z a_ii)`, `z = nu tau lambda`.
pub fn scalar_recurrence(tab: &Tableau, z: f64, y0: f64, steps: usize) -> Vec<f64> {
    let a = tab.a();
    let s = tab.stages();
    let mut out = Vec::with_capacity(steps);
    let mut y = y0;
    for _ in 0..steps {
        let mut stages = vec![y];
        for i in 1..s {
            let mut rhs = y;
            for j in 1..i {
                rhs += z * a[(i, j)] * stages[j];
            }
            stages.push(rhs / (1.0 - z * a[(i, i)]));
        }
        y = stages[s - 1];
        out.push(y);
    }
    out
}

/// Least-squares-free log2 slopes between consecutive halvings.
pub fn log2_slopes(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn quadrature_self_check() {
    let e = integrate(&|x: f64| x.exp(), 0.0, 1.0, 1e-14);
    assert!((e - (1f64.exp() - 1.0)).abs() < 1e-14);
    let s = integrate(&|x: f64| x.sin().powi(2), 0.0, std::f64::consts::PI, 1e-14);
    assert!((s - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    // Gauss part alone integrates degree-13 polynomials exactly
    let (k, _) = gk15(&|x: f64| x.powi(13) + x.powi(12), -1.0, 1.0);
    assert!((k - 2.0 / 13.0).abs() < 1e-14);
}
