//! IERK coefficient pairs and their stability quantities.
//!
//! Stages are numbered from 0 in code. Stage 0 is the explicit start (`c_0 = 0`),
//! so the implicit matrix `A` has a zero first row and column, and the explicit
//! matrix `Â` is strictly lower triangular. Weights are the last rows.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the structural checks in [`Tableau::validate`].
pub const STRUCTURE_TOLERANCE: f64 = 1e-13;
/// `lambda_I` must exceed this for a tableau to count as positive definite.
pub const POSITIVE_DEFINITE_TOLERANCE: f64 = 1e-12;

/// The built-in tableau families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ImexEuler,
    Ierk23,
    Ierk35,
    Ierk47,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::ImexEuler, Family::Ierk23, Family::Ierk35, Family::Ierk47];

    pub fn name(self) -> &'static str {
        match self {
            Family::ImexEuler => "imex_euler",
            Family::Ierk23 => "ierk23",
            Family::Ierk35 => "ierk35",
            Family::Ierk47 => "ierk47",
        }
    }

    pub fn claimed_order(self) -> usize {
        match self {
            Family::ImexEuler => 1,
            Family::Ierk23 => 2,
            Family::Ierk35 => 3,
            Family::Ierk47 => 4,
        }
    }

    /// Name of the free coefficient, if the family has one.
    pub fn parameter_name(self) -> Option<&'static str> {
        match self {
            Family::ImexEuler => None,
            Family::Ierk23 => Some("c2"),
            Family::Ierk35 => Some("a55"),
            Family::Ierk47 => Some("a43hat"),
        }
    }

    /// Parameter used when none is given.
    pub fn default_parameter(self) -> Option<f64> {
        match self {
            Family::ImexEuler => None,
            Family::Ierk23 => Some(0.35),
            Family::Ierk35 => Some(1.2),
            Family::Ierk47 => Some(-0.8),
        }
    }

    /// Human-readable parameter interval(s) on which `lambda_I > 0`.
    pub fn positive_definite_range(self) -> &'static str {
        match self {
            Family::ImexEuler => "always",
            Family::Ierk23 => "0.116337 < c2 < 0.434174 or 1.15161 < c2 < 4.29788",
            Family::Ierk35 => "0.626214 < a55 < 2.10996",
            Family::Ierk47 => "every real a43hat",
        }
    }

    /// Builds the family member; `None` selects [`Family::default_parameter`].
    pub fn build(self, parameter: Option<f64>) -> Result<Tableau> {
        let p = parameter.or(self.default_parameter());
        match self {
            Family::ImexEuler => Ok(imex_euler()),
            Family::Ierk23 => ierk23(p.unwrap_or_default()),
            Family::Ierk35 => ierk35(p.unwrap_or_default()),
            Family::Ierk47 => ierk47(p.unwrap_or_default()),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownTableau(s.to_string()))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Looks up a family by name and builds it.
pub fn by_name(name: &str, parameter: Option<f64>) -> Result<Tableau> {
    name.parse::<Family>()?.build(parameter)
}

/// Which of the two coefficient matrices an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Implicit,
    Explicit,
}

/// An IERK pair `(A, Â)` with shared abscissas `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tableau {
    name: String,
    family: Option<Family>,
    parameter: Option<f64>,
    order: usize,
    c: DVector<f64>,
    a: DMatrix<f64>,
    a_hat: DMatrix<f64>,
}

impl Tableau {
    /// Assembles a tableau from raw coefficients. Only shapes are checked here;
    /// use [`Tableau::validate`] for the structural invariants.
    pub fn new(
        name: impl Into<String>,
        order: usize,
        c: Vec<f64>,
        a: DMatrix<f64>,
        a_hat: DMatrix<f64>,
    ) -> Result<Self> {
        let s = c.len();
        if s < 2 {
            return Err(Error::InvalidTableau(format!("need at least 2 stages, got {s}")));
        }
        if a.shape() != (s, s) || a_hat.shape() != (s, s) {
            return Err(Error::InvalidTableau(format!(
                "coefficient matrices must be {s}x{s}, got {:?} and {:?}",
                a.shape(),
                a_hat.shape()
            )));
        }
        Ok(Self {
            name: name.into(),
            family: None,
            parameter: None,
            order,
            c: DVector::from_vec(c),
            a,
            a_hat,
        })
    }

    fn member(mut self, family: Family, parameter: Option<f64>) -> Self {
        self.family = Some(family);
        self.parameter = parameter;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn parameter(&self) -> Option<f64> {
        self.parameter
    }

    /// Claimed order of accuracy.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stages, counting the explicit start.
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_hat(&self) -> &DMatrix<f64> {
        &self.a_hat
    }

    /// Implicit weights (last row of `A`).
    pub fn b(&self) -> DVector<f64> {
        self.a.row(self.stages() - 1).transpose()
    }

    /// Explicit weights (last row of `Â`).
    pub fn b_hat(&self) -> DVector<f64> {
        self.a_hat.row(self.stages() - 1).transpose()
    }

    /// Display label such as `IERK(4,7;-0.8)`.
    pub fn label(&self) -> String {
        match self.parameter {
            Some(p) => match self.name.strip_suffix(')') {
                Some(head) => format!("{head};{p})"),
                None => format!("{}({p})", self.name),
            },
            None => self.name.clone(),
        }
    }

    /// A copy with one coefficient shifted by `delta`.
    pub fn perturbed(&self, part: Part, row: usize, col: usize, delta: f64) -> Tableau {
        let mut t = self.clone();
        match part {
            Part::Implicit => t.a[(row, col)] += delta,
            Part::Explicit => t.a_hat[(row, col)] += delta,
        }
        t
    }

    /// Lists every violated structural invariant; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let s = self.stages();
        let tol = STRUCTURE_TOLERANCE;
        let mut out = Vec::new();
        if self.c[0].abs() > tol {
            out.push(format!("c[0] = {} is not 0", self.c[0]));
        }
        if (self.c[s - 1] - 1.0).abs() > tol {
            out.push(format!("stiff accuracy: c[{}] = {} is not 1", s - 1, self.c[s - 1]));
        }
        for i in 0..s {
            if self.a[(i, 0)].abs() > tol {
                out.push(format!("A[{i},0] = {} is not 0", self.a[(i, 0)]));
            }
            for j in (i + 1)..s {
                if self.a[(i, j)].abs() > tol {
                    out.push(format!("A[{i},{j}] = {} above the diagonal", self.a[(i, j)]));
                }
            }
            for j in i..s {
                if self.a_hat[(i, j)].abs() > tol {
                    out.push(format!("Â[{i},{j}] = {} on or above the diagonal", self.a_hat[(i, j)]));
                }
            }
            let (ra, rh) = (self.a.row(i).sum(), self.a_hat.row(i).sum());
            if (ra - self.c[i]).abs() > tol {
                out.push(format!("canopy: row {i} of A sums to {ra}, c = {}", self.c[i]));
            }
            if (rh - self.c[i]).abs() > tol {
                out.push(format!("canopy: row {i} of Â sums to {rh}, c = {}", self.c[i]));
            }
        }
        out
    }

    pub fn difference_matrices(&self) -> DifferenceMatrices {
        let si = self.stages() - 1;
        let a_i = self.a.view((1, 1), (si, si)).into_owned();
        let a_e = self.a_hat.view((1, 0), (si, si)).into_owned();
        DifferenceMatrices {
            di: backward_difference(&a_i),
            de: backward_difference(&a_e),
        }
    }

    pub fn stability_report(&self) -> StabilityReport {
        self.difference_matrices().stability_report()
    }
}

/// `E^-1 X` for the lower-triangular all-ones `E`: row `i` minus row `i - 1`.
fn backward_difference(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut d = x.clone();
    for i in 1..x.nrows() {
        let row = x.row(i) - x.row(i - 1);
        d.set_row(i, &row);
    }
    d
}

/// All-ones lower-triangular matrix of size `n`.
pub fn summation_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 } else { 0.0 })
}

/// `DI = E^-1 A_I` and `DE = E^-1 A_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMatrices {
    pub di: DMatrix<f64>,
    pub de: DMatrix<f64>,
}

impl DifferenceMatrices {
    pub fn stability_report(&self) -> StabilityReport {
        let sym = (&self.di + self.di.transpose()) * 0.5;
        let lambda_i = sym.symmetric_eigenvalues().min();
        let sigma = |m: &DMatrix<f64>| m.singular_values().max();
        StabilityReport {
            lambda_i,
            sigma_i: sigma(&self.di),
            sigma_e: sigma(&self.de),
            positive_definite: lambda_i > POSITIVE_DEFINITE_TOLERANCE,
        }
    }
}

/// Stability quantities of a tableau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Minimum eigenvalue of the symmetric part of `DI`.
    pub lambda_i: f64,
    /// Largest singular value of `DI`.
    pub sigma_i: f64,
    /// Largest singular value of `DE`.
    pub sigma_e: f64,
    pub positive_definite: bool,
}

fn r(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

fn lower(s: usize, rows: &[&[f64]]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(s, s);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i + 1, j)] = *v;
        }
    }
    m
}

fn row_sums(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m.row(i).sum()).collect()
}

/// First-order IMEX Euler: `c = (0, 1)`, `a_22 = 1`, `â_21 = 1`.
pub fn imex_euler() -> Tableau {
    let a = lower(2, &[&[0.0, 1.0]]);
    let a_hat = lower(2, &[&[1.0]]);
    Tableau::new("IMEX-Euler", 1, vec![0.0, 1.0], a, a_hat)
        .expect("static shape")
        .member(Family::ImexEuler, None)
}

/// Three-stage second-order family in `c2`.
pub fn ierk23(c2: f64) -> Result<Tableau> {
    if !c2.is_finite() || c2 == 0.0 || c2 == 1.0 {
        return Err(Error::DegenerateParameter { name: "c2", value: c2 });
    }
    let d = 2.0 - 2.0 * c2;
    let a = lower(3, &[&[0.0, c2], &[0.0, 1.0 / d, (1.0 - 2.0 * c2) / d]]);
    let a_hat = lower(3, &[&[c2], &[1.0 - 1.0 / (2.0 * c2), 1.0 / (2.0 * c2)]]);
    let c = vec![0.0, c2, 1.0];
    Ok(Tableau::new("IERK(2,3)", 2, c, a, a_hat)?.member(Family::Ierk23, Some(c2)))
}

/// Five-stage third-order family in `a55`.
pub fn ierk35(a55: f64) -> Result<Tableau> {
    let d1 = 2640.0 * a55 + 940.0;
    let d2 = 132.0 * a55 + 47.0;
    if !a55.is_finite() || d1 == 0.0 || d2 == 0.0 {
        return Err(Error::DegenerateParameter { name: "a55", value: a55 });
    }
    let x = a55;
    let a = lower(
        5,
        &[
            &[0.0, 1.0],
            &[0.0, -0.3, 0.8],
            &[0.0, r(-367, 250), r(196, 125), 0.8],
            &[
                0.0,
                -2.0 * (36.0 * x - 5.0) / 147.0,
                (75.0 * x + 598.0) / 588.0,
                -25.0 * (15.0 * x + 2.0) / 588.0,
                x,
            ],
        ],
    );
    let q = 9.0 * (639.0 * x + 1222.0) / (250.0 * d2);
    let a_hat = lower(
        5,
        &[
            &[1.0],
            &[(939.0 * x + 282.0) / d1, (381.0 * x + 188.0) / d1],
            &[q, 0.9, -q],
            &[r(47, 270), 0.1, r(19, 30), r(5, 54)],
        ],
    );
    let c = vec![0.0, 1.0, 0.5, 0.9, 1.0];
    Ok(Tableau::new("IERK(3,5)", 3, c, a, a_hat)?.member(Family::Ierk35, Some(a55)))
}

/// Seven-stage fourth-order family in `â_43` (explicit entry at stage 3, column 2
/// in zero-based indexing).
pub fn ierk47(h: f64) -> Result<Tableau> {
    if !h.is_finite() {
        return Err(Error::DegenerateParameter { name: "a43hat", value: h });
    }
    let a = lower(
        7,
        &[
            &[0.0, 0.75],
            &[0.0, -0.5, 1.5],
            &[0.0, r(-169, 800), r(129, 800), 0.5],
            &[
                0.0,
                r(-11_099_846_794_473_413_537, 13_545_655_559_296_875_000),
                r(5_938_991_227_245_191, 56_762_747_105_625_000),
                r(4_021_588_899_578_801, 4_257_206_032_921_875),
                r(144_648_284_471, 278_085_937_500),
            ],
            &[
                0.0,
                r(-15_012_700_453_574_148_059_759, 355_573_458_431_542_968_750_000),
                r(37_751_222_339_857_820_917, 135_456_555_592_968_750_000),
                r(2_547_104_330_002_710_487, 10_159_241_669_472_656_250),
                r(-3_921_377_950_657_453, 7_299_755_859_375_000),
                0.8,
            ],
            &[
                0.0,
                r(94_181, 262_500),
                -0.53,
                0.6,
                r(-125_681, 262_500),
                0.8,
                0.25,
            ],
        ],
    );
    let a_hat = lower(
        7,
        &[
            &[0.75],
            &[0.7, 0.3],
            &[h / 3.0 + r(1557, 4000), r(243, 4000) - 4.0 * h / 3.0, h],
            &[
                (70_997_500_000.0 * h + 1_042_842_334_347.0) / 2_411_160_939_000.0,
                (-283_990_000_000.0 * h - 5_126_845_621_293.0) / 2_411_160_939_000.0,
                70_997_500.0 * h / 803_720_313.0 + r(570_851_989, 676_532_250),
                1.6,
            ],
            &[
                (1_913_150_328_903.0 - 672_359_500_000.0 * h) / 2_893_393_126_800.0,
                (2_689_438_000_000.0 * h + 3_223_449_241_353.0) / 2_893_393_126_800.0,
                (-168_089_875_000.0 * h - 138_406_721_733.0) / 241_116_093_900.0,
                r(-201_267_778, 267_906_771),
                0.3,
            ],
            &[r(25, 162), r(-811, 540), r(3, 22), r(500, 891), 0.75, 0.9],
        ],
    );
    let c = vec![0.0, 0.75, 1.0, 0.45, 0.75, 0.75, 1.0];
    debug_assert!(row_sums(&a).iter().zip(&c).all(|(x, y)| (x - y).abs() < 1e-12));
    Ok(Tableau::new("IERK(4,7)", 4, c, a, a_hat)?.member(Family::Ierk47, Some(h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn imex_euler_structure() {
        let t = imex_euler();
        assert!(t.validate().is_empty());
        let d = t.difference_matrices();
        assert_eq!(d.di, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(d.de, DMatrix::from_element(1, 1, 1.0));
        let rep = t.stability_report();
        assert!(close(rep.lambda_i, 1.0, 1e-15) && rep.positive_definite);
    }

    #[test]
    fn ierk23_entries() {
        let t = ierk23(0.35).unwrap();
        assert!(close(t.a()[(2, 1)], 1.0 / 1.3, 1e-15));
        assert!(close(t.a()[(2, 2)], 0.3 / 1.3, 1e-15));
        assert!(close(t.a_hat()[(2, 1)], 1.0 / 0.7, 1e-15));
        assert_eq!(ierk23(0.5).unwrap().a()[(2, 2)], 0.0);
        for bad in [0.0, 1.0, f64::NAN] {
            assert!(matches!(ierk23(bad), Err(Error::DegenerateParameter { name: "c2", .. })));
        }
    }

    #[test]
    fn ierk23_difference_matrix() {
        let c2 = 0.3;
        let di = ierk23(c2).unwrap().difference_matrices().di;
        let expect = [
            [c2, 0.0],
            [(2.0 * c2 * c2 - 2.0 * c2 + 1.0) / (2.0 - 2.0 * c2), (1.0 - 2.0 * c2) / (2.0 - 2.0 * c2)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(di[(i, j)], expect[i][j], 1e-15));
            }
        }
    }

    #[test]
    fn ierk35_entries() {
        let t = ierk35(1.2).unwrap();
        assert!(close(t.a()[(4, 1)], -76.4 / 147.0, 1e-15));
        assert!(t.validate().is_empty());
        let c = [0.0, 1.0, 0.5, 0.9, 1.0];
        for (x, y) in t.c().iter().zip(c) {
            assert_eq!(*x, y);
        }
        assert!(ierk35(-940.0 / 2640.0).is_err());
        assert!(ierk35(-47.0 / 132.0).is_err());
    }

    #[test]
    fn ierk47_entries() {
        let t = ierk47(0.0).unwrap();
        assert_eq!(t.a_hat()[(3, 0)], 1557.0 / 4000.0);
        assert_eq!(t.a_hat()[(3, 1)], 243.0 / 4000.0);
        for h in [-3.0, 0.0, 7.5] {
            let t = ierk47(h).unwrap();
            assert!(close(t.a_hat().row(3).sum(), 0.45, 1e-14));
            assert!(t.validate().is_empty(), "{:?}", t.validate());
        }
    }

    #[test]
    fn difference_matrices_reconstruct() {
        for t in [imex_euler(), ierk23(0.2).unwrap(), ierk35(0.9).unwrap(), ierk47(2.0).unwrap()] {
            let d = t.difference_matrices();
            let si = t.stages() - 1;
            let e = summation_matrix(si);
            let a_i = t.a().view((1, 1), (si, si)).into_owned();
            let a_e = t.a_hat().view((1, 0), (si, si)).into_owned();
            assert!((&e * &d.di - a_i).amax() <= 1e-15);
            assert!((&e * &d.de - a_e).amax() <= 1e-15);
        }
    }

    #[test]
    fn stability_examples() {
        assert!(ierk23(0.3).unwrap().stability_report().positive_definite);
        assert!(!ierk23(0.05).unwrap().stability_report().positive_definite);
        assert!(ierk35(1.2).unwrap().stability_report().positive_definite);
        assert!(!ierk35(0.5).unwrap().stability_report().positive_definite);
        for h in [-5.0, 0.0, 5.0] {
            let rep = ierk47(h).unwrap().stability_report();
            assert!(rep.positive_definite);
            assert!(rep.sigma_i >= rep.lambda_i);
        }
    }

    #[test]
    fn perturbation_breaks_canopy() {
        let t = ierk35(1.2).unwrap().perturbed(Part::Explicit, 2, 1, 1e-6);
        let v = t.validate();
        assert!(v.iter().any(|m| m.starts_with("canopy")), "{v:?}");
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!("IERK47".parse::<Family>().unwrap(), Family::Ierk47);
        assert_eq!("imex-euler".parse::<Family>().unwrap(), Family::ImexEuler);
        assert!(matches!(by_name("rk4", None), Err(Error::UnknownTableau(_))));
        assert_eq!(by_name("ierk35", None).unwrap().parameter(), Some(1.2));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let bad = Tableau::new("x", 1, vec![0.0, 1.0], DMatrix::zeros(2, 2), DMatrix::zeros(3, 3));
        assert!(matches!(bad, Err(Error::InvalidTableau(_))));
    }
}
