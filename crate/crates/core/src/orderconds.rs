//! Simplified order conditions for IERK pairs up to order four.
//!
//! Weights are always read from the last tableau rows.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableaux::Tableau;

/// Residual tolerance used by [`certify`].
pub const CERTIFY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    Implicit,
    Explicit,
    Coupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub label: String,
    pub lhs: f64,
    pub target: f64,
    /// Target as a fraction, e.g. `1/24`.
    pub target_label: String,
    pub residual: f64,
    pub order: usize,
    pub kind: ConditionKind,
}

struct Terms {
    b: DVector<f64>,
    bh: DVector<f64>,
    one: DVector<f64>,
    c: DVector<f64>,
    c2: DVector<f64>,
    c3: DVector<f64>,
    ac: DVector<f64>,
    ahc: DVector<f64>,
    ahc2: DVector<f64>,
    a2c: DVector<f64>,
    ah2c: DVector<f64>,
    a_ahc: DVector<f64>,
    ah_ac: DVector<f64>,
}

impl Terms {
    fn new(t: &Tableau) -> Self {
        let (a, ah, c) = (t.a(), t.a_hat(), t.c().clone());
        let c2 = c.component_mul(&c);
        let c3 = c2.component_mul(&c);
        let ac = a * &c;
        let ahc = ah * &c;
        Self {
            b: t.b(),
            bh: t.b_hat(),
            one: DVector::from_element(c.len(), 1.0),
            ahc2: ah * &c2,
            a2c: a * &ac,
            ah2c: ah * &ahc,
            a_ahc: a * &ahc,
            ah_ac: ah * &ac,
            c,
            c2,
            c3,
            ac,
            ahc,
        }
    }
}

type Row = (&'static str, usize, ConditionKind, i32, fn(&Terms) -> f64);

fn conditions() -> [Row; 20] {
    use ConditionKind::*;
    [
        ("bᵀ1", 1, Implicit, 1, |t| t.b.dot(&t.one)),
        ("b̂ᵀ1", 1, Explicit, 1, |t| t.bh.dot(&t.one)),
        ("bᵀc", 2, Implicit, 2, |t| t.b.dot(&t.c)),
        ("b̂ᵀc", 2, Explicit, 2, |t| t.bh.dot(&t.c)),
        ("b̂ᵀc²", 3, Explicit, 3, |t| t.bh.dot(&t.c2)),
        ("bᵀAc", 3, Implicit, 6, |t| t.b.dot(&t.ac)),
        ("b̂ᵀÂc", 3, Explicit, 6, |t| t.bh.dot(&t.ahc)),
        ("bᵀÂc", 3, Coupling, 6, |t| t.b.dot(&t.ahc)),
        ("b̂ᵀAc", 3, Coupling, 6, |t| t.bh.dot(&t.ac)),
        ("b̂ᵀc³", 4, Explicit, 4, |t| t.bh.dot(&t.c3)),
        ("b̂ᵀ[c⊙Âc]", 4, Explicit, 8, |t| t.bh.dot(&t.c.component_mul(&t.ahc))),
        ("b̂ᵀ[c⊙Ac]", 4, Coupling, 8, |t| t.bh.dot(&t.c.component_mul(&t.ac))),
        ("b̂ᵀÂc²", 4, Explicit, 12, |t| t.bh.dot(&t.ahc2)),
        ("bᵀÂc²", 4, Coupling, 12, |t| t.b.dot(&t.ahc2)),
        ("b̂ᵀAÂc + bᵀÂ²c", 4, Coupling, 12, |t| t.bh.dot(&t.a_ahc) + t.b.dot(&t.ah2c)),
        ("bᵀA²c", 4, Implicit, 24, |t| t.b.dot(&t.a2c)),
        ("bᵀÂAc + b̂ᵀA²c", 4, Coupling, 12, |t| t.b.dot(&t.ah_ac) + t.bh.dot(&t.a2c)),
        ("bᵀAÂc", 4, Coupling, 24, |t| t.b.dot(&t.a_ahc)),
        ("b̂ᵀÂAc", 4, Coupling, 24, |t| t.bh.dot(&t.ah_ac)),
        ("b̂ᵀÂ²c", 4, Explicit, 24, |t| t.bh.dot(&t.ah2c)),
    ]
}

/// Evaluates every condition of orders `1..=p`.
pub fn check_order(t: &Tableau, p: usize) -> Result<Vec<ConditionResult>> {
    if !(1..=4).contains(&p) {
        return Err(Error::InvalidOrder(p));
    }
    let terms = Terms::new(t);
    Ok(conditions()
        .into_iter()
        .filter(|row| row.1 <= p)
        .map(|(label, order, kind, den, eval)| {
            let lhs = eval(&terms);
            let target = 1.0 / den as f64;
            let target_label = if den == 1 { "1".to_string() } else { format!("1/{den}") };
            ConditionResult {
                label: format!("{label} = {target_label}"),
                lhs,
                target,
                target_label,
                residual: (lhs - target).abs(),
                order,
                kind,
            }
        })
        .collect())
}

/// Largest order whose conditions all hold to [`CERTIFY_TOLERANCE`]; 0 if none.
pub fn certify(t: &Tableau) -> usize {
    let all = check_order(t, 4).expect("4 is a valid order");
    (1..=4)
        .take_while(|&p| {
            all.iter()
                .filter(|r| r.order == p)
                .all(|r| r.residual <= CERTIFY_TOLERANCE)
        })
        .last()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::{ierk23, ierk35, ierk47, imex_euler};

    #[test]
    fn census() {
        let all = check_order(&imex_euler(), 4).unwrap();
        let count = |p| all.iter().filter(|r| r.order == p).count();
        assert_eq!((count(1), count(2), count(3), count(4)), (2, 2, 5, 11));
        assert!(matches!(check_order(&imex_euler(), 0), Err(Error::InvalidOrder(0))));
        assert!(matches!(check_order(&imex_euler(), 5), Err(Error::InvalidOrder(5))));
    }

    #[test]
    fn imex_euler_first_order() {
        let res = check_order(&imex_euler(), 1).unwrap();
        assert!(res.iter().all(|r| r.residual == 0.0));
        assert_eq!(certify(&imex_euler()), 1);
    }

    #[test]
    fn ierk47_fourth_order() {
        let res = check_order(&ierk47(-0.8).unwrap(), 4).unwrap();
        assert_eq!(res.len(), 20);
        for r in &res {
            assert!(r.residual <= 1e-12, "{} residual {:e}", r.label, r.residual);
        }
    }

    #[test]
    fn ierk23_is_not_third_order() {
        let res = check_order(&ierk23(0.35).unwrap(), 3).unwrap();
        assert!(res.iter().filter(|r| r.order == 3).any(|r| r.residual > 1e-3));
    }

    #[test]
    fn certified_orders() {
        assert_eq!(certify(&ierk23(0.2).unwrap()), 2);
        assert_eq!(certify(&ierk35(0.7).unwrap()), 3);
        assert_eq!(certify(&ierk47(2.0).unwrap()), 4);
    }

    #[test]
    fn labels_carry_targets() {
        let res = check_order(&imex_euler(), 4).unwrap();
        assert_eq!(res[0].label, "bᵀ1 = 1");
        assert_eq!(res[15].label, "bᵀA²c = 1/24");
        assert_eq!(res[15].target_label, "1/24");
    }
}
