//! The linear system in rates and auxiliary rates, and LP-based membership.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::{BoundSet, RateTriple};

/// Feasibility slack on every right-hand side.
pub(crate) const MEMBERSHIP_TOL: f64 = 1e-9;

/// Number of variables `(R0, R1, R2, R1', R1'', R2', R2'', Rs1, Rs2, Rt1, Rt2)`.
pub(crate) const NVARS: usize = 11;
pub(crate) const VAR_NAMES: [&str; NVARS] =
    ["R0", "R1", "R2", "R1p", "R1pp", "R2p", "R2pp", "Rs1", "Rs2", "Rt1", "Rt2"];

/// One row `coeffs . v <= rhs` tagged with a label index.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: [f64; NVARS],
    pub rhs: f64,
    pub label: usize,
}

/// Row labels: the fifteen bounds, the two rate splits, then nonnegativity
/// of each variable.
pub(crate) fn labels() -> Vec<String> {
    let mut out: Vec<String> = BoundSet::NAMES.iter().map(|s| s.to_string()).collect();
    out.push("split1".into());
    out.push("split2".into());
    out.extend(VAR_NAMES.iter().map(|v| format!("nonneg_{v}")));
    out
}

pub(crate) const SPLIT1: usize = 15;
pub(crate) const SPLIT2: usize = 16;
pub(crate) const NONNEG0: usize = 17;

pub(crate) fn rows(b: &BoundSet) -> Vec<Row> {
    // Variable positions.
    const R0: usize = 0;
    const R1: usize = 1;
    const R2: usize = 2;
    const R1P: usize = 3;
    const R1PP: usize = 4;
    const R2P: usize = 5;
    const R2PP: usize = 6;
    const RS1: usize = 7;
    const RS2: usize = 8;
    const RT1: usize = 9;
    const RT2: usize = 10;

    let row = |terms: &[(usize, f64)], rhs: f64, label: usize| {
        let mut coeffs = [0.0; NVARS];
        for &(i, c) in terms {
            coeffs[i] += c;
        }
        Row { coeffs, rhs, label }
    };
    let v = b.as_array();
    let mut out = vec![
        row(&[(R0, 1.0), (R1P, 1.0), (R2P, 1.0)], v[0], 0),
        row(&[(R1P, 1.0)], v[1], 1),
        row(&[(R2P, 1.0)], v[2], 2),
        row(&[(R1P, 1.0)], v[3], 3),
        row(&[(R2P, 1.0)], v[4], 4),
        row(&[(R1P, 1.0), (R2P, 1.0)], v[5], 5),
        row(&[(R1PP, 1.0), (RS1, 1.0), (RT1, 1.0)], v[6], 6),
        row(&[(R2PP, 1.0), (RS2, 1.0), (RT2, 1.0)], v[7], 7),
        row(&[(R1PP, 1.0), (R2PP, 1.0), (RS1, 1.0), (RS2, 1.0), (RT1, 1.0), (RT2, 1.0)], v[8], 8),
        row(&[(RS1, -1.0)], -v[9], 9),
        row(&[(RS2, -1.0)], -v[10], 10),
        row(&[(RS1, -1.0), (RS2, -1.0)], -v[11], 11),
        row(&[(RT1, -1.0)], -v[12], 12),
        row(&[(RT2, -1.0)], -v[13], 13),
        row(&[(RT1, -1.0), (RT2, -1.0)], -v[14], 14),
        row(&[(R1, 1.0), (R1P, -1.0), (R1PP, -1.0)], 0.0, SPLIT1),
        row(&[(R1, -1.0), (R1P, 1.0), (R1PP, 1.0)], 0.0, SPLIT1),
        row(&[(R2, 1.0), (R2P, -1.0), (R2PP, -1.0)], 0.0, SPLIT2),
        row(&[(R2, -1.0), (R2P, 1.0), (R2PP, 1.0)], 0.0, SPLIT2),
    ];
    for i in 0..NVARS {
        out.push(row(&[(i, -1.0)], 0.0, NONNEG0 + i));
    }
    out
}

/// A feasible split of a member triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxiliaryRates {
    pub r1p: f64,
    pub r1pp: f64,
    pub r2p: f64,
    pub r2pp: f64,
    pub rs1: f64,
    pub rs2: f64,
    pub rt1: f64,
    pub rt2: f64,
}

impl AuxiliaryRates {
    pub fn as_array(&self) -> [f64; 8] {
        [self.r1p, self.r1pp, self.r2p, self.r2pp, self.rs1, self.rs2, self.rt1, self.rt2]
    }
}

/// An implied inequality `coeffs . (R0, R1, R2) <= rhs` that the queried
/// triple violates, with the nonnegative row multipliers that produce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub coeffs: [f64; 3],
    pub rhs: f64,
    pub multipliers: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Membership {
    Member(AuxiliaryRates),
    NonMember(Certificate),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

/// Decides whether `triple` is in the region by solving for auxiliary rates.
/// The witness minimizes the total description rate.
pub fn membership(triple: RateTriple, bounds: &BoundSet) -> Membership {
    let r = triple.as_array();
    let label_names = labels();
    for (i, &x) in r.iter().enumerate() {
        if x < -MEMBERSHIP_TOL {
            let mut coeffs = [0.0; 3];
            coeffs[i] = -1.0;
            return Membership::NonMember(Certificate {
                coeffs,
                rhs: 0.0,
                multipliers: vec![(label_names[NONNEG0 + i].clone(), 1.0)],
            });
        }
    }
    // Rows over the auxiliary block with the rate part moved to the right.
    let system: Vec<Row> = rows(bounds).into_iter().filter(|row| row.label < NONNEG0).collect();
    let reduced: Vec<([f64; 8], f64)> = system
        .iter()
        .map(|row| {
            let mut a = [0.0; 8];
            a.copy_from_slice(&row.coeffs[3..]);
            let rhs = row.rhs - (0..3).map(|i| row.coeffs[i] * r[i]).sum::<f64>();
            (a, rhs)
        })
        .collect();

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let objective = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
    let x: Vec<_> = objective.iter().map(|&c| lp.add_var(c, (0.0, f64::INFINITY))).collect();
    for (a, rhs) in &reduced {
        let terms: Vec<_> = x.iter().zip(a).filter(|(_, c)| **c != 0.0).map(|(v, c)| (*v, *c)).collect();
        lp.add_constraint(&terms[..], ComparisonOp::Le, rhs + MEMBERSHIP_TOL);
    }
    if let Ok(sol) = lp.solve() {
        let v: Vec<f64> = x.iter().map(|&xi| sol[xi].max(0.0)).collect();
        return Membership::Member(AuxiliaryRates {
            r1p: v[0],
            r1pp: v[1],
            r2p: v[2],
            r2pp: v[3],
            rs1: v[4],
            rs2: v[5],
            rt1: v[6],
            rt2: v[7],
        });
    }
    Membership::NonMember(farkas(&system, &reduced, &label_names))
}

/// Minimizes `b'y` over `A'y >= 0, sum y <= 1, y >= 0`; a negative optimum
/// proves the auxiliary system infeasible.
fn farkas(system: &[Row], reduced: &[([f64; 8], f64)], names: &[String]) -> Certificate {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let y: Vec<_> = reduced.iter().map(|(_, rhs)| lp.add_var(rhs + MEMBERSHIP_TOL, (0.0, f64::INFINITY))).collect();
    for j in 0..8 {
        let terms: Vec<_> =
            y.iter().zip(reduced).filter(|(_, (a, _))| a[j] != 0.0).map(|(v, (a, _))| (*v, a[j])).collect();
        lp.add_constraint(&terms[..], ComparisonOp::Ge, 0.0);
    }
    let all: Vec<_> = y.iter().map(|v| (*v, 1.0)).collect();
    lp.add_constraint(&all[..], ComparisonOp::Le, 1.0);
    let sol = lp.solve().expect("bounded multiplier problem is always solvable");
    let mut coeffs = [0.0; 3];
    let mut rhs = 0.0;
    let mut multipliers = Vec::new();
    for (k, row) in system.iter().enumerate() {
        let w = sol[y[k]];
        if w > 1e-12 {
            for (i, c) in coeffs.iter_mut().enumerate() {
                *c += w * row.coeffs[i];
            }
            rhs += w * row.rhs;
            multipliers.push((names[row.label].clone(), w));
        }
    }
    Certificate { coeffs, rhs, multipliers }
}
