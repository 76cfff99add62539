//! Consistency guards: sum-rate ceilings and the zero-rate condition for a
//! user whose inputs carry no information.

use serde::Serialize;

use super::polytope::{RegionPolytope, POLY_TOL};
use crate::channel::vars::{S1, S2, SR, U, U1, U2, W1, W2, Y, Y1, Y2};
use crate::prob::{JointDistribution, ProbError};

/// Values below this count as zero when deciding whether the zero-rate
/// condition applies.
const ZERO_INFO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    /// `I(W1,W2,U1,U2; Z | U)`.
    pub private_ceiling: f64,
    /// `I(U,W1,W2,U1,U2; Z)`.
    pub total_ceiling: f64,
    pub max_private_sum: f64,
    pub max_total: f64,
    /// `I(W2,U2; Z,S1,Y1 | U,W1,U1)`.
    pub user2_information: f64,
    pub user2_silenced: bool,
    /// `I(W1,U1; Z,S2,Y2 | U,W2,U2)`.
    pub user1_information: f64,
    pub user1_silenced: bool,
    pub max_r1: f64,
    pub max_r2: f64,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every polytope vertex against the sum-rate ceilings and, when a
/// user's inputs are uninformative, that its rate is forced to zero.
pub fn lemma_checks(polytope: &RegionPolytope, joint: &JointDistribution) -> Result<LemmaReport, ProbError> {
    let z = [Y, SR];
    let private_ceiling = joint.mutual_information(&[W1, W2, U1, U2], &z, &[U])?;
    let total_ceiling = joint.mutual_information(&[U, W1, W2, U1, U2], &z, &[])?;
    let user2_information = joint.mutual_information(&[W2, U2], &[Y, SR, S1, Y1], &[U, W1, U1])?;
    let user1_information = joint.mutual_information(&[W1, U1], &[Y, SR, S2, Y2], &[U, W2, U2])?;

    let max = |w: [f64; 3]| polytope.max_objective(w).map(|(v, _)| v).unwrap_or(0.0);
    let max_private_sum = max([0.0, 1.0, 1.0]);
    let max_total = max([1.0, 1.0, 1.0]);
    let max_r1 = max([0.0, 1.0, 0.0]);
    let max_r2 = max([0.0, 0.0, 1.0]);

    let mut violations = Vec::new();
    for v in polytope.vertices() {
        if v[1] + v[2] > private_ceiling + POLY_TOL {
            violations.push(format!("vertex {v:?}: R1+R2 exceeds {private_ceiling}"));
        }
        if v[0] + v[1] + v[2] > total_ceiling + POLY_TOL {
            violations.push(format!("vertex {v:?}: R0+R1+R2 exceeds {total_ceiling}"));
        }
    }
    let user2_silenced = user2_information <= ZERO_INFO;
    if user2_silenced && max_r2 > POLY_TOL {
        violations.push(format!("user 2 carries no information but max R2 = {max_r2}"));
    }
    let user1_silenced = user1_information <= ZERO_INFO;
    if user1_silenced && max_r1 > POLY_TOL {
        violations.push(format!("user 1 carries no information but max R1 = {max_r1}"));
    }
    Ok(LemmaReport {
        private_ceiling,
        total_ceiling,
        max_private_sum,
        max_total,
        user2_information,
        user2_silenced,
        user1_information,
        user1_silenced,
        max_r1,
        max_r2,
        violations,
    })
}
