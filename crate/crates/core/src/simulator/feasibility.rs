//! Encoder- and decoder-side rate conditions of the coding scheme, evaluated
//! against a concrete rate vector.

use serde::Serialize;

use super::{SimConfig, SimError, SimParams};
use crate::channel::vars::{S1, S2, SR, T1, T2, U, U1, U2, V1, V2, W1, W2, Y, Y1, Y2};
use crate::channel::{build_joint, DEFAULT_JOINT_CAP};
use crate::prob::JointDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The rate sum must stay strictly below the information term.
    Below,
    /// The rate sum must strictly exceed the information term.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateConstraint {
    pub name: String,
    /// Stage of the scheme the condition protects.
    pub stage: String,
    pub direction: Direction,
    pub rate: f64,
    pub information: f64,
    /// `information - rate` for [`Direction::Below`], `rate - information`
    /// for [`Direction::Above`]; the condition holds iff positive, or when
    /// both rate and information are zero (a one-codeword stage).
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Guard {
    pub name: String,
    pub information: f64,
    pub alpha: f64,
    /// The margin was not configured and was derived from `information`.
    pub defaulted: bool,
    /// `information > alpha > 0`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub constraints: Vec<RateConstraint>,
    pub guards: Vec<Guard>,
    /// `I(W1,W2,U1,U2; Z | U)`; when zero, no private rate is supportable.
    pub private_information: f64,
}

impl FeasibilityReport {
    pub fn all_satisfied(&self) -> bool {
        self.constraints.iter().all(|c| c.satisfied) && self.guards.iter().all(|g| g.holds)
    }
}

const Z: [&str; 2] = [Y, SR];

fn mi(j: &JointDistribution, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64, SimError> {
    Ok(j.mutual_information(a, b, c)?)
}

fn cat<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Informations bounding the two short-block margins.
fn alpha_information(joint: &JointDistribution) -> Result<[f64; 2], SimError> {
    Ok([
        mi(joint, &[W1, U1], &Z, &[U, W2, U2])?,
        mi(joint, &[W2, U2], &[Y, SR, S1, Y1], &[U, W1, U1])?,
    ])
}

/// Configured margins, or a tenth of the corresponding information (1 when
/// that information is zero). The flags mark derived values.
pub(crate) fn resolve_alphas(joint: &JointDistribution, params: &SimParams) -> Result<([f64; 2], [bool; 2]), SimError> {
    let info = alpha_information(joint)?;
    let pick = |given: Option<f64>, i: f64| match given {
        Some(a) => (a, false),
        None if i > 0.0 => (0.1 * i, true),
        None => (1.0, true),
    };
    let (a1, d1) = pick(params.alpha1, info[0]);
    let (a2, d2) = pick(params.alpha2, info[1]);
    Ok(([a1, a2], [d1, d2]))
}

/// Evaluates every rate condition of the scheme against the rates of
/// `config` and reports the slack of each.
pub fn rate_feasibility_report(config: &SimConfig) -> Result<FeasibilityReport, SimError> {
    let j = build_joint(&config.channel, &config.scheme, DEFAULT_JOINT_CAP)?.into_joint();
    let r = &config.params.rates;
    let mut constraints = Vec::new();
    let mut push = |name: &str, stage: &str, direction: Direction, rate: f64, information: f64| {
        let slack = match direction {
            Direction::Below => information - rate,
            Direction::Above => rate - information,
        };
        constraints.push(RateConstraint {
            name: name.into(),
            stage: stage.into(),
            direction,
            rate,
            information,
            slack,
            satisfied: slack > 0.0 || (rate == 0.0 && information == 0.0),
        });
    };
    use Direction::{Above, Below};

    push("feedback1", "feedback", Below, r.coop1, mi(&j, &[W1], &[Y2, S2], &[U, W2, U2])?);
    push("feedback2", "feedback", Below, r.coop2, mi(&j, &[W2], &[Y1, S1], &[U, W1, U1])?);

    push("first_cover1", "covering", Above, r.desc1 + r.desc1_bin, mi(&j, &[T1], &[S1, Y1], &[])?);
    push("first_cover2", "covering", Above, r.desc2 + r.desc2_bin, mi(&j, &[T2], &[S2, Y2], &[])?);
    push("second_cover1", "covering", Above, r.refine1 + r.refine1_bin, mi(&j, &[V1], &[S1, Y1], &[U, W1, W2, U1, T1])?);
    push("second_cover2", "covering", Above, r.refine2 + r.refine2_bin, mi(&j, &[V2], &[S2, Y2], &[U, W1, W2, U2, T2])?);

    let tz = cat(&[&[T1, T2], &Z]);
    let p1 = r.private1 + r.desc1 + r.refine1;
    let p2 = r.private2 + r.desc2 + r.refine2;
    push("common", "backward", Below, r.common + r.coop1 + r.coop2, mi(&j, &[U], &tz, &[])?);
    push("coop1", "backward", Below, r.coop1, mi(&j, &[W1], &tz, &[U, W2])?);
    push("coop2", "backward", Below, r.coop2, mi(&j, &[W2], &tz, &[U, W1])?);
    push("coop_sum", "backward", Below, r.coop1 + r.coop2, mi(&j, &[W1, W2], &tz, &[U])?);
    push("private1", "backward", Below, p1, mi(&j, &[U1], &tz, &[U, W1, W2, U2])?);
    push("private2", "backward", Below, p2, mi(&j, &[U2], &tz, &[U, W1, W2, U1])?);
    push("private_sum", "backward", Below, p1 + p2, mi(&j, &[U1, U2], &tz, &[U, W1, W2])?);

    let b1 = mi(&j, &[T1], &cat(&[&[T2], &Z]), &[])?;
    let b2 = mi(&j, &[T2], &cat(&[&[T1], &Z]), &[])?;
    let b12 = mi(&j, &[T1], &[T2], &Z)?;
    push("bin1", "binning", Below, r.desc1_bin, b1);
    push("bin2", "binning", Below, r.desc2_bin, b2);
    push("bin_sum", "binning", Below, r.desc1_bin + r.desc2_bin, b1 + b2 - b12);

    let ctx = [U, W1, W2, U1, U2, T1, T2];
    let f1 = mi(&j, &[V1], &cat(&[&[V2], &Z]), &ctx)?;
    let f2 = mi(&j, &[V2], &cat(&[&[V1], &Z]), &ctx)?;
    let f12 = mi(&j, &[V1], &[V2], &cat(&[&ctx, &Z]))?;
    push("forward1", "forward", Below, r.refine1_bin, f1);
    push("forward2", "forward", Below, r.refine2_bin, f2);
    push("forward_sum", "forward", Below, r.refine1_bin + r.refine2_bin, f1 + f2 - f12);

    let info = alpha_information(&j)?;
    let (alphas, defaulted) = resolve_alphas(&j, &config.params)?;
    let guards = ["margin1", "margin2"]
        .iter()
        .enumerate()
        .map(|(q, name)| Guard {
            name: (*name).into(),
            information: info[q],
            alpha: alphas[q],
            defaulted: defaulted[q],
            holds: info[q] > alphas[q] && alphas[q] > 0.0,
        })
        .collect();
    Ok(FeasibilityReport {
        constraints,
        guards,
        private_information: mi(&j, &[W1, W2, U1, U2], &Z, &[U])?,
    })
}
