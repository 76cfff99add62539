//! Specialized regions: the single-sensor uplink (one transmitter sees the
//! channel output, the receiver sees that transmitter's input) and the
//! feedback-free multi-sensor setting.

use serde::Serialize;
use thiserror::Error;

use super::{eliminate, evaluate_bounds, BoundSet, RegionPolytope};
use crate::channel::vars::{S, S1, S2, SR, T1, T2, U, U1, U2, V1, V2, X1, X2, Y};
use crate::channel::{build_joint, ChannelError, ChannelSpec, SchemeSpec};
use crate::estimation::min_distortion;
use crate::prob::{Alphabet, JointDistribution, ProbError};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("channel does not fit the single-sensor template: {0}")]
    NotMonostatic(String),
    #[error("channel/scheme does not fit the multi-sensor template: {0}")]
    NotMultisensor(String),
    #[error("input law has {got} entries for an alphabet of size {expected}")]
    InputLaw { expected: usize, got: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Checks `S1 = S2 = Y1 = const`, `Y2 = Y` and `SR = X2`.
pub fn matches_monostatic_template(channel: &ChannelSpec) -> Result<(), TemplateError> {
    let fail = |m: &str| Err(TemplateError::NotMonostatic(m.to_string()));
    if channel.s1.size != 1 || channel.s2.size != 1 || channel.y1.size != 1 {
        return fail("S1, S2 and Y1 must be trivial");
    }
    if channel.y2.size != channel.y.size {
        return fail("Y2 must copy Y");
    }
    if channel.sr.size != channel.x2.size {
        return fail("SR must copy X2");
    }
    let (ny, nsr) = (channel.y.size, channel.sr.size);
    for x1 in 0..channel.x1.size {
        for x2 in 0..channel.x2.size {
            for s in 0..channel.s.size {
                for y2 in 0..ny {
                    for y in 0..ny {
                        for sr in 0..nsr {
                            let p = channel.transition(x1, x2, s, [0, y2, y, sr]);
                            if p > 0.0 && y2 != y {
                                return fail("Y2 must copy Y");
                            }
                            if p > 0.0 && sr != x2 {
                                return fail("SR must copy X2");
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// One rate/distortion point of the single-sensor region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonostaticPoint {
    /// `I(X1; Y | X2)`.
    pub rate_bound: f64,
    /// Minimal distortion estimating `S` from `(X1, X2, Y)`.
    pub distortion: f64,
}

/// Rate ceiling and distortion of the single-sensor region for independent
/// inputs `X1 ~ input_law`, `X2 ~ policy`.
pub fn monostatic_region(
    channel: &ChannelSpec,
    input_law: &[f64],
    policy: &[f64],
) -> Result<MonostaticPoint, TemplateError> {
    matches_monostatic_template(channel)?;
    for (law, size) in [(input_law, channel.x1.size), (policy, channel.x2.size)] {
        if law.len() != size {
            return Err(TemplateError::InputLaw { expected: size, got: law.len() });
        }
    }
    let vars = vec![
        Alphabet::new(S, channel.s.size),
        Alphabet::new(X1, channel.x1.size),
        Alphabet::new(X2, channel.x2.size),
        Alphabet::new(Y, channel.y.size),
    ];
    let joint = JointDistribution::new(vars.clone(), {
        let mut probs = Vec::with_capacity(vars.iter().map(|a| a.size).product());
        for s in 0..channel.s.size {
            for x1 in 0..channel.x1.size {
                for x2 in 0..channel.x2.size {
                    for y in 0..channel.y.size {
                        let py = channel.transition(x1, x2, s, [0, y, y, x2]);
                        probs.push(channel.p_s.at(0, s) * input_law[x1] * policy[x2] * py);
                    }
                }
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter().map(|p| p / total).collect()
    })?;
    Ok(MonostaticPoint {
        rate_bound: joint.mutual_information(&[X1], &[Y], &[X2])?,
        distortion: min_distortion(&joint, channel, &[X1, X2, Y])?,
    })
}

/// A term whose usual written form differs from what the general bounds
/// reduce to under the multi-sensor substitutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub term: String,
    pub stated: String,
    pub derived: String,
    pub stated_value: f64,
    pub derived_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultisensorReport {
    /// `(bound name, expression, value)` in the reduced template form.
    pub terms: Vec<(String, String, f64)>,
    /// The general bounds on the same joint.
    pub bounds: BoundSet,
    /// Template terms that disagree with their general counterpart by more
    /// than 1e-9 (empty when the reduction is exact).
    pub mismatches: Vec<String>,
    pub discrepancies: Vec<Discrepancy>,
    /// Minimal distortion estimating `S` from `(U, U1, U2, T1, T2, V1, V2, Z)`.
    pub distortion: f64,
    pub polytope: RegionPolytope,
}

type Term = (&'static str, &'static str, &'static [&'static str], &'static [&'static str], &'static [&'static str]);

/// Template terms: name, expression, A, B, conditioning.
const TEMPLATE_TERMS: [Term; 10] = [
    ("common", "I(U;Z|T1,T2)", &[U], &[Y, SR], &[T1, T2]),
    ("private1", "I(U1;Z|U,U2,T1,T2)", &[U1], &[Y, SR], &[U, U2, T1, T2]),
    ("private2", "I(U2;Z|U,U1,T1,T2)", &[U2], &[Y, SR], &[U, U1, T1, T2]),
    ("private_sum", "I(U1,U2;Z|U,T1,T2)", &[U1, U2], &[Y, SR], &[U, T1, T2]),
    ("desc1", "I(T1;S1|T2,Z)", &[T1], &[S1], &[T2, Y, SR]),
    ("desc2", "I(T2;S2|T1,Z)", &[T2], &[S2], &[T1, Y, SR]),
    ("desc_sum", "I(T1,T2;S1,S2|Z)", &[T1, T2], &[S1, S2], &[Y, SR]),
    ("refine1", "I(V1;S1|U,U1,U2,T1,T2,V2,Z)", &[V1], &[S1], &[U, U1, U2, T1, T2, V2, Y, SR]),
    ("refine2", "I(V2;S2|U,U1,U2,T1,T2,V1,Z)", &[V2], &[S2], &[U, U1, U2, T1, T2, V1, Y, SR]),
    ("refine_sum", "I(V1,V2;S1,S2|U,U1,U2,T1,T2,Z)", &[V1, V2], &[S1, S2], &[U, U1, U2, T1, T2, Y, SR]),
];

fn general_value(bounds: &BoundSet, name: &str) -> f64 {
    let idx = BoundSet::NAMES.iter().position(|n| *n == name).expect("known bound");
    bounds.as_array()[idx]
}

/// Evaluates the feedback-free multi-sensor region for `scheme`, which must
/// have trivial `W1`, `W2` on a channel with trivial `Y1`, `Y2`.
pub fn multisensor_region(
    channel: &ChannelSpec,
    scheme: &SchemeSpec,
    cap: usize,
) -> Result<MultisensorReport, TemplateError> {
    if channel.y1.size != 1 || channel.y2.size != 1 {
        return Err(TemplateError::NotMultisensor("feedback outputs Y1, Y2 must be trivial".into()));
    }
    if scheme.w1.size != 1 || scheme.w2.size != 1 {
        return Err(TemplateError::NotMultisensor("cooperative auxiliaries W1, W2 must be trivial".into()));
    }
    let joint = build_joint(channel, scheme, cap)?;
    let bounds = evaluate_bounds(&joint)?;

    let mut terms = Vec::new();
    let mut mismatches = Vec::new();
    for (name, expr, a, b, c) in TEMPLATE_TERMS {
        let value = joint.mutual_information(a, b, c)?;
        let general = general_value(&bounds, name);
        if (value - general).abs() > 1e-9 {
            mismatches.push(format!("{name}: template {value} vs general {general}"));
        }
        terms.push((name.to_string(), expr.to_string(), value));
    }

    let term_value = |name: &str| terms.iter().find(|t| t.0 == name).map(|t| t.2).expect("known term");
    let discrepancies = vec![
        Discrepancy {
            term: "private1".into(),
            stated: "I(U1;Z|U,U1,T1,T2)".into(),
            derived: "I(U1;Z|U,U2,T1,T2)".into(),
            // Conditioning on the target itself leaves no information.
            stated_value: 0.0,
            derived_value: term_value("private1"),
        },
        Discrepancy {
            term: "private2".into(),
            stated: "I(U2;Z|U,U2,T1,T2)".into(),
            derived: "I(U2;Z|U,U1,T1,T2)".into(),
            stated_value: 0.0,
            derived_value: term_value("private2"),
        },
        Discrepancy {
            term: "desc_sum".into(),
            stated: "I(T1,T2;S2|Z)".into(),
            derived: "I(T1,T2;S1,S2|Z)".into(),
            stated_value: joint.mutual_information(&[T1, T2], &[S2], &[Y, SR])?,
            derived_value: term_value("desc_sum"),
        },
        Discrepancy {
            term: "refine_sum".into(),
            stated: "I(V1,V2;S2|U,U1,U2,T1,T2,Z)".into(),
            derived: "I(V1,V2;S1,S2|U,U1,U2,T1,T2,Z)".into(),
            stated_value: joint.mutual_information(&[V1, V2], &[S2], &[U, U1, U2, T1, T2, Y, SR])?,
            derived_value: term_value("refine_sum"),
        },
    ];
    let distortion = min_distortion(&joint, channel, &[U, U1, U2, T1, T2, V1, V2, Y, SR])?;
    Ok(MultisensorReport { terms, polytope: eliminate(&bounds), bounds, mismatches, discrepancies, distortion })
}
