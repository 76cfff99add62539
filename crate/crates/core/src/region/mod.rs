//! Information bounds of the achievable region, exact membership of rate
//! triples, the projected polytope in `(R0, R1, R2)`, and the two specialized
//! regions (single-sensor uplink and feedback-free multi-sensor).

mod fm;
mod lemmas;
mod polytope;
mod special;
mod system;

pub use fm::{fourier_motzkin, Inequality};
pub use lemmas::{lemma_checks, LemmaReport};
pub use polytope::{eliminate, RegionPolytope, Slice, LABELS as CONSTRAINT_LABELS};
pub use special::{
    matches_monostatic_template, monostatic_region, multisensor_region, Discrepancy, MonostaticPoint,
    MultisensorReport, TemplateError,
};
pub use system::{membership, AuxiliaryRates, Certificate, Membership};

use serde::{Deserialize, Serialize};

use crate::channel::vars::{S1, S2, T1, T2, U, U1, U2, V1, V2, W1, W2, Y1, Y2};
use crate::channel::vars;
use crate::prob::{JointDistribution, ProbError};

/// Common and private message rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateTriple {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
}

impl RateTriple {
    pub fn new(r0: f64, r1: f64, r2: f64) -> Self {
        RateTriple { r0, r1, r2 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r0, self.r1, self.r2]
    }
}

/// The fifteen mutual-information right-hand sides that define the region.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundSet {
    /// `I(U; T1,T2,Z)`, caps `R0 + R1' + R2'`.
    pub common: f64,
    /// `I(W1; S2,Y2 | U,W2,U2)`: encoder 2 decoding the cooperative part of user 1.
    pub feedback1: f64,
    /// `I(W2; S1,Y1 | U,W1,U1)`.
    pub feedback2: f64,
    /// `I(W1; T1,T2,Z | U,W2)`.
    pub coop1: f64,
    /// `I(W2; T1,T2,Z | U,W1)`.
    pub coop2: f64,
    /// `I(W1,W2; T1,T2,Z | U)`.
    pub coop_sum: f64,
    /// `I(U1; T1,T2,Z | U,W1,W2,U2)`, caps `R1'' + Rs1 + Rt1`.
    pub private1: f64,
    /// `I(U2; T1,T2,Z | U,W1,W2,U1)`.
    pub private2: f64,
    /// `I(U1,U2; T1,T2,Z | U,W1,W2)`.
    pub private_sum: f64,
    /// `I(T1; S1,Y1 | T2,Z)`, floor on `Rs1`.
    pub desc1: f64,
    /// `I(T2; S2,Y2 | T1,Z)`.
    pub desc2: f64,
    /// `I(T1,T2; S1,Y1,S2,Y2 | Z)`.
    pub desc_sum: f64,
    /// `I(V1; S1,Y1 | U,W1,W2,U1,U2,T1,T2,V2,Z)`, floor on `Rt1`.
    pub refine1: f64,
    /// `I(V2; S2,Y2 | U,W1,W2,U1,U2,T1,T2,V1,Z)`.
    pub refine2: f64,
    /// `I(V1,V2; S1,Y1,S2,Y2 | U,W1,W2,U1,U2,T1,T2,Z)`.
    pub refine_sum: f64,
}

impl BoundSet {
    pub const NAMES: [&'static str; 15] = [
        "common",
        "feedback1",
        "feedback2",
        "coop1",
        "coop2",
        "coop_sum",
        "private1",
        "private2",
        "private_sum",
        "desc1",
        "desc2",
        "desc_sum",
        "refine1",
        "refine2",
        "refine_sum",
    ];

    /// Human-readable information expression of each bound, aligned with [`Self::NAMES`].
    pub const EXPRESSIONS: [&'static str; 15] = [
        "I(U;T1,T2,Z)",
        "I(W1;S2,Y2|U,W2,U2)",
        "I(W2;S1,Y1|U,W1,U1)",
        "I(W1;T1,T2,Z|U,W2)",
        "I(W2;T1,T2,Z|U,W1)",
        "I(W1,W2;T1,T2,Z|U)",
        "I(U1;T1,T2,Z|U,W1,W2,U2)",
        "I(U2;T1,T2,Z|U,W1,W2,U1)",
        "I(U1,U2;T1,T2,Z|U,W1,W2)",
        "I(T1;S1,Y1|T2,Z)",
        "I(T2;S2,Y2|T1,Z)",
        "I(T1,T2;S1,Y1,S2,Y2|Z)",
        "I(V1;S1,Y1|U,W1,W2,U1,U2,T1,T2,V2,Z)",
        "I(V2;S2,Y2|U,W1,W2,U1,U2,T1,T2,V1,Z)",
        "I(V1,V2;S1,Y1,S2,Y2|U,W1,W2,U1,U2,T1,T2,Z)",
    ];

    pub fn as_array(&self) -> [f64; 15] {
        [
            self.common,
            self.feedback1,
            self.feedback2,
            self.coop1,
            self.coop2,
            self.coop_sum,
            self.private1,
            self.private2,
            self.private_sum,
            self.desc1,
            self.desc2,
            self.desc_sum,
            self.refine1,
            self.refine2,
            self.refine_sum,
        ]
    }

    pub fn from_array(v: [f64; 15]) -> Self {
        BoundSet {
            common: v[0],
            feedback1: v[1],
            feedback2: v[2],
            coop1: v[3],
            coop2: v[4],
            coop_sum: v[5],
            private1: v[6],
            private2: v[7],
            private_sum: v[8],
            desc1: v[9],
            desc2: v[10],
            desc_sum: v[11],
            refine1: v[12],
            refine2: v[13],
            refine_sum: v[14],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Every bound as `(target set A, target set B, conditioning set)`, with
/// `Z` expanded to `{Y, SR}`.
pub(crate) fn bound_terms() -> [(Vec<&'static str>, Vec<&'static str>, Vec<&'static str>); 15] {
    let with_z = |v: &[&'static str]| -> Vec<&'static str> {
        let mut out = v.to_vec();
        out.extend(vars::Z);
        out
    };
    [
        (vec![U], with_z(&[T1, T2]), vec![]),
        (vec![W1], vec![S2, Y2], vec![U, W2, U2]),
        (vec![W2], vec![S1, Y1], vec![U, W1, U1]),
        (vec![W1], with_z(&[T1, T2]), vec![U, W2]),
        (vec![W2], with_z(&[T1, T2]), vec![U, W1]),
        (vec![W1, W2], with_z(&[T1, T2]), vec![U]),
        (vec![U1], with_z(&[T1, T2]), vec![U, W1, W2, U2]),
        (vec![U2], with_z(&[T1, T2]), vec![U, W1, W2, U1]),
        (vec![U1, U2], with_z(&[T1, T2]), vec![U, W1, W2]),
        (vec![T1], vec![S1, Y1], with_z(&[T2])),
        (vec![T2], vec![S2, Y2], with_z(&[T1])),
        (vec![T1, T2], vec![S1, Y1, S2, Y2], with_z(&[])),
        (vec![V1], vec![S1, Y1], with_z(&[U, W1, W2, U1, U2, T1, T2, V2])),
        (vec![V2], vec![S2, Y2], with_z(&[U, W1, W2, U1, U2, T1, T2, V1])),
        (vec![V1, V2], vec![S1, Y1, S2, Y2], with_z(&[U, W1, W2, U1, U2, T1, T2])),
    ]
}

/// Evaluates every bound on a system joint.
pub fn evaluate_bounds(joint: &JointDistribution) -> Result<BoundSet, ProbError> {
    let mut values = [0.0; 15];
    for (slot, (a, b, c)) in values.iter_mut().zip(bound_terms()) {
        *slot = joint.mutual_information(&a, &b, &c)?;
    }
    Ok(BoundSet::from_array(values))
}
