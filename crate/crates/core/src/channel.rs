//! The state-dependent multiple-access channel, one candidate coding scheme,
//! their structural validation, and the exact system joint distribution.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{
    flatten, strides, Alphabet, ConditionalKernel, JointDistribution, ProbError, NORMALIZATION_TOL,
};

/// Canonical variable names used in every system joint.
pub mod vars {
    pub const S: &str = "S";
    pub const S1: &str = "S1";
    pub const S2: &str = "S2";
    pub const U: &str = "U";
    pub const W1: &str = "W1";
    pub const W2: &str = "W2";
    pub const U1: &str = "U1";
    pub const U2: &str = "U2";
    pub const X1: &str = "X1";
    pub const X2: &str = "X2";
    pub const Y: &str = "Y";
    pub const SR: &str = "SR";
    pub const Y1: &str = "Y1";
    pub const Y2: &str = "Y2";
    pub const T1: &str = "T1";
    pub const T2: &str = "T2";
    pub const V1: &str = "V1";
    pub const V2: &str = "V2";
    pub const S_HAT: &str = "S_hat";

    /// Axis order of [`super::SystemJoint`].
    pub const JOINT_ORDER: [&str; 18] =
        [S, S1, S2, U, W1, W2, U1, U2, X1, X2, Y, SR, Y1, Y2, T1, T2, V1, V2];

    /// The decoder's channel output `Z = (Y, SR)`.
    pub const Z: [&str; 2] = [Y, SR];

    /// All auxiliary variables of a scheme.
    pub const OMEGA: [&str; 9] = [U, W1, W2, U1, U2, T1, T2, V1, V2];

    /// `(Omega, Z)`, the decoder's estimation input.
    pub const OMEGA_Z: [&str; 11] = [U, W1, W2, U1, U2, T1, T2, V1, V2, Y, SR];
}

/// Default cap on the number of entries of a system joint tensor.
pub const DEFAULT_JOINT_CAP: usize = 1 << 27;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid channel/scheme: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("joint tensor would have {entries} entries, above the cap of {cap}")]
    Capacity { entries: u128, cap: usize },
    #[error("estimator table has {got} cells, conditioning space has {expected}")]
    EstimatorShape { expected: usize, got: usize },
    #[error("estimator maps a cell to symbol {symbol}, but the estimate alphabet has {size}")]
    EstimatorRange { symbol: usize, size: usize },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Machine-readable category of a validation failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationCode {
    AlphabetMismatch,
    NegativeProbability,
    NormalizationViolation,
    DistortionInvalid,
    EncoderShape,
    EncoderRange,
    CausalityViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

/// Per-symbol distortion `d(s, s_hat)`, row-major over `S x S_hat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionTable {
    states: usize,
    estimates: usize,
    values: Vec<f64>,
}

impl DistortionTable {
    pub fn new(states: usize, estimates: usize, values: Vec<f64>) -> Result<Self, ProbError> {
        if values.len() != states * estimates {
            return Err(ProbError::ShapeMismatch { expected: states * estimates, got: values.len() });
        }
        Ok(DistortionTable { states, estimates, values })
    }

    pub fn hamming(size: usize) -> Self {
        let values = (0..size * size).map(|i| if i / size == i % size { 0.0 } else { 1.0 }).collect();
        DistortionTable { states: size, estimates: size, values }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn estimates(&self) -> usize {
        self.estimates
    }

    pub fn get(&self, s: usize, s_hat: usize) -> f64 {
        self.values[s * self.estimates + s_hat]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.estimates).map(|r| r.to_vec()).collect()
    }
}

/// The channel: state law, side-information law, transition kernel
/// `P(Y1,Y2,Y,SR | X1,X2,S)` and distortion measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub s: Alphabet,
    pub s1: Alphabet,
    pub s2: Alphabet,
    pub x1: Alphabet,
    pub x2: Alphabet,
    pub y1: Alphabet,
    pub y2: Alphabet,
    pub y: Alphabet,
    pub sr: Alphabet,
    pub s_hat: Alphabet,
    /// `P(S)`.
    pub p_s: ConditionalKernel,
    /// `P(S1,S2 | S)`.
    pub p_s1s2: ConditionalKernel,
    /// `P(Y1,Y2,Y,SR | X1,X2,S)`.
    pub kernel: ConditionalKernel,
    pub distortion: DistortionTable,
}

/// Alphabet sizes of a channel, in a fixed field order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSizes {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "S1")]
    pub s1: usize,
    #[serde(rename = "S2")]
    pub s2: usize,
    #[serde(rename = "X1")]
    pub x1: usize,
    #[serde(rename = "X2")]
    pub x2: usize,
    #[serde(rename = "Y1")]
    pub y1: usize,
    #[serde(rename = "Y2")]
    pub y2: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    #[serde(rename = "SR")]
    pub sr: usize,
    #[serde(rename = "S_hat")]
    pub s_hat: usize,
}

impl ChannelSpec {
    /// Assembles a channel from sizes and row tables. `kernel_rows` is
    /// indexed by `(x1, x2, s)` row-major with columns `(y1, y2, y, sr)`.
    pub fn from_tables(
        sizes: ChannelSizes,
        p_s: Vec<f64>,
        p_s1s2_rows: &[Vec<f64>],
        kernel_rows: &[Vec<f64>],
        distortion_rows: &[Vec<f64>],
    ) -> Result<Self, ProbError> {
        let a = |n: &str, k: usize| Alphabet::new(n, k);
        let s = a(vars::S, sizes.s);
        let s1 = a(vars::S1, sizes.s1);
        let s2 = a(vars::S2, sizes.s2);
        let x1 = a(vars::X1, sizes.x1);
        let x2 = a(vars::X2, sizes.x2);
        let y1 = a(vars::Y1, sizes.y1);
        let y2 = a(vars::Y2, sizes.y2);
        let y = a(vars::Y, sizes.y);
        let sr = a(vars::SR, sizes.sr);
        let s_hat = a(vars::S_HAT, sizes.s_hat);
        for al in [&s, &s1, &s2, &x1, &x2, &y1, &y2, &y, &sr, &s_hat] {
            al.check()?;
        }
        let p_s = ConditionalKernel::marginal(vec![s.clone()], p_s)?;
        let p_s1s2 =
            ConditionalKernel::from_rows(vec![s.clone()], vec![s1.clone(), s2.clone()], p_s1s2_rows)?;
        let kernel = ConditionalKernel::from_rows(
            vec![x1.clone(), x2.clone(), s.clone()],
            vec![y1.clone(), y2.clone(), y.clone(), sr.clone()],
            kernel_rows,
        )?;
        if distortion_rows.len() != sizes.s {
            return Err(ProbError::ShapeMismatch { expected: sizes.s, got: distortion_rows.len() });
        }
        for r in distortion_rows {
            if r.len() != sizes.s_hat {
                return Err(ProbError::ShapeMismatch { expected: sizes.s_hat, got: r.len() });
            }
        }
        let distortion = DistortionTable::new(sizes.s, sizes.s_hat, distortion_rows.concat())?;
        Ok(ChannelSpec { s, s1, s2, x1, x2, y1, y2, y, sr, s_hat, p_s, p_s1s2, kernel, distortion })
    }

    pub fn sizes(&self) -> ChannelSizes {
        ChannelSizes {
            s: self.s.size,
            s1: self.s1.size,
            s2: self.s2.size,
            x1: self.x1.size,
            x2: self.x2.size,
            y1: self.y1.size,
            y2: self.y2.size,
            y: self.y.size,
            sr: self.sr.size,
            s_hat: self.s_hat.size,
        }
    }

    /// `P(y1, y2, y, sr | x1, x2, s)`.
    pub fn transition(&self, x1: usize, x2: usize, s: usize, out: [usize; 4]) -> f64 {
        let g = (x1 * self.x2.size + x2) * self.s.size + s;
        let t = ((out[0] * self.y2.size + out[1]) * self.y.size + out[2]) * self.sr.size + out[3];
        self.kernel.at(g, t)
    }

    /// Number of output tuples `(y1, y2, y, sr)`.
    pub fn output_count(&self) -> usize {
        self.kernel.cols()
    }
}

/// Whether encoders see their side information causally (current symbol
/// included) or strictly causally (current symbol excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Causal,
    StrictlyCausal,
}

/// One candidate scheme: auxiliary alphabets, their conditional laws and the
/// two encoder lookup tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub u: Alphabet,
    pub w1: Alphabet,
    pub w2: Alphabet,
    pub u1: Alphabet,
    pub u2: Alphabet,
    pub t1: Alphabet,
    pub t2: Alphabet,
    pub v1: Alphabet,
    pub v2: Alphabet,
    /// `P(U)`.
    pub p_u: ConditionalKernel,
    /// `P(W1 | U)`.
    pub p_w1: ConditionalKernel,
    /// `P(W2 | U)`.
    pub p_w2: ConditionalKernel,
    /// `P(U1 | U, W1)`.
    pub p_u1: ConditionalKernel,
    /// `P(U2 | U, W2)`.
    pub p_u2: ConditionalKernel,
    /// `P(T1 | S1, Y1)`.
    pub p_t1: ConditionalKernel,
    /// `P(T2 | S2, Y2)`.
    pub p_t2: ConditionalKernel,
    /// `P(V1 | S1, U, W1, W2, U1, Y1, T1)`.
    pub p_v1: ConditionalKernel,
    /// `P(V2 | S2, U, W1, W2, U2, Y2, T2)`.
    pub p_v2: ConditionalKernel,
    /// `X1 = f1(u, w1, u1, s1)`, row-major over `(U, W1, U1, S1)`.
    pub f1: Vec<usize>,
    /// `X2 = f2(u, w2, u2, s2)`, row-major over `(U, W2, U2, S2)`.
    pub f2: Vec<usize>,
    pub mode: Mode,
}

/// Auxiliary alphabet sizes of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSizes {
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "W1")]
    pub w1: usize,
    #[serde(rename = "W2")]
    pub w2: usize,
    #[serde(rename = "U1")]
    pub u1: usize,
    #[serde(rename = "U2")]
    pub u2: usize,
    #[serde(rename = "T1")]
    pub t1: usize,
    #[serde(rename = "T2")]
    pub t2: usize,
    #[serde(rename = "V1")]
    pub v1: usize,
    #[serde(rename = "V2")]
    pub v2: usize,
}

impl Default for SchemeSizes {
    /// Every auxiliary binary.
    fn default() -> Self {
        SchemeSizes { u: 2, w1: 2, w2: 2, u1: 2, u2: 2, t1: 2, t2: 2, v1: 2, v2: 2 }
    }
}

impl SchemeSizes {
    pub fn trivial() -> Self {
        SchemeSizes { u: 1, w1: 1, w2: 1, u1: 1, u2: 1, t1: 1, t2: 1, v1: 1, v2: 1 }
    }
}

/// The given-variable lists of every scheme kernel, in a fixed order shared
/// by the config format and the search parameterization.
pub(crate) fn scheme_kernel_parents(
    channel: &ChannelSpec,
    a: &SchemeAlphabets,
) -> [(Vec<Alphabet>, Alphabet); 9] {
    [
        (vec![], a.u.clone()),
        (vec![a.u.clone()], a.w1.clone()),
        (vec![a.u.clone()], a.w2.clone()),
        (vec![a.u.clone(), a.w1.clone()], a.u1.clone()),
        (vec![a.u.clone(), a.w2.clone()], a.u2.clone()),
        (vec![channel.s1.clone(), channel.y1.clone()], a.t1.clone()),
        (vec![channel.s2.clone(), channel.y2.clone()], a.t2.clone()),
        (
            vec![
                channel.s1.clone(),
                a.u.clone(),
                a.w1.clone(),
                a.w2.clone(),
                a.u1.clone(),
                channel.y1.clone(),
                a.t1.clone(),
            ],
            a.v1.clone(),
        ),
        (
            vec![
                channel.s2.clone(),
                a.u.clone(),
                a.w1.clone(),
                a.w2.clone(),
                a.u2.clone(),
                channel.y2.clone(),
                a.t2.clone(),
            ],
            a.v2.clone(),
        ),
    ]
}

pub(crate) struct SchemeAlphabets {
    pub u: Alphabet,
    pub w1: Alphabet,
    pub w2: Alphabet,
    pub u1: Alphabet,
    pub u2: Alphabet,
    pub t1: Alphabet,
    pub t2: Alphabet,
    pub v1: Alphabet,
    pub v2: Alphabet,
}

impl SchemeAlphabets {
    pub(crate) fn from_sizes(s: SchemeSizes) -> Self {
        SchemeAlphabets {
            u: Alphabet::new(vars::U, s.u),
            w1: Alphabet::new(vars::W1, s.w1),
            w2: Alphabet::new(vars::W2, s.w2),
            u1: Alphabet::new(vars::U1, s.u1),
            u2: Alphabet::new(vars::U2, s.u2),
            t1: Alphabet::new(vars::T1, s.t1),
            t2: Alphabet::new(vars::T2, s.t2),
            v1: Alphabet::new(vars::V1, s.v1),
            v2: Alphabet::new(vars::V2, s.v2),
        }
    }
}

impl SchemeSpec {
    /// Builds a scheme from flat kernel tables given in the fixed kernel
    /// order `P(U), P(W1|U), P(W2|U), P(U1|U,W1), P(U2|U,W2), P(T1|S1,Y1),
    /// P(T2|S2,Y2), P(V1|..), P(V2|..)`.
    pub fn from_tables(
        channel: &ChannelSpec,
        sizes: SchemeSizes,
        kernels: [Vec<f64>; 9],
        f1: Vec<usize>,
        f2: Vec<usize>,
        mode: Mode,
    ) -> Result<Self, ProbError> {
        let a = SchemeAlphabets::from_sizes(sizes);
        for al in [&a.u, &a.w1, &a.w2, &a.u1, &a.u2, &a.t1, &a.t2, &a.v1, &a.v2] {
            al.check()?;
        }
        let parents = scheme_kernel_parents(channel, &a);
        let mut built = Vec::with_capacity(9);
        for ((given, target), probs) in parents.into_iter().zip(kernels) {
            built.push(ConditionalKernel::new(given, vec![target], probs)?);
        }
        let mut it = built.into_iter();
        let mut next = || it.next().expect("nine kernels");
        Ok(SchemeSpec {
            p_u: next(),
            p_w1: next(),
            p_w2: next(),
            p_u1: next(),
            p_u2: next(),
            p_t1: next(),
            p_t2: next(),
            p_v1: next(),
            p_v2: next(),
            u: a.u,
            w1: a.w1,
            w2: a.w2,
            u1: a.u1,
            u2: a.u2,
            t1: a.t1,
            t2: a.t2,
            v1: a.v1,
            v2: a.v2,
            f1,
            f2,
            mode,
        })
    }

    /// The all-trivial scheme: every auxiliary constant and both encoders
    /// sending symbol 0.
    pub fn trivial(channel: &ChannelSpec) -> Self {
        let sizes = SchemeSizes::trivial();
        let kernels = std::array::from_fn(|k| {
            let rows = match k {
                5 => channel.s1.size * channel.y1.size,
                6 => channel.s2.size * channel.y2.size,
                7 => channel.s1.size * channel.y1.size,
                8 => channel.s2.size * channel.y2.size,
                _ => 1,
            };
            vec![1.0; rows]
        });
        SchemeSpec::from_tables(
            channel,
            sizes,
            kernels,
            vec![0; channel.s1.size],
            vec![0; channel.s2.size],
            Mode::Causal,
        )
        .expect("trivial scheme is well formed")
    }

    pub fn sizes(&self) -> SchemeSizes {
        SchemeSizes {
            u: self.u.size,
            w1: self.w1.size,
            w2: self.w2.size,
            u1: self.u1.size,
            u2: self.u2.size,
            t1: self.t1.size,
            t2: self.t2.size,
            v1: self.v1.size,
            v2: self.v2.size,
        }
    }

    pub fn kernels(&self) -> [&ConditionalKernel; 9] {
        [
            &self.p_u, &self.p_w1, &self.p_w2, &self.p_u1, &self.p_u2, &self.p_t1, &self.p_t2,
            &self.p_v1, &self.p_v2,
        ]
    }

    pub fn f1_at(&self, u: usize, w1: usize, u1: usize, s1: usize, s1_size: usize) -> usize {
        self.f1[((u * self.w1.size + w1) * self.u1.size + u1) * s1_size + s1]
    }

    pub fn f2_at(&self, u: usize, w2: usize, u2: usize, s2: usize, s2_size: usize) -> usize {
        self.f2[((u * self.w2.size + w2) * self.u2.size + u2) * s2_size + s2]
    }
}

/// Row count of each scheme kernel, in the fixed kernel order.
pub fn scheme_kernel_rows(channel: &ChannelSpec, s: SchemeSizes) -> [usize; 9] {
    let (s1, y1, s2, y2) = (channel.s1.size, channel.y1.size, channel.s2.size, channel.y2.size);
    [
        1,
        s.u,
        s.u,
        s.u * s.w1,
        s.u * s.w2,
        s1 * y1,
        s2 * y2,
        s1 * s.u * s.w1 * s.w2 * s.u1 * y1 * s.t1,
        s2 * s.u * s.w1 * s.w2 * s.u2 * y2 * s.t2,
    ]
}

/// Column count of each scheme kernel, in the fixed kernel order.
pub fn scheme_kernel_cols(s: SchemeSizes) -> [usize; 9] {
    [s.u, s.w1, s.w2, s.u1, s.u2, s.t1, s.t2, s.v1, s.v2]
}

fn kernel_names() -> [&'static str; 9] {
    [
        "P(U)",
        "P(W1|U)",
        "P(W2|U)",
        "P(U1|U,W1)",
        "P(U2|U,W2)",
        "P(T1|S1,Y1)",
        "P(T2|S2,Y2)",
        "P(V1|S1,U,W1,W2,U1,Y1,T1)",
        "P(V2|S2,U,W1,W2,U2,Y2,T2)",
    ]
}

fn kernel_violations(name: &str, k: &ConditionalKernel, out: &mut Vec<Violation>) {
    let bad = k.invalid_entries();
    if !bad.is_empty() {
        out.push(Violation {
            code: ViolationCode::NegativeProbability,
            message: format!("{name}: {} negative or non-finite entries (first at {})", bad.len(), bad[0]),
        });
    }
    for (row, sum) in k.row_defects(NORMALIZATION_TOL) {
        out.push(Violation {
            code: ViolationCode::NormalizationViolation,
            message: format!("{name}: row {row} sums to {sum}"),
        });
    }
}

fn alphabet_sizes(v: &[Alphabet]) -> Vec<usize> {
    v.iter().map(|a| a.size).collect()
}

/// Checks every structural constraint on a channel/scheme pair. An empty
/// list means the pair is usable.
pub fn validate(channel: &ChannelSpec, scheme: &SchemeSpec) -> Vec<Violation> {
    let mut out = Vec::new();

    let chan_kernels: [(&str, &ConditionalKernel, Vec<usize>, Vec<usize>); 3] = [
        ("P(S)", &channel.p_s, vec![], vec![channel.s.size]),
        ("P(S1,S2|S)", &channel.p_s1s2, vec![channel.s.size], vec![channel.s1.size, channel.s2.size]),
        (
            "P(Y1,Y2,Y,SR|X1,X2,S)",
            &channel.kernel,
            vec![channel.x1.size, channel.x2.size, channel.s.size],
            vec![channel.y1.size, channel.y2.size, channel.y.size, channel.sr.size],
        ),
    ];
    for (name, k, g, t) in &chan_kernels {
        if alphabet_sizes(k.given()) != *g || alphabet_sizes(k.target()) != *t {
            out.push(Violation {
                code: ViolationCode::AlphabetMismatch,
                message: format!("{name}: kernel alphabets do not match the declared sizes"),
            });
            continue;
        }
        kernel_violations(name, k, &mut out);
    }

    let d = &channel.distortion;
    if d.states() != channel.s.size || d.estimates() != channel.s_hat.size {
        out.push(Violation {
            code: ViolationCode::AlphabetMismatch,
            message: format!(
                "distortion table is {}x{}, expected {}x{}",
                d.states(),
                d.estimates(),
                channel.s.size,
                channel.s_hat.size
            ),
        });
    } else if let Some(v) = d.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        out.push(Violation {
            code: ViolationCode::DistortionInvalid,
            message: format!("distortion entry {v} is negative or not finite"),
        });
    }

    let expected = SchemeAlphabets::from_sizes(scheme.sizes());
    let parents = scheme_kernel_parents(channel, &expected);
    for ((name, k), (given, target)) in kernel_names().iter().zip(scheme.kernels()).zip(parents) {
        if alphabet_sizes(k.given()) != alphabet_sizes(&given) || alphabet_sizes(k.target()) != vec![target.size]
        {
            out.push(Violation {
                code: ViolationCode::AlphabetMismatch,
                message: format!("{name}: kernel alphabets do not match the scheme/channel sizes"),
            });
            continue;
        }
        kernel_violations(name, k, &mut out);
    }

    let s1 = channel.s1.size;
    let s2 = channel.s2.size;
    let dom1 = scheme.u.size * scheme.w1.size * scheme.u1.size * s1;
    let dom2 = scheme.u.size * scheme.w2.size * scheme.u2.size * s2;
    for (name, table, dom, xs, ss) in
        [("f1", &scheme.f1, dom1, channel.x1.size, s1), ("f2", &scheme.f2, dom2, channel.x2.size, s2)]
    {
        if table.len() != dom {
            out.push(Violation {
                code: ViolationCode::EncoderShape,
                message: format!("{name} has {} entries, its domain has {dom}", table.len()),
            });
            continue;
        }
        if let Some((i, &x)) = table.iter().enumerate().find(|(_, &x)| x >= xs) {
            out.push(Violation {
                code: ViolationCode::EncoderRange,
                message: format!("{name}[{i}] = {x} is outside the input alphabet of size {xs}"),
            });
        }
        if scheme.mode == Mode::StrictlyCausal {
            // The side-information argument is the fastest-varying index.
            for (row, chunk) in table.chunks(ss).enumerate() {
                if chunk.iter().any(|&x| x != chunk[0]) {
                    out.push(Violation {
                        code: ViolationCode::CausalityViolation,
                        message: format!(
                            "{name} depends on the current side-information symbol at argument row {row}"
                        ),
                    });
                    break;
                }
            }
        }
    }
    out
}

/// The exact joint law of all system variables for one channel/scheme pair.
#[derive(Debug, Clone)]
pub struct SystemJoint {
    joint: JointDistribution,
}

impl std::ops::Deref for SystemJoint {
    type Target = JointDistribution;
    fn deref(&self) -> &JointDistribution {
        &self.joint
    }
}

impl SystemJoint {
    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    pub fn into_joint(self) -> JointDistribution {
        self.joint
    }
}

/// Builds the system joint as the product of the state, side-information,
/// auxiliary, encoder-indicator, channel and description factors.
pub fn build_joint(
    channel: &ChannelSpec,
    scheme: &SchemeSpec,
    cap: usize,
) -> Result<SystemJoint, ChannelError> {
    let violations = validate(channel, scheme);
    if !violations.is_empty() {
        return Err(ChannelError::Invalid(violations));
    }
    let alphabets: Vec<Alphabet> = vec![
        channel.s.clone(),
        channel.s1.clone(),
        channel.s2.clone(),
        scheme.u.clone(),
        scheme.w1.clone(),
        scheme.w2.clone(),
        scheme.u1.clone(),
        scheme.u2.clone(),
        channel.x1.clone(),
        channel.x2.clone(),
        channel.y.clone(),
        channel.sr.clone(),
        channel.y1.clone(),
        channel.y2.clone(),
        scheme.t1.clone(),
        scheme.t2.clone(),
        scheme.v1.clone(),
        scheme.v2.clone(),
    ];
    let sizes: Vec<usize> = alphabets.iter().map(|a| a.size).collect();
    let entries: u128 = sizes.iter().map(|&s| s as u128).product();
    if entries > cap as u128 {
        return Err(ChannelError::Capacity { entries, cap });
    }
    let len = entries as usize;
    let strides_all = strides(&sizes);

    const S: usize = 0;
    const S1: usize = 1;
    const S2: usize = 2;
    const U: usize = 3;
    const W1: usize = 4;
    const W2: usize = 5;
    const U1: usize = 6;
    const U2: usize = 7;
    const X1: usize = 8;
    const X2: usize = 9;
    const Y: usize = 10;
    const SR: usize = 11;
    const Y1: usize = 12;
    const Y2: usize = 13;
    const T1: usize = 14;
    const T2: usize = 15;
    const V1: usize = 16;
    const V2: usize = 17;

    let mut probs = vec![0.0; len];
    let mut a = [0usize; 18];
    let sz = &sizes;
    let ix = |vals: &[usize], idx: &[usize]| -> usize {
        idx.iter().fold(0, |acc, &i| acc * sz[i] + vals[i])
    };

    // Walk (S, S1, S2, U, W1, W2, U1, U2) and derive X1, X2 from the
    // encoder tables, then enumerate the remaining free axes.
    let head: Vec<usize> = sizes[..8].to_vec();
    let head_len: usize = head.iter().product();
    let tail_axes = [Y, SR, Y1, Y2, T1, T2, V1, V2];
    let tail_sizes: Vec<usize> = tail_axes.iter().map(|&i| sizes[i]).collect();
    let tail_len: usize = tail_sizes.iter().product();
    let mut head_idx = vec![0usize; 8];
    let mut tail_idx = vec![0usize; 8];
    for h in 0..head_len {
        crate::prob::unflatten(h, &head, &mut head_idx);
        a[..8].copy_from_slice(&head_idx);
        let p_head = channel.p_s.at(0, a[S])
            * channel.p_s1s2.at(a[S], a[S1] * sz[S2] + a[S2])
            * scheme.p_u.at(0, a[U])
            * scheme.p_w1.at(a[U], a[W1])
            * scheme.p_w2.at(a[U], a[W2])
            * scheme.p_u1.at(a[U] * sz[W1] + a[W1], a[U1])
            * scheme.p_u2.at(a[U] * sz[W2] + a[W2], a[U2]);
        if p_head == 0.0 {
            continue;
        }
        a[X1] = scheme.f1[ix(&a, &[U, W1, U1, S1])];
        a[X2] = scheme.f2[ix(&a, &[U, W2, U2, S2])];
        let g = ix(&a, &[X1, X2, S]);
        for t in 0..tail_len {
            crate::prob::unflatten(t, &tail_sizes, &mut tail_idx);
            for (k, &axis) in tail_axes.iter().enumerate() {
                a[axis] = tail_idx[k];
            }
            let p_chan = channel.kernel.at(g, ix(&a, &[Y1, Y2, Y, SR]));
            if p_chan == 0.0 {
                continue;
            }
            let p = p_head
                * p_chan
                * scheme.p_t1.at(ix(&a, &[S1, Y1]), a[T1])
                * scheme.p_t2.at(ix(&a, &[S2, Y2]), a[T2])
                * scheme.p_v1.at(ix(&a, &[S1, U, W1, W2, U1, Y1, T1]), a[V1])
                * scheme.p_v2.at(ix(&a, &[S2, U, W1, W2, U2, Y2, T2]), a[V2]);
            let flat: usize = a.iter().zip(&strides_all).map(|(v, s)| v * s).sum();
            probs[flat] = p;
        }
    }
    Ok(SystemJoint { joint: JointDistribution::from_product(alphabets, probs)? })
}

/// Expected distortion `E[d(S, est(W))]` of an estimator table over the
/// row-major product space of `conditioning`.
pub fn distortion_of<S: AsRef<str>>(
    channel: &ChannelSpec,
    estimator: &[usize],
    joint: &JointDistribution,
    conditioning: &[S],
) -> Result<f64, ChannelError> {
    let names: Vec<&str> =
        conditioning.iter().map(|s| s.as_ref()).chain(std::iter::once(vars::S)).collect();
    let m = joint.marginalize(&names)?;
    let states = channel.s.size;
    let cells = m.len() / states;
    if estimator.len() != cells {
        return Err(ChannelError::EstimatorShape { expected: cells, got: estimator.len() });
    }
    if let Some(&symbol) = estimator.iter().find(|&&e| e >= channel.s_hat.size) {
        return Err(ChannelError::EstimatorRange { symbol, size: channel.s_hat.size });
    }
    let mut total = 0.0;
    for (w, &est) in estimator.iter().enumerate() {
        for s in 0..states {
            total += m.probs()[w * states + s] * channel.distortion.get(s, est);
        }
    }
    Ok(total)
}

/// Index of an assignment inside a product space (exposed for table users).
pub fn cell_index(assignment: &[usize], sizes: &[usize]) -> usize {
    flatten(assignment, sizes)
}
