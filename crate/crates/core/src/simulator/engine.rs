//! Trial execution: encoders, channel, short blocks and the two decoding
//! passes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::{index_count, CondSampler};
use super::feasibility::resolve_alphas;
use super::typical::TypicalityTest;
use super::{FailureKind, SimConfig, SimError, SimParams, SimReport, TrialOutcome};
use crate::channel::vars::{OMEGA_Z, S1, S2, SR, T1, T2, U, U1, U2, V1, V2, W1, W2, Y, Y1, Y2};
use crate::channel::{build_joint, validate, ChannelError, ChannelSpec, SchemeSpec, DEFAULT_JOINT_CAP};
use crate::estimation::{optimal_estimator, Estimator};
use crate::prob::JointDistribution;
use crate::seeding::{derive_seed, stream};

// Stream labels.
const KEY_MESSAGES: u64 = 1;
const KEY_CHANNEL: u64 = 2;
const KEY_U: u64 = 10;
const KEY_W: u64 = 11; // + encoder
const KEY_T: u64 = 13;
const KEY_UQ: u64 = 15;
const KEY_V: u64 = 17;
const KEY_SHORT: u64 = 19;

// Roles of short-block codewords.
const SHORT_U: u64 = 0;
const SHORT_W: u64 = 1; // + encoder
const SHORT_UQ: u64 = 3; // + encoder
const SHORT_PAIR: u64 = 5; // + encoder

/// Index counts of every codebook dimension.
#[derive(Debug, Clone, Copy)]
struct Counts {
    common: usize,
    coop: [usize; 2],
    private: [usize; 2],
    desc: [usize; 2],
    desc_bin: [usize; 2],
    refine: [usize; 2],
    refine_bin: [usize; 2],
}

impl Counts {
    fn combined(&self) -> usize {
        self.common * self.coop[0] * self.coop[1]
    }
    fn private_book(&self, q: usize) -> usize {
        self.private[q] * self.desc[q] * self.refine[q]
    }
    fn first_book(&self, q: usize) -> usize {
        self.desc[q] * self.desc_bin[q]
    }
    fn second_book(&self, q: usize) -> usize {
        self.refine[q] * self.refine_bin[q]
    }
}

struct Samplers {
    u: CondSampler,
    w: [CondSampler; 2],
    t: [CondSampler; 2],
    uq: [CondSampler; 2],
    v: [CondSampler; 2],
    pair: [CondSampler; 2],
}

struct Tests {
    feedback: [TypicalityTest; 2],
    first: [TypicalityTest; 2],
    second: [TypicalityTest; 2],
    short1: TypicalityTest,
    short2: TypicalityTest,
    bin: TypicalityTest,
    back: [TypicalityTest; 3],
    forward: [TypicalityTest; 2],
}

/// A validated simulation with every codebook dimension resolved and checked
/// against the cap.
pub struct Simulator {
    channel: ChannelSpec,
    scheme: SchemeSpec,
    params: SimParams,
    estimator: Estimator,
    omega_sizes: Vec<usize>,
    counts: Counts,
    short: [usize; 3],
    alphas: [f64; 2],
    compress_count: usize,
    compress_set: Vec<Vec<usize>>,
    samplers: Samplers,
    tests: Tests,
}

/// Sequences one encoder used in one payload block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncoderBlock {
    pub block: usize,
    pub encoder: usize,
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    pub private: Vec<usize>,
    pub side: Vec<usize>,
    pub x: Vec<usize>,
}

/// Full record of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub outcome: TrialOutcome,
    /// Every failure event raised, in order of occurrence.
    pub events: Vec<FailureKind>,
    /// Per-symbol estimates from the decoded codewords, blocks `1..=B`.
    pub estimates: Vec<usize>,
    /// Per-symbol estimates from the codewords the encoders actually sent.
    pub true_estimates: Vec<usize>,
    /// Number of typical candidates (capped at 2) of the main backward
    /// decoding step, per payload block `1..=B+1`.
    pub backward_matches: Vec<usize>,
    /// Whether some message index of the block was decoded wrongly.
    pub block_errors: Vec<bool>,
    pub encoders: Vec<EncoderBlock>,
}

fn sample(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

fn law(joint: &JointDistribution, names: &[&str], epsilon: f64) -> Result<TypicalityTest, SimError> {
    Ok(TypicalityTest::new(&joint.marginalize(names)?, epsilon))
}

/// Outputs of one channel block.
struct BlockIo {
    s: Vec<usize>,
    side: [Vec<usize>; 2],
    out: [Vec<usize>; 2],
    y: Vec<usize>,
    sr: Vec<usize>,
}

/// Indices recovered (or chosen) for one payload block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct BlockIndices {
    combined: usize,
    coop: [usize; 2],
    private: [usize; 2],
    desc: [usize; 2],
    desc_bin: [usize; 2],
    refine: [usize; 2],
    refine_bin: [usize; 2],
}

impl Simulator {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        let SimConfig { channel, scheme, params } = config;
        params.check()?;
        let violations = validate(channel, scheme);
        if !violations.is_empty() {
            return Err(ChannelError::Invalid(violations).into());
        }
        let joint = build_joint(channel, scheme, DEFAULT_JOINT_CAP)?.into_joint();
        let n = params.n as f64;
        let r = &params.rates;
        let cap = params.codebook_cap;
        let check = |what: &str, size: u128| -> Result<usize, SimError> {
            if size > cap || size > usize::MAX as u128 {
                Err(SimError::Capacity { what: what.to_string(), size, cap })
            } else {
                Ok(size as usize)
            }
        };
        let count = |what: &str, rate: f64| check(what, index_count(n, rate));
        let counts = Counts {
            common: count("common message set", r.common)?,
            coop: [count("cooperative message set 1", r.coop1)?, count("cooperative message set 2", r.coop2)?],
            private: [count("private message set 1", r.private1)?, count("private message set 2", r.private2)?],
            desc: [count("first description set 1", r.desc1)?, count("first description set 2", r.desc2)?],
            desc_bin: [count("first description bin 1", r.desc1_bin)?, count("first description bin 2", r.desc2_bin)?],
            refine: [count("second description set 1", r.refine1)?, count("second description set 2", r.refine2)?],
            refine_bin: [
                count("second description bin 1", r.refine1_bin)?,
                count("second description bin 2", r.refine2_bin)?,
            ],
        };
        let product = |xs: &[usize]| xs.iter().fold(1u128, |a, &x| a.saturating_mul(x as u128));
        check("common codebook", product(&[counts.combined()]))?;
        for q in 0..2 {
            check(&format!("private codebook {}", q + 1), product(&[counts.private_book(q)]))?;
            check(&format!("first description codebook {}", q + 1), product(&[counts.first_book(q)]))?;
            check(&format!("second description codebook {}", q + 1), product(&[counts.second_book(q)]))?;
        }
        check(
            "backward decoding search",
            product(&[counts.combined(), counts.private_book(0), counts.private_book(1)]),
        )?;
        check("binning search", product(&[counts.desc_bin[0], counts.desc_bin[1]]))?;
        check("forward decoding search", product(&[counts.refine_bin[0], counts.refine_bin[1]]))?;

        let (alphas, _) = resolve_alphas(&joint, params)?;
        let blocks_of = |len: f64, rate: f64, alpha: f64| -> usize {
            if rate <= 0.0 {
                0
            } else {
                (len * rate / alpha - 1e-9).ceil() as usize
            }
        };
        let n1 = blocks_of(n, r.desc1, alphas[0]);
        let n2 = blocks_of(n, r.desc2, alphas[1]);
        let side_entropy = joint.entropy(&[S1, Y1])?;
        let n3 = blocks_of(n2 as f64, side_entropy + params.delta, alphas[0]);
        let side_law = joint.marginalize(&[S1, Y1])?;
        let (compress_count, compress_set) = if n2 > 0 {
            let k = check("compression index set", index_count(n2 as f64, side_entropy + params.delta))?;
            let letters = side_law.len();
            let total = (0..n2).fold(1u128, |a, _| a.saturating_mul(letters as u128));
            let total = check("compression enumeration", total)?;
            let flat = JointDistribution::new(
                vec![crate::prob::Alphabet::new("S1Y1", letters)],
                side_law.probs().to_vec(),
            )?;
            let test = TypicalityTest::new(&flat, params.epsilon);
            let mut set = Vec::new();
            let mut seq = vec![0; n2];
            for mut idx in 0..total {
                for slot in seq.iter_mut().rev() {
                    *slot = idx % letters;
                    idx /= letters;
                }
                if test.holds(&[&seq], &mut Vec::new()) {
                    set.push(seq.clone());
                }
            }
            (k, set)
        } else {
            (1, Vec::new())
        };

        let eps = params.epsilon;
        let samplers = Samplers {
            u: CondSampler::from_joint(&joint, &[], &[U])?,
            w: [CondSampler::from_joint(&joint, &[U], &[W1])?, CondSampler::from_joint(&joint, &[U], &[W2])?],
            t: [CondSampler::from_joint(&joint, &[], &[T1])?, CondSampler::from_joint(&joint, &[], &[T2])?],
            uq: [
                CondSampler::from_joint(&joint, &[U, W1], &[U1])?,
                CondSampler::from_joint(&joint, &[U, W2], &[U2])?,
            ],
            v: [
                CondSampler::from_joint(&joint, &[U, W1, W2, U1, T1], &[V1])?,
                CondSampler::from_joint(&joint, &[U, W1, W2, U2, T2], &[V2])?,
            ],
            pair: [
                CondSampler::from_joint(&joint, &[U], &[W1, U1])?,
                CondSampler::from_joint(&joint, &[U], &[W2, U2])?,
            ],
        };
        let tests = Tests {
            feedback: [law(&joint, &[U, W1, W2, U1, S1, Y1], eps)?, law(&joint, &[U, W1, W2, U2, S2, Y2], eps)?],
            first: [law(&joint, &[T1, S1, Y1], eps)?, law(&joint, &[T2, S2, Y2], eps)?],
            second: [law(&joint, &[V1, S1, Y1], eps)?, law(&joint, &[V2, S2, Y2], eps)?],
            short1: law(&joint, &[U, W1, W2, U1, U2, Y, SR], eps)?,
            short2: law(&joint, &[U, W1, U1, W2, U2, S1, Y1, Y, SR], eps)?,
            bin: law(&joint, &[T1, T2, Y, SR], eps)?,
            back: [
                law(&joint, &[U, W1, W2, T1, T2, Y, SR], eps)?,
                law(&joint, &[U, W1, W2, T1, T2, Y, SR, U1], eps)?,
                law(&joint, &[U, W1, W2, T1, T2, Y, SR, U1, U2], eps)?,
            ],
            forward: [
                law(&joint, &[U, W1, W2, U1, U2, T1, T2, Y, SR, V1], eps)?,
                law(&joint, &[U, W1, W2, U1, U2, T1, T2, Y, SR, V1, V2], eps)?,
            ],
        };
        let estimator = optimal_estimator(&joint, channel, &OMEGA_Z)?;
        let omega_sizes = joint.marginalize(&OMEGA_Z)?.sizes();
        Ok(Simulator {
            channel: channel.clone(),
            scheme: scheme.clone(),
            params: params.clone(),
            estimator,
            omega_sizes,
            counts,
            short: [n1, n2, n3],
            alphas,
            compress_count,
            compress_set,
            samplers,
            tests,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Lengths of the three short blocks.
    pub fn short_blocks(&self) -> [usize; 3] {
        self.short
    }

    pub fn alphas(&self) -> [f64; 2] {
        self.alphas
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    pub fn run(&self) -> SimReport {
        let outcomes: Vec<TrialOutcome> =
            (0..self.params.trials as u64).into_par_iter().map(|t| self.trial(t).outcome).collect();
        SimReport::aggregate(self, outcomes)
    }

    fn trial_seed(&self, trial: u64) -> u64 {
        derive_seed(self.params.seed, &[self.params.n as u64, trial])
    }

    /// Draws states, applies the encoders and draws the channel outputs.
    fn transmit(
        &self,
        rng: &mut ChaCha8Rng,
        len: usize,
        encode: impl Fn(usize, usize, &[usize; 2]) -> usize,
    ) -> (BlockIo, [Vec<usize>; 2]) {
        let c = &self.channel;
        let mut io = BlockIo {
            s: Vec::with_capacity(len),
            side: [Vec::with_capacity(len), Vec::with_capacity(len)],
            out: [Vec::with_capacity(len), Vec::with_capacity(len)],
            y: Vec::with_capacity(len),
            sr: Vec::with_capacity(len),
        };
        let mut xs = [Vec::with_capacity(len), Vec::with_capacity(len)];
        for i in 0..len {
            let s = sample(c.p_s.row(0), rng.gen());
            let side = sample(c.p_s1s2.row(s), rng.gen());
            let side = [side / c.s2.size, side % c.s2.size];
            let x = [encode(0, i, &side), encode(1, i, &side)];
            let g = (x[0] * c.x2.size + x[1]) * c.s.size + s;
            let mut o = sample(c.kernel.row(g), rng.gen());
            let sr = o % c.sr.size;
            o /= c.sr.size;
            let y = o % c.y.size;
            o /= c.y.size;
            let y2 = o % c.y2.size;
            let y1 = o / c.y2.size;
            io.s.push(s);
            io.side[0].push(side[0]);
            io.side[1].push(side[1]);
            io.out[0].push(y1);
            io.out[1].push(y2);
            io.y.push(y);
            io.sr.push(sr);
            xs[0].push(x[0]);
            xs[1].push(x[1]);
        }
        (io, xs)
    }

    fn input(&self, q: usize, u: usize, w: usize, uq: usize, side: usize) -> usize {
        if q == 0 {
            self.scheme.f1_at(u, w, uq, side, self.channel.s1.size)
        } else {
            self.scheme.f2_at(u, w, uq, side, self.channel.s2.size)
        }
    }

    fn estimate(&self, omega: [&[usize]; 9], y: &[usize], sr: &[usize]) -> Vec<usize> {
        (0..y.len())
            .map(|i| {
                let mut cell = 0;
                for (k, seq) in omega.iter().chain([&y, &sr]).enumerate() {
                    cell = cell * self.omega_sizes[k] + seq[i];
                }
                self.estimator.table()[cell]
            })
            .collect()
    }

    /// Runs trial `trial` and records everything about it.
    pub fn trace(&self, trial: u64) -> Trace {
        self.trial(trial)
    }

    fn trial(&self, trial: u64) -> Trace {
        let seed = self.trial_seed(trial);
        let n = self.params.n;
        let b_count = self.params.blocks;
        let k = &self.counts;
        let sp = &self.samplers;
        let mut events: Vec<FailureKind> = Vec::new();

        // Messages; index 0 is block 0, whose cooperative indices are 0.
        let mut rng = stream(seed, &[KEY_MESSAGES]);
        let mut truth = vec![BlockIndices::default(); b_count + 2];
        for b in 1..=b_count + 1 {
            let t = &mut truth[b];
            let m0 = rng.gen_range(0..k.common);
            for q in 0..2 {
                t.coop[q] = if b <= b_count { rng.gen_range(0..k.coop[q]) } else { 0 };
                t.private[q] = rng.gen_range(0..k.private[q]);
            }
            t.combined = m0;
        }
        // Combined index of block b: (m0_b, coop1_{b-1}, coop2_{b-1}).
        let combine = |m0: usize, c1: usize, c2: usize| (m0 * k.coop[0] + c1) * k.coop[1] + c2;
        let m0s: Vec<usize> = truth.iter().map(|t| t.combined).collect();
        for b in 1..=b_count + 1 {
            truth[b].combined = combine(m0s[b], truth[b - 1].coop[0], truth[b - 1].coop[1]);
        }

        let u_cw = |b: usize, c: usize, len: usize| sp.u.codeword(seed, &[KEY_U, b as u64, c as u64], &[], len);
        let w_cw = |q: usize, b: usize, c: usize, m: usize, u: &[usize]| {
            sp.w[q].codeword(seed, &[KEY_W + q as u64, b as u64, c as u64, m as u64], &[u], n)
        };
        let t_cw = |q: usize, b: usize, idx: usize| sp.t[q].codeword(seed, &[KEY_T + q as u64, b as u64, idx as u64], &[], n);
        let uq_cw = |q: usize, b: usize, c: usize, m: usize, idx: usize, u: &[usize], w: &[usize]| {
            sp.uq[q].codeword(seed, &[KEY_UQ + q as u64, b as u64, c as u64, m as u64, idx as u64], &[u, w], n)
        };
        // Second-description codeword under the context (combined, coop1,
        // coop2, private-codeword index, first-description index).
        let v_cw = |q: usize, b: usize, ctx: [usize; 5], idx: usize, parents: [&[usize]; 5]| {
            let key = [
                KEY_V + q as u64,
                b as u64,
                ctx[0] as u64,
                ctx[1] as u64,
                ctx[2] as u64,
                ctx[3] as u64,
                ctx[4] as u64,
                idx as u64,
            ];
            sp.v[q].codeword(seed, &key, &parents, n)
        };
        let private_index = |q: usize, m: usize, kp: usize, jp: usize| (m * k.desc[q] + kp) * k.refine[q] + jp;

        // ---------------- encoders, payload blocks ----------------
        let mut chosen = truth.clone(); // desc/refine indices filled in below
        let mut view_other = [0usize; 2]; // coop index of the other encoder for the previous block
        let mut scratch = Vec::with_capacity(n);
        let mut ios: Vec<Option<BlockIo>> = Vec::new();
        ios.push(None);
        let mut sent_omega: Vec<[Vec<usize>; 9]> = vec![Default::default()];
        let mut encoders = Vec::new();
        for b in 1..=b_count + 1 {
            let t = truth[b];
            let mut us = Vec::with_capacity(2);
            let mut ws = Vec::with_capacity(2);
            let mut uqs = Vec::with_capacity(2);
            let mut cs = [0usize; 2];
            for q in 0..2 {
                let prev = [
                    if q == 0 { truth[b - 1].coop[0] } else { view_other[1] },
                    if q == 1 { truth[b - 1].coop[1] } else { view_other[0] },
                ];
                cs[q] = combine(m0s[b], prev[0], prev[1]);
                let u = u_cw(b, cs[q], n);
                let w = w_cw(q, b, cs[q], t.coop[q], &u);
                let idx = private_index(q, t.private[q], chosen[b - 1].desc[q], chosen[b - 1].refine[q]);
                let uq = uq_cw(q, b, cs[q], t.coop[q], idx, &u, &w);
                us.push(u);
                ws.push(w);
                uqs.push(uq);
            }
            let mut rng = stream(seed, &[KEY_CHANNEL, b as u64]);
            let (io, xs) = self.transmit(&mut rng, n, |q, i, side| self.input(q, us[q][i], ws[q][i], uqs[q][i], side[q]));
            for q in 0..2 {
                encoders.push(EncoderBlock {
                    block: b,
                    encoder: q + 1,
                    u: us[q].clone(),
                    w: ws[q].clone(),
                    private: uqs[q].clone(),
                    side: io.side[q].clone(),
                    x: xs[q].clone(),
                });
            }

            // Feedback decoding of the other encoder's cooperative index.
            let mut decoded_other = [0usize; 2];
            if b <= b_count {
                for q in 0..2 {
                    let other = 1 - q;
                    let mut found = None;
                    let mut matches = 0;
                    for m in 0..k.coop[other] {
                        let wo = w_cw(other, b, cs[q], m, &us[q]);
                        let (w1, w2) = if q == 0 { (&ws[0], &wo) } else { (&wo, &ws[1]) };
                        let seqs: [&[usize]; 6] = [&us[q], w1, w2, &uqs[q], &io.side[q], &io.out[q]];
                        if self.tests.feedback[q].holds(&seqs, &mut scratch) {
                            matches += 1;
                            found = Some(m);
                            if matches > 1 {
                                break;
                            }
                        }
                    }
                    decoded_other[q] = if matches == 1 { found.unwrap() } else { 0 };
                    if decoded_other[q] != t.coop[other] {
                        events.push(FailureKind::Feedback);
                    }
                }
            }

            // State descriptions.
            let mut omega: [Vec<usize>; 9] = Default::default();
            for q in 0..2 {
                let mut first = None;
                'first: for kk in 0..k.desc[q] {
                    for l in 0..k.desc_bin[q] {
                        let tq = t_cw(q, b, kk * k.desc_bin[q] + l);
                        if self.tests.first[q].holds(&[&tq, &io.side[q], &io.out[q]], &mut scratch) {
                            first = Some((kk, l));
                            break 'first;
                        }
                    }
                }
                let (kk, l) = first.unwrap_or_else(|| {
                    events.push(FailureKind::Covering);
                    (0, 0)
                });
                chosen[b].desc[q] = kk;
                chosen[b].desc_bin[q] = l;
                let tq = t_cw(q, b, kk * k.desc_bin[q] + l);
                if b <= b_count {
                    let coops = if q == 0 { [t.coop[0], decoded_other[0]] } else { [decoded_other[1], t.coop[1]] };
                    let wo = w_cw(1 - q, b, cs[q], coops[1 - q], &us[q]);
                    let (w1, w2): (&[usize], &[usize]) = if q == 0 { (&ws[0], &wo) } else { (&wo, &ws[1]) };
                    let idx = private_index(q, t.private[q], chosen[b - 1].desc[q], chosen[b - 1].refine[q]);
                    let ctx = [cs[q], coops[0], coops[1], idx, kk * k.desc_bin[q] + l];
                    let mut second = None;
                    'second: for j in 0..k.refine[q] {
                        for o in 0..k.refine_bin[q] {
                            let v = v_cw(q, b, ctx, j * k.refine_bin[q] + o, [&us[q], w1, w2, &uqs[q], &tq]);
                            if self.tests.second[q].holds(&[&v, &io.side[q], &io.out[q]], &mut scratch) {
                                second = Some((j, o, v));
                                break 'second;
                            }
                        }
                    }
                    let (j, o, v) = second.unwrap_or_else(|| {
                        events.push(FailureKind::Covering);
                        (0, 0, v_cw(q, b, ctx, 0, [&us[q], w1, w2, &uqs[q], &tq]))
                    });
                    chosen[b].refine[q] = j;
                    chosen[b].refine_bin[q] = o;
                    omega[7 + q] = v;
                }
                omega[5 + q] = tq;
            }
            omega[0] = us[0].clone();
            omega[1] = ws[0].clone();
            omega[2] = ws[1].clone();
            omega[3] = uqs[0].clone();
            omega[4] = uqs[1].clone();
            sent_omega.push(omega);
            view_other = decoded_other;
            ios.push(Some(io));
        }

        // ---------------- short blocks ----------------
        let [n1, n2, n3] = self.short;
        let short_key = |block: usize, role: u64, idx: usize| [KEY_SHORT, block as u64, role, idx as u64];
        // Single codewords (u, w_q, u_q) and pair codebook of one encoder.
        let singles = |block: usize, len: usize| {
            let u = sp.u.codeword(seed, &short_key(block, SHORT_U, 0), &[], len);
            let w: [Vec<usize>; 2] =
                std::array::from_fn(|q| sp.w[q].codeword(seed, &short_key(block, SHORT_W + q as u64, 0), &[&u], len));
            let uq: [Vec<usize>; 2] = std::array::from_fn(|q| {
                sp.uq[q].codeword(seed, &short_key(block, SHORT_UQ + q as u64, 0), &[&u, &w[q]], len)
            });
            (u, w, uq)
        };
        let pair = |block: usize, q: usize, idx: usize, u: &[usize], len: usize| {
            let c = sp.pair[q].codeword(seed, &short_key(block, SHORT_PAIR + q as u64, idx), &[u], len);
            let mut parts = sp.pair[q].split(&c);
            let uq = parts.pop().unwrap();
            (parts.pop().unwrap(), uq)
        };
        // Transmits a short block in which encoder 1 sends pair codeword
        // `idx` and encoder 2 its single codewords; returns the decoder's
        // estimate of `idx`.
        let short_block = |block: usize, idx: usize, count: usize, len: usize| {
            let (u, w, uq) = singles(block, len);
            let (pw, pu) = pair(block, 0, idx, &u, len);
            let mut rng = stream(seed, &[KEY_CHANNEL, block as u64]);
            let (io, _) = self.transmit(&mut rng, len, |e, i, side| {
                if e == 0 {
                    self.input(e, u[i], pw[i], pu[i], side[e])
                } else {
                    self.input(e, u[i], w[e][i], uq[e][i], side[e])
                }
            });
            let mut scratch = Vec::with_capacity(len);
            let mut matches = 0;
            let mut found = 0;
            for cand in 0..count {
                let (cw, cu) = pair(block, 0, cand, &u, len);
                if self.tests.short1.holds(&[&u, &cw, &w[1], &cu, &uq[1], &io.y, &io.sr], &mut scratch) {
                    matches += 1;
                    found = cand;
                    if matches > 1 {
                        break;
                    }
                }
            }
            if matches == 1 {
                found
            } else {
                0
            }
        };

        let last = b_count + 1;
        let mut decoded_desc = [0usize; 2];
        let mut short_wrong = false;
        if n1 > 0 {
            let d = short_block(last + 1, chosen[last].desc[0], k.desc[0], n1);
            decoded_desc[0] = d;
            short_wrong |= d != chosen[last].desc[0];
        }
        if n2 > 0 {
            // Block B+3 carries encoder 2's index; encoder 1 compresses its
            // observations of that block and sends them in block B+4.
            let (u, w, uq) = singles(last + 2, n2);
            let (pw, pu) = pair(last + 2, 1, chosen[last].desc[1], &u, n2);
            let mut rng = stream(seed, &[KEY_CHANNEL, (last + 2) as u64]);
            let (io3, _) = self.transmit(&mut rng, n2, |e, i, side| {
                if e == 1 {
                    self.input(e, u[i], pw[i], pu[i], side[e])
                } else {
                    self.input(e, u[i], w[e][i], uq[e][i], side[e])
                }
            });
            let y1_size = self.channel.y1.size;
            let observed: Vec<usize> = (0..n2).map(|i| io3.side[0][i] * y1_size + io3.out[0][i]).collect();
            let rank = self.compress_set.binary_search(&observed).ok().filter(|&r| r < self.compress_count);
            let index = rank.unwrap_or_else(|| {
                events.push(FailureKind::Covering);
                0
            });
            let index_hat = short_block(last + 3, index, self.compress_count, n3);
            short_wrong |= index_hat != index;
            let recovered = self.compress_set.get(index_hat).cloned().unwrap_or_else(|| vec![0; n2]);
            let side_hat: [Vec<usize>; 2] =
                [recovered.iter().map(|a| a / y1_size).collect(), recovered.iter().map(|a| a % y1_size).collect()];
            // Decode block B+3 with the recovered side information.
            let mut scratch = Vec::with_capacity(n2);
            let mut matches = 0;
            let mut found = 0;
            for cand in 0..k.desc[1] {
                let (cw, cu) = pair(last + 2, 1, cand, &u, n2);
                let seqs: [&[usize]; 9] = [&u, &w[0], &uq[0], &cw, &cu, &side_hat[0], &side_hat[1], &io3.y, &io3.sr];
                if self.tests.short2.holds(&seqs, &mut scratch) {
                    matches += 1;
                    found = cand;
                    if matches > 1 {
                        break;
                    }
                }
            }
            decoded_desc[1] = if matches == 1 { found } else { 0 };
            short_wrong |= decoded_desc[1] != chosen[last].desc[1];
        }
        if short_wrong {
            events.push(FailureKind::Backward);
        }

        // ---------------- backward decoding ----------------
        let mut dec = vec![BlockIndices::default(); b_count + 2];
        dec[last].desc = decoded_desc;
        dec[last].coop = [0, 0];
        let mut backward_matches = vec![0usize; b_count + 1];
        for b in (1..=last).rev() {
            let io = ios[b].as_ref().expect("payload block recorded");
            // Bin indices of the first descriptions.
            let mut t2s: Vec<Option<Vec<usize>>> = vec![None; k.desc_bin[1]];
            let mut matches = 0;
            let mut found = (0, 0);
            'bin: for l1 in 0..k.desc_bin[0] {
                let t1 = t_cw(0, b, dec[b].desc[0] * k.desc_bin[0] + l1);
                for l2 in 0..k.desc_bin[1] {
                    let t2 = t2s[l2].get_or_insert_with(|| t_cw(1, b, dec[b].desc[1] * k.desc_bin[1] + l2));
                    if self.tests.bin.holds(&[&t1, t2, &io.y, &io.sr], &mut scratch) {
                        matches += 1;
                        found = (l1, l2);
                        if matches > 1 {
                            break 'bin;
                        }
                    }
                }
            }
            let bins = if matches == 1 { found } else { (0, 0) };
            dec[b].desc_bin = [bins.0, bins.1];
            let t1 = t_cw(0, b, dec[b].desc[0] * k.desc_bin[0] + bins.0);
            let t2 = t_cw(1, b, dec[b].desc[1] * k.desc_bin[1] + bins.1);

            // Combined and private indices.
            let coop = dec[b].coop;
            let mut matches = 0;
            let mut found = (0, 0, 0);
            'main: for c in 0..k.combined() {
                let u = u_cw(b, c, n);
                let w1 = w_cw(0, b, c, coop[0], &u);
                let w2 = w_cw(1, b, c, coop[1], &u);
                if !self.tests.back[0].holds(&[&u, &w1, &w2, &t1, &t2, &io.y, &io.sr], &mut scratch) {
                    continue;
                }
                let mut u2s: Vec<Option<Vec<usize>>> = vec![None; k.private_book(1)];
                for a1 in 0..k.private_book(0) {
                    let u1 = uq_cw(0, b, c, coop[0], a1, &u, &w1);
                    if !self.tests.back[1].holds(&[&u, &w1, &w2, &t1, &t2, &io.y, &io.sr, &u1], &mut scratch) {
                        continue;
                    }
                    for a2 in 0..k.private_book(1) {
                        let u2 = u2s[a2].get_or_insert_with(|| uq_cw(1, b, c, coop[1], a2, &u, &w2));
                        let seqs: [&[usize]; 9] = [&u, &w1, &w2, &t1, &t2, &io.y, &io.sr, &u1, u2];
                        if self.tests.back[2].holds(&seqs, &mut scratch) {
                            matches += 1;
                            found = (c, a1, a2);
                            if matches > 1 {
                                break 'main;
                            }
                        }
                    }
                }
            }
            backward_matches[b - 1] = matches;
            let (c, a1, a2) = if matches == 1 { found } else { (0, 0, 0) };
            dec[b].combined = c;
            let split = |q: usize, a: usize| {
                let j = a % k.refine[q];
                let rest = a / k.refine[q];
                (rest / k.desc[q], rest % k.desc[q], j)
            };
            let (p1, k1, j1) = split(0, a1);
            let (p2, k2, j2) = split(1, a2);
            dec[b].private = [p1, p2];
            dec[b - 1].desc = [k1, k2];
            dec[b - 1].refine = [j1, j2];
            dec[b - 1].coop = [(c / k.coop[1]) % k.coop[0], c % k.coop[1]];
            let wrong = dec[b].combined != truth[b].combined
                || dec[b].private != truth[b].private
                || dec[b].desc_bin != chosen[b].desc_bin
                || dec[b - 1].desc != chosen[b - 1].desc
                || dec[b - 1].refine != chosen[b - 1].refine;
            if wrong {
                events.push(FailureKind::Backward);
            }
        }

        // ---------------- forward decoding and estimation ----------------
        let mut estimates = Vec::with_capacity(b_count * n);
        let mut true_estimates = Vec::with_capacity(b_count * n);
        let mut block_errors = vec![false; b_count + 1];
        let mut total_distortion = 0.0;
        for b in 1..=b_count {
            let io = ios[b].as_ref().expect("payload block recorded");
            let d = dec[b];
            let u = u_cw(b, d.combined, n);
            let w1 = w_cw(0, b, d.combined, d.coop[0], &u);
            let w2 = w_cw(1, b, d.combined, d.coop[1], &u);
            let idx = [
                private_index(0, d.private[0], dec[b - 1].desc[0], dec[b - 1].refine[0]),
                private_index(1, d.private[1], dec[b - 1].desc[1], dec[b - 1].refine[1]),
            ];
            let u1 = uq_cw(0, b, d.combined, d.coop[0], idx[0], &u, &w1);
            let u2 = uq_cw(1, b, d.combined, d.coop[1], idx[1], &u, &w2);
            let tidx = [d.desc[0] * k.desc_bin[0] + d.desc_bin[0], d.desc[1] * k.desc_bin[1] + d.desc_bin[1]];
            let t1 = t_cw(0, b, tidx[0]);
            let t2 = t_cw(1, b, tidx[1]);
            let ctx = |q: usize| [d.combined, d.coop[0], d.coop[1], idx[q], tidx[q]];
            let mut v2s: Vec<Option<Vec<usize>>> = vec![None; k.refine_bin[1]];
            let mut matches = 0;
            let mut found = (0, 0);
            'fwd: for o1 in 0..k.refine_bin[0] {
                let v1 = v_cw(0, b, ctx(0), d.refine[0] * k.refine_bin[0] + o1, [&u, &w1, &w2, &u1, &t1]);
                let head: [&[usize]; 10] = [&u, &w1, &w2, &u1, &u2, &t1, &t2, &io.y, &io.sr, &v1];
                if !self.tests.forward[0].holds(&head, &mut scratch) {
                    continue;
                }
                for o2 in 0..k.refine_bin[1] {
                    let v2 = v2s[o2].get_or_insert_with(|| {
                        v_cw(1, b, ctx(1), d.refine[1] * k.refine_bin[1] + o2, [&u, &w1, &w2, &u2, &t2])
                    });
                    let seqs: [&[usize]; 11] = [&u, &w1, &w2, &u1, &u2, &t1, &t2, &io.y, &io.sr, &v1, v2];
                    if self.tests.forward[1].holds(&seqs, &mut scratch) {
                        matches += 1;
                        found = (o1, o2);
                        if matches > 1 {
                            break 'fwd;
                        }
                    }
                }
            }
            let (o1, o2) = if matches == 1 { found } else { (0, 0) };
            if [o1, o2] != chosen[b].refine_bin {
                events.push(FailureKind::Forward);
            }
            let v1 = v_cw(0, b, ctx(0), d.refine[0] * k.refine_bin[0] + o1, [&u, &w1, &w2, &u1, &t1]);
            let v2 = v_cw(1, b, ctx(1), d.refine[1] * k.refine_bin[1] + o2, [&u, &w1, &w2, &u2, &t2]);
            let est = self.estimate([&u, &w1, &w2, &u1, &u2, &t1, &t2, &v1, &v2], &io.y, &io.sr);
            for (s, e) in io.s.iter().zip(&est) {
                total_distortion += self.channel.distortion.get(*s, *e);
            }
            estimates.extend_from_slice(&est);
            let sent = &sent_omega[b];
            let omega: [&[usize]; 9] = std::array::from_fn(|i| sent[i].as_slice());
            true_estimates.extend(self.estimate(omega, &io.y, &io.sr));
        }
        for b in 1..=last {
            let coop_wrong = b <= b_count && dec[b].coop != truth[b].coop;
            let m0_wrong = dec[b].combined / (k.coop[0] * k.coop[1]) != truth[b].combined / (k.coop[0] * k.coop[1]);
            block_errors[b - 1] = coop_wrong || m0_wrong || dec[b].private != truth[b].private;
        }
        let message_error = block_errors.iter().any(|e| *e);
        let failure = events.iter().min().copied();
        Trace {
            outcome: TrialOutcome {
                message_error,
                distortion: total_distortion / (b_count * n) as f64,
                failure,
            },
            events,
            estimates,
            true_estimates,
            backward_matches,
            block_errors,
            encoders,
        }
    }
}
