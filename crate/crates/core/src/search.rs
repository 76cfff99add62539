//! Searching scheme parameters at fixed auxiliary cardinalities for the best
//! weighted rate under a distortion cap, and sweeping the cap.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    build_joint, scheme_kernel_cols, scheme_kernel_rows, vars, ChannelError, ChannelSpec, Mode, SchemeSizes,
    SchemeSpec, DEFAULT_JOINT_CAP,
};
use crate::config::scheme_digest;
use crate::estimation::{optimal_estimator, Estimator};
use crate::prob::ProbError;
use crate::region::{eliminate, evaluate_bounds, RateTriple};
use crate::seeding::stream;

/// Encoder tables with at most this many candidates are enumerated.
pub const ENUMERATION_LIMIT: u128 = 64;
/// Slack on the distortion cap when accepting a scheme.
pub const DISTORTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    RandomRestart,
    CoordinateAscent,
    ExhaustiveDeterministic,
}

fn default_weights() -> [f64; 3] {
    [0.0, 1.0, 1.0]
}

fn default_budget() -> usize {
    200
}

fn default_cap() -> usize {
    DEFAULT_JOINT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default)]
    pub cardinalities: SchemeSizes,
    /// Objective `w0*R0 + w1*R1 + w2*R2`.
    #[serde(default = "default_weights")]
    pub weights: [f64; 3],
    #[serde(default)]
    pub distortion_cap: f64,
    #[serde(default)]
    pub strategy: Strategy,
    /// Maximum number of scheme evaluations per search.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_cap")]
    pub joint_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            cardinalities: SchemeSizes::default(),
            weights: default_weights(),
            distortion_cap: 0.0,
            strategy: Strategy::default(),
            budget: default_budget(),
            seed: 0,
            mode: Mode::default(),
            joint_cap: default_cap(),
        }
    }
}

impl SearchConfig {
    pub fn check(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || self.weights.iter().all(|w| *w == 0.0) {
            return bad("weights must be nonnegative and not all zero");
        }
        if !(self.distortion_cap.is_finite() && self.distortion_cap >= 0.0) {
            return bad("distortion cap must be a nonnegative number");
        }
        if self.budget == 0 {
            return bad("budget must be at least 1");
        }
        let c = self.cardinalities;
        if [c.u, c.w1, c.w2, c.u1, c.u2, c.t1, c.t2, c.v1, c.v2].contains(&0) {
            return bad("cardinalities must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("no scheme met the distortion cap within budget; best distortion found {best_distortion}")]
    Empty { best_distortion: f64, scheme: Option<Box<SchemeSpec>> },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Outcome of scoring one scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub rates: RateTriple,
    pub distortion: f64,
    pub feasible: bool,
}

/// Scores `scheme`: the distortion of the optimal decoder-side estimator and
/// the best weighted rate over the region polytope.
pub fn evaluate_scheme(channel: &ChannelSpec, scheme: &SchemeSpec, config: &SearchConfig) -> Result<Evaluation, SearchError> {
    let joint = build_joint(channel, scheme, config.joint_cap)?;
    let distortion = optimal_estimator(&joint, channel, &vars::OMEGA_Z)?.expected_distortion();
    let polytope = eliminate(&evaluate_bounds(&joint)?);
    let best = polytope.max_objective(config.weights);
    let (objective, rates) = match best {
        Some((v, r)) => (v, RateTriple::new(r[0], r[1], r[2])),
        None => (f64::NEG_INFINITY, RateTriple::default()),
    };
    Ok(Evaluation {
        objective,
        rates,
        distortion,
        feasible: best.is_some() && distortion <= config.distortion_cap + DISTORTION_TOL,
    })
}

/// Search-space geometry of one encoder table: `rows` argument tuples
/// without the side information, `side` side-information symbols, `inputs`
/// channel inputs.
#[derive(Debug, Clone, Copy)]
struct EncoderSpace {
    rows: usize,
    side: usize,
    inputs: usize,
    mode: Mode,
}

impl EncoderSpace {
    fn free_entries(&self) -> usize {
        match self.mode {
            Mode::Causal => self.rows * self.side,
            Mode::StrictlyCausal => self.rows,
        }
    }

    /// Number of distinct tables, saturating.
    fn count(&self) -> u128 {
        let mut n: u128 = 1;
        for _ in 0..self.free_entries() {
            n = n.saturating_mul(self.inputs as u128);
        }
        n
    }

    fn expand(&self, free: &[usize]) -> Vec<usize> {
        match self.mode {
            Mode::Causal => free.to_vec(),
            Mode::StrictlyCausal => free.iter().flat_map(|&x| std::iter::repeat_n(x, self.side)).collect(),
        }
    }

    fn table_at(&self, mut idx: u128) -> Vec<usize> {
        let mut free = vec![0; self.free_entries()];
        for slot in free.iter_mut().rev() {
            *slot = (idx % self.inputs as u128) as usize;
            idx /= self.inputs as u128;
        }
        self.expand(&free)
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let free: Vec<usize> = (0..self.free_entries()).map(|_| rng.gen_range(0..self.inputs)).collect();
        self.expand(&free)
    }

    /// Changes one free entry to a different symbol.
    fn mutate(&self, table: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut out = table.to_vec();
        if self.inputs < 2 {
            return out;
        }
        let stride = match self.mode {
            Mode::Causal => 1,
            Mode::StrictlyCausal => self.side,
        };
        let k = rng.gen_range(0..self.free_entries());
        let shift = rng.gen_range(1..self.inputs);
        let new = (out[k * stride] + shift) % self.inputs;
        for x in &mut out[k * stride..k * stride + stride] {
            *x = new;
        }
        out
    }
}

/// Unconstrained parameters: per-row logits of every scheme kernel.
#[derive(Debug, Clone, PartialEq)]
struct Params {
    logits: Vec<Vec<f64>>,
    rows: [usize; 9],
    cols: [usize; 9],
}

impl Params {
    fn zeros(rows: [usize; 9], cols: [usize; 9]) -> Self {
        Params { logits: (0..9).map(|k| vec![0.0; rows[k] * cols[k]]).collect(), rows, cols }
    }

    fn random(rows: [usize; 9], cols: [usize; 9], rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(rows, cols);
        for k in 0..9 {
            if cols[k] > 1 {
                p.logits[k].iter_mut().for_each(|x| *x = rng.gen_range(-3.0..3.0));
            }
        }
        p
    }

    fn kernels(&self) -> [Vec<f64>; 9] {
        std::array::from_fn(|k| {
            let cols = self.cols[k];
            let mut out = Vec::with_capacity(self.logits[k].len());
            for row in self.logits[k].chunks(cols) {
                let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = row.iter().map(|x| (x - m).exp()).collect();
                let total: f64 = e.iter().sum();
                out.extend(e.iter().map(|x| x / total));
            }
            out
        })
    }

    /// `(kernel, row)` pairs with more than one column.
    fn movable_rows(&self) -> Vec<(usize, usize)> {
        (0..9).filter(|&k| self.cols[k] > 1).flat_map(|k| (0..self.rows[k]).map(move |r| (k, r))).collect()
    }
}

/// A candidate: kernel parameters plus both encoder tables.
#[derive(Debug, Clone)]
struct Candidate {
    params: Params,
    f1: Vec<usize>,
    f2: Vec<usize>,
}

struct Space<'a> {
    channel: &'a ChannelSpec,
    config: &'a SearchConfig,
    rows: [usize; 9],
    cols: [usize; 9],
    enc1: EncoderSpace,
    enc2: EncoderSpace,
}

impl<'a> Space<'a> {
    fn new(channel: &'a ChannelSpec, config: &'a SearchConfig) -> Self {
        let s = config.cardinalities;
        Space {
            channel,
            config,
            rows: scheme_kernel_rows(channel, s),
            cols: scheme_kernel_cols(s),
            enc1: EncoderSpace { rows: s.u * s.w1 * s.u1, side: channel.s1.size, inputs: channel.x1.size, mode: config.mode },
            enc2: EncoderSpace { rows: s.u * s.w2 * s.u2, side: channel.s2.size, inputs: channel.x2.size, mode: config.mode },
        }
    }

    fn scheme(&self, c: &Candidate) -> SchemeSpec {
        SchemeSpec::from_tables(
            self.channel,
            self.config.cardinalities,
            c.params.kernels(),
            c.f1.clone(),
            c.f2.clone(),
            self.config.mode,
        )
        .expect("search candidates are well formed")
    }

    fn evaluate(&self, c: &Candidate) -> Result<Evaluation, SearchError> {
        evaluate_scheme(self.channel, &self.scheme(c), self.config)
    }

    /// Candidate number `index` of the restart sequence: encoder tables are
    /// enumerated when small, random otherwise.
    fn restart(&self, index: u64, rng: &mut ChaCha8Rng) -> Candidate {
        let params = Params::random(self.rows, self.cols, rng);
        let (n1, n2) = (self.enc1.count(), self.enc2.count());
        let i = index as u128;
        let f1 = if n1 <= ENUMERATION_LIMIT { self.enc1.table_at(i % n1) } else { self.enc1.random(rng) };
        let f2 = if n2 <= ENUMERATION_LIMIT {
            let j = if n1 <= ENUMERATION_LIMIT { i / n1 } else { i };
            self.enc2.table_at(j % n2)
        } else {
            self.enc2.random(rng)
        };
        Candidate { params, f1, f2 }
    }
}

/// Best scheme found by a search.
#[derive(Debug, Clone)]
pub struct BestRate {
    pub rates: RateTriple,
    pub objective: f64,
    pub distortion: f64,
    pub scheme: SchemeSpec,
    pub estimator: Estimator,
    pub digest: String,
    pub evaluations: usize,
}

/// Running record of the best feasible and the lowest-distortion candidate.
struct Tracker {
    best: Option<(Evaluation, Candidate)>,
    closest: Option<(f64, Candidate)>,
    evaluations: usize,
}

impl Tracker {
    fn new() -> Self {
        Tracker { best: None, closest: None, evaluations: 0 }
    }

    fn offer(&mut self, e: Evaluation, c: &Candidate) -> bool {
        self.evaluations += 1;
        if self.closest.as_ref().is_none_or(|(d, _)| e.distortion < *d) {
            self.closest = Some((e.distortion, c.clone()));
        }
        if e.feasible && self.best.as_ref().is_none_or(|(b, _)| e.objective > b.objective) {
            self.best = Some((e, c.clone()));
            return true;
        }
        false
    }
}

/// Searches for the scheme maximizing the weighted rate subject to the
/// distortion cap. Deterministic for a fixed configuration.
pub fn best_rate(channel: &ChannelSpec, config: &SearchConfig) -> Result<BestRate, SearchError> {
    best_rate_from(channel, config, None)
}

/// As [`best_rate`], additionally scoring `warm_start` (which must have the
/// configured cardinalities) before searching.
pub fn best_rate_from(
    channel: &ChannelSpec,
    config: &SearchConfig,
    warm_start: Option<&SchemeSpec>,
) -> Result<BestRate, SearchError> {
    config.check()?;
    let space = Space::new(channel, config);
    let mut tracker = Tracker::new();
    let mut budget = config.budget;
    if let Some(s) = warm_start {
        if s.sizes() != config.cardinalities || s.mode != config.mode {
            return Err(SearchError::InvalidConfig("warm start does not match the configured cardinalities".into()));
        }
        let c = candidate_from_scheme(&space, s);
        tracker.offer(space.evaluate(&c)?, &c);
        budget = budget.saturating_sub(1);
    }
    match config.strategy {
        Strategy::RandomRestart => random_restart(&space, budget, &mut tracker)?,
        Strategy::CoordinateAscent => coordinate_ascent(&space, budget, &mut tracker)?,
        Strategy::ExhaustiveDeterministic => exhaustive(&space, budget, &mut tracker)?,
    }
    finish(channel, &space, tracker)
}

fn candidate_from_scheme(space: &Space, s: &SchemeSpec) -> Candidate {
    let mut params = Params::zeros(space.rows, space.cols);
    for (k, kernel) in s.kernels().iter().enumerate() {
        // Zero-probability entries map to a very negative logit.
        params.logits[k] = kernel.probs().iter().map(|p| if *p > 0.0 { p.ln() } else { -745.0 }).collect();
    }
    Candidate { params, f1: s.f1.clone(), f2: s.f2.clone() }
}

fn finish(channel: &ChannelSpec, space: &Space, tracker: Tracker) -> Result<BestRate, SearchError> {
    let Some((e, c)) = tracker.best else {
        let (best_distortion, scheme) = match tracker.closest {
            Some((d, c)) => (d, Some(Box::new(space.scheme(&c)))),
            None => (f64::INFINITY, None),
        };
        return Err(SearchError::Empty { best_distortion, scheme });
    };
    let scheme = space.scheme(&c);
    let joint = build_joint(channel, &scheme, space.config.joint_cap)?;
    let estimator = optimal_estimator(&joint, channel, &vars::OMEGA_Z)?;
    Ok(BestRate {
        rates: e.rates,
        objective: e.objective,
        distortion: e.distortion,
        digest: scheme_digest(&scheme),
        scheme,
        estimator,
        evaluations: tracker.evaluations,
    })
}

fn random_restart(space: &Space, budget: usize, tracker: &mut Tracker) -> Result<(), SearchError> {
    let seed = space.config.seed;
    let results: Vec<(Evaluation, Candidate)> = (0..budget as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, &[0, r]);
            let c = space.restart(r, &mut rng);
            space.evaluate(&c).map(|e| (e, c))
        })
        .collect::<Result<_, _>>()?;
    for (e, c) in &results {
        tracker.offer(*e, c);
    }
    Ok(())
}

fn exhaustive(space: &Space, budget: usize, tracker: &mut Tracker) -> Result<(), SearchError> {
    let (n1, n2) = (space.enc1.count(), space.enc2.count());
    let total = n1.saturating_mul(n2);
    let mut rng = stream(space.config.seed, &[2]);
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = if total <= budget as u128 {
        (0..total).map(|i| (space.enc1.table_at(i % n1), space.enc2.table_at(i / n1))).collect()
    } else if total <= usize::MAX as u128 {
        let mut picks = sample(&mut rng, total as usize, budget).into_vec();
        picks.sort_unstable();
        picks
            .into_iter()
            .map(|i| (space.enc1.table_at(i as u128 % n1), space.enc2.table_at(i as u128 / n1)))
            .collect()
    } else {
        (0..budget).map(|_| (space.enc1.random(&mut rng), space.enc2.random(&mut rng))).collect()
    };
    let params = Params::zeros(space.rows, space.cols);
    let results: Vec<(Evaluation, Candidate)> = pairs
        .into_par_iter()
        .map(|(f1, f2)| {
            let c = Candidate { params: params.clone(), f1, f2 };
            space.evaluate(&c).map(|e| (e, c))
        })
        .collect::<Result<_, _>>()?;
    for (e, c) in &results {
        tracker.offer(*e, c);
    }
    Ok(())
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const LINE_STEPS: usize = 10;
const LINE_RANGE: f64 = 4.0;

fn score(e: &Evaluation) -> f64 {
    if e.feasible {
        e.objective
    } else {
        f64::NEG_INFINITY
    }
}

fn coordinate_ascent(space: &Space, budget: usize, tracker: &mut Tracker) -> Result<(), SearchError> {
    let mut rng = stream(space.config.seed, &[1]);
    let mut used = 0usize;

    // Feasible start from random samples; a warm start already in the
    // tracker counts as one.
    let probes = (budget / 4).max(1);
    let mut current: Option<(f64, Candidate)> = tracker.best.as_ref().map(|(e, c)| (e.objective, c.clone()));
    for r in 0..probes {
        if used >= budget {
            break;
        }
        let c = space.restart(r as u64, &mut rng);
        let e = space.evaluate(&c)?;
        used += 1;
        tracker.offer(e, &c);
        if score(&e) > current.as_ref().map_or(f64::NEG_INFINITY, |(v, _)| *v) {
            current = Some((score(&e), c));
        }
    }
    let Some((mut value, mut cand)) = current else { return Ok(()) };

    let rows = cand.params.movable_rows();
    'outer: while used < budget {
        let before = value;
        for &(k, r) in &rows {
            let cols = cand.params.cols[k];
            let dir: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let base = cand.params.logits[k][r * cols..(r + 1) * cols].to_vec();
            let probe = |t: f64, used: &mut usize, tracker: &mut Tracker| -> Result<Option<(f64, Candidate)>, SearchError> {
                if *used >= budget {
                    return Ok(None);
                }
                let mut c = cand.clone();
                for (j, x) in c.params.logits[k][r * cols..(r + 1) * cols].iter_mut().enumerate() {
                    *x = base[j] + t * dir[j];
                }
                let e = space.evaluate(&c)?;
                *used += 1;
                tracker.offer(e, &c);
                Ok(Some((score(&e), c)))
            };
            // Golden-section search on t in [-LINE_RANGE, LINE_RANGE].
            let (mut lo, mut hi) = (-LINE_RANGE, LINE_RANGE);
            let mut best_line: Option<(f64, Candidate)> = None;
            let mut x1 = hi - GOLDEN * (hi - lo);
            let mut x2 = lo + GOLDEN * (hi - lo);
            let Some(mut f1) = probe(x1, &mut used, tracker)? else { break 'outer };
            let Some(mut f2) = probe(x2, &mut used, tracker)? else { break 'outer };
            for _ in 0..LINE_STEPS {
                for cand_line in [&f1, &f2] {
                    if best_line.as_ref().is_none_or(|(v, _)| cand_line.0 > *v) {
                        best_line = Some(cand_line.clone());
                    }
                }
                if f1.0 >= f2.0 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1.clone();
                    x1 = hi - GOLDEN * (hi - lo);
                    let Some(v) = probe(x1, &mut used, tracker)? else { break };
                    f1 = v;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2.clone();
                    x2 = lo + GOLDEN * (hi - lo);
                    let Some(v) = probe(x2, &mut used, tracker)? else { break };
                    f2 = v;
                }
            }
            for cand_line in [f1, f2] {
                if best_line.as_ref().is_none_or(|(v, _)| cand_line.0 > *v) {
                    best_line = Some(cand_line);
                }
            }
            if let Some((v, c)) = best_line {
                if v > value + 1e-12 {
                    value = v;
                    cand = c;
                }
            }
            if used >= budget {
                break 'outer;
            }
        }
        // Encoder phase: enumerate small tables, mutate large ones.
        for which in 0..2 {
            let enc = if which == 0 { space.enc1 } else { space.enc2 };
            let tables: Vec<Vec<usize>> = if enc.count() <= ENUMERATION_LIMIT {
                (0..enc.count()).map(|i| enc.table_at(i)).collect()
            } else {
                let current = if which == 0 { &cand.f1 } else { &cand.f2 };
                (0..4).map(|_| enc.mutate(current, &mut rng)).collect()
            };
            for t in tables {
                if used >= budget {
                    break 'outer;
                }
                let mut c = cand.clone();
                if which == 0 {
                    c.f1 = t;
                } else {
                    c.f2 = t;
                }
                let e = space.evaluate(&c)?;
                used += 1;
                tracker.offer(e, &c);
                if score(&e) > value + 1e-12 {
                    value = score(&e);
                    cand = c;
                }
            }
        }
        if value <= before + 1e-12 && rows.is_empty() {
            break;
        }
    }
    Ok(())
}

/// Re-expresses `scheme` at larger cardinalities: new symbols get zero
/// probability, new encoder arguments reuse symbol 0's outputs. Every
/// information quantity of the system is unchanged.
pub fn embed_scheme(channel: &ChannelSpec, scheme: &SchemeSpec, sizes: SchemeSizes) -> Option<SchemeSpec> {
    let old = scheme.sizes();
    let o = [old.u, old.w1, old.w2, old.u1, old.u2, old.t1, old.t2, old.v1, old.v2];
    let n = [sizes.u, sizes.w1, sizes.w2, sizes.u1, sizes.u2, sizes.t1, sizes.t2, sizes.v1, sizes.v2];
    if o.iter().zip(&n).any(|(a, b)| b < a) {
        return None;
    }
    // Given-variable lists of every kernel as indices into the auxiliary
    // list, or None for channel variables (whose size is unchanged).
    let (s1, y1, s2, y2) = (channel.s1.size, channel.y1.size, channel.s2.size, channel.y2.size);
    let given: [Vec<(Option<usize>, usize)>; 9] = [
        vec![],
        vec![(Some(0), 0)],
        vec![(Some(0), 0)],
        vec![(Some(0), 0), (Some(1), 0)],
        vec![(Some(0), 0), (Some(2), 0)],
        vec![(None, s1), (None, y1)],
        vec![(None, s2), (None, y2)],
        vec![(None, s1), (Some(0), 0), (Some(1), 0), (Some(2), 0), (Some(3), 0), (None, y1), (Some(5), 0)],
        vec![(None, s2), (Some(0), 0), (Some(1), 0), (Some(2), 0), (Some(4), 0), (None, y2), (Some(6), 0)],
    ];
    let sz = |g: &(Option<usize>, usize), table: &[usize; 9]| g.0.map_or(g.1, |i| table[i]);
    let kernels: [Vec<f64>; 9] = std::array::from_fn(|k| {
        let old_dims: Vec<usize> = given[k].iter().map(|g| sz(g, &o)).collect();
        let new_dims: Vec<usize> = given[k].iter().map(|g| sz(g, &n)).collect();
        let (old_cols, new_cols) = (o[k], n[k]);
        let new_rows: usize = new_dims.iter().product();
        let mut out = Vec::with_capacity(new_rows * new_cols);
        let mut idx = vec![0; new_dims.len()];
        for row in 0..new_rows {
            crate::prob::unflatten(row, &new_dims, &mut idx);
            let src: Vec<usize> = idx.iter().zip(&old_dims).map(|(i, d)| if i < d { *i } else { 0 }).collect();
            let old_row = crate::prob::flatten(&src, &old_dims);
            let probs = &scheme.kernels()[k].probs()[old_row * old_cols..(old_row + 1) * old_cols];
            out.extend_from_slice(probs);
            out.extend(std::iter::repeat_n(0.0, new_cols - old_cols));
        }
        out
    });
    let remap = |table: &[usize], old_dims: [usize; 4], new_dims: [usize; 4]| -> Vec<usize> {
        let total: usize = new_dims.iter().product();
        let mut idx = vec![0; 4];
        (0..total)
            .map(|row| {
                crate::prob::unflatten(row, &new_dims, &mut idx);
                let src: Vec<usize> = idx.iter().zip(&old_dims).map(|(i, d)| if i < d { *i } else { 0 }).collect();
                table[crate::prob::flatten(&src, &old_dims)]
            })
            .collect()
    };
    let f1 = remap(&scheme.f1, [old.u, old.w1, old.u1, s1], [sizes.u, sizes.w1, sizes.u1, s1]);
    let f2 = remap(&scheme.f2, [old.u, old.w2, old.u2, s2], [sizes.u, sizes.w2, sizes.u2, s2]);
    SchemeSpec::from_tables(channel, sizes, kernels, f1, f2, scheme.mode).ok()
}

/// One grid point of a trade-off sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub distortion_cap: f64,
    /// Best objective found at exactly this cap, if any scheme was feasible.
    pub raw_objective: Option<f64>,
    /// Running maximum over all caps up to this one.
    pub objective: Option<f64>,
    /// Upper concave envelope of the raw points (time sharing between the
    /// found schemes), reported separately.
    pub hull_objective: Option<f64>,
    pub rates: Option<RateTriple>,
    pub distortion: Option<f64>,
    /// Digest of the scheme achieving `objective`.
    pub digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
}

/// Runs [`best_rate`] at every cap of `grid` (in parallel, every point with
/// the same seed so that candidates are shared) and post-processes the results into a nondecreasing curve.
pub fn tradeoff(channel: &ChannelSpec, config: &SearchConfig, grid: &[f64]) -> Result<TradeoffCurve, SearchError> {
    config.check()?;
    let mut caps: Vec<f64> = grid.to_vec();
    if caps.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(SearchError::InvalidConfig("distortion grid must be nonnegative".into()));
    }
    caps.sort_by(f64::total_cmp);
    caps.dedup();
    let results: Vec<Result<BestRate, SearchError>> = caps
        .par_iter()
        .map(|&d| {
            let cfg = SearchConfig { distortion_cap: d, ..config.clone() };
            best_rate(channel, &cfg)
        })
        .collect();

    let mut raw: Vec<Option<BestRate>> = Vec::with_capacity(results.len());
    let mut closest = f64::INFINITY;
    for r in results {
        match r {
            Ok(b) => raw.push(Some(b)),
            Err(SearchError::Empty { best_distortion, .. }) => {
                closest = closest.min(best_distortion);
                raw.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    if raw.iter().all(Option::is_none) {
        return Err(SearchError::Empty { best_distortion: closest, scheme: None });
    }

    let feasible: Vec<(f64, f64)> =
        caps.iter().zip(&raw).filter_map(|(d, r)| r.as_ref().map(|b| (*d, b.objective))).collect();
    let hull_at = |d: f64| -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, &(da, va)) in feasible.iter().enumerate() {
            if da > d {
                continue;
            }
            best = Some(best.map_or(va, |b: f64| b.max(va)));
            for &(db, vb) in &feasible[i + 1..] {
                if db >= d && db > da {
                    let t = (d - da) / (db - da);
                    let v = va + t * (vb - va);
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    };

    let mut points = Vec::with_capacity(caps.len());
    let mut running: Option<&BestRate> = None;
    for (d, r) in caps.iter().zip(&raw) {
        if let Some(b) = r {
            if running.is_none_or(|best| b.objective > best.objective) {
                running = Some(b);
            }
        }
        points.push(TradeoffPoint {
            distortion_cap: *d,
            raw_objective: r.as_ref().map(|b| b.objective),
            objective: running.map(|b| b.objective),
            hull_objective: hull_at(*d),
            rates: running.map(|b| b.rates),
            distortion: running.map(|b| b.distortion),
            digest: running.map(|b| b.digest.clone()),
        });
    }
    Ok(TradeoffCurve { points })
}
