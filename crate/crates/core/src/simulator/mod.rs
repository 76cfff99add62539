//! Monte-Carlo simulation of the block-Markov coding scheme: `B` payload
//! blocks, one terminating block and three short blocks that deliver the
//! final state-description indices, decoded backward and then forward, with
//! per-symbol state estimation at the receiver.

mod codebook;
mod engine;
mod feasibility;
mod typical;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelSpec, SchemeSpec};
use crate::prob::ProbError;

pub use codebook::index_count;
pub use engine::{Simulator, Trace};
pub use feasibility::{rate_feasibility_report, Direction, FeasibilityReport, Guard, RateConstraint};
pub use typical::{typical, TypicalityError, TypicalityTest};

/// Default cap on every codebook and exhaustive search space.
pub const DEFAULT_CODEBOOK_CAP: u128 = 1 << 20;

/// Rates of every index of the scheme, in bits per channel use.
///
/// `*_coop` is the part of a private message decoded by the other encoder
/// over feedback; `desc*` and `refine*` index the first and second state
/// descriptions, and the `_bin` parts are recovered at the receiver from its
/// own observations instead of being sent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimRates {
    pub common: f64,
    pub coop1: f64,
    pub private1: f64,
    pub coop2: f64,
    pub private2: f64,
    pub desc1: f64,
    pub desc1_bin: f64,
    pub desc2: f64,
    pub desc2_bin: f64,
    pub refine1: f64,
    pub refine1_bin: f64,
    pub refine2: f64,
    pub refine2_bin: f64,
}

impl SimRates {
    pub const NAMES: [&'static str; 13] = [
        "common",
        "coop1",
        "private1",
        "coop2",
        "private2",
        "desc1",
        "desc1_bin",
        "desc2",
        "desc2_bin",
        "refine1",
        "refine1_bin",
        "refine2",
        "refine2_bin",
    ];

    pub fn as_array(&self) -> [f64; 13] {
        [
            self.common,
            self.coop1,
            self.private1,
            self.coop2,
            self.private2,
            self.desc1,
            self.desc1_bin,
            self.desc2,
            self.desc2_bin,
            self.refine1,
            self.refine1_bin,
            self.refine2,
            self.refine2_bin,
        ]
    }
}

fn default_blocks() -> usize {
    1
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.1
}
fn default_trials() -> usize {
    100
}
fn default_n() -> usize {
    8
}
fn default_codebook_cap() -> u128 {
    DEFAULT_CODEBOOK_CAP
}

/// Numeric simulation settings; the JSON form of a simulation config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    #[serde(default)]
    pub rates: SimRates,
    /// Payload block length.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Number of payload blocks `B`.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    /// Typicality slack.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Compression slack of the last block.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Per-symbol information margins of the two short description blocks;
    /// `None` selects a tenth of the corresponding information.
    #[serde(default)]
    pub alpha1: Option<f64>,
    #[serde(default)]
    pub alpha2: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_codebook_cap")]
    pub codebook_cap: u128,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            rates: SimRates::default(),
            n: default_n(),
            blocks: default_blocks(),
            epsilon: default_epsilon(),
            delta: default_delta(),
            alpha1: None,
            alpha2: None,
            trials: default_trials(),
            seed: 0,
            codebook_cap: default_codebook_cap(),
        }
    }
}

impl SimParams {
    pub fn check(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        for (name, r) in SimRates::NAMES.iter().zip(self.rates.as_array()) {
            if !(r.is_finite() && r >= 0.0) {
                return bad(format!("rate {name} must be a nonnegative number"));
            }
        }
        if self.n == 0 || self.blocks == 0 || self.trials == 0 {
            return bad("n, blocks and trials must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)".into());
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta must be positive".into());
        }
        for a in [self.alpha1, self.alpha2].into_iter().flatten() {
            if !(a.is_finite() && a > 0.0) {
                return bad("alpha1 and alpha2 must be positive".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    pub scheme: SchemeSpec,
    pub params: SimParams,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),
    #[error("{what} needs {size} entries, above the cap of {cap}")]
    Capacity { what: String, size: u128, cap: u128 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Stage at which a trial first went wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// An encoder decoded the other encoder's cooperative index wrongly.
    Feedback,
    /// No description codeword (or compression index) covered the
    /// observations.
    Covering,
    /// A short-block or backward decoding step was wrong or ambiguous.
    Backward,
    /// A forward (second-description) decoding step was wrong or ambiguous.
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Taxonomy {
    pub feedback: usize,
    pub covering: usize,
    pub backward: usize,
    pub forward: usize,
}

impl Taxonomy {
    fn add(&mut self, kind: FailureKind) {
        match kind {
            FailureKind::Feedback => self.feedback += 1,
            FailureKind::Covering => self.covering += 1,
            FailureKind::Backward => self.backward += 1,
            FailureKind::Forward => self.forward += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.feedback + self.covering + self.backward + self.forward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    /// Some message index of some payload block was decoded wrongly.
    pub message_error: bool,
    /// Mean distortion over the `B * n` state symbols of blocks `1..=B`.
    pub distortion: f64,
    /// Highest-priority failure event of the trial, if any.
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub n: usize,
    pub blocks: usize,
    pub trials: usize,
    /// Lengths of the three short blocks.
    pub short_blocks: [usize; 3],
    pub alpha1: f64,
    pub alpha2: f64,
    pub message_errors: usize,
    pub error_rate: f64,
    /// Wilson 95% interval for the error rate.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_distortion: f64,
    /// Standard error of the mean distortion across trials.
    pub stderr: f64,
    pub failed_trials: usize,
    pub taxonomy: Taxonomy,
    pub outcomes: Vec<TrialOutcome>,
}

const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n, z) = (k as f64, n as f64, WILSON_Z);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl SimReport {
    fn aggregate(sim: &Simulator, outcomes: Vec<TrialOutcome>) -> Self {
        let trials = outcomes.len();
        let message_errors = outcomes.iter().filter(|o| o.message_error).count();
        let mut taxonomy = Taxonomy::default();
        for kind in outcomes.iter().filter_map(|o| o.failure) {
            taxonomy.add(kind);
        }
        let mean = outcomes.iter().map(|o| o.distortion).sum::<f64>() / trials as f64;
        let stderr = if trials > 1 {
            let var = outcomes.iter().map(|o| (o.distortion - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            (var / trials as f64).sqrt()
        } else {
            0.0
        };
        let (ci_low, ci_high) = wilson_interval(message_errors, trials);
        SimReport {
            n: sim.params().n,
            blocks: sim.params().blocks,
            trials,
            short_blocks: sim.short_blocks(),
            alpha1: sim.alphas()[0],
            alpha2: sim.alphas()[1],
            message_errors,
            error_rate: message_errors as f64 / trials as f64,
            ci_low,
            ci_high,
            mean_distortion: mean,
            stderr,
            failed_trials: taxonomy.total(),
            taxonomy,
            outcomes,
        }
    }

    /// Header of [`csv_row`](Self::csv_row).
    pub const CSV_HEADER: &'static str = "n,trials,error_rate,ci_low,ci_high,mean_distortion,stderr";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.trials, self.error_rate, self.ci_low, self.ci_high, self.mean_distortion, self.stderr
        )
    }
}

/// Runs every trial of `config`. Capacity problems are reported before any
/// trial runs.
pub fn run(config: &SimConfig) -> Result<SimReport, SimError> {
    let sim = Simulator::new(config)?;
    Ok(sim.run())
}

/// Runs `config` once per block length in `lengths`.
pub fn sweep(config: &SimConfig, lengths: &[usize]) -> Result<Vec<SimReport>, SimError> {
    let sims = lengths
        .iter()
        .map(|&n| {
            let params = SimParams { n, ..config.params.clone() };
            Simulator::new(&SimConfig { params, ..config.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sims.iter().map(Simulator::run).collect())
}

#[cfg(test)]
mod tests;
