//! Achievable rate-distortion regions for joint communication and state
//! sensing over a two-user multiple-access channel with generalized
//! feedback, plus a Monte-Carlo simulator of the underlying block-Markov
//! coding scheme.

#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod config;
pub mod estimation;
pub mod prob;
pub mod region;
pub mod search;
pub mod seeding;
pub mod simulator;
pub mod toys;

pub use channel::{build_joint, validate, ChannelSpec, Mode, SchemeSpec, SystemJoint};
pub use prob::{Alphabet, ConditionalKernel, JointDistribution};
