//! Bayes-optimal symbol-wise state estimation.

use serde::Serialize;

use crate::channel::{vars, ChannelSpec};
use crate::prob::{JointDistribution, ProbError};

/// A deterministic estimator `S_hat = table[w]` over the row-major product
/// space of `conditioning`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimator {
    conditioning: Vec<String>,
    table: Vec<usize>,
    expected_distortion: f64,
}

impl Estimator {
    pub fn conditioning(&self) -> &[String] {
        &self.conditioning
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn expected_distortion(&self) -> f64 {
        self.expected_distortion
    }
}

/// Lowest-index minimizer of `sum_s weights[s] * d(s, s_hat)`, with its value.
fn best_symbol(channel: &ChannelSpec, weights: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for s_hat in 0..channel.s_hat.size {
        let cost: f64 = weights.iter().enumerate().map(|(s, w)| w * channel.distortion.get(s, s_hat)).sum();
        if cost < best.1 {
            best = (s_hat, cost);
        }
    }
    best
}

/// Computes the optimal estimator of `S` from `conditioning`.
pub fn optimal_estimator<S: AsRef<str>>(
    joint: &JointDistribution,
    channel: &ChannelSpec,
    conditioning: &[S],
) -> Result<Estimator, ProbError> {
    let names: Vec<&str> = conditioning.iter().map(|s| s.as_ref()).collect();
    if let Some(bad) = names.iter().find(|n| **n == vars::S || **n == vars::S_HAT) {
        return Err(ProbError::Overlap((*bad).to_string()));
    }
    let mut keep = names.clone();
    keep.push(vars::S);
    let m = joint.marginalize(&keep)?;
    let states = channel.s.size;
    let cells = m.len() / states;

    let prior: Vec<f64> = (0..states).map(|s| (0..cells).map(|w| m.probs()[w * states + s]).sum()).collect();
    let fallback = best_symbol(channel, &prior).0;

    let mut table = Vec::with_capacity(cells);
    let mut total = 0.0;
    for w in 0..cells {
        let row = &m.probs()[w * states..(w + 1) * states];
        if row.iter().sum::<f64>() > 0.0 {
            let (s_hat, cost) = best_symbol(channel, row);
            table.push(s_hat);
            total += cost;
        } else {
            table.push(fallback);
        }
    }
    Ok(Estimator {
        conditioning: names.iter().map(|s| s.to_string()).collect(),
        table,
        expected_distortion: total,
    })
}

/// Minimal expected distortion when estimating `S` from `conditioning`.
pub fn min_distortion<S: AsRef<str>>(
    joint: &JointDistribution,
    channel: &ChannelSpec,
    conditioning: &[S],
) -> Result<f64, ProbError> {
    Ok(optimal_estimator(joint, channel, conditioning)?.expected_distortion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{distortion_of, DistortionTable};
    use crate::prob::Alphabet;
    use crate::toys;
    use proptest::prelude::*;

    fn hamming_channel(states: usize) -> ChannelSpec {
        let mut c = toys::copy_channel(states);
        c.distortion = DistortionTable::hamming(states);
        c
    }

    fn small(s_probs: &[f64], obs: &[&[f64]]) -> JointDistribution {
        let states = s_probs.len();
        let outs = obs[0].len();
        let vars = vec![Alphabet::new("S", states), Alphabet::new("O", outs)];
        JointDistribution::from_fn(vars, |a| s_probs[a[0]] * obs[a[0]][a[1]]).unwrap()
    }

    /// Exhaustive minimum over every deterministic table.
    fn brute_force(joint: &JointDistribution, channel: &ChannelSpec, cond: &[&str]) -> f64 {
        let m = joint.marginalize(cond).unwrap();
        let cells = m.len();
        let k = channel.s_hat.size;
        let mut best = f64::INFINITY;
        let mut table = vec![0usize; cells];
        loop {
            best = best.min(distortion_of(channel, &table, joint, cond).unwrap());
            let mut i = 0;
            loop {
                if i == cells {
                    return best;
                }
                table[i] += 1;
                if table[i] < k {
                    break;
                }
                table[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn copy_observation_gives_identity() {
        let c = hamming_channel(2);
        let j = small(&[0.4, 0.6], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let e = optimal_estimator(&j, &c, &["O"]).unwrap();
        assert_eq!(e.table(), &[0, 1]);
        assert_eq!(e.expected_distortion(), 0.0);
    }

    #[test]
    fn independent_observation_uses_prior() {
        let c = hamming_channel(2);
        let j = small(&[0.7, 0.3], &[&[0.5, 0.5], &[0.5, 0.5]]);
        let e = optimal_estimator(&j, &c, &["O"]).unwrap();
        assert_eq!(e.table(), &[0, 0]);
        assert!((e.expected_distortion() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn flip_noise_matches_brute_force() {
        let c = hamming_channel(2);
        let j = small(&[0.5, 0.5], &[&[0.9, 0.1], &[0.1, 0.9]]);
        let e = optimal_estimator(&j, &c, &["O"]).unwrap();
        assert_eq!(e.table(), &[0, 1]);
        assert!((e.expected_distortion() - 0.1).abs() < 1e-12);
        assert!((brute_force(&j, &c, &["O"]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn full_state_and_empty_conditioning() {
        let c = hamming_channel(2);
        let j = small(&[0.5, 0.5], &[&[0.9, 0.1], &[0.1, 0.9]]);
        // Conditioning on a copy of S is covered above; here no information.
        let none: [&str; 0] = [];
        assert!((min_distortion(&j, &c, &none).unwrap() - 0.5).abs() < 1e-12);
        let mut copy = toys::copy_channel(3);
        copy.distortion = DistortionTable::new(3, 3, vec![0.0, 2.0, 1.0, 3.0, 0.0, 1.0, 1.0, 5.0, 0.0]).unwrap();
        let j3 = small(&[0.2, 0.3, 0.5], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(min_distortion(&j3, &copy, &["O"]).unwrap(), 0.0);
    }

    #[test]
    fn zero_mass_cells_get_prior_symbol() {
        let c = hamming_channel(2);
        let j = small(&[0.2, 0.8], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let e = optimal_estimator(&j, &c, &["O"]).unwrap();
        assert_eq!(e.table(), &[0, 1, 1]);
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let c = hamming_channel(2);
        let j = small(&[0.5, 0.5], &[&[1.0], &[1.0]]);
        assert_eq!(optimal_estimator(&j, &c, &["O"]).unwrap().table(), &[0]);
    }

    #[test]
    fn conditioning_on_state_is_rejected() {
        let c = hamming_channel(2);
        let j = small(&[0.5, 0.5], &[&[1.0], &[1.0]]);
        assert!(optimal_estimator(&j, &c, &["S"]).is_err());
    }

    #[test]
    fn monostatic_toy_matches_brute_force() {
        let channel = toys::monostatic_xor(0.5, 0.1);
        let scheme = toys::monostatic_scheme(&channel, &[0.5, 0.5], &[0.3, 0.7], crate::channel::Mode::Causal);
        let j = crate::channel::build_joint(&channel, &scheme, 1 << 20).unwrap();
        let cond = ["X1", "X2", "Y"];
        let got = min_distortion(&j, &channel, &cond).unwrap();
        let want = brute_force(&j, &channel, &cond);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    fn random_system(seed: u64) -> (ChannelSpec, JointDistribution) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let states = rng.gen_range(2..=3);
        let estimates = rng.gen_range(2..=3);
        let mut c = toys::copy_channel(states);
        c.s_hat = Alphabet::new(vars::S_HAT, estimates);
        c.distortion = DistortionTable::new(
            states,
            estimates,
            (0..states * estimates).map(|_| rng.gen_range(0.0..2.0)).collect(),
        )
        .unwrap();
        let vars = vec![
            Alphabet::new("S", states),
            Alphabet::new("A", 2),
            Alphabet::new("B", 2),
            Alphabet::new("C", rng.gen_range(1..=2)),
        ];
        let raw: Vec<f64> = (0..vars.iter().map(|a| a.size).product::<usize>()).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let j = JointDistribution::new(vars, raw.iter().map(|p| p / total).collect()).unwrap();
        (c, j)
    }

    #[test]
    fn optimal_over_randomized_systems() {
        for seed in 0..50 {
            let (c, j) = random_system(seed);
            for cond in [&["A"][..], &["A", "B"][..], &["B", "C"][..]] {
                let got = min_distortion(&j, &c, cond).unwrap();
                let e = optimal_estimator(&j, &c, cond).unwrap();
                let direct = distortion_of(&c, e.table(), &j, cond).unwrap();
                assert!((direct - got).abs() < 1e-12);
                assert!(got <= brute_force(&j, &c, cond) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn more_conditioning_never_hurts(seed in any::<u64>()) {
            let (c, j) = random_system(seed);
            let a = min_distortion(&j, &c, &["A"]).unwrap();
            let ab = min_distortion(&j, &c, &["A", "B"]).unwrap();
            let abc = min_distortion(&j, &c, &["A", "B", "C"]).unwrap();
            prop_assert!(ab <= a + 1e-12);
            prop_assert!(abc <= ab + 1e-12);
        }

        #[test]
        fn extra_variables_behind_a_markov_chain_do_not_help(seed in any::<u64>(), flip in 0.0f64..1.0) {
            // S - A - E: E is a noisy function of A alone.
            let (c, j) = random_system(seed);
            let sa = j.marginalize(&["S", "A"]).unwrap();
            let vars = vec![Alphabet::new("S", c.s.size), Alphabet::new("A", 2), Alphabet::new("E", 2)];
            let ext = JointDistribution::from_fn(vars, |x| {
                let pe = if x[2] == x[1] { 1.0 - flip } else { flip };
                sa.prob(&[x[0], x[1]]) * pe
            })
            .unwrap();
            let a = min_distortion(&ext, &c, &["A"]).unwrap();
            let ae = min_distortion(&ext, &c, &["A", "E"]).unwrap();
            prop_assert!((a - ae).abs() < 1e-9);
        }
    }
}
