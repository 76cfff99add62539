//! Codebook sizes and keyed, lazily generated random codewords.
//!
//! Every codeword is drawn from its own RNG stream keyed by the trial seed
//! and the codeword's full index tuple, so a codebook never has to be held in
//! memory and any codeword can be regenerated on demand.

use rand::Rng;

use crate::prob::{JointDistribution, ProbError};
use crate::seeding::stream;

/// Number of indices `ceil(2^(n * rate))`, saturating. The `1e-9` guard
/// keeps exact powers of two from rounding up.
pub fn index_count(n: f64, rate: f64) -> u128 {
    let e = n * rate;
    if e >= 127.0 {
        return u128::MAX;
    }
    (e.exp2() - 1e-9).ceil().max(1.0) as u128
}

/// Sampler for `P(children | parents)` taken from a joint law; children are
/// drawn as one combined symbol (row-major over the child variables).
#[derive(Debug, Clone)]
pub struct CondSampler {
    parent_sizes: Vec<usize>,
    child_sizes: Vec<usize>,
    width: usize,
    cdf: Vec<f64>,
}

impl CondSampler {
    pub fn from_joint(joint: &JointDistribution, parents: &[&str], children: &[&str]) -> Result<Self, ProbError> {
        let names: Vec<&str> = parents.iter().chain(children).copied().collect();
        let law = joint.marginalize(&names)?;
        let sizes = law.sizes();
        let (parent_sizes, child_sizes) = sizes.split_at(parents.len());
        let width: usize = child_sizes.iter().product();
        let mut cdf = Vec::with_capacity(law.len());
        for row in law.probs().chunks(width) {
            let total: f64 = row.iter().sum();
            let mut acc = 0.0;
            for p in row {
                // Rows of zero mass never occur for honestly generated
                // parents; fall back to uniform to stay total.
                acc += if total > 0.0 { p / total } else { 1.0 / width as f64 };
                cdf.push(acc);
            }
        }
        Ok(CondSampler { parent_sizes: parent_sizes.to_vec(), child_sizes: child_sizes.to_vec(), width, cdf })
    }

    fn draw(&self, row: usize, u: f64) -> usize {
        let cdf = &self.cdf[row * self.width..(row + 1) * self.width];
        cdf.iter().position(|&c| u < c).unwrap_or(self.width - 1)
    }

    /// Draws a length-`n` sequence symbol by symbol given the parent
    /// sequences.
    pub fn sequence<R: Rng>(&self, rng: &mut R, parents: &[&[usize]], n: usize) -> Vec<usize> {
        (0..n)
            .map(|i| {
                let mut row = 0;
                for (p, size) in parents.iter().zip(&self.parent_sizes) {
                    row = row * size + p[i];
                }
                self.draw(row, rng.gen::<f64>())
            })
            .collect()
    }

    /// Splits a combined child sequence into one sequence per child variable.
    pub fn split(&self, combined: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(combined.len()); self.child_sizes.len()];
        for &c in combined {
            let mut rest = c;
            for (k, size) in self.child_sizes.iter().enumerate().rev() {
                out[k].push(rest % size);
                rest /= size;
            }
        }
        out
    }

    /// Draws the codeword keyed by `key` under `seed`.
    pub fn codeword(&self, seed: u64, key: &[u64], parents: &[&[usize]], n: usize) -> Vec<usize> {
        self.sequence(&mut stream(seed, key), parents, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;
    use crate::seeding::stream;

    #[test]
    fn index_counts_round_up() {
        assert_eq!(index_count(8.0, 0.0), 1);
        assert_eq!(index_count(8.0, 0.5), 16);
        assert_eq!(index_count(8.0, 0.8), 85);
        assert_eq!(index_count(3.0, 1.0 / 3.0), 2);
        assert_eq!(index_count(1000.0, 1.0), u128::MAX);
    }

    #[test]
    fn conditional_draws_follow_the_kernel() {
        // A uniform, B = A with prob 0.8.
        let joint = JointDistribution::new(
            vec![Alphabet::new("A", 2), Alphabet::new("B", 2)],
            vec![0.4, 0.1, 0.1, 0.4],
        )
        .unwrap();
        let s = CondSampler::from_joint(&joint, &["A"], &["B"]).unwrap();
        let parent: Vec<usize> = (0..20_000).map(|i| i % 2).collect();
        let child = s.sequence(&mut stream(1, &[]), &[&parent], parent.len());
        let agree = parent.iter().zip(&child).filter(|(a, b)| a == b).count() as f64 / parent.len() as f64;
        assert!((agree - 0.8).abs() < 0.02, "{agree}");
        assert_eq!(s.codeword(5, &[1, 2], &[&parent], 50), s.codeword(5, &[1, 2], &[&parent], 50));
    }

    #[test]
    fn combined_children_split_back() {
        let joint = JointDistribution::uniform(vec![Alphabet::new("A", 2), Alphabet::new("B", 3)]).unwrap();
        let s = CondSampler::from_joint(&joint, &[], &["A", "B"]).unwrap();
        let parts = s.split(&[0, 4, 5]);
        assert_eq!(parts, vec![vec![0, 1, 1], vec![0, 1, 2]]);
    }
}
