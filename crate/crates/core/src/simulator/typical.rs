//! Robust (letter) typicality.

use thiserror::Error;

use crate::prob::JointDistribution;

#[derive(Debug, Error, PartialEq)]
pub enum TypicalityError {
    #[error("expected {expected} sequences, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("sequence {index} has length {len}, expected {expected}")]
    Length { index: usize, len: usize, expected: usize },
    #[error("symbol {symbol} out of range for variable {index} of size {size}")]
    Symbol { index: usize, symbol: usize, size: usize },
}

/// Absolute slack on the typicality comparison, absorbing rounding in
/// `count / n`.
const TYPICALITY_SLACK: f64 = 1e-12;

/// Precomputed robust-typicality test against one law.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    sizes: Vec<usize>,
    probs: Vec<f64>,
    support: usize,
    epsilon: f64,
}

impl TypicalityTest {
    pub fn new(law: &JointDistribution, epsilon: f64) -> Self {
        let probs = law.probs().to_vec();
        TypicalityTest { sizes: law.sizes(), support: probs.iter().filter(|p| **p > 0.0).count(), probs, epsilon }
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    /// True iff the empirical joint type `pi` of `seqs` satisfies
    /// `|pi(a) - P(a)| <= epsilon * P(a)` on every atom. Atoms with
    /// `P(a) = 0` must therefore be absent and every atom with `P(a) > 0`
    /// must occur.
    pub fn check(&self, seqs: &[&[usize]]) -> Result<bool, TypicalityError> {
        if seqs.len() != self.sizes.len() {
            return Err(TypicalityError::Arity { expected: self.sizes.len(), got: seqs.len() });
        }
        let n = seqs.first().map_or(0, |s| s.len());
        for (index, s) in seqs.iter().enumerate() {
            if s.len() != n {
                return Err(TypicalityError::Length { index, len: s.len(), expected: n });
            }
            if let Some(&symbol) = s.iter().find(|&&x| x >= self.sizes[index]) {
                return Err(TypicalityError::Symbol { index, symbol, size: self.sizes[index] });
            }
        }
        Ok(self.holds(seqs, &mut Vec::with_capacity(n)))
    }

    /// [`check`](Self::check) without argument validation; `scratch` is
    /// reused between calls.
    pub(crate) fn holds(&self, seqs: &[&[usize]], scratch: &mut Vec<usize>) -> bool {
        let n = seqs.first().map_or(0, |s| s.len());
        if n < self.support {
            return false;
        }
        scratch.clear();
        for i in 0..n {
            let mut flat = 0;
            for (s, size) in seqs.iter().zip(&self.sizes) {
                flat = flat * size + s[i];
            }
            if self.probs[flat] <= 0.0 {
                return false;
            }
            scratch.push(flat);
        }
        scratch.sort_unstable();
        let mut distinct = 0;
        let mut start = 0;
        while start < n {
            let atom = scratch[start];
            let mut end = start + 1;
            while end < n && scratch[end] == atom {
                end += 1;
            }
            let p = self.probs[atom];
            let pi = (end - start) as f64 / n as f64;
            if (pi - p).abs() > self.epsilon * p + TYPICALITY_SLACK {
                return false;
            }
            distinct += 1;
            start = end;
        }
        distinct == self.support
    }
}

/// One-shot robust typicality test of `seqs` (one sequence per variable of
/// `law`, in order).
pub fn typical(seqs: &[&[usize]], law: &JointDistribution, epsilon: f64) -> Result<bool, TypicalityError> {
    TypicalityTest::new(law, epsilon).check(seqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;
    use crate::seeding::stream;
    use rand::Rng;

    fn bern(p: f64) -> JointDistribution {
        JointDistribution::new(vec![Alphabet::new("A", 2)], vec![1.0 - p, p]).unwrap()
    }

    #[test]
    fn point_mass_mode_is_typical() {
        let law = JointDistribution::point_mass(vec![Alphabet::new("A", 3), Alphabet::new("B", 2)], &[2, 1]).unwrap();
        assert!(typical(&[&[2; 7], &[1; 7]], &law, 0.1).unwrap());
    }

    #[test]
    fn zero_probability_atom_is_atypical() {
        let law = JointDistribution::new(vec![Alphabet::new("A", 3)], vec![0.5, 0.5, 0.0]).unwrap();
        assert!(typical(&[&[0, 1, 0, 1]], &law, 0.5).unwrap());
        assert!(!typical(&[&[0, 1, 0, 2]], &law, 0.5).unwrap());
    }

    #[test]
    fn missing_atom_and_skewed_type_are_atypical() {
        let law = bern(0.5);
        assert!(!typical(&[&[0; 6]], &law, 0.9).unwrap());
        assert!(!typical(&[&[0, 0, 0, 0, 0, 1]], &law, 0.5).unwrap());
        assert!(typical(&[&[0, 0, 0, 0, 1, 1]], &law, 0.5).unwrap());
    }

    #[test]
    fn argument_errors() {
        let law = bern(0.5);
        assert_eq!(typical(&[&[0], &[1]], &law, 0.1), Err(TypicalityError::Arity { expected: 1, got: 2 }));
        let two = JointDistribution::uniform(vec![Alphabet::new("A", 2), Alphabet::new("B", 2)]).unwrap();
        assert_eq!(
            typical(&[&[0, 1], &[1]], &two, 0.1),
            Err(TypicalityError::Length { index: 1, len: 1, expected: 2 })
        );
        assert!(matches!(typical(&[&[0, 5]], &law, 0.1), Err(TypicalityError::Symbol { .. })));
    }

    #[test]
    fn long_iid_sequences_are_typical() {
        // Chernoff: P(atypical) <= 2 exp(-n p eps^2 / 3) summed over atoms,
        // far below 1e-2 at n = 1e4.
        let law = bern(0.3);
        let test = TypicalityTest::new(&law, 0.1);
        let mut hits = 0;
        for trial in 0..1000u64 {
            let mut rng = stream(99, &[trial]);
            let seq: Vec<usize> = (0..10_000).map(|_| usize::from(rng.gen::<f64>() < 0.3)).collect();
            hits += usize::from(test.check(&[&seq]).unwrap());
        }
        assert!(hits as f64 / 1000.0 > 0.99, "{hits}");
    }
}
