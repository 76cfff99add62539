//! Exact finite-alphabet probability engine.
//!
//! A [`JointDistribution`] is a dense row-major tensor over an ordered list of
//! named finite alphabets. Every information measure in the crate is computed
//! from exact marginals of such a tensor. Logarithms are base 2.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total mass of a distribution and on kernel rows.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Negative mutual information above `-MI_CLAMP_TOL` is reported as zero.
pub const MI_CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),
    #[error("alphabet `{0}` has size zero")]
    EmptyAlphabet(String),
    #[error("alphabet `{name}` declares {labels} labels for {size} symbols")]
    LabelCount { name: String, size: usize, labels: usize },
    #[error("expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("entry {index} is negative or not finite ({value})")]
    InvalidEntry { index: usize, value: f64 },
    #[error("entries sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("conditioning event has zero probability")]
    ZeroMass,
    #[error("variable sets overlap on `{0}`")]
    Overlap(String),
    #[error("symbol {symbol} out of range for `{name}` (size {size})")]
    SymbolOutOfRange { name: String, symbol: usize, size: usize },
}

/// A named finite support `{0, .., size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub name: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Alphabet { name: name.into(), size, labels: None }
    }

    pub fn with_labels(name: impl Into<String>, labels: Vec<String>) -> Self {
        Alphabet { name: name.into(), size: labels.len(), labels: Some(labels) }
    }

    pub fn check(&self) -> Result<(), ProbError> {
        if self.size == 0 {
            return Err(ProbError::EmptyAlphabet(self.name.clone()));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.size {
                return Err(ProbError::LabelCount {
                    name: self.name.clone(),
                    size: self.size,
                    labels: labels.len(),
                });
            }
        }
        Ok(())
    }
}

fn check_variables(vars: &[Alphabet]) -> Result<(), ProbError> {
    let mut seen = HashSet::new();
    for v in vars {
        v.check()?;
        if !seen.insert(v.name.as_str()) {
            return Err(ProbError::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

fn product_size(vars: &[Alphabet]) -> usize {
    vars.iter().map(|v| v.size).product()
}

/// Row-major strides for the given extents.
pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * sizes[i + 1];
    }
    out
}

/// Decodes a row-major flat index into `out`.
pub(crate) fn unflatten(mut flat: usize, sizes: &[usize], out: &mut [usize]) {
    for i in (0..sizes.len()).rev() {
        out[i] = flat % sizes[i];
        flat /= sizes[i];
    }
}

pub(crate) fn flatten(assignment: &[usize], sizes: &[usize]) -> usize {
    assignment.iter().zip(sizes).fold(0, |acc, (&a, &s)| acc * s + a)
}

/// Dense joint law over an ordered set of finite variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    vars: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl JointDistribution {
    /// Builds a joint from a row-major tensor. Entries must be nonnegative and
    /// sum to one within [`NORMALIZATION_TOL`].
    pub fn new(vars: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self, ProbError> {
        check_variables(&vars)?;
        let expected = product_size(&vars);
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, got: probs.len() });
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ProbError::InvalidEntry { index, value });
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized(total));
        }
        Ok(JointDistribution { vars, probs })
    }

    /// Builds a joint whose entries are known to be a valid law up to
    /// floating-point drift; the tensor is rescaled to unit mass.
    pub(crate) fn from_product(vars: Vec<Alphabet>, mut probs: Vec<f64>) -> Result<Self, ProbError> {
        check_variables(&vars)?;
        let expected = product_size(&vars);
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, got: probs.len() });
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 || total.is_nan() || (total - 1.0).abs() > 1e-6 {
            return Err(ProbError::NotNormalized(total));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(JointDistribution { vars, probs })
    }

    /// Builds a joint by evaluating `f` on every assignment in row-major order.
    pub fn from_fn(
        vars: Vec<Alphabet>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self, ProbError> {
        check_variables(&vars)?;
        let sizes: Vec<usize> = vars.iter().map(|v| v.size).collect();
        let len = product_size(&vars);
        let mut assignment = vec![0; sizes.len()];
        let mut probs = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, &sizes, &mut assignment);
            probs.push(f(&assignment));
        }
        Self::new(vars, probs)
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Result<Self, ProbError> {
        check_variables(&vars)?;
        let len = product_size(&vars);
        Self::new(vars, vec![1.0 / len as f64; len])
    }

    pub fn point_mass(vars: Vec<Alphabet>, assignment: &[usize]) -> Result<Self, ProbError> {
        check_variables(&vars)?;
        if assignment.len() != vars.len() {
            return Err(ProbError::ShapeMismatch { expected: vars.len(), got: assignment.len() });
        }
        for (v, &a) in vars.iter().zip(assignment) {
            if a >= v.size {
                return Err(ProbError::SymbolOutOfRange {
                    name: v.name.clone(),
                    symbol: a,
                    size: v.size,
                });
            }
        }
        let sizes: Vec<usize> = vars.iter().map(|v| v.size).collect();
        let mut probs = vec![0.0; product_size(&vars)];
        probs[flatten(assignment, &sizes)] = 1.0;
        Self::new(vars, probs)
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.size).collect()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn axis(&self, name: &str) -> Result<usize, ProbError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet, ProbError> {
        Ok(&self.vars[self.axis(name)?])
    }

    /// Probability of a full assignment (one symbol per variable, in order).
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.probs[flatten(assignment, &self.sizes())]
    }

    /// Sums out every variable not in `keep`. The result lists variables in
    /// the order given by `keep`.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<JointDistribution, ProbError> {
        let mut seen = HashSet::new();
        let mut axes = Vec::with_capacity(keep.len());
        for name in keep {
            let name = name.as_ref();
            if !seen.insert(name) {
                return Err(ProbError::DuplicateVariable(name.to_string()));
            }
            axes.push(self.axis(name)?);
        }
        let out_vars: Vec<Alphabet> = axes.iter().map(|&a| self.vars[a].clone()).collect();
        let out_sizes: Vec<usize> = out_vars.iter().map(|v| v.size).collect();
        let out_strides = strides(&out_sizes);

        let sizes = self.sizes();
        let rank = sizes.len();
        let mut ostride = vec![0usize; rank];
        for (k, &a) in axes.iter().enumerate() {
            ostride[a] = out_strides[k];
        }

        let mut out = vec![0.0; out_sizes.iter().product()];
        let mut idx = vec![0usize; rank];
        let mut o = 0usize;
        for &p in &self.probs {
            out[o] += p;
            let mut ax = rank;
            while ax > 0 {
                ax -= 1;
                idx[ax] += 1;
                o += ostride[ax];
                if idx[ax] < sizes[ax] {
                    break;
                }
                o -= ostride[ax] * sizes[ax];
                idx[ax] = 0;
            }
        }
        Ok(JointDistribution { vars: out_vars, probs: out })
    }

    /// Conditions on `on[i].0 = on[i].1` and returns the renormalized law of
    /// the remaining variables (in their original order).
    pub fn condition<S: AsRef<str>>(
        &self,
        on: &[(S, usize)],
    ) -> Result<JointDistribution, ProbError> {
        let sizes = self.sizes();
        let mut fixed: Vec<Option<usize>> = vec![None; sizes.len()];
        for (name, value) in on {
            let name = name.as_ref();
            let a = self.axis(name)?;
            if fixed[a].is_some() {
                return Err(ProbError::DuplicateVariable(name.to_string()));
            }
            if *value >= sizes[a] {
                return Err(ProbError::SymbolOutOfRange {
                    name: name.to_string(),
                    symbol: *value,
                    size: sizes[a],
                });
            }
            fixed[a] = Some(*value);
        }
        let rest: Vec<usize> = (0..sizes.len()).filter(|&a| fixed[a].is_none()).collect();
        let out_vars: Vec<Alphabet> = rest.iter().map(|&a| self.vars[a].clone()).collect();
        let out_sizes: Vec<usize> = out_vars.iter().map(|v| v.size).collect();
        let mut out = vec![0.0; out_sizes.iter().product()];
        let mut full = vec![0usize; sizes.len()];
        let mut sub = vec![0usize; rest.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            unflatten(flat, &out_sizes, &mut sub);
            for (a, f) in fixed.iter().enumerate() {
                if let Some(v) = f {
                    full[a] = *v;
                }
            }
            for (k, &a) in rest.iter().enumerate() {
                full[a] = sub[k];
            }
            *slot = self.probs[flatten(&full, &sizes)];
        }
        let mass: f64 = out.iter().sum();
        if mass <= 0.0 {
            return Err(ProbError::ZeroMass);
        }
        for p in &mut out {
            *p /= mass;
        }
        Ok(JointDistribution { vars: out_vars, probs: out })
    }

    /// Shannon entropy in bits of the marginal on `vars`.
    pub fn entropy<S: AsRef<str>>(&self, vars: &[S]) -> Result<f64, ProbError> {
        Ok(entropy_of(self.marginalize(vars)?.probs()))
    }

    /// Conditional mutual information `I(A;B|C)` in bits.
    pub fn mutual_information<S: AsRef<str>>(
        &self,
        a: &[S],
        b: &[S],
        given: &[S],
    ) -> Result<f64, ProbError> {
        let mut seen = HashSet::new();
        for name in a.iter().chain(b).chain(given) {
            let name = name.as_ref();
            if !seen.insert(name) {
                return Err(ProbError::Overlap(name.to_string()));
            }
            self.axis(name)?;
        }
        let a: Vec<&str> = a.iter().map(|s| s.as_ref()).collect();
        let b: Vec<&str> = b.iter().map(|s| s.as_ref()).collect();
        let c: Vec<&str> = given.iter().map(|s| s.as_ref()).collect();
        let abc: Vec<&str> = a.iter().chain(&b).chain(&c).copied().collect();
        let sub = self.marginalize(&abc)?;
        let ac: Vec<&str> = a.iter().chain(&c).copied().collect();
        let bc: Vec<&str> = b.iter().chain(&c).copied().collect();
        let value = sub.entropy(&ac)? + sub.entropy(&bc)? - entropy_of(sub.probs()) - sub.entropy(&c)?;
        Ok(clamp_information(value))
    }
}

/// Snaps round-off around zero (negatives down to `-MI_CLAMP_TOL`,
/// positives below 1e-12) of an information quantity to zero.
pub fn clamp_information(value: f64) -> f64 {
    if value < 1e-12 && value > -MI_CLAMP_TOL {
        0.0
    } else {
        value
    }
}

/// Entropy in bits of a probability vector; `0 log 0 = 0`.
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// A conditional law `P(target | given)` stored as a row-major
/// `given x target` table. Construction checks only the shape; row
/// normalization is reported by [`ConditionalKernel::check`] so that
/// malformed kernels can still be loaded and diagnosed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    given: Vec<Alphabet>,
    target: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl ConditionalKernel {
    pub fn new(
        given: Vec<Alphabet>,
        target: Vec<Alphabet>,
        probs: Vec<f64>,
    ) -> Result<Self, ProbError> {
        let all: Vec<Alphabet> = given.iter().chain(&target).cloned().collect();
        check_variables(&all)?;
        let expected = product_size(&all);
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, got: probs.len() });
        }
        Ok(ConditionalKernel { given, target, probs })
    }

    /// Builds a kernel from explicit rows (one per `given` assignment).
    pub fn from_rows(
        given: Vec<Alphabet>,
        target: Vec<Alphabet>,
        rows: &[Vec<f64>],
    ) -> Result<Self, ProbError> {
        let nrows = product_size(&given);
        if rows.len() != nrows {
            return Err(ProbError::ShapeMismatch { expected: nrows, got: rows.len() });
        }
        let ncols = product_size(&target);
        for row in rows {
            if row.len() != ncols {
                return Err(ProbError::ShapeMismatch { expected: ncols, got: row.len() });
            }
        }
        Self::new(given, target, rows.concat())
    }

    /// Unconditional law over `target`.
    pub fn marginal(target: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self, ProbError> {
        Self::new(Vec::new(), target, probs)
    }

    /// Kernel whose rows are point masses at `map[row]`.
    pub fn deterministic(
        given: Vec<Alphabet>,
        target: Alphabet,
        map: &[usize],
    ) -> Result<Self, ProbError> {
        let ncols = target.size;
        let nrows = product_size(&given);
        if map.len() != nrows {
            return Err(ProbError::ShapeMismatch { expected: nrows, got: map.len() });
        }
        let mut probs = vec![0.0; nrows * ncols];
        for (r, &m) in map.iter().enumerate() {
            if m >= ncols {
                return Err(ProbError::SymbolOutOfRange { name: target.name.clone(), symbol: m, size: ncols });
            }
            probs[r * ncols + m] = 1.0;
        }
        Self::new(given, vec![target], probs)
    }

    pub fn uniform(given: Vec<Alphabet>, target: Vec<Alphabet>) -> Result<Self, ProbError> {
        let ncols = product_size(&target);
        let n = product_size(&given) * ncols;
        Self::new(given, target, vec![1.0 / ncols as f64; n])
    }

    pub fn given(&self) -> &[Alphabet] {
        &self.given
    }

    pub fn target(&self) -> &[Alphabet] {
        &self.target
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rows(&self) -> usize {
        product_size(&self.given)
    }

    pub fn cols(&self) -> usize {
        product_size(&self.target)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.probs[r * c..(r + 1) * c]
    }

    /// `P(target = t | given = g)` with both sides as flat indices.
    pub fn at(&self, g: usize, t: usize) -> f64 {
        self.probs[g * self.cols() + t]
    }

    /// Rows whose sum deviates from one by more than `tol`, with the sum.
    pub fn row_defects(&self, tol: f64) -> Vec<(usize, f64)> {
        (0..self.rows())
            .filter_map(|r| {
                let s: f64 = self.row(r).iter().sum();
                ((s - 1.0).abs() > tol).then_some((r, s))
            })
            .collect()
    }

    /// Indices of negative or non-finite entries.
    pub fn invalid_entries(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| !(p >= 0.0 && p.is_finite()))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn check(&self) -> Result<(), ProbError> {
        if let Some(&index) = self.invalid_entries().first() {
            return Err(ProbError::InvalidEntry { index, value: self.probs[index] });
        }
        if let Some(&(_, s)) = self.row_defects(NORMALIZATION_TOL).first() {
            return Err(ProbError::NotNormalized(s));
        }
        Ok(())
    }

    /// Joint law `P(given) P(target | given)` for a prior over `given`.
    pub fn joint_with(&self, prior: &JointDistribution) -> Result<JointDistribution, ProbError> {
        let names: Vec<&str> = self.given.iter().map(|a| a.name.as_str()).collect();
        let prior = prior.marginalize(&names)?;
        let cols = self.cols();
        let vars: Vec<Alphabet> = self.given.iter().chain(&self.target).cloned().collect();
        let probs = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| prior.probs()[i / cols] * p)
            .collect();
        JointDistribution::new(vars, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xy(probs: Vec<f64>) -> JointDistribution {
        JointDistribution::new(vec![Alphabet::new("X", 2), Alphabet::new("Y", 2)], probs).unwrap()
    }

    fn bsc(flip: f64) -> JointDistribution {
        xy(vec![0.5 * (1.0 - flip), 0.5 * flip, 0.5 * flip, 0.5 * (1.0 - flip)])
    }

    #[test]
    fn marginal_of_uniform_is_uniform() {
        let j = JointDistribution::uniform(vec![Alphabet::new("X", 2), Alphabet::new("Y", 2)]).unwrap();
        assert_eq!(j.marginalize(&["X"]).unwrap().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_of_point_mass() {
        let j = JointDistribution::point_mass(vec![Alphabet::new("X", 2), Alphabet::new("Y", 2)], &[1, 0])
            .unwrap();
        assert_eq!(j.marginalize(&["Y"]).unwrap().probs(), &[1.0, 0.0]);
    }

    #[test]
    fn marginal_three_atoms() {
        // P(0,0)=0.5, P(1,0)=0.2, P(1,1)=0.3
        let j = xy(vec![0.5, 0.0, 0.2, 0.3]);
        let m = j.marginalize(&["X"]).unwrap();
        assert!((m.probs()[0] - 0.5).abs() < 1e-15);
        assert!((m.probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginal_respects_keep_order() {
        let j = xy(vec![0.1, 0.2, 0.3, 0.4]);
        let m = j.marginalize(&["Y", "X"]).unwrap();
        assert_eq!(m.names(), vec!["Y", "X"]);
        assert_eq!(m.probs(), &[0.1, 0.3, 0.2, 0.4]);
    }

    #[test]
    fn unknown_name_is_an_error() {
        let j = xy(vec![0.25; 4]);
        assert_eq!(j.marginalize(&["Q"]).unwrap_err(), ProbError::UnknownVariable("Q".into()));
    }

    #[test]
    fn conditioning_examples() {
        let indep = xy(vec![0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4]);
        let c = indep.condition(&[("Y", 0)]).unwrap();
        assert!((c.probs()[0] - 0.3).abs() < 1e-12);

        let copy = xy(vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(copy.condition(&[("X", 1)]).unwrap().probs(), &[0.0, 1.0]);

        let three = xy(vec![0.5, 0.0, 0.2, 0.3]);
        let c = three.condition(&[("X", 1)]).unwrap();
        assert!((c.probs()[0] - 0.4).abs() < 1e-12);
        assert!((c.probs()[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn conditioning_on_null_event_fails() {
        let copy = xy(vec![0.5, 0.0, 0.0, 0.5]);
        let c = copy.marginalize(&["X"]).unwrap();
        let pm = JointDistribution::point_mass(c.variables().to_vec(), &[0]).unwrap();
        assert_eq!(pm.condition(&[("X", 1)]).unwrap_err(), ProbError::ZeroMass);
    }

    #[test]
    fn entropy_examples() {
        let u = JointDistribution::uniform(vec![Alphabet::new("X", 2)]).unwrap();
        assert!((u.entropy(&["X"]).unwrap() - 1.0).abs() < 1e-15);
        let pm = JointDistribution::point_mass(vec![Alphabet::new("X", 3)], &[2]).unwrap();
        assert_eq!(pm.entropy(&["X"]).unwrap(), 0.0);
        let b = JointDistribution::new(vec![Alphabet::new("X", 2)], vec![0.1, 0.9]).unwrap();
        assert!((b.entropy(&["X"]).unwrap() - 0.468_995_593_6).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = xy(vec![0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4]);
        assert_eq!(indep.mutual_information(&["X"], &["Y"], &[] as &[&str]).unwrap(), 0.0);
        let copy = bsc(0.0);
        assert!((copy.mutual_information(&["X"], &["Y"], &[] as &[&str]).unwrap() - 1.0).abs() < 1e-15);
        let noisy = bsc(0.1);
        let mi = noisy.mutual_information(&["X"], &["Y"], &[] as &[&str]).unwrap();
        assert!((mi - 0.531_004_406_5).abs() < 1e-9);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let j = bsc(0.1);
        assert_eq!(
            j.mutual_information(&["X"], &["X"], &[] as &[&str]).unwrap_err(),
            ProbError::Overlap("X".into())
        );
    }

    #[test]
    fn kernel_defects_reported() {
        let k = ConditionalKernel::from_rows(
            vec![Alphabet::new("A", 2)],
            vec![Alphabet::new("B", 2)],
            &[vec![0.5, 0.5], vec![0.6, 0.3]],
        )
        .unwrap();
        let d = k.row_defects(NORMALIZATION_TOL);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].0, 1);
        assert!(k.check().is_err());
    }

    #[test]
    fn rejects_unnormalized_joint() {
        assert!(matches!(
            JointDistribution::new(vec![Alphabet::new("X", 2)], vec![0.5, 0.4]),
            Err(ProbError::NotNormalized(_))
        ));
    }

    fn random_joint(weights: &[f64], sizes: &[usize]) -> JointDistribution {
        let vars: Vec<Alphabet> =
            sizes.iter().enumerate().map(|(i, &s)| Alphabet::new(format!("V{i}"), s)).collect();
        let total: f64 = weights.iter().sum();
        JointDistribution::new(vars, weights.iter().map(|w| w / total).collect()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn chain_rule(w in prop::collection::vec(0.0f64..1.0, 12)) {
            prop_assume!(w.iter().sum::<f64>() > 1e-3);
            let j = random_joint(&w, &[2, 3, 2]);
            let lhs = j.mutual_information(&["V0", "V1"], &["V2"], &[] as &[&str]).unwrap();
            let rhs = j.mutual_information(&["V0"], &["V2"], &[] as &[&str]).unwrap()
                + j.mutual_information(&["V1"], &["V2"], &["V0"]).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn information_is_nonnegative(w in prop::collection::vec(0.0f64..1.0, 12)) {
            prop_assume!(w.iter().sum::<f64>() > 1e-3);
            let j = random_joint(&w, &[2, 2, 3]);
            prop_assert!(j.entropy(&["V0", "V2"]).unwrap() >= 0.0);
            prop_assert!(j.mutual_information(&["V0"], &["V1"], &["V2"]).unwrap() >= 0.0);
        }

        #[test]
        fn data_processing(
            pa in prop::collection::vec(0.01f64..1.0, 3),
            kab in prop::collection::vec(0.01f64..1.0, 6),
            kbc in prop::collection::vec(0.01f64..1.0, 6),
        ) {
            // A (3) -> B (2) -> C (3)
            let norm = |v: &[f64]| { let s: f64 = v.iter().sum(); v.iter().map(|x| x / s).collect::<Vec<_>>() };
            let pa = norm(&pa);
            let kab: Vec<Vec<f64>> = kab.chunks(2).map(norm).collect();
            let kbc: Vec<Vec<f64>> = kbc.chunks(3).map(norm).collect();
            let vars = vec![Alphabet::new("A", 3), Alphabet::new("B", 2), Alphabet::new("C", 3)];
            let j = JointDistribution::from_fn(vars, |x| pa[x[0]] * kab[x[0]][x[1]] * kbc[x[1]][x[2]]).unwrap();
            let iac = j.mutual_information(&["A"], &["C"], &[] as &[&str]).unwrap();
            let iab = j.mutual_information(&["A"], &["B"], &[] as &[&str]).unwrap();
            prop_assert!(iac <= iab + 1e-9);
        }

        #[test]
        fn condition_then_marginalize_matches_slice(w in prop::collection::vec(0.01f64..1.0, 12), y in 0usize..3) {
            let j = random_joint(&w, &[2, 3, 2]);
            let lhs = j.condition(&[("V1", y)]).unwrap().marginalize(&["V0"]).unwrap();
            let rhs = j.marginalize(&["V0", "V1"]).unwrap().condition(&[("V1", y)]).unwrap();
            for (a, b) in lhs.probs().iter().zip(rhs.probs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
