//! JSON documents for channels and schemes (`"schema": "cdregion-spec-1"`).
//!
//! Kernels are stored as one row per assignment of the given variables, in
//! row-major order of the given list named by the field; columns follow the
//! target variables in the same order. Encoder tables are flat arrays over
//! `(U, W1, U1, S1)` and `(U, W2, U2, S2)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{scheme_kernel_cols, scheme_kernel_rows, ChannelSizes, ChannelSpec, Mode, SchemeSizes, SchemeSpec};
use crate::prob::{Alphabet, ProbError};

pub const SCHEMA: &str = "cdregion-spec-1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`, expected `{SCHEMA}`")]
    Schema(String),
    #[error("{table}: {message}")]
    Shape { table: String, message: String },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub schema: String,
    pub alphabets: ChannelSizes,
    /// Optional symbol names, keyed by variable name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, Vec<String>>,
    pub p_s: Vec<f64>,
    /// Rows over `S`, columns over `(S1, S2)`.
    pub p_s1s2_given_s: Vec<Vec<f64>>,
    /// Rows over `(X1, X2, S)`, columns over `(Y1, Y2, Y, SR)`.
    pub channel: Vec<Vec<f64>>,
    /// Rows over `S`, columns over `S_hat`.
    pub distortion: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub schema: String,
    #[serde(default)]
    pub mode: Mode,
    pub alphabets: SchemeSizes,
    pub p_u: Vec<f64>,
    pub p_w1_given_u: Vec<Vec<f64>>,
    pub p_w2_given_u: Vec<Vec<f64>>,
    pub p_u1_given_u_w1: Vec<Vec<f64>>,
    pub p_u2_given_u_w2: Vec<Vec<f64>>,
    pub p_t1_given_s1_y1: Vec<Vec<f64>>,
    pub p_t2_given_s2_y2: Vec<Vec<f64>>,
    pub p_v1_given_s1_u_w1_w2_u1_y1_t1: Vec<Vec<f64>>,
    pub p_v2_given_s2_u_w1_w2_u2_y2_t2: Vec<Vec<f64>>,
    pub f1: Vec<usize>,
    pub f2: Vec<usize>,
}

const SCHEME_TABLES: [&str; 9] = [
    "p_u",
    "p_w1_given_u",
    "p_w2_given_u",
    "p_u1_given_u_w1",
    "p_u2_given_u_w2",
    "p_t1_given_s1_y1",
    "p_t2_given_s2_y2",
    "p_v1_given_s1_u_w1_w2_u1_y1_t1",
    "p_v2_given_s2_u_w1_w2_u2_y2_t2",
];

fn check_schema(s: &str) -> Result<(), ConfigError> {
    if s == SCHEMA {
        Ok(())
    } else {
        Err(ConfigError::Schema(s.to_string()))
    }
}

fn check_rows(table: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<(), ConfigError> {
    if rows.len() != nrows {
        return Err(ConfigError::Shape {
            table: table.into(),
            message: format!("{} rows, expected {nrows}", rows.len()),
        });
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(ConfigError::Shape {
            table: table.into(),
            message: format!("row {i} has {} entries, expected {ncols}", r.len()),
        });
    }
    Ok(())
}

fn rows_of(probs: &[f64], cols: usize) -> Vec<Vec<f64>> {
    probs.chunks(cols.max(1)).map(|c| c.to_vec()).collect()
}

impl ChannelFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let file: ChannelFile = serde_json::from_str(text)?;
        check_schema(&file.schema)?;
        Ok(file)
    }

    pub fn to_spec(&self) -> Result<ChannelSpec, ConfigError> {
        check_schema(&self.schema)?;
        let a = self.alphabets;
        if self.p_s.len() != a.s {
            return Err(ConfigError::Shape {
                table: "p_s".into(),
                message: format!("{} entries, expected {}", self.p_s.len(), a.s),
            });
        }
        check_rows("p_s1s2_given_s", &self.p_s1s2_given_s, a.s, a.s1 * a.s2)?;
        check_rows("channel", &self.channel, a.x1 * a.x2 * a.s, a.y1 * a.y2 * a.y * a.sr)?;
        check_rows("distortion", &self.distortion, a.s, a.s_hat)?;
        let mut spec =
            ChannelSpec::from_tables(a, self.p_s.clone(), &self.p_s1s2_given_s, &self.channel, &self.distortion)?;
        for (name, labels) in &self.labels {
            let slot = match name.as_str() {
                "S" => &mut spec.s,
                "S1" => &mut spec.s1,
                "S2" => &mut spec.s2,
                "X1" => &mut spec.x1,
                "X2" => &mut spec.x2,
                "Y1" => &mut spec.y1,
                "Y2" => &mut spec.y2,
                "Y" => &mut spec.y,
                "SR" => &mut spec.sr,
                "S_hat" => &mut spec.s_hat,
                other => return Err(ProbError::UnknownVariable(other.to_string()).into()),
            };
            let labelled = Alphabet::with_labels(slot.name.clone(), labels.clone());
            if labelled.size != slot.size {
                return Err(ProbError::LabelCount { name: name.clone(), size: slot.size, labels: labels.len() }.into());
            }
            *slot = labelled;
        }
        Ok(spec)
    }

    pub fn from_spec(c: &ChannelSpec) -> Self {
        let mut labels = BTreeMap::new();
        for a in [&c.s, &c.s1, &c.s2, &c.x1, &c.x2, &c.y1, &c.y2, &c.y, &c.sr, &c.s_hat] {
            if let Some(l) = &a.labels {
                labels.insert(a.name.clone(), l.clone());
            }
        }
        ChannelFile {
            schema: SCHEMA.into(),
            alphabets: c.sizes(),
            labels,
            p_s: c.p_s.probs().to_vec(),
            p_s1s2_given_s: rows_of(c.p_s1s2.probs(), c.p_s1s2.cols()),
            channel: rows_of(c.kernel.probs(), c.kernel.cols()),
            distortion: c.distortion.rows(),
        }
    }
}

impl SchemeFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let file: SchemeFile = serde_json::from_str(text)?;
        check_schema(&file.schema)?;
        Ok(file)
    }

    fn tables(&self) -> [&Vec<Vec<f64>>; 8] {
        [
            &self.p_w1_given_u,
            &self.p_w2_given_u,
            &self.p_u1_given_u_w1,
            &self.p_u2_given_u_w2,
            &self.p_t1_given_s1_y1,
            &self.p_t2_given_s2_y2,
            &self.p_v1_given_s1_u_w1_w2_u1_y1_t1,
            &self.p_v2_given_s2_u_w1_w2_u2_y2_t2,
        ]
    }

    /// Resolves the scheme against the channel it will run on.
    pub fn to_spec(&self, channel: &ChannelSpec) -> Result<SchemeSpec, ConfigError> {
        check_schema(&self.schema)?;
        let sizes = self.alphabets;
        let rows = scheme_kernel_rows(channel, sizes);
        let cols = scheme_kernel_cols(sizes);
        if self.p_u.len() != sizes.u {
            return Err(ConfigError::Shape {
                table: SCHEME_TABLES[0].into(),
                message: format!("{} entries, expected {}", self.p_u.len(), sizes.u),
            });
        }
        let mut flat = vec![self.p_u.clone()];
        for (k, table) in self.tables().into_iter().enumerate() {
            check_rows(SCHEME_TABLES[k + 1], table, rows[k + 1], cols[k + 1])?;
            flat.push(table.concat());
        }
        let kernels: [Vec<f64>; 9] = flat.try_into().expect("nine tables");
        Ok(SchemeSpec::from_tables(channel, sizes, kernels, self.f1.clone(), self.f2.clone(), self.mode)?)
    }

    pub fn from_spec(s: &SchemeSpec) -> Self {
        let k = s.kernels();
        let r = |i: usize| rows_of(k[i].probs(), k[i].cols());
        SchemeFile {
            schema: SCHEMA.into(),
            mode: s.mode,
            alphabets: s.sizes(),
            p_u: k[0].probs().to_vec(),
            p_w1_given_u: r(1),
            p_w2_given_u: r(2),
            p_u1_given_u_w1: r(3),
            p_u2_given_u_w2: r(4),
            p_t1_given_s1_y1: r(5),
            p_t2_given_s2_y2: r(6),
            p_v1_given_s1_u_w1_w2_u1_y1_t1: r(7),
            p_v2_given_s2_u_w1_w2_u2_y2_t2: r(8),
            f1: s.f1.clone(),
            f2: s.f2.clone(),
        }
    }
}

/// Short content digest of a scheme: the first 16 hex digits of the SHA-256
/// of its canonical JSON form.
pub fn scheme_digest(s: &SchemeSpec) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(&SchemeFile::from_spec(s)).expect("scheme serializes");
    let hash = Sha256::digest(json.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toys;
    use rand::SeedableRng;

    #[test]
    fn channel_round_trips() {
        let mut c = toys::echo(0.2);
        c.x2 = Alphabet::with_labels("X2", vec!["silent".into(), "probe".into()]);
        let text = serde_json::to_string_pretty(&ChannelFile::from_spec(&c)).unwrap();
        let back = ChannelFile::from_json(&text).unwrap().to_spec().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn scheme_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let sizes = ChannelSizes { s: 2, s1: 2, s2: 1, x1: 2, x2: 3, y1: 2, y2: 1, y: 2, sr: 1, s_hat: 2 };
        let c = toys::random_channel(&mut rng, sizes);
        let s = toys::random_scheme(&mut rng, &c, SchemeSizes::default(), Mode::StrictlyCausal);
        let text = serde_json::to_string(&SchemeFile::from_spec(&s)).unwrap();
        let back = SchemeFile::from_json(&text).unwrap().to_spec(&c).unwrap();
        assert_eq!(back, s);
        assert_eq!(scheme_digest(&back), scheme_digest(&s));
        assert_eq!(scheme_digest(&s).len(), 16);
    }

    #[test]
    fn wrong_schema_and_shapes_are_rejected() {
        let c = toys::noisy_bit(0.5, 0.1);
        let mut f = ChannelFile::from_spec(&c);
        f.schema = "other".into();
        assert!(matches!(f.to_spec(), Err(ConfigError::Schema(_))));
        let mut f = ChannelFile::from_spec(&c);
        f.channel.pop();
        assert!(matches!(f.to_spec(), Err(ConfigError::Shape { .. })));
        let mut s = SchemeFile::from_spec(&SchemeSpec::trivial(&c));
        s.p_t1_given_s1_y1[0].push(0.0);
        assert!(matches!(s.to_spec(&c), Err(ConfigError::Shape { .. })));
        assert!(matches!(ChannelFile::from_json("{"), Err(ConfigError::Json(_))));
    }
}
