//! Fourier-Motzkin elimination over real inequality systems.

use serde::Serialize;

/// `coeffs . x <= rhs`. `sources` is a bitmask over the rows of the original
/// system that were combined to produce this one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub sources: u64,
}

const COEFF_TOL: f64 = 1e-12;

impl Inequality {
    pub fn new(coeffs: Vec<f64>, rhs: f64, sources: u64) -> Self {
        Inequality { coeffs, rhs, sources }
    }

    fn scale_to_unit(&mut self) {
        let m = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if m > COEFF_TOL {
            self.coeffs.iter_mut().for_each(|c| *c /= m);
            self.rhs /= m;
        } else {
            self.coeffs.iter_mut().for_each(|c| *c = 0.0);
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= COEFF_TOL)
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.rhs - self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Removes rows with identical direction, keeping the tightest, and drops
/// trivially true constant rows. An infeasible constant row is kept alone.
pub fn prune(rows: Vec<Inequality>, tol: f64) -> Vec<Inequality> {
    let mut out: Vec<Inequality> = Vec::with_capacity(rows.len());
    for mut row in rows {
        row.scale_to_unit();
        if row.is_constant() {
            if row.rhs < -tol {
                return vec![row];
            }
            continue;
        }
        match out
            .iter_mut()
            .find(|o| o.coeffs.iter().zip(&row.coeffs).all(|(a, b)| (a - b).abs() <= COEFF_TOL))
        {
            Some(existing) => {
                if row.rhs < existing.rhs {
                    *existing = row;
                }
            }
            None => out.push(row),
        }
    }
    out
}

/// Eliminates variable `var` from `rows`. `eliminated_before` is the number
/// of variables already removed; rows built from more than
/// `eliminated_before + 2` original rows are redundant and discarded.
pub fn fourier_motzkin(rows: Vec<Inequality>, var: usize, eliminated_before: u32, tol: f64) -> Vec<Inequality> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for row in rows {
        let c = row.coeffs[var];
        if c > COEFF_TOL {
            pos.push(row);
        } else if c < -COEFF_TOL {
            neg.push(row);
        } else {
            let mut row = row;
            row.coeffs[var] = 0.0;
            out.push(row);
        }
    }
    let limit = eliminated_before + 2;
    for p in &pos {
        for n in &neg {
            let sources = p.sources | n.sources;
            if sources.count_ones() > limit {
                continue;
            }
            let (wp, wn) = (-n.coeffs[var], p.coeffs[var]);
            let mut coeffs: Vec<f64> = p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| wp * a + wn * b).collect();
            coeffs[var] = 0.0;
            out.push(Inequality { coeffs, rhs: wp * p.rhs + wn * n.rhs, sources });
        }
    }
    prune(out, tol)
}
