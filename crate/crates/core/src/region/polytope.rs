//! Projection of the rate system onto `(R0, R1, R2)` and its vertex form.

use serde::Serialize;

use super::fm::{fourier_motzkin, prune, Inequality};
use super::system::{labels, rows, NVARS};
use super::BoundSet;

/// Feasibility tolerance for vertices and containment.
pub const POLY_TOL: f64 = 1e-9;

/// Names of the rows a projected inequality can come from.
pub static LABELS: std::sync::LazyLock<Vec<String>> = std::sync::LazyLock::new(labels);

/// Auxiliary variables in elimination order: second descriptions, first
/// descriptions, private splits, cooperative splits.
const ELIMINATION_ORDER: [usize; 8] = [9, 10, 7, 8, 4, 6, 3, 5];

/// `coeffs . (R0, R1, R2) <= rhs`, with the labels of the rows combined to
/// produce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateInequality {
    pub coeffs: [f64; 3],
    pub rhs: f64,
    pub provenance: Vec<String>,
}

/// Polygon of `(R1, R2)` pairs at a fixed `R0`, counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slice {
    pub r0: f64,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPolytope {
    inequalities: Vec<RateInequality>,
    vertices: Vec<[f64; 3]>,
    empty: bool,
}

fn provenance(sources: u64, row_labels: &[usize]) -> Vec<String> {
    let mut names: Vec<usize> =
        (0..row_labels.len()).filter(|k| sources & (1u64 << k) != 0).map(|k| row_labels[k]).collect();
    names.sort_unstable();
    names.dedup();
    names.into_iter().map(|l| LABELS[l].clone()).collect()
}

/// Projects the full rate system onto `(R0, R1, R2)` by eliminating the
/// eight auxiliary rates.
pub fn eliminate(bounds: &BoundSet) -> RegionPolytope {
    let system = rows(bounds);
    let row_labels: Vec<usize> = system.iter().map(|r| r.label).collect();
    let mut current: Vec<Inequality> = system
        .iter()
        .enumerate()
        .map(|(k, r)| Inequality::new(r.coeffs.to_vec(), r.rhs, 1u64 << k))
        .collect();
    current = prune(current, POLY_TOL);
    for (step, &var) in ELIMINATION_ORDER.iter().enumerate() {
        if current.len() == 1 && current[0].is_constant() {
            break;
        }
        current = fourier_motzkin(current, var, step as u32, POLY_TOL);
    }
    let infeasible = current.iter().any(|r| r.is_constant() && r.rhs < -POLY_TOL);
    let inequalities: Vec<RateInequality> = current
        .into_iter()
        .filter(|r| !r.is_constant())
        .map(|r| {
            debug_assert!(r.coeffs[3..NVARS].iter().all(|c| *c == 0.0));
            RateInequality {
                coeffs: [r.coeffs[0], r.coeffs[1], r.coeffs[2]],
                rhs: r.rhs,
                provenance: provenance(r.sources, &row_labels),
            }
        })
        .collect();
    RegionPolytope::from_inequalities(if infeasible { Vec::new() } else { inequalities }, infeasible)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let d = det3(a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut x = [0.0; 3];
    for (col, xi) in x.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *xi = det3(m) / d;
    }
    Some(x)
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

impl RegionPolytope {
    fn from_inequalities(mut inequalities: Vec<RateInequality>, infeasible: bool) -> Self {
        if infeasible {
            return RegionPolytope { inequalities: Vec::new(), vertices: Vec::new(), empty: true };
        }
        let mut vertices: Vec<[f64; 3]> = Vec::new();
        let n = inequalities.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let rows = [&inequalities[i], &inequalities[j], &inequalities[k]];
                    let a = [rows[0].coeffs, rows[1].coeffs, rows[2].coeffs];
                    let Some(x) = solve3(a, [rows[0].rhs, rows[1].rhs, rows[2].rhs]) else { continue };
                    let x = x.map(clean);
                    if inequalities.iter().all(|r| slack(r, &x) >= -POLY_TOL)
                        && !vertices.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() <= POLY_TOL))
                    {
                        vertices.push(x);
                    }
                }
            }
        }
        vertices.sort_by(|a, b| a.partial_cmp(b).expect("finite vertices"));
        if vertices.is_empty() {
            return RegionPolytope { inequalities: Vec::new(), vertices, empty: true };
        }
        // Rows touching no vertex are strictly redundant.
        inequalities.retain(|r| vertices.iter().any(|v| slack(r, v).abs() <= POLY_TOL));
        RegionPolytope { inequalities, vertices, empty: false }
    }

    pub fn inequalities(&self) -> &[RateInequality] {
        &self.inequalities
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// True when no rate triple (not even the origin) is achievable.
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn contains(&self, r: [f64; 3]) -> bool {
        !self.empty && self.inequalities.iter().all(|ineq| slack(ineq, &r) >= -POLY_TOL)
    }

    /// Maximum of `weights . r` over the polytope and a maximizing vertex.
    pub fn max_objective(&self, weights: [f64; 3]) -> Option<(f64, [f64; 3])> {
        self.vertices
            .iter()
            .map(|v| (weights.iter().zip(v).map(|(w, x)| w * x).sum::<f64>(), *v))
            .fold(None, |best: Option<(f64, [f64; 3])>, cand| match best {
                Some(b) if b.0 >= cand.0 => Some(b),
                _ => Some(cand),
            })
    }

    /// Cross-section polygons in the `(R1, R2)` plane.
    pub fn slices(&self, r0_values: &[f64]) -> Vec<Slice> {
        r0_values.iter().map(|&r0| self.slice(r0)).collect()
    }

    fn slice(&self, r0: f64) -> Slice {
        let lines: Vec<([f64; 2], f64)> = self
            .inequalities
            .iter()
            .map(|r| ([r.coeffs[1], r.coeffs[2]], r.rhs - r.coeffs[0] * r0))
            .collect();
        let feasible = |p: [f64; 2]| lines.iter().all(|(a, b)| b - a[0] * p[0] - a[1] * p[1] >= -POLY_TOL);
        let mut pts: Vec<[f64; 2]> = Vec::new();
        if !self.empty {
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (a, b) = (lines[i].0, lines[j].0);
                    let d = a[0] * b[1] - a[1] * b[0];
                    if d.abs() < 1e-12 {
                        continue;
                    }
                    let p = [
                        clean((lines[i].1 * b[1] - a[1] * lines[j].1) / d),
                        clean((a[0] * lines[j].1 - lines[i].1 * b[0]) / d),
                    ];
                    if feasible(p) && !pts.iter().any(|q| (q[0] - p[0]).abs() <= POLY_TOL && (q[1] - p[1]).abs() <= POLY_TOL) {
                        pts.push(p);
                    }
                }
            }
        }
        if pts.len() > 2 {
            let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
            pts.sort_by(|p, q| {
                let ap = (p[1] - cy).atan2(p[0] - cx);
                let aq = (q[1] - cy).atan2(q[0] - cx);
                ap.partial_cmp(&aq).expect("finite angles")
            });
        } else {
            pts.sort_by(|p, q| p.partial_cmp(q).expect("finite points"));
        }
        Slice { r0, vertices: pts }
    }
}

fn slack(r: &RateInequality, x: &[f64; 3]) -> f64 {
    r.rhs - r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}
