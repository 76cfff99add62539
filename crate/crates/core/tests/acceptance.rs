//! Acceptance checks. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use cdregion::channel::{distortion_of, ChannelSizes, DistortionTable, SchemeSizes, DEFAULT_JOINT_CAP};
use cdregion::estimation::{min_distortion, optimal_estimator};
use cdregion::region::{
    eliminate, evaluate_bounds, lemma_checks, membership, monostatic_region, multisensor_region, BoundSet, RateTriple,
};
use cdregion::seeding::stream;
use cdregion::simulator::{sweep, SimConfig, SimParams, SimRates};
use cdregion::{build_joint, toys, Alphabet, ChannelSpec, JointDistribution, Mode, SchemeSpec};

type Outcome = Result<String, String>;
type Term = (&'static str, &'static [usize], &'static [usize], &'static [usize]);
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Marginal of a dense row-major tensor on the axes `keep`.
fn marginal(probs: &[f64], sizes: &[usize], keep: &[usize]) -> Vec<f64> {
    let out_len: usize = keep.iter().map(|&k| sizes[k]).product();
    let mut out = vec![0.0; out_len];
    let mut idx = vec![0usize; sizes.len()];
    for &p in probs {
        let flat = keep.iter().fold(0, |acc, &k| acc * sizes[k] + idx[k]);
        out[flat] += p;
        for k in (0..sizes.len()).rev() {
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

fn entropy_of(probs: &[f64], sizes: &[usize], keep: &[usize]) -> f64 {
    marginal(probs, sizes, keep).iter().filter(|&&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `I(A;B|C)` from entropies of marginals of a dense tensor.
fn cmi(probs: &[f64], sizes: &[usize], a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let join = |xs: &[&[usize]]| xs.concat();
    entropy_of(probs, sizes, &join(&[a, c])) + entropy_of(probs, sizes, &join(&[b, c]))
        - entropy_of(probs, sizes, &join(&[a, b, c]))
        - entropy_of(probs, sizes, c)
}

fn random_law<R: Rng>(rng: &mut R, sizes: &[usize]) -> JointDistribution {
    let vars: Vec<Alphabet> = sizes.iter().enumerate().map(|(i, &s)| Alphabet::new(format!("A{i}"), s)).collect();
    let len: usize = sizes.iter().product();
    // Sparse laws exercise the zero-mass conventions.
    let raw: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen::<f64>() }).collect();
    let total: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    JointDistribution::new(vars, raw.iter().map(|p| p / total).collect()).unwrap()
}

fn information_measures() -> Outcome {
    let vars = vec![Alphabet::new("X", 2), Alphabet::new("Y", 2)];
    let bsc = JointDistribution::from_fn(vars, |a| 0.5 * if a[0] == a[1] { 0.9 } else { 0.1 }).unwrap();
    let got = bsc.mutual_information(&["X"], &["Y"], &[] as &[&str]).unwrap();
    let want = 1.0 - h2(0.1);
    if (got - 0.531_004_406_5).abs() > 1e-9 || (got - want).abs() > 1e-9 {
        return Err(format!("binary symmetric law: {got}, expected {want}"));
    }

    let mut rng = stream(101, &[]);
    let mut worst_chain = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let trials = 150;
    for _ in 0..trials {
        let sizes: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=3)).collect();
        let j = random_law(&mut rng, &sizes);
        let names = ["A0", "A1", "A2", "A3"];
        let i = |a: &[&str], b: &[&str], c: &[&str]| j.mutual_information(a, b, c).unwrap();
        let h = |a: &[&str]| j.entropy(a).unwrap();
        // I(A;B,C) = I(A;B) + I(A;C|B) and H(A,B,C) = H(A) + H(B|A) + H(C|A,B).
        let lhs = i(&[names[0]], &[names[1], names[2]], &[names[3]]);
        let rhs = i(&[names[0]], &[names[1]], &[names[3]]) + i(&[names[0]], &[names[2]], &[names[1], names[3]]);
        worst_chain = worst_chain.max((lhs - rhs).abs());
        let total = h(&names[..3]);
        let split = h(&names[..1]) + (h(&names[..2]) - h(&names[..1])) + (h(&names[..3]) - h(&names[..2]));
        worst_chain = worst_chain.max((total - split).abs());
        for (a, b, c) in [(vec![0], vec![1], vec![]), (vec![0, 2], vec![1], vec![3]), (vec![3], vec![0, 1], vec![2])] {
            let by_name = |ix: &[usize]| ix.iter().map(|&k| names[k]).collect::<Vec<_>>();
            let lib = i(&by_name(&a), &by_name(&b), &by_name(&c));
            let direct = cmi(j.probs(), &sizes, &a, &b, &c);
            if lib < -1e-12 {
                return Err(format!("negative information {lib}"));
            }
            worst_oracle = worst_oracle.max((lib - direct).abs());
        }
    }

    // Data processing: A - B - C built as P(a) P(b|a) P(c|b).
    let mut dpi_violations = 0;
    for _ in 0..trials {
        let (na, nb, nc) = (rng.gen_range(2..=4), rng.gen_range(2..=4), rng.gen_range(2..=4));
        let pa = toys::random_simplex(&mut rng, na);
        let pba: Vec<Vec<f64>> = (0..na).map(|_| toys::random_simplex(&mut rng, nb)).collect();
        let pcb: Vec<Vec<f64>> = (0..nb).map(|_| toys::random_simplex(&mut rng, nc)).collect();
        let vars = vec![Alphabet::new("A", na), Alphabet::new("B", nb), Alphabet::new("C", nc)];
        let j = JointDistribution::from_fn(vars, |x| pa[x[0]] * pba[x[0]][x[1]] * pcb[x[1]][x[2]]).unwrap();
        let none: [&str; 0] = [];
        let ab = j.mutual_information(&["A"], &["B"], &none).unwrap();
        let ac = j.mutual_information(&["A"], &["C"], &none).unwrap();
        let ac_b = j.mutual_information(&["A"], &["C"], &["B"]).unwrap();
        if ac > ab + 1e-12 || ac_b.abs() > 1e-9 {
            dpi_violations += 1;
        }
    }
    if worst_chain > 1e-9 || worst_oracle > 1e-9 || dpi_violations > 0 {
        return Err(format!(
            "chain-rule error {worst_chain:.2e}, oracle error {worst_oracle:.2e}, {dpi_violations} processing violations"
        ));
    }
    Ok(format!(
        "I = {got:.10}; {trials} chain-rule and {trials} processing laws, max deviation {:.1e}",
        worst_chain.max(worst_oracle)
    ))
}

const ESTIMATION_POOL: [&str; 14] = ["U", "W1", "W2", "U1", "U2", "T1", "T2", "V1", "V2", "Y", "SR", "X1", "X2", "Y2"];

fn estimator_optimality() -> Outcome {
    let mut rng = stream(202, &[]);
    let mut systems = 0;
    let mut cells_seen = Vec::new();
    while systems < 50 {
        let states = rng.gen_range(2..=3);
        let estimates = rng.gen_range(2..=3);
        let sizes = ChannelSizes { s: states, s1: 2, s2: 1, x1: 2, x2: 2, y1: 1, y2: 2, y: 2, sr: 2, s_hat: estimates };
        let mut channel = toys::random_channel(&mut rng, sizes);
        channel.distortion =
            DistortionTable::new(states, estimates, (0..states * estimates).map(|_| rng.gen_range(0.0..2.0)).collect())
                .unwrap();
        let scheme = toys::random_scheme(&mut rng, &channel, SchemeSizes::default(), Mode::Causal);
        let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();

        let mut pool = ESTIMATION_POOL.to_vec();
        pool.shuffle(&mut rng);
        let limit = if estimates == 3 { 12 } else { 16 };
        let mut cond: Vec<&str> = Vec::new();
        let mut cells = 1;
        for v in pool.into_iter().take(rng.gen_range(1..=4)) {
            let s = joint.alphabet(v).unwrap().size;
            if cells * s <= limit {
                cond.push(v);
                cells *= s;
            }
        }

        // Per-cell cost of each estimate, from the raw tensor.
        let names = joint.names();
        let axes: Vec<usize> = cond.iter().map(|v| names.iter().position(|n| n == v).unwrap()).collect();
        let s_axis = names.iter().position(|n| *n == "S").unwrap();
        let mut keep = axes.clone();
        keep.push(s_axis);
        let m = marginal(joint.probs(), &joint.sizes(), &keep);
        let cost: Vec<Vec<f64>> = (0..cells)
            .map(|w| {
                (0..estimates)
                    .map(|t| (0..states).map(|s| m[w * states + s] * channel.distortion.get(s, t)).sum())
                    .collect()
            })
            .collect();

        let mut best = f64::INFINITY;
        let mut table = vec![0usize; cells];
        'enumerate: loop {
            best = best.min(table.iter().enumerate().map(|(w, &t)| cost[w][t]).sum());
            for cell in table.iter_mut() {
                *cell += 1;
                if *cell < estimates {
                    continue 'enumerate;
                }
                *cell = 0;
            }
            break;
        }
        let est = optimal_estimator(&joint, &channel, &cond).unwrap();
        let achieved = distortion_of(&channel, est.table(), &joint, &cond).unwrap();
        if best < est.expected_distortion() - 1e-12 || (achieved - est.expected_distortion()).abs() > 1e-12 {
            return Err(format!(
                "system {systems} over {cond:?}: exhaustive {best}, optimal {} (table cost {achieved})",
                est.expected_distortion()
            ));
        }
        cells_seen.push(cells);
        systems += 1;
    }
    Ok(format!(
        "50 systems, conditioning spaces of {}..={} cells, exhaustive search never better",
        cells_seen.iter().min().unwrap(),
        cells_seen.iter().max().unwrap()
    ))
}

/// The single-sensor scheme with random description kernels added; the
/// descriptions only see `(X1, X2, Y)` and fresh noise.
fn monostatic_with_descriptions<R: Rng>(rng: &mut R, channel: &ChannelSpec, px1: &[f64], px2: &[f64]) -> SchemeSpec {
    let sizes = SchemeSizes { u1: channel.x1.size, u2: channel.x2.size, t1: 2, t2: 2, v1: 2, v2: 2, ..SchemeSizes::trivial() };
    let rows = cdregion::channel::scheme_kernel_rows(channel, sizes);
    let rand_rows = |rng: &mut R, k: usize| -> Vec<f64> { (0..rows[k]).flat_map(|_| toys::random_simplex(rng, 2)).collect() };
    let kernels = [
        vec![1.0],
        vec![1.0],
        vec![1.0],
        px1.to_vec(),
        px2.to_vec(),
        rand_rows(rng, 5),
        rand_rows(rng, 6),
        rand_rows(rng, 7),
        rand_rows(rng, 8),
    ];
    let f1 = (0..channel.x1.size).collect();
    let f2 = (0..channel.x2.size).collect();
    SchemeSpec::from_tables(channel, sizes, kernels, f1, f2, Mode::Causal).unwrap()
}

fn monostatic_consistency() -> Outcome {
    let mut rng = stream(303, &[]);
    let mut worst: f64 = 0.0;
    let instances = 6;
    for k in 0..instances {
        let (states, x1, x2, outs) = [(2, 2, 2, 2), (2, 3, 2, 2), (3, 2, 2, 3), (2, 2, 3, 2), (3, 3, 2, 2), (2, 2, 2, 4)][k];
        let channel = toys::random_monostatic(&mut rng, states, x1, x2, outs);
        let px1 = toys::random_simplex(&mut rng, x1);
        let px2 = toys::random_simplex(&mut rng, x2);
        let scheme = toys::monostatic_scheme(&channel, &px1, &px2, Mode::Causal);
        let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
        let polytope = eliminate(&evaluate_bounds(&joint).unwrap());
        let general_r1 = polytope.max_objective([0.0, 1.0, 0.0]).map(|x| x.0).unwrap_or(f64::NAN);
        let direct = joint.mutual_information(&["X1"], &["Y"], &["X2"]).unwrap();
        let closed = monostatic_region(&channel, &px1, &px2).unwrap();
        if (general_r1 - direct).abs() > 1e-9 || (closed.rate_bound - direct).abs() > 1e-9 {
            return Err(format!("instance {k}: general max R1 {general_r1}, I(X1;Y|X2) {direct}"));
        }
        if !membership(RateTriple::new(0.0, direct - 1e-6, 0.0), &evaluate_bounds(&joint).unwrap()).is_member() {
            return Err(format!("instance {k}: (0, I - 1e-6, 0) rejected by the membership check"));
        }
        worst = worst.max((general_r1 - direct).abs());

        for scheme in [scheme.clone(), monostatic_with_descriptions(&mut rng, &channel, &px1, &px2)] {
            let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
            let full = min_distortion(&joint, &channel, &cdregion::channel::vars::OMEGA_Z).unwrap();
            let reduced = min_distortion(&joint, &channel, &["X1", "X2", "Y"]).unwrap();
            if (full - reduced).abs() > 1e-9 || (reduced - closed.distortion).abs() > 1e-9 {
                return Err(format!("instance {k}: distortion over all auxiliaries {full}, over (X1,X2,Y) {reduced}"));
            }
            worst = worst.max((full - reduced).abs());
        }
    }
    Ok(format!("{instances} random channels, with and without random descriptions, max deviation {worst:.1e}"))
}

/// Pulls every description kernel row towards the first row, so that the
/// descriptions carry little information and cost little rate.
fn damp_descriptions(channel: &ChannelSpec, scheme: &SchemeSpec, lambda: f64) -> SchemeSpec {
    let k = scheme.kernels();
    let kernels: [Vec<f64>; 9] = std::array::from_fn(|i| {
        let p = k[i].probs();
        if i < 5 {
            return p.to_vec();
        }
        let first = &p[..k[i].cols()];
        p.chunks(k[i].cols())
            .flat_map(|row| row.iter().zip(first).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect::<Vec<_>>())
            .collect()
    });
    SchemeSpec::from_tables(channel, scheme.sizes(), kernels, scheme.f1.clone(), scheme.f2.clone(), scheme.mode).unwrap()
}

fn elimination_soundness() -> Outcome {
    let mut rng = stream(404, &[]);
    let mut members = 0;
    let mut closure_checks = 0;
    let mut rejected = 0;
    let binary = ChannelSizes { s: 2, s1: 2, s2: 2, x1: 2, x2: 2, y1: 2, y2: 2, y: 2, sr: 2, s_hat: 2 };
    for k in 0..10 {
        let mode = if k % 2 == 0 { Mode::Causal } else { Mode::StrictlyCausal };
        let lambda = [0.0, 0.03, 0.06][k % 3];
        // Random description kernels usually cost more than the channel
        // carries; keep drawing until the region has a nonzero point.
        let (bounds, polytope) = loop {
            let channel = toys::random_channel(&mut rng, binary);
            let scheme = toys::random_scheme(&mut rng, &channel, SchemeSizes::default(), mode);
            let scheme = damp_descriptions(&channel, &scheme, lambda);
            let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
            let bounds = evaluate_bounds(&joint).unwrap();
            let polytope = eliminate(&bounds);
            if polytope.vertices().iter().any(|v| v.iter().sum::<f64>() > 1e-3) {
                break (bounds, polytope);
            }
            rejected += 1;
            if rejected > 500 {
                return Err("no scheme with a nonempty region".into());
            }
        };
        let mut hi = [0.05f64; 3];
        for v in polytope.vertices() {
            for i in 0..3 {
                hi[i] = hi[i].max(1.2 * v[i]);
            }
        }
        for t in 0..1000 {
            // Half uniform over a box, half scaled mixtures of vertices that
            // straddle the boundary.
            let r: [f64; 3] = if t % 2 == 0 {
                std::array::from_fn(|i| rng.gen_range(0.0..hi[i]))
            } else {
                let verts = polytope.vertices();
                let w = toys::random_simplex(&mut rng, verts.len());
                let scale = rng.gen_range(0.8..1.2);
                std::array::from_fn(|i| scale * verts.iter().zip(&w).map(|(v, w)| v[i] * w).sum::<f64>())
            };
            let projected = polytope.contains(r);
            let direct = membership(RateTriple::new(r[0], r[1], r[2]), &bounds).is_member();
            if projected != direct {
                return Err(format!("scheme {k}, triple {t} {r:?}: polytope {projected}, direct {direct}"));
            }
            if direct {
                members += 1;
                let shrink: [f64; 3] = std::array::from_fn(|i| r[i] * rng.gen::<f64>());
                let a = polytope.contains(shrink);
                let b = membership(RateTriple::new(shrink[0], shrink[1], shrink[2]), &bounds).is_member();
                closure_checks += 1;
                if !(a && b) {
                    return Err(format!("scheme {k}: {r:?} is a member but {shrink:?} is not"));
                }
            }
        }
    }
    Ok(format!(
        "10 schemes x 1000 triples agree ({members} members, {rejected} empty regions redrawn), {closure_checks} downward-closure checks"
    ))
}

fn lemma_guards() -> Outcome {
    let mut rng = stream(505, &[]);
    let binary = ChannelSizes { s: 2, s1: 2, s2: 2, x1: 2, x2: 2, y1: 2, y2: 2, y: 2, sr: 2, s_hat: 2 };
    let mut silenced = 0;
    for k in 0..20 {
        let channel = toys::random_channel(&mut rng, binary);
        // Every third scheme gives user 2 constant auxiliaries.
        let sizes = if k % 3 == 2 { SchemeSizes { w2: 1, u2: 1, ..SchemeSizes::default() } } else { SchemeSizes::default() };
        let scheme = toys::random_scheme(&mut rng, &channel, sizes, Mode::Causal);
        let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
        let polytope = eliminate(&evaluate_bounds(&joint).unwrap());
        let report = lemma_checks(&polytope, &joint).unwrap();
        if !report.passed() {
            return Err(format!("scheme {k}: {:?}", report.violations));
        }
        if k % 3 == 2 {
            if !report.user2_silenced || report.max_r2 > 1e-9 {
                return Err(format!("scheme {k}: user 2 carries no information but R2 reaches {}", report.max_r2));
            }
            silenced += 1;
        }
    }
    Ok(format!("20 schemes, 0 violations ({silenced} with a silenced user)"))
}

fn simulator_validation() -> Outcome {
    let channel = toys::noisy_bit(0.3, 0.0);
    let scheme = toys::monostatic_scheme(&channel, &[0.5, 0.5], &[1.0], Mode::Causal);
    let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
    let info = joint.mutual_information(&["X1"], &["Y"], &["X2"]).unwrap();
    let target = min_distortion(&joint, &channel, &["X1", "X2", "Y"]).unwrap();
    let config = SimConfig {
        channel,
        scheme,
        params: SimParams {
            rates: SimRates { private1: 0.8 * info, ..SimRates::default() },
            n: 8,
            blocks: 1,
            epsilon: 0.9,
            trials: 500,
            seed: 1,
            ..serde_json::from_str("{}").unwrap()
        },
    };
    let reports = sweep(&config, &[8, 12, 16]).map_err(|e| e.to_string())?;
    let rates: Vec<f64> = reports.iter().map(|r| r.error_rate).collect();
    let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    let mut far = Vec::new();
    for r in &reports {
        if (r.mean_distortion - target).abs() > 3.0 * r.stderr {
            far.push(format!("n={}: {} vs {target} (se {})", r.n, r.mean_distortion, r.stderr));
        }
    }
    let summary = reports
        .iter()
        .map(|r| format!("n={} err={:.3} D={:.4}+-{:.4}", r.n, r.error_rate, r.mean_distortion, r.stderr))
        .collect::<Vec<_>>()
        .join(", ");
    if !decreasing || !far.is_empty() {
        return Err(format!("{summary}; decreasing={decreasing}; {}", far.join("; ")));
    }
    Ok(format!("R1 = {:.2}, target D = {target}; {summary}", 0.8 * info))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn reproducibility() -> Outcome {
    let tmp = std::env::temp_dir().join(format!("cdregion-acceptance-{}", std::process::id()));
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    let (mono_c, mono_s) = (s(data("monostatic_channel.json")), s(data("monostatic_scheme.json")));
    let (bit_c, bit_s, bit_sim) = (s(data("bit_channel.json")), s(data("bit_scheme.json")), s(data("bit_sim.json")));
    let search = s(data("search.json"));
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("region", vec!["region", "--channel", &mono_c, "--scheme", &mono_s]),
        ("estimate", vec!["estimate", "--channel", &mono_c, "--scheme", &mono_s]),
        ("tradeoff", vec!["tradeoff", "--channel", &mono_c, "--search", &search, "--d-grid", "0.1,0.2,0.3,0.5", "--seed", "9"]),
        (
            "simulate",
            vec!["simulate", "--channel", &bit_c, "--scheme", &bit_s, "--sim", &bit_sim, "--n-sweep", "8,12", "--seed", "9"],
        ),
    ];
    let mut files = 0;
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = tmp.join(format!("{name}-{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_cdregion"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{name} exited with {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
            }
            outputs.push(csv_files(&out));
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            return Err(format!("{name}: CSV outputs differ between identical runs"));
        }
        files += outputs[0].len();
    }
    let _ = std::fs::remove_dir_all(&tmp);
    Ok(format!("region, estimate, tradeoff and simulate reruns: {files} CSV files byte-identical"))
}

/// Hand-built joint of the feedback-free two-sensor system over
/// `(S, S1, S2, U, U1, U2, Y, SR, T1, T2, V1, V2)`.
fn two_sensor_joint(channel: &ChannelSpec, scheme: &SchemeSpec) -> (Vec<f64>, Vec<usize>) {
    let c = channel;
    let sizes = vec![
        c.s.size,
        c.s1.size,
        c.s2.size,
        scheme.u.size,
        scheme.u1.size,
        scheme.u2.size,
        c.y.size,
        c.sr.size,
        scheme.t1.size,
        scheme.t2.size,
        scheme.v1.size,
        scheme.v2.size,
    ];
    let k = scheme.kernels();
    let len: usize = sizes.iter().product();
    let mut probs = Vec::with_capacity(len);
    let mut a = vec![0usize; sizes.len()];
    for _ in 0..len {
        let [s, s1, s2, u, u1, u2, y, sr, t1, t2, v1, v2] = a[..] else { unreachable!() };
        let x1 = scheme.f1[(u * scheme.u1.size + u1) * c.s1.size + s1];
        let x2 = scheme.f2[(u * scheme.u2.size + u2) * c.s2.size + s2];
        // W1, W2, Y1, Y2 are all single-symbol, so their indices are zero.
        let p = c.p_s.at(0, s)
            * c.p_s1s2.at(s, s1 * c.s2.size + s2)
            * k[0].at(0, u)
            * k[3].at(u, u1)
            * k[4].at(u, u2)
            * c.transition(x1, x2, s, [0, 0, y, sr])
            * k[5].at(s1, t1)
            * k[6].at(s2, t2)
            * k[7].at((s1 * scheme.u.size + u) * scheme.u1.size * scheme.t1.size + u1 * scheme.t1.size + t1, v1)
            * k[8].at((s2 * scheme.u.size + u) * scheme.u2.size * scheme.t2.size + u2 * scheme.t2.size + t2, v2);
        probs.push(p);
        for i in (0..sizes.len()).rev() {
            a[i] += 1;
            if a[i] < sizes[i] {
                break;
            }
            a[i] = 0;
        }
    }
    (probs, sizes)
}

fn multisensor_specialization() -> Outcome {
    const S1: usize = 1;
    const S2: usize = 2;
    const U: usize = 3;
    const U1: usize = 4;
    const U2: usize = 5;
    const Y: usize = 6;
    const SR: usize = 7;
    const T1: usize = 8;
    const T2: usize = 9;
    const V1: usize = 10;
    const V2: usize = 11;
    let terms: [Term; 10] = [
        ("common", &[U], &[Y, SR], &[T1, T2]),
        ("private1", &[U1], &[Y, SR], &[U, U2, T1, T2]),
        ("private2", &[U2], &[Y, SR], &[U, U1, T1, T2]),
        ("private_sum", &[U1, U2], &[Y, SR], &[U, T1, T2]),
        ("desc1", &[T1], &[S1], &[T2, Y, SR]),
        ("desc2", &[T2], &[S2], &[T1, Y, SR]),
        ("desc_sum", &[T1, T2], &[S1, S2], &[Y, SR]),
        ("refine1", &[V1], &[S1], &[U, U1, U2, T1, T2, V2, Y, SR]),
        ("refine2", &[V2], &[S2], &[U, U1, U2, T1, T2, V1, Y, SR]),
        ("refine_sum", &[V1, V2], &[S1, S2], &[U, U1, U2, T1, T2, Y, SR]),
    ];
    let mut rng = stream(808, &[]);
    let sizes = ChannelSizes { s: 2, s1: 2, s2: 2, x1: 2, x2: 2, y1: 1, y2: 1, y: 2, sr: 2, s_hat: 2 };
    let scheme_sizes = SchemeSizes { w1: 1, w2: 1, ..SchemeSizes::default() };
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for inst in 0..3 {
        let channel = toys::random_channel(&mut rng, sizes);
        let scheme = toys::random_scheme(&mut rng, &channel, scheme_sizes, Mode::Causal);
        let report = multisensor_region(&channel, &scheme, DEFAULT_JOINT_CAP).map_err(|e| e.to_string())?;
        let (probs, dims) = two_sensor_joint(&channel, &scheme);
        for (name, a, b, c) in terms {
            let hand = cmi(&probs, &dims, a, b, c);
            let template = report.terms.iter().find(|t| t.0 == name).map(|t| t.2).ok_or(format!("missing {name}"))?;
            let idx = BoundSet::NAMES.iter().position(|n| *n == name).unwrap();
            let general = report.bounds.as_array()[idx];
            let dev = (hand - template).abs().max((hand - general).abs());
            if dev > 1e-9 {
                return Err(format!("instance {inst}, {name}: hand {hand}, template {template}, general {general}"));
            }
            worst = worst.max(dev);
        }
        if !report.mismatches.is_empty() {
            return Err(format!("instance {inst}: {:?}", report.mismatches));
        }
        if inst == 0 {
            for d in &report.discrepancies {
                notes.push(format!("{} written {} = {:.4}, derived {} = {:.4}", d.term, d.stated, d.stated_value, d.derived, d.derived_value));
            }
        }
    }
    for n in &notes {
        println!("    note: {n}");
    }
    Ok(format!("3 instances, 10 terms each, max deviation {worst:.1e}; {} written-form discrepancies reported", notes.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("information measures", Duration::from_secs(10), information_measures),
        ("estimator optimality", Duration::from_secs(60), estimator_optimality),
        ("single-sensor consistency", Duration::from_secs(300), monostatic_consistency),
        ("elimination soundness", Duration::from_secs(300), elimination_soundness),
        ("sum-rate and zero-rate guards", Duration::from_secs(120), lemma_guards),
        ("simulator statistics", Duration::from_secs(900), simulator_validation),
        ("reproducibility", Duration::from_secs(600), reproducibility),
        ("two-sensor specialization", Duration::from_secs(300), multisensor_specialization),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(m) if took > *budget => Err(format!("{m}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(m) => println!("[PASS] {} {name}: {m} ({took:.1?})", k + 1),
            Err(m) => {
                failed += 1;
                println!("[FAIL] {} {name}: {m} ({took:.1?})", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
