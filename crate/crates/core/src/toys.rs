//! Small reference channels and random generators used by tests, the search
//! engine and the sample configs.

use rand::Rng;

use crate::channel::{scheme_kernel_cols, scheme_kernel_rows, ChannelSizes, ChannelSpec, Mode, SchemeSizes, SchemeSpec};

fn bern(p: f64) -> [f64; 2] {
    [1.0 - p, p]
}

fn hamming_rows(size: usize) -> Vec<Vec<f64>> {
    (0..size).map(|s| (0..size).map(|t| if s == t { 0.0 } else { 1.0 }).collect()).collect()
}

/// `S` uniform over `states` symbols, observed exactly in `Y`; every other
/// alphabet is trivial. Hamming distortion.
pub fn copy_channel(states: usize) -> ChannelSpec {
    let sizes = ChannelSizes { s: states, s1: 1, s2: 1, x1: 1, x2: 1, y1: 1, y2: 1, y: states, sr: 1, s_hat: states };
    let rows: Vec<Vec<f64>> =
        (0..states).map(|s| (0..states).map(|y| if y == s { 1.0 } else { 0.0 }).collect()).collect();
    ChannelSpec::from_tables(
        sizes,
        vec![1.0 / states as f64; states],
        &vec![vec![1.0]; states],
        &rows,
        &hamming_rows(states),
    )
    .expect("copy channel is well formed")
}

/// Single-sensor (monostatic) toy: `Y = X1 xor (X2 and S) xor N` with
/// `S ~ Bern(p_state)`, `N ~ Bern(p_noise)`. Transmitter 2 observes `Y`
/// (`Y2 = Y`), the receiver observes `X2` (`SR = X2`); no side information.
pub fn monostatic_xor(p_state: f64, p_noise: f64) -> ChannelSpec {
    let sizes = ChannelSizes { s: 2, s1: 1, s2: 1, x1: 2, x2: 2, y1: 1, y2: 2, y: 2, sr: 2, s_hat: 2 };
    let mut rows = Vec::new();
    for x1 in 0..2 {
        for x2 in 0..2 {
            for s in 0..2 {
                let clean = x1 ^ (x2 & s);
                // Columns (y1, y2, y, sr) with y1 = 0, y2 = y, sr = x2.
                let mut row = vec![0.0; 8];
                for y in 0..2 {
                    let p = if y == clean { 1.0 - p_noise } else { p_noise };
                    row[(y * 2 + y) * 2 + x2] = p;
                }
                rows.push(row);
            }
        }
    }
    ChannelSpec::from_tables(sizes, bern(p_state).to_vec(), &[vec![1.0], vec![1.0]], &rows, &hamming_rows(2))
        .expect("monostatic toy is well formed")
}

/// Echo toy: `Y = (X1, E)` with `E = S xor N'` when `X2` probes (symbol 1)
/// and `E = N'` when silent, `N' ~ Bern(p_echo_noise)`, `S ~ Bern(1/2)`.
/// `Y` is encoded as `2 * x1 + e`. `Y2 = Y`, `SR = X2`.
pub fn echo(p_echo_noise: f64) -> ChannelSpec {
    let sizes = ChannelSizes { s: 2, s1: 1, s2: 1, x1: 2, x2: 2, y1: 1, y2: 4, y: 4, sr: 2, s_hat: 2 };
    let mut rows = Vec::new();
    for x1 in 0..2 {
        for x2 in 0..2 {
            for s in 0..2 {
                let mut row = vec![0.0; 32];
                for n in 0..2 {
                    let e = if x2 == 1 { s ^ n } else { n };
                    let y = 2 * x1 + e;
                    row[(y * 4 + y) * 2 + x2] += if n == 1 { p_echo_noise } else { 1.0 - p_echo_noise };
                }
                rows.push(row);
            }
        }
    }
    ChannelSpec::from_tables(sizes, vec![0.5, 0.5], &[vec![1.0], vec![1.0]], &rows, &hamming_rows(2))
        .expect("echo toy is well formed")
}

/// Point-to-point binary symmetric channel from `X1` to `Y` with crossover
/// `p_noise`; `S ~ Bern(p_state)` is unobserved. `X2` is trivial.
pub fn noisy_bit(p_state: f64, p_noise: f64) -> ChannelSpec {
    let sizes = ChannelSizes { s: 2, s1: 1, s2: 1, x1: 2, x2: 1, y1: 1, y2: 2, y: 2, sr: 1, s_hat: 2 };
    let mut rows = Vec::new();
    for x1 in 0..2 {
        for _s in 0..2 {
            let mut row = vec![0.0; 4];
            for y in 0..2 {
                row[y * 2 + y] = if y == x1 { 1.0 - p_noise } else { p_noise };
            }
            rows.push(row);
        }
    }
    ChannelSpec::from_tables(sizes, bern(p_state).to_vec(), &[vec![1.0], vec![1.0]], &rows, &hamming_rows(2))
        .expect("noisy bit channel is well formed")
}

/// A random channel in the single-sensor template: random `P(S)` and
/// `P(Y | X1, X2, S)`, with `Y2 = Y`, `SR = X2` and no side information.
pub fn random_monostatic<R: Rng + ?Sized>(rng: &mut R, states: usize, x1: usize, x2: usize, outputs: usize) -> ChannelSpec {
    let sizes = ChannelSizes { s: states, s1: 1, s2: 1, x1, x2, y1: 1, y2: outputs, y: outputs, sr: x2, s_hat: states };
    let mut rows = Vec::new();
    for _a in 0..x1 {
        for b in 0..x2 {
            for _s in 0..states {
                let law = random_simplex(rng, outputs);
                let mut row = vec![0.0; outputs * outputs * x2];
                for (y, p) in law.iter().enumerate() {
                    row[(y * outputs + y) * x2 + b] = *p;
                }
                rows.push(row);
            }
        }
    }
    ChannelSpec::from_tables(sizes, random_simplex(rng, states), &vec![vec![1.0]; states], &rows, &hamming_rows(states))
        .expect("random single-sensor channel is well formed")
}

/// Scheme with `U = W1 = W2 = T = V` trivial, `U1 = X1 ~ px1`,
/// `U2 = X2 ~ px2` and identity encoders. Side-information alphabets of the
/// channel must be trivial.
pub fn monostatic_scheme(channel: &ChannelSpec, px1: &[f64], px2: &[f64], mode: Mode) -> SchemeSpec {
    let sizes = SchemeSizes { u1: channel.x1.size, u2: channel.x2.size, ..SchemeSizes::trivial() };
    let side1 = channel.s1.size * channel.y1.size;
    let side2 = channel.s2.size * channel.y2.size;
    let kernels = [
        vec![1.0],
        vec![1.0],
        vec![1.0],
        px1.to_vec(),
        px2.to_vec(),
        vec![1.0; side1],
        vec![1.0; side2],
        vec![1.0; channel.s1.size * channel.x1.size * channel.y1.size],
        vec![1.0; channel.s2.size * channel.x2.size * channel.y2.size],
    ];
    let f1 = (0..channel.x1.size).flat_map(|x| std::iter::repeat_n(x, channel.s1.size)).collect();
    let f2 = (0..channel.x2.size).flat_map(|x| std::iter::repeat_n(x, channel.s2.size)).collect();
    SchemeSpec::from_tables(channel, sizes, kernels, f1, f2, mode).expect("monostatic scheme is well formed")
}

/// A random probability vector of length `n`, drawn from a flat Dirichlet.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn random_rows<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_simplex(rng, cols)).collect()
}

/// A random channel with the given alphabet sizes and Hamming-like
/// distortion (`d(s, t) = 1` unless `s == t`).
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, sizes: ChannelSizes) -> ChannelSpec {
    let p_s = random_simplex(rng, sizes.s);
    let side = random_rows(rng, sizes.s, sizes.s1 * sizes.s2);
    let kernel =
        random_rows(rng, sizes.x1 * sizes.x2 * sizes.s, sizes.y1 * sizes.y2 * sizes.y * sizes.sr);
    let dist: Vec<Vec<f64>> = (0..sizes.s)
        .map(|s| (0..sizes.s_hat).map(|t| if s == t { 0.0 } else { 1.0 }).collect())
        .collect();
    ChannelSpec::from_tables(sizes, p_s, &side, &kernel, &dist).expect("random channel is well formed")
}

/// Random encoder table over `rows` argument tuples whose last (fastest)
/// coordinate is the side information of size `side`.
pub fn random_encoder<R: Rng + ?Sized>(rng: &mut R, rows: usize, side: usize, inputs: usize, mode: Mode) -> Vec<usize> {
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows / side {
        match mode {
            Mode::Causal => out.extend((0..side).map(|_| rng.gen_range(0..inputs))),
            Mode::StrictlyCausal => {
                let x = rng.gen_range(0..inputs);
                out.extend(std::iter::repeat_n(x, side));
            }
        }
    }
    out
}

/// A random valid scheme for `channel` with auxiliary sizes `sizes`.
pub fn random_scheme<R: Rng + ?Sized>(
    rng: &mut R,
    channel: &ChannelSpec,
    sizes: SchemeSizes,
    mode: Mode,
) -> SchemeSpec {
    let rows = scheme_kernel_rows(channel, sizes);
    let cols = scheme_kernel_cols(sizes);
    let kernels: [Vec<f64>; 9] = std::array::from_fn(|k| random_rows(rng, rows[k], cols[k]).concat());
    let dom1 = sizes.u * sizes.w1 * sizes.u1 * channel.s1.size;
    let dom2 = sizes.u * sizes.w2 * sizes.u2 * channel.s2.size;
    let f1 = random_encoder(rng, dom1, channel.s1.size, channel.x1.size, mode);
    let f2 = random_encoder(rng, dom2, channel.s2.size, channel.x2.size, mode);
    SchemeSpec::from_tables(channel, sizes, kernels, f1, f2, mode).expect("random scheme is well formed")
}
