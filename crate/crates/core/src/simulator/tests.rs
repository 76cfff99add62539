use super::*;
use crate::channel::{build_joint, ChannelSizes, Mode, SchemeSizes, DEFAULT_JOINT_CAP};
use crate::seeding::stream;
use crate::toys;

fn noiseless_config(private: f64, n: usize, trials: usize) -> SimConfig {
    let channel = toys::noisy_bit(0.3, 0.0);
    let scheme = toys::monostatic_scheme(&channel, &[0.5, 0.5], &[1.0], Mode::Causal);
    SimConfig {
        channel,
        scheme,
        params: SimParams {
            rates: SimRates { private1: private, ..SimRates::default() },
            n,
            trials,
            epsilon: 0.5,
            seed: 17,
            ..SimParams::default()
        },
    }
}

/// A small random system with every auxiliary binary and every rate
/// positive, so that all stages of the scheme run.
fn rich_config(seed: u64) -> SimConfig {
    let mut rng = stream(seed, &[]);
    let sizes = ChannelSizes { s: 2, s1: 2, s2: 1, x1: 2, x2: 2, y1: 1, y2: 2, y: 2, sr: 1, s_hat: 2 };
    let channel = toys::random_channel(&mut rng, sizes);
    let scheme = toys::random_scheme(&mut rng, &channel, SchemeSizes::default(), Mode::Causal);
    let r = 0.13;
    SimConfig {
        channel,
        scheme,
        params: SimParams {
            rates: SimRates {
                common: r,
                coop1: r,
                private1: r,
                coop2: r,
                private2: r,
                desc1: r,
                desc1_bin: r,
                desc2: r,
                desc2_bin: r,
                refine1: r,
                refine1_bin: r,
                refine2: r,
                refine2_bin: r,
            },
            n: 8,
            blocks: 2,
            epsilon: 0.9,
            alpha1: Some(0.5),
            alpha2: Some(0.5),
            trials: 12,
            seed,
            ..SimParams::default()
        },
    }
}

#[test]
fn wilson_interval_matches_reference_values() {
    let (lo, hi) = wilson_interval(0, 10);
    assert_eq!(lo, 0.0);
    assert!((hi - 0.277_532_8).abs() < 1e-6, "{hi}");
    let (lo, hi) = wilson_interval(5, 10);
    assert!((lo - 0.236_593_3).abs() < 1e-6 && (hi - 0.763_406_7).abs() < 1e-6, "{lo} {hi}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let base = noiseless_config(0.5, 8, 1);
    let bad = [
        SimParams { n: 0, ..base.params.clone() },
        SimParams { blocks: 0, ..base.params.clone() },
        SimParams { epsilon: 1.0, ..base.params.clone() },
        SimParams { delta: 0.0, ..base.params.clone() },
        SimParams { alpha1: Some(-1.0), ..base.params.clone() },
        SimParams { rates: SimRates { coop2: -0.1, ..SimRates::default() }, ..base.params.clone() },
    ];
    for params in bad {
        let cfg = SimConfig { params, ..base.clone() };
        assert!(matches!(run(&cfg), Err(SimError::InvalidConfig(_))));
    }
}

#[test]
fn oversized_codebooks_fail_before_any_trial() {
    let mut cfg = noiseless_config(3.0, 16, 1_000_000);
    assert!(matches!(run(&cfg), Err(SimError::Capacity { .. })));
    cfg.params.codebook_cap = 1 << 10;
    cfg.params.rates.private1 = 0.8;
    assert!(matches!(run(&cfg), Err(SimError::Capacity { .. })));
}

#[test]
fn noiseless_toy_errs_only_through_codeword_collisions() {
    // At n = 8 and rate 1/2 the 16 private codewords collide with
    // probability about 6% per block; a unique typical match on a noiseless
    // channel is always the transmitted codeword.
    let cfg = noiseless_config(0.5, 8, 100);
    let sim = Simulator::new(&cfg).unwrap();
    let mut errors = 0;
    for t in 0..100 {
        let trace = sim.trace(t);
        for (wrong, matches) in trace.block_errors.iter().zip(&trace.backward_matches) {
            if *wrong {
                errors += 1;
                assert_ne!(*matches, 1, "trial {t}");
            }
        }
        assert!((trace.outcome.distortion - 0.3).abs() < 1.0, "distortion is a frequency");
    }
    assert!(errors < 40, "{errors}");

    let long = noiseless_config(0.25, 32, 100);
    let report = run(&long).unwrap();
    assert_eq!(report.message_errors, 0);
    assert_eq!(report.error_rate, 0.0);
}

#[test]
fn rates_above_the_aggregate_bound_fail_often() {
    let channel = toys::monostatic_xor(0.5, 0.1);
    let scheme = toys::monostatic_scheme(&channel, &[0.5, 0.5], &[1.0, 0.0], Mode::Causal);
    let probe = SimConfig { channel: channel.clone(), scheme: scheme.clone(), params: SimParams::default() };
    let bound = rate_feasibility_report(&probe).unwrap().private_information;
    assert!(bound > 0.5);
    let cfg = SimConfig {
        channel,
        scheme,
        params: SimParams {
            rates: SimRates { private1: 1.5 * bound, ..SimRates::default() },
            n: 12,
            trials: 200,
            seed: 4,
            ..SimParams::default()
        },
    };
    let report = run(&cfg).unwrap();
    assert!(report.error_rate > 0.5, "{}", report.error_rate);
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = rich_config(3);
    assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    let other = SimConfig { params: SimParams { seed: 4, ..cfg.params.clone() }, ..cfg.clone() };
    assert_ne!(run(&cfg).unwrap().outcomes, run(&other).unwrap().outcomes);
}

#[test]
fn every_stage_runs_and_invariants_hold() {
    for seed in [1, 2, 5] {
        let cfg = rich_config(seed);
        let sim = Simulator::new(&cfg).unwrap();
        assert!(sim.short_blocks().iter().all(|&l| l > 0), "{:?}", sim.short_blocks());
        let report = sim.run();
        assert_eq!(report.taxonomy.total(), report.failed_trials);
        assert_eq!(report.failed_trials, report.outcomes.iter().filter(|o| o.failure.is_some()).count());
        assert!((0.0..=1.0).contains(&report.error_rate));
        assert!(report.ci_low <= report.error_rate && report.error_rate <= report.ci_high);
        assert!(report.mean_distortion >= 0.0);
        let s1 = cfg.channel.s1.size;
        let s2 = cfg.channel.s2.size;
        for t in 0..cfg.params.trials as u64 {
            let trace = sim.trace(t);
            assert_eq!(trace.outcome, report.outcomes[t as usize]);
            for e in &trace.encoders {
                for i in 0..e.x.len() {
                    let x = if e.encoder == 1 {
                        cfg.scheme.f1_at(e.u[i], e.w[i], e.private[i], e.side[i], s1)
                    } else {
                        cfg.scheme.f2_at(e.u[i], e.w[i], e.private[i], e.side[i], s2)
                    };
                    assert_eq!(x, e.x[i]);
                }
            }
            if trace.events.is_empty() {
                assert!(!trace.outcome.message_error);
                assert_eq!(trace.estimates, trace.true_estimates);
            }
        }
    }
}

#[test]
fn correctly_decoded_trials_use_the_optimal_table_on_the_sent_codewords() {
    let channel = toys::echo(0.2);
    let scheme = toys::monostatic_scheme(&channel, &[0.5, 0.5], &[0.0, 1.0], Mode::Causal);
    let cfg = SimConfig {
        channel,
        scheme,
        params: SimParams {
            rates: SimRates { private1: 0.5, ..SimRates::default() },
            n: 16,
            blocks: 2,
            epsilon: 0.9,
            trials: 60,
            seed: 8,
            ..SimParams::default()
        },
    };
    let sim = Simulator::new(&cfg).unwrap();
    let mut exact = 0;
    for t in 0..60 {
        let trace = sim.trace(t);
        if trace.events.is_empty() {
            exact += 1;
            assert_eq!(trace.estimates, trace.true_estimates);
        }
    }
    assert!(exact > 20, "{exact}");
}

#[test]
fn constant_auxiliaries_flag_every_positive_rate() {
    let channel = toys::monostatic_xor(0.5, 0.1);
    let scheme = crate::channel::SchemeSpec::trivial(&channel);
    let cfg = SimConfig {
        channel,
        scheme,
        params: SimParams { rates: SimRates { private1: 0.1, coop2: 0.1, ..SimRates::default() }, ..SimParams::default() },
    };
    let report = rate_feasibility_report(&cfg).unwrap();
    for c in &report.constraints {
        assert_eq!(c.information, 0.0, "{}", c.name);
        if c.direction == Direction::Below && c.rate > 0.0 {
            assert!(!c.satisfied, "{}", c.name);
        }
    }
    assert!(report.guards.iter().all(|g| g.defaulted && !g.holds));
    assert!(!report.all_satisfied());
}

#[test]
fn slack_is_rate_minus_bound_for_covering_conditions() {
    let mut rng = stream(12, &[]);
    let sizes = ChannelSizes { s: 2, s1: 2, s2: 2, x1: 2, x2: 2, y1: 2, y2: 2, y: 2, sr: 1, s_hat: 2 };
    let channel = toys::random_channel(&mut rng, sizes);
    let scheme = toys::random_scheme(&mut rng, &channel, SchemeSizes::default(), Mode::Causal);
    let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
    let cover = joint.mutual_information(&["T1"], &["S1", "Y1"], &[] as &[&str]).unwrap();
    let cfg = SimConfig {
        channel: channel.clone(),
        scheme: scheme.clone(),
        params: SimParams { rates: SimRates { desc1: cover + 0.01, ..SimRates::default() }, ..SimParams::default() },
    };
    let report = rate_feasibility_report(&cfg).unwrap();
    let row = report.constraints.iter().find(|c| c.name == "first_cover1").unwrap();
    assert!((row.slack - 0.01).abs() < 1e-12);
    assert!(row.satisfied);
}

#[test]
fn reported_informations_match_direct_recomputation() {
    for seed in 0..4 {
        let mut rng = stream(seed, &[7]);
        let sizes = ChannelSizes { s: 2, s1: 2, s2: 2, x1: 2, x2: 2, y1: 2, y2: 2, y: 2, sr: 2, s_hat: 2 };
        let channel = toys::random_channel(&mut rng, sizes);
        let scheme = toys::random_scheme(&mut rng, &channel, SchemeSizes::default(), Mode::Causal);
        let joint = build_joint(&channel, &scheme, DEFAULT_JOINT_CAP).unwrap();
        let rates = SimRates { common: 0.1, coop1: 0.2, private2: 0.05, refine1_bin: 0.03, ..SimRates::default() };
        let cfg = SimConfig { channel, scheme, params: SimParams { rates, ..SimParams::default() } };
        let report = rate_feasibility_report(&cfg).unwrap();
        let get = |name: &str| report.constraints.iter().find(|c| c.name == name).unwrap().clone();
        let i = |a: &[&str], b: &[&str], c: &[&str]| joint.mutual_information(a, b, c).unwrap();
        let tz = ["T1", "T2", "Y", "SR"];
        let common = get("common");
        assert!((common.information - i(&["U"], &tz, &[])).abs() < 1e-12);
        assert!((common.slack - (common.information - 0.3)).abs() < 1e-12);
        let fb = get("feedback1");
        assert!((fb.information - i(&["W1"], &["Y2", "S2"], &["U", "W2", "U2"])).abs() < 1e-12);
        let ctx = ["U", "W1", "W2", "U1", "U2", "T1", "T2"];
        let f = get("forward_sum");
        let mut ctx_z = ctx.to_vec();
        ctx_z.extend(["Y", "SR"]);
        let direct = i(&["V1"], &["V2", "Y", "SR"], &ctx) + i(&["V2"], &["V1", "Y", "SR"], &ctx)
            - i(&["V1"], &["V2"], &ctx_z);
        assert!((f.information - direct).abs() < 1e-12);
        let p = get("private_sum");
        assert!((p.information - i(&["U1", "U2"], &tz, &["U", "W1", "W2"])).abs() < 1e-12);
        assert!((p.rate - 0.05).abs() < 1e-15);
        let g = &report.guards[1];
        assert!((g.information - i(&["W2", "U2"], &["Y", "SR", "S1", "Y1"], &["U", "W1", "U1"])).abs() < 1e-12);
    }
}

#[test]
fn sweep_rows_follow_the_csv_layout() {
    let cfg = noiseless_config(0.5, 8, 20);
    let reports = sweep(&cfg, &[8, 12]).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1].n, 12);
    let row = reports[0].csv_row();
    assert_eq!(row.split(',').count(), SimReport::CSV_HEADER.split(',').count());
    assert!(row.starts_with("8,20,"));
}
