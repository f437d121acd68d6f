use floorscope::de::Channel;
use floorscope::sim::*;
use floorscope::synth::{plant_topology, random_regular, PlantedCode};
use floorscope::topology::dominant_eight_eight;
use floorscope::TannerGraph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Dense-matrix sum-product in the `phi(x) = -ln tanh(x/2)` form, written
/// without reference to the library decoder.
fn reference_decode(h: &[Vec<u8>], llr: &[f64], max_iters: usize) -> Vec<u8> {
    let (m, n) = (h.len(), llr.len());
    let f = |x: f64| -> f64 {
        let x = x.clamp(1e-12, 50.0);
        -((x / 2.0).tanh()).ln()
    };
    let mut q = vec![vec![0.0; n]; m];
    let mut r = vec![vec![0.0; n]; m];
    for i in 0..m {
        for j in 0..n {
            if h[i][j] == 1 {
                q[i][j] = llr[j];
            }
        }
    }
    let mut hard = vec![0u8; n];
    for _ in 0..max_iters {
        for i in 0..m {
            let cols: Vec<usize> = (0..n).filter(|&j| h[i][j] == 1).collect();
            for &j in &cols {
                let mut sign = 1.0;
                let mut mag = 0.0;
                for &k in &cols {
                    if k != j {
                        sign *= q[i][k].signum();
                        mag += f(q[i][k].abs());
                    }
                }
                r[i][j] = sign * f(mag);
            }
        }
        for j in 0..n {
            let total: f64 = llr[j]
                + (0..m)
                    .filter(|&i| h[i][j] == 1)
                    .map(|i| r[i][j])
                    .sum::<f64>();
            hard[j] = u8::from(total < 0.0);
            for i in 0..m {
                if h[i][j] == 1 {
                    q[i][j] = total - r[i][j];
                }
            }
        }
        let ok = (0..m).all(|i| {
            (0..n)
                .filter(|&j| h[i][j] == 1)
                .fold(0u8, |a, j| a ^ hard[j])
                == 0
        });
        if ok {
            break;
        }
    }
    hard
}

fn dense(g: &TannerGraph) -> Vec<Vec<u8>> {
    (0..g.n_checks())
        .map(|c| {
            let mut row = vec![0u8; g.n_vars()];
            for &v in g.check_neighbors(c) {
                row[v] = 1;
            }
            row
        })
        .collect()
}

fn small_code() -> TannerGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    random_regular(32, 3, 6, &mut rng, 200).unwrap()
}

fn planted() -> PlantedCode {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap()
}

#[test]
fn monte_carlo_agrees_with_reference_decoder() {
    let g = small_code();
    let cfg = SimConfig {
        ebno_db: 2.0,
        max_frames: 4000,
        target_error_events: u64::MAX,
        max_decoder_iters: 30,
        seed: 9,
        ..SimConfig::default()
    };
    let ours = run_mc(&g, &cfg).unwrap();

    let h = dense(&g);
    let sigma2 = Channel::new(2.0, 0.5).sigma2();
    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    let frames = 4000;
    let mut bit_err = 0usize;
    let mut per_frame = Vec::with_capacity(frames);
    for _ in 0..frames {
        let llr: Vec<f64> = (0..g.n_vars())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * (1.0 + sigma2.sqrt() * z) / sigma2
            })
            .collect();
        let e = reference_decode(&h, &llr, 30)
            .iter()
            .filter(|&&b| b == 1)
            .count();
        bit_err += e;
        per_frame.push(e as f64 / g.n_vars() as f64);
    }
    let ref_ber = bit_err as f64 / (frames * g.n_vars()) as f64;
    let var = per_frame.iter().map(|x| (x - ref_ber).powi(2)).sum::<f64>() / (frames - 1) as f64;
    let ref_se = (var / frames as f64).sqrt();
    let diff = (ours.ber.mean() - ref_ber).abs();
    assert!(ours.ber.mean() > 0.0);
    assert!(
        diff < 3.0 * (ours.ber.std_error().hypot(ref_se)),
        "{} vs {ref_ber}",
        ours.ber.mean()
    );
}

#[test]
fn same_frames_decode_identically_to_reference() {
    let g = small_code();
    let h = dense(&g);
    let dec = Decoder::new(&g, DecoderKind::SumProduct);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sigma2 = Channel::new(1.5, 0.5).sigma2();
    for _ in 0..300 {
        let llr: Vec<f64> = (0..g.n_vars())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * (1.0 + sigma2.sqrt() * z) / sigma2
            })
            .collect();
        let a = dec.decode(&llr, 20, 0).decisions;
        let b = reference_decode(&h, &llr, 20);
        let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        assert!(differing <= 1, "{differing} bits differ");
    }
}

#[test]
fn high_snr_reports_an_upper_bound() {
    let g = small_code();
    let cfg = SimConfig {
        ebno_db: 12.0,
        max_frames: 2000,
        ..SimConfig::default()
    };
    let r = run_mc(&g, &cfg).unwrap();
    assert_eq!(r.frame_errors, 0);
    assert_eq!(r.fer_upper_bound, Some(3.0 / 2000.0));
}

#[test]
fn results_do_not_depend_on_workers() {
    let g = small_code();
    let base = SimConfig {
        ebno_db: 2.5,
        max_frames: 3000,
        target_error_events: 150,
        seed: 42,
        ..SimConfig::default()
    };
    let one = run_mc(
        &g,
        &SimConfig {
            workers: 1,
            ..base.clone()
        },
    )
    .unwrap();
    let four = run_mc(&g, &SimConfig { workers: 4, ..base }).unwrap();
    assert_eq!(one, four);
}

#[test]
fn zero_shift_is_monte_carlo() {
    let p = planted();
    let cfg = SimConfig {
        ebno_db: 3.0,
        max_frames: 600,
        target_error_events: u64::MAX,
        is_shift: 0.0,
        max_decoder_iters: 30,
        is_targets: vec![IsTarget {
            vars: p.set_vars.clone(),
            multiplicity: 1,
        }],
        ..SimConfig::default()
    };
    let mc = run_mc(&p.graph, &cfg).unwrap();
    let is = run_is(&p.graph, &cfg).unwrap();
    assert_eq!(is.fer, mc.fer);
    assert_eq!(is.ber, mc.ber);
    assert_eq!(is.fer.sum, is.frame_errors as f64);
    assert!(!is.warnings.is_empty());
}

#[test]
fn planted_set_locks_the_decoder() {
    for seed in 2..7 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap();
        let mut llr = vec![10.0; p.graph.n_vars()];
        for &v in &p.set_vars {
            llr[v] = -6.0;
        }
        let out = Decoder::new(&p.graph, DecoderKind::SumProduct).decode(&llr, 50, 10);
        assert!(!out.converged);
        let wrong: Vec<usize> = (0..p.graph.n_vars())
            .filter(|&v| out.decisions[v] == 1)
            .collect();
        assert_eq!(wrong, p.set_vars);
        let support = identify_failure_support(&p.graph, &out.trace, 5).unwrap();
        assert_eq!(support.vars, p.set_vars);
        assert_eq!(support.class, Some((8, 8)));
    }
}

#[test]
fn strong_channel_escapes_the_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap();
    let mut llr = vec![12.0; p.graph.n_vars()];
    for &v in &p.set_vars {
        llr[v] = -4.0;
    }
    let out = Decoder::new(&p.graph, DecoderKind::SumProduct).decode(&llr, 50, 0);
    assert!(out.converged);
    assert_eq!(out.errors(), 0);
}

#[test]
fn oscillation_is_unclassified() {
    let g = small_code();
    let trace = vec![vec![0, 1], vec![2, 3], vec![0, 1]];
    assert!(identify_failure_support(&g, &trace, 3).is_none());
    let trace = vec![vec![0, 1], vec![0, 1]];
    let s = identify_failure_support(&g, &trace, 2).unwrap();
    assert_eq!(s.vars, vec![0, 1]);
    assert_eq!(s.class, None);
}

#[test]
fn targets_must_be_absorption_sets() {
    let p = planted();
    let cfg = SimConfig {
        is_targets: vec![IsTarget {
            vars: vec![0, 1],
            multiplicity: 1,
        }],
        ..SimConfig::default()
    };
    assert!(run_is(&p.graph, &cfg).is_err());
}

fn codeword_code() -> TannerGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    random_regular(40, 3, 6, &mut rng, 200).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negated_input_gives_complementary_output(seed in 0u64..10_000, snr in 0.0f64..4.0) {
        let g = codeword_code();
        let dec = Decoder::new(&g, DecoderKind::SumProduct);
        let sigma2 = Channel::new(snr, 0.5).sigma2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let llr: Vec<f64> = (0..g.n_vars())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * (1.0 + sigma2.sqrt() * z) / sigma2
            })
            .collect();
        let neg: Vec<f64> = llr.iter().map(|x| -x).collect();
        let a = dec.decode(&llr, 20, 0);
        let b = dec.decode(&neg, 20, 0);
        prop_assert_eq!(a.converged, b.converged);
        for (x, y) in a.decisions.iter().zip(&b.decisions) {
            prop_assert_eq!(x ^ y, 1);
        }
    }

    #[test]
    fn converged_means_zero_syndrome(seed in 0u64..10_000, snr in 0.0f64..4.0, min_sum in any::<bool>()) {
        let g = codeword_code();
        let kind = if min_sum { DecoderKind::MinSum } else { DecoderKind::SumProduct };
        let dec = Decoder::new(&g, kind);
        let sigma2 = Channel::new(snr, 0.5).sigma2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let llr: Vec<f64> = (0..g.n_vars())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * (1.0 + sigma2.sqrt() * z) / sigma2
            })
            .collect();
        let out = dec.decode(&llr, 20, 0);
        prop_assert_eq!(out.converged, g.syndrome_is_zero(&out.decisions));
    }
}
