use floorscope::de::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const RATE: f64 = 1723.0 / 2048.0;

/// 40-digit quadrature of `1 - E[tanh(u/2)]`, frozen.
#[allow(clippy::excessive_precision)]
const PHI_REFERENCE: [(f64, f64); 4] = [
    (0.5, 0.795_945_734_366_499_687_44),
    (2.0, 0.449_599_509_206_672_829_71),
    (10.0, 0.038_462_811_369_382_677_444),
    (40.0, 0.000_012_036_620_875_489_876_589),
];

#[test]
fn phi_matches_reference_values() {
    assert_eq!(phi(0.0).unwrap(), 1.0);
    for (m, want) in PHI_REFERENCE {
        let got = phi(m).unwrap();
        assert!(
            ((got - want) / want).abs() < 1e-12,
            "phi({m}) = {got}, want {want}"
        );
    }
}

#[test]
fn phi_matches_sampling() {
    let m: f64 = 10.0;
    let normal = Normal::new(m, (2.0 * m).sqrt()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let u: f64 = normal.sample(&mut rng);
        let x = 1.0 - (u / 2.0).tanh();
        s += x;
        s2 += x * x;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - phi(m).unwrap()).abs() < 4.0 * se);
}

#[test]
fn branches_agree_at_the_crossover() {
    let a = phi_quadrature(PHI_CROSSOVER).unwrap();
    let b = phi_asymptotic(PHI_CROSSOVER).unwrap();
    assert!(((a - b) / a).abs() < 1e-9);
}

#[test]
fn inverse_round_trip() {
    let mut m = 1e-3;
    while m <= 100.0 {
        let back = phi_inv(phi(m).unwrap()).unwrap();
        assert!((back - m).abs() <= 1e-8 * m.max(1.0), "{m} -> {back}");
        m *= 1.37;
    }
    for m in [500.0, 1e4, 3.7e7] {
        let back = phi_inv_ln(ln_phi(m).unwrap()).unwrap();
        assert!(((back - m) / m).abs() < 1e-8);
    }
}

#[test]
fn phi_domain_errors() {
    assert!(phi(-1.0).is_err());
    assert!(phi(f64::NAN).is_err());
    assert!(phi_inv(0.0).is_err() || phi_inv(0.0).unwrap().is_infinite());
    assert!(phi_inv(1.5).is_err());
}

#[test]
fn evolution_above_threshold() {
    let st = DEState::at(6, 32, Channel::new(5.0, RATE), 12).unwrap();
    assert!(st.m_ex.windows(2).all(|w| w[1] > w[0]));
    assert!(st.gains.iter().all(|&g| g > 0.0 && g < 1.0));
    assert!(st.gains.windows(2).all(|w| w[1] >= w[0]));
    assert!((st.m_lambda - 4.0 * RATE * 10f64.powf(0.5)).abs() < 1e-12);
    assert_eq!(check_gain(&st, 1).unwrap(), st.gains[0]);
    assert!(check_gain(&st, 0).is_err() && check_gain(&st, 13).is_err());
}

#[test]
fn evolution_below_threshold_stalls() {
    let st = DEState::at(6, 32, Channel::new(1.0, RATE), 200).unwrap();
    let last = *st.m_ex.last().unwrap();
    assert!(last < 5.0, "extrinsic mean {last}");
    let tail = &st.m_ex[150..];
    assert!(tail.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-6));
}

#[test]
fn polarity_identity() {
    for pe in [1e-5, 1e-3, 0.1, 0.5] {
        let sum = polarity_reversal_prob(pe, 32, false).unwrap();
        assert!(
            (sum - polarity_reversal_closed(pe, 32)).abs() < 1e-15,
            "{pe}"
        );
        let faithful = polarity_reversal_prob(pe, 32, true).unwrap();
        let single = 30.0 * pe * (1.0 - pe).powi(29);
        assert!((sum - faithful - single).abs() < 1e-15);
    }
    assert!(polarity_reversal_prob(1.5, 32, false).is_err());
}

#[test]
fn raw_error_probability() {
    assert!((raw_error_prob(0.0).unwrap() - 0.5).abs() < 1e-15);
    let pe = raw_error_prob(Channel::new(5.0, RATE).es_n0()).unwrap();
    assert!(pe > 1e-2 && pe < 1.1e-2);
}

proptest! {
    #[test]
    fn phi_is_decreasing(m in 0.0f64..400.0, dm in 1e-3f64..10.0) {
        prop_assert!(phi(m + dm).unwrap() < phi(m).unwrap());
        prop_assert!(ln_phi(m + dm).unwrap() < ln_phi(m).unwrap());
    }

    #[test]
    fn phi_stays_in_unit_interval(m in 0.0f64..1e6) {
        let p = phi(m).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
