use ftn_core::polar::{polarize, sc_decode, transform, FNode, LlrVector, PolarCode, LLR_MAX};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `F^⊗s` as a dense 0/1 matrix, `F = [[1,0],[1,1]]`.
fn kron_power(n: usize) -> Vec<Vec<u8>> {
    let mut h = vec![vec![1u8]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[m + i][j] = h[i][j];
                next[m + i][m + j] = h[i][j];
            }
        }
        h = next;
    }
    h
}

fn gf2_row_times(d: &[u8], h: &[Vec<u8>]) -> Vec<u8> {
    let n = d.len();
    (0..n)
        .map(|j| (0..n).fold(0u8, |acc, i| acc ^ (d[i] & h[i][j])))
        .collect()
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<bool>())).collect()
}

#[test]
fn worked_example_matches_dense_product() {
    let code = PolarCode::new(4, 2, 0.5).unwrap();
    let d = code.scatter(&[1, 1]).unwrap();
    assert_eq!(d, vec![0, 0, 1, 1]);
    let h = kron_power(4);
    assert_eq!(code.encode(&[1, 1]).unwrap(), gf2_row_times(&d, &h));
    assert_eq!(code.encode(&[1, 1]).unwrap(), vec![0, 1, 0, 1]);
}

#[test]
fn butterfly_equals_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1, 2, 4, 8, 16, 32, 64] {
        let h = kron_power(n);
        for _ in 0..50 {
            let d = random_bits(&mut rng, n);
            let mut x = d.clone();
            transform(&mut x);
            assert_eq!(x, gf2_row_times(&d, &h), "n = {n}");
        }
    }
}

#[test]
fn zero_message_encodes_to_zero() {
    let code = PolarCode::new(1024, 512, 0.5).unwrap();
    assert_eq!(code.encode(&[0; 512]).unwrap(), vec![0; 1024]);
}

#[test]
fn involution_on_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in 0..1000 {
        let n = 1usize << (t % 9);
        let d = random_bits(&mut rng, n);
        let mut x = d.clone();
        transform(&mut x);
        transform(&mut x);
        assert_eq!(x, d);
    }
}

#[test]
fn noiseless_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n, m) in [(4, 2), (8, 4), (1024, 512)] {
        let code = PolarCode::new(n, m, 0.5).unwrap();
        for _ in 0..1000 {
            let u = random_bits(&mut rng, m);
            let x = code.encode(&u).unwrap();
            let llr = LlrVector::new(
                x.iter()
                    .map(|&b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY })
                    .collect(),
            );
            for fnode in [FNode::MinSum, FNode::Exact] {
                let out = sc_decode(&llr, &code, fnode).unwrap();
                assert_eq!(out.message, u, "n = {n}");
                assert_eq!(out.word, code.scatter(&u).unwrap());
            }
        }
    }
}

#[test]
fn all_frozen_decodes_to_zero() {
    let code = PolarCode::new(16, 0, 0.5).unwrap();
    let llr = LlrVector::new((0..16).map(|i| if i % 3 == 0 { -5.0 } else { 2.0 }).collect());
    let out = code.decode(&llr, FNode::MinSum).unwrap();
    assert!(out.message.is_empty());
    assert_eq!(out.word, vec![0; 16]);
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// SC by definition: bit `i` is decided from the exact bit-channel
/// likelihood given earlier decisions, marginalizing every later input bit
/// by enumeration.
fn exhaustive_sc(llr: &[f64], code: &PolarCode) -> Vec<u8> {
    let n = llr.len();
    let log_p = |d: &[u8]| -> f64 {
        let mut x = d.to_vec();
        transform(&mut x);
        x.iter()
            .zip(llr)
            .map(|(&b, &l)| if b == 0 { 0.5 * l } else { -0.5 * l })
            .sum()
    };
    let mut decided: Vec<u8> = Vec::with_capacity(n);
    for i in 0..n {
        if code.frozen()[i] {
            decided.push(0);
            continue;
        }
        let rest = n - i - 1;
        let mut score = [f64::NEG_INFINITY; 2];
        for (bit, s) in score.iter_mut().enumerate() {
            for tail in 0..(1usize << rest) {
                let mut d = decided.clone();
                d.push(bit as u8);
                d.extend((0..rest).map(|j| ((tail >> j) & 1) as u8));
                *s = log_sum_exp(*s, log_p(&d));
            }
        }
        decided.push(u8::from(score[1] > score[0]));
    }
    decided
}

#[test]
fn exact_sc_matches_exhaustive_oracle() {
    let code = PolarCode::new(8, 4, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sigma = 0.8;
    let mut disagreements_min_sum = 0;
    for _ in 0..200 {
        let u = random_bits(&mut rng, 4);
        let x = code.encode(&u).unwrap();
        let llr: Vec<f64> = x
            .iter()
            .map(|&b| {
                let s = 1.0 - 2.0 * f64::from(b);
                let z: f64 = rng.sample(StandardNormal);
                2.0 * (s + sigma * z) / (sigma * sigma)
            })
            .collect();
        let oracle = exhaustive_sc(&llr, &code);
        let exact = sc_decode(&LlrVector::new(llr.clone()), &code, FNode::Exact).unwrap();
        assert_eq!(exact.word, oracle, "llr = {llr:?}");
        let min_sum = sc_decode(&LlrVector::new(llr), &code, FNode::MinSum).unwrap();
        disagreements_min_sum += usize::from(min_sum.word != oracle);
    }
    // Min-sum only approximates the exact bit-channel likelihoods.
    assert!(disagreements_min_sum < 20, "{disagreements_min_sum}");
}

#[test]
fn capacity_is_conserved_at_every_level() {
    for eps in [0.1, 0.3, 0.5, 0.77] {
        for s in 0..=12 {
            let n = 1usize << s;
            let caps = polarize(n, eps).unwrap();
            let total: f64 = caps.iter().sum();
            assert!((total - n as f64 * (1.0 - eps)).abs() < 1e-9, "n = {n}, ε = {eps}");
            assert!(caps.iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }
}

#[test]
fn extremes_sit_at_the_ends() {
    for s in 1..=10 {
        let n = 1usize << s;
        let caps = polarize(n, 0.5).unwrap();
        let min = caps.iter().copied().fold(f64::INFINITY, f64::min);
        let max = caps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(caps[0], min);
        assert_eq!(caps[n - 1], max);
    }
}

#[test]
fn free_set_dominates_frozen_set() {
    let code = PolarCode::new(1024, 512, 0.5).unwrap();
    let caps = code.capacities();
    let worst_free = code
        .free_positions()
        .iter()
        .map(|&i| caps[i])
        .fold(f64::INFINITY, f64::min);
    let best_frozen = (0..1024)
        .filter(|&i| code.frozen()[i])
        .map(|i| caps[i])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(worst_free >= best_frozen);
    assert_eq!(code.frozen().iter().filter(|&&f| f).count(), 512);
}

#[test]
fn decoding_is_deterministic() {
    let code = PolarCode::new(256, 128, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let llr: Vec<f64> = (0..256).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect();
    let a = code.decode(&LlrVector::new(llr.clone()), FNode::MinSum).unwrap();
    let b = code.decode(&LlrVector::new(llr), FNode::MinSum).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn encode_then_transform_recovers_input_word(
        s in 0u32..=8,
        seed in any::<u64>(),
    ) {
        let n = 1usize << s;
        let m = n / 2;
        let code = PolarCode::new(n, m, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_bits(&mut rng, m);
        let mut x = code.encode(&u).unwrap();
        transform(&mut x);
        prop_assert_eq!(x, code.scatter(&u).unwrap());
    }

    #[test]
    fn clamping_keeps_values_finite(v in prop::collection::vec(any::<f64>(), 1..64)) {
        let l = LlrVector::new(v);
        prop_assert!(l.as_slice().iter().all(|x| x.is_finite() && x.abs() <= LLR_MAX));
    }
}
