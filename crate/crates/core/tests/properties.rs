//! Property tests over random circulant pairs, blocklengths and seeds.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use symrd::codec::{
    elias_delta_decode, elias_delta_encode, elias_delta_length, golomb_decode, golomb_encode,
    golomb_length, Codec, Container, IndexDistribution, Scheme,
};
use symrd::exactdist::{ball_probability, spectrum, BallMode};
use symrd::ldbounds::{rate_function, sandwich};
use symrd::model::{block_distortion_scaled, tilted_channel, tilted_mean, SymmetricPair};
use symrd::numeric::rational_to_f64;
use symrd::rdsolve::rate_distortion;

/// Circulant matrix `d(x, y) = row[(y - x) mod k]` with `row[0] = 0`: every
/// row and column is a permutation of `row`, so the pair is symmetric.
fn circulant() -> impl Strategy<Value = SymmetricPair> {
    (2usize..=4)
        .prop_flat_map(|k| prop::collection::vec(1u64..=4, k - 1))
        .prop_map(|tail| {
            let mut row = vec![0u64];
            row.extend(tail);
            let k = row.len();
            let rows: Vec<Vec<u64>> = (0..k)
                .map(|x| (0..k).map(|y| row[(y + k - x) % k]).collect())
                .collect();
            SymmetricPair::from_integers(&rows).expect("circulant pairs are symmetric")
        })
}

fn hamming() -> impl Strategy<Value = SymmetricPair> {
    (2usize..=3).prop_map(SymmetricPair::hamming)
}

/// Index `idx` of `X^n` in base `k`.
fn string(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let s = idx % k;
            idx /= k;
            s
        })
        .collect()
}

proptest! {
    #[test]
    fn tilted_mean_decreases_in_lambda(pair in circulant(), a in 0.0f64..5.0, step in 0.01f64..2.0) {
        prop_assert!(tilted_mean(&pair, a + step) < tilted_mean(&pair, a));
    }

    #[test]
    fn tilted_channel_rows_are_distributions(pair in circulant(), lambda in 0.0f64..20.0) {
        let ch = tilted_channel(&pair, lambda);
        for row in ch.conditional() {
            prop_assert!(row.iter().all(|&w| w >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // Symmetry makes the output marginal uniform.
        let k = pair.size() as f64;
        for q in ch.output_marginal() {
            prop_assert!((q - 1.0 / k).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_function_and_rate_agree(pair in circulant(), frac in 0.02f64..0.98) {
        let d = frac * pair.d_star_f64();
        let lam = rate_function(&pair, d).unwrap();
        let rd = rate_distortion(&pair, d).unwrap();
        prop_assert!((lam.lambda_star - rd.rate).abs() <= 1e-9);
        prop_assert!(rd.rate > 0.0 && rd.slope < 0.0);
    }

    #[test]
    fn rate_is_convex(pair in circulant(), a in 0.05f64..0.9, gap in 0.01f64..0.04) {
        let ds = pair.d_star_f64();
        let (d0, d1, d2) = (a * ds, (a + gap) * ds, (a + 2.0 * gap) * ds);
        let f = |d| rate_distortion(&pair, d).unwrap().rate;
        prop_assert!(f(d0) - 2.0 * f(d1) + f(d2) >= -1e-12);
    }

    #[test]
    fn spectrum_counts_sum_to_all_strings(pair in circulant(), n in 1usize..=8) {
        let s = spectrum(&pair, n).unwrap();
        prop_assert_eq!(s.total(), BigUint::from(pair.size()).pow(n as u32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_probability_matches_enumeration(
        pair in circulant(),
        n in 1usize..=5,
        frac in 0.05f64..0.95,
        centre in any::<usize>(),
    ) {
        let k = pair.size();
        let total = k.pow(n as u32);
        let radius = BigRational::new(
            ((frac * 1000.0) as i64).into(),
            1000.into(),
        ) * pair.d_star();
        let scaled = &radius * BigRational::from_integer((n as u64 * pair.scale()).into());
        let limit = scaled.floor().to_integer().to_u64().unwrap();
        let x = string(centre % total, n, k);
        let hits = (0..total)
            .filter(|&i| block_distortion_scaled(&x, &string(i, n, k), &pair).unwrap() <= limit)
            .count();
        let p = ball_probability(&pair, n, &radius, BallMode::Exact).unwrap();
        prop_assert_eq!(
            p.prob.unwrap(),
            BigRational::new(hits.into(), total.into())
        );
    }

    #[test]
    fn sandwich_upper_holds_at_every_n(pair in hamming(), n in 1usize..=300, frac in 0.1f64..0.9) {
        let d = BigRational::new(((frac * 100.0) as i64).into(), 100.into()) * pair.d_star();
        let d_f = rational_to_f64(&d);
        let exact = ball_probability(&pair, n, &d, BallMode::Exact).unwrap();
        let s = sandwich(&pair, n, d_f).unwrap();
        prop_assert!(exact.log_prob <= s.log_upper);
    }

    #[test]
    fn golomb_roundtrips(i in 1u64..1_000_000, m in 1u64..5000) {
        let (i, m) = (BigUint::from(i), BigUint::from(m));
        let bits = golomb_encode(&i, &m);
        prop_assert_eq!(BigUint::from(bits.len()), golomb_length(&i, &m));
        prop_assert_eq!(golomb_decode(&bits, &m).unwrap(), i);
    }

    #[test]
    fn elias_roundtrips(i in 1u64..=u64::MAX) {
        let i = BigUint::from(i);
        let bits = elias_delta_encode(&i);
        prop_assert_eq!(bits.len() as u64, elias_delta_length(&i));
        prop_assert_eq!(elias_delta_decode(&bits).unwrap(), i);
    }

    #[test]
    fn index_law_is_a_distribution(num in 1u64..1000) {
        let law = IndexDistribution::from_exact(BigRational::new(num.into(), 1000u64.into()));
        // pmf(k) + tail(k) telescopes to tail(k - 1).
        for k in 1..20 {
            let lhs = law.pmf(k) + law.tail(k);
            prop_assert!((lhs - law.tail(k - 1)).abs() < 1e-12);
        }
        prop_assert!((law.tail(0) - 1.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn codec_is_semifaithful(
        pair in hamming(),
        n in 4usize..=10,
        seed in any::<u64>(),
        golomb in any::<bool>(),
        x_idx in any::<usize>(),
    ) {
        let k = pair.size();
        let radius = pair.d_star() / BigRational::from_integer(2.into());
        let scheme = if golomb { Scheme::Golomb } else { Scheme::EliasDelta };
        let codec = Codec::new(&pair, n, radius.clone(), seed, scheme).unwrap();
        let x = string(x_idx % k.pow(n as u32), n, k);
        let e = codec.encode(&x).unwrap();
        let y = codec.decode(&e.bits).unwrap();
        prop_assert_eq!(&y, &e.codeword);
        let d = block_distortion_scaled(&x, &y, &pair).unwrap();
        let limit = rational_to_f64(&(radius * BigRational::from_integer((n as u64 * pair.scale()).into())));
        prop_assert!(d as f64 <= limit);
    }

    #[test]
    fn container_header_roundtrips(
        n in 1u64..10_000,
        num in 1u64..1000,
        seed in any::<u64>(),
        golomb in any::<bool>(),
        hash in any::<[u8; 32]>(),
        bits in prop::collection::vec(any::<bool>(), 0..200),
    ) {
        let mut payload = symrd::codec::Bits::new();
        for b in bits {
            payload.push(b);
        }
        let c = Container {
            n,
            radius_num: num,
            radius_den: 1000,
            seed,
            scheme: if golomb { Scheme::Golomb } else { Scheme::EliasDelta },
            pair_hash: hash,
            blocks: 3,
            payload,
        };
        let back = Container::from_bytes(&c.to_bytes()).unwrap();
        prop_assert_eq!(back.radius(), BigRational::new(num.into(), 1000u64.into()));
        prop_assert_eq!(back, c);
    }
}

#[test]
fn circulant_constants_are_exact() {
    // Row (0, 1, 3): D* = 4/3, second moment 10/3, variance 14/9.
    let pair = SymmetricPair::from_integers(&[[0, 1, 3], [3, 0, 1], [1, 3, 0]]).unwrap();
    assert_eq!(pair.d_star(), &BigRational::new(4.into(), 3.into()));
    assert_eq!(pair.sigma2(), &BigRational::new(14.into(), 9.into()));
    assert!(pair.d_max() == &BigRational::from_integer(3.into()));
}
