use super::*;
use crate::model::block_distortion;
use num_bigint::BigInt;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn b(i: u64) -> BigUint {
    BigUint::from(i)
}

#[test]
fn mix64_reference_values() {
    // SplitMix64 outputs for state 0 step once: the finalizer of 0x9E37...
    assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
    assert_eq!(mix64(1), 0x910A_2DEC_8902_5CC1);
}

#[test]
fn top_bit_shortcut_matches_full_mix() {
    for x in (0..100_000u64).map(|i| mix64(i ^ 0xABCD)) {
        assert_eq!(stream::mix64_top_bit(x), mix64(x) >> 63);
    }
}

#[test]
fn binary_search_matches_generic_scan() {
    let pair = SymmetricPair::hamming(2);
    let codec = Codec::new(&pair, 24, r(1, 4), 5, Scheme::Golomb).unwrap();
    for t in 0..40u64 {
        let x: Vec<usize> = (0..24).map(|j| (mix64(t) >> j & 1) as usize).collect();
        let (i, d) = codec.search(&x).unwrap();
        let scan = (1..)
            .find(|&i| block_distortion(&x, &codec.stream().codeword(i), &pair).unwrap() <= r(1, 4))
            .unwrap();
        assert_eq!(i, scan);
        let y = codec.stream().codeword(i);
        assert_eq!(d, x.iter().zip(&y).filter(|(a, b)| a != b).count() as u64);
    }
}

#[test]
fn codeword_is_deterministic() {
    let a = generate_codeword(0, 1, 8, 2);
    assert_eq!(a.len(), 8);
    assert_eq!(a, generate_codeword(0, 1, 8, 2));
    assert_ne!(
        generate_codeword(0, 2, 64, 2),
        generate_codeword(0, 1, 64, 2)
    );
    let s = CodebookStream::new(7, 5, 3);
    let w = s.codeword(9);
    for (t, &y) in w.iter().enumerate() {
        assert_eq!(s.symbol(9, t as u64 + 1), y);
    }
}

#[test]
fn golomb_examples() {
    assert_eq!(golomb_encode(&b(1), &b(2)).to_string(), "00");
    assert_eq!(golomb_encode(&b(3), &b(2)).to_string(), "100");
    assert_eq!(golomb_encode(&b(4), &b(1)).to_string(), "1110");
    // m = 3: k = 2, u = 1; r = 0 → "0", r = 1 → "10", r = 2 → "11".
    assert_eq!(golomb_encode(&b(1), &b(3)).to_string(), "00");
    assert_eq!(golomb_encode(&b(2), &b(3)).to_string(), "010");
    assert_eq!(golomb_encode(&b(6), &b(3)).to_string(), "1011");
    let bits: Bits = "00".parse().unwrap();
    assert_eq!(golomb_decode(&bits, &b(2)).unwrap(), b(1));
    let cut: Bits = "11".parse().unwrap();
    assert!(matches!(
        golomb_decode(&cut, &b(2)),
        Err(CodecError::MalformedBits(_))
    ));
}

#[test]
fn golomb_roundtrip_and_length() {
    for m in [1u64, 2, 3, 5, 8] {
        let m = b(m);
        for i in (1..=1_000_000u64).step_by(997).chain(1..=200) {
            let bits = golomb_encode(&b(i), &m);
            assert_eq!(golomb_decode(&bits, &m).unwrap(), b(i));
            assert_eq!(b(bits.len() as u64), golomb_length(&b(i), &m));
        }
    }
}

#[test]
fn golomb_parameter_examples() {
    assert_eq!(golomb_parameter(&r(5, 16)), b(2));
    assert_eq!(golomb_parameter(&r(1, 2)), b(1));
    let m = golomb_parameter(&r(1, 10_000)).to_f64().unwrap();
    assert!((m * 1e-4 / std::f64::consts::LN_2 - 1.0).abs() < 0.1);
    // Tiny p: asymptotic branch is continuous with the exact rule.
    let p = BigRational::new(1.into(), BigInt::from(1u64 << 52));
    let m = golomb_parameter(&p).to_f64().unwrap();
    assert!((m / (std::f64::consts::LN_2 * 2f64.powi(52)) - 1.0).abs() < 1e-12);
    let ln_m = ln_biguint(&golomb_parameter_ln(-800.0));
    assert!((ln_m - (std::f64::consts::LN_2.ln() + 800.0)).abs() < 1e-12);
}

#[test]
fn golomb_parameter_rule_holds_exactly() {
    for den in [3i64, 7, 16, 50, 333] {
        for num in 1..den.min(40) {
            let p = r(num, den);
            let m = golomb_parameter(&p).to_u32().unwrap() as i32;
            let rho = BigRational::one() - &p;
            let ok = |m: i32| rho.pow(m) * (BigRational::one() + &rho) <= BigRational::one();
            assert!(ok(m), "p = {p}");
            assert!(m == 1 || !ok(m - 1), "p = {p}");
        }
    }
}

#[test]
fn elias_examples() {
    assert_eq!(elias_delta_encode(&b(1)).to_string(), "1");
    assert_eq!(elias_delta_encode(&b(5)).to_string(), "01101");
    for i in (1..=1_000_000u64).step_by(911).chain(1..=300) {
        let bits = elias_delta_encode(&b(i));
        assert_eq!(elias_delta_decode(&bits).unwrap(), b(i));
        let l = 63 - i.leading_zeros() as u64;
        assert_eq!(
            bits.len() as u64,
            l + 2 * (63 - (l + 1).leading_zeros() as u64) + 1
        );
    }
    let big = BigUint::one() << 3000u32;
    assert_eq!(elias_delta_decode(&elias_delta_encode(&big)).unwrap(), big);
}

fn direct_series(law: &IndexDistribution, len: impl Fn(u64) -> f64) -> f64 {
    (1..200_000u64).map(|k| law.pmf(k) * len(k)).sum()
}

#[test]
fn expected_lengths_match_direct_series() {
    for p in [r(5, 16), r(1, 2), r(1, 7), r(3, 1000)] {
        let law = IndexDistribution::from_exact(p);
        let m = law.golomb_parameter();
        let g = direct_series(&law, |k| golomb_length(&b(k), &m).to_f64().unwrap());
        assert!((law.expected_golomb_bits(&m) - g).abs() < 1e-9);
        let e = direct_series(&law, |k| elias_delta_length(&b(k)) as f64);
        assert!((law.expected_elias_bits() - e).abs() < 1e-9);
    }
    let unary = IndexDistribution::from_exact(r(1, 2));
    assert!((unary.expected_golomb_bits(&b(1)) - 2.0).abs() < 1e-15);
}

#[test]
fn golomb_sits_within_the_entropy_sandwich() {
    let law = IndexDistribution::from_exact(r(5, 16));
    assert!((law.entropy_nats() - 1.98748).abs() < 1e-5);
    let bits = expected_length(&law, Scheme::Golomb).bits;
    let h_bits = law.entropy_nats() / std::f64::consts::LN_2;
    assert!(h_bits <= bits && bits <= h_bits + 1.0);
    assert!(law.entropy_nats() <= -law.ln_p() + 1.0);
    assert!(expected_length(&law, Scheme::EliasDelta).bits >= bits);
}

#[test]
fn tiny_ball_lengths_are_finite() {
    let law = IndexDistribution::from_ln(-900.0);
    let g = expected_length(&law, Scheme::Golomb).nats;
    let e = expected_length(&law, Scheme::EliasDelta).nats;
    assert!(g > 900.0 && g < 903.0, "{g}");
    assert!(e > g);
}

#[test]
fn encode_decode_small_block() {
    let pair = SymmetricPair::hamming(2);
    let codec = Codec::new(&pair, 4, r(1, 4), 11, Scheme::Golomb).unwrap();
    assert_eq!(codec.golomb_m(), &b(2));
    let x = [0, 1, 1, 0];
    let e = codec.encode(&x).unwrap();
    let y = codec.decode(&e.bits).unwrap();
    assert_eq!(y, e.codeword);
    assert!(block_distortion(&x, &y, &pair).unwrap() <= r(1, 4));
    for i in 1..e.index {
        assert!(block_distortion(&x, &codec.stream().codeword(i), &pair).unwrap() > r(1, 4));
    }
    let two: Bits = "00".parse().unwrap();
    assert_eq!(codec.decode(&two).unwrap(), codec.stream().codeword(1));
}

#[test]
fn index_mean_matches_geometric() {
    let pair = SymmetricPair::hamming(2);
    let codec = Codec::new(&pair, 4, r(1, 4), 0, Scheme::Golomb).unwrap();
    let trials = 100_000u64;
    let mut total = 0u64;
    for t in 0..trials {
        let w = mix64(t);
        let x: Vec<usize> = (0..4).map(|j| (w >> j & 1) as usize).collect();
        let c = Codec::new(&pair, 4, r(1, 4), mix64(!t), Scheme::Golomb).unwrap();
        total += c.search(&x).unwrap().0;
    }
    let mean = total as f64 / trials as f64;
    assert!((mean / 3.2 - 1.0).abs() < 0.01, "{mean}");
    let _ = codec;
}

#[test]
fn cap_and_errors() {
    let pair = SymmetricPair::hamming(2);
    let codec = Codec::new(&pair, 64, r(1, 8), 3, Scheme::Golomb)
        .unwrap()
        .with_index_cap(5);
    let err = codec.encode(&[1; 64]).unwrap_err();
    assert!(matches!(err, CodecError::CapExceeded { cap: 5, .. }));
    assert!(Codec::new(&pair, 4, r(1, 2), 0, Scheme::Golomb).is_err());
    assert!(codec.encode(&[0; 3]).is_err());
}

#[test]
fn wrong_seed_breaks_the_distortion_guarantee() {
    let pair = SymmetricPair::hamming(2);
    let enc = Codec::new(&pair, 32, r(1, 4), 1, Scheme::Golomb).unwrap();
    let dec = Codec::new(&pair, 32, r(1, 4), 2, Scheme::Golomb).unwrap();
    let mut violations = 0;
    for t in 0..50u64 {
        let x: Vec<usize> = (0..32).map(|j| (mix64(t) >> j & 1) as usize).collect();
        let e = enc.encode(&x).unwrap();
        let y = dec.decode(&e.bits).unwrap();
        if block_distortion(&x, &y, &pair).unwrap() > r(1, 4) {
            violations += 1;
        }
    }
    assert!(violations >= 45);
}

#[test]
fn container_roundtrip() {
    let pair = SymmetricPair::hamming(3);
    let codec = Codec::new(&pair, 6, r(1, 3), 99, Scheme::EliasDelta).unwrap();
    let source: Vec<usize> = (0..60).map(|i| (mix64(i) % 3) as usize).collect();
    let (c, blocks) = encode_blocks(&codec, &source).unwrap();
    let bytes = c.to_bytes();
    assert_eq!(&bytes[..6], MAGIC);
    assert_eq!(bytes.len(), HEADER_LEN + c.payload.len().div_ceil(8));
    let back = Container::from_bytes(&bytes).unwrap();
    assert_eq!(back, c);
    let y = decode_container(&pair, &back).unwrap();
    let want: Vec<usize> = blocks.iter().flat_map(|e| e.codeword.clone()).collect();
    assert_eq!(y, want);
    assert!(decode_container(&SymmetricPair::hamming(2), &back).is_err());
    assert!(Container::from_bytes(&bytes[..bytes.len() - 1]).is_err());
}
